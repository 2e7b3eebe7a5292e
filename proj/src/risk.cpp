#include "comire/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "comire/errors.hpp"
#include "comire/summary.hpp"

namespace comire {

namespace {

double simpson_recursive(const std::function<double(double)>& f, double a, double b, double fa,
                         double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recursive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recursive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on a fixed pre-split of [lo, hi]; the pre-split keeps the
// kinks of |f - g| from starving the recursion.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureOptions& options) {
    constexpr int kPieces = 64;
    const double width = (hi - lo) / kPieces;
    double total = 0.0;
    for (int k = 0; k < kPieces; ++k) {
        const double a = lo + k * width;
        const double b = (k + 1 == kPieces) ? hi : a + width;
        const double fa = f(a);
        const double fb = f(b);
        const double fm = f(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_recursive(f, a, b, fa, fm, fb, whole, options.tolerance / kPieces,
                                   options.max_depth);
    }
    return total;
}

std::vector<double> sorted_column(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

void RiskQuery::validate() const {
    if (!(q > 0.0 && q < 1.0)) throw UsageError("risk query: q must lie in (0, 1)");
    if (!std::isfinite(threshold)) throw UsageError("risk query: threshold must be finite");
    for (std::size_t k = 0; k < dose_grid.size(); ++k) {
        if (!(dose_grid[k] >= 0.0) || (k > 0 && !(dose_grid[k] > dose_grid[k - 1]))) {
            throw UsageError("risk query: dose grid must be nonnegative and strictly increasing");
        }
    }
}

double risk_at_infinity(const ParamState& state, double a) {
    return cdf_high(state, a) - cdf_low(state, a);
}

double additional_risk(const ParamState& state, const SplineBasis& basis, double x, double a) {
    // Evaluated from the definition F_x(a) - F_0(a), not from the factorization.
    return conditional_cdf(state, basis, x, a) - conditional_cdf(state, basis, 0.0, a);
}

std::optional<double> bmd(const ParamState& state, const SplineBasis& basis, double q, double a,
                          DoseInterval interval) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("bmd: q must lie in (0, 1)");
    if (!(interval.lower >= 0.0 && interval.upper > interval.lower)) {
        throw DomainError("bmd: invalid search interval");
    }
    const double r_inf = risk_at_infinity(state, a);
    if (!(r_inf > 0.0)) {
        throw ModelDegeneracyError("bmd: R_A(inf, a) = " + std::to_string(r_inf) +
                                   " is not positive at a = " + std::to_string(a));
    }
    const double target = q / r_inf;
    if (basis.beta(state.w, interval.lower) >= target) return interval.lower;
    if (basis.beta(state.w, interval.upper) < target) return std::nullopt;
    // beta(lo) < target <= beta(hi)
    double lo = interval.lower;
    double hi = interval.upper;
    while (hi - lo > kBmdTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (basis.beta(state.w, mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::optional<double> bmd(const ParamState& state, const SplineBasis& basis, double q, double a) {
    return bmd(state, basis, q, a, DoseInterval{0.0, basis.dose_max()});
}

namespace {

template <class Fn>
std::vector<CurvePoint> summarize_curve(const PosteriorDraws& draws,
                                        const std::vector<double>& grid, Fn&& value) {
    if (draws.empty()) throw UsageError("posterior curve: no draws");
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    std::vector<double> column(draws.size());
    for (double x : grid) {
        for (std::size_t k = 0; k < draws.size(); ++k) column[k] = value(draws.draws[k], x);
        const auto sorted = sorted_column(column);
        out.push_back({x, mean_of(sorted), quantile_sorted(sorted, 0.025),
                       quantile_sorted(sorted, 0.975)});
    }
    return out;
}

}  // namespace

std::vector<CurvePoint> posterior_risk_curve(const PosteriorDraws& draws, const SplineBasis& basis,
                                             const RiskQuery& query) {
    query.validate();
    return summarize_curve(draws, query.dose_grid, [&](const ParamState& s, double x) {
        return additional_risk(s, basis, x, query.threshold);
    });
}

std::vector<CurvePoint> posterior_beta_curve(const PosteriorDraws& draws, const SplineBasis& basis,
                                             const std::vector<double>& dose_grid) {
    return summarize_curve(draws, dose_grid,
                           [&](const ParamState& s, double x) { return basis.beta(s.w, x); });
}

BmdSummary posterior_bmd(const PosteriorDraws& draws, const SplineBasis& basis, double q,
                         double a) {
    if (draws.empty()) throw UsageError("posterior_bmd: no draws");
    BmdSummary out{.q = q, .samples = {}, .unattained = 0, .mean = 0, .lo95 = 0, .hi95 = 0, .bmdl = 0};
    for (const auto& s : draws.draws) {
        std::optional<double> v;
        if (risk_at_infinity(s, a) > 0.0) v = bmd(s, basis, q, a);
        if (v) {
            out.samples.push_back(*v);
        } else {
            ++out.unattained;
        }
    }
    if (out.samples.empty()) {
        throw ModelDegeneracyError("posterior_bmd: no draw reaches q = " + std::to_string(q));
    }
    const auto sorted = sorted_column(out.samples);
    out.mean = mean_of(sorted);
    out.lo95 = quantile_sorted(sorted, 0.025);
    out.hi95 = quantile_sorted(sorted, 0.975);
    out.bmdl = quantile_sorted(sorted, 0.05);
    return out;
}

double total_variation(const std::function<double(double)>& f, const std::function<double(double)>& g,
                       double lo, double hi, const QuadratureOptions& options) {
    const auto integrand = [&](double y) { return std::abs(f(y) - g(y)); };
    return 0.5 * adaptive_simpson(integrand, lo, hi, options);
}

double tv_ratio(const ParamState& state, const SplineBasis& basis, double x,
                const QuadratureOptions& options) {
    double lo = state.high.mu_inf;
    double hi = state.high.mu_inf;
    double sd_max = 1.0 / std::sqrt(state.high.tau_inf);
    for (std::size_t h = 0; h < state.low.size(); ++h) {
        lo = std::min(lo, state.low.mu0[h]);
        hi = std::max(hi, state.low.mu0[h]);
        sd_max = std::max(sd_max, 1.0 / std::sqrt(state.low.tau0[h]));
    }
    lo -= 10.0 * sd_max;
    hi += 10.0 * sd_max;

    const double beta = basis.beta(state.w, x);
    const auto f0 = [&](double y) { return density_low(state, y); };
    const auto finf = [&](double y) { return density_high(state, y); };
    const auto fx = [&](double y) { return conditional_density_at_beta(state, beta, y); };
    const double denom = total_variation(finf, f0, lo, hi, options);
    if (!(denom > 1e-12)) {
        throw ModelDegeneracyError("tv_ratio: extremal densities coincide");
    }
    return total_variation(fx, f0, lo, hi, options) / denom;
}

}  // namespace comire
