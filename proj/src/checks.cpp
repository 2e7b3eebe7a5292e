#include "comire/checks.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "comire/errors.hpp"
#include "comire/risk.hpp"
#include "comire/summary.hpp"

namespace comire {

Dataset simulate_predictive_dataset(RngStream& rng, const ParamState& draw,
                                    const SplineBasis& basis, const std::vector<double>& x_values) {
    Dataset out;
    out.x = x_values;
    out.y.resize(x_values.size());
    for (std::size_t i = 0; i < x_values.size(); ++i) {
        const double beta = basis.beta(draw.w, x_values[i]);
        if (sample_bernoulli(rng, beta)) {
            out.y[i] = draw.high.mu_inf + rng.normal() / std::sqrt(draw.high.tau_inf);
        } else {
            const auto h = sample_categorical(rng, draw.low.nu0);
            out.y[i] = draw.low.mu0[h] + rng.normal() / std::sqrt(draw.low.tau0[h]);
        }
    }
    return out;
}

SmoothedCurve smoothed_empirical_cdf(const Dataset& data, double a,
                                     const std::vector<double>& dose_grid, double bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw DomainError("smoothed cdf: bandwidth must be positive");
    }
    SmoothedCurve out(dose_grid.size());
    for (std::size_t g = 0; g < dose_grid.size(); ++g) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double u = (data.x[i] - dose_grid[g]) / bandwidth;
            const double k = std::exp(-0.5 * u * u);
            den += k;
            if (data.y[i] <= a) num += k;
        }
        if (den > 0.0) out[g] = std::clamp(num / den, 0.0, 1.0);
    }
    return out;
}

double silverman_bandwidth(const std::vector<double>& x) {
    if (x.size() < 2) throw UsageError("bandwidth: need at least two doses");
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    const double sd = std::sqrt(variance_of(sorted));
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) throw DomainError("bandwidth: doses have no spread");
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw UsageError("grid: need at least two points");
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k) {
        g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return g;
}

PpcResult run_ppc(const PosteriorDraws& draws, const SplineBasis& basis, const Dataset& data,
                  const PpcOptions& options) {
    if (options.replicates == 0) throw UsageError("ppc: need at least one replicate");
    if (options.replicates > draws.size()) {
        throw UsageError("ppc: more replicates requested than retained draws");
    }
    data.validate();

    PpcResult out;
    if (options.dose_grid.empty()) {
        out.grid = linear_grid(0.0, quantile(data.x, 0.99), 100);
    } else {
        out.grid = options.dose_grid;
    }
    const double bandwidth = options.bandwidth.value_or(silverman_bandwidth(data.x));
    out.observed_curve = smoothed_empirical_cdf(data, options.threshold, out.grid, bandwidth);

    const std::size_t R = options.replicates;
    out.replicate_draws.resize(R);
    for (std::size_t k = 0; k < R; ++k) out.replicate_draws[k] = k * draws.size() / R;
    out.replicate_curves.resize(R);

    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(R, std::thread::hardware_concurrency()));
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < R; k += workers) {
                        RngStream rng(options.seed, k);
                        const auto replicate = simulate_predictive_dataset(
                            rng, draws.draws[out.replicate_draws[k]], basis, data.x);
                        out.replicate_curves[k] =
                            smoothed_empirical_cdf(replicate, options.threshold, out.grid, bandwidth);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::size_t counted = 0;
    std::size_t outside = 0;
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
        if (!out.observed_curve[g]) continue;
        double lo = kInf;
        double hi = -kInf;
        for (const auto& curve : out.replicate_curves) {
            if (!curve[g]) continue;
            lo = std::min(lo, *curve[g]);
            hi = std::max(hi, *curve[g]);
        }
        if (lo > hi) continue;
        ++counted;
        const double v = *out.observed_curve[g];
        if (v < lo || v > hi) ++outside;
    }
    out.tail_flag = counted ? static_cast<double>(outside) / static_cast<double>(counted) : 0.0;
    return out;
}

double spectral_density_at_zero(const std::vector<double>& series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n == 0) throw UsageError("spectral density: empty series");
    const double m = mean_of(series);
    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) acc += (series[t] - m) * (series[t + lag] - m);
        return acc / static_cast<double>(n);
    };
    double s = autocov(0);
    const std::size_t L = std::min(max_lag, n - 1);
    for (std::size_t k = 1; k <= L; ++k) {
        s += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(L + 1)) * autocov(k);
    }
    return std::max(s, 0.0);
}

std::optional<double> geweke_z(const std::vector<double>& chain, double first_frac,
                               double last_frac) {
    if (chain.size() < 100) throw UsageError("geweke: chain shorter than 100");
    if (!(first_frac > 0.0 && last_frac > 0.0 && first_frac + last_frac <= 1.0)) {
        throw UsageError("geweke: invalid window fractions");
    }
    const auto n = chain.size();
    const auto n1 = static_cast<std::size_t>(std::floor(first_frac * static_cast<double>(n)));
    const auto n2 = static_cast<std::size_t>(std::floor(last_frac * static_cast<double>(n)));
    const std::vector<double> first(chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(n1));
    const std::vector<double> last(chain.end() - static_cast<std::ptrdiff_t>(n2), chain.end());
    const auto lag = [](std::size_t len) {
        return static_cast<std::size_t>(std::floor(0.04 * static_cast<double>(len)));
    };
    const double s1 = spectral_density_at_zero(first, lag(n1));
    const double s2 = spectral_density_at_zero(last, lag(n2));
    const double se2 = s1 / static_cast<double>(n1) + s2 / static_cast<double>(n2);
    if (!(se2 > 0.0)) return std::nullopt;
    return (mean_of(first) - mean_of(last)) / std::sqrt(se2);
}

std::vector<MonitoredScalar> monitored_scalars(const PosteriorDraws& draws, const SplineBasis& basis,
                                               double threshold, const std::vector<double>& doses) {
    std::vector<MonitoredScalar> out;
    for (int chain_id : draws.chain_list()) {
        const auto states = draws.chain(chain_id);
        auto add = [&](std::string name, auto&& fn) {
            MonitoredScalar m{std::move(name), chain_id, {}};
            m.values.reserve(states.size());
            for (const auto& s : states) m.values.push_back(fn(s));
            out.push_back(std::move(m));
        };
        add("mean_zero", [](const ParamState& s) { return s.low.mean(); });
        add("mu_inf", [](const ParamState& s) { return s.high.mu_inf; });
        add("tau_inf", [](const ParamState& s) { return s.high.tau_inf; });
        add("cdf_zero", [&](const ParamState& s) { return cdf_low(s, threshold); });
        add("cdf_inf", [&](const ParamState& s) { return cdf_high(s, threshold); });
        add("risk_inf", [&](const ParamState& s) { return risk_at_infinity(s, threshold); });
        for (double x : doses) {
            add(fmt::format("beta({})", x), [&](const ParamState& s) { return basis.beta(s.w, x); });
        }
    }
    return out;
}

std::vector<GewekeEntry> geweke_report(const std::vector<MonitoredScalar>& scalars) {
    std::vector<GewekeEntry> out;
    out.reserve(scalars.size());
    for (const auto& s : scalars) out.push_back({s.name, s.chain_id, geweke_z(s.values)});
    return out;
}

}  // namespace comire
