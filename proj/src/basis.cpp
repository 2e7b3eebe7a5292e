#include "comire/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "comire/errors.hpp"

namespace comire {

BetaWeights::BetaWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw InvariantError("BetaWeights: empty weight vector");
    double total = 0.0;
    for (double v : w_) {
        if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
            throw InvariantError("BetaWeights: entry outside [0, 1]");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw InvariantError("BetaWeights: weights sum to " + std::to_string(total) +
                             ", not 1");
    }
}

SplineBasis::SplineBasis(int degree, std::vector<double> inner_knots, double dose_max)
    : degree_(degree), inner_knots_(std::move(inner_knots)), dose_max_(dose_max) {
    if (degree_ < 1) throw ConfigError("spline basis: degree must be at least 1");
    if (!(dose_max_ > 0.0) || !std::isfinite(dose_max_)) {
        throw ConfigError("spline basis: dose range must be positive");
    }
    if (inner_knots_.empty()) throw ConfigError("spline basis: need at least one inner knot");
    double prev = 0.0;
    for (double k : inner_knots_) {
        if (!(k > prev)) {
            throw ConfigError("spline basis: knots must be strictly increasing from 0");
        }
        prev = k;
    }
    if (!(dose_max_ > prev)) {
        throw ConfigError("spline basis: inner knots must lie below the dose maximum");
    }

    const auto d = static_cast<std::size_t>(degree_);
    knots_.assign(d + 1, 0.0);
    knots_.insert(knots_.end(), inner_knots_.begin(), inner_knots_.end());
    knots_.insert(knots_.end(), d + 1, dose_max_);
    bspline_count_ = inner_knots_.size() + d + 1;
    ispline_count_ = bspline_count_ - 2;
}

std::vector<double> SplineBasis::evaluate(double x) const {
    std::vector<double> out(size());
    evaluate_into(x, out);
    return out;
}

void SplineBasis::evaluate_into(double x, std::span<double> out) const {
    if (std::isnan(x) || x < 0.0) throw DomainError("spline basis: dose must be nonnegative");
    if (out.size() != size()) throw UsageError("spline basis: output span has wrong size");

    out[zero_index()] = x > dose_max_ ? 1.0 : 0.0;
    if (x >= dose_max_) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(ispline_count_), 1.0);
        return;
    }

    // Knot span: knots_[span] <= x < knots_[span + 1], degree <= span < bspline_count.
    const auto d = static_cast<std::size_t>(degree_);
    const auto first = knots_.begin() + static_cast<std::ptrdiff_t>(d);
    const auto last = knots_.begin() + static_cast<std::ptrdiff_t>(bspline_count_);
    const auto span = static_cast<std::size_t>(std::upper_bound(first, last, x) - knots_.begin()) - 1;

    // Nonzero B-splines B_{span-d} .. B_{span} by the triangular recurrence.
    std::vector<double> basis(d + 1);
    std::vector<double> lft(d + 1);
    std::vector<double> rgt(d + 1);
    basis[0] = 1.0;
    for (std::size_t j = 1; j <= d; ++j) {
        lft[j] = x - knots_[span + 1 - j];
        rgt[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double temp = basis[r] / (rgt[r + 1] + lft[j - r]);
            basis[r] = saved + rgt[r + 1] * temp;
            saved = lft[j - r] * temp;
        }
        basis[j] = saved;
    }

    // I-spline s (suffix start, 1 <= s <= bspline_count - 2) goes to out[s - 1].
    const std::size_t lowest = span - d;
    for (std::size_t s = 1; s <= ispline_count_; ++s) {
        double v;
        if (s <= lowest) {
            v = 1.0;
        } else if (s > span) {
            v = 0.0;
        } else {
            v = 0.0;
            for (std::size_t l = s; l <= span; ++l) v += basis[l - lowest];
        }
        out[s - 1] = std::clamp(v, 0.0, 1.0);
    }
}

double SplineBasis::beta(const BetaWeights& w, double x) const {
    if (w.size() != size()) throw UsageError("beta: weight vector length does not match basis");
    std::vector<double> psi = evaluate(x);
    const auto wv = w.values();
    const double b = std::inner_product(psi.begin(), psi.end(), wv.begin(), 0.0);
    return std::clamp(b, 0.0, 1.0);
}

SplineBasis build_basis(int inner_knot_count, double dose_max, int degree) {
    if (inner_knot_count < 1) throw ConfigError("spline basis: need at least one inner knot");
    if (degree < 1) throw ConfigError("spline basis: degree must be at least 1");
    if (!(dose_max > 0.0) || !std::isfinite(dose_max)) {
        throw ConfigError("spline basis: dose range must be positive");
    }
    std::vector<double> inner(static_cast<std::size_t>(inner_knot_count));
    for (int k = 0; k < inner_knot_count; ++k) {
        inner[static_cast<std::size_t>(k)] = dose_max * (k + 1) / (inner_knot_count + 1);
    }
    return SplineBasis(degree, std::move(inner), dose_max);
}

}  // namespace comire
