#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "comire/errors.hpp"

namespace comire {

// Linear interpolation between order statistics (the "type 7" rule):
// h = (n - 1) p, q = x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h)).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw UsageError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, p);
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw UsageError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample variance with n - 1 denominator; 0 for fewer than two values.
inline double variance_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace comire
