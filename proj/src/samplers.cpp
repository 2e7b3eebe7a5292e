#include "comire/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "comire/errors.hpp"

namespace comire {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kTailCutoff = 5.0;
// Truncation regions lighter than this are treated as numerically empty.
const double kLogMinMass = std::log(1e-300);

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
    return std::seed_seq{
        static_cast<std::uint32_t>(seed & 0xffffffffu),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id & 0xffffffffu),
        static_cast<std::uint32_t>(stream_id >> 32),
        0x636f6d69u};
}

// log of the standard normal mass on [a, b] with a > 0, computed from upper
// tail probabilities so that deep tails keep their relative precision.
double log_upper_tail_mass(double a, double b) {
    const double la = log_std_normal_cdf(-a);
    if (std::isinf(b)) return la;
    const double lb = log_std_normal_cdf(-b);
    return la + std::log1p(-std::exp(lb - la));
}

// Robert (1995) exponential rejection for the standard normal on [a, b],
// a > 0 far into the upper tail.
double sample_upper_tail(RngStream& rng, double a, double b) {
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    const double span_mass = std::isinf(b) ? 1.0 : -std::expm1(-rate * (b - a));
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double z = a - std::log1p(-rng.uniform() * span_mass) / rate;
        const double diff = z - rate;
        if (std::log(rng.uniform()) <= -0.5 * diff * diff) return z;
    }
    throw NumericalError("truncated normal: tail rejection failed to accept");
}

// Standardized draw on (a, b).
double sample_standard_truncated(RngStream& rng, double a, double b) {
    if (a > kTailCutoff) {
        if (log_upper_tail_mass(a, b) < kLogMinMass) {
            throw NumericalError("truncated normal: region [" + std::to_string(a) + ", " +
                                 std::to_string(b) +
                                 "] (standardized) has probability below 1e-300");
        }
        return sample_upper_tail(rng, a, b);
    }
    if (b < -kTailCutoff) return -sample_standard_truncated(rng, -b, -a);

    if (a >= 0.0) {
        // Work with upper tail probabilities so the region stays resolved.
        const double qa = std_normal_ccdf(a);
        const double qb = std_normal_ccdf(b);
        const double u = qb + rng.uniform() * (qa - qb);
        return -std_normal_quantile(u);
    }
    if (b <= 0.0) {
        const double pa = std_normal_cdf(a);
        const double pb = std_normal_cdf(b);
        return std_normal_quantile(pa + rng.uniform() * (pb - pa));
    }
    // Interval straddles zero.
    const double pa = std_normal_cdf(a);
    const double pb = std_normal_cdf(b);
    if (pb - pa > 0.25) {
        for (;;) {
            const double z = rng.normal();
            if (z > a && z < b) return z;
        }
    }
    return std_normal_quantile(pa + rng.uniform() * (pb - pa));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    auto seq = make_seed_seq(seed, stream_id);
    engine_.seed(seq);
}

double RngStream::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return std_normal_quantile(uniform()); }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log_std_normal_cdf(double z) {
    if (z > -35.0) return std::log(std_normal_cdf(z));
    // Asymptotic expansion of the Mills ratio.
    const double z2inv = 1.0 / (z * z);
    const double series =
        1.0 - z2inv * (1.0 - 3.0 * z2inv * (1.0 - 5.0 * z2inv * (1.0 - 7.0 * z2inv)));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log(series);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        throw DomainError("std_normal_quantile: p outside [0, 1]");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double normal_log_pdf(double y, double mean, double precision) {
    const double r = y - mean;
    return 0.5 * std::log(precision) - kLogSqrt2Pi - 0.5 * precision * r * r;
}

double log_add_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -kInf;
    const double m = *std::max_element(values.begin(), values.end());
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(shape, rate * x);
}

double gamma_quantile(double p, double shape, double rate) {
    return boost::math::gamma_p_inv(shape, p) / rate;
}

double sample_log_gamma(RngStream& rng, double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("gamma: shape must be positive and finite");
    }
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        return sample_log_gamma(rng, shape + 1.0) + std::log(rng.uniform()) / shape;
    }
    // Marsaglia & Tsang (2000).
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d * v);
    }
}

double sample_gamma(RngStream& rng, double shape, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw DomainError("gamma: rate must be positive and finite");
    }
    return std::exp(sample_log_gamma(rng, shape)) / rate;
}

std::vector<double> sample_dirichlet(RngStream& rng, std::span<const double> concentration) {
    if (concentration.empty()) throw DomainError("dirichlet: empty concentration");
    for (double a : concentration) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw DomainError("dirichlet: concentrations must be positive and finite");
        }
    }
    std::vector<double> out(concentration.size());
    if (out.size() == 1) {
        out[0] = 1.0;
        return out;
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = sample_log_gamma(rng, concentration[k]);
    const double norm = log_sum_exp(out);
    for (double& v : out) v = std::exp(v - norm);
    return out;
}

std::size_t sample_categorical(RngStream& rng, std::span<const double> weights) {
    if (weights.empty()) throw DomainError("categorical: empty weight vector");
    double total = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double w = weights[k];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("categorical: weights must be finite and nonnegative");
        }
        if (w > 0.0) last_positive = k;
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("categorical: all weights are zero");
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (target < acc && weights[k] > 0.0) return k;
    }
    return last_positive;
}

bool sample_bernoulli(RngStream& rng, double p) { return rng.uniform() < p; }

double sample_truncated_normal(RngStream& rng, double mean, double variance, double lower,
                               double upper) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw DomainError("truncated normal: variance must be positive and finite");
    }
    if (!std::isfinite(mean)) throw DomainError("truncated normal: mean must be finite");
    if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
        throw DomainError("truncated normal: requires lower < upper");
    }
    const double sd = std::sqrt(variance);
    const double a = (lower - mean) / sd;
    const double b = (upper - mean) / sd;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double x = mean + sd * sample_standard_truncated(rng, a, b);
        if (x > lower && x < upper) return x;
    }
    throw NumericalError("truncated normal: interval (" + std::to_string(lower) + ", " +
                         std::to_string(upper) + ") too narrow to resolve");
}

TruncatedNormalMoments truncated_normal_moments(double mean, double variance, double lower,
                                                double upper) {
    const double sd = std::sqrt(variance);
    const double a = (lower - mean) / sd;
    const double b = (upper - mean) / sd;
    const double pa = std::isinf(a) ? 0.0 : std_normal_pdf(a);
    const double pb = std::isinf(b) ? 0.0 : std_normal_pdf(b);
    const double apa = std::isinf(a) ? 0.0 : a * pa;
    const double bpb = std::isinf(b) ? 0.0 : b * pb;
    // Mass from whichever side keeps precision.
    const double mass = (a > 0.0) ? std_normal_ccdf(a) - std_normal_ccdf(b)
                                  : std_normal_cdf(b) - std_normal_cdf(a);
    const double ratio = (pa - pb) / mass;
    return {mean + sd * ratio, variance * (1.0 + (apa - bpb) / mass - ratio * ratio)};
}

}  // namespace comire
