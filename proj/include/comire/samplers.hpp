#pragma once

// Random variate generators and the handful of special functions the sampler
// and the risk functionals need.

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace comire {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One independent stream of pseudo-random numbers. The engine state is derived
// from (seed, stream_id) through std::seed_seq, so distinct stream ids give
// unrelated sequences and identical pairs reproduce the sequence bit for bit.
// A stream is owned by one thread at a time.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform();
    // Standard normal by inversion.
    double normal();

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

// Phi(z).
double std_normal_cdf(double z);
// 1 - Phi(z), accurate in the upper tail.
double std_normal_ccdf(double z);
// log Phi(z), finite for all finite z.
double log_std_normal_cdf(double z);
// Inverse of Phi on (0, 1).
double std_normal_quantile(double p);
double std_normal_pdf(double z);

// log N(y; mean, 1/precision).
double normal_log_pdf(double y, double mean, double precision);

// log(exp(a) + exp(b)) with -inf handled.
double log_add_exp(double a, double b);
// log sum exp over a span, -inf when all entries are -inf.
double log_sum_exp(std::span<const double> values);

// Regularized lower incomplete gamma P(shape, x).
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double p, double shape, double rate);

// Gamma(shape, rate): mean shape / rate.
double sample_gamma(RngStream& rng, double shape, double rate);
// log of a Gamma(shape, 1) variate. Stays finite for shapes well below 1,
// where the variate itself can underflow.
double sample_log_gamma(RngStream& rng, double shape);

std::vector<double> sample_dirichlet(RngStream& rng, std::span<const double> concentration);

// Index in [0, weights.size()) drawn with probability proportional to weights.
std::size_t sample_categorical(RngStream& rng, std::span<const double> weights);

bool sample_bernoulli(RngStream& rng, double p);

// N(mean, variance) restricted to the open interval (lower, upper); either
// bound may be infinite. Inversion inside the bulk, exponential rejection
// when the whole interval sits more than 5 standard deviations into a tail.
double sample_truncated_normal(RngStream& rng, double mean, double variance,
                               double lower, double upper);

// Moments of the truncated normal, used by tests and diagnostics.
struct TruncatedNormalMoments {
    double mean;
    double variance;
};
TruncatedNormalMoments truncated_normal_moments(double mean, double variance,
                                                double lower, double upper);

}  // namespace comire
