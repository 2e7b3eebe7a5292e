#pragma once

// Goodness of fit by posterior predictive replication, and convergence
// diagnostics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "comire/basis.hpp"
#include "comire/gibbs.hpp"
#include "comire/model.hpp"
#include "comire/samplers.hpp"

namespace comire {

// Draws y_i at each x_i through the latent hierarchy: d_i ~ Bern(beta(x_i));
// d_i = 1 gives a draw from the high-dose kernel, otherwise a component
// c_i ~ Cat(nu0) and a draw from its kernel.
Dataset simulate_predictive_dataset(RngStream& rng, const ParamState& draw,
                                    const SplineBasis& basis, const std::vector<double>& x_values);

using SmoothedCurve = std::vector<std::optional<double>>;

// Nadaraya-Watson estimate of pr(y <= a | x) with a Gaussian kernel in x.
// Grid points whose total kernel weight underflows to zero are empty.
// Throws DomainError for a nonpositive bandwidth.
SmoothedCurve smoothed_empirical_cdf(const Dataset& data, double a,
                                     const std::vector<double>& dose_grid, double bandwidth);

// Silverman's rule of thumb, 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(const std::vector<double>& x);

struct PpcResult {
    std::vector<double> grid;
    SmoothedCurve observed_curve;
    std::vector<SmoothedCurve> replicate_curves;
    std::vector<std::size_t> replicate_draws;  // index into the draw set
    // Fraction of grid points where the observed curve leaves the pointwise
    // [min, max] replicate envelope. Points missing in the observed curve are
    // not counted.
    double tail_flag = 0.0;
};

struct PpcOptions {
    double threshold = 37.0;
    std::size_t replicates = 50;
    std::optional<double> bandwidth;  // defaults to Silverman on data.x
    std::vector<double> dose_grid;    // defaults to 100 points on [0, 99th pct dose]
    std::uint64_t seed = 42;
};

// Replicate k uses draw floor(k * N / R) and RngStream(seed, k). Throws
// UsageError when replicates is zero or exceeds the number of draws.
PpcResult run_ppc(const PosteriorDraws& draws, const SplineBasis& basis, const Dataset& data,
                  const PpcOptions& options);

// Evenly spaced grid of `points` doses on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// Geweke z-score comparing the means of the first and last segments of a
// chain, each variance taken from a Bartlett-window spectral estimate at
// frequency zero with lag truncation at 4% of the segment length. Empty for
// constant chains. Throws UsageError for chains shorter than 100.
std::optional<double> geweke_z(const std::vector<double>& chain, double first_frac = 0.1,
                               double last_frac = 0.5);

// Long-run variance (spectral density at zero) of a series.
double spectral_density_at_zero(const std::vector<double>& series, std::size_t max_lag);

struct MonitoredScalar {
    std::string name;
    int chain_id;
    std::vector<double> values;
};

// Label-invariant scalars traced per chain: mean at zero dose, mu_inf,
// tau_inf, F_0(a), F_inf(a), R_A(inf, a), and beta at `doses`.
std::vector<MonitoredScalar> monitored_scalars(const PosteriorDraws& draws, const SplineBasis& basis,
                                               double threshold, const std::vector<double>& doses);

struct GewekeEntry {
    std::string name;
    int chain_id;
    std::optional<double> z;
    bool pass() const { return z && std::abs(*z) < 3.0; }
};

std::vector<GewekeEntry> geweke_report(const std::vector<MonitoredScalar>& scalars);

}  // namespace comire
