#pragma once

// Quantitative risk functionals.
//
// Additional risk R_A(x, a) = F_x(a) - F_0(a) factorizes as
// beta(x) * R_A(inf, a), so the benchmark dose BMD_q solves
// beta(x) = q / R_A(inf, a).

#include <functional>
#include <optional>
#include <vector>

#include "comire/basis.hpp"
#include "comire/gibbs.hpp"
#include "comire/model.hpp"

namespace comire {

struct RiskQuery {
    double threshold = 37.0;  // response cutoff a
    double q = 0.1;           // benchmark risk
    std::vector<double> dose_grid;

    // Throws UsageError unless the grid is strictly increasing and
    // nonnegative and 0 < q < 1.
    void validate() const;
};

// R_A(inf, a) = F_inf(a) - F_0(a).
double risk_at_infinity(const ParamState& state, double a);
double additional_risk(const ParamState& state, const SplineBasis& basis, double x, double a);

struct DoseInterval {
    double lower;
    double upper;
};

inline constexpr double kBmdTolerance = 1e-6;

// Smallest dose in `interval` with beta(x) >= q / R_A(inf, a), located by
// bisection to kBmdTolerance. Empty when the target exceeds beta(upper).
// Throws ModelDegeneracyError when R_A(inf, a) <= 0.
std::optional<double> bmd(const ParamState& state, const SplineBasis& basis, double q, double a,
                          DoseInterval interval);
// Search over [0, basis.dose_max()].
std::optional<double> bmd(const ParamState& state, const SplineBasis& basis, double q, double a);

struct CurvePoint {
    double x;
    double mean;
    double lo95;  // 2.5% pointwise quantile
    double hi95;  // 97.5% pointwise quantile
};

std::vector<CurvePoint> posterior_risk_curve(const PosteriorDraws& draws, const SplineBasis& basis,
                                             const RiskQuery& query);

// Same summary for beta(x).
std::vector<CurvePoint> posterior_beta_curve(const PosteriorDraws& draws, const SplineBasis& basis,
                                             const std::vector<double>& dose_grid);

struct BmdSummary {
    double q;
    std::vector<double> samples;  // draws with a solution
    std::size_t unattained = 0;   // draws where the target was out of reach
    double mean;
    double lo95;
    double hi95;
    double bmdl;  // 5% quantile
};

// Throws UsageError on empty draws and ModelDegeneracyError when no draw has
// a solution. Draws with R_A(inf, a) <= 0 count as unattained.
BmdSummary posterior_bmd(const PosteriorDraws& draws, const SplineBasis& basis, double q,
                         double a);

struct QuadratureOptions {
    double tolerance = 1e-13;
    int max_depth = 50;
};

// d_TV(F_x, F_0) / d_TV(F_inf, F_0), each distance obtained by adaptive
// Simpson quadrature over [min mu - 10 sd_max, max mu + 10 sd_max].
// Throws ModelDegeneracyError when the extremal densities coincide.
double tv_ratio(const ParamState& state, const SplineBasis& basis, double x,
                const QuadratureOptions& options = {});

// Total variation distance between two densities on [lo, hi].
double total_variation(const std::function<double(double)>& f, const std::function<double(double)>& g,
                       double lo, double hi, const QuadratureOptions& options = {});

}  // namespace comire
