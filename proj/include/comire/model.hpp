#pragma once

// Convex mixture regression: the conditional density at dose x is
//   f_x(y) = {1 - beta(x)} f_0(y) + beta(x) f_inf(y)
// with f_0 a finite Gaussian mixture, f_inf a single Gaussian centered below
// every component of f_0, and beta monotone on an I-spline basis.

#include <optional>
#include <span>
#include <vector>

#include "comire/basis.hpp"

namespace comire {

// Mixing measure at zero dose: weights, locations and precisions of H
// Gaussian kernels.
struct ExtremalLow {
    std::vector<double> nu0;
    std::vector<double> mu0;
    std::vector<double> tau0;

    std::size_t size() const { return nu0.size(); }
    double min_location() const;
    // nu0' mu0, the mean response at zero dose.
    double mean() const;
};

// Single kernel reached as dose grows without bound.
struct ExtremalHigh {
    double mu_inf = 0.0;
    double tau_inf = 1.0;
};

struct ParamState {
    ExtremalLow low;
    ExtremalHigh high;
    BetaWeights w;

    // Throws InvariantError unless nu0 is on the simplex, all precisions are
    // positive and mu_inf < min_h mu0_h strictly.
    void validate() const;
    bool satisfies_adversity() const { return high.mu_inf < low.min_location(); }
};

struct Dataset {
    std::vector<double> x;  // dose, >= 0
    std::vector<double> y;  // response

    std::size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }
    // Throws DataError on length mismatch, negative or non-finite doses, or
    // non-finite responses.
    void validate() const;
};

struct ModelConfig {
    int H = 10;
    SplineBasis basis = build_basis(7, 1.0, 3);
    std::vector<double> alpha;  // Dirichlet concentration for nu0, length H
    std::vector<double> eta;    // Dirichlet concentration for w, length J
    double a_tau = 2.0;
    double b_tau = 2.0;
    double prior_mean = 0.0;
    double kappa = 10.0;  // prior variance of every location

    std::size_t J() const { return basis.size(); }
    // Throws ConfigError when sizes disagree or a hyperparameter is not positive.
    void validate() const;
};

// Default hyperparameters: H = 10, alpha_h = 1/H, eta_j = 1/J, cubic I-splines
// with 7 equally spaced inner knots on [0, max dose], prior mean = mean(y),
// kappa = 10, a_tau = b_tau = 2.
struct ModelDefaults {
    int H = 10;
    int inner_knots = 7;
    int degree = 3;
    std::optional<double> dose_max;    // defaults to max(data.x)
    std::optional<double> prior_mean;  // defaults to mean(data.y)
    double kappa = 10.0;
    double a_tau = 2.0;
    double b_tau = 2.0;
    std::optional<double> alpha;  // common value, defaults to 1/H
    std::optional<double> eta;    // common value, defaults to 1/J
};

ModelConfig make_config(const ModelDefaults& defaults, const Dataset& data);

// f_0(y) and its log.
double log_density_low(const ParamState& state, double y);
double density_low(const ParamState& state, double y);
double log_density_high(const ParamState& state, double y);
double density_high(const ParamState& state, double y);

double conditional_density(const ParamState& state, const SplineBasis& basis, double x,
                           double y);
double log_conditional_density(const ParamState& state, const SplineBasis& basis, double x,
                               double y);

double cdf_low(const ParamState& state, double a);
double cdf_high(const ParamState& state, double a);
double conditional_cdf(const ParamState& state, const SplineBasis& basis, double x, double a);

// mu(x) = nu0'mu0 + (mu_inf - nu0'mu0) beta(x).
double conditional_mean(const ParamState& state, const SplineBasis& basis, double x);

double log_likelihood(const ParamState& state, const SplineBasis& basis, const Dataset& data);

// Mixture evaluators with beta supplied directly.
double conditional_density_at_beta(const ParamState& state, double beta, double y);
double conditional_cdf_at_beta(const ParamState& state, double beta, double a);

}  // namespace comire
