#include "comire/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "comire/errors.hpp"
#include "comire/samplers.hpp"

namespace comire {

double ExtremalLow::min_location() const {
    return mu0.empty() ? kInf : *std::min_element(mu0.begin(), mu0.end());
}

double ExtremalLow::mean() const {
    return std::inner_product(nu0.begin(), nu0.end(), mu0.begin(), 0.0);
}

void ParamState::validate() const {
    const std::size_t H = low.size();
    if (H == 0 || low.mu0.size() != H || low.tau0.size() != H) {
        throw InvariantError("ParamState: inconsistent number of low-dose components");
    }
    double total = 0.0;
    for (double v : low.nu0) {
        if (!std::isfinite(v) || v < -BetaWeights::kSimplexTolerance) {
            throw InvariantError("ParamState: negative mixture weight");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > BetaWeights::kSimplexTolerance) {
        throw InvariantError("ParamState: mixture weights off the simplex");
    }
    for (std::size_t h = 0; h < H; ++h) {
        if (!std::isfinite(low.mu0[h])) throw InvariantError("ParamState: non-finite location");
        if (!(low.tau0[h] > 0.0) || !std::isfinite(low.tau0[h])) {
            throw InvariantError("ParamState: nonpositive precision");
        }
    }
    if (!(high.tau_inf > 0.0) || !std::isfinite(high.tau_inf) || !std::isfinite(high.mu_inf)) {
        throw InvariantError("ParamState: invalid high-dose kernel");
    }
    if (!satisfies_adversity()) {
        throw InvariantError("ParamState: adversity restriction mu_inf < min mu0 violated (mu_inf = " +
                             std::to_string(high.mu_inf) + ")");
    }
}

void Dataset::validate() const {
    if (x.size() != y.size()) throw DataError("dataset: x and y lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || x[i] < 0.0) {
            throw DataError("dataset: dose at row " + std::to_string(i + 1) +
                            " is negative or non-finite");
        }
        if (!std::isfinite(y[i])) {
            throw DataError("dataset: response at row " + std::to_string(i + 1) + " is non-finite");
        }
    }
}

void ModelConfig::validate() const {
    if (H < 1) throw ConfigError("config: H must be at least 1");
    if (alpha.size() != static_cast<std::size_t>(H)) {
        throw ConfigError("config: alpha must have length H");
    }
    if (eta.size() != J()) throw ConfigError("config: eta must have length J");
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!std::all_of(alpha.begin(), alpha.end(), positive)) {
        throw ConfigError("config: alpha entries must be positive");
    }
    if (!std::all_of(eta.begin(), eta.end(), positive)) {
        throw ConfigError("config: eta entries must be positive");
    }
    if (!positive(a_tau) || !positive(b_tau)) throw ConfigError("config: a_tau, b_tau must be positive");
    if (!positive(kappa)) throw ConfigError("config: kappa must be positive");
    if (!std::isfinite(prior_mean)) throw ConfigError("config: prior_mean must be finite");
}

ModelConfig make_config(const ModelDefaults& d, const Dataset& data) {
    if (d.H < 1) throw ConfigError("config: H must be at least 1");
    double dose_max;
    if (d.dose_max) {
        dose_max = *d.dose_max;
    } else {
        if (data.empty()) throw ConfigError("config: dose_max required when the dataset is empty");
        dose_max = *std::max_element(data.x.begin(), data.x.end());
    }
    double prior_mean;
    if (d.prior_mean) {
        prior_mean = *d.prior_mean;
    } else {
        if (data.empty()) throw ConfigError("config: prior_mean required when the dataset is empty");
        prior_mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) /
                     static_cast<double>(data.size());
    }
    ModelConfig cfg{
        .H = d.H,
        .basis = build_basis(d.inner_knots, dose_max, d.degree),
        .alpha = {},
        .eta = {},
        .a_tau = d.a_tau,
        .b_tau = d.b_tau,
        .prior_mean = prior_mean,
        .kappa = d.kappa,
    };
    cfg.alpha.assign(static_cast<std::size_t>(d.H), d.alpha.value_or(1.0 / d.H));
    cfg.eta.assign(cfg.J(), d.eta.value_or(1.0 / static_cast<double>(cfg.J())));
    cfg.validate();
    return cfg;
}

double log_density_low(const ParamState& state, double y) {
    const auto& low = state.low;
    double acc = -kInf;
    for (std::size_t h = 0; h < low.size(); ++h) {
        if (low.nu0[h] <= 0.0) continue;
        acc = log_add_exp(acc, std::log(low.nu0[h]) + normal_log_pdf(y, low.mu0[h], low.tau0[h]));
    }
    return acc;
}

double density_low(const ParamState& state, double y) { return std::exp(log_density_low(state, y)); }

double log_density_high(const ParamState& state, double y) {
    return normal_log_pdf(y, state.high.mu_inf, state.high.tau_inf);
}

double density_high(const ParamState& state, double y) {
    return std::exp(log_density_high(state, y));
}

double conditional_density_at_beta(const ParamState& state, double beta, double y) {
    if (beta <= 0.0) return density_low(state, y);
    if (beta >= 1.0) return density_high(state, y);
    return std::exp(log_add_exp(std::log1p(-beta) + log_density_low(state, y),
                                std::log(beta) + log_density_high(state, y)));
}

double log_conditional_density(const ParamState& state, const SplineBasis& basis, double x,
                               double y) {
    const double beta = basis.beta(state.w, x);
    if (beta <= 0.0) return log_density_low(state, y);
    if (beta >= 1.0) return log_density_high(state, y);
    return log_add_exp(std::log1p(-beta) + log_density_low(state, y),
                       std::log(beta) + log_density_high(state, y));
}

double conditional_density(const ParamState& state, const SplineBasis& basis, double x,
                           double y) {
    return conditional_density_at_beta(state, basis.beta(state.w, x), y);
}

double cdf_low(const ParamState& state, double a) {
    const auto& low = state.low;
    double acc = 0.0;
    for (std::size_t h = 0; h < low.size(); ++h) {
        acc += low.nu0[h] * std_normal_cdf((a - low.mu0[h]) * std::sqrt(low.tau0[h]));
    }
    return std::clamp(acc, 0.0, 1.0);
}

double cdf_high(const ParamState& state, double a) {
    return std_normal_cdf((a - state.high.mu_inf) * std::sqrt(state.high.tau_inf));
}

double conditional_cdf_at_beta(const ParamState& state, double beta, double a) {
    return (1.0 - beta) * cdf_low(state, a) + beta * cdf_high(state, a);
}

double conditional_cdf(const ParamState& state, const SplineBasis& basis, double x, double a) {
    return conditional_cdf_at_beta(state, basis.beta(state.w, x), a);
}

double conditional_mean(const ParamState& state, const SplineBasis& basis, double x) {
    const double m0 = state.low.mean();
    return m0 + (state.high.mu_inf - m0) * basis.beta(state.w, x);
}

double log_likelihood(const ParamState& state, const SplineBasis& basis, const Dataset& data) {
    if (data.x.size() != data.y.size()) throw DataError("log_likelihood: x and y lengths differ");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data.y[i])) {
            throw DataError("log_likelihood: non-finite response at row " + std::to_string(i + 1));
        }
        total += log_conditional_density(state, basis, data.x[i], data.y[i]);
    }
    return total;
}

}  // namespace comire
