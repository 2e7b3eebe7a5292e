#include "comire/simgen.hpp"

#include <cmath>
#include <string>

#include "comire/errors.hpp"

namespace comire {

namespace {

constexpr double kWeights2[3] = {0.10, 0.25, 0.65};
constexpr double kWeights3[3] = {0.25, 0.25, 0.50};
constexpr double kLocations3[3] = {37.0, 39.0, 41.0};

double draw_mixture(RngStream& rng, const double (&weights)[3], const std::vector<double>& locations) {
    const auto k = sample_categorical(rng, weights);
    return locations[k] + rng.normal();
}

}  // namespace

void ScenarioSpec::validate() const {
    if (id < 1 || id > 3) throw UsageError("scenario id must be 1, 2 or 3 (got " + std::to_string(id) + ")");
    if (n == 0) throw UsageError("scenario size must be positive");
    if (!(dose_shape > 0.0) || !(dose_scale > 0.0)) {
        throw UsageError("dose distribution parameters must be positive");
    }
}

std::vector<double> gen_doses(RngStream& rng, std::size_t n, double shape, double scale) {
    std::vector<double> x(n);
    for (auto& v : x) v = sample_gamma(rng, shape, 1.0 / scale);
    return x;
}

double Scenario1Truth::beta(double x) const { return gamma_cdf(x, beta_shape, beta_rate); }

Dataset gen_scenario1(RngStream& rng, std::size_t n, double dose_shape, double dose_scale) {
    const Scenario1Truth truth;
    Dataset data;
    data.x = gen_doses(rng, n, dose_shape, dose_scale);
    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (sample_bernoulli(rng, truth.beta(data.x[i]))) {
            data.y[i] = truth.high.mu_inf + rng.normal() / std::sqrt(truth.high.tau_inf);
        } else {
            const auto h = sample_categorical(rng, truth.low.nu0);
            data.y[i] = truth.low.mu0[h] + rng.normal() / std::sqrt(truth.low.tau0[h]);
        }
    }
    return data;
}

std::vector<double> scenario2_locations(double x) {
    return {-x / 300.0 + 35.5, -x / 50.0 + 38.5, -x / 75.0 + 40.5};
}

Dataset gen_scenario2(RngStream& rng, std::size_t n, double dose_shape, double dose_scale) {
    Dataset data;
    data.x = gen_doses(rng, n, dose_shape, dose_scale);
    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.y[i] = draw_mixture(rng, kWeights2, scenario2_locations(data.x[i]));
    }
    return data;
}

Dataset gen_scenario3(RngStream& rng, std::size_t n, double dose_shape, double dose_scale) {
    Dataset data;
    data.x = gen_doses(rng, n, dose_shape, dose_scale);
    data.y.resize(n);
    const std::vector<double> loc(std::begin(kLocations3), std::end(kLocations3));
    for (std::size_t i = 0; i < n; ++i) data.y[i] = draw_mixture(rng, kWeights3, loc);
    return data;
}

Dataset simulate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    RngStream rng(spec.seed, 0);
    switch (spec.id) {
        case 1: return gen_scenario1(rng, spec.n, spec.dose_shape, spec.dose_scale);
        case 2: return gen_scenario2(rng, spec.n, spec.dose_shape, spec.dose_scale);
        default: return gen_scenario3(rng, spec.n, spec.dose_shape, spec.dose_scale);
    }
}

double scenario_true_cdf(int id, double x, double a) {
    switch (id) {
        case 1: {
            const Scenario1Truth t;
            double f0 = 0.0;
            for (std::size_t h = 0; h < 3; ++h) {
                f0 += t.low.nu0[h] * std_normal_cdf((a - t.low.mu0[h]) * std::sqrt(t.low.tau0[h]));
            }
            const double finf = std_normal_cdf((a - t.high.mu_inf) * std::sqrt(t.high.tau_inf));
            const double b = t.beta(x);
            return (1.0 - b) * f0 + b * finf;
        }
        case 2: {
            const auto loc = scenario2_locations(x);
            double f = 0.0;
            for (std::size_t k = 0; k < 3; ++k) f += kWeights2[k] * std_normal_cdf(a - loc[k]);
            return f;
        }
        case 3: {
            double f = 0.0;
            for (std::size_t k = 0; k < 3; ++k) f += kWeights3[k] * std_normal_cdf(a - kLocations3[k]);
            return f;
        }
        default: throw UsageError("scenario id must be 1, 2 or 3");
    }
}

double scenario_true_risk(int id, double x, double a) {
    return scenario_true_cdf(id, x, a) - scenario_true_cdf(id, 0.0, a);
}

}  // namespace comire
