#pragma once

// Synthetic dose-response scenarios.
//
//   1: the convex mixture model itself. f_0 mixes N(37,1), N(39,1), N(40,1)
//      with weights (0.05, 0.15, 0.80); f_inf = N(36, 1); beta(x) is the
//      Gamma(shape 6, rate 0.1) CDF.
//   2: dependent mixture outside the model. Weights (0.10, 0.25, 0.65),
//      locations -x/300 + 35.5, -x/50 + 38.5, -x/75 + 40.5, unit variances.
//   3: no dose effect. Weights (0.25, 0.25, 0.50), locations (37, 39, 41).
// Doses are Gamma(shape 2, scale 15) by default.

#include <cstdint>
#include <vector>

#include "comire/model.hpp"
#include "comire/samplers.hpp"

namespace comire {

struct ScenarioSpec {
    int id = 1;
    std::size_t n = 500;
    double dose_shape = 2.0;
    double dose_scale = 15.0;
    std::uint64_t seed = 42;

    // Throws UsageError for an unknown id, n == 0 or nonpositive dose parameters.
    void validate() const;
};

std::vector<double> gen_doses(RngStream& rng, std::size_t n, double shape, double scale);

struct Scenario1Truth {
    ExtremalLow low{{0.05, 0.15, 0.80}, {37.0, 39.0, 40.0}, {1.0, 1.0, 1.0}};
    ExtremalHigh high{36.0, 1.0};
    double beta_shape = 6.0;
    double beta_rate = 0.1;

    double beta(double x) const;
};

Dataset gen_scenario1(RngStream& rng, std::size_t n, double dose_shape = 2.0,
                      double dose_scale = 15.0);
Dataset gen_scenario2(RngStream& rng, std::size_t n, double dose_shape = 2.0,
                      double dose_scale = 15.0);
Dataset gen_scenario3(RngStream& rng, std::size_t n, double dose_shape = 2.0,
                      double dose_scale = 15.0);

// Doses and responses from one stream, RngStream(spec.seed, 0).
Dataset simulate_scenario(const ScenarioSpec& spec);

// Generative pr(y <= a | x) and R_A(x, a) of each scenario.
double scenario_true_cdf(int id, double x, double a);
double scenario_true_risk(int id, double x, double a);

// Scenario 2 component locations at dose x.
std::vector<double> scenario2_locations(double x);

}  // namespace comire
