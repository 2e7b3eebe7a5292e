#pragma once

// Partially collapsed Gibbs sampler.
//
// One sweep runs, in order:
//   1. basis labels b_i, with the extremal indicator d_i integrated out
//   2. basis weights w | b            ~ Dir(eta + counts)
//   3. extremal indicators d_i, with b_i integrated out
//   4. component labels c_i for units with d_i = 0
//   5. mixture weights nu0 | c, d     ~ Dir(alpha + counts)
//   6. each (mu0_h, tau0_h): tau0_h | mu0_h, then mu0_h | tau0_h truncated
//      to (mu_inf, inf)
//   7. (mu_inf, tau_inf): tau_inf | mu_inf, then mu_inf | tau_inf truncated
//      to (-inf, min_h mu0_h)
// Labels are zero-based in memory and one-based in files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "comire/basis.hpp"
#include "comire/model.hpp"
#include "comire/samplers.hpp"

namespace comire {

struct AugmentedState {
    std::vector<int> b;           // basis label, 0..J-1
    std::vector<int> c;           // low-dose component, 0..H-1; read only where d == 0
    std::vector<std::uint8_t> d;  // 1 = unit drawn from f_inf

    explicit AugmentedState(std::size_t n = 0) : b(n, 0), c(n, 0), d(n, 0) {}
    std::size_t size() const { return b.size(); }
};

struct ChainSettings {
    int iterations = 5000;
    int burn_in = 2000;
    int thin = 5;
    int chains = 1;
    std::uint64_t seed = 42;

    // Throws ConfigError unless 0 <= burn_in < iterations, thin >= 1, chains >= 1.
    void validate() const;
    // Draws kept per chain: iterations t with t > burn_in and (t - burn_in) % thin == 0.
    int retained_per_chain() const;
};

// Basis evaluated at every observed dose, row-major n x J.
class DoseDesign {
public:
    DoseDesign(const SplineBasis& basis, std::span<const double> doses);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    double beta(std::size_t i, const BetaWeights& w) const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

struct PosteriorDraws {
    // Names of the sampler steps; each is an exact full-conditional draw, so
    // the recorded acceptance rate is 1 for all of them.
    static constexpr std::array<const char*, 7> kStepNames = {
        "b", "w", "d", "c", "nu0", "theta0", "theta_inf"};

    std::vector<ParamState> draws;
    std::vector<int> chain_ids;
    std::vector<int> iterations;
    std::array<double, 7> step_acceptance = {1, 1, 1, 1, 1, 1, 1};

    std::size_t size() const { return draws.size(); }
    bool empty() const { return draws.empty(); }
    // Draws belonging to one chain, in iteration order.
    std::vector<ParamState> chain(int chain_id) const;
    std::vector<int> chain_list() const;
};

// Steps. Each reads the current state and writes only its own block.
void step_update_b(RngStream& rng, const ParamState& state, const DoseDesign& design,
                   const Dataset& data, AugmentedState& aug);
BetaWeights step_update_w(RngStream& rng, const ModelConfig& config, const AugmentedState& aug);
void step_update_d(RngStream& rng, const ParamState& state, const DoseDesign& design,
                   const Dataset& data, AugmentedState& aug);
void step_update_c(RngStream& rng, const ParamState& state, const Dataset& data,
                   AugmentedState& aug);
std::vector<double> step_update_nu0(RngStream& rng, const ModelConfig& config,
                                    const AugmentedState& aug);
void step_update_theta0(RngStream& rng, const ModelConfig& config, ParamState& state,
                        const Dataset& data, const AugmentedState& aug);
void step_update_theta_inf(RngStream& rng, const ModelConfig& config, ParamState& state,
                           const Dataset& data, const AugmentedState& aug);

// One full sweep of steps 1 to 7.
void gibbs_sweep(RngStream& rng, const ModelConfig& config, const Dataset& data,
                 const DoseDesign& design, ParamState& state, AugmentedState& aug);

// Starting point: w and nu0 from their priors, mu0 at upper-half empirical
// quantiles of y, mu_inf at the 5th percentile minus one SD, precisions at
// 1 / var(y). Prior-driven values when the dataset is empty.
ParamState initial_state(RngStream& rng, const ModelConfig& config, const Dataset& data);

// Single chain on stream (settings.seed, chain_id).
PosteriorDraws run_single_chain(const ModelConfig& config, const Dataset& data,
                                const ChainSettings& settings, int chain_id);

// settings.chains chains in parallel, merged in chain order.
PosteriorDraws run_chain(const ModelConfig& config, const Dataset& data,
                         const ChainSettings& settings);

// Draw files: header
//   iteration,w_1..w_J,nu0_1..nu0_H,mu0_1..mu0_H,tau0_1..tau0_H,mu_inf,tau_inf
// one row per retained iteration.
std::string draws_header(std::size_t J, std::size_t H);
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws,
                     int chain_id);
// Reads one chain file; every row is validated.
PosteriorDraws read_draws_csv(const std::filesystem::path& path, int chain_id);

}  // namespace comire
