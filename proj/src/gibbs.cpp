#include "comire/gibbs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "comire/errors.hpp"
#include "comire/summary.hpp"

namespace comire {

namespace {

// Rethrows the active exception with extra context, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const NumericalError& e) {
        throw NumericalError(context + ": " + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(context + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(context + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(context + ": " + e.what());
    }
}

std::vector<double> split_doubles(const std::string& line, std::size_t row) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find(',', start);
        if (end == std::string::npos) end = line.size();
        double v = 0.0;
        const char* first = line.data() + start;
        const char* last = line.data() + end;
        while (first < last && *first == ' ') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw DataError("draws file: non-numeric cell in row " + std::to_string(row));
        }
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

}  // namespace

void ChainSettings::validate() const {
    if (iterations < 1) throw ConfigError("chain settings: iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) {
        throw ConfigError("chain settings: burn-in must satisfy 0 <= burn_in < iterations");
    }
    if (thin < 1) throw ConfigError("chain settings: thin must be at least 1");
    if (chains < 1) throw ConfigError("chain settings: need at least one chain");
}

int ChainSettings::retained_per_chain() const { return (iterations - burn_in) / thin; }

DoseDesign::DoseDesign(const SplineBasis& basis, std::span<const double> doses)
    : rows_(doses.size()), cols_(basis.size()), values_(rows_ * cols_) {
    for (std::size_t i = 0; i < rows_; ++i) {
        basis.evaluate_into(doses[i], std::span<double>(values_.data() + i * cols_, cols_));
    }
}

double DoseDesign::beta(std::size_t i, const BetaWeights& w) const {
    const auto r = row(i);
    const auto wv = w.values();
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += wv[j] * r[j];
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<ParamState> PosteriorDraws::chain(int chain_id) const {
    std::vector<ParamState> out;
    for (std::size_t k = 0; k < draws.size(); ++k) {
        if (chain_ids[k] == chain_id) out.push_back(draws[k]);
    }
    return out;
}

std::vector<int> PosteriorDraws::chain_list() const {
    std::set<int> ids(chain_ids.begin(), chain_ids.end());
    return {ids.begin(), ids.end()};
}

void step_update_b(RngStream& rng, const ParamState& state, const DoseDesign& design,
                   const Dataset& data, AugmentedState& aug) {
    const std::size_t J = design.cols();
    const auto w = state.w.values();
    std::vector<double> prob(J);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double l0 = log_density_low(state, data.y[i]);
        const double linf = log_density_high(state, data.y[i]);
        const double m = std::max(l0, linf);
        const double f0 = std::exp(l0 - m);
        const double finf = std::exp(linf - m);
        const auto psi = design.row(i);
        double total = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            prob[j] = w[j] * ((1.0 - psi[j]) * f0 + psi[j] * finf);
            total += prob[j];
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw NumericalError("step b: zero probability row at observation " +
                                 std::to_string(i + 1));
        }
        aug.b[i] = static_cast<int>(sample_categorical(rng, prob));
    }
}

BetaWeights step_update_w(RngStream& rng, const ModelConfig& config, const AugmentedState& aug) {
    std::vector<double> conc(config.eta);
    for (int label : aug.b) conc[static_cast<std::size_t>(label)] += 1.0;
    return BetaWeights(sample_dirichlet(rng, conc));
}

void step_update_d(RngStream& rng, const ParamState& state, const DoseDesign& design,
                   const Dataset& data, AugmentedState& aug) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double beta = design.beta(i, state.w);
        if (beta <= 0.0) {
            aug.d[i] = 0;
            continue;
        }
        if (beta >= 1.0) {
            aug.d[i] = 1;
            continue;
        }
        const double l0 = std::log1p(-beta) + log_density_low(state, data.y[i]);
        const double linf = std::log(beta) + log_density_high(state, data.y[i]);
        const double denom = log_add_exp(l0, linf);
        if (!std::isfinite(denom)) {
            throw NumericalError("step d: zero denominator at observation " + std::to_string(i + 1));
        }
        aug.d[i] = sample_bernoulli(rng, std::exp(linf - denom)) ? 1 : 0;
    }
}

void step_update_c(RngStream& rng, const ParamState& state, const Dataset& data,
                   AugmentedState& aug) {
    const auto& low = state.low;
    const std::size_t H = low.size();
    std::vector<double> lognu(H);
    for (std::size_t h = 0; h < H; ++h) lognu[h] = low.nu0[h] > 0.0 ? std::log(low.nu0[h]) : -kInf;
    std::vector<double> prob(H);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (aug.d[i] != 0) continue;
        double m = -kInf;
        for (std::size_t h = 0; h < H; ++h) {
            prob[h] = lognu[h] + normal_log_pdf(data.y[i], low.mu0[h], low.tau0[h]);
            m = std::max(m, prob[h]);
        }
        if (!std::isfinite(m)) {
            throw NumericalError("step c: zero probability row at observation " +
                                 std::to_string(i + 1));
        }
        for (double& p : prob) p = std::exp(p - m);
        aug.c[i] = static_cast<int>(sample_categorical(rng, prob));
    }
}

std::vector<double> step_update_nu0(RngStream& rng, const ModelConfig& config,
                                    const AugmentedState& aug) {
    std::vector<double> conc(config.alpha);
    for (std::size_t i = 0; i < aug.size(); ++i) {
        if (aug.d[i] == 0) conc[static_cast<std::size_t>(aug.c[i])] += 1.0;
    }
    return sample_dirichlet(rng, conc);
}

void step_update_theta0(RngStream& rng, const ModelConfig& config, ParamState& state,
                        const Dataset& data, const AugmentedState& aug) {
    const std::size_t H = state.low.size();
    std::vector<double> count(H, 0.0);
    std::vector<double> sum(H, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (aug.d[i] != 0) continue;
        const auto h = static_cast<std::size_t>(aug.c[i]);
        count[h] += 1.0;
        sum[h] += data.y[i];
    }
    for (std::size_t h = 0; h < H; ++h) {
        double& mu = state.low.mu0[h];
        double& tau = state.low.tau0[h];
        double ss = 0.0;
        if (count[h] > 0.0) {
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (aug.d[i] == 0 && static_cast<std::size_t>(aug.c[i]) == h) {
                    ss += (data.y[i] - mu) * (data.y[i] - mu);
                }
            }
        }
        tau = sample_gamma(rng, config.a_tau + 0.5 * count[h], config.b_tau + 0.5 * ss);
        const double post_var = 1.0 / (1.0 / config.kappa + count[h] * tau);
        const double post_mean = post_var * (config.prior_mean / config.kappa + tau * sum[h]);
        try {
            mu = sample_truncated_normal(rng, post_mean, post_var, state.high.mu_inf, kInf);
        } catch (...) {
            rethrow_with_context("step theta0, component " + std::to_string(h + 1));
        }
    }
}

void step_update_theta_inf(RngStream& rng, const ModelConfig& config, ParamState& state,
                           const Dataset& data, const AugmentedState& aug) {
    double count = 0.0;
    double sum = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (aug.d[i] == 0) continue;
        count += 1.0;
        sum += data.y[i];
        const double r = data.y[i] - state.high.mu_inf;
        ss += r * r;
    }
    double& tau = state.high.tau_inf;
    tau = sample_gamma(rng, config.a_tau + 0.5 * count, config.b_tau + 0.5 * ss);
    const double post_var = 1.0 / (1.0 / config.kappa + count * tau);
    const double post_mean = post_var * (config.prior_mean / config.kappa + tau * sum);
    try {
        state.high.mu_inf =
            sample_truncated_normal(rng, post_mean, post_var, -kInf, state.low.min_location());
    } catch (...) {
        rethrow_with_context("step theta_inf");
    }
}

void gibbs_sweep(RngStream& rng, const ModelConfig& config, const Dataset& data,
                 const DoseDesign& design, ParamState& state, AugmentedState& aug) {
    step_update_b(rng, state, design, data, aug);
    state.w = step_update_w(rng, config, aug);
    step_update_d(rng, state, design, data, aug);
    step_update_c(rng, state, data, aug);
    state.low.nu0 = step_update_nu0(rng, config, aug);
    step_update_theta0(rng, config, state, data, aug);
    step_update_theta_inf(rng, config, state, data, aug);
}

ParamState initial_state(RngStream& rng, const ModelConfig& config, const Dataset& data) {
    const auto H = static_cast<std::size_t>(config.H);
    ParamState s;
    s.w = BetaWeights(sample_dirichlet(rng, config.eta));
    s.low.nu0 = sample_dirichlet(rng, config.alpha);
    s.low.mu0.resize(H);
    s.low.tau0.resize(H);

    if (data.empty()) {
        const double sd = std::sqrt(config.kappa);
        for (std::size_t h = 0; h < H; ++h) {
            s.low.mu0[h] = config.prior_mean + sd * static_cast<double>(h + 1) / static_cast<double>(H + 1);
        }
        s.high.mu_inf = config.prior_mean - sd;
        std::fill(s.low.tau0.begin(), s.low.tau0.end(), config.a_tau / config.b_tau);
        s.high.tau_inf = config.a_tau / config.b_tau;
        s.validate();
        return s;
    }

    std::vector<double> sorted(data.y);
    std::sort(sorted.begin(), sorted.end());
    const double var = variance_of(sorted);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    const double precision = var > 0.0 ? 1.0 / var : 1.0;
    for (std::size_t h = 0; h < H; ++h) {
        const double p = 0.5 + 0.5 * static_cast<double>(h + 1) / static_cast<double>(H + 1);
        s.low.mu0[h] = quantile_sorted(sorted, p);
    }
    std::fill(s.low.tau0.begin(), s.low.tau0.end(), precision);
    s.high.mu_inf = quantile_sorted(sorted, 0.05) - sd;
    s.high.tau_inf = precision;
    s.validate();
    return s;
}

PosteriorDraws run_single_chain(const ModelConfig& config, const Dataset& data,
                                const ChainSettings& settings, int chain_id) {
    config.validate();
    settings.validate();
    data.validate();
    RngStream rng(settings.seed, static_cast<std::uint64_t>(chain_id));
    const DoseDesign design(config.basis, data.x);
    ParamState state = initial_state(rng, config, data);
    AugmentedState aug(data.size());

    PosteriorDraws out;
    const auto kept = static_cast<std::size_t>(settings.retained_per_chain());
    out.draws.reserve(kept);
    out.chain_ids.reserve(kept);
    out.iterations.reserve(kept);
    for (int t = 1; t <= settings.iterations; ++t) {
        try {
            gibbs_sweep(rng, config, data, design, state, aug);
        } catch (...) {
            rethrow_with_context("chain " + std::to_string(chain_id) + ", iteration " +
                                 std::to_string(t));
        }
        if (t > settings.burn_in && (t - settings.burn_in) % settings.thin == 0) {
            state.validate();
            out.draws.push_back(state);
            out.chain_ids.push_back(chain_id);
            out.iterations.push_back(t);
        }
    }
    return out;
}

PosteriorDraws run_chain(const ModelConfig& config, const Dataset& data,
                         const ChainSettings& settings) {
    settings.validate();
    const auto n_chains = static_cast<std::size_t>(settings.chains);
    std::vector<PosteriorDraws> per_chain(n_chains);
    std::vector<std::exception_ptr> errors(n_chains);
    {
        std::vector<std::jthread> workers;
        workers.reserve(n_chains);
        for (std::size_t k = 0; k < n_chains; ++k) {
            workers.emplace_back([&, k] {
                try {
                    per_chain[k] = run_single_chain(config, data, settings, static_cast<int>(k) + 1);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    PosteriorDraws merged;
    for (auto& chain : per_chain) {
        merged.draws.insert(merged.draws.end(), chain.draws.begin(), chain.draws.end());
        merged.chain_ids.insert(merged.chain_ids.end(), chain.chain_ids.begin(), chain.chain_ids.end());
        merged.iterations.insert(merged.iterations.end(), chain.iterations.begin(),
                                 chain.iterations.end());
    }
    return merged;
}

std::string draws_header(std::size_t J, std::size_t H) {
    std::string h = "iteration";
    for (std::size_t j = 1; j <= J; ++j) h += fmt::format(",w_{}", j);
    for (const char* name : {"nu0", "mu0", "tau0"}) {
        for (std::size_t k = 1; k <= H; ++k) h += fmt::format(",{}_{}", name, k);
    }
    h += ",mu_inf,tau_inf";
    return h;
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws,
                     int chain_id) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path.string() + " for writing");
    bool header_written = false;
    for (std::size_t k = 0; k < draws.size(); ++k) {
        if (draws.chain_ids[k] != chain_id) continue;
        const ParamState& s = draws.draws[k];
        if (!header_written) {
            out << draws_header(s.w.size(), s.low.size()) << '\n';
            header_written = true;
        }
        std::string row = fmt::format("{}", draws.iterations[k]);
        for (double v : s.w.values()) row += fmt::format(",{}", v);
        for (double v : s.low.nu0) row += fmt::format(",{}", v);
        for (double v : s.low.mu0) row += fmt::format(",{}", v);
        for (double v : s.low.tau0) row += fmt::format(",{}", v);
        row += fmt::format(",{},{}\n", s.high.mu_inf, s.high.tau_inf);
        out << row;
    }
    if (!header_written) throw UsageError("no draws for chain " + std::to_string(chain_id));
}

PosteriorDraws read_draws_csv(const std::filesystem::path& path, int chain_id) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open draws file " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw DataError("draws file " + path.string() + " is empty");
    std::size_t J = 0;
    std::size_t H = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("w_", 0) == 0) ++J;
            if (col.rfind("nu0_", 0) == 0) ++H;
        }
    }
    if (J == 0 || H == 0 || header != draws_header(J, H)) {
        throw DataError("draws file " + path.string() + " has an unexpected header");
    }
    PosteriorDraws out;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto v = split_doubles(line, row);
        if (v.size() != 1 + J + 3 * H + 2) {
            throw DataError("draws file: wrong number of cells in row " + std::to_string(row));
        }
        ParamState s;
        auto it = v.begin() + 1;
        s.w = BetaWeights(std::vector<double>(it, it + static_cast<std::ptrdiff_t>(J)));
        it += static_cast<std::ptrdiff_t>(J);
        s.low.nu0.assign(it, it + static_cast<std::ptrdiff_t>(H));
        it += static_cast<std::ptrdiff_t>(H);
        s.low.mu0.assign(it, it + static_cast<std::ptrdiff_t>(H));
        it += static_cast<std::ptrdiff_t>(H);
        s.low.tau0.assign(it, it + static_cast<std::ptrdiff_t>(H));
        it += static_cast<std::ptrdiff_t>(H);
        s.high.mu_inf = *it++;
        s.high.tau_inf = *it;
        try {
            s.validate();
        } catch (const InvariantError& e) {
            throw DataError("draws file row " + std::to_string(row) + ": " + e.what());
        }
        out.draws.push_back(std::move(s));
        out.chain_ids.push_back(chain_id);
        out.iterations.push_back(static_cast<int>(v[0]));
    }
    return out;
}

}  // namespace comire
