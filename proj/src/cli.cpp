#include "comire/cli.hpp"

#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "comire/checks.hpp"
#include "comire/errors.hpp"
#include "comire/io.hpp"
#include "comire/risk.hpp"
#include "comire/simgen.hpp"
#include "comire/summary.hpp"

#ifndef COMIRE_VERSION
#define COMIRE_VERSION "0.0.0"
#endif

namespace comire {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path.string() + " for writing");
    return out;
}

json manifest_base(const std::string& command) {
    return {{"command", command}, {"version", COMIRE_VERSION}};
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

json truth_json(int id) {
    json t = {{"scenario", id}, {"dose_distribution", {{"family", "gamma"}, {"shape", 2.0}, {"scale", 15.0}}}};
    switch (id) {
        case 1: {
            const Scenario1Truth s;
            t["nu0"] = s.low.nu0;
            t["mu0"] = s.low.mu0;
            t["tau0"] = s.low.tau0;
            t["mu_inf"] = s.high.mu_inf;
            t["tau_inf"] = s.high.tau_inf;
            t["beta"] = {{"family", "gamma_cdf"}, {"shape", s.beta_shape}, {"rate", s.beta_rate}};
            break;
        }
        case 2:
            t["weights"] = {0.10, 0.25, 0.65};
            t["locations"] = {"-x/300 + 35.5", "-x/50 + 38.5", "-x/75 + 40.5"};
            t["variances"] = {1.0, 1.0, 1.0};
            break;
        default:
            t["weights"] = {0.25, 0.25, 0.50};
            t["locations"] = {37.0, 39.0, 41.0};
            t["variances"] = {1.0, 1.0, 1.0};
            break;
    }
    return t;
}

void write_curve(const fs::path& path, const std::vector<CurvePoint>& curve) {
    auto out = open_out(path);
    out << "x,mean,lo95,hi95\n";
    for (const auto& p : curve) {
        out << format_number(p.x) << ',' << format_number(p.mean) << ',' << format_number(p.lo95) << ','
            << format_number(p.hi95) << '\n';
    }
}

}  // namespace

SimulateResult cmd_simulate(const SimulateOptions& options) {
    const ScenarioSpec spec{.id = options.scenario, .n = options.n, .seed = options.seed};
    spec.validate();
    ensure_dir(options.out);
    const Dataset data = simulate_scenario(spec);

    SimulateResult r{options.out / "data.csv", options.out / "truth.json",
                     options.out / "manifest_simulate.json"};
    write_dataset_csv(r.data, data);
    json truth = truth_json(spec.id);
    truth["n"] = spec.n;
    truth["seed"] = spec.seed;
    write_json(r.truth, truth);

    json m = manifest_base("simulate");
    m["scenario"] = spec.id;
    m["n"] = spec.n;
    m["seed"] = spec.seed;
    m["outputs"] = {{"data", r.data.filename().string()}, {"truth", r.truth.filename().string()}};
    m["output_digests"] = {{"data", sha256_file(r.data)}};
    write_json(r.manifest, m);
    return r;
}

FitResult cmd_fit(const FitOptions& options, std::ostream& log) {
    FitConfig fc;
    ConcentrationOverrides overrides;
    json config_file;
    if (options.config) {
        config_file = read_json(*options.config);
        fc = parse_fit_config(config_file);
        overrides = parse_concentration_overrides(config_file);
    }
    if (options.iterations) fc.settings.iterations = *options.iterations;
    if (options.burn_in) fc.settings.burn_in = *options.burn_in;
    if (options.thin) fc.settings.thin = *options.thin;
    if (options.chains) fc.settings.chains = *options.chains;
    if (options.seed) fc.settings.seed = *options.seed;
    fc.settings.validate();

    const auto ingest = read_dataset_csv(options.data, {.max_y = options.max_y});
    for (const auto& w : ingest.warnings) log << "warning: " << options.data.string() << ": " << w << '\n';
    if (ingest.rows_filtered > 0) {
        log << fmt::format("filtered {} of {} rows with y > {}\n", ingest.rows_filtered, ingest.rows_read,
                           *options.max_y);
    }

    ModelConfig config = make_config(fc.model, ingest.data);
    if (overrides.alpha) config.alpha = *overrides.alpha;
    if (overrides.eta) config.eta = *overrides.eta;
    config.validate();

    ensure_dir(options.out);
    const PosteriorDraws draws = run_chain(config, ingest.data, fc.settings);

    FitResult r;
    r.manifest = options.out / "manifest_fit.json";
    r.observations = ingest.data.size();
    r.retained = static_cast<std::size_t>(fc.settings.retained_per_chain());
    json outputs = json::array();
    for (int id : draws.chain_list()) {
        const fs::path p = options.out / fmt::format("draws_chain{}.csv", id);
        write_draws_csv(p, draws, id);
        r.draw_files.push_back(p);
        outputs.push_back({{"chain", id}, {"draws", p.filename().string()}});
    }

    json m = manifest_base("fit");
    m["input"] = {{"data", fs::absolute(options.data).string()},
                  {"sha256", sha256_file(options.data)},
                  {"rows_read", ingest.rows_read},
                  {"rows_filtered", ingest.rows_filtered},
                  {"observations", ingest.data.size()}};
    if (options.max_y) m["input"]["max_y"] = *options.max_y;
    if (options.config) {
        m["config_file"] = {{"path", fs::absolute(*options.config).string()},
                            {"sha256", sha256_file(*options.config)}};
    }
    m["config"] = config_to_json(config);
    m["settings"] = settings_to_json(fc.settings);
    m["seed"] = fc.settings.seed;
    m["retained_per_chain"] = fc.settings.retained_per_chain();
    m["step_acceptance"] = json::object();
    for (std::size_t k = 0; k < PosteriorDraws::kStepNames.size(); ++k) {
        m["step_acceptance"][PosteriorDraws::kStepNames[k]] = draws.step_acceptance[k];
    }
    m["dose_p99"] = ingest.data.empty() ? config.basis.dose_max() : quantile(ingest.data.x, 0.99);
    m["outputs"] = outputs;
    write_json(r.manifest, m);
    return r;
}

LoadedFit load_fit(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("draws path " + path.string() + " does not exist");
    const bool is_dir = fs::is_directory(path);
    const fs::path dir = is_dir ? path : path.parent_path();
    const fs::path manifest_path = (dir.empty() ? fs::path(".") : dir) / "manifest_fit.json";
    if (!fs::exists(manifest_path)) {
        throw UsageError("no manifest_fit.json next to " + path.string());
    }
    LoadedFit fit{config_from_json(read_json(manifest_path).at("config")), {}, read_json(manifest_path)};

    const auto& outputs = fit.manifest.at("outputs");
    bool matched = false;
    for (const auto& entry : outputs) {
        const fs::path file = manifest_path.parent_path() / entry.at("draws").get<std::string>();
        if (!is_dir && !fs::equivalent(file, path)) continue;
        matched = true;
        auto part = read_draws_csv(file, entry.at("chain").get<int>());
        for (std::size_t i = 0; i < part.size(); ++i) {
            if (part.draws[i].w.size() != fit.config.J() || part.draws[i].low.size() != static_cast<std::size_t>(fit.config.H)) {
                throw DataError(file.string() + ": draw dimensions disagree with the manifest");
            }
        }
        fit.draws.draws.insert(fit.draws.draws.end(), part.draws.begin(), part.draws.end());
        fit.draws.chain_ids.insert(fit.draws.chain_ids.end(), part.chain_ids.begin(), part.chain_ids.end());
        fit.draws.iterations.insert(fit.draws.iterations.end(), part.iterations.begin(), part.iterations.end());
    }
    if (!matched) throw UsageError(path.string() + " is not listed in " + manifest_path.string());
    if (fit.draws.empty()) throw UsageError("no draws found under " + path.string());
    return fit;
}

RiskResult cmd_risk(const RiskOptions& options, std::ostream& log) {
    if (options.q.empty()) throw UsageError("risk: the q list is empty");
    for (double q : options.q) {
        if (!(q > 0.0 && q < 1.0)) throw UsageError(fmt::format("risk: q = {} is outside (0, 1)", q));
    }
    if (options.grid_points < 2) throw UsageError("risk: need at least two grid points");
    const LoadedFit fit = load_fit(options.draws);
    const SplineBasis& basis = fit.config.basis;
    const double grid_max = options.grid_max.value_or(fit.manifest.value("dose_p99", basis.dose_max()));
    if (!(grid_max > 0.0)) throw UsageError("risk: grid max must be positive");

    RiskQuery query{.threshold = options.threshold, .q = options.q.front(),
                    .dose_grid = linear_grid(0.0, grid_max, options.grid_points)};
    query.validate();

    ensure_dir(options.out);
    RiskResult r{options.out / "risk_curve.csv", options.out / "beta_curve.csv", options.out / "bmd.csv",
                 options.out / "manifest_risk.json"};
    write_curve(r.risk_curve, posterior_risk_curve(fit.draws, basis, query));
    write_curve(r.beta_curve, posterior_beta_curve(fit.draws, basis, query.dose_grid));

    json bmd_info = json::array();
    auto out = open_out(r.bmd_table);
    out << "q,bmd_mean,bmd_lo,bmd_hi,bmdl\n";
    for (double q : options.q) {
        try {
            const auto s = posterior_bmd(fit.draws, basis, q, options.threshold);
            out << format_number(q) << ',' << format_number(s.mean) << ',' << format_number(s.lo95) << ','
                << format_number(s.hi95) << ',' << format_number(s.bmdl) << '\n';
            if (s.unattained > 0) {
                log << fmt::format("warning: q = {}: {} of {} draws never reach the target risk on [0, {}]\n", q,
                                   s.unattained, fit.draws.size(), basis.dose_max());
            }
            bmd_info.push_back({{"q", q}, {"attained", s.samples.size()}, {"unattained", s.unattained}});
        } catch (const ModelDegeneracyError& e) {
            log << fmt::format("warning: q = {}: {}\n", q, e.what());
            out << format_number(q) << ",NA,NA,NA,NA\n";
            bmd_info.push_back({{"q", q}, {"attained", 0}, {"unattained", fit.draws.size()}});
        }
    }

    json m = manifest_base("risk");
    m["input"] = {{"draws", fs::absolute(options.draws).string()}, {"draw_count", fit.draws.size()}};
    m["fit_manifest"] = fit.manifest;
    m["threshold"] = options.threshold;
    m["q"] = options.q;
    m["grid"] = {{"min", 0.0}, {"max", grid_max}, {"points", options.grid_points}};
    m["bmd_search_interval"] = {0.0, basis.dose_max()};
    m["bmd"] = bmd_info;
    m["outputs"] = {{"risk_curve", r.risk_curve.filename().string()},
                    {"beta_curve", r.beta_curve.filename().string()},
                    {"bmd_table", r.bmd_table.filename().string()}};
    write_json(r.manifest, m);
    return r;
}

CheckResult cmd_check(const CheckOptions& options, std::ostream& log) {
    const LoadedFit fit = load_fit(options.draws);
    const SplineBasis& basis = fit.config.basis;
    const auto ingest = read_dataset_csv(options.data, {.max_y = options.max_y});
    for (const auto& w : ingest.warnings) log << "warning: " << options.data.string() << ": " << w << '\n';

    PpcOptions ppc_opts;
    ppc_opts.threshold = options.threshold;
    ppc_opts.replicates = options.replicates;
    ppc_opts.seed = options.seed;
    if (options.grid_max) {
        if (!(*options.grid_max > 0.0)) throw UsageError("check: grid max must be positive");
        ppc_opts.dose_grid = linear_grid(0.0, *options.grid_max, options.grid_points);
    } else if (!ingest.data.empty()) {
        ppc_opts.dose_grid = linear_grid(0.0, quantile(ingest.data.x, 0.99), options.grid_points);
    }
    const PpcResult ppc = run_ppc(fit.draws, basis, ingest.data, ppc_opts);

    ensure_dir(options.out);
    CheckResult r{options.out / "ppc.csv", options.out / "geweke.csv", options.out / "manifest_check.json"};
    r.tail_flag = ppc.tail_flag;
    {
        auto out = open_out(r.ppc);
        out << "x,observed";
        for (std::size_t k = 0; k < ppc.replicate_curves.size(); ++k) out << ",rep_" << k + 1;
        out << '\n';
        for (std::size_t g = 0; g < ppc.grid.size(); ++g) {
            out << format_number(ppc.grid[g]) << ',' << cell(ppc.observed_curve[g]);
            for (const auto& curve : ppc.replicate_curves) out << ',' << cell(curve[g]);
            out << '\n';
        }
    }

    const double xm = basis.dose_max();
    const auto scalars = monitored_scalars(fit.draws, basis, options.threshold, {0.25 * xm, 0.5 * xm, 0.75 * xm});
    {
        auto out = open_out(r.diagnostics);
        out << "name,chain,z,pass\n";
        for (const auto& s : scalars) {
            std::optional<double> z;
            if (s.values.size() >= 100) {
                z = geweke_z(s.values);
            } else {
                log << fmt::format("warning: {} (chain {}): {} draws, too few for a Geweke score\n", s.name,
                                   s.chain_id, s.values.size());
            }
            const GewekeEntry e{s.name, s.chain_id, z};
            ++r.geweke_total;
            if (e.pass()) ++r.geweke_pass;
            out << '"' << e.name << "\"," << e.chain_id << ',' << cell(e.z) << ',' << (e.pass() ? "pass" : "fail")
                << '\n';
        }
    }

    json m = manifest_base("check");
    m["input"] = {{"draws", fs::absolute(options.draws).string()},
                  {"data", fs::absolute(options.data).string()},
                  {"data_sha256", sha256_file(options.data)},
                  {"observations", ingest.data.size()}};
    if (options.max_y) m["input"]["max_y"] = *options.max_y;
    m["fit_manifest"] = fit.manifest;
    m["threshold"] = options.threshold;
    m["replicates"] = options.replicates;
    m["seed"] = options.seed;
    m["grid"] = {{"min", ppc.grid.front()}, {"max", ppc.grid.back()}, {"points", ppc.grid.size()}};
    m["replicate_draw_index"] = ppc.replicate_draws;
    m["tail_flag"] = ppc.tail_flag;
    m["geweke"] = {{"pass", r.geweke_pass}, {"total", r.geweke_total}};
    m["outputs"] = {{"ppc", r.ppc.filename().string()}, {"diagnostics", r.diagnostics.filename().string()}};
    write_json(r.manifest, m);
    return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"CoMiRe: Bayesian convex mixture regression for dose-response"};
    app.set_version_flag("--version", COMIRE_VERSION);
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a scenario dataset and its truth");
    simulate->add_option("--scenario", sim.scenario, "Scenario id (1, 2 or 3)")->capture_default_str();
    simulate->add_option("--n", sim.n, "Number of observations")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory")->required();

    FitOptions fit;
    std::string fit_data;
    std::string fit_config;
    std::string fit_out;
    auto* fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
    fit_cmd->add_option("--data", fit_data, "Dataset CSV with x,y columns")->required();
    fit_cmd->add_option("--config", fit_config, "JSON configuration file");
    fit_cmd->add_option("--iterations", fit.iterations, "Total iterations per chain");
    fit_cmd->add_option("--burn-in", fit.burn_in, "Burn-in iterations");
    fit_cmd->add_option("--thin", fit.thin, "Thinning interval");
    fit_cmd->add_option("--chains", fit.chains, "Number of chains");
    fit_cmd->add_option("--seed", fit.seed, "Random seed");
    fit_cmd->add_option("--max-y", fit.max_y, "Drop rows with y above this value");
    fit_cmd->add_option("--out", fit_out, "Output directory")->required();

    RiskOptions risk;
    std::string risk_draws;
    std::string risk_out;
    auto* risk_cmd = app.add_subcommand("risk", "Additional-risk curve and benchmark doses");
    risk_cmd->add_option("--draws", risk_draws, "Fit directory or one draws_chain<k>.csv")->required();
    risk_cmd->add_option("--threshold", risk.threshold, "Response cutoff a")->capture_default_str();
    risk_cmd->add_option("--q", risk.q, "Benchmark risk levels, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    risk_cmd->add_option("--grid-max", risk.grid_max, "Upper end of the dose grid");
    risk_cmd->add_option("--grid-points", risk.grid_points, "Dose grid size")->capture_default_str();
    risk_cmd->add_option("--out", risk_out, "Output directory")->required();

    CheckOptions check;
    std::string check_draws;
    std::string check_data;
    std::string check_out;
    auto* check_cmd = app.add_subcommand("check", "Posterior predictive check and Geweke diagnostics");
    check_cmd->add_option("--draws", check_draws, "Fit directory or one draws_chain<k>.csv")->required();
    check_cmd->add_option("--data", check_data, "Dataset CSV with x,y columns")->required();
    check_cmd->add_option("--threshold", check.threshold, "Response cutoff a")->capture_default_str();
    check_cmd->add_option("--replicates", check.replicates, "Replicated datasets")->capture_default_str();
    check_cmd->add_option("--max-y", check.max_y, "Drop rows with y above this value");
    check_cmd->add_option("--grid-max", check.grid_max, "Upper end of the dose grid");
    check_cmd->add_option("--grid-points", check.grid_points, "Dose grid size")->capture_default_str();
    check_cmd->add_option("--seed", check.seed, "Random seed for replicates")->capture_default_str();
    check_cmd->add_option("--out", check_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    try {
        if (simulate->parsed()) {
            const auto r = cmd_simulate(sim);
            out << r.data.string() << '\n';
        } else if (fit_cmd->parsed()) {
            fit.data = fit_data;
            if (!fit_config.empty()) fit.config = fit_config;
            fit.out = fit_out;
            const auto r = cmd_fit(fit, err);
            out << fmt::format("{} observations, {} draws per chain, manifest {}\n", r.observations, r.retained,
                               r.manifest.string());
        } else if (risk_cmd->parsed()) {
            risk.draws = risk_draws;
            risk.out = risk_out;
            const auto r = cmd_risk(risk, err);
            out << r.bmd_table.string() << '\n';
        } else if (check_cmd->parsed()) {
            check.draws = check_draws;
            check.data = check_data;
            check.out = check_out;
            const auto r = cmd_check(check, err);
            out << fmt::format("ppc envelope exceedance {:.3f}; geweke {}/{} pass\n", r.tail_flag,
                               r.geweke_pass, r.geweke_total);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::usage);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical);
    } catch (const ModelDegeneracyError& e) {
        err << "model error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical);
    } catch (const json::exception& e) {
        err << "manifest error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::failure);
    }
    return static_cast<int>(ExitCode::ok);
}

}  // namespace comire
