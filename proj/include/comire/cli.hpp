#pragma once

// Command implementations behind the `comire` executable. Each command writes
// its outputs plus a manifest_<command>.json into the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "comire/gibbs.hpp"
#include "comire/model.hpp"

namespace comire {

// Exit codes of the executable.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    usage = 2,
    config = 3,
    data = 4,
    numerical = 5,
};

struct SimulateOptions {
    int scenario = 1;
    std::size_t n = 500;
    std::uint64_t seed = 42;
    std::filesystem::path out = ".";
};

struct SimulateResult {
    std::filesystem::path data;      // data.csv
    std::filesystem::path truth;     // truth.json
    std::filesystem::path manifest;  // manifest_simulate.json
};

SimulateResult cmd_simulate(const SimulateOptions& options);

struct FitOptions {
    std::filesystem::path data;
    std::optional<std::filesystem::path> config;
    // Flags take precedence over the config file.
    std::optional<int> iterations;
    std::optional<int> burn_in;
    std::optional<int> thin;
    std::optional<int> chains;
    std::optional<std::uint64_t> seed;
    std::optional<double> max_y;
    std::filesystem::path out = ".";
};

struct FitResult {
    std::vector<std::filesystem::path> draw_files;  // draws_chain<k>.csv
    std::filesystem::path manifest;                 // manifest_fit.json
    std::size_t observations = 0;
    std::size_t retained = 0;
};

FitResult cmd_fit(const FitOptions& options, std::ostream& log);

// A fit read back from disk. `path` is either the fit output directory (all
// chains) or one draws_chain<k>.csv next to its manifest_fit.json.
struct LoadedFit {
    ModelConfig config;
    PosteriorDraws draws;
    nlohmann::json manifest;
};

LoadedFit load_fit(const std::filesystem::path& path);

struct RiskOptions {
    std::filesystem::path draws;
    double threshold = 37.0;
    std::vector<double> q = {0.01, 0.05, 0.10};
    std::optional<double> grid_max;  // defaults to the 99th percentile dose of the fit
    std::size_t grid_points = 100;
    std::filesystem::path out = ".";
};

struct RiskResult {
    std::filesystem::path risk_curve;  // risk_curve.csv
    std::filesystem::path beta_curve;  // beta_curve.csv
    std::filesystem::path bmd_table;   // bmd.csv
    std::filesystem::path manifest;    // manifest_risk.json
};

RiskResult cmd_risk(const RiskOptions& options, std::ostream& log);

struct CheckOptions {
    std::filesystem::path draws;
    std::filesystem::path data;
    double threshold = 37.0;
    std::size_t replicates = 50;
    std::optional<double> max_y;
    std::optional<double> grid_max;  // defaults to the 99th percentile dose of the data
    std::size_t grid_points = 100;
    std::uint64_t seed = 42;
    std::filesystem::path out = ".";
};

struct CheckResult {
    std::filesystem::path ppc;          // ppc.csv
    std::filesystem::path diagnostics;  // geweke.csv
    std::filesystem::path manifest;     // manifest_check.json
    double tail_flag = 0.0;
    std::size_t geweke_pass = 0;
    std::size_t geweke_total = 0;
};

CheckResult cmd_check(const CheckOptions& options, std::ostream& log);

// Parses argv and dispatches; errors are reported on `err` and mapped to an
// ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace comire
