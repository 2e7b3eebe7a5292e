#pragma once

// File formats: dataset CSV, fit configuration, run manifests.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "comire/basis.hpp"
#include "comire/gibbs.hpp"
#include "comire/model.hpp"

namespace comire {

struct IngestOptions {
    std::optional<double> max_y;  // drop rows with y above this ceiling
};

struct IngestReport {
    Dataset data;
    std::size_t rows_read = 0;
    std::size_t rows_filtered = 0;
    std::vector<std::string> warnings;
};

// Header row must contain `x` and `y` (any order); other columns are ignored
// with a warning. Throws DataError naming the row (1-based, header = row 1)
// for missing cells, non-numeric cells and negative doses.
IngestReport read_dataset_csv(const std::filesystem::path& path, const IngestOptions& options = {});
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

struct FitConfig {
    ModelDefaults model;
    ChainSettings settings;
};

// Flat JSON object. Recognized keys:
//   H, inner_knots, degree, dose_max, prior_mean, kappa, a_tau, b_tau,
//   alpha, eta (number = common value, or array of length H / J),
//   iterations, burn_in, thin, chains, seed.
// Any other key is a ConfigError.
FitConfig parse_fit_config(const nlohmann::json& j);
FitConfig read_fit_config(const std::filesystem::path& path);
// Explicit alpha/eta arrays, when given in the file.
struct ConcentrationOverrides {
    std::optional<std::vector<double>> alpha;
    std::optional<std::vector<double>> eta;
};
ConcentrationOverrides parse_concentration_overrides(const nlohmann::json& j);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);
nlohmann::json settings_to_json(const ChainSettings& settings);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Shortest round-trip text for a double.
std::string format_number(double v);

}  // namespace comire
