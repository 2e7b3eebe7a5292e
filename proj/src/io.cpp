#include "comire/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "comire/errors.hpp"

namespace comire {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

double parse_cell(const std::string& raw, std::size_t row, const char* column) {
    const std::string cell = trim(raw);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(fmt::format("row {}: column {} is not a finite number ('{}')", row, column, cell));
    }
    return v;
}

std::vector<double> concentration_value(const nlohmann::json& v, const char* key) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(fmt::format("config: {} entries must be numbers", key));
            out.push_back(e.get<double>());
        }
        return out;
    }
    throw ConfigError(fmt::format("config: {} must be a number or an array", key));
}

}  // namespace

IngestReport read_dataset_csv(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset " + path.string());
    IngestReport report;
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset " + path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_row(line);
    std::optional<std::size_t> xcol;
    std::optional<std::size_t> ycol;
    for (std::size_t k = 0; k < header.size(); ++k) {
        const std::string name = trim(header[k]);
        if (name == "x" && !xcol) {
            xcol = k;
        } else if (name == "y" && !ycol) {
            ycol = k;
        } else {
            report.warnings.push_back("ignoring column '" + name + "'");
        }
    }
    if (!xcol) throw DataError("dataset " + path.string() + ": header has no 'x' column");
    if (!ycol) throw DataError("dataset " + path.string() + ": header has no 'y' column");

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() <= std::max(*xcol, *ycol)) {
            throw DataError(fmt::format("row {}: expected {} cells, found {}", row, header.size(),
                                        cells.size()));
        }
        const double x = parse_cell(cells[*xcol], row, "x");
        const double y = parse_cell(cells[*ycol], row, "y");
        if (x < 0.0) throw DataError(fmt::format("row {}: negative dose {}", row, x));
        ++report.rows_read;
        if (options.max_y && y > *options.max_y) {
            ++report.rows_filtered;
            continue;
        }
        report.data.x.push_back(x);
        report.data.y.push_back(y);
    }
    return report;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path.string() + " for writing");
    out << "x,y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << format_number(data.x[i]) << ',' << format_number(data.y[i]) << '\n';
    }
}

FitConfig parse_fit_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    static const std::set<std::string> known = {
        "H",     "inner_knots", "degree", "dose_max",   "prior_mean", "kappa", "a_tau", "b_tau",
        "alpha", "eta",         "iterations", "burn_in", "thin",      "chains", "seed"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    FitConfig cfg;
    auto num = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_number()) throw ConfigError(fmt::format("config: {} must be a number", key));
        return j[key].get<double>();
    };
    auto integer = [&](const char* key) -> std::optional<long long> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_number_integer()) throw ConfigError(fmt::format("config: {} must be an integer", key));
        return j[key].get<long long>();
    };
    if (auto v = integer("H")) cfg.model.H = static_cast<int>(*v);
    if (auto v = integer("inner_knots")) cfg.model.inner_knots = static_cast<int>(*v);
    if (auto v = integer("degree")) cfg.model.degree = static_cast<int>(*v);
    if (auto v = num("dose_max")) cfg.model.dose_max = *v;
    if (auto v = num("prior_mean")) cfg.model.prior_mean = *v;
    if (auto v = num("kappa")) cfg.model.kappa = *v;
    if (auto v = num("a_tau")) cfg.model.a_tau = *v;
    if (auto v = num("b_tau")) cfg.model.b_tau = *v;
    if (j.contains("alpha") && j["alpha"].is_number()) cfg.model.alpha = j["alpha"].get<double>();
    if (j.contains("eta") && j["eta"].is_number()) cfg.model.eta = j["eta"].get<double>();
    if (auto v = integer("iterations")) cfg.settings.iterations = static_cast<int>(*v);
    if (auto v = integer("burn_in")) cfg.settings.burn_in = static_cast<int>(*v);
    if (auto v = integer("thin")) cfg.settings.thin = static_cast<int>(*v);
    if (auto v = integer("chains")) cfg.settings.chains = static_cast<int>(*v);
    if (auto v = integer("seed")) {
        if (*v < 0) throw ConfigError("config: seed must be nonnegative");
        cfg.settings.seed = static_cast<std::uint64_t>(*v);
    }
    parse_concentration_overrides(j);  // type-checks the arrays
    return cfg;
}

ConcentrationOverrides parse_concentration_overrides(const nlohmann::json& j) {
    ConcentrationOverrides out;
    if (j.contains("alpha") && j["alpha"].is_array()) out.alpha = concentration_value(j["alpha"], "alpha");
    if (j.contains("eta") && j["eta"].is_array()) out.eta = concentration_value(j["eta"], "eta");
    if (j.contains("alpha") && !j["alpha"].is_array()) concentration_value(j["alpha"], "alpha");
    if (j.contains("eta") && !j["eta"].is_array()) concentration_value(j["eta"], "eta");
    return out;
}

FitConfig read_fit_config(const std::filesystem::path& path) {
    return parse_fit_config(read_json(path));
}

nlohmann::json config_to_json(const ModelConfig& config) {
    const auto& b = config.basis;
    return {
        {"H", config.H},
        {"J", config.J()},
        {"basis",
         {{"degree", b.degree()},
          {"inner_knots", std::vector<double>(b.inner_knots().begin(), b.inner_knots().end())},
          {"dose_max", b.dose_max()}}},
        {"alpha", config.alpha},
        {"eta", config.eta},
        {"a_tau", config.a_tau},
        {"b_tau", config.b_tau},
        {"prior_mean", config.prior_mean},
        {"kappa", config.kappa},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    try {
        const auto& b = j.at("basis");
        ModelConfig cfg{
            .H = j.at("H").get<int>(),
            .basis = SplineBasis(b.at("degree").get<int>(),
                                 b.at("inner_knots").get<std::vector<double>>(),
                                 b.at("dose_max").get<double>()),
            .alpha = j.at("alpha").get<std::vector<double>>(),
            .eta = j.at("eta").get<std::vector<double>>(),
            .a_tau = j.at("a_tau").get<double>(),
            .b_tau = j.at("b_tau").get<double>(),
            .prior_mean = j.at("prior_mean").get<double>(),
            .kappa = j.at("kappa").get<double>(),
        };
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest config snapshot: ") + e.what());
    }
}

nlohmann::json settings_to_json(const ChainSettings& s) {
    return {{"iterations", s.iterations},
            {"burn_in", s.burn_in},
            {"thin", s.thin},
            {"chains", s.chains},
            {"seed", s.seed}};
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string() + " for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericalError("sha256: digest initialisation failed");
    }
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
    return hex;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace comire
