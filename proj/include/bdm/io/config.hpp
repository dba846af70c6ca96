#pragma once

// Run configuration: `key = value` lines, `#` comments. Every accepted key is
// listed in config_keys(); anything else is rejected by name.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bdm/error.hpp"
#include "bdm/io/dataset_io.hpp"
#include "bdm/io/format.hpp"

namespace bdm::io {

struct ConfigKey {
    const char* name;
    const char* help;
};

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys{
        {"tier", "model tier: glm | bym | spatiotemporal (default bym)"},
        {"seed", "seed for every random stream (default 1)"},
        {"prior.beta_mean", "prior mean of beta; one value (broadcast) or one per coefficient (default 0)"},
        {"prior.beta_precision", "diagonal prior precision of beta; broadcast like beta_mean (default 1e-5)"},
        {"prior.tau_phi_shape", "Gamma shape for tau_phi (default 0.5)"},
        {"prior.tau_phi_rate", "Gamma rate for tau_phi (default 0.0005)"},
        {"prior.tau_theta_shape", "Gamma shape for tau_theta (default 0.5)"},
        {"prior.tau_theta_rate", "Gamma rate for tau_theta (default 0.0005)"},
        {"prior.dispersion", "dispersion v^2; recorded but unused by the Poisson family"},
        {"mcmc.chains", "number of chains (default 2)"},
        {"mcmc.iterations", "post-burn-in iterations per chain (default 20000)"},
        {"mcmc.burn_in", "discarded iterations per chain (default 4000)"},
        {"mcmc.thin", "keep every k-th iteration (default 1)"},
        {"mcmc.adapt_window", "iterations of proposal adaptation, within burn-in (default burn_in / 2)"},
        {"mcmc.target_accept", "target acceptance rate of random-walk blocks (default 0.44)"},
        {"mcmc.parallel", "run chains on separate threads: true | false (default true)"},
        {"data.path", "dataset CSV"},
        {"data.columns", "column mapping sidecar (default <data.path>.columns when present)"},
        {"data.region_column", "region id column (overrides the sidecar)"},
        {"data.count_column", "observed count column (overrides the sidecar)"},
        {"data.expected_column", "expected count column (overrides the sidecar)"},
        {"data.covariates", "comma-separated covariate columns (overrides the sidecar)"},
        {"data.period_column", "integer period column (overrides the sidecar)"},
        {"graph.geojson", "GeoJSON FeatureCollection of region polygons"},
        {"graph.edges", "edge list CSV with header i,j[,w]"},
        {"graph.rule", "contiguity rule for polygons: queen | rook (default queen)"},
        {"graph.id_property", "feature property holding the region id (default id, fallback name)"},
        {"graph.snap_fraction", "snap grid as a fraction of the bounding-box diagonal (default 1e-9)"},
        {"summary.nodes", "comma-separated nodes to summarise (default: all regression and variance nodes)"},
        {"simulate.lattice", "rows x cols rook lattice to simulate on, e.g. 6x6"},
        {"simulate.beta", "true coefficients: intercept, covariates, temporal slope"},
        {"simulate.tau_phi", "true spatial precision (default 2)"},
        {"simulate.tau_theta", "true unstructured precision (default 4)"},
        {"simulate.expected_min", "lower bound of uniform expected counts (default 50)"},
        {"simulate.expected_max", "upper bound of uniform expected counts (default 200)"},
        {"simulate.periods", "periods per region (required for the spatio-temporal tier)"},
        {"export.values", "values to map: sir | relative_risk (default sir)"},
        {"export.archive", "fit archive providing relative_risk values"},
        {"export.breaks", "quantile:<k> or manual:<b0>,<b1>,... (default quantile:5)"},
        {"export.units", "free-text units stored with the map"},
        {"export.output", "output file name inside --out (default choropleth.geojson)"},
    };
    return keys;
}

inline bool is_config_key(const std::string& key) {
    const auto& keys = config_keys();
    return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.name; });
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(const std::string& text, std::filesystem::path base_dir = {}) {
        RunConfig cfg;
        cfg.base_dir_ = std::move(base_dir);
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config line " + std::to_string(lineno) + " is not key = value", trim(line));
            }
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return cfg;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'", "--config");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), std::filesystem::path(path).parent_path());
    }

    /// Sets a key, rejecting unknown names.
    void set(const std::string& key, const std::string& value) {
        if (!is_config_key(key)) throw ConfigError("unknown config key '" + key + "'", key);
        values_[key] = value;
    }

    /// Applies a `key=value` override.
    void apply_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value", assignment);
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback = {}) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_double(get(key), key);
        } catch (const DataError& e) {
            throw ConfigError(e.what(), key);
        }
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_integer(get(key), key);
        } catch (const DataError& e) {
            throw ConfigError(e.what(), key);
        }
    }

    std::size_t get_count(const std::string& key, std::size_t fallback) const {
        const auto v = get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw ConfigError(key + " must be non-negative", key);
        return static_cast<std::size_t>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto v = get(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(key + " must be true or false", key);
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : split_list(get(key))) {
            try {
                out.push_back(parse_double(item, key));
            } catch (const DataError& e) {
                throw ConfigError(e.what(), key);
            }
        }
        return out;
    }

    /// Path value resolved against the config file's directory.
    std::optional<std::string> get_path(const std::string& key) const {
        if (!has(key) || get(key).empty()) return std::nullopt;
        const std::filesystem::path p(get(key));
        if (p.is_absolute() || base_dir_.empty()) return p.string();
        return (base_dir_ / p).string();
    }

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    std::string to_text() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
        return out;
    }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

}  // namespace bdm::io
