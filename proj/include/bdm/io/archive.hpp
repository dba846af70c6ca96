#pragma once

// Run archives: one directory per fit.
//
//   manifest.json        versioned record of spec, config, graph fingerprint,
//                        summary rows, DIC, R-hat table, trace files, warnings
//   summary.txt/.csv     posterior table
//   dic.txt, rhat.csv    diagnostics
//   traces/<node>.csv    chain,iteration,value
//
// manifest.json is written last; `complete: true` marks a finished run.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdm/diagnostics.hpp"
#include "bdm/error.hpp"
#include "bdm/io/csv.hpp"
#include "bdm/io/format.hpp"
#include "bdm/mcmc.hpp"
#include "bdm/model.hpp"
#include "bdm/sampler.hpp"

namespace bdm::io {

inline constexpr int archive_version = 1;

struct RunArchive {
    int version = archive_version;
    ModelSpec spec;
    McmcConfig config;
    std::string graph_fingerprint;
    std::vector<PosteriorSummaryRow> summary;
    DicReport dic;
    std::vector<RhatEntry> rhat;
    std::vector<std::string> trace_files;
    std::vector<std::string> warnings;
    bool converged = true;
    bool complete = false;

    friend bool operator==(const RunArchive&, const RunArchive&) = default;
};

namespace detail {

using json = nlohmann::json;

inline json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline double number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

inline json to_json(const ModelSpec& s) {
    json j = {{"tier", to_string(s.tier)},
              {"prior_beta_mean", s.prior_beta_mean},
              {"prior_beta_precision", s.prior_beta_precision},
              {"tau_phi_prior", {{"shape", s.tau_phi_prior.shape}, {"rate", s.tau_phi_prior.rate}}},
              {"tau_theta_prior", {{"shape", s.tau_theta_prior.shape}, {"rate", s.tau_theta_prior.rate}}}};
    j["dispersion"] = s.dispersion ? json(*s.dispersion) : json(nullptr);
    return j;
}

inline ModelSpec spec_from_json(const json& j) {
    ModelSpec s;
    s.tier = parse_tier(j.at("tier").get<std::string>());
    s.prior_beta_mean = j.at("prior_beta_mean").get<std::vector<double>>();
    s.prior_beta_precision = j.at("prior_beta_precision").get<std::vector<double>>();
    s.tau_phi_prior = {j.at("tau_phi_prior").at("shape").get<double>(), j.at("tau_phi_prior").at("rate").get<double>()};
    s.tau_theta_prior = {j.at("tau_theta_prior").at("shape").get<double>(),
                         j.at("tau_theta_prior").at("rate").get<double>()};
    if (!j.at("dispersion").is_null()) s.dispersion = j.at("dispersion").get<double>();
    return s;
}

inline json to_json(const McmcConfig& c) {
    return {{"n_chains", c.n_chains},   {"n_iterations", c.n_iterations}, {"burn_in", c.burn_in},
            {"thin", c.thin},           {"seed", c.seed},                 {"adapt_window", c.adapt_window},
            {"target_accept", c.target_accept}, {"parallel", c.parallel}};
}

inline McmcConfig config_from_json(const json& j) {
    McmcConfig c;
    c.n_chains = j.at("n_chains").get<std::size_t>();
    c.n_iterations = j.at("n_iterations").get<std::size_t>();
    c.burn_in = j.at("burn_in").get<std::size_t>();
    c.thin = j.at("thin").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.adapt_window = j.at("adapt_window").get<std::size_t>();
    c.target_accept = j.at("target_accept").get<double>();
    c.parallel = j.at("parallel").get<bool>();
    return c;
}

}  // namespace detail

inline nlohmann::json archive_to_json(const RunArchive& a) {
    using detail::json;
    using detail::number;
    json rows = json::array();
    for (const auto& r : a.summary) {
        rows.push_back({{"node", r.node},
                        {"mean", number(r.mean)},
                        {"sd", number(r.sd)},
                        {"mc_error", number(r.mc_error)},
                        {"q2_5", number(r.q2_5)},
                        {"median", number(r.median)},
                        {"q97_5", number(r.q97_5)},
                        {"start", r.start},
                        {"sample", r.sample}});
    }
    json rhat = json::array();
    for (const auto& e : a.rhat) rhat.push_back({{"node", e.node}, {"rhat", number(e.rhat)}});
    return {{"version", a.version},
            {"spec", detail::to_json(a.spec)},
            {"config", detail::to_json(a.config)},
            {"graph_fingerprint", a.graph_fingerprint},
            {"summary", rows},
            {"dic",
             {{"d_bar", number(a.dic.d_bar)},
              {"d_hat", number(a.dic.d_hat)},
              {"p_d", number(a.dic.p_d)},
              {"dic", number(a.dic.dic)}}},
            {"rhat", rhat},
            {"trace_files", a.trace_files},
            {"warnings", a.warnings},
            {"converged", a.converged},
            {"complete", a.complete}};
}

inline RunArchive archive_from_json(const nlohmann::json& j) {
    using detail::number;
    RunArchive a;
    a.version = j.at("version").get<int>();
    if (a.version != archive_version) {
        throw DataError("unsupported archive version " + std::to_string(a.version));
    }
    a.spec = detail::spec_from_json(j.at("spec"));
    a.config = detail::config_from_json(j.at("config"));
    a.graph_fingerprint = j.at("graph_fingerprint").get<std::string>();
    for (const auto& r : j.at("summary")) {
        a.summary.push_back(PosteriorSummaryRow{r.at("node").get<std::string>(), number(r.at("mean")),
                                                number(r.at("sd")), number(r.at("mc_error")),
                                                number(r.at("q2_5")), number(r.at("median")),
                                                number(r.at("q97_5")), r.at("start").get<std::size_t>(),
                                                r.at("sample").get<std::size_t>()});
    }
    const auto& d = j.at("dic");
    a.dic = DicReport{number(d.at("d_bar")), number(d.at("d_hat")), number(d.at("p_d")), number(d.at("dic"))};
    for (const auto& e : j.at("rhat")) a.rhat.push_back(RhatEntry{e.at("node").get<std::string>(), number(e.at("rhat"))});
    a.trace_files = j.at("trace_files").get<std::vector<std::string>>();
    a.warnings = j.at("warnings").get<std::vector<std::string>>();
    a.converged = j.at("converged").get<bool>();
    a.complete = j.at("complete").get<bool>();
    return a;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& dir) { return dir / "manifest.json"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void save_archive(const std::filesystem::path& dir, const RunArchive& a) {
    std::filesystem::create_directories(dir);
    write_text(manifest_path(dir), archive_to_json(a).dump(2) + "\n");
}

inline RunArchive load_archive(const std::filesystem::path& dir) {
    const auto text = read_text(manifest_path(dir));
    try {
        return archive_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path(dir).string() + ": " + e.what());
    }
}

/// True when `dir` holds a manifest marked complete.
inline bool archive_complete(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(manifest_path(dir))) return false;
    try {
        return nlohmann::json::parse(read_text(manifest_path(dir))).value("complete", false);
    } catch (const nlohmann::json::exception&) {
        return false;
    }
}

/// File name used for a node's trace ("alpha1[2]" -> "alpha1_2.csv").
inline std::string trace_file_name(const std::string& node) {
    std::string out;
    for (const char ch : node) {
        if (ch == '[') out.push_back('_');
        else if (ch != ']') out.push_back(ch);
    }
    return out + ".csv";
}

inline std::string trace_csv(const ChainSet& chains, const std::string& node) {
    const auto draws = node_draws(chains, node);
    std::string out = "chain,iteration,value\n";
    for (std::size_t c = 0; c < draws.size(); ++c) {
        for (std::size_t m = 0; m < draws[c].size(); ++m) {
            out += std::to_string(c + 1) + "," + std::to_string(chains.config.iteration_of(m)) + "," +
                   format_exact(draws[c][m]) + "\n";
        }
    }
    return out;
}

/// Per-chain series from a trace CSV, chains ordered by their index.
inline std::vector<std::vector<double>> read_trace(const std::filesystem::path& path) {
    const auto table = read_csv(path.string());
    const long cc = table.column("chain");
    const long cv = table.column("value");
    if (cc < 0 || cv < 0 || table.column("iteration") < 0) {
        throw DataError(path.string() + ": trace needs columns chain,iteration,value");
    }
    std::vector<std::vector<double>> out;
    for (const auto& row : table.rows) {
        const auto c = parse_integer(row[static_cast<std::size_t>(cc)], "chain");
        if (c < 1) throw DataError(path.string() + ": chain index must be 1-based");
        if (out.size() < static_cast<std::size_t>(c)) out.resize(static_cast<std::size_t>(c));
        out[static_cast<std::size_t>(c - 1)].push_back(parse_double(row[static_cast<std::size_t>(cv)], "value"));
    }
    return out;
}

inline std::string dic_text(const DicReport& d) {
    return "Dbar " + format_exact(d.d_bar) + "\nDhat " + format_exact(d.d_hat) + "\npD " + format_exact(d.p_d) +
           "\nDIC " + format_exact(d.dic) + "\n";
}

inline std::string rhat_csv(const std::vector<RhatEntry>& entries) {
    std::string out = "node,rhat\n";
    for (const auto& e : entries) out += csv_escape(e.node) + "," + format_exact(e.rhat) + "\n";
    return out;
}

}  // namespace bdm::io
