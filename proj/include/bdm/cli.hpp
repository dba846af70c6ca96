#pragma once

// Command implementations behind the `bdm` executable.
//
//   simulate    synthetic dataset + truth (+ lattice graph) and a ready fit config
//   fit         run the sampler and write a run archive
//   diagnose    recompute R-hat from archived traces and emit R-hat/DIC reports
//   export-map  annotated GeoJSON choropleth of SIRs or fitted relative risks
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage/config error. Failures print a
// single line `error code=<n> kind=<kind> [key=<key>] message=<text>`.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdm/areal_graph.hpp"
#include "bdm/contiguity.hpp"
#include "bdm/diagnostics.hpp"
#include "bdm/error.hpp"
#include "bdm/io/archive.hpp"
#include "bdm/io/choropleth.hpp"
#include "bdm/io/config.hpp"
#include "bdm/io/dataset_io.hpp"
#include "bdm/io/format.hpp"
#include "bdm/io/graph_io.hpp"
#include "bdm/io/table.hpp"
#include "bdm/mcmc.hpp"
#include "bdm/model.hpp"
#include "bdm/rng.hpp"
#include "bdm/sampler.hpp"
#include "bdm/simulate.hpp"

namespace bdm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Command { simulate, fit, diagnose, export_map };

inline Command parse_command(const std::string& s) {
    if (s == "simulate") return Command::simulate;
    if (s == "fit") return Command::fit;
    if (s == "diagnose") return Command::diagnose;
    if (s == "export-map") return Command::export_map;
    throw ConfigError("unknown command '" + s + "'", "command");
}

struct CliInvocation {
    Command command = Command::fit;
    std::optional<std::string> config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
    std::vector<std::string> overrides;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Loaded spatial structure plus the polygon document when one was read.
struct GraphInput {
    AdjacencyGraph graph;
    std::optional<json> document;
    bool present = false;
};

inline io::RunConfig load_config(const CliInvocation& inv) {
    io::RunConfig cfg = inv.config_path ? io::RunConfig::load(*inv.config_path) : io::RunConfig{};
    for (const auto& o : inv.overrides) cfg.apply_override(o);
    if (inv.seed) cfg.set("seed", std::to_string(*inv.seed));
    return cfg;
}

inline std::uint64_t config_seed(const io::RunConfig& cfg) {
    const auto s = cfg.get_int("seed", 1);
    if (s < 0) throw ConfigError("seed must be non-negative", "seed");
    return static_cast<std::uint64_t>(s);
}

inline GraphInput load_graph(const io::RunConfig& cfg) {
    GraphInput in;
    const auto geo = cfg.get_path("graph.geojson");
    const auto edges = cfg.get_path("graph.edges");
    if (geo) {
        const auto rule_name = cfg.get("graph.rule", "queen");
        ContiguityOptions opts;
        if (rule_name == "queen") opts.rule = ContiguityRule::queen;
        else if (rule_name == "rook") opts.rule = ContiguityRule::rook;
        else throw ConfigError("graph.rule must be queen or rook", "graph.rule");
        opts.snap_fraction = cfg.get_double("graph.snap_fraction", 1e-9);
        auto collection = io::read_polygon_collection(*geo, cfg.get("graph.id_property", "id"));
        in.graph = build_graph_from_polygons(collection.features, opts);
        in.document = std::move(collection.document);
        in.present = true;
        if (edges) throw ConfigError("set only one of graph.geojson and graph.edges", "graph.edges");
    } else if (edges) {
        in.graph = io::read_edge_csv(*edges);
        in.present = true;
    }
    return in;
}

inline ModelSpec model_spec_from(const io::RunConfig& cfg) {
    ModelSpec spec;
    spec.tier = parse_tier(cfg.get("tier", "bym"));
    spec.prior_beta_mean = cfg.get_doubles("prior.beta_mean");
    spec.prior_beta_precision = cfg.get_doubles("prior.beta_precision");
    spec.tau_phi_prior = {cfg.get_double("prior.tau_phi_shape", 0.5), cfg.get_double("prior.tau_phi_rate", 0.0005)};
    spec.tau_theta_prior = {cfg.get_double("prior.tau_theta_shape", 0.5),
                            cfg.get_double("prior.tau_theta_rate", 0.0005)};
    if (cfg.has("prior.dispersion")) spec.dispersion = cfg.get_double("prior.dispersion", 0.0);
    return spec;
}

inline McmcConfig mcmc_config_from(const io::RunConfig& cfg) {
    McmcConfig c;
    c.seed = config_seed(cfg);
    c.n_chains = cfg.get_count("mcmc.chains", 2);
    c.n_iterations = cfg.get_count("mcmc.iterations", 20000);
    c.burn_in = cfg.get_count("mcmc.burn_in", 4000);
    c.thin = cfg.get_count("mcmc.thin", 1);
    c.adapt_window = cfg.get_count("mcmc.adapt_window", c.burn_in / 2);
    c.target_accept = cfg.get_double("mcmc.target_accept", 0.44);
    c.parallel = cfg.get_bool("mcmc.parallel", true);
    c.validate();
    return c;
}

inline io::ColumnMapping column_mapping_from(const io::RunConfig& cfg, const std::string& data_path) {
    io::ColumnMapping m;
    if (const auto sidecar = cfg.get_path("data.columns")) {
        m = io::read_mapping(*sidecar);
    } else if (fs::exists(io::mapping_path_for(data_path))) {
        m = io::read_mapping(io::mapping_path_for(data_path));
    }
    if (cfg.has("data.region_column")) m.region = cfg.get("data.region_column");
    if (cfg.has("data.count_column")) m.count = cfg.get("data.count_column");
    if (cfg.has("data.expected_column")) m.expected = cfg.get("data.expected_column");
    if (cfg.has("data.covariates")) m.covariates = io::split_list(cfg.get("data.covariates"));
    if (cfg.has("data.period_column")) m.period = cfg.get("data.period_column");
    return m;
}

inline Dataset load_dataset_from(const io::RunConfig& cfg, const GraphInput& graph) {
    const auto path = cfg.get_path("data.path");
    if (!path) throw ConfigError("data.path is required", "data.path");
    return io::load_dataset(*path, column_mapping_from(cfg, *path), graph.present ? &graph.graph : nullptr);
}

/// Prepares an output directory that will hold a manifest. Refuses to touch a
/// completed one unless forced; a forced run first removes the old manifest.
inline void prepare_output(const fs::path& out, bool force) {
    if (out.empty()) throw ConfigError("--out is required", "--out");
    if (io::archive_complete(out)) {
        if (!force) throw ConfigError("'" + out.string() + "' holds a completed archive; pass --force to overwrite", "--force");
    }
    fs::create_directories(out);
    fs::remove(io::manifest_path(out));
    fs::remove_all(out / "traces");
}

inline void warn_isolated(const AdjacencyGraph& graph, std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto i : graph.isolated()) {
        const auto msg = "isolated region '" + graph.region(i).id + "': spatial effect fixed at 0";
        warnings.push_back(msg);
        err << "warning: " << msg << "\n";
    }
}

inline int cmd_simulate(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const auto cfg = load_config(inv);
    const auto seed = config_seed(cfg);
    const auto spec = model_spec_from(cfg);

    GraphInput gi;
    std::optional<std::pair<std::size_t, std::size_t>> lattice;
    if (cfg.has("simulate.lattice")) {
        const auto dims = cfg.get("simulate.lattice");
        const auto x = dims.find('x');
        if (x == std::string::npos) throw ConfigError("simulate.lattice must look like 6x6", "simulate.lattice");
        try {
            lattice = {static_cast<std::size_t>(io::parse_integer(dims.substr(0, x), "rows")),
                       static_cast<std::size_t>(io::parse_integer(dims.substr(x + 1), "cols"))};
        } catch (const DataError& e) {
            throw ConfigError(e.what(), "simulate.lattice");
        }
        if (lattice->first == 0 || lattice->second == 0) {
            throw ConfigError("lattice dimensions must be positive", "simulate.lattice");
        }
        gi.graph = rook_lattice(lattice->first, lattice->second);
        gi.document = io::lattice_geojson(lattice->first, lattice->second);
        gi.present = true;
    } else {
        gi = load_graph(cfg);
        if (!gi.present) throw ConfigError("simulation needs simulate.lattice, graph.geojson or graph.edges", "simulate.lattice");
    }

    if (!cfg.has("simulate.beta")) throw ConfigError("simulate.beta is required", "simulate.beta");
    const auto beta = cfg.get_doubles("simulate.beta");
    const std::size_t extra = spec.tier == ModelTier::SpatioTemporal ? 2 : 1;
    if (beta.size() < extra) throw ConfigError("simulate.beta is too short for the tier", "simulate.beta");
    const std::size_t p = beta.size() - extra;
    std::optional<std::size_t> periods;
    if (cfg.has("simulate.periods")) periods = cfg.get_count("simulate.periods", 1);
    const double emin = cfg.get_double("simulate.expected_min", 50.0);
    const double emax = cfg.get_double("simulate.expected_max", 200.0);
    if (!(emin > 0.0) || !(emax >= emin)) throw ConfigError("expected range must be positive and ordered", "simulate.expected_min");

    const auto n = static_cast<Eigen::Index>(gi.graph.size());
    Rng cov_rng(substream_seed(seed, 101));
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(cov_rng);
    }
    Rng e_rng(substream_seed(seed, 102));
    Eigen::VectorXd expected(n);
    for (Eigen::Index i = 0; i < n; ++i) expected[i] = emin + (emax - emin) * uniform01(e_rng);

    Params truth;
    truth.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    truth.tau_phi = cfg.get_double("simulate.tau_phi", 2.0);
    truth.tau_theta = cfg.get_double("simulate.tau_theta", 4.0);
    SimulationOptions opts;
    opts.periods = periods;
    opts.seed = substream_seed(seed, 103);
    const auto sim = simulate_dataset(spec, truth, gi.graph, expected, x, opts);

    const fs::path dir(inv.out_dir);
    prepare_output(dir, inv.force);
    io::save_dataset((dir / "dataset.csv").string(), sim.data);
    if (gi.document) io::write_text(dir / "graph.geojson", gi.document->dump(1) + "\n");
    io::write_text(dir / "edges.csv", io::edge_csv(gi.graph));

    json t = {{"tier", to_string(spec.tier)},
              {"beta", beta},
              {"tau_phi", truth.tau_phi},
              {"tau_theta", truth.tau_theta},
              {"phi", std::vector<double>(sim.truth.phi.data(), sim.truth.phi.data() + sim.truth.phi.size())},
              {"theta", std::vector<double>(sim.truth.theta.data(), sim.truth.theta.data() + sim.truth.theta.size())}};
    io::write_text(dir / "truth.json", t.dump(1) + "\n");

    std::string fit_cfg = "# generated by bdm simulate\n";
    fit_cfg += "tier = " + to_string(spec.tier) + "\n";
    fit_cfg += "seed = " + std::to_string(seed) + "\n";
    fit_cfg += "data.path = dataset.csv\n";
    fit_cfg += gi.document ? "graph.geojson = graph.geojson\n" : "graph.edges = edges.csv\n";
    if (lattice) fit_cfg += "graph.rule = rook\n";
    else if (cfg.has("graph.rule")) fit_cfg += "graph.rule = " + cfg.get("graph.rule") + "\n";
    io::write_text(dir / "fit.cfg", fit_cfg);

    json manifest = {{"kind", "simulation"}, {"version", io::archive_version}, {"seed", seed},
                     {"regions", gi.graph.size()}, {"observations", sim.data.size()}, {"complete", true}};
    io::write_text(io::manifest_path(dir), manifest.dump(2) + "\n");
    out << "simulated " << sim.data.size() << " observations over " << gi.graph.size() << " regions into "
        << dir.string() << "\n";
    (void)err;
    return exit_ok;
}

inline int cmd_fit(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const auto cfg = load_config(inv);
    const auto spec = model_spec_from(cfg);
    const auto mcmc = mcmc_config_from(cfg);
    const auto gi = load_graph(cfg);
    if (has_random_effects(spec.tier) && !gi.present) {
        throw ConfigError("tier '" + to_string(spec.tier) + "' needs graph.geojson or graph.edges", "graph.geojson");
    }
    const auto data = load_dataset_from(cfg, gi);
    validate(spec, beta_size(spec.tier, data.n_covariates()));

    const fs::path dir(inv.out_dir);
    prepare_output(dir, inv.force);

    io::RunArchive archive;
    archive.spec = spec;
    archive.config = mcmc;
    archive.graph_fingerprint = gi.present ? gi.graph.fingerprint() : "none";
    if (gi.present && has_random_effects(spec.tier)) warn_isolated(gi.graph, archive.warnings, err);

    const auto chains = run_chains(spec, data, gi.graph, mcmc);

    std::vector<std::string> nodes;
    if (cfg.has("summary.nodes")) nodes = io::split_list(cfg.get("summary.nodes"));
    archive.summary = summarize(chains, nodes);
    const auto monitored = monitored_nodes(spec.tier, data.n_covariates());
    if (chains.kept_per_chain() >= 20) {
        archive.rhat = rhat_table(chains, monitored);
    } else {
        archive.warnings.push_back("too few draws per chain for R-hat");
    }
    archive.dic = dic(chains, spec, data, gi.graph);

    std::vector<std::string> unconverged;
    for (const auto& e : archive.rhat) {
        if (!(e.rhat < 1.1)) unconverged.push_back(e.node);
    }
    archive.converged = unconverged.empty();
    if (!archive.converged) {
        const auto msg = "convergence: R-hat >= 1.1 for " + io::join_list(unconverged, ' ');
        archive.warnings.push_back(msg);
        err << "warning: " << msg << "\n";
    }

    fs::create_directories(dir / "traces");
    auto traced = monitored;
    traced.push_back("deviance");
    for (const auto& node : traced) {
        const auto file = "traces/" + io::trace_file_name(node);
        io::write_text(dir / file, io::trace_csv(chains, node));
        archive.trace_files.push_back(file);
    }
    io::write_text(dir / "summary.txt", io::render_table_text(archive.summary));
    io::write_text(dir / "summary.csv", io::render_table_csv(archive.summary));
    io::write_text(dir / "dic.txt", io::dic_text(archive.dic));
    io::write_text(dir / "rhat.csv", io::rhat_csv(archive.rhat));

    const auto rr = posterior_relative_risk(chains, spec, data);
    const auto sir = region_sir(data);
    std::string rr_csv = "region_id,relative_risk,sir\n";
    for (std::size_t i = 0; i < data.n_regions(); ++i) {
        rr_csv += io::csv_escape(data.region_ids[i]) + "," + io::format_exact(rr[static_cast<Eigen::Index>(i)]) + "," +
                  io::format_exact(sir[static_cast<Eigen::Index>(i)]) + "\n";
    }
    io::write_text(dir / "relative_risk.csv", rr_csv);
    io::write_text(dir / "config.snapshot", cfg.to_text());

    archive.complete = true;
    io::save_archive(dir, archive);

    out << io::render_table_text(archive.summary) << io::dic_text(archive.dic);
    return exit_ok;
}

inline int cmd_diagnose(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const fs::path dir(inv.out_dir);
    if (dir.empty()) throw ConfigError("--out must name the archive to diagnose", "--out");
    const auto archive = io::load_archive(dir);
    if (!archive.complete) throw DataError("archive '" + dir.string() + "' is not complete");

    std::vector<RhatEntry> rhat;
    for (const auto& file : archive.trace_files) {
        const auto node_file = fs::path(file).stem().string();
        if (node_file == "deviance") continue;
        const auto draws = io::read_trace(dir / file);
        std::string node = node_file;
        for (const auto& row : archive.summary) {
            if (io::trace_file_name(row.node) == fs::path(file).filename().string()) node = row.node;
        }
        rhat.push_back(RhatEntry{node, gelman_rubin(draws)});
    }
    io::write_text(dir / "rhat.csv", io::rhat_csv(rhat));
    io::write_text(dir / "dic.txt", io::dic_text(archive.dic));

    std::string report = "node  rhat\n";
    bool ok = true;
    for (const auto& e : rhat) {
        report += e.node + "  " + io::format_number(e.rhat) + "\n";
        if (!(e.rhat < 1.1)) ok = false;
    }
    io::write_text(dir / "rhat.txt", report);
    out << report << io::dic_text(archive.dic);
    out << (ok ? "converged: all R-hat < 1.1\n" : "not converged: some R-hat >= 1.1\n");
    if (!ok) err << "warning: convergence: R-hat >= 1.1\n";
    return exit_ok;
}

inline io::ClassBreaks parse_breaks(const std::string& text) {
    const auto colon = text.find(':');
    const auto kind = text.substr(0, colon);
    const auto rest = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
    try {
        if (kind == "quantile") {
            const auto k = rest.empty() ? 5 : io::parse_integer(rest, "class count");
            if (k < 1) throw ConfigError("quantile class count must be positive", "export.breaks");
            return io::ClassBreaks::quantile(static_cast<std::size_t>(k));
        }
        if (kind == "manual") {
            std::vector<double> bounds;
            for (const auto& b : io::split_list(rest)) bounds.push_back(io::parse_double(b, "break"));
            if (bounds.size() < 2) throw ConfigError("manual breaks need at least two bounds", "export.breaks");
            return io::ClassBreaks::manual(std::move(bounds));
        }
    } catch (const DataError& e) {
        throw ConfigError(e.what(), "export.breaks");
    }
    throw ConfigError("export.breaks must be quantile:<k> or manual:<b0>,<b1>,...", "export.breaks");
}

inline int cmd_export_map(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const auto cfg = load_config(inv);
    if (!cfg.has("graph.geojson")) throw ConfigError("export-map needs graph.geojson for geometry", "graph.geojson");
    const auto gi = load_graph(cfg);
    const auto breaks = parse_breaks(cfg.get("export.breaks", "quantile:5"));
    const auto which = cfg.get("export.values", "sir");

    Eigen::VectorXd values(static_cast<Eigen::Index>(gi.graph.size()));
    if (which == "sir") {
        const auto data = load_dataset_from(cfg, gi);
        values = region_sir(data);
    } else if (which == "relative_risk") {
        const auto archive = cfg.get_path("export.archive");
        if (!archive) throw ConfigError("export.values = relative_risk needs export.archive", "export.archive");
        const auto table = io::read_csv((fs::path(*archive) / "relative_risk.csv").string());
        if (table.rows.size() != gi.graph.size()) throw DataError("relative_risk.csv does not match the graph");
        for (const auto& row : table.rows) {
            const auto idx = gi.graph.find(row[0]);
            if (!idx) throw DataError("relative_risk.csv region '" + row[0] + "' is not in the graph");
            values[static_cast<Eigen::Index>(*idx)] = io::parse_double(row[1], "relative_risk");
        }
    } else {
        throw ConfigError("export.values must be sir or relative_risk", "export.values");
    }
    const auto doc = io::export_choropleth(*gi.document, gi.graph, values, breaks, cfg.get("export.units"));
    const fs::path dir(inv.out_dir);
    if (dir.empty()) throw ConfigError("--out is required", "--out");
    fs::create_directories(dir);
    const auto file = dir / cfg.get("export.output", "choropleth.geojson");
    io::write_text(file, doc.dump(1) + "\n");
    out << "wrote " << file.string() << " (" << doc["classes"].size() << " classes)\n";
    (void)err;
    return exit_ok;
}

inline std::string one_line(std::string s) {
    for (auto& ch : s) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    return s;
}

/// Runs one command, translating errors into exit codes and a one-line message.
inline int run_cli(const CliInvocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (inv.command) {
            case Command::simulate: return cmd_simulate(inv, out, err);
            case Command::fit: return cmd_fit(inv, out, err);
            case Command::diagnose: return cmd_diagnose(inv, out, err);
            case Command::export_map: return cmd_export_map(inv, out, err);
        }
    } catch (const ConfigError& e) {
        err << "error code=" << exit_usage << " kind=config";
        if (!e.key().empty()) err << " key=" << e.key();
        err << " message=" << one_line(e.what()) << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error code=" << exit_runtime << " kind=runtime message=" << one_line(e.what()) << "\n";
        return exit_runtime;
    }
    return exit_runtime;
}

}  // namespace bdm::cli
