#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bdm/io/archive.hpp"
#include "bdm/io/choropleth.hpp"
#include "bdm/io/config.hpp"
#include "bdm/io/dataset_io.hpp"
#include "bdm/io/format.hpp"
#include "bdm/io/graph_io.hpp"
#include "bdm/io/table.hpp"
#include "bdm/simulate.hpp"

using namespace bdm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bdm_data_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::size_t> classes_of(const std::vector<double>& v, const io::ClassBreaks& b) {
    return io::classify(v, b).class_of;
}

}  // namespace

TEST(Format, PaperStyleNumbers) {
    EXPECT_EQ(io::format_number(0.005517), "0.005517");
    EXPECT_EQ(io::format_number(6.916e-4), "6.916e-04");
    EXPECT_EQ(io::format_number(-2.5e-5), "-2.5e-05");
    EXPECT_EQ(io::format_number(0.00638), "0.00638");
    EXPECT_EQ(io::format_number(1.0), "1");
    EXPECT_EQ(io::format_number(20000), "20000");
    EXPECT_EQ(io::format_number(0.0), "0");
    EXPECT_EQ(io::format_number(10.2), "10.2");
    EXPECT_EQ(io::format_number(141), "141");
}

TEST(Format, ExactRoundTrip) {
    Rng rng(4);
    for (int k = 0; k < 1000; ++k) {
        const double x = std::ldexp(standard_normal(rng), static_cast<int>(rng() % 80) - 40);
        EXPECT_EQ(io::parse_double(io::format_exact(x), "x"), x);
    }
    EXPECT_THROW(io::parse_double("1.5x", "x"), DataError);
    EXPECT_THROW(io::parse_integer("2.0", "n"), DataError);
}

TEST(Csv, QuotedFields) {
    const auto cells = io::split_csv_line(R"(a,"b,c","say ""hi""",)");
    EXPECT_EQ(cells, (std::vector<std::string>{"a", "b,c", "say \"hi\"", ""}));
    EXPECT_EQ(io::split_csv_line(io::csv_line({"x,y", "q\""}).substr(0, io::csv_line({"x,y", "q\""}).size() - 1)),
              (std::vector<std::string>{"x,y", "q\""}));
    EXPECT_THROW(io::split_csv_line("\"open"), DataError);
}

TEST(LoadDataset, CountEqualsExpectedGivesUnitSir) {
    const auto t = io::parse_csv_text("region_id,count,expected\nb,4,4\na,2,2\nc,7,7\n");
    const auto d = io::load_dataset(t, io::ColumnMapping{});
    EXPECT_EQ(region_sir(d), Eigen::VectorXd::Ones(3));
}

TEST(LoadDataset, RowsFollowGraphOrder) {
    const std::vector<Edge> e{{0, 1}, {1, 2}};
    const auto g = build_graph_from_edges(3, e, {{"x", "x", {}}, {"y", "y", {}}, {"z", "z", {}}});
    io::ColumnMapping m;
    m.region = "county";
    m.count = "cases";
    m.expected = "E";
    m.covariates = {"income"};
    m.period = "year";
    const auto t = io::parse_csv_text(
        "year,county,cases,E,income\n2,z,5,4.5,1\n1,z,3,4,2\n1,x,1,1.5,3\n2,x,2,1.5,4\n1,y,0,2,5\n2,y,1,2,6\n");
    const auto d = io::load_dataset(t, m, &g);
    EXPECT_EQ(d.region_ids, (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_EQ(d.region, (std::vector<std::size_t>{0, 0, 1, 1, 2, 2}));
    EXPECT_EQ(d.period, (std::vector<int>{1, 2, 1, 2, 1, 2}));
    EXPECT_EQ(d.counts, (std::vector<std::int64_t>{1, 2, 0, 1, 3, 5}));
    EXPECT_EQ(d.covariates(4, 0), 2.0);
    EXPECT_EQ(d.period_center, 1.5);
}

TEST(LoadDataset, UnknownRegionsListed) {
    const std::vector<Edge> e{{0, 1}};
    const auto g = build_graph_from_edges(2, e);
    const auto t = io::parse_csv_text("region_id,count,expected\n0,1,1\nghost,1,1\n1,1,1\nspook,2,2\n");
    try {
        io::load_dataset(t, io::ColumnMapping{}, &g);
        FAIL();
    } catch (const DataError& err) {
        const std::string what = err.what();
        EXPECT_NE(what.find("ghost"), std::string::npos);
        EXPECT_NE(what.find("spook"), std::string::npos);
    }
}

TEST(LoadDataset, RejectsBadCells) {
    const io::ColumnMapping plain;
    EXPECT_THROW(io::load_dataset(io::parse_csv_text("region_id,count,expected\na,1,0\n"), plain), DataError);
    EXPECT_THROW(io::load_dataset(io::parse_csv_text("region_id,count,expected\na,1,-2\n"), plain), DataError);
    EXPECT_THROW(io::load_dataset(io::parse_csv_text("region_id,count,expected\na,1.5,2\n"), plain), DataError);
    io::ColumnMapping cov;
    cov.covariates = {"x"};
    EXPECT_THROW(io::load_dataset(io::parse_csv_text("region_id,count,expected,x\na,1,1,\n"), cov), DataError);
    EXPECT_THROW(io::load_dataset(io::parse_csv_text("region_id,count\na,1\n"), plain), DataError);
}

TEST(LoadDataset, SaveLoadRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto g = rook_lattice(3, 4);
    ModelSpec spec;
    for (const auto tier : {ModelTier::SpatialBYM, ModelTier::SpatioTemporal}) {
        spec.tier = tier;
        Params truth;
        truth.beta = tier == ModelTier::SpatioTemporal ? Eigen::VectorXd(Eigen::Vector3d(0.1, -0.4, 0.02))
                                                        : Eigen::VectorXd(Eigen::Vector2d(0.1, -0.4));
        SimulationOptions o;
        o.seed = 17;
        if (tier == ModelTier::SpatioTemporal) o.periods = 3;
        const auto sim = simulate_dataset(spec, truth, g, Eigen::VectorXd::LinSpaced(12, 3.3, 91.7),
                                          Eigen::MatrixXd::Random(12, 1) * 1e-3, o);
        const auto path = (dir / "d.csv").string();
        io::save_dataset(path, sim.data);
        const auto m = io::read_mapping(io::mapping_path_for(path));
        EXPECT_TRUE(io::load_dataset(path, m, &g) == sim.data);
        EXPECT_TRUE(io::load_dataset(path, m) == sim.data);
    }
}

TEST(Table, HeaderIsVerbatim) {
    io::RunArchive a;
    const std::vector<PosteriorSummaryRow> rows{{"alpha0", 0.1, 0.01, 1e-4, 0.08, 0.1, 0.12, 1, 20000}};
    const auto text = io::render_table_text(rows);
    const auto header = text.substr(0, text.find('\n'));
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < header.size()) {
        const auto b = header.find_first_not_of(' ', pos);
        if (b == std::string::npos) break;
        auto e = header.find("  ", b);
        if (e == std::string::npos) e = header.size();
        words.push_back(header.substr(b, e - b));
        pos = e;
    }
    EXPECT_EQ(words, (std::vector<std::string>{"Node", "Mean", "SD", "MC Error", "2.5%", "Median", "97.5%", "Start",
                                               "Sample"}));
    const auto csv = io::render_table_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "Node,Mean,SD,MC Error,2.5%,Median,97.5%,Start,Sample");
}

TEST(Table, PaperRowLayout) {
    // Layout fixture: the values are placeholders, only the formatting is checked.
    const std::vector<PosteriorSummaryRow> rows{
        {"alpha1[1]", 0.005517, 6.916e-4, 7.5e-6, 0.004642, 0.005518, 0.00638, 1, 20000}};
    const auto text = io::render_table_text(rows);
    const auto line = text.substr(text.find('\n') + 1);
    std::vector<std::string> tokens;
    std::string tok;
    for (const char ch : line) {
        if (ch == ' ' || ch == '\n') {
            if (!tok.empty()) tokens.push_back(tok);
            tok.clear();
        } else {
            tok.push_back(ch);
        }
    }
    EXPECT_EQ(tokens, (std::vector<std::string>{"alpha1[1]", "0.005517", "6.916e-04", "7.5e-06", "0.004642",
                                                "0.005518", "0.00638", "1", "20000"}));
}

TEST(Table, ConstantNodeRow) {
    const auto row = summarize_series("c", {std::vector<double>(100, 2.0)}, 1, 100);
    const auto text = io::render_table_text({row});
    std::istringstream lines(text.substr(text.find('\n') + 1));
    std::vector<std::string> tokens;
    for (std::string t; lines >> t;) tokens.push_back(t);
    EXPECT_EQ(tokens, (std::vector<std::string>{"c", "2", "0", "0", "2", "2", "2", "1", "100"}));
}

TEST(Table, CsvRoundTrip) {
    Rng rng(3);
    std::vector<PosteriorSummaryRow> rows;
    for (int k = 0; k < 20; ++k) {
        rows.push_back({"n" + std::to_string(k), standard_normal(rng), uniform01(rng), 1e-5 * uniform01(rng),
                        standard_normal(rng), standard_normal(rng), standard_normal(rng), 4001, 40000});
    }
    rows.push_back({"alpha1[2]", 1e-300, 0, 0, -0.0, 5e-324, 1e300, 1, 1});
    EXPECT_EQ(io::parse_table_csv(io::render_table_csv(rows)), rows);
    EXPECT_THROW(io::render_table_text({}), Error);
}

TEST(Choropleth, PaperManualBreakLabels) {
    const auto g = rook_lattice(2, 3);
    const auto doc = io::lattice_geojson(2, 3);
    Eigen::VectorXd v(6);
    v << 1, 5.5, 10.2, 20, 37.9, 141;
    const auto out = io::export_choropleth(doc, g, v, io::ClassBreaks::manual({1, 10.2, 37.8, 141}), "per 1,000");
    EXPECT_EQ(out["classes"], nlohmann::json({"1-10.2", "10.2-37.8", "37.8-141"}));
    EXPECT_EQ(out["features"][0]["properties"]["class_label"], "1-10.2");
    EXPECT_EQ(out["features"][2]["properties"]["class_label"], "1-10.2");
    EXPECT_EQ(out["features"][3]["properties"]["class"], 1);
    EXPECT_EQ(out["features"][5]["properties"]["class_label"], "37.8-141");
    EXPECT_EQ(out["features"][5]["properties"]["units"], "per 1,000");
    EXPECT_EQ(out["features"][5]["properties"]["region_id"], "r1c2");
    EXPECT_EQ(out["features"][5]["geometry"], doc["features"][5]["geometry"]);
    v[0] = 0.5;
    EXPECT_THROW(io::export_choropleth(doc, g, v, io::ClassBreaks::manual({1, 10.2, 37.8, 141})), DataError);
}

TEST(Choropleth, QuantileClasses) {
    EXPECT_EQ(classes_of(std::vector<double>(7, 3.0), io::ClassBreaks::quantile(4)), std::vector<std::size_t>(7, 0));
    EXPECT_EQ(io::classify(std::vector<double>(7, 3.0), io::ClassBreaks::quantile(4)).labels,
              std::vector<std::string>{"3-3"});
    std::vector<double> v{7, 3, 10, 1, 9, 2, 5, 4, 8, 6};
    const auto c = io::classify(v, io::ClassBreaks::quantile(5));
    std::vector<std::size_t> sizes(5, 0);
    for (const auto k : c.class_of) ++sizes[k];
    EXPECT_EQ(sizes, std::vector<std::size_t>(5, 2));
    EXPECT_EQ(c.labels.front(), "1-2");
    EXPECT_EQ(c.labels.back(), "9-10");
}

TEST(Choropleth, ClassesAreMonotone) {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(1 + rng() % 60);
        for (auto& x : v) x = std::round(10.0 * standard_normal(rng)) / 2.0;  // ties included
        const auto k = 1 + rng() % 7;
        const auto cls = classes_of(v, io::ClassBreaks::quantile(k));
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[i] <= v[j]) {
                    EXPECT_LE(cls[i], cls[j]);
                }
            }
        }
        // Roughly n/k regions per class when there are no ties.
        std::vector<double> u(v.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i) * 1.5;
        const auto cu = io::classify(u, io::ClassBreaks::quantile(k));
        std::vector<std::size_t> sizes(cu.labels.size(), 0);
        for (const auto c : cu.class_of) ++sizes[c];
        const double target = static_cast<double>(u.size()) / static_cast<double>(k);
        for (const auto s : sizes) EXPECT_LE(std::abs(static_cast<double>(s) - target), 1.0);
    }
}

TEST(Choropleth, MissingGeometryRejected) {
    const auto g = rook_lattice(2, 2);
    auto doc = io::lattice_geojson(2, 2);
    doc["features"].erase(3);
    try {
        io::export_choropleth(doc, g, Eigen::VectorXd::Ones(4), io::ClassBreaks::quantile(2));
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("r1c1"), std::string::npos);
    }
}

TEST(Config, UnknownKeyNamed) {
    try {
        io::RunConfig::parse("tier = bym\nmcmc.chain = 3\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "mcmc.chain");
    }
    auto cfg = io::RunConfig::parse("# comment\nmcmc.chains = 3  # trailing\ndata.path = d.csv\n", "/base");
    EXPECT_EQ(cfg.get_count("mcmc.chains", 2), 3u);
    EXPECT_EQ(*cfg.get_path("data.path"), "/base/d.csv");
    cfg.apply_override("mcmc.chains=4");
    EXPECT_EQ(cfg.get_int("mcmc.chains", 0), 4);
    EXPECT_THROW(cfg.apply_override("nonsense=1"), ConfigError);
    cfg.set("mcmc.parallel", "maybe");
    EXPECT_THROW(cfg.get_bool("mcmc.parallel", true), ConfigError);
    cfg.set("mcmc.burn_in", "-1");
    EXPECT_THROW(cfg.get_count("mcmc.burn_in", 0), ConfigError);
}

TEST(GraphIo, EdgeCsvRoundTrip) {
    const auto dir = scratch("edges");
    const std::vector<Edge> e{{0, 1, 2.5}, {1, 3, 1.0}, {2, 3, 0.25}};
    const auto g = build_graph_from_edges(4, e);
    write(dir / "e.csv", io::edge_csv(g));
    const auto h = io::read_edge_csv((dir / "e.csv").string());
    EXPECT_EQ(h.fingerprint(), g.fingerprint());
    EXPECT_EQ(h.weight(3, 2), 0.25);
    write(dir / "bad.csv", "a,b\n0,1\n");
    EXPECT_THROW(io::read_edge_csv((dir / "bad.csv").string()), DataError);
}

TEST(GraphIo, IdFallsBackToName) {
    auto doc = io::lattice_geojson(1, 2);
    doc["features"][0]["properties"].erase("id");
    doc["features"][0]["properties"]["name"] = "West";
    const auto c = io::parse_polygon_collection(doc);
    EXPECT_EQ(c.features[0].id, "West");
    EXPECT_EQ(io::parse_polygon_collection(doc, "name").features[1].id, "r0c1");
}

TEST(Archive, RoundTrip) {
    const auto dir = scratch("archive");
    io::RunArchive a;
    a.spec.tier = ModelTier::SpatioTemporal;
    a.spec.prior_beta_precision = {1e-5, 0.1};
    a.spec.dispersion = 0.3;
    a.config.seed = 0xFFFFFFFFFFFFFFFFULL;
    a.config.n_chains = 3;
    a.graph_fingerprint = "0123456789abcdef";
    a.summary = {{"alpha0", 0.1, 0.2, 1e-4, -0.3, 0.1, 0.5, 4001, 40000},
                 {"tau", 1.0 / 3.0, 0.7, 0.0, 0.01, 0.3, 2.2, 4001, 40000}};
    a.dic = {123.456, 120.0, 3.456, 126.912};
    a.rhat = {{"alpha0", 1.0012}, {"tau", HUGE_VAL}};
    a.trace_files = {"traces/alpha0.csv"};
    a.warnings = {"isolated region 'x'"};
    a.converged = false;
    a.complete = true;
    io::save_archive(dir, a);
    EXPECT_EQ(io::load_archive(dir), a);
    EXPECT_TRUE(io::archive_complete(dir));
    EXPECT_FALSE(io::archive_complete(dir / "nowhere"));
}

TEST(Archive, TraceFilesReadBack) {
    const auto dir = scratch("trace");
    ChainSet c;
    c.tier = ModelTier::NonSpatialGLM;
    c.config.burn_in = 10;
    c.config.thin = 2;
    for (int chain = 0; chain < 2; ++chain) {
        c.draws.emplace_back();
        c.deviance.emplace_back();
        for (int m = 0; m < 4; ++m) {
            Params p;
            p.beta = Eigen::VectorXd::Constant(1, chain + 0.1 * m);
            c.draws.back().push_back(p);
            c.deviance.back().push_back(1.0);
        }
    }
    const auto text = io::trace_csv(c, "alpha0");
    EXPECT_EQ(text.substr(0, text.find('\n', 22) + 1), "chain,iteration,value\n1,12,0\n");
    write(dir / "a.csv", text);
    const auto back = io::read_trace(dir / "a.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1][3], 1.3);
    EXPECT_EQ(io::trace_file_name("alpha1[2]"), "alpha1_2.csv");
}
