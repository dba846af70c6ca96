#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bdm/diagnostics.hpp"
#include "bdm/rng.hpp"
#include "fixtures.hpp"

using namespace bdm;

namespace {

std::vector<double> normals(std::uint64_t seed, std::size_t n, double mean = 0.0, double sd = 1.0) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = mean + sd * standard_normal(rng);
    return out;
}

ChainSet glm_chainset(std::vector<std::vector<double>> alpha0, std::size_t burn_in = 0) {
    ChainSet c;
    c.tier = ModelTier::NonSpatialGLM;
    c.config.n_chains = alpha0.size();
    c.config.n_iterations = alpha0.front().size();
    c.config.burn_in = burn_in;
    c.config.adapt_window = 0;
    for (const auto& chain : alpha0) {
        std::vector<Params> draws;
        std::vector<double> dev;
        for (const double v : chain) {
            Params p;
            p.beta = Eigen::VectorXd::Constant(1, v);
            draws.push_back(p);
            dev.push_back(2.0 * v);
        }
        c.draws.push_back(draws);
        c.deviance.push_back(dev);
    }
    return c;
}

}  // namespace

TEST(Quantiles, TypeSevenHandValues) {
    const std::vector<double> x{1, 2, 3};
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.025), 1.05);
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.975), 2.95);
    const auto row = summarize_series("x", {{3, 1, 2}}, 1, 3);
    EXPECT_EQ(row.mean, 2.0);
    EXPECT_EQ(row.median, 2.0);
    EXPECT_DOUBLE_EQ(row.q2_5, 1.05);
    EXPECT_DOUBLE_EQ(row.q97_5, 2.95);
}

TEST(Summary, ConstantDraws) {
    const auto row = summarize_series("c", {std::vector<double>(200, 4.25)}, 1, 200);
    EXPECT_EQ(row.mean, 4.25);
    EXPECT_EQ(row.median, 4.25);
    EXPECT_EQ(row.q2_5, 4.25);
    EXPECT_EQ(row.q97_5, 4.25);
    EXPECT_EQ(row.sd, 0.0);
    EXPECT_EQ(row.mc_error, 0.0);
}

TEST(Summary, OrderingInvariants) {
    const auto a = normals(1, 500);
    const auto b = normals(2, 500, 1.0);
    const auto c = normals(3, 500, -0.5, 2.0);
    const auto s1 = summarize_series("n", {a, b, c}, 1, 1500);
    const auto s2 = summarize_series("n", {c, a, b}, 1, 1500);
    EXPECT_EQ(s1, s2);
    EXPECT_LE(s1.q2_5, s1.median);
    EXPECT_LE(s1.median, s1.q97_5);
    EXPECT_GE(s1.sd, 0.0);
    EXPECT_GE(s1.mc_error, 0.0);
}

TEST(Summary, StartAndSampleConvention) {
    auto chains = glm_chainset({normals(1, 20000)});
    auto rows = summarize(chains);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].node, "alpha0");
    EXPECT_EQ(rows[0].start, 1u);
    EXPECT_EQ(rows[0].sample, 20000u);
    chains = glm_chainset({normals(1, 300), normals(2, 300)}, 4000);
    rows = summarize(chains);
    EXPECT_EQ(rows[0].start, 4001u);
    EXPECT_EQ(rows[0].sample, 600u);
    EXPECT_THROW(summarize(chains, {"alpha7"}), Error);
    EXPECT_THROW(summarize(chains, {"phi[1]"}), Error);
}

TEST(McError, ConstantIsZero) {
    const std::vector<double> x(1000, 3.7);
    EXPECT_EQ(mc_error(x), 0.0);
}

TEST(McError, IidStandardNormal) {
    const auto x = normals(2024, 10000);
    EXPECT_NEAR(mc_error(x), 0.01, 0.0025);
}

TEST(McError, Ar1ExceedsNaiveError) {
    Rng rng(99);
    std::vector<double> x(20000);
    double v = 0.0;
    for (auto& s : x) {
        v = 0.9 * v + std::sqrt(1 - 0.81) * standard_normal(rng);
        s = v;
    }
    const double naive = std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
    EXPECT_GT(mc_error(x), naive);
}

TEST(McError, ShrinksWithLength) {
    const auto x = normals(5, 100000);
    const std::span<const double> all(x);
    const double e3 = mc_error(all.first(1000));
    const double e4 = mc_error(all.first(10000));
    const double e5 = mc_error(all);
    EXPECT_GT(e3, e4);
    EXPECT_GT(e4, e5);
}

TEST(McError, TooShortRejected) {
    const std::vector<double> x(99, 1.0);
    EXPECT_THROW(mc_error(x), Error);
}

TEST(GelmanRubin, SameDistribution) {
    const std::vector<std::vector<double>> c{normals(1, 5000), normals(2, 5000)};
    EXPECT_LT(gelman_rubin(c), 1.05);
}

TEST(GelmanRubin, SeparatedChains) {
    const std::vector<std::vector<double>> c{normals(1, 5000, 0.0), normals(2, 5000, 10.0)};
    EXPECT_GT(gelman_rubin(c), 3.0);
}

TEST(GelmanRubin, ConstantChainsGiveOne) {
    const std::vector<std::vector<double>> c{std::vector<double>(100, 2.0), std::vector<double>(100, 2.0)};
    EXPECT_EQ(gelman_rubin(c), 1.0);
}

TEST(GelmanRubin, FormulaOnHandFixture) {
    // One chain of 20 split into halves 0..9 and 10..19.
    std::vector<double> x(20);
    for (int k = 0; k < 20; ++k) x[k] = k;
    const double w = 110.0 / 12.0;  // variance of 0..9 with n-1 denominator
    const double b_over_n = 50.0;   // variance of the half means 4.5 and 14.5
    const double expected = std::sqrt((0.9 * w + b_over_n) / w);
    const std::vector<std::vector<double>> c{x};
    EXPECT_NEAR(gelman_rubin(c), expected, 1e-12);
}

TEST(GelmanRubin, SingleShortChainRejected) {
    const std::vector<std::vector<double>> c{std::vector<double>(19, 0.0)};
    EXPECT_THROW(gelman_rubin(c), Error);
}

TEST(GelmanRubin, AffineInvariance) {
    const std::vector<std::vector<double>> c{normals(3, 400), normals(4, 400, 0.3)};
    auto d = c;
    for (auto& chain : d) {
        for (auto& v : chain) v = -2.5 * v + 7.0;
    }
    EXPECT_NEAR(gelman_rubin(c), gelman_rubin(d), 1e-12);
}

TEST(Dic, Arithmetic) {
    const std::vector<double> dev{10, 12};
    const auto r = dic_from(dev, 10.5);
    EXPECT_EQ(r.d_bar, 11.0);
    EXPECT_EQ(r.p_d, 0.5);
    EXPECT_EQ(r.dic, 11.5);
    const std::vector<double> flat(7, 42.0);
    const auto f = dic_from(flat, 42.0);
    EXPECT_EQ(f.p_d, 0.0);
    EXPECT_EQ(f.dic, 42.0);
    EXPECT_THROW(dic_from(dev, NAN), Error);
}

TEST(Dic, IdentityHoldsExactly) {
    Rng rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> dev(37);
        for (auto& v : dev) v = 100.0 + 13.0 * standard_normal(rng);
        const auto r = dic_from(dev, 95.0 + 10.0 * uniform01(rng));
        EXPECT_EQ(r.dic, r.d_bar + r.p_d);
        EXPECT_EQ(r.dic - r.d_bar, r.p_d);
    }
}

TEST(Dic, FromChainsUsesPosteriorMean) {
    // GLM on one region: Dhat is the deviance at the mean intercept.
    const auto d = fixtures::dataset({4}, {2.0});
    ModelSpec spec;
    spec.tier = ModelTier::NonSpatialGLM;
    auto chains = glm_chainset({{0.5, 0.7, 0.9}});
    for (std::size_t m = 0; m < 3; ++m) {
        chains.deviance[0][m] =
            -2.0 * poisson_log_likelihood(d, Eigen::VectorXd::Constant(1, chains.draws[0][m].beta[0]));
    }
    const auto r = dic(chains, spec, d, AdjacencyGraph{});
    EXPECT_NEAR(r.d_hat, -2.0 * poisson_log_likelihood(d, Eigen::VectorXd::Constant(1, 0.7)), 1e-12);
}

TEST(Nodes, LabelsPerTier) {
    EXPECT_EQ(monitored_nodes(ModelTier::NonSpatialGLM, 2), (std::vector<std::string>{"alpha0", "alpha1[1]", "alpha1[2]"}));
    EXPECT_EQ(monitored_nodes(ModelTier::SpatioTemporal, 1),
              (std::vector<std::string>{"alpha0", "alpha1[1]", "alpha3", "sigma", "tau"}));
}
