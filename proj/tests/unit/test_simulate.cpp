#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bdm/simulate.hpp"
#include "fixtures.hpp"

using namespace bdm;

namespace {

Params truth_of(std::vector<double> beta, double tau_phi = 2.0, double tau_theta = 4.0) {
    Params t;
    t.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    t.tau_phi = tau_phi;
    t.tau_theta = tau_theta;
    return t;
}

ModelSpec spec_of(ModelTier t) {
    ModelSpec s;
    s.tier = t;
    return s;
}

}  // namespace

TEST(Simulate, SameSeedSameDataset) {
    const auto g = rook_lattice(4, 4);
    const Eigen::VectorXd e = Eigen::VectorXd::Constant(16, 50.0);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(16, 2);
    SimulationOptions o;
    o.seed = 42;
    const auto spec = spec_of(ModelTier::SpatialBYM);
    const auto a = simulate_dataset(spec, truth_of({0.1, 0.3, -0.2}), g, e, x, o);
    const auto b = simulate_dataset(spec, truth_of({0.1, 0.3, -0.2}), g, e, x, o);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(a.truth, b.truth);
    o.seed = 43;
    const auto c = simulate_dataset(spec, truth_of({0.1, 0.3, -0.2}), g, e, x, o);
    EXPECT_NE(a.data.counts, c.data.counts);
}

TEST(Simulate, NullModelSirNearOne) {
    // y_i ~ Poisson(1000): mean SIR has sd sqrt(1/1000 n)/n.
    const auto g = rook_lattice(6, 6);
    const std::size_t n = 36;
    SimulationOptions o;
    o.suppress_random_effects = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        o.seed = seed;
        const auto sim = simulate_dataset(spec_of(ModelTier::SpatialBYM), truth_of({0.0}), g,
                                          Eigen::VectorXd::Constant(36, 1000.0), Eigen::MatrixXd(36, 0), o);
        const double bound = 3.0 * std::sqrt(1.0 / 1000.0 * n) / n;
        EXPECT_LT(std::abs(compute_sir(sim.data).mean() - 1.0), bound) << seed;
        EXPECT_EQ(sim.truth.phi, Eigen::VectorXd::Zero(36));
    }
}

TEST(Simulate, HugePrecisionVanishingEffects) {
    const auto g = rook_lattice(5, 5);
    SimulationOptions o;
    o.seed = 9;
    const auto sim = simulate_dataset(spec_of(ModelTier::SpatialBYM), truth_of({0.0}, 1e12, 4.0), g,
                                      Eigen::VectorXd::Constant(25, 10.0), Eigen::MatrixXd(25, 0), o);
    EXPECT_LT(sim.truth.phi.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Simulate, SumToZeroPerComponent) {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {3, 4}, {4, 5}, {3, 5}};
    const auto g = build_graph_from_edges(7, e);
    SimulationOptions o;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        o.seed = seed;
        const auto sim = simulate_dataset(spec_of(ModelTier::SpatialBYM), truth_of({0.0}, 0.5, 1.0), g,
                                          Eigen::VectorXd::Constant(7, 5.0), Eigen::MatrixXd(7, 0), o);
        const auto& phi = sim.truth.phi;
        EXPECT_NEAR(phi[0] + phi[1] + phi[2], 0.0, 1e-12);
        EXPECT_NEAR(phi[3] + phi[4] + phi[5], 0.0, 1e-12);
        EXPECT_EQ(phi[6], 0.0);
    }
}

TEST(Simulate, IcarDrawsHaveTheoreticalPairVariance) {
    // Two connected nodes: phi = (d/2, -d/2) with Var(d) = 1/tau.
    const std::vector<Edge> e{{0, 1}};
    const auto g = build_graph_from_edges(2, e);
    Rng rng(77);
    const double tau = 2.5;
    const int n = 40000;
    double ss = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto phi = sample_icar(g, tau, rng);
        const double d = phi[0] - phi[1];
        ss += d * d;
    }
    const double var = ss / n;
    // Relative sd of a chi-square(n)/n estimate is sqrt(2/n).
    EXPECT_NEAR(var, 1.0 / tau, 4.0 * std::sqrt(2.0 / n) / tau);
}

TEST(Simulate, PeriodLayoutAndCenter) {
    const auto g = rook_lattice(2, 2);
    SimulationOptions o;
    o.periods = 3;
    const auto sim = simulate_dataset(spec_of(ModelTier::SpatioTemporal), truth_of({0.0, 0.02}), g,
                                      Eigen::VectorXd::Constant(4, 20.0), Eigen::MatrixXd(4, 0), o);
    ASSERT_EQ(sim.data.size(), 12u);
    EXPECT_EQ(sim.data.period_center, 2.0);
    EXPECT_EQ(sim.data.region[4], 1u);
    EXPECT_EQ(sim.data.period[3], 1);
    EXPECT_EQ(sim.data.period[5], 3);
    EXPECT_EQ(sim.data.region[3], 1u);
    EXPECT_EQ(sim.data.region_ids, (std::vector<std::string>{"r0c0", "r0c1", "r1c0", "r1c1"}));
}

TEST(Simulate, RejectsInconsistentInput) {
    const auto g = rook_lattice(2, 2);
    const auto spec = spec_of(ModelTier::SpatioTemporal);
    EXPECT_THROW(simulate_dataset(spec, truth_of({0.0, 0.0}), g, Eigen::VectorXd::Ones(4), Eigen::MatrixXd(4, 0)),
                 ConfigError);
    EXPECT_THROW(simulate_dataset(spec_of(ModelTier::SpatialBYM), truth_of({0.0, 1.0}), g, Eigen::VectorXd::Ones(4),
                                  Eigen::MatrixXd(4, 0)),
                 Error);
    EXPECT_THROW(simulate_dataset(spec_of(ModelTier::SpatialBYM), truth_of({0.0}), g, Eigen::VectorXd::Ones(3),
                                  Eigen::MatrixXd(4, 0)),
                 DataError);
}
