#pragma once

// Synthetic data from a known truth, used for parameter-recovery studies.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"
#include "bdm/model.hpp"
#include "bdm/rng.hpp"

namespace bdm {

/// Subtracts the per-component mean of phi.
inline void center_per_component(Eigen::VectorXd& phi, const AdjacencyGraph& graph) {
    for (const auto& comp : components(graph)) {
        double mean = 0.0;
        for (const auto i : comp) mean += phi[static_cast<Eigen::Index>(i)];
        mean /= static_cast<double>(comp.size());
        for (const auto i : comp) phi[static_cast<Eigen::Index>(i)] -= mean;
    }
}

/// Exact draw from the ICAR prior restricted to the sum-to-zero subspace of
/// each component, via the eigendecomposition of the graph Laplacian D - W.
/// Isolated regions come out as 0.
inline Eigen::VectorXd sample_icar(const AdjacencyGraph& graph, double tau_phi, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(graph.size());
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : graph.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i);
        const auto j = static_cast<Eigen::Index>(e.j);
        laplacian(i, j) -= e.weight;
        laplacian(j, i) -= e.weight;
        laplacian(i, i) += e.weight;
        laplacian(j, j) += e.weight;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
    const auto& values = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(1.0, values.cwiseAbs().maxCoeff());
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double z = standard_normal(rng);
        if (values[k] > cutoff) phi += (z / std::sqrt(tau_phi * values[k])) * eig.eigenvectors().col(k);
    }
    center_per_component(phi, graph);
    return phi;
}

struct Simulation {
    Dataset data;
    /// Truth with the realised phi and theta filled in.
    Params truth;
};

struct SimulationOptions {
    /// Periods per region; observations are region-major (region, then period 1..T).
    std::optional<std::size_t> periods;
    /// Sets phi = theta = 0 (the infinite-precision limit).
    bool suppress_random_effects = false;
    std::uint64_t seed = 1;
};

/// Draws phi from the ICAR prior, theta iid N(0, 1/tau_theta), then
/// y ~ Poisson(E exp(eta)). `expected` and `covariates` hold one row per region
/// (replicated across periods) or one row per observation.
inline Simulation simulate_dataset(const ModelSpec& spec, const Params& truth,
                                   const AdjacencyGraph& graph, const Eigen::VectorXd& expected,
                                   const Eigen::MatrixXd& covariates,
                                   const SimulationOptions& options = {}) {
    const std::size_t n = graph.size();
    const std::size_t periods = options.periods.value_or(1);
    if (n == 0) throw DataError("cannot simulate on an empty graph");
    if (periods == 0) throw ConfigError("periods must be at least 1", "simulate.periods");
    if (spec.tier == ModelTier::SpatioTemporal && !options.periods) {
        throw ConfigError("spatio-temporal simulation needs a period count", "simulate.periods");
    }
    const std::size_t n_obs = n * periods;
    const auto rows_ok = [&](Eigen::Index rows) {
        return static_cast<std::size_t>(rows) == n || static_cast<std::size_t>(rows) == n_obs;
    };
    if (!rows_ok(expected.size())) throw DataError("expected counts must have one entry per region or observation");
    if (!rows_ok(covariates.rows())) throw DataError("covariates must have one row per region or observation");
    const auto p = static_cast<std::size_t>(covariates.cols());
    if (static_cast<std::size_t>(truth.beta.size()) != beta_size(spec.tier, p)) {
        throw Error("truth beta does not match the model tier and covariates");
    }
    if (has_random_effects(spec.tier) && !options.suppress_random_effects &&
        (!(truth.tau_phi > 0.0) || !(truth.tau_theta > 0.0))) {
        throw ConfigError("true precisions must be positive", "simulate.tau_phi");
    }

    Rng rng(substream_seed(options.seed, 0));

    Simulation sim;
    Dataset& data = sim.data;
    data.region_ids.reserve(n);
    for (const auto& r : graph.regions()) data.region_ids.push_back(r.id);
    data.covariates.resize(static_cast<Eigen::Index>(n_obs), static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) data.covariate_names.push_back("x" + std::to_string(j + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < periods; ++t) {
            const std::size_t k = i * periods + t;
            const auto src = static_cast<Eigen::Index>(
                static_cast<std::size_t>(covariates.rows()) == n ? i : k);
            data.region.push_back(i);
            data.expected.push_back(
                expected[static_cast<std::size_t>(expected.size()) == n ? static_cast<Eigen::Index>(i)
                                                                        : static_cast<Eigen::Index>(k)]);
            data.covariates.row(static_cast<Eigen::Index>(k)) = covariates.row(src);
            if (options.periods) data.period.push_back(static_cast<int>(t + 1));
        }
    }
    if (options.periods) data.period_center = 0.5 * (1.0 + static_cast<double>(periods));

    sim.truth.beta = truth.beta;
    sim.truth.tau_phi = truth.tau_phi;
    sim.truth.tau_theta = truth.tau_theta;
    if (has_random_effects(spec.tier)) {
        const auto nr = static_cast<Eigen::Index>(n);
        if (options.suppress_random_effects) {
            sim.truth.phi = Eigen::VectorXd::Zero(nr);
            sim.truth.theta = Eigen::VectorXd::Zero(nr);
        } else {
            sim.truth.phi = sample_icar(graph, truth.tau_phi, rng);
            sim.truth.theta.resize(nr);
            const double sd = 1.0 / std::sqrt(truth.tau_theta);
            for (Eigen::Index i = 0; i < nr; ++i) sim.truth.theta[i] = sd * standard_normal(rng);
        }
    }

    // Counts are placeholders while the linear predictor is evaluated.
    data.counts.assign(n_obs, 0);
    const Eigen::VectorXd eta = linear_predictor(spec, sim.truth, data);
    for (std::size_t k = 0; k < n_obs; ++k) {
        const double mean = data.expected[k] * std::exp(eta[static_cast<Eigen::Index>(k)]);
        if (!std::isfinite(mean)) throw DataError("simulated Poisson mean overflows");
        data.counts[k] = std::poisson_distribution<std::int64_t>(mean)(rng);
    }
    data.validate();
    return sim;
}

}  // namespace bdm
