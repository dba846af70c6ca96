#pragma once

// Model tiers, likelihood and ICAR prior.
//
//   y_k ~ Poisson(E_k * exp(eta_k))
//   eta_k = beta_0 + sum_j beta_j x_kj                      (NonSpatialGLM)
//         + phi_r(k) + theta_r(k)                           (SpatialBYM)
//         + alpha_3 * (t_k - t_center)                      (SpatioTemporal)
//
// phi follows an intrinsic CAR prior with a single precision tau_phi and
// theta is iid N(0, 1/tau_theta). r(k) maps observation k to its region.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"

namespace bdm {

enum class ModelTier { NonSpatialGLM, SpatialBYM, SpatioTemporal };

inline bool has_random_effects(ModelTier tier) noexcept {
    return tier != ModelTier::NonSpatialGLM;
}

inline std::string to_string(ModelTier tier) {
    switch (tier) {
        case ModelTier::NonSpatialGLM: return "glm";
        case ModelTier::SpatialBYM: return "bym";
        case ModelTier::SpatioTemporal: return "spatiotemporal";
    }
    return "unknown";
}

inline ModelTier parse_tier(const std::string& s) {
    if (s == "glm" || s == "GLM" || s == "NonSpatialGLM") return ModelTier::NonSpatialGLM;
    if (s == "bym" || s == "BYM" || s == "SpatialBYM") return ModelTier::SpatialBYM;
    if (s == "spatiotemporal" || s == "st" || s == "SpatioTemporal") return ModelTier::SpatioTemporal;
    throw ConfigError("unknown model tier '" + s + "'", "tier");
}

struct GammaPrior {
    double shape = 0.5;
    double rate = 0.0005;

    friend bool operator==(const GammaPrior&, const GammaPrior&) = default;
};

struct ModelSpec {
    ModelTier tier = ModelTier::SpatialBYM;
    /// Prior means of beta. Empty means all zero; a single entry is broadcast.
    std::vector<double> prior_beta_mean;
    /// Diagonal prior precisions of beta. Empty means 1e-5; a single entry is broadcast.
    std::vector<double> prior_beta_precision;
    GammaPrior tau_phi_prior;
    GammaPrior tau_theta_prior;
    /// Carried for interface completeness; the Poisson family has no dispersion.
    std::optional<double> dispersion;

    double beta_mean(std::size_t j) const {
        if (prior_beta_mean.empty()) return 0.0;
        return prior_beta_mean.size() == 1 ? prior_beta_mean[0] : prior_beta_mean.at(j);
    }
    double beta_precision(std::size_t j) const {
        if (prior_beta_precision.empty()) return 1e-5;
        return prior_beta_precision.size() == 1 ? prior_beta_precision[0]
                                                : prior_beta_precision.at(j);
    }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Number of regression coefficients: intercept, covariates, temporal slope.
inline std::size_t beta_size(ModelTier tier, std::size_t n_covariates) noexcept {
    return 1 + n_covariates + (tier == ModelTier::SpatioTemporal ? 1 : 0);
}

inline void validate(const ModelSpec& spec, std::size_t n_beta) {
    const auto check_len = [n_beta](const std::vector<double>& v, const char* key) {
        if (v.size() > 1 && v.size() != n_beta) {
            throw ConfigError(std::string(key) + " has " + std::to_string(v.size()) +
                                  " entries, model has " + std::to_string(n_beta) + " coefficients",
                              key);
        }
    };
    check_len(spec.prior_beta_mean, "prior.beta_mean");
    check_len(spec.prior_beta_precision, "prior.beta_precision");
    for (std::size_t j = 0; j < n_beta; ++j) {
        if (!std::isfinite(spec.beta_mean(j))) {
            throw ConfigError("prior beta mean must be finite", "prior.beta_mean");
        }
        if (!(spec.beta_precision(j) > 0.0) || !std::isfinite(spec.beta_precision(j))) {
            throw ConfigError("prior beta precision must be positive", "prior.beta_precision");
        }
    }
    const auto check_gamma = [](const GammaPrior& g, const char* key) {
        if (!(g.shape > 0.0) || !(g.rate > 0.0) || !std::isfinite(g.shape) ||
            !std::isfinite(g.rate)) {
            throw ConfigError("Gamma hyperparameters must be positive", key);
        }
    };
    check_gamma(spec.tau_phi_prior, "prior.tau_phi_shape");
    check_gamma(spec.tau_theta_prior, "prior.tau_theta_shape");
}

struct Dataset {
    /// One id per region; observations refer to regions by index.
    std::vector<std::string> region_ids;
    /// Region index of each observation.
    std::vector<std::size_t> region;
    std::vector<std::int64_t> counts;
    std::vector<double> expected;
    /// Observations x covariates.
    Eigen::MatrixXd covariates;
    std::vector<std::string> covariate_names;
    /// Integer period of each observation; empty when the data carry no time index.
    std::vector<int> period;
    /// Temporal covariate is period - period_center.
    double period_center = 0.0;

    std::size_t size() const noexcept { return counts.size(); }
    std::size_t n_regions() const noexcept { return region_ids.size(); }
    std::size_t n_covariates() const noexcept { return static_cast<std::size_t>(covariates.cols()); }
    bool has_time() const noexcept { return !period.empty(); }

    void validate() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.region_ids == b.region_ids && a.region == b.region && a.counts == b.counts &&
               a.expected == b.expected && a.covariates.rows() == b.covariates.rows() &&
               a.covariates.cols() == b.covariates.cols() && a.covariates == b.covariates &&
               a.covariate_names == b.covariate_names && a.period == b.period &&
               a.period_center == b.period_center;
    }
};

inline void Dataset::validate() const {
    const auto n = size();
    if (n == 0) throw DataError("dataset has no observations");
    if (region.size() != n || expected.size() != n) {
        throw DataError("dataset columns have inconsistent lengths");
    }
    if (static_cast<std::size_t>(covariates.rows()) != n) {
        throw DataError("covariate matrix has " + std::to_string(covariates.rows()) +
                        " rows, expected " + std::to_string(n));
    }
    if (!covariate_names.empty() && covariate_names.size() != n_covariates()) {
        throw DataError("covariate name count does not match covariate columns");
    }
    if (!period.empty() && period.size() != n) {
        throw DataError("period column length does not match observations");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (region[k] >= n_regions()) throw DataError("observation region index out of range");
        if (counts[k] < 0) throw DataError("negative count for region '" + region_ids[region[k]] + "'");
        if (!(expected[k] > 0.0) || !std::isfinite(expected[k])) {
            throw DataError("non-positive expected count for region '" + region_ids[region[k]] + "'");
        }
    }
    if (!covariates.allFinite()) throw DataError("covariate matrix has missing or non-finite entries");
}

/// Observations of each region, in dataset order.
inline std::vector<std::vector<std::size_t>> observations_by_region(const Dataset& data) {
    std::vector<std::vector<std::size_t>> out(data.n_regions());
    for (std::size_t k = 0; k < data.size(); ++k) out[data.region[k]].push_back(k);
    return out;
}

/// Value of design column j for observation k (column 0 is the intercept).
inline double design_value(const Dataset& data, ModelTier tier, std::size_t k, std::size_t j) {
    if (j == 0) return 1.0;
    const auto p = data.n_covariates();
    if (j <= p) return data.covariates(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j - 1));
    if (tier == ModelTier::SpatioTemporal && j == p + 1) {
        return static_cast<double>(data.period[k]) - data.period_center;
    }
    throw Error("design column out of range");
}

struct Params {
    /// Intercept, covariate effects, then the temporal slope for the spatio-temporal tier.
    Eigen::VectorXd beta;
    /// Structured (ICAR) effect per region; empty for the GLM tier.
    Eigen::VectorXd phi;
    /// Unstructured effect per region; empty for the GLM tier.
    Eigen::VectorXd theta;
    double tau_phi = 1.0;
    double tau_theta = 1.0;

    friend bool operator==(const Params& a, const Params& b) {
        const auto same = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            return x.size() == y.size() && x == y;
        };
        return same(a.beta, b.beta) && same(a.phi, b.phi) && same(a.theta, b.theta) &&
               a.tau_phi == b.tau_phi && a.tau_theta == b.tau_theta;
    }
};

inline void check_dimensions(const ModelSpec& spec, const Params& params, const Dataset& data) {
    const auto nb = beta_size(spec.tier, data.n_covariates());
    if (static_cast<std::size_t>(params.beta.size()) != nb) {
        throw Error("beta has " + std::to_string(params.beta.size()) + " entries, model needs " +
                    std::to_string(nb));
    }
    if (spec.tier == ModelTier::SpatioTemporal && !data.has_time()) {
        throw Error("spatio-temporal tier requires a period index");
    }
    if (has_random_effects(spec.tier)) {
        const auto nr = static_cast<Eigen::Index>(data.n_regions());
        if (params.phi.size() != nr || params.theta.size() != nr) {
            throw Error("random effect vectors do not match the region count");
        }
    }
}

/// Log relative risk per observation (the offset log E is not included).
inline Eigen::VectorXd linear_predictor(const ModelSpec& spec, const Params& params,
                                        const Dataset& data) {
    check_dimensions(spec, params, data);
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto p = static_cast<Eigen::Index>(data.n_covariates());
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, params.beta[0]);
    if (p > 0) eta += data.covariates * params.beta.segment(1, p);
    if (spec.tier == ModelTier::SpatioTemporal) {
        const double slope = params.beta[p + 1];
        for (Eigen::Index k = 0; k < n; ++k) {
            eta[k] += slope * (static_cast<double>(data.period[static_cast<std::size_t>(k)]) -
                               data.period_center);
        }
    }
    if (has_random_effects(spec.tier)) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto r = static_cast<Eigen::Index>(data.region[static_cast<std::size_t>(k)]);
            eta[k] += params.phi[r] + params.theta[r];
        }
    }
    return eta;
}

/// log P(y | E e^eta), including the -log(y!) constant.
inline double poisson_log_term(std::int64_t y, double expected, double eta) {
    const double mean = expected * std::exp(eta);
    if (!std::isfinite(mean)) return -std::numeric_limits<double>::infinity();
    const double yd = static_cast<double>(y);
    if (y == 0) return -mean;
    return -mean + yd * (std::log(expected) + eta) - std::lgamma(yd + 1.0);
}

/// Poisson log likelihood with offset. Returns -inf and sets `overflowed`
/// when E e^eta is not representable.
inline double poisson_log_likelihood(const Dataset& data, const Eigen::VectorXd& eta,
                                     bool& overflowed) {
    if (static_cast<std::size_t>(eta.size()) != data.size()) {
        throw Error("log-risk vector length does not match the dataset");
    }
    overflowed = false;
    double total = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const double e = eta[static_cast<Eigen::Index>(k)];
        if (!std::isfinite(e) || !std::isfinite(data.expected[k] * std::exp(e))) {
            overflowed = true;
            return -std::numeric_limits<double>::infinity();
        }
        total += poisson_log_term(data.counts[k], data.expected[k], e);
    }
    return total;
}

inline double poisson_log_likelihood(const Dataset& data, const Eigen::VectorXd& eta) {
    bool overflowed = false;
    return poisson_log_likelihood(data, eta, overflowed);
}

/// d loglik / d eta_k = y_k - E_k e^{eta_k}.
inline Eigen::VectorXd poisson_log_likelihood_gradient(const Dataset& data,
                                                       const Eigen::VectorXd& eta) {
    Eigen::VectorXd g(eta.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        g[kk] = static_cast<double>(data.counts[k]) - data.expected[k] * std::exp(eta[kk]);
    }
    return g;
}

/// sum over edges i<j of w_ij (phi_i - phi_j)^2.
inline double icar_quadratic(const Eigen::VectorXd& phi, const AdjacencyGraph& graph) {
    double q = 0.0;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto nb = graph.neighbors(i);
        const auto w = graph.weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] <= i) continue;
            const double d = phi[static_cast<Eigen::Index>(i)] - phi[static_cast<Eigen::Index>(nb[k])];
            q += w[k] * d * d;
        }
    }
    return q;
}

/// Rank of the ICAR precision: regions minus connected components.
inline std::size_t icar_rank(const AdjacencyGraph& graph) {
    return graph.size() - components(graph).size();
}

/// Unnormalised log density of the improper ICAR prior.
inline double icar_log_pairwise(const Eigen::VectorXd& phi, const AdjacencyGraph& graph,
                                double tau_phi) {
    if (static_cast<std::size_t>(phi.size()) != graph.size()) {
        throw Error("phi length does not match the graph");
    }
    const double n_eff = static_cast<double>(icar_rank(graph));
    return 0.5 * n_eff * std::log(tau_phi) - 0.5 * tau_phi * icar_quadratic(phi, graph);
}

struct NormalMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Conditional of phi_i given its neighbours: weighted neighbour average with
/// variance 1 / (tau_phi * sum_j w_ij).
inline NormalMoments icar_full_conditional(std::size_t i, const Eigen::VectorXd& phi,
                                           const AdjacencyGraph& graph, double tau_phi) {
    if (i >= graph.size()) throw Error("region index out of range");
    const auto nb = graph.neighbors(i);
    if (nb.empty()) throw Error("no ICAR conditional for isolated region");
    const auto w = graph.weights(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) acc += w[k] * phi[static_cast<Eigen::Index>(nb[k])];
    const double wsum = graph.weight_sum(i);
    return {acc / wsum, 1.0 / (tau_phi * wsum)};
}

/// Observed over expected, per observation.
inline Eigen::VectorXd compute_sir(const Dataset& data) {
    Eigen::VectorXd sir(static_cast<Eigen::Index>(data.size()));
    for (std::size_t k = 0; k < data.size(); ++k) {
        sir[static_cast<Eigen::Index>(k)] = static_cast<double>(data.counts[k]) / data.expected[k];
    }
    return sir;
}

/// Observed over expected pooled over each region's observations.
inline Eigen::VectorXd region_sir(const Dataset& data) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n_regions()));
    Eigen::VectorXd e = y;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(data.region[k]);
        y[r] += static_cast<double>(data.counts[k]);
        e[r] += data.expected[k];
    }
    return y.cwiseQuotient(e);
}

}  // namespace bdm
