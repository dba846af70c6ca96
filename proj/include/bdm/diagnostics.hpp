#pragma once

// Posterior summaries, Monte Carlo error, split-chain R-hat and DIC.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"
#include "bdm/model.hpp"
#include "bdm/sampler.hpp"

namespace bdm {

/// Type-7 (linear interpolation) quantile of ascending `sorted`.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double sample_mean(std::span<const double> x) {
    if (x.empty()) throw Error("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance with the n-1 denominator; 0 for a single value.
inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = sample_mean(x);
    double ss = 0.0;
    for (const double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

/// Batch-means standard error of the mean of an ordered series. Trailing
/// draws that do not fill a whole batch are dropped.
inline double mc_error(std::span<const double> draws, std::size_t batch_count = 50) {
    if (batch_count < 2) throw Error("mc_error needs at least two batches");
    if (draws.size() < 2 * batch_count) {
        throw Error("series of length " + std::to_string(draws.size()) + " is too short for " +
                    std::to_string(batch_count) + " batches");
    }
    const std::size_t batch = draws.size() / batch_count;
    std::vector<double> means(batch_count);
    for (std::size_t b = 0; b < batch_count; ++b) {
        means[b] = sample_mean(draws.subspan(b * batch, batch));
    }
    const double m0 = means[0];
    if (std::all_of(means.begin(), means.end(), [m0](double v) { return v == m0; })) return 0.0;
    return std::sqrt(sample_variance(means) / static_cast<double>(batch_count));
}

/// Split-chain potential scale reduction factor. Every chain is cut into two
/// halves (the middle draw of an odd-length chain is dropped).
inline double gelman_rubin(std::span<const std::vector<double>> chains) {
    if (chains.empty()) throw Error("gelman_rubin needs at least one chain");
    const std::size_t len = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != len) throw Error("gelman_rubin needs chains of equal length");
    }
    if (len < 20) throw Error("chain of length " + std::to_string(len) + " is too short for split R-hat");
    const std::size_t n = len / 2;
    std::vector<double> seg_means;
    std::vector<double> seg_vars;
    for (const auto& c : chains) {
        const std::span<const double> all(c);
        for (const auto seg : {all.first(n), all.last(n)}) {
            seg_means.push_back(sample_mean(seg));
            seg_vars.push_back(sample_variance(seg));
        }
    }
    const double w = sample_mean(seg_vars);
    const double b_over_n = sample_variance(seg_means);
    if (w == 0.0) return b_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    return std::sqrt(((nd - 1.0) / nd * w + b_over_n) / w);
}

struct PosteriorSummaryRow {
    std::string node;
    double mean = 0.0;
    double sd = 0.0;
    double mc_error = 0.0;
    double q2_5 = 0.0;
    double median = 0.0;
    double q97_5 = 0.0;
    std::size_t start = 1;
    std::size_t sample = 0;

    friend bool operator==(const PosteriorSummaryRow&, const PosteriorSummaryRow&) = default;
};

struct DicReport {
    double d_bar = 0.0;
    double d_hat = 0.0;
    double p_d = 0.0;
    double dic = 0.0;

    friend bool operator==(const DicReport&, const DicReport&) = default;
};

/// Node labels: alpha0, alpha1[j] (covariates, 1-based), alpha3 (temporal
/// slope), sigma = 1/sqrt(tau_theta), tau = tau_phi, phi[i], theta[i]
/// (1-based regions) and deviance.
inline std::vector<std::string> monitored_nodes(ModelTier tier, std::size_t n_covariates) {
    std::vector<std::string> out{"alpha0"};
    for (std::size_t j = 1; j <= n_covariates; ++j) out.push_back("alpha1[" + std::to_string(j) + "]");
    if (tier == ModelTier::SpatioTemporal) out.push_back("alpha3");
    if (has_random_effects(tier)) {
        out.push_back("sigma");
        out.push_back("tau");
    }
    return out;
}

namespace detail {

inline std::optional<std::size_t> bracket_index(const std::string& label, const std::string& prefix) {
    if (label.size() <= prefix.size() + 2 || label.compare(0, prefix.size(), prefix) != 0 ||
        label[prefix.size()] != '[' || label.back() != ']') {
        return std::nullopt;
    }
    const auto digits = label.substr(prefix.size() + 1, label.size() - prefix.size() - 2);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::nullopt;
    }
    const auto v = std::stoul(digits);
    if (v == 0) return std::nullopt;
    return v;
}

}  // namespace detail

/// Per-chain draw series of one node.
inline std::vector<std::vector<double>> node_draws(const ChainSet& chains, const std::string& label) {
    std::function<double(const Params&)> get;
    const auto p = chains.n_covariates;
    const bool re = has_random_effects(chains.tier);
    if (label == "alpha0") {
        get = [](const Params& x) { return x.beta[0]; };
    } else if (auto j = detail::bracket_index(label, "alpha1"); j && *j <= p) {
        const auto jj = static_cast<Eigen::Index>(*j);
        get = [jj](const Params& x) { return x.beta[jj]; };
    } else if (label == "alpha3" && chains.tier == ModelTier::SpatioTemporal) {
        const auto jj = static_cast<Eigen::Index>(p + 1);
        get = [jj](const Params& x) { return x.beta[jj]; };
    } else if (label == "sigma" && re) {
        get = [](const Params& x) { return 1.0 / std::sqrt(x.tau_theta); };
    } else if (label == "tau" && re) {
        get = [](const Params& x) { return x.tau_phi; };
    } else if (auto i = detail::bracket_index(label, "phi"); re && i && *i <= chains.n_regions) {
        const auto ii = static_cast<Eigen::Index>(*i - 1);
        get = [ii](const Params& x) { return x.phi[ii]; };
    } else if (auto t = detail::bracket_index(label, "theta"); re && t && *t <= chains.n_regions) {
        const auto ii = static_cast<Eigen::Index>(*t - 1);
        get = [ii](const Params& x) { return x.theta[ii]; };
    } else if (label == "deviance") {
        return chains.deviance;
    } else {
        throw Error("unknown node '" + label + "'");
    }
    std::vector<std::vector<double>> out;
    out.reserve(chains.n_chains());
    for (const auto& chain : chains.draws) {
        std::vector<double> series;
        series.reserve(chain.size());
        for (const auto& d : chain) series.push_back(get(d));
        out.push_back(std::move(series));
    }
    return out;
}

/// Summary of per-chain series: pooled moments and type-7 quantiles; MC error
/// combines per-chain batch-means errors (50 batches, fewer for short chains).
inline PosteriorSummaryRow summarize_series(const std::string& node,
                                            const std::vector<std::vector<double>>& per_chain,
                                            std::size_t start, std::size_t sample) {
    std::vector<double> pooled;
    for (const auto& c : per_chain) pooled.insert(pooled.end(), c.begin(), c.end());
    if (pooled.empty()) throw Error("no draws for node '" + node + "'");
    std::sort(pooled.begin(), pooled.end());

    PosteriorSummaryRow row;
    row.node = node;
    row.mean = sample_mean(pooled);
    row.sd = std::sqrt(sample_variance(pooled));
    row.q2_5 = quantile_sorted(pooled, 0.025);
    row.median = quantile_sorted(pooled, 0.5);
    row.q97_5 = quantile_sorted(pooled, 0.975);
    row.start = start;
    row.sample = sample;

    std::vector<double> chain_se2;
    for (const auto& c : per_chain) {
        double se = 0.0;
        if (c.size() >= 100) {
            se = mc_error(c, 50);
        } else if (c.size() >= 4) {
            se = mc_error(c, c.size() / 2);
        } else {
            se = std::sqrt(sample_variance(c) / static_cast<double>(c.size()));
        }
        chain_se2.push_back(se * se);
    }
    std::sort(chain_se2.begin(), chain_se2.end());
    const double m = static_cast<double>(per_chain.size());
    row.mc_error = std::sqrt(std::accumulate(chain_se2.begin(), chain_se2.end(), 0.0)) / m;
    return row;
}

/// Rows for `nodes` (default: monitored_nodes of the tier), pooled across chains.
inline std::vector<PosteriorSummaryRow> summarize(const ChainSet& chains,
                                                  std::vector<std::string> nodes = {}) {
    if (chains.total_kept() == 0) throw Error("chain set has no stored draws");
    if (nodes.empty()) nodes = monitored_nodes(chains.tier, chains.n_covariates);
    std::vector<PosteriorSummaryRow> rows;
    rows.reserve(nodes.size());
    for (const auto& node : nodes) {
        rows.push_back(summarize_series(node, node_draws(chains, node), chains.config.start_iteration(),
                                        chains.total_kept()));
    }
    return rows;
}

struct RhatEntry {
    std::string node;
    double rhat = 1.0;

    friend bool operator==(const RhatEntry&, const RhatEntry&) = default;
};

inline std::vector<RhatEntry> rhat_table(const ChainSet& chains, std::vector<std::string> nodes = {}) {
    if (nodes.empty()) nodes = monitored_nodes(chains.tier, chains.n_covariates);
    std::vector<RhatEntry> out;
    for (const auto& node : nodes) {
        const auto draws = node_draws(chains, node);
        out.push_back(RhatEntry{node, gelman_rubin(draws)});
    }
    return out;
}

/// Elementwise posterior mean of every parameter block.
inline Params posterior_mean(const ChainSet& chains) {
    if (chains.total_kept() == 0) throw Error("chain set has no stored draws");
    const auto& first = chains.draws.front().front();
    Params m;
    m.beta = Eigen::VectorXd::Zero(first.beta.size());
    m.phi = Eigen::VectorXd::Zero(first.phi.size());
    m.theta = Eigen::VectorXd::Zero(first.theta.size());
    m.tau_phi = 0.0;
    m.tau_theta = 0.0;
    for (const auto& chain : chains.draws) {
        for (const auto& d : chain) {
            m.beta += d.beta;
            m.phi += d.phi;
            m.theta += d.theta;
            m.tau_phi += d.tau_phi;
            m.tau_theta += d.tau_theta;
        }
    }
    const double n = static_cast<double>(chains.total_kept());
    m.beta /= n;
    m.phi /= n;
    m.theta /= n;
    m.tau_phi /= n;
    m.tau_theta /= n;
    return m;
}

/// DIC from deviance draws and the deviance at the posterior mean.
inline DicReport dic_from(std::span<const double> deviance_draws, double d_hat) {
    if (deviance_draws.empty()) throw Error("no deviance draws");
    if (!std::isfinite(d_hat)) throw Error("deviance at the posterior mean is not finite");
    DicReport r;
    r.d_bar = sample_mean(deviance_draws);
    r.d_hat = d_hat;
    r.p_d = r.d_bar - r.d_hat;
    r.dic = r.d_bar + r.p_d;
    return r;
}

/// DIC = Dbar + pD with pD = Dbar - Dhat, Dhat evaluated at the posterior mean
/// of beta, phi and theta.
inline DicReport dic(const ChainSet& chains, const ModelSpec& spec, const Dataset& data,
                     const AdjacencyGraph& graph) {
    (void)graph;
    std::vector<double> all;
    for (const auto& c : chains.deviance) all.insert(all.end(), c.begin(), c.end());
    const Params mean = posterior_mean(chains);
    bool overflow = false;
    const double d_hat = -2.0 * poisson_log_likelihood(data, linear_predictor(spec, mean, data), overflow);
    if (overflow || !std::isfinite(d_hat)) throw Error("deviance at the posterior mean is not finite");
    return dic_from(all, d_hat);
}

/// Posterior mean relative risk exp(eta) per region, averaged over the region's observations.
inline Eigen::VectorXd posterior_relative_risk(const ChainSet& chains, const ModelSpec& spec,
                                               const Dataset& data) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.size()));
    for (const auto& chain : chains.draws) {
        for (const auto& d : chain) acc += linear_predictor(spec, d, data).array().exp().matrix();
    }
    acc /= static_cast<double>(chains.total_kept());
    Eigen::VectorXd rr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n_regions()));
    Eigen::VectorXd count = rr;
    for (std::size_t k = 0; k < data.size(); ++k) {
        rr[static_cast<Eigen::Index>(data.region[k])] += acc[static_cast<Eigen::Index>(k)];
        count[static_cast<Eigen::Index>(data.region[k])] += 1.0;
    }
    return rr.cwiseQuotient(count);
}

}  // namespace bdm
