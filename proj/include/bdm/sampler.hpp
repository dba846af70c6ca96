#pragma once

// Metropolis-within-Gibbs sampler for the three disease-mapping tiers.
//
// One sweep updates, in order: each beta_j (random-walk MH), each phi_i
// (random-walk MH against the ICAR conditional times the region's Poisson
// factor), each theta_i (random-walk MH), tau_phi and tau_theta (conjugate
// Gamma draws), then recentres phi to sum to zero within every graph
// component, moving the shift into the intercept.
//
// After the precision draws comes one extra block that leaves every
// s_i = phi_i + theta_i (hence the likelihood) untouched: a random-walk step on
// (log tau_phi, log tau_theta) against p(s | tau), with phi integrated out
// exactly, then a draw of phi from its Gaussian conditional given s, with
// theta = s - phi. Single-site updates alone cannot move mass between a fit
// where phi carries the excess risk and one where theta does. The same block
// finishes with exact Gibbs draws along translations beta_j += d,
// theta -= d x_j (and likewise with phi), which also leave eta unchanged and
// undo the slow mixing of coefficients confounded with the random effects.
//
// Region-level steps are measured in units of 1/sqrt(prior precision + y_i),
// a curvature proxy that ignores the site's own value. With vague Gamma
// hyperpriors tau_theta wanders over orders of magnitude, and a step size
// frozen at the end of burn-in would stall whenever it does.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"
#include "bdm/mcmc.hpp"
#include "bdm/model.hpp"
#include "bdm/rng.hpp"

namespace bdm {

struct SweepOptions {
    /// When false the Poisson likelihood is dropped and the sweep samples the prior.
    bool use_likelihood = true;
    /// Hold tau_phi and tau_theta at their current values.
    bool fix_precisions = false;
    /// Run the eta-preserving partition and translation block.
    bool reallocate = true;
};

/// Per-block visit counts, for auditing the scan order.
struct BlockVisits {
    std::vector<std::size_t> beta;
    std::vector<std::size_t> phi;
    std::vector<std::size_t> theta;
    std::size_t tau_phi = 0;
    std::size_t tau_theta = 0;
    std::size_t partition = 0;
    std::size_t recenter = 0;
};

struct Tunables {
    std::vector<AdaptiveScale> beta;
    std::vector<AdaptiveScale> phi;
    std::vector<AdaptiveScale> theta;
    /// Joint step on (log tau_phi, log tau_theta) in the partition block.
    AdaptiveScale partition{0.5};
    SweepOptions options;
    BlockVisits visits;

    /// All proposal scales: beta, phi, theta, then the partition step.
    std::vector<double> scales() const {
        std::vector<double> out;
        for (const auto* block : {&beta, &phi, &theta}) {
            for (const auto& s : *block) out.push_back(s.scale());
        }
        out.push_back(partition.scale());
        return out;
    }
};

/// Post-burn-in acceptance rates: per coefficient, and averaged over regions.
struct AcceptanceLedger {
    std::vector<double> beta;
    double phi = 0.0;
    double theta = 0.0;

    friend bool operator==(const AcceptanceLedger&, const AcceptanceLedger&) = default;
};

struct ScaleLedger {
    std::vector<double> at_burn_in_end;
    std::vector<double> at_end;

    friend bool operator==(const ScaleLedger&, const ScaleLedger&) = default;
};

struct McmcDraw {
    Params params;
    double deviance = 0.0;
};

/// Subtracts the mean of phi within each component and adds the weighted
/// average of those means to the intercept. `region_weights` (one per region,
/// default all 1) are the observation counts used for the weighting. On a
/// connected graph every linear predictor value is unchanged.
inline Params recenter_spatial(Params state, const AdjacencyGraph& graph,
                               std::span<const double> region_weights = {}) {
    if (static_cast<std::size_t>(state.phi.size()) != graph.size()) {
        throw Error("recenter_spatial needs a phi block matching the graph");
    }
    double shift = 0.0;
    double total_weight = 0.0;
    for (const auto& comp : components(graph)) {
        double mean = 0.0;
        double weight = 0.0;
        for (const auto i : comp) {
            mean += state.phi[static_cast<Eigen::Index>(i)];
            weight += region_weights.empty() ? 1.0 : region_weights[i];
        }
        mean /= static_cast<double>(comp.size());
        for (const auto i : comp) state.phi[static_cast<Eigen::Index>(i)] -= mean;
        shift += weight * mean;
        total_weight += weight;
    }
    if (total_weight > 0.0 && state.beta.size() > 0) state.beta[0] += shift / total_weight;
    return state;
}

class DiseaseSampler {
public:
    DiseaseSampler(const ModelSpec& spec, const Dataset& data, const AdjacencyGraph& graph,
                   Params initial, Tunables tunables)
        : spec_(&spec), data_(&data), graph_(&graph), params_(std::move(initial)),
          tun_(std::move(tunables)) {
        check_dimensions(spec, params_, data);
        const auto nb = static_cast<std::size_t>(params_.beta.size());
        const auto n = static_cast<Eigen::Index>(data.size());
        design_.resize(n, static_cast<Eigen::Index>(nb));
        for (std::size_t k = 0; k < data.size(); ++k) {
            for (std::size_t j = 0; j < nb; ++j) {
                design_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                    design_value(data, spec.tier, k, j);
            }
        }
        log_norm_.resize(n);
        for (std::size_t k = 0; k < data.size(); ++k) {
            const double y = static_cast<double>(data.counts[k]);
            log_norm_[static_cast<Eigen::Index>(k)] = y * std::log(data.expected[k]) - std::lgamma(y + 1.0);
        }
        if (has_random_effects(spec.tier)) {
            if (graph.size() != data.n_regions()) {
                throw Error("graph has " + std::to_string(graph.size()) + " regions, dataset has " +
                            std::to_string(data.n_regions()));
            }
            obs_of_region_ = observations_by_region(data);
            region_weight_.resize(data.n_regions());
            region_count_.assign(data.n_regions(), 0.0);
            for (std::size_t i = 0; i < data.n_regions(); ++i) {
                region_weight_[i] = static_cast<double>(obs_of_region_[i].size());
                for (const auto k : obs_of_region_[i]) region_count_[i] += static_cast<double>(data.counts[k]);
            }
            icar_rank_ = icar_rank(graph);
            build_spectrum();
            build_region_design();
        }
        if (tun_.beta.size() != nb) tun_.beta.assign(nb, AdaptiveScale(0.1));
        const auto nr = has_random_effects(spec.tier) ? data.n_regions() : 0;
        if (tun_.phi.size() != nr) tun_.phi.assign(nr, AdaptiveScale(0.1));
        if (tun_.theta.size() != nr) tun_.theta.assign(nr, AdaptiveScale(0.1));
        tun_.visits.beta.resize(nb, 0);
        tun_.visits.phi.resize(nr, 0);
        tun_.visits.theta.resize(nr, 0);
        refresh_cache();
    }

    const Params& params() const noexcept { return params_; }
    const Tunables& tunables() const noexcept { return tun_; }

    double log_likelihood() const {
        double ll = 0.0;
        for (Eigen::Index k = 0; k < eta_.size(); ++k) {
            ll += -mu_[k] + static_cast<double>(data_->counts[static_cast<std::size_t>(k)]) * eta_[k] +
                  log_norm_[k];
        }
        return ll;
    }
    double deviance() const { return -2.0 * log_likelihood(); }

    McmcDraw record() const { return McmcDraw{params_, deviance()}; }

    void end_burn_in() {
        burn_in_scales_ = tun_.scales();
        for (auto* block : {&tun_.beta, &tun_.phi, &tun_.theta}) {
            for (auto& s : *block) s.reset_counts();
        }
        tun_.partition.reset_counts();
    }

    ScaleLedger scale_ledger() const { return ScaleLedger{burn_in_scales_, tun_.scales()}; }

    AcceptanceLedger acceptance() const {
        AcceptanceLedger out;
        for (const auto& s : tun_.beta) out.beta.push_back(s.acceptance_rate());
        const auto mean_rate = [](const std::vector<AdaptiveScale>& v) {
            double acc = 0.0;
            for (const auto& s : v) acc += s.acceptance_rate();
            return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
        };
        out.phi = mean_rate(tun_.phi);
        out.theta = mean_rate(tun_.theta);
        return out;
    }

    void sweep(Rng& rng, const SweepContext& ctx) {
        update_beta(rng, ctx);
        if (has_random_effects(spec_->tier)) {
            update_phi(rng, ctx);
            update_theta(rng, ctx);
            update_precisions(rng);
            if (tun_.options.reallocate) update_partition(rng, ctx);
            params_ = recenter_spatial(std::move(params_), *graph_, region_weight_);
            ++tun_.visits.recenter;
            refresh_cache();
        }
    }

private:
    void refresh_cache() {
        eta_ = linear_predictor(*spec_, params_, *data_);
        mu_.resize(eta_.size());
        for (Eigen::Index k = 0; k < eta_.size(); ++k) {
            mu_[k] = data_->expected[static_cast<std::size_t>(k)] * std::exp(eta_[k]);
        }
    }

    // Log-likelihood change when eta_k moves by delta for k in `obs`.
    template <class Obs, class Delta>
    double likelihood_delta(const Obs& obs, Delta&& delta) const {
        if (!tun_.options.use_likelihood) return 0.0;
        double d = 0.0;
        for (const auto k : obs) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double dk = delta(kk);
            d += -mu_[kk] * std::expm1(dk) + static_cast<double>(data_->counts[static_cast<std::size_t>(k)]) * dk;
        }
        return std::isfinite(d) ? d : -std::numeric_limits<double>::infinity();
    }

    template <class Obs, class Delta>
    void apply_delta(const Obs& obs, Delta&& delta) {
        for (const auto k : obs) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double dk = delta(kk);
            eta_[kk] += dk;
            mu_[kk] *= std::exp(dk);
        }
    }

    struct AllObs {
        std::size_t n;
        struct It {
            std::size_t k;
            std::size_t operator*() const { return k; }
            It& operator++() { ++k; return *this; }
            bool operator!=(const It& o) const { return k != o.k; }
        };
        It begin() const { return {0}; }
        It end() const { return {n}; }
    };

    void update_beta(Rng& rng, const SweepContext& ctx) {
        const AllObs all{data_->size()};
        for (std::size_t j = 0; j < tun_.beta.size(); ++j) {
            ++tun_.visits.beta[j];
            const auto jj = static_cast<Eigen::Index>(j);
            const double current = params_.beta[jj];
            const double m = spec_->beta_mean(j);
            const double prec = spec_->beta_precision(j);
            double value = current;
            const bool accepted = rw_metropolis(value, tun_.beta[j], rng, ctx, [&](double prop) {
                const double step = prop - current;
                const double lp = -0.5 * prec * ((prop - m) * (prop - m) - (current - m) * (current - m));
                return lp + likelihood_delta(all, [&](Eigen::Index k) { return step * design_(k, jj); });
            });
            if (accepted) {
                const double step = value - current;
                params_.beta[jj] = value;
                apply_delta(all, [&](Eigen::Index k) { return step * design_(k, jj); });
            }
        }
    }

    void update_phi(Rng& rng, const SweepContext& ctx) {
        for (std::size_t i = 0; i < graph_->size(); ++i) {
            ++tun_.visits.phi[i];
            if (graph_->degree(i) == 0) continue;  // isolated: phi_i pinned at 0
            const auto ii = static_cast<Eigen::Index>(i);
            const auto cond = icar_full_conditional(i, params_.phi, *graph_, params_.tau_phi);
            const double current = params_.phi[ii];
            double value = current;
            const bool accepted = rw_metropolis(value, tun_.phi[i], rng, ctx, [&](double prop) {
                const double lp = -0.5 * ((prop - cond.mean) * (prop - cond.mean) -
                                          (current - cond.mean) * (current - cond.mean)) /
                                  cond.variance;
                return lp + likelihood_delta(obs_of_region_[i], [&](Eigen::Index) { return prop - current; });
            }, step_unit(1.0 / cond.variance, i));
            if (accepted) {
                params_.phi[ii] = value;
                apply_delta(obs_of_region_[i], [&](Eigen::Index) { return value - current; });
            }
        }
    }

    void update_theta(Rng& rng, const SweepContext& ctx) {
        for (std::size_t i = 0; i < data_->n_regions(); ++i) {
            ++tun_.visits.theta[i];
            const auto ii = static_cast<Eigen::Index>(i);
            const double current = params_.theta[ii];
            const double tau = params_.tau_theta;
            double value = current;
            const bool accepted = rw_metropolis(value, tun_.theta[i], rng, ctx, [&](double prop) {
                const double lp = -0.5 * tau * (prop * prop - current * current);
                return lp + likelihood_delta(obs_of_region_[i], [&](Eigen::Index) { return prop - current; });
            }, step_unit(tau, i));
            if (accepted) {
                params_.theta[ii] = value;
                apply_delta(obs_of_region_[i], [&](Eigen::Index) { return value - current; });
            }
        }
    }

    double step_unit(double prior_precision, std::size_t i) const {
        const double count = tun_.options.use_likelihood ? region_count_[i] : 0.0;
        return 1.0 / std::sqrt(prior_precision + count);
    }

    void update_precisions(Rng& rng) {
        ++tun_.visits.tau_phi;
        ++tun_.visits.tau_theta;
        if (tun_.options.fix_precisions) return;
        const auto& gp = spec_->tau_phi_prior;
        params_.tau_phi = gamma_shape_rate(rng, gp.shape + 0.5 * static_cast<double>(icar_rank_),
                                           gp.rate + 0.5 * icar_quadratic(params_.phi, *graph_));
        const auto& gt = spec_->tau_theta_prior;
        params_.tau_theta = gamma_shape_rate(rng, gt.shape + 0.5 * static_cast<double>(data_->n_regions()),
                                             gt.rate + 0.5 * params_.theta.squaredNorm());
    }

    // Eigenpairs of the ICAR structure matrix restricted to connected regions.
    void build_spectrum() {
        for (std::size_t i = 0; i < graph_->size(); ++i) {
            if (graph_->degree(i) > 0) linked_.push_back(i);
        }
        const auto m = static_cast<Eigen::Index>(linked_.size());
        std::vector<Eigen::Index> pos(graph_->size(), -1);
        for (Eigen::Index a = 0; a < m; ++a) pos[linked_[static_cast<std::size_t>(a)]] = a;
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = linked_[static_cast<std::size_t>(a)];
            q(a, a) = graph_->weight_sum(i);
            const auto nb = graph_->neighbors(i);
            const auto w = graph_->weights(i);
            for (std::size_t k = 0; k < nb.size(); ++k) q(a, pos[nb[k]]) -= w[k];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
        basis_ = eig.eigenvectors();
        spectrum_ = eig.eigenvalues().cwiseMax(0.0);
    }

    // log p(s | tau_phi, tau_theta) up to a constant, phi integrated out.
    // `proj` is the connected part of s in the eigenbasis; `rest` collects
    // |s|^2 over connected regions and theta^2 over isolated ones.
    double log_marginal(double tau_phi, double tau_theta, const Eigen::VectorXd& proj, double rest) const {
        double lm = 0.5 * static_cast<double>(icar_rank_) * std::log(tau_phi) +
                    0.5 * static_cast<double>(data_->n_regions()) * std::log(tau_theta) - 0.5 * tau_theta * rest;
        for (Eigen::Index k = 0; k < proj.size(); ++k) {
            const double d = tau_phi * spectrum_[k] + tau_theta;
            lm += -0.5 * std::log(d) + 0.5 * tau_theta * tau_theta * proj[k] * proj[k] / d;
        }
        return lm;
    }

    static double log_gamma_on_log_scale(double tau, const GammaPrior& g) { return g.shape * std::log(tau) - g.rate * tau; }

    void update_partition(Rng& rng, const SweepContext& ctx) {
        ++tun_.visits.partition;
        const auto m = static_cast<Eigen::Index>(linked_.size());
        if (m == 0) return;
        Eigen::VectorXd s(m);
        double rest = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = static_cast<Eigen::Index>(linked_[static_cast<std::size_t>(a)]);
            s[a] = params_.phi[i] + params_.theta[i];
            rest += s[a] * s[a];
        }
        for (std::size_t i = 0; i < graph_->size(); ++i) {
            if (graph_->degree(i) == 0) rest += params_.theta[static_cast<Eigen::Index>(i)] * params_.theta[static_cast<Eigen::Index>(i)];
        }
        const Eigen::VectorXd proj = basis_.transpose() * s;

        if (!tun_.options.fix_precisions) {
            const double tp = params_.tau_phi;
            const double tt = params_.tau_theta;
            const double step = tun_.partition.scale();
            const double tp_new = tp * std::exp(step * standard_normal(rng));
            const double tt_new = tt * std::exp(step * standard_normal(rng));
            const double lr = log_marginal(tp_new, tt_new, proj, rest) - log_marginal(tp, tt, proj, rest) +
                              log_gamma_on_log_scale(tp_new, spec_->tau_phi_prior) -
                              log_gamma_on_log_scale(tp, spec_->tau_phi_prior) +
                              log_gamma_on_log_scale(tt_new, spec_->tau_theta_prior) -
                              log_gamma_on_log_scale(tt, spec_->tau_theta_prior);
            const bool accept = std::isfinite(tp_new) && std::isfinite(tt_new) && tp_new > 0.0 && tt_new > 0.0 &&
                                !std::isnan(lr) && std::log(uniform01(rng)) < lr;
            ++tun_.partition.proposed;
            if (accept) {
                ++tun_.partition.accepted;
                params_.tau_phi = tp_new;
                params_.tau_theta = tt_new;
            }
            if (ctx.adapting) tun_.partition.adapt(accept, ctx.iteration, ctx.target_accept);
        }

        const double tp = params_.tau_phi;
        const double tt = params_.tau_theta;
        Eigen::VectorXd c(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double d = tp * spectrum_[k] + tt;
            c[k] = tt * proj[k] / d + standard_normal(rng) / std::sqrt(d);
        }
        const Eigen::VectorXd phi = basis_ * c;
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = static_cast<Eigen::Index>(linked_[static_cast<std::size_t>(a)]);
            params_.phi[i] = phi[a];
            params_.theta[i] = s[a] - phi[a];
        }
        translate_coefficients(rng);
    }

    // Region-level copy of each design column that is constant within regions.
    void build_region_design() {
        const auto n = data_->n_regions();
        for (Eigen::Index j = 0; j < design_.cols(); ++j) {
            Eigen::VectorXd x(static_cast<Eigen::Index>(n));
            bool constant = true;
            for (std::size_t i = 0; i < n && constant; ++i) {
                const auto& obs = obs_of_region_[i];
                if (obs.empty()) {
                    x[static_cast<Eigen::Index>(i)] = 0.0;
                    continue;
                }
                const double v = design_(static_cast<Eigen::Index>(obs.front()), j);
                for (const auto k : obs) constant = constant && design_(static_cast<Eigen::Index>(k), j) == v;
                x[static_cast<Eigen::Index>(i)] = v;
            }
            if (constant) region_design_.emplace_back(static_cast<std::size_t>(j), std::move(x));
        }
    }

    void translate_coefficients(Rng& rng) {
        for (const auto& [j, x] : region_design_) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double prec = spec_->beta_precision(j);
            const double dev = params_.beta[jj] - spec_->beta_mean(j);
            // beta_j += d, theta -= d x.
            {
                const double a = prec + params_.tau_theta * x.squaredNorm();
                const double b = -prec * dev + params_.tau_theta * x.dot(params_.theta);
                const double d = b / a + standard_normal(rng) / std::sqrt(a);
                params_.beta[jj] += d;
                params_.theta -= d * x;
            }
            if (j == 0) continue;  // the constant direction is the ICAR null space
            // beta_j += d, phi -= d x on linked regions, theta -= d x on isolated ones.
            {
                const double dev2 = params_.beta[jj] - spec_->beta_mean(j);
                double xqx = 0.0;
                double xqphi = 0.0;
                double xx_iso = 0.0;
                double xtheta_iso = 0.0;
                for (std::size_t i = 0; i < graph_->size(); ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    if (graph_->degree(i) == 0) {
                        xx_iso += x[ii] * x[ii];
                        xtheta_iso += x[ii] * params_.theta[ii];
                        continue;
                    }
                    double qx = graph_->weight_sum(i) * x[ii];
                    double qphi = graph_->weight_sum(i) * params_.phi[ii];
                    const auto nb = graph_->neighbors(i);
                    const auto w = graph_->weights(i);
                    for (std::size_t k = 0; k < nb.size(); ++k) {
                        qx -= w[k] * x[static_cast<Eigen::Index>(nb[k])];
                        qphi -= w[k] * params_.phi[static_cast<Eigen::Index>(nb[k])];
                    }
                    xqx += x[ii] * qx;
                    xqphi += x[ii] * qphi;
                }
                const double a = prec + params_.tau_phi * xqx + params_.tau_theta * xx_iso;
                const double b = -prec * dev2 + params_.tau_phi * xqphi + params_.tau_theta * xtheta_iso;
                const double d = b / a + standard_normal(rng) / std::sqrt(a);
                params_.beta[jj] += d;
                for (std::size_t i = 0; i < graph_->size(); ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    if (graph_->degree(i) == 0) params_.theta[ii] -= d * x[ii];
                    else params_.phi[ii] -= d * x[ii];
                }
            }
        }
    }

    const ModelSpec* spec_;
    const Dataset* data_;
    const AdjacencyGraph* graph_;
    Params params_;
    Tunables tun_;
    Eigen::MatrixXd design_;
    Eigen::VectorXd log_norm_;
    Eigen::VectorXd eta_;
    Eigen::VectorXd mu_;
    std::vector<std::vector<std::size_t>> obs_of_region_;
    std::vector<double> region_weight_;
    std::vector<double> region_count_;
    std::vector<std::size_t> linked_;
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> region_design_;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd spectrum_;
    std::size_t icar_rank_ = 0;
    std::vector<double> burn_in_scales_;
};

/// Starting point: intercept log(sum y / sum E), everything else 0, precisions 1.
inline Params initial_params(const ModelSpec& spec, const Dataset& data) {
    Params p;
    p.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(beta_size(spec.tier, data.n_covariates())));
    double ysum = 0.0;
    double esum = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        ysum += static_cast<double>(data.counts[k]);
        esum += data.expected[k];
    }
    p.beta[0] = std::log(ysum / esum);
    if (has_random_effects(spec.tier)) {
        p.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n_regions()));
        p.theta = p.phi;
    }
    p.tau_phi = 1.0;
    p.tau_theta = 1.0;
    return p;
}

/// Initial proposal scales of 2.4 conditional standard deviations. Beta uses
/// the Fisher information at `at`; region blocks already step in units of
/// their conditional scale.
inline Tunables initial_tunables(const ModelSpec& spec, const Dataset& data,
                                 const AdjacencyGraph& /*graph*/, const Params& at,
                                 SweepOptions options = {}) {
    Tunables t;
    t.options = options;
    const Eigen::VectorXd eta = linear_predictor(spec, at, data);
    Eigen::VectorXd mu(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
        mu[k] = options.use_likelihood ? data.expected[static_cast<std::size_t>(k)] * std::exp(eta[k]) : 0.0;
    }
    const auto nb = static_cast<std::size_t>(at.beta.size());
    for (std::size_t j = 0; j < nb; ++j) {
        double info = spec.beta_precision(j);
        for (std::size_t k = 0; k < data.size(); ++k) {
            const double x = design_value(data, spec.tier, k, j);
            info += mu[static_cast<Eigen::Index>(k)] * x * x;
        }
        t.beta.emplace_back(std::min(2.4 / std::sqrt(info), 10.0));
    }
    if (has_random_effects(spec.tier)) {
        t.phi.assign(data.n_regions(), AdaptiveScale(2.4));
        t.theta.assign(data.n_regions(), AdaptiveScale(2.4));
    }
    return t;
}

/// One full scan from `state`; proposal scales and visit counters live in `tunables`.
inline Params gibbs_sweep(const Params& state, const ModelSpec& spec, const Dataset& data,
                          const AdjacencyGraph& graph, Tunables& tunables, Rng& rng,
                          const SweepContext& ctx = {}) {
    DiseaseSampler sampler(spec, data, graph, state, std::move(tunables));
    sampler.sweep(rng, ctx);
    tunables = sampler.tunables();
    return sampler.params();
}

struct ChainSet {
    ModelTier tier = ModelTier::SpatialBYM;
    std::size_t n_covariates = 0;
    std::size_t n_regions = 0;
    McmcConfig config;
    std::vector<std::uint64_t> seeds;
    /// draws[c][m]: stored draw m of chain c.
    std::vector<std::vector<Params>> draws;
    std::vector<std::vector<double>> deviance;
    std::vector<AcceptanceLedger> acceptance;
    std::vector<ScaleLedger> scales;

    std::size_t n_chains() const noexcept { return draws.size(); }
    std::size_t kept_per_chain() const noexcept { return draws.empty() ? 0 : draws.front().size(); }
    std::size_t total_kept() const noexcept { return n_chains() * kept_per_chain(); }

    friend bool operator==(const ChainSet& a, const ChainSet& b) {
        return a.tier == b.tier && a.n_covariates == b.n_covariates && a.n_regions == b.n_regions &&
               a.config == b.config && a.seeds == b.seeds && a.draws == b.draws &&
               a.deviance == b.deviance && a.acceptance == b.acceptance && a.scales == b.scales;
    }
};

inline void check_consistency(const ModelSpec& spec, const Dataset& data, const AdjacencyGraph& graph) {
    data.validate();
    validate(spec, beta_size(spec.tier, data.n_covariates()));
    if (spec.tier == ModelTier::SpatioTemporal && !data.has_time()) {
        throw DataError("spatio-temporal tier requires a period column");
    }
    if (!has_random_effects(spec.tier)) return;
    if (graph.size() != data.n_regions()) {
        throw DataError("graph has " + std::to_string(graph.size()) + " regions, dataset has " +
                        std::to_string(data.n_regions()));
    }
    for (std::size_t i = 0; i < graph.size(); ++i) {
        if (graph.region(i).id != data.region_ids[i]) {
            throw DataError("dataset region '" + data.region_ids[i] + "' is not at graph position " +
                            std::to_string(i));
        }
    }
}

/// Runs the configured chains. Deterministic given the inputs and config.seed.
inline ChainSet run_chains(const ModelSpec& spec, const Dataset& data, const AdjacencyGraph& graph,
                           const McmcConfig& config, SweepOptions options = {}) {
    config.validate();
    check_consistency(spec, data, graph);

    const Params init = initial_params(spec, data);
    if (!init.beta.allFinite()) {
        throw SamplerError("non-finite posterior at initialization in block 'beta'");
    }
    if (options.use_likelihood) {
        bool overflow = false;
        const double ll = poisson_log_likelihood(data, linear_predictor(spec, init, data), overflow);
        if (!std::isfinite(ll)) {
            throw SamplerError("non-finite posterior at initialization in block 'likelihood'");
        }
    }
    if (has_random_effects(spec.tier) &&
        !std::isfinite(icar_log_pairwise(init.phi, graph, init.tau_phi))) {
        throw SamplerError("non-finite posterior at initialization in block 'phi'");
    }
    const Tunables tun = initial_tunables(spec, data, graph, init, options);

    auto runs = run_sampler_chains(
        [&](std::size_t) { return DiseaseSampler(spec, data, graph, init, tun); }, config);

    ChainSet out;
    out.tier = spec.tier;
    out.n_covariates = data.n_covariates();
    out.n_regions = data.n_regions();
    out.config = config;
    for (auto& run : runs) {
        out.seeds.push_back(run.seed);
        std::vector<Params> params;
        std::vector<double> dev;
        params.reserve(run.draws.size());
        dev.reserve(run.draws.size());
        for (auto& d : run.draws) {
            params.push_back(std::move(d.params));
            dev.push_back(d.deviance);
        }
        out.draws.push_back(std::move(params));
        out.deviance.push_back(std::move(dev));
        out.acceptance.push_back(run.sampler.acceptance());
        out.scales.push_back(run.sampler.scale_ledger());
    }
    return out;
}

}  // namespace bdm
