#pragma once

// Normal mean with known variance, sampled by the same adaptive random-walk
// kernel and multi-chain driver the disease models use. The posterior is
// N(post_mean, post_var) in closed form.

#include <cmath>
#include <vector>

#include "bdm/diagnostics.hpp"
#include "bdm/mcmc.hpp"
#include "bdm/rng.hpp"

namespace harness {

struct NormalMeanProblem {
    std::vector<double> y;
    double sigma2 = 1.0;
    double prior_mean = 0.0;
    double prior_var = 100.0;

    double post_var() const { return 1.0 / (1.0 / prior_var + static_cast<double>(y.size()) / sigma2); }
    double post_mean() const {
        double s = 0.0;
        for (const double v : y) s += v;
        return post_var() * (prior_mean / prior_var + s / sigma2);
    }
    double log_post(double mu) const {
        double lp = -0.5 * (mu - prior_mean) * (mu - prior_mean) / prior_var;
        for (const double v : y) lp -= 0.5 * (v - mu) * (v - mu) / sigma2;
        return lp;
    }
};

class NormalMeanSampler {
public:
    explicit NormalMeanSampler(const NormalMeanProblem& p) : p_(&p), mu_(0.0), scale_(1.0) {}

    void sweep(bdm::Rng& rng, const bdm::SweepContext& ctx) {
        const double current = mu_;
        const double lc = p_->log_post(current);
        bdm::rw_metropolis(mu_, scale_, rng, ctx, [&](double prop) { return p_->log_post(prop) - lc; });
    }
    double record() const { return mu_; }
    double scale() const { return scale_.scale(); }

private:
    const NormalMeanProblem* p_;
    double mu_;
    bdm::AdaptiveScale scale_;
};

struct ConjugateCheck {
    double mean = 0.0;
    double var = 0.0;
    double mean_err = 0.0;
    double var_err = 0.0;
    double exact_mean = 0.0;
    double exact_var = 0.0;
    bool pass() const {
        return std::abs(mean - exact_mean) < 3.0 * mean_err && std::abs(var - exact_var) < 3.0 * var_err;
    }
};

/// 20,000 kept draws from one chain; Monte Carlo errors by batch means.
inline ConjugateCheck run_conjugate_check(std::uint64_t seed) {
    NormalMeanProblem p;
    bdm::Rng data_rng(bdm::substream_seed(seed, 999));
    for (int k = 0; k < 50; ++k) p.y.push_back(1.5 + 2.0 * bdm::standard_normal(data_rng));
    p.sigma2 = 4.0;
    bdm::McmcConfig cfg;
    cfg.n_chains = 1;
    cfg.n_iterations = 20000;
    cfg.burn_in = 2000;
    cfg.adapt_window = 1000;
    cfg.seed = seed;
    const auto runs = bdm::run_sampler_chains([&](std::size_t) { return NormalMeanSampler(p); }, cfg);
    const auto& x = runs.front().draws;

    ConjugateCheck c;
    c.exact_mean = p.post_mean();
    c.exact_var = p.post_var();
    c.mean = bdm::sample_mean(x);
    c.var = bdm::sample_variance(x);
    c.mean_err = bdm::mc_error(x);
    std::vector<double> sq;
    for (const double v : x) sq.push_back((v - c.mean) * (v - c.mean));
    c.var_err = bdm::mc_error(sq);
    return c;
}

}  // namespace harness
