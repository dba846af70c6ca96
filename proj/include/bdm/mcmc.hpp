#pragma once

// Model-agnostic MCMC machinery: run configuration, adaptive random-walk
// Metropolis kernel and the multi-chain driver.
//
// A sampler plugged into run_sampler_chains() provides
//
//   void sweep(Rng& rng, const SweepContext& ctx);   // one full Gibbs scan
//   Draw record() const;                             // snapshot to store
//   void end_burn_in();                              // optional
//
// Chain c draws from the substream substream_seed(config.seed, c), so the
// output does not depend on how chains are scheduled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "bdm/error.hpp"
#include "bdm/rng.hpp"

namespace bdm {

struct McmcConfig {
    std::size_t n_chains = 2;
    /// Post-burn-in iterations per chain.
    std::size_t n_iterations = 20000;
    std::size_t burn_in = 4000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    /// Proposal scales adapt during the first adapt_window iterations only.
    std::size_t adapt_window = 2000;
    double target_accept = 0.44;
    /// Run chains on separate threads.
    bool parallel = true;

    std::size_t kept_per_chain() const noexcept { return n_iterations / thin; }
    /// 1-based iteration number of the first stored draw.
    std::size_t start_iteration() const noexcept { return burn_in + thin; }
    /// 1-based iteration number of stored draw m (0-based).
    std::size_t iteration_of(std::size_t m) const noexcept { return burn_in + (m + 1) * thin; }

    void validate() const {
        if (n_chains < 1) throw ConfigError("at least one chain is required", "mcmc.chains");
        if (n_iterations < 1) throw ConfigError("n_iterations must be at least 1", "mcmc.iterations");
        if (thin < 1) throw ConfigError("thin must be at least 1", "mcmc.thin");
        if (n_iterations < thin) throw ConfigError("thin exceeds n_iterations", "mcmc.thin");
        if (burn_in < adapt_window) {
            throw ConfigError("burn_in must be at least adapt_window", "mcmc.adapt_window");
        }
        if (!(target_accept > 0.0 && target_accept < 1.0)) {
            throw ConfigError("target_accept must lie in (0, 1)", "mcmc.target_accept");
        }
    }

    friend bool operator==(const McmcConfig&, const McmcConfig&) = default;
};

struct SweepContext {
    /// 0-based iteration including burn-in.
    std::size_t iteration = 0;
    bool adapting = false;
    double target_accept = 0.44;
};

/// Gaussian random-walk proposal scale with Robbins-Monro adaptation on the log scale.
struct AdaptiveScale {
    double log_scale = 0.0;
    std::size_t proposed = 0;
    std::size_t accepted = 0;

    AdaptiveScale() = default;
    explicit AdaptiveScale(double scale) : log_scale(std::log(scale)) {}

    double scale() const noexcept { return std::exp(log_scale); }
    double acceptance_rate() const noexcept {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
    void reset_counts() noexcept { proposed = accepted = 0; }

    void adapt(bool was_accepted, std::size_t iteration, double target) noexcept {
        const double gain = 1.0 / std::pow(static_cast<double>(iteration) + 1.0, 0.6);
        log_scale += gain * ((was_accepted ? 1.0 : 0.0) - target);
        log_scale = std::clamp(log_scale, -30.0, 10.0);
    }
};

/// One random-walk Metropolis step on the scalar `x`. `log_ratio(proposal)`
/// returns log pi(proposal) - log pi(x) and may return -inf. The step size is
/// `unit * scale`; `unit` must not depend on `x` itself or the proposal stops
/// being symmetric.
template <class LogRatio>
bool rw_metropolis(double& x, AdaptiveScale& scale, Rng& rng, const SweepContext& ctx,
                   LogRatio&& log_ratio, double unit = 1.0) {
    const double proposal = x + unit * scale.scale() * standard_normal(rng);
    const double lr = log_ratio(proposal);
    const double u = uniform01(rng);
    const bool accept = !std::isnan(lr) && std::log(u) < lr;
    if (accept) x = proposal;
    ++scale.proposed;
    if (accept) ++scale.accepted;
    if (ctx.adapting) scale.adapt(accept, ctx.iteration, ctx.target_accept);
    return accept;
}

template <class Sampler>
using draw_t = std::decay_t<decltype(std::declval<const Sampler&>().record())>;

template <class Sampler>
struct ChainRun {
    std::uint64_t seed = 0;
    std::vector<draw_t<Sampler>> draws;
    Sampler sampler;
};

template <class Sampler>
ChainRun<Sampler> run_single_chain(Sampler sampler, const McmcConfig& config, std::size_t chain) {
    const auto seed = substream_seed(config.seed, chain);
    Rng rng(seed);
    std::vector<draw_t<Sampler>> draws;
    draws.reserve(config.kept_per_chain());
    const std::size_t total = config.burn_in + config.kept_per_chain() * config.thin;
    for (std::size_t it = 0; it < total; ++it) {
        if (it == config.burn_in) {
            if constexpr (requires { sampler.end_burn_in(); }) sampler.end_burn_in();
        }
        const SweepContext ctx{it, it < config.adapt_window, config.target_accept};
        sampler.sweep(rng, ctx);
        if (it >= config.burn_in && (it - config.burn_in + 1) % config.thin == 0) {
            draws.push_back(sampler.record());
        }
    }
    if (config.burn_in == total) {
        if constexpr (requires { sampler.end_burn_in(); }) sampler.end_burn_in();
    }
    return ChainRun<Sampler>{seed, std::move(draws), std::move(sampler)};
}

/// Runs config.n_chains chains; `make(chain)` builds the sampler for a chain.
template <class Factory>
auto run_sampler_chains(Factory&& make, const McmcConfig& config) {
    config.validate();
    using Sampler = std::decay_t<decltype(make(std::size_t{0}))>;
    std::vector<std::optional<ChainRun<Sampler>>> slots(config.n_chains);
    std::vector<std::exception_ptr> errors(config.n_chains);

    const auto work = [&](std::size_t c) {
        try {
            slots[c].emplace(run_single_chain(make(c), config, c));
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    if (config.parallel && config.n_chains > 1) {
        std::vector<std::thread> threads;
        threads.reserve(config.n_chains);
        for (std::size_t c = 0; c < config.n_chains; ++c) threads.emplace_back(work, c);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t c = 0; c < config.n_chains; ++c) work(c);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<ChainRun<Sampler>> out;
    out.reserve(config.n_chains);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace bdm
