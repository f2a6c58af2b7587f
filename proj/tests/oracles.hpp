#pragma once

// Independent reference computations used by unit and acceptance tests.

#include "aoi/env.hpp"
#include "aoi/net.hpp"
#include "aoi/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracles {

/// Straight transcription of the age recursion
///   A_n(i+1) = I_n(i)·b(i) + (1 - I_n(i))·(A_n(i) + b(i)),
///   b(i) = Σ_{k=1..r} L_a / λ_k,  r ~ Geometric(p) on {1, 2, ...}.
/// Draws from `engine` in the same order as the simulator: the attempt count
/// first (nothing when p == 1), then one rate per attempt (nothing for a
/// constant rate).
class NaiveSim {
public:
    NaiveSim(const aoi::EnvConfig& config, std::uint64_t seed)
        : cfg_(config), engine_(aoi::make_rng(seed)), ages_(config.sensors.size(), 0.0) {}

    const std::vector<double>& step(std::size_t a)
    {
        int r = 1;
        if (cfg_.success_prob < 1.0) {
            std::geometric_distribution<std::uint32_t> fails(cfg_.success_prob);
            r = 1 + static_cast<int>(fails(engine_));
        }
        double b = 0.0;
        for (int k = 0; k < r; ++k) {
            double lambda = cfg_.rate_model.lo();
            if (cfg_.rate_model.kind() == aoi::RateModel::Kind::UniformRange) {
                lambda = std::uniform_real_distribution<double>(cfg_.rate_model.lo(), cfg_.rate_model.hi())(engine_);
            }
            b += cfg_.sensors[a].packet_len / lambda;
        }
        for (std::size_t n = 0; n < ages_.size(); ++n) {
            const double I = (n == a) ? 1.0 : 0.0;
            ages_[n] = I * b + (1.0 - I) * (ages_[n] + b);
        }
        return ages_;
    }

private:
    aoi::EnvConfig cfg_;
    aoi::Rng engine_;
    std::vector<double> ages_;
};

struct DynamicsCheck {
    std::uint64_t steps = 0;
    std::uint64_t mismatches = 0;
};

/// Drives the simulator and NaiveSim with the same random action sequence over
/// `configs` random configurations of `steps` tasks each; counts any task at
/// which any age differs in any bit.
template <class RandomEnv>
DynamicsCheck dynamics_vs_naive(int configs, std::uint64_t steps, std::uint64_t seed, RandomEnv&& random_env)
{
    DynamicsCheck out;
    std::mt19937_64 meta(seed);
    for (int c = 0; c < configs; ++c) {
        const aoi::EnvConfig cfg = random_env(meta, steps);
        const std::uint64_t env_seed = meta();
        aoi::Environment env(cfg);
        env.reset(env_seed);
        NaiveSim naive(cfg, env_seed);
        std::mt19937_64 actions(meta());
        for (std::uint64_t i = 0; i < steps; ++i) {
            const std::size_t a = actions() % cfg.sensors.size();
            env.step(a);
            const auto& ref = naive.step(a);
            ++out.steps;
            if (!std::equal(ref.begin(), ref.end(), env.state().ages.begin())) {
                ++out.mismatches;
            }
        }
    }
    return out;
}

struct GofResult {
    double statistic = 0.0;
    double critical = 0.0;  ///< chi-squared quantile at 1 - alpha
    std::size_t dof = 0;
    double mean = 0.0;
};

/// Pearson chi-squared test of `samples` draws of `draw()` against
/// Pr[k] = (1-p)^(k-1) p. Bins k = 1..K-1 plus a tail bin k >= K, with K the
/// first k whose expected count falls below 5.
template <class Draw>
GofResult geometric_gof(double p, std::size_t samples, double alpha, Draw&& draw)
{
    std::size_t tail = 1;
    while (samples * p * std::pow(1.0 - p, static_cast<double>(tail - 1)) >= 5.0) {
        ++tail;
    }
    std::vector<double> observed(tail + 1, 0.0);
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::uint64_t k = draw();
        sum += static_cast<double>(k);
        observed[std::min<std::uint64_t>(k, tail)] += 1.0;
    }
    GofResult res;
    for (std::size_t k = 1; k <= tail; ++k) {
        const double pk = (k < tail) ? p * std::pow(1.0 - p, static_cast<double>(k - 1))
                                     : std::pow(1.0 - p, static_cast<double>(tail - 1));
        const double expected = pk * static_cast<double>(samples);
        res.statistic += (observed[k] - expected) * (observed[k] - expected) / expected;
    }
    res.dof = tail - 1;
    res.critical = boost::math::quantile(boost::math::chi_squared(static_cast<double>(res.dof)), 1.0 - alpha);
    res.mean = sum / static_cast<double>(samples);
    // observed[0] must stay empty: k = 0 is not in the support.
    if (observed[0] != 0.0) {
        res.statistic = INFINITY;
    }
    return res;
}

/// Actor objective log π(a|s)·A + ρ·H(π(·|s)) evaluated through forward().
inline double actor_objective(const aoi::NetParams& params, const std::vector<double>& obs, std::size_t a,
                              double adv, double rho)
{
    const aoi::ForwardOut f = aoi::forward(params, obs);
    double h = 0.0;
    for (double p : f.probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::log(f.probs[a]) * adv + rho * h;
}

struct GradCheck {
    int cases = 0;
    double max_rel_error = 0.0;
};

/// Central differences with step `h` on every parameter, for both the actor
/// objective and the critic's descent direction 2·td·V(s), against
/// backward(). Error per case and head: ||g - fd|| / max(||g||, ||fd||).
inline GradCheck gradient_check(const aoi::NetArch& arch, int cases, double h, std::uint64_t seed)
{
    GradCheck out;
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < cases; ++c) {
        aoi::NetParams params = aoi::init_params(arch, g());
        // Non-zero biases so every block is exercised.
        for (double& b : params.conv_b()) b = 0.2 * (u(g) - 0.5);
        for (double& b : params.hidden_b()) b = 0.2 * (u(g) - 0.5);
        for (double& b : params.policy_b()) b = 0.2 * (u(g) - 0.5);
        for (double& b : params.value_b()) b = 0.2 * (u(g) - 0.5);
        std::vector<double> obs(arch.obs_size());
        for (double& x : obs) x = 0.1 + u(g);
        const std::size_t a = g() % arch.n_sensors;
        const double adv = 4.0 * (u(g) - 0.5);
        const double td = 4.0 * (u(g) - 0.5);
        const double rho = u(g);

        const aoi::ForwardOut cached = aoi::forward(params, obs);
        const aoi::Gradients grads = aoi::backward(params, cached, a, adv, td, rho);

        std::vector<double> fd_actor(params.size()), fd_critic(params.size());
        auto flat = params.flat();
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = flat[i];
            flat[i] = keep + h;
            const double fa_plus = actor_objective(params, obs, a, adv, rho);
            const double v_plus = aoi::forward(params, obs).value;
            flat[i] = keep - h;
            const double fa_minus = actor_objective(params, obs, a, adv, rho);
            const double v_minus = aoi::forward(params, obs).value;
            flat[i] = keep;
            fd_actor[i] = (fa_plus - fa_minus) / (2.0 * h);
            fd_critic[i] = 2.0 * td * (v_plus - v_minus) / (2.0 * h);
        }

        auto rel = [](const std::vector<double>& x, const std::vector<double>& y) {
            double diff = 0.0, nx = 0.0, ny = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                diff += (x[i] - y[i]) * (x[i] - y[i]);
                nx += x[i] * x[i];
                ny += y[i] * y[i];
            }
            const double denom = std::max(std::sqrt(nx), std::sqrt(ny));
            return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
        };
        out.max_rel_error = std::max({out.max_rel_error, rel(grads.actor, fd_actor), rel(grads.critic, fd_critic)});
        ++out.cases;
    }
    return out;
}

/// Reduced architecture for gradient checks.
inline aoi::NetArch small_arch()
{
    aoi::NetArch arch;
    arch.n_sensors = 3;
    arch.history_len = 6;
    arch.conv_filters = 4;
    arch.conv_kernel = 3;
    arch.conv_stride = 1;
    arch.hidden_units = 16;
    return arch;
}

} // namespace oracles
