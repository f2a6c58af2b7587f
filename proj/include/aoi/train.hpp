#pragma once

#include "aoi/env.hpp"
#include "aoi/errors.hpp"
#include "aoi/metrics.hpp"
#include "aoi/net.hpp"
#include "aoi/policy.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

namespace aoi {

struct TrainConfig {
    double actor_lr = 0.01;
    double critic_lr = 0.01;
    double discount = 0.99;
    double entropy_start = 5.0;
    /// Steps over which ρ decays linearly to 0. 0 means the whole run
    /// (episodes · episode_len).
    std::uint64_t entropy_decay_steps = 0;
    std::size_t n_workers = 4;
    std::uint64_t episodes = 1000;
    std::uint64_t episode_len = 1000;
    /// Tasks per rollout between global syncs. 0 means one episode.
    std::uint64_t update_period = 0;
    /// Multiplier on the environment reward inside the advantage and TD
    /// target. The environment reward itself is never rescaled.
    double reward_scale = 1.0;
    /// Max L2 norm for each of the actor and critic gradients; 0 disables.
    double grad_clip = 0.0;
    std::uint64_t seed = 0;

    std::uint64_t total_steps() const noexcept { return episodes * episode_len; }
    std::uint64_t rollout_len() const noexcept { return update_period == 0 ? episode_len : update_period; }
    std::uint64_t decay_steps() const noexcept { return entropy_decay_steps == 0 ? total_steps() : entropy_decay_steps; }

    /// Throws ConfigError ("train.*").
    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct Transition {
    Observation obs;
    std::size_t action = 0;
    double reward = 0.0;  ///< environment reward, unscaled
    Observation next_obs;
    double value = 0.0;
    double next_value = 0.0;
    bool done = false;
};

/// Authoritative parameters shared by all workers.
class GlobalParams {
public:
    explicit GlobalParams(NetParams initial);

    NetParams snapshot() const;
    std::uint64_t version() const;

    /// θ += actor_lr·g.actor + critic_lr·g.critic under the lock. Throws
    /// NonFiniteUpdate, leaving the parameters untouched, if the gradients or
    /// the resulting parameters are not finite.
    std::uint64_t apply(const Gradients& grads, double actor_lr, double critic_lr);

private:
    mutable std::mutex mutex_;
    NetParams params_;
    std::uint64_t version_ = 0;
};

class NonFiniteUpdate : public Error {
public:
    using Error::Error;
};

/// One-step TD advantage R + γ·V(s')·(1 - done) - V(s).
double advantage(double reward, double next_value, double value, double discount, bool done);

/// Linear decay from entropy_start to 0 over config.decay_steps(), clamped.
double entropy_weight(std::uint64_t step, const TrainConfig& config);

/// Up to `len` tasks (fewer if the episode ends) with actions drawn by `mode`
/// from the local parameters. Appends per-task records to `trace` when given.
std::vector<Transition> collect_rollout(Environment& env, const NetParams& local, std::size_t len, Rng& rng,
                                        ActionMode mode = ActionMode::Sample, Trace* trace = nullptr);

/// Sum over the rollout of backward() with advantage = td_error computed from
/// the scaled reward and the stored critic values. Empty rollout → UsageError.
Gradients compute_update(const std::vector<Transition>& rollout, const NetParams& local, const TrainConfig& config,
                         double entropy_weight);

/// Clips per config.grad_clip and commits. Returns the new version.
std::uint64_t apply_update(GlobalParams& global, Gradients grads, const TrainConfig& config);

struct EpisodeRecord {
    std::uint64_t episode = 0;
    std::size_t worker = 0;
    double mean_reward = 0.0;
    double entropy_weight = 0.0;
    double objective = 0.0;
    std::uint64_t version = 0;
};

struct TrainingStats {
    std::vector<EpisodeRecord> episodes;  ///< sorted by episode index
    std::uint64_t updates = 0;
    std::uint64_t rejected_updates = 0;
    bool aborted = false;
};

struct TrainResult {
    NetParams params;
    std::uint64_t version = 0;
    TrainingStats stats;
};

struct TrainHooks {
    /// Called after each completed episode, serialized across workers.
    std::function<void(const EpisodeRecord&)> on_episode;
    /// Checked at episode boundaries; when set, workers finish their current
    /// episode and stop.
    const std::atomic<bool>* stop = nullptr;
};

/// Asynchronous advantage actor-critic. Each worker owns an environment and a
/// parameter snapshot and loops rollout → gradient → global commit → refresh.
/// With one worker the result is a deterministic function of the inputs.
TrainResult train(const EnvConfig& env_config, const NetArch& arch, const TrainConfig& config,
                  const TrainHooks& hooks = {});

/// Environment seed for training episode `episode`.
std::uint64_t training_episode_seed(std::uint64_t seed, std::uint64_t episode);

} // namespace aoi
