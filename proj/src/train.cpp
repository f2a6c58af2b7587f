#include "aoi/train.hpp"

#include "aoi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace aoi {

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954;       // network init
constexpr std::uint64_t kWorkerStream = 0x574f524b0000; // + worker id
constexpr std::uint64_t kEpisodeStream = 0x45504953;    // + episode id, shifted

void clip_norm(std::vector<double>& g, double max_norm)
{
    double sq = 0.0;
    for (double v : g) {
        sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (double& v : g) {
            v *= s;
        }
    }
}

} // namespace

void TrainConfig::validate() const
{
    auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(msg, "train." + key); };
    if (!(actor_lr >= 0.0) || !std::isfinite(actor_lr)) fail("actor_lr", "must be >= 0");
    if (!(critic_lr >= 0.0) || !std::isfinite(critic_lr)) fail("critic_lr", "must be >= 0");
    if (!(discount >= 0.0 && discount <= 1.0)) fail("discount", "must lie in [0, 1]");
    if (!(entropy_start >= 0.0) || !std::isfinite(entropy_start)) fail("entropy_start", "must be >= 0");
    if (n_workers < 1) fail("n_workers", "must be >= 1");
    if (episodes < 1) fail("episodes", "must be >= 1");
    if (episode_len < 1) fail("episode_len", "must be >= 1");
    if (!(reward_scale > 0.0) || !std::isfinite(reward_scale)) fail("reward_scale", "must be > 0");
    if (!(grad_clip >= 0.0) || !std::isfinite(grad_clip)) fail("grad_clip", "must be >= 0");
}

GlobalParams::GlobalParams(NetParams initial) : params_(std::move(initial)) {}

NetParams GlobalParams::snapshot() const
{
    std::lock_guard lock(mutex_);
    return params_;
}

std::uint64_t GlobalParams::version() const
{
    std::lock_guard lock(mutex_);
    return version_;
}

std::uint64_t GlobalParams::apply(const Gradients& grads, double actor_lr, double critic_lr)
{
    if (grads.actor.size() != grads.critic.size()) {
        throw DimensionError("actor and critic gradients differ in size");
    }
    if (!grads.all_finite()) {
        throw NonFiniteUpdate("gradient contains NaN or Inf; update rejected");
    }
    std::lock_guard lock(mutex_);
    if (grads.size() != params_.size()) {
        throw DimensionError("gradient has " + std::to_string(grads.size()) + " entries, parameters have " +
                             std::to_string(params_.size()));
    }
    auto w = params_.flat();
    std::vector<double> next(w.begin(), w.end());
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] += actor_lr * grads.actor[i] + critic_lr * grads.critic[i];
        if (!std::isfinite(next[i])) {
            throw NonFiniteUpdate("update would make parameter " + std::to_string(i) + " non-finite; rejected");
        }
    }
    std::copy(next.begin(), next.end(), w.begin());
    return ++version_;
}

double advantage(double reward, double next_value, double value, double discount, bool done)
{
    return reward + discount * next_value * (done ? 0.0 : 1.0) - value;
}

double entropy_weight(std::uint64_t step, const TrainConfig& config)
{
    const std::uint64_t span = config.decay_steps();
    if (span == 0 || step >= span) {
        return 0.0;
    }
    const double remaining = 1.0 - static_cast<double>(step) / static_cast<double>(span);
    return config.entropy_start * remaining;
}

std::vector<Transition> collect_rollout(Environment& env, const NetParams& local, std::size_t len, Rng& rng,
                                        ActionMode mode, Trace* trace)
{
    std::vector<Transition> rollout;
    if (len == 0 || env.done()) {
        return rollout;
    }
    rollout.reserve(len);
    Observation obs = env.observation();
    ForwardOut current = forward(local, obs);
    while (rollout.size() < len && !env.done()) {
        const std::size_t action = mode == ActionMode::Argmax ? argmax_index(current.logits)
                                                             : sample_categorical(current.probs, rng);
        StepOutcome out = env.step(action);
        if (trace != nullptr) {
            trace->append(env.state().task_index - 1, action, env.state().ages, out.reward, out.tx_duration);
        }
        ForwardOut next = forward(local, out.observation);

        Transition t;
        t.obs = std::move(obs);
        t.action = action;
        t.reward = out.reward;
        t.next_obs = out.observation;
        t.value = current.value;
        t.next_value = next.value;
        t.done = out.done;
        rollout.push_back(std::move(t));

        obs = std::move(out.observation);
        current = std::move(next);
    }
    return rollout;
}

Gradients compute_update(const std::vector<Transition>& rollout, const NetParams& local, const TrainConfig& config,
                         double rho)
{
    if (rollout.empty()) {
        throw UsageError("compute_update needs a non-empty rollout");
    }
    Gradients grads = Gradients::zeros(local.size());
    for (const Transition& t : rollout) {
        const double d = advantage(config.reward_scale * t.reward, t.next_value, t.value, config.discount, t.done);
        const ForwardOut cached = forward(local, t.obs);
        accumulate_backward(local, cached, t.action, d, d, rho, grads);
    }
    return grads;
}

std::uint64_t apply_update(GlobalParams& global, Gradients grads, const TrainConfig& config)
{
    if (config.grad_clip > 0.0) {
        clip_norm(grads.actor, config.grad_clip);
        clip_norm(grads.critic, config.grad_clip);
    }
    return global.apply(grads, config.actor_lr, config.critic_lr);
}

std::uint64_t training_episode_seed(std::uint64_t seed, std::uint64_t episode)
{
    Rng rng = make_rng(seed, (kEpisodeStream << 32) + episode);
    return rng();
}

TrainResult train(const EnvConfig& env_config, const NetArch& arch, const TrainConfig& config,
                  const TrainHooks& hooks)
{
    env_config.validate();
    arch.validate();
    config.validate();
    if (arch.n_sensors != env_config.num_sensors()) {
        throw ConfigError("network has " + std::to_string(arch.n_sensors) + " outputs but the environment has " +
                              std::to_string(env_config.num_sensors()) + " sensors",
                          "arch.n_sensors");
    }
    if (arch.history_len != env_config.history_len) {
        throw ConfigError("must equal env.history_len", "arch.history_len");
    }

    Rng init_rng = make_rng(config.seed, kInitStream);
    GlobalParams global(init_params(arch, init_rng()));

    EnvConfig worker_env = env_config;
    worker_env.horizon = config.episode_len;

    std::atomic<std::uint64_t> next_episode{0};
    std::atomic<bool> failed{false};
    std::atomic<std::uint64_t> rejected{0};
    std::atomic<std::uint64_t> updates{0};
    std::mutex record_mutex;
    std::vector<EpisodeRecord> records;
    bool aborted = false;

    auto stop_requested = [&] {
        return failed.load() || (hooks.stop != nullptr && hooks.stop->load());
    };

    auto worker = [&](std::size_t id) {
        Environment env(worker_env);
        Rng rng = make_rng(config.seed, kWorkerStream + id);
        const std::size_t period = static_cast<std::size_t>(config.rollout_len());
        while (!stop_requested()) {
            const std::uint64_t e = next_episode.fetch_add(1);
            if (e >= config.episodes) {
                break;
            }
            env.reset(training_episode_seed(config.seed, e));
            NetParams local = global.snapshot();
            Trace trace(env.num_sensors());
            double rho = 0.0;
            std::uint64_t version = 0;
            while (!env.done()) {
                rho = entropy_weight(e * config.episode_len + env.state().task_index, config);
                const auto rollout = collect_rollout(env, local, period, rng, ActionMode::Sample, &trace);
                try {
                    version = apply_update(global, compute_update(rollout, local, config, rho), config);
                    updates.fetch_add(1);
                } catch (const NonFiniteUpdate&) {
                    rejected.fetch_add(1);
                }
                local = global.snapshot();
            }

            EpisodeRecord rec;
            rec.episode = e;
            rec.worker = id;
            rec.entropy_weight = rho;
            rec.version = version;
            double reward_sum = 0.0;
            for (std::size_t i = 0; i < trace.size(); ++i) {
                reward_sum += trace.reward(i);
            }
            rec.mean_reward = reward_sum / static_cast<double>(trace.size());
            rec.objective = objective(trace, env.config().sensors);

            std::lock_guard lock(record_mutex);
            records.push_back(rec);
            if (hooks.on_episode) {
                hooks.on_episode(rec);
            }
        }
    };

    if (config.n_workers == 1) {
        worker(0);
    } else {
        std::vector<std::exception_ptr> errors(config.n_workers);
        std::vector<std::thread> threads;
        threads.reserve(config.n_workers);
        for (std::size_t w = 0; w < config.n_workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    worker(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                    failed.store(true);
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        for (auto& err : errors) {
            if (err) {
                std::rethrow_exception(err);
            }
        }
    }
    aborted = hooks.stop != nullptr && hooks.stop->load() && records.size() < config.episodes;

    std::sort(records.begin(), records.end(),
              [](const EpisodeRecord& a, const EpisodeRecord& b) { return a.episode < b.episode; });

    TrainResult result;
    result.params = global.snapshot();
    result.version = global.version();
    result.stats.episodes = std::move(records);
    result.stats.updates = updates.load();
    result.stats.rejected_updates = rejected.load();
    result.stats.aborted = aborted;
    return result;
}

} // namespace aoi
