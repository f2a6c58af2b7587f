#include "aoi/env.hpp"

#include "aoi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aoi {

RateModel RateModel::constant(double rate)
{
    RateModel model;
    model.kind_ = Kind::Constant;
    model.lo_ = rate;
    model.hi_ = rate;
    model.validate();
    return model;
}

RateModel RateModel::uniform(double lo, double hi)
{
    RateModel model;
    model.kind_ = Kind::UniformRange;
    model.lo_ = lo;
    model.hi_ = hi;
    model.validate();
    return model;
}

double RateModel::sample(Rng& rng) const
{
    if (kind_ == Kind::Constant) {
        return lo_;
    }
    return std::uniform_real_distribution<double>(lo_, hi_)(rng);
}

void RateModel::validate() const
{
    if (!std::isfinite(lo_) || !std::isfinite(hi_)) {
        throw ConfigError("rate bounds must be finite", "env.rate_model");
    }
    if (lo_ <= 0.0) {
        throw ConfigError("rates must be > 0 bytes/ms", "env.rate_model");
    }
    if (kind_ == Kind::UniformRange && hi_ <= lo_) {
        throw ConfigError("uniform rate range needs lo < hi", "env.rate_model");
    }
}

double EnvConfig::max_threshold() const
{
    double best = 0.0;
    for (const auto& s : sensors) {
        best = std::max(best, s.aoi_threshold);
    }
    return best;
}

void EnvConfig::validate() const
{
    if (sensors.size() < 2) {
        throw ConfigError("need at least 2 sensors, got " + std::to_string(sensors.size()),
                          "env.sensors");
    }
    for (std::size_t n = 0; n < sensors.size(); ++n) {
        const auto& s = sensors[n];
        const std::string at = "env.sensors[" + std::to_string(n) + "]";
        if (!(s.packet_len > 0.0) || !std::isfinite(s.packet_len)) {
            throw ConfigError("packet_len must be > 0", at + ".packet_len");
        }
        if (!(s.aoi_threshold > 0.0) || !std::isfinite(s.aoi_threshold)) {
            throw ConfigError("aoi_threshold must be > 0", at + ".aoi_threshold");
        }
        if (!(s.penalty_weight >= 0.0) || !std::isfinite(s.penalty_weight)) {
            throw ConfigError("penalty_weight must be >= 0", at + ".penalty_weight");
        }
    }
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
        throw ConfigError("must lie in (0, 1], got " + std::to_string(success_prob),
                          "env.success_prob");
    }
    if (horizon < 1) {
        throw ConfigError("must be >= 1", "env.horizon");
    }
    if (history_len < 1) {
        throw ConfigError("must be >= 1", "env.history_len");
    }
    rate_model.validate();
}

ObservationScale ObservationScale::from(const EnvConfig& config)
{
    return ObservationScale{config.max_threshold(), config.rate_model.mean()};
}

std::uint32_t sample_attempts(double success_prob, Rng& rng)
{
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
        throw DomainError("success probability must lie in (0, 1], got " + std::to_string(success_prob));
    }
    if (success_prob == 1.0) {
        return 1;
    }
    // geometric_distribution counts failures before the first success.
    return 1 + std::geometric_distribution<std::uint32_t>(success_prob)(rng);
}

Transmission transmission_time(double packet_len, std::uint32_t attempts,
                               const RateModel& rate_model, Rng& rng)
{
    if (attempts < 1) {
        throw DomainError("a transmission needs at least one attempt");
    }
    Transmission tx;
    tx.rates.reserve(attempts);
    for (std::uint32_t k = 0; k < attempts; ++k) {
        const double rate = rate_model.sample(rng);
        tx.rates.push_back(rate);
        tx.duration += packet_len / rate;
    }
    return tx;
}

double task_reward(std::span<const double> ages, std::span<const SensorSpec> sensors)
{
    if (ages.size() != sensors.size()) {
        throw DimensionError("ages and sensors differ in length");
    }
    double age_sum = 0.0;
    double penalty = 0.0;
    for (std::size_t n = 0; n < ages.size(); ++n) {
        age_sum += ages[n];
        if (ages[n] > sensors[n].aoi_threshold) {
            penalty += sensors[n].penalty_weight;
        }
    }
    return -age_sum - penalty;
}

EnvState initial_state(const EnvConfig& config)
{
    EnvState state;
    state.ages.assign(config.num_sensors(), 0.0);
    state.tput_history.assign(config.history_len, 0.0);
    state.selections.assign(config.num_sensors(), 0);
    return state;
}

Observation build_observation(const EnvState& state, const ObservationScale& scale)
{
    Observation obs;
    obs.reserve(state.ages.size() + 1 + state.tput_history.size());
    for (double a : state.ages) {
        obs.push_back(a / scale.age);
    }
    obs.push_back(state.last_tx_time / scale.age);
    for (double r : state.tput_history) {
        obs.push_back(r / scale.rate);
    }
    return obs;
}

Environment::Environment(EnvConfig config) : config_(std::move(config))
{
    config_.validate();
    scale_ = ObservationScale::from(config_);
    reset(config_.rng_seed);
}

const EnvState& Environment::reset(std::uint64_t seed)
{
    state_ = initial_state(config_);
    rng_ = make_rng(seed);
    return state_;
}

StepOutcome step(EnvState& state, std::size_t action, const EnvConfig& config, const ObservationScale& scale,
                 Rng& rng)
{
    if (state.task_index >= config.horizon) {
        throw LifecycleError("step called after the episode finished (task " +
                             std::to_string(state.task_index) + ")");
    }
    if (action >= config.num_sensors()) {
        throw ActionError("action " + std::to_string(action) + " out of range for " +
                          std::to_string(config.num_sensors()) + " sensors");
    }

    const double packet_len = config.sensors[action].packet_len;
    const std::uint32_t attempts = sample_attempts(config.success_prob, rng);
    const Transmission tx = transmission_time(packet_len, attempts, config.rate_model, rng);

    for (std::size_t n = 0; n < state.ages.size(); ++n) {
        state.ages[n] = (n == action) ? tx.duration : state.ages[n] + tx.duration;
    }
    state.last_tx_time = tx.duration;

    // One history entry per task: bytes delivered over airtime.
    std::rotate(state.tput_history.begin(), state.tput_history.begin() + 1, state.tput_history.end());
    state.tput_history.back() = packet_len * attempts / tx.duration;

    ++state.selections[action];
    ++state.task_index;

    StepOutcome out;
    out.reward = task_reward(state.ages, config.sensors);
    out.tx_duration = tx.duration;
    out.attempts = attempts;
    out.done = state.task_index >= config.horizon;
    out.observation = build_observation(state, scale);
    return out;
}

} // namespace aoi
