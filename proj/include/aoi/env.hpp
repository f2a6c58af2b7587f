#pragma once

#include "aoi/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aoi {

/// One field sensor. Units: bytes, milliseconds, dimensionless.
struct SensorSpec {
    double packet_len = 0.0;
    double aoi_threshold = 0.0;
    double penalty_weight = 0.0;

    bool operator==(const SensorSpec&) const = default;
};

/// Per-attempt channel rate process, in bytes/ms.
class RateModel {
public:
    enum class Kind { Constant, UniformRange };

    /// Default: Constant(10 bytes/ms).
    RateModel() = default;

    static RateModel constant(double rate);
    static RateModel uniform(double lo, double hi);

    Kind kind() const noexcept { return kind_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

    /// Draws λ for one attempt. Constant draws nothing from the engine.
    double sample(Rng& rng) const;
    double mean() const noexcept { return 0.5 * (lo_ + hi_); }

    /// Throws ConfigError unless every reachable rate is > 0.
    void validate() const;

    bool operator==(const RateModel&) const = default;

private:
    Kind kind_ = Kind::Constant;
    double lo_ = 10.0;
    double hi_ = 10.0;
};

struct EnvConfig {
    std::vector<SensorSpec> sensors;
    double success_prob = 0.9;
    RateModel rate_model;
    std::uint64_t horizon = 1000;
    std::uint64_t rng_seed = 0;
    std::size_t history_len = 10;

    std::size_t num_sensors() const noexcept { return sensors.size(); }
    double max_threshold() const;

    /// Throws ConfigError naming the offending key ("env.success_prob", ...).
    void validate() const;

    bool operator==(const EnvConfig&) const = default;
};

struct EnvState {
    std::vector<double> ages;          ///< A_n(i), ms
    double last_tx_time = 0.0;         ///< b(i-1), ms
    std::vector<double> tput_history;  ///< oldest first, newest last, zero-padded
    std::uint64_t task_index = 0;
    std::vector<std::uint64_t> selections;  ///< times each node transmitted

    bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
    Observation observation;
    double reward = 0.0;
    double tx_duration = 0.0;
    std::uint32_t attempts = 0;
    bool done = false;
};

/// Result of one task's transmission: total airtime and the per-attempt rates.
struct Transmission {
    double duration = 0.0;
    std::vector<double> rates;
};

/// Divisors applied by `build_observation`.
struct ObservationScale {
    double age = 1.0;   ///< max aoi_threshold over sensors
    double rate = 1.0;  ///< mean of the rate model

    static ObservationScale from(const EnvConfig& config);
};

/// Attempts until first success; Pr[k] = (1-p)^(k-1) p for k >= 1.
/// Throws DomainError unless 0 < p <= 1. Draws nothing when p == 1.
std::uint32_t sample_attempts(double success_prob, Rng& rng);

/// Σ_k packet_len / λ_k over `attempts` rates drawn in order from `rate_model`.
Transmission transmission_time(double packet_len, std::uint32_t attempts,
                               const RateModel& rate_model, Rng& rng);

/// -Σ ages[n] - Σ δ_n 1{ages[n] > β_n}.
double task_reward(std::span<const double> ages, std::span<const SensorSpec> sensors);

/// Zero ages, zero-filled history, task 0.
EnvState initial_state(const EnvConfig& config);

/// [ages/age_scale (N), last_tx_time/age_scale (1), tput_history/rate_scale (j)].
Observation build_observation(const EnvState& state, const ObservationScale& scale);

inline std::size_t observation_size(std::size_t n_sensors, std::size_t history_len) {
    return n_sensors + 1 + history_len;
}

/// Advances `state` by one task in which `action` transmits. Draws, in order,
/// the attempt count and then one rate per attempt from `rng`. The selected
/// node's age becomes the transmission duration; every other node ages by the
/// same amount; the reward is evaluated on the updated ages.
/// Throws ActionError for action >= N and LifecycleError once
/// state.task_index == config.horizon.
StepOutcome step(EnvState& state, std::size_t action, const EnvConfig& config, const ObservationScale& scale,
                 Rng& rng);

/// Task-indexed N-sensor monitoring environment.
///
/// Owns its config, state and engine; see the free `step` for the dynamics.
class Environment {
public:
    /// Validates the config and resets with `config.rng_seed`.
    explicit Environment(EnvConfig config);

    const EnvState& reset(std::uint64_t seed);

    StepOutcome step(std::size_t action) { return aoi::step(state_, action, config_, scale_, rng_); }

    const EnvConfig& config() const noexcept { return config_; }
    const EnvState& state() const noexcept { return state_; }
    const ObservationScale& scale() const noexcept { return scale_; }
    Observation observation() const { return build_observation(state_, scale_); }
    bool done() const noexcept { return state_.task_index >= config_.horizon; }
    std::size_t num_sensors() const noexcept { return config_.num_sensors(); }

private:
    EnvConfig config_;
    ObservationScale scale_;
    EnvState state_;
    Rng rng_;
};

} // namespace aoi
