#pragma once

#include "aoi/env.hpp"
#include "aoi/net.hpp"
#include "aoi/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace aoi {

/// Static randomized benchmark: probs[n] ∝ 1/β_n. Throws DomainError if any
/// threshold is <= 0.
ProbVector benchmark_probs(std::span<const double> thresholds);

/// Inverse-CDF draw using one uniform variate.
std::size_t sample_categorical(const ProbVector& probs, Rng& rng);

/// First index of the maximum entry.
std::size_t argmax_index(std::span<const double> values);

/// Node with the largest age, lowest index on ties.
std::size_t max_age_policy(const EnvState& state);

std::size_t round_robin_policy(std::uint64_t task_index, std::size_t n_sensors);

/// Scheduler that picks one node per task.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual std::string name() const = 0;

    /// `obs` is build_observation(state) for the same environment.
    virtual std::size_t decide(const EnvState& state, std::span<const double> obs, Rng& rng) = 0;
};

class BenchmarkScheduler final : public Scheduler {
public:
    explicit BenchmarkScheduler(std::span<const SensorSpec> sensors);

    std::string name() const override { return "benchmark"; }
    std::size_t decide(const EnvState& state, std::span<const double> obs, Rng& rng) override;

    const ProbVector& probs() const noexcept { return probs_; }

private:
    ProbVector probs_;
};

class RoundRobinScheduler final : public Scheduler {
public:
    std::string name() const override { return "round_robin"; }
    std::size_t decide(const EnvState& state, std::span<const double> obs, Rng& rng) override;
};

class MaxAgeScheduler final : public Scheduler {
public:
    std::string name() const override { return "max_age"; }
    std::size_t decide(const EnvState& state, std::span<const double> obs, Rng& rng) override;
};

enum class ActionMode {
    Sample,  ///< draw from π(·|s); used while training
    Argmax,  ///< most probable node; used for evaluation
};

/// Actor network policy.
class LearnedScheduler final : public Scheduler {
public:
    LearnedScheduler(NetParams params, ActionMode mode, std::string label = "learned");

    std::string name() const override { return label_; }
    std::size_t decide(const EnvState& state, std::span<const double> obs, Rng& rng) override;

    const NetParams& params() const noexcept { return params_; }

private:
    NetParams params_;
    ActionMode mode_;
    std::string label_;
};

} // namespace aoi
