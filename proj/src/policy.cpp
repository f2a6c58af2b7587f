#include "aoi/policy.hpp"

#include "aoi/errors.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace aoi {

ProbVector benchmark_probs(std::span<const double> thresholds)
{
    if (thresholds.empty()) {
        throw DomainError("benchmark needs at least one threshold");
    }
    std::vector<double> inv(thresholds.size());
    double total = 0.0;
    for (std::size_t n = 0; n < thresholds.size(); ++n) {
        if (!(thresholds[n] > 0.0)) {
            throw DomainError("AoI threshold of node " + std::to_string(n) + " must be > 0");
        }
        inv[n] = 1.0 / thresholds[n];
        total += inv[n];
    }
    for (double& p : inv) {
        p /= total;
    }
    return ProbVector(std::move(inv));
}

std::size_t sample_categorical(const ProbVector& probs, Rng& rng)
{
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) {
            continue;
        }
        last_positive = k;
        cum += probs[k];
        if (u < cum) {
            return k;
        }
    }
    // Rounding left cum slightly below 1.
    return last_positive;
}

std::size_t argmax_index(std::span<const double> values)
{
    if (values.empty()) {
        throw DimensionError("argmax of an empty vector");
    }
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t max_age_policy(const EnvState& state)
{
    return argmax_index(state.ages);
}

std::size_t round_robin_policy(std::uint64_t task_index, std::size_t n_sensors)
{
    if (n_sensors == 0) {
        throw DomainError("round robin over zero sensors");
    }
    return static_cast<std::size_t>(task_index % n_sensors);
}

BenchmarkScheduler::BenchmarkScheduler(std::span<const SensorSpec> sensors)
{
    std::vector<double> thresholds;
    thresholds.reserve(sensors.size());
    for (const auto& s : sensors) {
        thresholds.push_back(s.aoi_threshold);
    }
    probs_ = benchmark_probs(thresholds);
}

std::size_t BenchmarkScheduler::decide(const EnvState&, std::span<const double>, Rng& rng)
{
    return sample_categorical(probs_, rng);
}

std::size_t RoundRobinScheduler::decide(const EnvState& state, std::span<const double>, Rng&)
{
    return round_robin_policy(state.task_index, state.ages.size());
}

std::size_t MaxAgeScheduler::decide(const EnvState& state, std::span<const double>, Rng&)
{
    return max_age_policy(state);
}

LearnedScheduler::LearnedScheduler(NetParams params, ActionMode mode, std::string label)
    : params_(std::move(params)), mode_(mode), label_(std::move(label))
{
}

std::size_t LearnedScheduler::decide(const EnvState&, std::span<const double> obs, Rng& rng)
{
    const ForwardOut out = forward(params_, obs);
    if (mode_ == ActionMode::Argmax) {
        return argmax_index(out.logits);
    }
    return sample_categorical(out.probs, rng);
}

} // namespace aoi
