#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace aoi {

/// Engine used for every stochastic component. mt19937_64 output is fixed by
/// the standard, so trajectories are reproducible across toolchains for the
/// draws we make directly from it.
using Rng = std::mt19937_64;

/// Independent stream for (seed, stream_id), e.g. one per training worker or
/// evaluation episode.
Rng make_rng(std::uint64_t seed, std::uint64_t stream_id = 0);

/// Flat network input. Layout is fixed by `build_observation`.
using Observation = std::vector<double>;

/// Categorical distribution over nodes: non-negative entries summing to 1.
class ProbVector {
public:
    static constexpr double kSumTolerance = 1e-9;

    ProbVector() = default;

    /// Validates and wraps. Throws DomainError on negative / non-finite
    /// entries or a sum farther than kSumTolerance from 1.
    explicit ProbVector(std::vector<double> probs);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> values() const noexcept { return probs_; }

    auto begin() const noexcept { return probs_.begin(); }
    auto end() const noexcept { return probs_.end(); }

private:
    std::vector<double> probs_;
};

} // namespace aoi
