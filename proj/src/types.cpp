#include "aoi/types.hpp"

#include "aoi/errors.hpp"

#include <cmath>
#include <string>

namespace aoi {

Rng make_rng(std::uint64_t seed, std::uint64_t stream_id)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return Rng(seq);
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs))
{
    if (probs_.empty()) {
        throw DomainError("probability vector is empty");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw DomainError("probability entry " + std::to_string(p) + " is not a finite value >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw DomainError("probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
}

} // namespace aoi
