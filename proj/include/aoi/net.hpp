#pragma once

#include "aoi/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aoi {

/// Shape of the actor-critic network.
///
/// Input layout (see build_observation): N ages, 1 last transmission time,
/// j throughput samples. The throughput window goes through a 1D convolution
/// with ReLU; its flattened output (filter-major) is concatenated with the
/// ages and the last transmission time and fed to one dense ReLU layer, which
/// drives an N-way softmax policy head and a scalar linear value head.
struct NetArch {
    std::size_t n_sensors = 10;
    std::size_t history_len = 10;
    std::size_t conv_filters = 128;
    std::size_t conv_kernel = 8;
    std::size_t conv_stride = 1;
    std::size_t hidden_units = 256;

    std::size_t conv_out_len() const noexcept { return (history_len - conv_kernel) / conv_stride + 1; }
    std::size_t conv_features() const noexcept { return conv_filters * conv_out_len(); }
    std::size_t hidden_input() const noexcept { return conv_features() + n_sensors + 1; }
    std::size_t obs_size() const noexcept { return n_sensors + 1 + history_len; }
    std::size_t param_count() const noexcept;

    /// Throws ConfigError ("arch.*") on impossible shapes.
    void validate() const;

    bool operator==(const NetArch&) const = default;
};

/// Offsets of each parameter block in the flat vector. Blocks, in order:
/// conv_w [F x K], conv_b [F], hidden_w [D x H] (input-major), hidden_b [H],
/// policy_w [N x H], policy_b [N], value_w [H], value_b [1].
struct ParamLayout {
    std::size_t conv_w, conv_b, hidden_w, hidden_b, policy_w, policy_b, value_w, value_b, total;

    static ParamLayout of(const NetArch& arch);
    bool operator==(const ParamLayout&) const = default;
};

/// All weights and biases of the actor (θ) and critic (θ_v), stored flat.
class NetParams {
public:
    NetParams() = default;
    /// Zero-initialised parameters for `arch`.
    explicit NetParams(const NetArch& arch);

    const NetArch& arch() const noexcept { return arch_; }
    const ParamLayout& layout() const noexcept { return layout_; }

    std::span<double> flat() noexcept { return values_; }
    std::span<const double> flat() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> conv_w() noexcept { return block(layout_.conv_w, layout_.conv_b); }
    std::span<double> conv_b() noexcept { return block(layout_.conv_b, layout_.hidden_w); }
    std::span<double> hidden_w() noexcept { return block(layout_.hidden_w, layout_.hidden_b); }
    std::span<double> hidden_b() noexcept { return block(layout_.hidden_b, layout_.policy_w); }
    std::span<double> policy_w() noexcept { return block(layout_.policy_w, layout_.policy_b); }
    std::span<double> policy_b() noexcept { return block(layout_.policy_b, layout_.value_w); }
    std::span<double> value_w() noexcept { return block(layout_.value_w, layout_.value_b); }
    std::span<double> value_b() noexcept { return block(layout_.value_b, layout_.total); }

    std::span<const double> conv_w() const noexcept { return block(layout_.conv_w, layout_.conv_b); }
    std::span<const double> conv_b() const noexcept { return block(layout_.conv_b, layout_.hidden_w); }
    std::span<const double> hidden_w() const noexcept { return block(layout_.hidden_w, layout_.hidden_b); }
    std::span<const double> hidden_b() const noexcept { return block(layout_.hidden_b, layout_.policy_w); }
    std::span<const double> policy_w() const noexcept { return block(layout_.policy_w, layout_.policy_b); }
    std::span<const double> policy_b() const noexcept { return block(layout_.policy_b, layout_.value_w); }
    std::span<const double> value_w() const noexcept { return block(layout_.value_w, layout_.value_b); }
    std::span<const double> value_b() const noexcept { return block(layout_.value_b, layout_.total); }

    bool all_finite() const noexcept;

    bool operator==(const NetParams&) const = default;

private:
    std::span<double> block(std::size_t from, std::size_t to) noexcept
    {
        return std::span<double>(values_).subspan(from, to - from);
    }
    std::span<const double> block(std::size_t from, std::size_t to) const noexcept
    {
        return std::span<const double>(values_).subspan(from, to - from);
    }

    NetArch arch_;
    ParamLayout layout_{};
    std::vector<double> values_;
};

/// Forward pass result plus the activations backward() needs.
struct ForwardOut {
    ProbVector probs;
    double value = 0.0;

    NetArch arch;
    std::vector<double> logits;
    std::vector<double> conv_act;   ///< post-ReLU conv output, filter-major
    std::vector<double> hidden_in;  ///< [conv_act, ages, last_tx_time]
    std::vector<double> hidden_act; ///< post-ReLU hidden layer
    Observation obs;
};

/// Ascent directions for the actor and the critic over the full flat
/// parameter vector. Shared layers receive contributions in both.
///
/// actor  = ∇θ [log π(a|s) · advantage + ρ · H(π(·|s))]
/// critic = -∇θ [td_error²] with the bootstrap target held fixed, i.e.
///          2 · td_error · ∇θ V(s)
///
/// so θ ← θ + α·actor + ά·critic ascends the policy objective and descends the
/// squared TD error.
struct Gradients {
    std::vector<double> actor;
    std::vector<double> critic;

    static Gradients zeros(std::size_t n) { return Gradients{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
    std::size_t size() const noexcept { return actor.size(); }
    bool all_finite() const noexcept;
    Gradients& operator+=(const Gradients& other);
};

/// Fan-in scaled uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
/// biases. Deterministic in (arch, seed).
NetParams init_params(const NetArch& arch, std::uint64_t seed);

/// Max-subtracted softmax.
ProbVector softmax(std::span<const double> logits);

/// -Σ p ln p, with 0 ln 0 = 0.
double entropy(const ProbVector& probs);

/// Throws DimensionError if obs does not match arch.obs_size().
ForwardOut forward(const NetParams& params, std::span<const double> obs);

Gradients backward(const NetParams& params, const ForwardOut& cached, std::size_t action,
                   double advantage, double td_error, double entropy_weight);

/// Same as backward() but adds into `into` instead of allocating.
void accumulate_backward(const NetParams& params, const ForwardOut& cached, std::size_t action,
                         double advantage, double td_error, double entropy_weight, Gradients& into);

} // namespace aoi
