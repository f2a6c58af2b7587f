#pragma once

#include "aoi/env.hpp"
#include "aoi/net.hpp"
#include "aoi/train.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace aoi {

struct EvalConfig {
    std::uint64_t episodes = 10;
    std::uint64_t horizon = 10000;
    std::uint64_t seed = 1000;
    double cdf_step_ms = 1.0;

    bool operator==(const EvalConfig&) const = default;
};

/// Everything an experiment needs. arch.n_sensors and arch.history_len are
/// always taken from the env section.
struct ExperimentConfig {
    EnvConfig env;
    NetArch arch;
    TrainConfig train;
    EvalConfig eval;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError naming the offending key.
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// YAML document with top-level sections `env`, `arch`, `train`, `eval` and
/// the scalar `output_dir`. Omitted keys take the defaults above; unknown
/// keys, malformed values and invariant violations raise ConfigError with the
/// dotted key path (and the line for syntax problems).
ExperimentConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical text, excluding output_dir.
std::string config_hash(const ExperimentConfig& config);

} // namespace aoi
