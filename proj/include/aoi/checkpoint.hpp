#pragma once

#include "aoi/net.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace aoi {

/// Provenance stored alongside the weights.
struct CheckpointMeta {
    std::string config_hash;
    std::uint64_t seed = 0;

    bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
    NetParams params;
    CheckpointMeta meta;
};

/// Text format, version 1:
///
///     aoi-checkpoint 1
///     config_hash <string>
///     seed <uint>
///     n_sensors <uint>  history_len <uint>  ... (one key per line)
///     params <count>
///     <one hex-float per line, count lines>
///
/// Hex floats make the round trip bit-exact.
std::string serialize_checkpoint(const NetParams& params, const CheckpointMeta& meta);
Checkpoint parse_checkpoint(std::string_view text);

/// Writes to a sibling temp file and renames it into place, so a reader never
/// observes a partially written checkpoint.
void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace aoi
