#pragma once

#include "aoi/config.hpp"
#include "aoi/metrics.hpp"
#include "aoi/policy.hpp"
#include "aoi/train.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aoi::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kRuntime = 3,
};

/// `benchmark`, `round_robin`, `max_age`, `learned` (the checkpoint in
/// output_dir) or `checkpoint:<path>`, optionally suffixed `@<seed>` to pin
/// the evaluation seed.
struct PolicySpec {
    enum class Kind { Benchmark, RoundRobin, MaxAge, Learned, Checkpoint };

    Kind kind = Kind::Benchmark;
    std::filesystem::path checkpoint;
    std::optional<std::uint64_t> seed;

    std::string label() const;
};

/// Throws UsageError on unknown names or a malformed seed suffix.
PolicySpec parse_policy_spec(std::string_view text);

std::unique_ptr<Scheduler> make_scheduler(const PolicySpec& spec, const ExperimentConfig& config);

std::filesystem::path checkpoint_path(const ExperimentConfig& config);
std::filesystem::path train_log_path(const ExperimentConfig& config);

/// Trains, then writes checkpoint.ckpt, train_log.jsonl and config.yaml into
/// output_dir. The log gets one JSON record per finished episode and is
/// flushed as it goes. If `stop` fires, the partial model is still written
/// (atomically) and the result is marked aborted.
TrainResult cmd_train(const ExperimentConfig& config, const std::atomic<bool>* stop = nullptr);

/// Evaluates one policy in exploitation mode and writes
/// output_dir/eval_<label>/{summary.json, cdf_node<n>.csv}.
Report cmd_evaluate(const ExperimentConfig& config, const PolicySpec& spec);

/// Evaluates every policy on the same seed and scenario and writes
/// output_dir/compare/comparison.csv. Refuses specs that pin different seeds.
ComparisonTable cmd_compare(const ExperimentConfig& config, const std::vector<PolicySpec>& specs);

/// Full command line front end. Returns the process exit code.
int run(int argc, const char* const* argv, const std::atomic<bool>* stop = nullptr);

} // namespace aoi::cli
