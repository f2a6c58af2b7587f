#pragma once

#include "aoi/env.hpp"
#include "aoi/policy.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aoi {

/// Per-task sample path. Column-oriented: record i holds the action taken at
/// task i and the ages *after* that task, A_n(i+1).
class Trace {
public:
    explicit Trace(std::size_t n_sensors = 0) : n_sensors_(n_sensors) {}

    void append(std::uint64_t task, std::size_t action, std::span<const double> ages, double reward,
                double tx_duration);
    /// Concatenates another trace over the same sensors.
    void extend(const Trace& other);

    std::size_t n_sensors() const noexcept { return n_sensors_; }
    std::size_t size() const noexcept { return actions_.size(); }
    bool empty() const noexcept { return actions_.empty(); }

    double age(std::size_t record, std::size_t node) const { return ages_[record * n_sensors_ + node]; }
    std::span<const double> ages(std::size_t record) const
    {
        return std::span<const double>(ages_).subspan(record * n_sensors_, n_sensors_);
    }
    std::uint64_t task(std::size_t record) const { return tasks_[record]; }
    std::size_t action(std::size_t record) const { return actions_[record]; }
    double reward(std::size_t record) const { return rewards_[record]; }
    double tx_duration(std::size_t record) const { return durations_[record]; }

private:
    std::size_t n_sensors_;
    std::vector<std::uint64_t> tasks_;
    std::vector<std::size_t> actions_;
    std::vector<double> ages_;
    std::vector<double> rewards_;
    std::vector<double> durations_;
};

struct CdfPoint {
    double age = 0.0;
    double prob = 0.0;
};

/// Scenario identity used to refuse unfair comparisons.
struct ScenarioKey {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::uint64_t episodes = 0;
    std::uint64_t horizon = 0;
    std::size_t n_sensors = 0;

    bool operator==(const ScenarioKey&) const = default;
};

struct Report {
    std::string policy;
    ScenarioKey scenario;
    std::vector<double> avg_aoi;         ///< ms
    std::vector<double> violation_prob;  ///< P_Vn
    std::vector<double> selection_freq;  ///< fraction of tasks each node transmitted
    double objective = 0.0;
    double mean_reward = 0.0;
    std::vector<std::vector<CdfPoint>> cdf;  ///< per node, on a shared age grid
};

/// Per-node mean of A_n over the records. Empty trace → UsageError.
std::vector<double> average_aoi(const Trace& trace);

/// Per-node fraction of records with A_n > β_n.
std::vector<double> violation_prob(const Trace& trace, std::span<const double> thresholds);

/// (1/(T·N)) Σ_n Σ_i A_n(i) + Σ_n δ_n P̂_Vn.
double objective(const Trace& trace, std::span<const SensorSpec> sensors);

/// F(a) = fraction of records with A_node <= a, for each a in `grid`.
std::vector<CdfPoint> empirical_cdf(const Trace& trace, std::size_t node, std::span<const double> grid);

/// 0, step, 2·step, ... up to the first multiple >= max_age.
std::vector<double> age_grid(double max_age, double step);

struct EvalOptions {
    std::uint64_t episodes = 10;
    std::uint64_t horizon = 10000;
    std::uint64_t seed = 0;
    double cdf_step = 1.0;  ///< ms
};

/// Runs `episodes` independent episodes (episode e seeded from (seed, e)) and
/// aggregates over every task of every episode. If `trace_out` is non-null
/// the concatenated trace is stored there.
Report evaluate_policy(Scheduler& policy, const EnvConfig& env_config, const EvalOptions& options,
                       Trace* trace_out = nullptr);

/// Summary builder shared by evaluate_policy and tests.
Report summarize(const Trace& trace, std::span<const SensorSpec> sensors, double cdf_step);

struct ComparisonTable {
    std::vector<std::string> policies;
    ScenarioKey scenario;
    /// (metric name, one value per policy), Table-II order: objective,
    /// normalized objective, P_V0..P_V{N-1}, avg AoI 0..N-1.
    std::vector<std::pair<std::string, std::vector<double>>> rows;

    const std::vector<double>& row(const std::string& metric) const;
};

/// Throws UsageError for fewer than 2 reports or differing scenarios.
ComparisonTable compare(const std::vector<Report>& reports);

/// Episode seed for evaluation episode `episode` under base `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode);

// Writers. Every file starts with provenance (config hash, seed).
void write_summary(const Report& report, const std::filesystem::path& path);
void write_cdf_tables(const Report& report, const std::filesystem::path& dir);
void write_comparison(const ComparisonTable& table, const std::filesystem::path& path);

} // namespace aoi
