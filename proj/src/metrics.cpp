#include "aoi/metrics.hpp"

#include "aoi/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace aoi {

namespace {

void require_records(const Trace& trace, const char* op)
{
    if (trace.empty()) {
        throw UsageError(std::string(op) + " of an empty trace");
    }
}

void require_node_count(const Trace& trace, std::size_t count, const char* what)
{
    if (count != trace.n_sensors()) {
        throw DimensionError(std::string(what) + " has " + std::to_string(count) + " entries, trace has " +
                             std::to_string(trace.n_sensors()) + " sensors");
    }
}

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::string provenance(const ScenarioKey& s)
{
    return "config_hash=" + (s.config_hash.empty() ? std::string("-") : s.config_hash) +
           " seed=" + std::to_string(s.seed) + " episodes=" + std::to_string(s.episodes) +
           " horizon=" + std::to_string(s.horizon);
}

} // namespace

void Trace::append(std::uint64_t task, std::size_t action, std::span<const double> ages, double reward,
                   double tx_duration)
{
    if (ages.size() != n_sensors_) {
        throw DimensionError("trace record has " + std::to_string(ages.size()) + " ages, expected " +
                             std::to_string(n_sensors_));
    }
    tasks_.push_back(task);
    actions_.push_back(action);
    ages_.insert(ages_.end(), ages.begin(), ages.end());
    rewards_.push_back(reward);
    durations_.push_back(tx_duration);
}

void Trace::extend(const Trace& other)
{
    if (other.n_sensors_ != n_sensors_) {
        throw DimensionError("cannot concatenate traces over different sensor counts");
    }
    tasks_.insert(tasks_.end(), other.tasks_.begin(), other.tasks_.end());
    actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
    ages_.insert(ages_.end(), other.ages_.begin(), other.ages_.end());
    rewards_.insert(rewards_.end(), other.rewards_.begin(), other.rewards_.end());
    durations_.insert(durations_.end(), other.durations_.begin(), other.durations_.end());
}

std::vector<double> average_aoi(const Trace& trace)
{
    require_records(trace, "average_aoi");
    std::vector<double> sum(trace.n_sensors(), 0.0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        for (std::size_t n = 0; n < trace.n_sensors(); ++n) {
            sum[n] += trace.age(i, n);
        }
    }
    for (double& s : sum) {
        s /= static_cast<double>(trace.size());
    }
    return sum;
}

std::vector<double> violation_prob(const Trace& trace, std::span<const double> thresholds)
{
    require_records(trace, "violation_prob");
    require_node_count(trace, thresholds.size(), "threshold list");
    std::vector<double> count(trace.n_sensors(), 0.0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        for (std::size_t n = 0; n < trace.n_sensors(); ++n) {
            if (trace.age(i, n) > thresholds[n]) {
                count[n] += 1.0;
            }
        }
    }
    for (double& c : count) {
        c /= static_cast<double>(trace.size());
    }
    return count;
}

double objective(const Trace& trace, std::span<const SensorSpec> sensors)
{
    require_records(trace, "objective");
    require_node_count(trace, sensors.size(), "sensor list");
    const std::size_t n_nodes = sensors.size();
    double age_total = 0.0;
    std::vector<std::uint64_t> violations(n_nodes, 0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        for (std::size_t n = 0; n < n_nodes; ++n) {
            const double a = trace.age(i, n);
            age_total += a;
            violations[n] += a > sensors[n].aoi_threshold ? 1 : 0;
        }
    }
    const double tasks = static_cast<double>(trace.size());
    double penalty = 0.0;
    for (std::size_t n = 0; n < n_nodes; ++n) {
        penalty += sensors[n].penalty_weight * (static_cast<double>(violations[n]) / tasks);
    }
    return age_total / (tasks * static_cast<double>(n_nodes)) + penalty;
}

std::vector<CdfPoint> empirical_cdf(const Trace& trace, std::size_t node, std::span<const double> grid)
{
    require_records(trace, "empirical_cdf");
    if (node >= trace.n_sensors()) {
        throw UsageError("node " + std::to_string(node) + " not in trace");
    }
    std::vector<double> sorted(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        sorted[i] = trace.age(i, node);
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> out;
    out.reserve(grid.size());
    const double total = static_cast<double>(sorted.size());
    for (double a : grid) {
        const auto at_or_below = std::upper_bound(sorted.begin(), sorted.end(), a) - sorted.begin();
        out.push_back({a, static_cast<double>(at_or_below) / total});
    }
    return out;
}

std::vector<double> age_grid(double max_age, double step)
{
    if (!(step > 0.0)) {
        throw DomainError("CDF grid step must be > 0");
    }
    const auto points = static_cast<std::size_t>(std::ceil(std::max(max_age, 0.0) / step)) + 1;
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = static_cast<double>(k) * step;
    }
    return grid;
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode)
{
    Rng rng = make_rng(seed, episode);
    return rng();
}

Report summarize(const Trace& trace, std::span<const SensorSpec> sensors, double cdf_step)
{
    require_records(trace, "summarize");
    require_node_count(trace, sensors.size(), "sensor list");
    std::vector<double> thresholds;
    for (const auto& s : sensors) {
        thresholds.push_back(s.aoi_threshold);
    }

    Report r;
    r.scenario.n_sensors = sensors.size();
    r.avg_aoi = average_aoi(trace);
    r.violation_prob = violation_prob(trace, thresholds);
    r.objective = objective(trace, sensors);

    r.selection_freq.assign(sensors.size(), 0.0);
    double reward_sum = 0.0;
    double max_age = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        r.selection_freq[trace.action(i)] += 1.0;
        reward_sum += trace.reward(i);
        for (double a : trace.ages(i)) {
            max_age = std::max(max_age, a);
        }
    }
    const double tasks = static_cast<double>(trace.size());
    for (double& f : r.selection_freq) {
        f /= tasks;
    }
    r.mean_reward = reward_sum / tasks;

    const std::vector<double> grid = age_grid(max_age, cdf_step);
    for (std::size_t n = 0; n < sensors.size(); ++n) {
        r.cdf.push_back(empirical_cdf(trace, n, grid));
    }
    return r;
}

Report evaluate_policy(Scheduler& policy, const EnvConfig& env_config, const EvalOptions& options,
                       Trace* trace_out)
{
    if (options.episodes < 1 || options.horizon < 1) {
        throw UsageError("evaluation needs at least one episode of at least one task");
    }
    EnvConfig cfg = env_config;
    cfg.horizon = options.horizon;
    Environment env(cfg);

    Trace all(cfg.num_sensors());
    for (std::uint64_t e = 0; e < options.episodes; ++e) {
        const std::uint64_t seed = episode_seed(options.seed, e);
        env.reset(seed);
        Rng policy_rng = make_rng(seed, 1);
        while (!env.done()) {
            const Observation obs = env.observation();
            const std::size_t action = policy.decide(env.state(), obs, policy_rng);
            const StepOutcome out = env.step(action);
            all.append(env.state().task_index - 1, action, env.state().ages, out.reward, out.tx_duration);
        }
    }

    Report r = summarize(all, cfg.sensors, options.cdf_step);
    r.policy = policy.name();
    r.scenario.seed = options.seed;
    r.scenario.episodes = options.episodes;
    r.scenario.horizon = options.horizon;
    if (trace_out != nullptr) {
        *trace_out = std::move(all);
    }
    return r;
}

const std::vector<double>& ComparisonTable::row(const std::string& metric) const
{
    for (const auto& [name, values] : rows) {
        if (name == metric) {
            return values;
        }
    }
    throw UsageError("comparison table has no row '" + metric + "'");
}

ComparisonTable compare(const std::vector<Report>& reports)
{
    if (reports.size() < 2) {
        throw UsageError("comparison needs at least 2 reports");
    }
    const ScenarioKey& ref = reports.front().scenario;
    for (const auto& r : reports) {
        if (!(r.scenario == ref)) {
            throw UsageError("report '" + r.policy + "' was produced on a different scenario (" +
                             provenance(r.scenario) + " vs " + provenance(ref) + ")");
        }
        if (r.avg_aoi.size() != ref.n_sensors || r.violation_prob.size() != ref.n_sensors) {
            throw UsageError("report '" + r.policy + "' has inconsistent per-node vectors");
        }
    }

    ComparisonTable t;
    t.scenario = ref;
    double best = reports.front().objective;
    for (const auto& r : reports) {
        t.policies.push_back(r.policy);
        best = std::min(best, r.objective);
    }
    auto column = [&](auto&& get) {
        std::vector<double> v;
        for (const auto& r : reports) {
            v.push_back(get(r));
        }
        return v;
    };
    t.rows.emplace_back("objective", column([](const Report& r) { return r.objective; }));
    t.rows.emplace_back("normalized_objective", column([best](const Report& r) {
        return best == 0.0 ? (r.objective == 0.0 ? 1.0 : INFINITY) : r.objective / best;
    }));
    for (std::size_t n = 0; n < ref.n_sensors; ++n) {
        t.rows.emplace_back("P_V" + std::to_string(n), column([n](const Report& r) { return r.violation_prob[n]; }));
    }
    for (std::size_t n = 0; n < ref.n_sensors; ++n) {
        t.rows.emplace_back("avg_aoi_ms_" + std::to_string(n), column([n](const Report& r) { return r.avg_aoi[n]; }));
    }
    return t;
}

void write_summary(const Report& report, const std::filesystem::path& path)
{
    nlohmann::ordered_json j;
    j["policy"] = report.policy;
    j["config_hash"] = report.scenario.config_hash;
    j["seed"] = report.scenario.seed;
    j["episodes"] = report.scenario.episodes;
    j["horizon"] = report.scenario.horizon;
    j["n_sensors"] = report.scenario.n_sensors;
    j["units"] = {{"avg_aoi", "ms"}, {"violation_prob", "fraction of tasks"}};
    j["objective"] = report.objective;
    j["mean_reward"] = report.mean_reward;
    j["avg_aoi"] = report.avg_aoi;
    j["violation_prob"] = report.violation_prob;
    j["selection_freq"] = report.selection_freq;
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
}

void write_cdf_tables(const Report& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (std::size_t n = 0; n < report.cdf.size(); ++n) {
        auto out = open_for_write(dir / ("cdf_node" + std::to_string(n) + ".csv"));
        out << "# policy=" << report.policy << " node=" << n << ' ' << provenance(report.scenario) << '\n';
        out << "age_ms,cdf\n";
        for (const auto& p : report.cdf[n]) {
            out << fmt_double(p.age) << ',' << fmt_double(p.prob) << '\n';
        }
    }
}

void write_comparison(const ComparisonTable& table, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << "# " << provenance(table.scenario) << '\n';
    out << "metric";
    for (const auto& p : table.policies) {
        out << ',' << p;
    }
    out << '\n';
    for (const auto& [name, values] : table.rows) {
        out << name;
        for (double v : values) {
            out << ',' << fmt_double(v);
        }
        out << '\n';
    }
}

} // namespace aoi
