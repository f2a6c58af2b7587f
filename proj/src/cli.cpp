#include "aoi/cli.hpp"

#include "aoi/checkpoint.hpp"
#include "aoi/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>

namespace aoi::cli {

namespace {

Report evaluate_spec(const ExperimentConfig& config, const PolicySpec& spec, std::uint64_t seed)
{
    auto scheduler = make_scheduler(spec, config);
    EvalOptions opts;
    opts.episodes = config.eval.episodes;
    opts.horizon = config.eval.horizon;
    opts.seed = seed;
    opts.cdf_step = config.eval.cdf_step_ms;
    Report r = evaluate_policy(*scheduler, config.env, opts);
    r.policy = spec.label();
    r.scenario.config_hash = config_hash(config);
    return r;
}

} // namespace

std::string PolicySpec::label() const
{
    switch (kind) {
    case Kind::Benchmark: return "benchmark";
    case Kind::RoundRobin: return "round_robin";
    case Kind::MaxAge: return "max_age";
    case Kind::Learned: return "learned";
    case Kind::Checkpoint: return "ckpt_" + checkpoint.stem().string();
    }
    return "unknown";
}

PolicySpec parse_policy_spec(std::string_view text)
{
    PolicySpec spec;
    const auto at = text.rfind('@');
    // A '@' inside a checkpoint path is part of the path unless digits follow.
    if (at != std::string_view::npos && at + 1 < text.size() &&
        text.find_first_not_of("0123456789", at + 1) == std::string_view::npos) {
        std::uint64_t seed = 0;
        const auto digits = text.substr(at + 1);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
        if (ec != std::errc{}) {
            throw UsageError("bad seed in policy spec '" + std::string(text) + "'");
        }
        spec.seed = seed;
        text = text.substr(0, at);
    }
    constexpr std::string_view kCheckpoint = "checkpoint:";
    if (text == "benchmark") {
        spec.kind = PolicySpec::Kind::Benchmark;
    } else if (text == "round_robin") {
        spec.kind = PolicySpec::Kind::RoundRobin;
    } else if (text == "max_age") {
        spec.kind = PolicySpec::Kind::MaxAge;
    } else if (text == "learned") {
        spec.kind = PolicySpec::Kind::Learned;
    } else if (text.substr(0, kCheckpoint.size()) == kCheckpoint && text.size() > kCheckpoint.size()) {
        spec.kind = PolicySpec::Kind::Checkpoint;
        spec.checkpoint = std::string(text.substr(kCheckpoint.size()));
    } else {
        throw UsageError("unknown policy '" + std::string(text) +
                         "' (expected benchmark, round_robin, max_age, learned or checkpoint:<path>)");
    }
    return spec;
}

std::filesystem::path checkpoint_path(const ExperimentConfig& config)
{
    return config.output_dir / "checkpoint.ckpt";
}

std::filesystem::path train_log_path(const ExperimentConfig& config)
{
    return config.output_dir / "train_log.jsonl";
}

std::unique_ptr<Scheduler> make_scheduler(const PolicySpec& spec, const ExperimentConfig& config)
{
    switch (spec.kind) {
    case PolicySpec::Kind::Benchmark:
        return std::make_unique<BenchmarkScheduler>(config.env.sensors);
    case PolicySpec::Kind::RoundRobin:
        return std::make_unique<RoundRobinScheduler>();
    case PolicySpec::Kind::MaxAge:
        return std::make_unique<MaxAgeScheduler>();
    case PolicySpec::Kind::Learned:
    case PolicySpec::Kind::Checkpoint: {
        const auto path = spec.kind == PolicySpec::Kind::Learned ? checkpoint_path(config) : spec.checkpoint;
        if (!std::filesystem::exists(path)) {
            throw Error("checkpoint " + path.string() + " does not exist");
        }
        Checkpoint ck = load_checkpoint(path);
        if (ck.params.arch().n_sensors != config.env.num_sensors() ||
            ck.params.arch().history_len != config.env.history_len) {
            throw UsageError("checkpoint " + path.string() + " was trained for a different sensor set");
        }
        return std::make_unique<LearnedScheduler>(std::move(ck.params), ActionMode::Argmax, spec.label());
    }
    }
    throw UsageError("unhandled policy kind");
}

TrainResult cmd_train(const ExperimentConfig& config, const std::atomic<bool>* stop)
{
    config.validate();
    std::filesystem::create_directories(config.output_dir);
    const std::string hash = config_hash(config);

    {
        std::ofstream cfg_out(config.output_dir / "config.yaml", std::ios::binary | std::ios::trunc);
        cfg_out << "# config_hash=" << hash << " seed=" << config.train.seed << '\n' << emit_config(config);
    }

    std::ofstream log(train_log_path(config), std::ios::binary | std::ios::trunc);
    if (!log) {
        throw Error("cannot open " + train_log_path(config).string() + " for writing");
    }
    nlohmann::ordered_json header;
    header["kind"] = "header";
    header["config_hash"] = hash;
    header["seed"] = config.train.seed;
    header["episodes"] = config.train.episodes;
    header["episode_len"] = config.train.episode_len;
    header["n_workers"] = config.train.n_workers;
    log << header.dump() << std::endl;

    TrainHooks hooks;
    hooks.stop = stop;
    hooks.on_episode = [&log](const EpisodeRecord& rec) {
        nlohmann::ordered_json j;
        j["kind"] = "episode";
        j["episode"] = rec.episode;
        j["worker"] = rec.worker;
        j["mean_reward"] = rec.mean_reward;
        j["entropy_weight"] = rec.entropy_weight;
        j["objective"] = rec.objective;
        j["version"] = rec.version;
        log << j.dump() << std::endl;
    };

    TrainResult result = train(config.env, config.arch, config.train, hooks);

    nlohmann::ordered_json footer;
    footer["kind"] = "footer";
    footer["aborted"] = result.stats.aborted;
    footer["episodes_completed"] = result.stats.episodes.size();
    footer["updates"] = result.stats.updates;
    footer["rejected_updates"] = result.stats.rejected_updates;
    log << footer.dump() << std::endl;

    save_checkpoint(checkpoint_path(config), result.params, CheckpointMeta{hash, config.train.seed});
    return result;
}

Report cmd_evaluate(const ExperimentConfig& config, const PolicySpec& spec)
{
    config.validate();
    const std::uint64_t seed = spec.seed.value_or(config.eval.seed);
    Report r = evaluate_spec(config, spec, seed);
    const auto dir = config.output_dir / ("eval_" + spec.label());
    write_summary(r, dir / "summary.json");
    write_cdf_tables(r, dir);
    return r;
}

ComparisonTable cmd_compare(const ExperimentConfig& config, const std::vector<PolicySpec>& specs)
{
    config.validate();
    if (specs.size() < 2) {
        throw UsageError("compare needs at least 2 policies, got " + std::to_string(specs.size()));
    }
    const std::uint64_t seed = specs.front().seed.value_or(config.eval.seed);
    for (const auto& s : specs) {
        if (s.seed.value_or(config.eval.seed) != seed) {
            throw UsageError("policies '" + specs.front().label() + "' and '" + s.label() +
                             "' would be evaluated on different seeds; comparison refused");
        }
    }
    std::vector<Report> reports;
    for (const auto& s : specs) {
        reports.push_back(evaluate_spec(config, s, seed));
    }
    ComparisonTable table = compare(reports);
    const auto dir = config.output_dir / "compare";
    write_comparison(table, dir / "comparison.csv");
    for (const auto& r : reports) {
        write_summary(r, dir / ("summary_" + r.policy + ".json"));
    }
    return table;
}

int run(int argc, const char* const* argv, const std::atomic<bool>* stop)
{
    CLI::App app{"Age-of-information scheduling: simulate, train an actor-critic scheduler, evaluate."};
    app.require_subcommand(1);

    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> episodes;
    std::optional<std::string> output;
    std::vector<std::string> policies;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_file, "Experiment config (YAML)")->required();
        sub->add_option("--seed", seed, "Override the training (train) or evaluation seed");
        sub->add_option("--episodes", episodes, "Override the training or evaluation episode count");
        sub->add_option("-o,--output", output, "Override output_dir");
    };
    auto* train_cmd = app.add_subcommand("train", "Train the actor-critic scheduler");
    common(train_cmd);
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate one policy");
    common(eval_cmd);
    eval_cmd->add_option("-p,--policy", policies, "benchmark | round_robin | max_age | learned | checkpoint:<path>")
        ->required()
        ->expected(1);
    auto* cmp_cmd = app.add_subcommand("compare", "Compare policies on identical seeds");
    common(cmp_cmd);
    cmp_cmd->add_option("-p,--policy", policies, "Policy spec; repeat for each policy")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        ExperimentConfig config = parse_config(config_file);
        const bool training = train_cmd->parsed();
        if (seed) (training ? config.train.seed : config.eval.seed) = *seed;
        if (episodes) (training ? config.train.episodes : config.eval.episodes) = *episodes;
        if (output) config.output_dir = *output;
        config.validate();

        if (training) {
            const TrainResult r = cmd_train(config, stop);
            std::cout << "trained " << r.stats.episodes.size() << " episodes, " << r.stats.updates << " updates";
            if (!r.stats.episodes.empty()) {
                std::cout << ", last objective " << r.stats.episodes.back().objective;
            }
            std::cout << "\ncheckpoint: " << checkpoint_path(config).string() << '\n';
            if (r.stats.aborted) {
                std::cerr << "training aborted; partial checkpoint written\n";
                return kRuntime;
            }
        } else if (eval_cmd->parsed()) {
            const Report r = cmd_evaluate(config, parse_policy_spec(policies.front()));
            std::cout << r.policy << ": objective " << r.objective << '\n';
        } else {
            std::vector<PolicySpec> specs;
            for (const auto& p : policies) {
                specs.push_back(parse_policy_spec(p));
            }
            const ComparisonTable t = cmd_compare(config, specs);
            const auto& obj = t.row("objective");
            for (std::size_t i = 0; i < t.policies.size(); ++i) {
                std::cout << t.policies[i] << ": objective " << obj[i] << '\n';
            }
        }
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kValidation;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

} // namespace aoi::cli
