#include "aoi/checkpoint.hpp"
#include "aoi/cli.hpp"
#include "aoi/config.hpp"
#include "aoi/errors.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace aoi;
using namespace aoi::cli;

namespace {

const std::filesystem::path kTable1 = std::filesystem::path(AOI_SOURCE_DIR) / "configs" / "table1.cfg";

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path write_minimal(const std::filesystem::path& dir, std::uint64_t episodes = 3)
{
    const auto path = dir / "mini.cfg";
    std::ofstream(path) << "env:\n"
                           "  success_prob: 0.9\n"
                           "  history_len: 6\n"
                           "  sensors:\n"
                           "    packet_len: [10, 40]\n"
                           "    aoi_threshold: [5, 30]\n"
                           "    penalty_weight: [100, 10]\n"
                           "arch: {conv_filters: 4, conv_kernel: 3, hidden_units: 16}\n"
                           "train:\n"
                           "  n_workers: 1\n"
                           "  episodes: "
                        << episodes
                        << "\n"
                           "  episode_len: 20\n"
                           "  update_period: 5\n"
                           "  reward_scale: 0.01\n"
                           "  seed: 4\n"
                           "eval: {episodes: 2, horizon: 200, seed: 11}\n"
                           "output_dir: "
                        << (dir / "out").string() << "\n";
    return path;
}

int run_args(std::vector<std::string> args, const std::atomic<bool>* stop = nullptr)
{
    args.insert(args.begin(), "aoi_sched");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), stop);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p)
{
    std::vector<nlohmann::json> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
}

} // namespace

TEST_CASE("policy specs")
{
    CHECK(parse_policy_spec("benchmark").kind == PolicySpec::Kind::Benchmark);
    CHECK(parse_policy_spec("round_robin").kind == PolicySpec::Kind::RoundRobin);
    CHECK(parse_policy_spec("max_age").kind == PolicySpec::Kind::MaxAge);
    CHECK(parse_policy_spec("learned").kind == PolicySpec::Kind::Learned);
    const PolicySpec seeded = parse_policy_spec("max_age@17");
    CHECK(seeded.seed == 17u);
    const PolicySpec ck = parse_policy_spec("checkpoint:runs/a@b/model.ckpt");
    CHECK(ck.kind == PolicySpec::Kind::Checkpoint);
    CHECK(ck.checkpoint == "runs/a@b/model.ckpt");
    CHECK_FALSE(ck.seed.has_value());
    CHECK(ck.label() == "ckpt_model");
    CHECK_THROWS_AS(parse_policy_spec("greedy"), UsageError);
    CHECK_THROWS_AS(parse_policy_spec("checkpoint:"), UsageError);
}

TEST_CASE("cmd_train writes a loadable checkpoint and a complete log")
{
    fixtures::TempDir dir("train");
    const ExperimentConfig cfg = parse_config(write_minimal(dir.path()));
    const TrainResult r = cmd_train(cfg);

    REQUIRE(std::filesystem::exists(checkpoint_path(cfg)));
    const Checkpoint ck = load_checkpoint(checkpoint_path(cfg));
    CHECK(ck.params == r.params);
    CHECK(ck.meta.config_hash == config_hash(cfg));
    CHECK(ck.meta.seed == 4);

    const auto log = read_jsonl(train_log_path(cfg));
    REQUIRE(log.size() == 1 + 3 + 1);
    CHECK(log.front()["kind"] == "header");
    CHECK(log.front()["config_hash"] == config_hash(cfg));
    CHECK(log.front()["seed"] == 4);
    for (int e = 0; e < 3; ++e) {
        CHECK(log[1 + e]["kind"] == "episode");
        CHECK(log[1 + e]["episode"] == e);
    }
    CHECK(log.back()["aborted"] == false);
    CHECK(log.back()["updates"] == 3 * 4);

    const std::string saved = slurp(cfg.output_dir / "config.yaml");
    CHECK(saved.find("config_hash=" + config_hash(cfg)) != std::string::npos);
    CHECK(parse_config_text(saved) == cfg);
}

TEST_CASE("single-worker training gives a byte-identical checkpoint")
{
    fixtures::TempDir a("det_a"), b("det_b");
    const ExperimentConfig ca = parse_config(write_minimal(a.path()));
    const ExperimentConfig cb = parse_config(write_minimal(b.path()));
    cmd_train(ca);
    cmd_train(cb);
    CHECK(slurp(checkpoint_path(ca)) == slurp(checkpoint_path(cb)));
}

TEST_CASE("aborted training flushes the log and leaves a valid checkpoint")
{
    fixtures::TempDir dir("abort");
    ExperimentConfig cfg = parse_config(write_minimal(dir.path(), 1000));
    std::atomic<bool> stop{true};
    const TrainResult r = cmd_train(cfg, &stop);
    CHECK(r.stats.aborted);
    const auto log = read_jsonl(train_log_path(cfg));
    CHECK(log.back()["kind"] == "footer");
    CHECK(log.back()["aborted"] == true);
    CHECK(load_checkpoint(checkpoint_path(cfg)).params == r.params);
    CHECK_FALSE(std::filesystem::exists(checkpoint_path(cfg).string() + ".tmp"));
    CHECK(run_args({"train", "-c", write_minimal(dir.path(), 1000).string()}, &stop) == kRuntime);
}

TEST_CASE("cmd_evaluate file contract")
{
    fixtures::TempDir dir("eval");
    ExperimentConfig cfg = parse_config(kTable1);
    cfg.output_dir = dir.path();
    cfg.eval.episodes = 1;
    cfg.eval.horizon = 500;

    for (const char* policy : {"benchmark", "max_age"}) {
        const Report r = cmd_evaluate(cfg, parse_policy_spec(policy));
        const auto out = dir.path() / (std::string("eval_") + policy);
        for (int n = 0; n < 10; ++n) {
            const auto f = out / ("cdf_node" + std::to_string(n) + ".csv");
            REQUIRE(std::filesystem::exists(f));
            CHECK(slurp(f).find("config_hash=" + config_hash(cfg)) != std::string::npos);
        }
        CHECK_FALSE(std::filesystem::exists(out / "cdf_node10.csv"));
        const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
        CHECK(j["policy"] == policy);
        CHECK(j["seed"] == cfg.eval.seed);
        CHECK(j["config_hash"] == config_hash(cfg));
        CHECK(j["objective"].get<double>() == r.objective);
    }

    const Report seeded = cmd_evaluate(cfg, parse_policy_spec("benchmark@77"));
    CHECK(seeded.scenario.seed == 77);

    CHECK_THROWS_AS(cmd_evaluate(cfg, parse_policy_spec("learned")), Error);
    CHECK_THROWS_AS(cmd_evaluate(cfg, parse_policy_spec("checkpoint:/nonexistent.ckpt")), Error);
}

TEST_CASE("checkpoint policies evaluate deterministically")
{
    fixtures::TempDir dir("ckpt_eval");
    const ExperimentConfig cfg = parse_config(write_minimal(dir.path()));
    cmd_train(cfg);
    const PolicySpec spec = parse_policy_spec("checkpoint:" + checkpoint_path(cfg).string());
    const Report a = cmd_evaluate(cfg, spec);
    const std::string first = slurp(cfg.output_dir / "eval_ckpt_checkpoint" / "summary.json");
    const Report b = cmd_evaluate(cfg, spec);
    CHECK(a.objective == b.objective);
    CHECK(slurp(cfg.output_dir / "eval_ckpt_checkpoint" / "summary.json") == first);
    CHECK(cmd_evaluate(cfg, parse_policy_spec("learned")).objective == a.objective);

    ExperimentConfig wrong = parse_config(kTable1);
    CHECK_THROWS_AS(cmd_evaluate(wrong, spec), UsageError);
}

TEST_CASE("cmd_compare")
{
    fixtures::TempDir dir("compare");
    ExperimentConfig cfg = parse_config(kTable1);
    cfg.output_dir = dir.path();
    cfg.eval.episodes = 1;
    cfg.eval.horizon = 500;

    const ComparisonTable same = cmd_compare(cfg, {parse_policy_spec("benchmark"), parse_policy_spec("benchmark")});
    for (const auto& [name, values] : same.rows) CHECK(values[0] == values[1]);

    const ComparisonTable t = cmd_compare(cfg, {parse_policy_spec("round_robin"), parse_policy_spec("benchmark")});
    CHECK(t.rows.size() == 22);
    const std::string csv = slurp(dir.path() / "compare" / "comparison.csv");
    CHECK(csv.find("config_hash=" + config_hash(cfg)) != std::string::npos);
    CHECK(csv.find("metric,round_robin,benchmark\n") != std::string::npos);
    for (int n = 0; n < 10; ++n) {
        CHECK(csv.find("\nP_V" + std::to_string(n) + ",") != std::string::npos);
        CHECK(csv.find("\navg_aoi_ms_" + std::to_string(n) + ",") != std::string::npos);
    }
    CHECK(std::filesystem::exists(dir.path() / "compare" / "summary_round_robin.json"));

    CHECK_THROWS_AS(cmd_compare(cfg, {parse_policy_spec("benchmark@1"), parse_policy_spec("max_age@2")}),
                    UsageError);
    CHECK_THROWS_AS(cmd_compare(cfg, {parse_policy_spec("benchmark")}), UsageError);
    CHECK_NOTHROW(cmd_compare(cfg, {parse_policy_spec("benchmark@3"), parse_policy_spec("max_age@3")}));
}

TEST_CASE("run maps failures to exit codes")
{
    fixtures::TempDir dir("run");
    const std::string mini = write_minimal(dir.path()).string();
    const std::string out = (dir.path() / "cli_out").string();

    CHECK(run_args({}) == kUsage);
    CHECK(run_args({"fly"}) == kUsage);
    CHECK(run_args({"evaluate", "-c", mini}) == kUsage);                      // no policy
    CHECK(run_args({"evaluate", "-c", mini, "-p", "greedy"}) == kUsage);     // unknown policy
    CHECK(run_args({"compare", "-c", mini, "-p", "benchmark"}) == kUsage);   // one policy

    const auto bad = dir.path() / "bad.cfg";
    std::ofstream(bad) << "env:\n  success_prob: 1.5\n";
    CHECK(run_args({"evaluate", "-c", bad.string(), "-p", "benchmark"}) == kValidation);
    CHECK(run_args({"evaluate", "-c", (dir.path() / "missing.cfg").string(), "-p", "benchmark"}) == kValidation);

    CHECK(run_args({"evaluate", "-c", mini, "-o", out, "-p", "learned"}) == kRuntime);  // no checkpoint yet
    CHECK(run_args({"train", "-c", mini, "-o", out, "--episodes", "2", "--seed", "3"}) == kOk);
    const Checkpoint ck = load_checkpoint(std::filesystem::path(out) / "checkpoint.ckpt");
    CHECK(ck.meta.seed == 3);
    CHECK(read_jsonl(std::filesystem::path(out) / "train_log.jsonl").size() == 1 + 2 + 1);
    CHECK(run_args({"evaluate", "-c", mini, "-o", out, "-p", "learned", "--episodes", "1"}) == kOk);
    const auto j = nlohmann::json::parse(slurp(std::filesystem::path(out) / "eval_learned" / "summary.json"));
    CHECK(j["episodes"] == 1);
    CHECK(run_args({"compare", "-c", mini, "-o", out, "-p", "learned", "-p", "benchmark"}) == kOk);
    CHECK(run_args({"compare", "-c", mini, "-o", out, "-p", "learned@1", "-p", "benchmark@2"}) == kUsage);
}
