#include "aoi/config.hpp"

#include "aoi/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>
#include <vector>

namespace aoi {

namespace {

std::string where(const YAML::Node& node)
{
    const auto mark = node.Mark();
    return mark.line >= 0 ? " (line " + std::to_string(mark.line + 1) + ")" : std::string{};
}

double to_double(const YAML::Node& node, const std::string& key)
{
    if (!node.IsScalar()) {
        throw ConfigError("expected a number" + where(node), key);
    }
    const std::string& s = node.Scalar();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("'" + s + "' is not a number" + where(node), key);
    }
    return v;
}

std::uint64_t to_uint(const YAML::Node& node, const std::string& key)
{
    if (!node.IsScalar()) {
        throw ConfigError("expected a non-negative integer" + where(node), key);
    }
    const std::string& s = node.Scalar();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("'" + s + "' is not a non-negative integer" + where(node), key);
    }
    return v;
}

std::vector<double> to_doubles(const YAML::Node& node, const std::string& key)
{
    if (!node.IsSequence()) {
        throw ConfigError("expected a list of numbers" + where(node), key);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(to_double(node[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

/// Map section that tracks which keys were consumed.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
    {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError("expected a mapping" + where(node_), path_);
        }
    }

    YAML::Node take(const std::string& key)
    {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) {
            return YAML::Node(YAML::NodeType::Undefined);
        }
        const YAML::Node& map = node_;
        return map[key];
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    void read(const std::string& k, double& out)
    {
        if (auto n = take(k)) out = to_double(n, key(k));
    }
    template <class T>
        requires std::is_unsigned_v<T>
    void read(const std::string& k, T& out)
    {
        if (auto n = take(k)) out = static_cast<T>(to_uint(n, key(k)));
    }

    void finish() const
    {
        if (!node_ || node_.IsNull()) {
            return;
        }
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) {
                throw ConfigError("unknown key" + where(kv.first), key(k));
            }
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

RateModel read_rate_model(const YAML::Node& node)
{
    Section s(node, "env.rate_model");
    std::string kind = "constant";
    if (auto k = s.take("kind")) {
        kind = k.as<std::string>();
    }
    RateModel model;
    if (kind == "constant") {
        double rate = 10.0;
        s.read("rate", rate);
        model = RateModel::constant(rate);
    } else if (kind == "uniform") {
        double lo = 0.0, hi = 0.0;
        s.read("lo", lo);
        s.read("hi", hi);
        model = RateModel::uniform(lo, hi);
    } else {
        throw ConfigError("unknown kind '" + kind + "' (expected constant or uniform)", "env.rate_model.kind");
    }
    s.finish();
    return model;
}

std::vector<SensorSpec> read_sensors(const YAML::Node& node)
{
    Section s(node, "env.sensors");
    std::vector<double> len, thr, pen;
    if (auto n = s.take("packet_len")) len = to_doubles(n, "env.sensors.packet_len");
    if (auto n = s.take("aoi_threshold")) thr = to_doubles(n, "env.sensors.aoi_threshold");
    if (auto n = s.take("penalty_weight")) pen = to_doubles(n, "env.sensors.penalty_weight");
    s.finish();
    if (thr.size() != len.size()) {
        throw ConfigError("has " + std::to_string(thr.size()) + " entries but packet_len has " +
                              std::to_string(len.size()),
                          "env.sensors.aoi_threshold");
    }
    if (pen.size() != len.size()) {
        throw ConfigError("has " + std::to_string(pen.size()) + " entries but packet_len has " +
                              std::to_string(len.size()),
                          "env.sensors.penalty_weight");
    }
    std::vector<SensorSpec> sensors(len.size());
    for (std::size_t n = 0; n < len.size(); ++n) {
        sensors[n] = SensorSpec{len[n], thr[n], pen[n]};
    }
    return sensors;
}

std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string num_list(const std::vector<SensorSpec>& sensors, double SensorSpec::*field)
{
    std::string out = "[";
    for (std::size_t n = 0; n < sensors.size(); ++n) {
        out += (n ? ", " : "") + num(sensors[n].*field);
    }
    return out + "]";
}

std::string emit_body(const ExperimentConfig& c)
{
    std::ostringstream o;
    const auto& e = c.env;
    o << "env:\n"
      << "  success_prob: " << num(e.success_prob) << '\n'
      << "  horizon: " << e.horizon << '\n'
      << "  rng_seed: " << e.rng_seed << '\n'
      << "  history_len: " << e.history_len << '\n';
    if (e.rate_model.kind() == RateModel::Kind::Constant) {
        o << "  rate_model: {kind: constant, rate: " << num(e.rate_model.lo()) << "}\n";
    } else {
        o << "  rate_model: {kind: uniform, lo: " << num(e.rate_model.lo()) << ", hi: " << num(e.rate_model.hi())
          << "}\n";
    }
    o << "  sensors:\n"
      << "    packet_len: " << num_list(e.sensors, &SensorSpec::packet_len) << '\n'
      << "    aoi_threshold: " << num_list(e.sensors, &SensorSpec::aoi_threshold) << '\n'
      << "    penalty_weight: " << num_list(e.sensors, &SensorSpec::penalty_weight) << '\n';
    const auto& a = c.arch;
    o << "arch:\n"
      << "  conv_filters: " << a.conv_filters << '\n'
      << "  conv_kernel: " << a.conv_kernel << '\n'
      << "  conv_stride: " << a.conv_stride << '\n'
      << "  hidden_units: " << a.hidden_units << '\n';
    const auto& t = c.train;
    o << "train:\n"
      << "  actor_lr: " << num(t.actor_lr) << '\n'
      << "  critic_lr: " << num(t.critic_lr) << '\n'
      << "  discount: " << num(t.discount) << '\n'
      << "  entropy_start: " << num(t.entropy_start) << '\n'
      << "  entropy_decay_steps: " << t.entropy_decay_steps << '\n'
      << "  n_workers: " << t.n_workers << '\n'
      << "  episodes: " << t.episodes << '\n'
      << "  episode_len: " << t.episode_len << '\n'
      << "  update_period: " << t.update_period << '\n'
      << "  reward_scale: " << num(t.reward_scale) << '\n'
      << "  grad_clip: " << num(t.grad_clip) << '\n'
      << "  seed: " << t.seed << '\n';
    const auto& v = c.eval;
    o << "eval:\n"
      << "  episodes: " << v.episodes << '\n'
      << "  horizon: " << v.horizon << '\n'
      << "  seed: " << v.seed << '\n'
      << "  cdf_step_ms: " << num(v.cdf_step_ms) << '\n';
    return o.str();
}

} // namespace

void ExperimentConfig::validate() const
{
    env.validate();
    arch.validate();
    train.validate();
    if (arch.n_sensors != env.num_sensors()) {
        throw ConfigError("must equal the number of sensors", "arch.n_sensors");
    }
    if (arch.history_len != env.history_len) {
        throw ConfigError("must equal env.history_len", "arch.history_len");
    }
    if (eval.episodes < 1) throw ConfigError("must be >= 1", "eval.episodes");
    if (eval.horizon < 1) throw ConfigError("must be >= 1", "eval.horizon");
    if (!(eval.cdf_step_ms > 0.0)) throw ConfigError("must be > 0", "eval.cdf_step_ms");
    if (output_dir.empty()) throw ConfigError("must not be empty", "output_dir");
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(std::string(source) + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }

    ExperimentConfig c;
    try {
        Section top(root, "");

        Section env(top.take("env"), "env");
        env.read("success_prob", c.env.success_prob);
        env.read("horizon", c.env.horizon);
        env.read("rng_seed", c.env.rng_seed);
        env.read("history_len", c.env.history_len);
        if (auto n = env.take("rate_model")) c.env.rate_model = read_rate_model(n);
        if (auto n = env.take("sensors")) c.env.sensors = read_sensors(n);
        env.finish();

        Section arch(top.take("arch"), "arch");
        arch.read("conv_filters", c.arch.conv_filters);
        arch.read("conv_kernel", c.arch.conv_kernel);
        arch.read("conv_stride", c.arch.conv_stride);
        arch.read("hidden_units", c.arch.hidden_units);
        c.arch.n_sensors = c.env.num_sensors();
        c.arch.history_len = c.env.history_len;
        arch.finish();

        Section train(top.take("train"), "train");
        train.read("actor_lr", c.train.actor_lr);
        train.read("critic_lr", c.train.critic_lr);
        train.read("discount", c.train.discount);
        train.read("entropy_start", c.train.entropy_start);
        train.read("entropy_decay_steps", c.train.entropy_decay_steps);
        train.read("n_workers", c.train.n_workers);
        train.read("episodes", c.train.episodes);
        train.read("episode_len", c.train.episode_len);
        train.read("update_period", c.train.update_period);
        train.read("reward_scale", c.train.reward_scale);
        train.read("grad_clip", c.train.grad_clip);
        train.read("seed", c.train.seed);
        train.finish();

        Section eval(top.take("eval"), "eval");
        eval.read("episodes", c.eval.episodes);
        eval.read("horizon", c.eval.horizon);
        eval.read("seed", c.eval.seed);
        eval.read("cdf_step_ms", c.eval.cdf_step_ms);
        eval.finish();

        if (auto n = top.take("output_dir")) {
            if (!n.IsScalar()) throw ConfigError("expected a path" + where(n), "output_dir");
            c.output_dir = n.Scalar();
        }
        top.finish();
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string(source) + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string emit_config(const ExperimentConfig& config)
{
    return emit_body(config) + "output_dir: \"" + config.output_dir.string() + "\"\n";
}

std::string config_hash(const ExperimentConfig& config)
{
    const std::string body = emit_body(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : body) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace aoi
