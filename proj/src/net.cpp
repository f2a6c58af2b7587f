#include "aoi/net.hpp"

#include "aoi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aoi {

namespace {

double relu(double x) { return x > 0.0 ? x : 0.0; }

void require(bool ok, const std::string& key, const std::string& message)
{
    if (!ok) {
        throw ConfigError(message, "arch." + key);
    }
}

} // namespace

std::size_t NetArch::param_count() const noexcept
{
    return ParamLayout::of(*this).total;
}

void NetArch::validate() const
{
    require(n_sensors >= 2, "n_sensors", "must be >= 2");
    require(history_len >= 1, "history_len", "must be >= 1");
    require(conv_filters >= 1, "conv_filters", "must be >= 1");
    require(conv_kernel >= 1, "conv_kernel", "must be >= 1");
    require(conv_stride >= 1, "conv_stride", "must be >= 1");
    require(hidden_units >= 1, "hidden_units", "must be >= 1");
    require(history_len >= conv_kernel, "conv_kernel",
            "kernel width " + std::to_string(conv_kernel) + " exceeds history_len " + std::to_string(history_len));
}

ParamLayout ParamLayout::of(const NetArch& a)
{
    ParamLayout l{};
    std::size_t at = 0;
    l.conv_w = at;   at += a.conv_filters * a.conv_kernel;
    l.conv_b = at;   at += a.conv_filters;
    l.hidden_w = at; at += a.hidden_input() * a.hidden_units;
    l.hidden_b = at; at += a.hidden_units;
    l.policy_w = at; at += a.n_sensors * a.hidden_units;
    l.policy_b = at; at += a.n_sensors;
    l.value_w = at;  at += a.hidden_units;
    l.value_b = at;  at += 1;
    l.total = at;
    return l;
}

NetParams::NetParams(const NetArch& arch) : arch_(arch)
{
    arch_.validate();
    layout_ = ParamLayout::of(arch_);
    values_.assign(layout_.total, 0.0);
}

bool NetParams::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool Gradients::all_finite() const noexcept
{
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(actor.begin(), actor.end(), finite) && std::all_of(critic.begin(), critic.end(), finite);
}

Gradients& Gradients::operator+=(const Gradients& other)
{
    if (other.actor.size() != actor.size() || other.critic.size() != critic.size()) {
        throw DimensionError("gradient sizes differ");
    }
    for (std::size_t i = 0; i < actor.size(); ++i) {
        actor[i] += other.actor[i];
        critic[i] += other.critic[i];
    }
    return *this;
}

NetParams init_params(const NetArch& arch, std::uint64_t seed)
{
    NetParams params(arch);
    Rng rng = make_rng(seed);
    auto fill = [&rng](std::span<double> block, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : block) {
            w = dist(rng);
        }
    };
    fill(params.conv_w(), arch.conv_kernel);
    fill(params.hidden_w(), arch.hidden_input());
    fill(params.policy_w(), arch.hidden_units);
    fill(params.value_w(), arch.hidden_units);
    return params;
}

ProbVector softmax(std::span<const double> logits)
{
    if (logits.empty()) {
        throw DimensionError("softmax of an empty vector");
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - top);
        sum += out[k];
    }
    for (double& p : out) {
        p /= sum;
    }
    return ProbVector(std::move(out));
}

double entropy(const ProbVector& probs)
{
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

ForwardOut forward(const NetParams& params, std::span<const double> obs)
{
    const NetArch& a = params.arch();
    if (obs.size() != a.obs_size()) {
        throw DimensionError("observation has " + std::to_string(obs.size()) + " entries, network expects " +
                             std::to_string(a.obs_size()));
    }
    const std::size_t n = a.n_sensors;
    const std::size_t filters = a.conv_filters;
    const std::size_t kernel = a.conv_kernel;
    const std::size_t positions = a.conv_out_len();
    const std::size_t width = a.hidden_input();
    const std::size_t hidden = a.hidden_units;

    ForwardOut out;
    out.arch = a;
    out.obs.assign(obs.begin(), obs.end());

    const auto cw = params.conv_w();
    const auto cb = params.conv_b();
    const double* history = obs.data() + n + 1;
    out.conv_act.resize(a.conv_features());
    for (std::size_t f = 0; f < filters; ++f) {
        for (std::size_t t = 0; t < positions; ++t) {
            double z = cb[f];
            const double* window = history + t * a.conv_stride;
            for (std::size_t k = 0; k < kernel; ++k) {
                z += cw[f * kernel + k] * window[k];
            }
            out.conv_act[f * positions + t] = relu(z);
        }
    }

    out.hidden_in.resize(width);
    std::copy(out.conv_act.begin(), out.conv_act.end(), out.hidden_in.begin());
    std::copy(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(n + 1),
              out.hidden_in.begin() + static_cast<std::ptrdiff_t>(a.conv_features()));

    const auto hw = params.hidden_w();
    const auto hb = params.hidden_b();
    std::vector<double> pre(hb.begin(), hb.end());
    for (std::size_t d = 0; d < width; ++d) {
        const double x = out.hidden_in[d];
        if (x == 0.0) {
            continue;
        }
        const double* row = hw.data() + d * hidden;
        for (std::size_t u = 0; u < hidden; ++u) {
            pre[u] += row[u] * x;
        }
    }
    out.hidden_act.resize(hidden);
    std::transform(pre.begin(), pre.end(), out.hidden_act.begin(), relu);

    const auto pw = params.policy_w();
    const auto pb = params.policy_b();
    out.logits.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double z = pb[k];
        const double* row = pw.data() + k * hidden;
        for (std::size_t u = 0; u < hidden; ++u) {
            z += row[u] * out.hidden_act[u];
        }
        out.logits[k] = z;
    }

    const auto vw = params.value_w();
    double v = params.value_b()[0];
    for (std::size_t u = 0; u < hidden; ++u) {
        v += vw[u] * out.hidden_act[u];
    }
    out.value = v;
    out.probs = softmax(out.logits);
    return out;
}

namespace {

// Pushes dL/d(hidden_act) into the hidden and conv blocks of `grad`.
void backprop_hidden(const NetParams& params, const ForwardOut& cached, std::span<const double> d_hidden,
                     std::span<double> grad)
{
    const NetArch& a = params.arch();
    const ParamLayout& l = params.layout();
    const std::size_t hidden = a.hidden_units;
    const std::size_t width = a.hidden_input();
    const std::size_t features = a.conv_features();

    std::vector<double> delta(hidden);
    bool any = false;
    for (std::size_t u = 0; u < hidden; ++u) {
        delta[u] = cached.hidden_act[u] > 0.0 ? d_hidden[u] : 0.0;
        any = any || delta[u] != 0.0;
    }
    if (!any) {
        return;
    }

    double* gb = grad.data() + l.hidden_b;
    for (std::size_t u = 0; u < hidden; ++u) {
        gb[u] += delta[u];
    }
    const auto hw = params.hidden_w();
    double* gw = grad.data() + l.hidden_w;
    std::vector<double> d_conv(features, 0.0);
    for (std::size_t d = 0; d < width; ++d) {
        const double x = cached.hidden_in[d];
        if (x == 0.0) {
            // Inactive conv unit or zero input: no weight gradient, and a
            // zero conv activation blocks the path below as well.
            continue;
        }
        double* grow = gw + d * hidden;
        for (std::size_t u = 0; u < hidden; ++u) {
            grow[u] += x * delta[u];
        }
        if (d < features) {
            const double* wrow = hw.data() + d * hidden;
            double s = 0.0;
            for (std::size_t u = 0; u < hidden; ++u) {
                s += wrow[u] * delta[u];
            }
            d_conv[d] = s;
        }
    }

    const std::size_t positions = a.conv_out_len();
    const std::size_t kernel = a.conv_kernel;
    const double* history = cached.obs.data() + a.n_sensors + 1;
    double* gcw = grad.data() + l.conv_w;
    double* gcb = grad.data() + l.conv_b;
    for (std::size_t f = 0; f < a.conv_filters; ++f) {
        for (std::size_t t = 0; t < positions; ++t) {
            const std::size_t idx = f * positions + t;
            if (!(cached.conv_act[idx] > 0.0)) {
                continue;
            }
            const double g = d_conv[idx];
            gcb[f] += g;
            const double* window = history + t * a.conv_stride;
            for (std::size_t k = 0; k < kernel; ++k) {
                gcw[f * kernel + k] += g * window[k];
            }
        }
    }
}

} // namespace

void accumulate_backward(const NetParams& params, const ForwardOut& cached, std::size_t action,
                         double advantage, double td_error, double entropy_weight, Gradients& into)
{
    const NetArch& a = params.arch();
    if (!(cached.arch == a) || cached.hidden_act.size() != a.hidden_units ||
        cached.hidden_in.size() != a.hidden_input() || cached.probs.size() != a.n_sensors) {
        throw UsageError("forward cache does not belong to these parameters");
    }
    if (into.actor.size() != params.size() || into.critic.size() != params.size()) {
        throw DimensionError("gradient buffer does not match parameter count");
    }
    if (action >= a.n_sensors) {
        throw ActionError("action " + std::to_string(action) + " out of range");
    }
    const ParamLayout& l = params.layout();
    const std::size_t n = a.n_sensors;
    const std::size_t hidden = a.hidden_units;
    const auto& h = cached.hidden_act;

    // Actor: d/dz [adv·log π_a + ρ·H] = adv·(e_a - π) - ρ·π_k (ln π_k + H).
    const double ent = entropy(cached.probs);
    std::vector<double> g_logits(n);
    bool actor_active = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = cached.probs[k];
        const double pg = advantage * ((k == action ? 1.0 : 0.0) - p);
        const double eg = p > 0.0 ? -entropy_weight * p * (std::log(p) + ent) : 0.0;
        g_logits[k] = pg + eg;
        actor_active = actor_active || g_logits[k] != 0.0;
    }
    if (actor_active) {
        const auto pw = params.policy_w();
        double* gpw = into.actor.data() + l.policy_w;
        double* gpb = into.actor.data() + l.policy_b;
        std::vector<double> d_hidden(hidden, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double g = g_logits[k];
            gpb[k] += g;
            double* grow = gpw + k * hidden;
            const double* wrow = pw.data() + k * hidden;
            for (std::size_t u = 0; u < hidden; ++u) {
                grow[u] += g * h[u];
                d_hidden[u] += g * wrow[u];
            }
        }
        backprop_hidden(params, cached, d_hidden, into.actor);
    }

    // Critic: -d/dθ (target - V)² = 2·td·dV/dθ.
    const double g_value = 2.0 * td_error;
    if (g_value != 0.0) {
        const auto vw = params.value_w();
        double* gvw = into.critic.data() + l.value_w;
        into.critic[l.value_b] += g_value;
        std::vector<double> d_hidden(hidden);
        for (std::size_t u = 0; u < hidden; ++u) {
            gvw[u] += g_value * h[u];
            d_hidden[u] = g_value * vw[u];
        }
        backprop_hidden(params, cached, d_hidden, into.critic);
    }
}

Gradients backward(const NetParams& params, const ForwardOut& cached, std::size_t action,
                   double advantage, double td_error, double entropy_weight)
{
    Gradients grads = Gradients::zeros(params.size());
    accumulate_backward(params, cached, action, advantage, td_error, entropy_weight, grads);
    return grads;
}

} // namespace aoi
