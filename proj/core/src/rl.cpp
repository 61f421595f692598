#include "merlin/rl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "merlin/frozen_policy.hpp"
#include "merlin/outer_mdp.hpp"

namespace merlin {

using nlohmann::json;

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("train config: learning_rate must be > 0");
    if (decay <= 0.0 || decay >= 1.0) throw ConfigError("train config: decay must be in (0,1)");
    if (epsilon <= 0.0) throw ConfigError("train config: epsilon must be > 0");
    if (replay_capacity < 0) throw ConfigError("train config: replay_capacity must be >= 0");
    if (gamma <= 0.0 || gamma > 1.0) throw ConfigError("train config: gamma must be in (0,1]");
    if (entropy_coef < 0.0) throw ConfigError("train config: entropy_coef must be >= 0");
    if (max_episodes < 0) throw ConfigError("train config: max_episodes must be >= 0");
    if (hidden_dim < 1) throw ConfigError("train config: hidden_dim must be >= 1");
    if (reward_scale <= 0.0) throw ConfigError("train config: reward_scale must be > 0");
    if (episode_step_cap < 1) throw ConfigError("train config: episode_step_cap must be >= 1");
}

double Trajectory::total_reward() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.reward;
    return sum;
}

void ReplayBuffer::push(Trajectory traj) {
    if (capacity_ == 0) return;
    episodes_.push_back(std::move(traj));
    while (static_cast<int>(episodes_.size()) > capacity_) episodes_.pop_front();
}

const Trajectory& ReplayBuffer::sample(Rng& rng) const {
    if (episodes_.empty()) throw UsageError("ReplayBuffer::sample: buffer is empty");
    const int i = rng.uniform_int(0, static_cast<int>(episodes_.size()) - 1);
    return episodes_[static_cast<std::size_t>(i)];
}

NetGradients NetGradients::zeros_like(const PolicyNet& net) {
    NetGradients g;
    g.w1.assign(net.w1.size(), 0.0);
    g.b1.assign(net.b1.size(), 0.0);
    g.wp.assign(net.wp.size(), 0.0);
    g.bp.assign(net.bp.size(), 0.0);
    g.wv.assign(net.wv.size(), 0.0);
    g.bv.assign(net.bv.size(), 0.0);
    return g;
}

void NetGradients::add(const NetGradients& other) {
    auto axpy = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    axpy(w1, other.w1);
    axpy(b1, other.b1);
    axpy(wp, other.wp);
    axpy(bp, other.bp);
    axpy(wv, other.wv);
    axpy(bv, other.bv);
}

bool NetGradients::is_finite() const {
    for (const auto* vec : {&w1, &b1, &wp, &bp, &wv, &bv})
        for (double v : *vec)
            if (!std::isfinite(v)) return false;
    return true;
}

RmsPropState RmsPropState::zeros_like(const PolicyNet& net) {
    return {NetGradients::zeros_like(net)};
}

NetGradients compute_gradients(const PolicyNet& net, const Trajectory& traj, double gamma,
                               double entropy_coef) {
    if (traj.steps.empty()) throw UsageError("compute_gradients: empty trajectory");

    // Discounted returns-to-go.
    std::vector<double> returns(traj.steps.size());
    double g = 0.0;
    for (std::size_t t = traj.steps.size(); t-- > 0;) {
        g = traj.steps[t].reward + gamma * g;
        returns[t] = g;
    }

    NetGradients grads = NetGradients::zeros_like(net);
    const int in = net.input_dim;
    const int hid = net.hidden_dim;
    const int act = net.action_dim;

    std::vector<double> z1(static_cast<std::size_t>(hid));
    std::vector<double> hidden(static_cast<std::size_t>(hid));
    std::vector<double> dlogits(static_cast<std::size_t>(act));
    std::vector<double> dhidden(static_cast<std::size_t>(hid));

    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const TrajectoryStep& step = traj.steps[t];
        const ActionMask* mask = step.mask.empty() ? nullptr : &step.mask;

        // Forward with cached pre-activations.
        for (int h = 0; h < hid; ++h) {
            double z = net.b1[static_cast<std::size_t>(h)];
            const double* row = &net.w1[static_cast<std::size_t>(h) * in];
            for (int i = 0; i < in; ++i) z += row[i] * step.state[static_cast<std::size_t>(i)];
            z1[static_cast<std::size_t>(h)] = z;
            hidden[static_cast<std::size_t>(h)] = z > 0.0 ? z : 0.0;
        }
        const ForwardResult fwd = net.forward(step.state, mask);
        if (!std::isfinite(fwd.value)) throw NumericalError("compute_gradients: NaN in forward pass");
        for (double p : fwd.probs)
            if (!std::isfinite(p)) throw NumericalError("compute_gradients: NaN in forward pass");

        const double advantage = returns[t] - fwd.value;

        double entropy = 0.0;
        if (entropy_coef > 0.0) {
            for (double p : fwd.probs)
                if (p > 0.0) entropy -= p * std::log(p);
        }

        for (int a = 0; a < act; ++a) {
            const double p = fwd.probs[static_cast<std::size_t>(a)];
            if (mask && !(*mask)[static_cast<std::size_t>(a)]) {
                dlogits[static_cast<std::size_t>(a)] = 0.0;
                continue;
            }
            // d(-log pi(a_t)) / dz_a = p_a - 1[a == a_t], scaled by the advantage.
            double d = (p - (a == step.action ? 1.0 : 0.0)) * advantage;
            // d(-entropy_coef * H) / dz_a = entropy_coef * p_a * (log p_a + H).
            if (entropy_coef > 0.0 && p > 0.0)
                d += entropy_coef * p * (std::log(p) + entropy);
            dlogits[static_cast<std::size_t>(a)] = d;
        }
        const double dvalue = -2.0 * (returns[t] - fwd.value);

        for (int a = 0; a < act; ++a) {
            const double d = dlogits[static_cast<std::size_t>(a)];
            if (d == 0.0) continue;
            grads.bp[static_cast<std::size_t>(a)] += d;
            double* wrow = &grads.wp[static_cast<std::size_t>(a) * hid];
            for (int h = 0; h < hid; ++h) wrow[h] += d * hidden[static_cast<std::size_t>(h)];
        }
        grads.bv[0] += dvalue;
        for (int h = 0; h < hid; ++h)
            grads.wv[static_cast<std::size_t>(h)] += dvalue * hidden[static_cast<std::size_t>(h)];

        for (int h = 0; h < hid; ++h) {
            if (z1[static_cast<std::size_t>(h)] <= 0.0) {
                dhidden[static_cast<std::size_t>(h)] = 0.0;
                continue;
            }
            double d = dvalue * net.wv[static_cast<std::size_t>(h)];
            for (int a = 0; a < act; ++a) {
                const double dl = dlogits[static_cast<std::size_t>(a)];
                if (dl != 0.0) d += dl * net.wp[static_cast<std::size_t>(a) * hid + h];
            }
            dhidden[static_cast<std::size_t>(h)] = d;
        }
        for (int h = 0; h < hid; ++h) {
            const double d = dhidden[static_cast<std::size_t>(h)];
            if (d == 0.0) continue;
            grads.b1[static_cast<std::size_t>(h)] += d;
            double* wrow = &grads.w1[static_cast<std::size_t>(h) * in];
            for (int i = 0; i < in; ++i) wrow[i] += d * step.state[static_cast<std::size_t>(i)];
        }
    }

    if (!grads.is_finite()) throw NumericalError("compute_gradients: non-finite gradient");
    return grads;
}

void rmsprop_update(PolicyNet& net, const NetGradients& grads, RmsPropState& state,
                    const TrainConfig& config) {
    auto update = [&config](std::vector<double>& params, const std::vector<double>& g,
                            std::vector<double>& acc) {
        if (params.size() != g.size() || params.size() != acc.size())
            throw UsageError("rmsprop_update: shape mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            acc[i] = config.decay * acc[i] + (1.0 - config.decay) * g[i] * g[i];
            params[i] -= config.learning_rate * g[i] / (std::sqrt(acc[i]) + config.epsilon);
        }
    };
    update(net.w1, grads.w1, state.acc.w1);
    update(net.b1, grads.b1, state.acc.b1);
    update(net.wp, grads.wp, state.acc.wp);
    update(net.bp, grads.bp, state.acc.bp);
    update(net.wv, grads.wv, state.acc.wv);
    update(net.bv, grads.bv, state.acc.bv);
}

namespace {

json net_to_json(const PolicyNet& net) {
    return json{{"input_dim", net.input_dim}, {"hidden_dim", net.hidden_dim},
                {"action_dim", net.action_dim}, {"w1", net.w1}, {"b1", net.b1},
                {"wp", net.wp}, {"bp", net.bp}, {"wv", net.wv}, {"bv", net.bv}};
}

PolicyNet net_from_json(const json& j) {
    PolicyNet net;
    net.input_dim = j.at("input_dim").get<int>();
    net.hidden_dim = j.at("hidden_dim").get<int>();
    net.action_dim = j.at("action_dim").get<int>();
    net.w1 = j.at("w1").get<std::vector<double>>();
    net.b1 = j.at("b1").get<std::vector<double>>();
    net.wp = j.at("wp").get<std::vector<double>>();
    net.bp = j.at("bp").get<std::vector<double>>();
    net.wv = j.at("wv").get<std::vector<double>>();
    net.bv = j.at("bv").get<std::vector<double>>();
    const std::size_t hxi = static_cast<std::size_t>(net.hidden_dim) * net.input_dim;
    const std::size_t axh = static_cast<std::size_t>(net.action_dim) * net.hidden_dim;
    if (net.w1.size() != hxi || net.wp.size() != axh ||
        net.b1.size() != static_cast<std::size_t>(net.hidden_dim) ||
        net.bp.size() != static_cast<std::size_t>(net.action_dim) ||
        net.wv.size() != static_cast<std::size_t>(net.hidden_dim) || net.bv.size() != 1)
        throw ParseError("checkpoint: parameter shapes do not match dims", 0);
    return net;
}

json config_to_json(const TrainConfig& c) {
    return json{{"learning_rate", c.learning_rate},
                {"decay", c.decay},
                {"epsilon", c.epsilon},
                {"replay_capacity", c.replay_capacity},
                {"replay_activation_episode", c.replay_activation_episode},
                {"gamma", c.gamma},
                {"entropy_coef", c.entropy_coef},
                {"max_episodes", c.max_episodes},
                {"seed", c.seed},
                {"hidden_dim", c.hidden_dim},
                {"reward_scale", c.reward_scale},
                {"mask_illegal", c.mask_illegal},
                {"illegal_penalty", c.illegal_penalty},
                {"epoch_episodes", c.epoch_episodes},
                {"episode_step_cap", c.episode_step_cap}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.decay = j.at("decay").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.replay_capacity = j.at("replay_capacity").get<int>();
    c.replay_activation_episode = j.at("replay_activation_episode").get<int>();
    c.gamma = j.at("gamma").get<double>();
    c.entropy_coef = j.at("entropy_coef").get<double>();
    c.max_episodes = j.at("max_episodes").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.reward_scale = j.at("reward_scale").get<double>();
    c.mask_illegal = j.at("mask_illegal").get<bool>();
    c.illegal_penalty = j.at("illegal_penalty").get<double>();
    c.epoch_episodes = j.at("epoch_episodes").get<std::int64_t>();
    c.episode_step_cap = j.at("episode_step_cap").get<std::int64_t>();
    return c;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json doc{{"format_version", kCheckpointFormatVersion},
             {"kind", "merlin.checkpoint"},
             {"net", net_to_json(ckpt.net)},
             {"opt_acc",
              json{{"w1", ckpt.opt.acc.w1}, {"b1", ckpt.opt.acc.b1}, {"wp", ckpt.opt.acc.wp},
                   {"bp", ckpt.opt.acc.bp}, {"wv", ckpt.opt.acc.wv}, {"bv", ckpt.opt.acc.bv}}},
             {"rng_state", ckpt.rng_state},
             {"episode", ckpt.episode},
             {"train_config", config_to_json(ckpt.config)}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(1, '\t') << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint parse error: ") + e.what(), e.byte);
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion)
            throw VersionError(version, kCheckpointFormatVersion);
        Checkpoint ckpt;
        ckpt.net = net_from_json(doc.at("net"));
        const auto& oj = doc.at("opt_acc");
        ckpt.opt.acc.w1 = oj.at("w1").get<std::vector<double>>();
        ckpt.opt.acc.b1 = oj.at("b1").get<std::vector<double>>();
        ckpt.opt.acc.wp = oj.at("wp").get<std::vector<double>>();
        ckpt.opt.acc.bp = oj.at("bp").get<std::vector<double>>();
        ckpt.opt.acc.wv = oj.at("wv").get<std::vector<double>>();
        ckpt.opt.acc.bv = oj.at("bv").get<std::vector<double>>();
        ckpt.rng_state = doc.at("rng_state").get<std::uint64_t>();
        ckpt.episode = doc.at("episode").get<std::int64_t>();
        ckpt.config = config_from_json(doc.at("train_config"));
        return ckpt;
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint field error: ") + e.what(), 0);
    }
}

namespace {

/// Shared training driver: one RMSprop step per episode on the current
/// trajectory plus one uniform replay sample once the buffer has activated.
template <typename RunEpisode>
TrainResult train_loop(PolicyNet net, std::int64_t train_size, const TrainConfig& config,
                       const TrainHooks& hooks, RunEpisode&& run_episode) {
    config.validate();
    RmsPropState opt = RmsPropState::zeros_like(net);
    ReplayBuffer buffer(config.replay_capacity);
    Rng root(config.seed);

    TrainResult result;
    result.episode_returns.reserve(static_cast<std::size_t>(config.max_episodes));

    const std::int64_t epoch_len =
        config.epoch_episodes > 0 ? config.epoch_episodes : std::max<std::int64_t>(1, train_size);
    int epoch = 0;

    for (std::int64_t ep = 1; ep <= config.max_episodes; ++ep) {
        Rng rng = root.fork(static_cast<std::uint64_t>(ep));
        Trajectory traj = run_episode(net, rng);
        result.episode_returns.push_back(traj.total_reward());

        if (!traj.steps.empty()) {
            NetGradients grads = compute_gradients(net, traj, config.gamma, config.entropy_coef);
            if (ep > config.replay_activation_episode && !buffer.empty()) {
                Rng replay_rng = root.fork(0x8000000000000000ull | static_cast<std::uint64_t>(ep));
                grads.add(compute_gradients(net, buffer.sample(replay_rng), config.gamma,
                                            config.entropy_coef));
            }
            rmsprop_update(net, grads, opt, config);
        }
        if (ep >= config.replay_activation_episode) buffer.push(std::move(traj));

        if (hooks.on_epoch && (ep % epoch_len == 0 || ep == config.max_episodes)) {
            ++epoch;
            EpochInfo info;
            info.epoch = epoch;
            info.episodes_done = ep;
            info.net = &net;
            const std::size_t window = std::min<std::size_t>(100, result.episode_returns.size());
            info.mean_return_last_100 =
                std::accumulate(result.episode_returns.end() - static_cast<std::ptrdiff_t>(window),
                                result.episode_returns.end(), 0.0) /
                static_cast<double>(window);
            hooks.on_epoch(info);
        }
    }

    result.net = std::move(net);
    result.opt = std::move(opt);
    result.episodes = config.max_episodes;
    return result;
}

} // namespace

TrainResult train_internal(const Corpus& train, const RewardSetup& setup,
                           const TrainConfig& config, const TrainHooks& hooks) {
    if (train.items.empty()) throw ConfigError("train_internal: empty train corpus");
    setup.cost_fn.validate();
    const int k = train.detector_count();

    Rng init_rng = Rng(config.seed).fork(0xA11D);
    PolicyNet net = PolicyNet::init(k, config.hidden_dim, action_count(k), init_rng);

    auto episode = [&train, &setup, &config, k](const PolicyNet& policy, Rng& rng) -> Trajectory {
        const FileItem& item = train.items[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(train.items.size()) - 1))];
        InternalState state = internal_reset(item);
        Trajectory traj;
        std::int64_t steps = 0;
        while (!state.terminal && steps++ < config.episode_step_cap) {
            const ActionMask mask = legal_actions(state);
            const ForwardResult fwd =
                policy.forward(state.outputs, config.mask_illegal ? &mask : nullptr);
            const int a = sample_action(fwd.probs, rng);
            TrajectoryStep ts;
            ts.state = state.outputs;
            ts.action = a;
            if (config.mask_illegal) ts.mask = mask;
            const InternalStepResult res = internal_step(
                state, InternalAction::from_index(a, k), item, setup, config.illegal_penalty);
            ts.reward = res.reward * config.reward_scale;
            traj.steps.push_back(std::move(ts));
        }
        traj.terminal = state.terminal;
        return traj;
    };

    return train_loop(std::move(net), static_cast<std::int64_t>(train.items.size()), config,
                      hooks, episode);
}

TrainResult train_outer(const Corpus& train, const PolicyNet& frozen_internal, int n,
                        const TrainConfig& config, const TrainHooks& hooks) {
    if (train.items.empty()) throw ConfigError("train_outer: empty train corpus");
    if (n < 1) throw ConfigError("train_outer: n must be >= 1");
    const int k = train.detector_count();
    if (frozen_internal.input_dim != k)
        throw ConfigError("train_outer: internal policy does not match corpus detector count");

    Rng init_rng = Rng(config.seed).fork(0xA11E);
    PolicyNet net = PolicyNet::init(n * (k + 1), config.hidden_dim, n, init_rng);

    OuterEnv env;
    env.internal = &frozen_internal;
    env.illegal_penalty = config.illegal_penalty;

    auto episode = [&train, &config, env, n](const PolicyNet& policy, Rng& rng) -> Trajectory {
        // n-item queue sampled without replacement (with replacement when the
        // split is smaller than n).
        const int train_size = static_cast<int>(train.items.size());
        std::vector<FileItem> items;
        items.reserve(static_cast<std::size_t>(n));
        if (train_size >= n) {
            std::vector<int> ids(static_cast<std::size_t>(train_size));
            std::iota(ids.begin(), ids.end(), 0);
            for (int i = 0; i < n; ++i) {
                const int j = rng.uniform_int(i, train_size - 1);
                std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
                items.push_back(
                    train.items[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])]);
            }
        } else {
            for (int i = 0; i < n; ++i)
                items.push_back(
                    train.items[static_cast<std::size_t>(rng.uniform_int(0, train_size - 1))]);
        }

        QueueState qs = outer_reset(items, n);
        Trajectory traj;
        std::int64_t steps = 0;
        while (!is_complete(qs) && steps++ < config.episode_step_cap) {
            std::vector<double> enc = encode_outer_state(qs);
            ActionMask mask;
            if (config.mask_illegal) {
                mask.assign(static_cast<std::size_t>(n), 0);
                for (int i = 0; i < n; ++i)
                    mask[static_cast<std::size_t>(i)] =
                        qs.slots[static_cast<std::size_t>(i)].unfinished() ? 1 : 0;
            }
            const ForwardResult fwd = policy.forward(enc, config.mask_illegal ? &mask : nullptr);
            const int slot = sample_action(fwd.probs, rng);
            const OuterStepResult res = outer_step(qs, slot, env);
            TrajectoryStep ts;
            ts.state = std::move(enc);
            ts.action = slot;
            if (config.mask_illegal) ts.mask = std::move(mask);
            ts.reward = res.reward * config.reward_scale;
            traj.steps.push_back(std::move(ts));
        }
        traj.terminal = is_complete(qs);
        return traj;
    };

    return train_loop(std::move(net), static_cast<std::int64_t>(train.items.size()), config,
                      hooks, episode);
}

} // namespace merlin
