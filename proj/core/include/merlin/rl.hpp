#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "merlin/corpus.hpp"
#include "merlin/internal_mdp.hpp"
#include "merlin/policy_net.hpp"
#include "merlin/rng.hpp"

namespace merlin {

struct TrainConfig {
    double learning_rate = 7e-5;
    double decay = 0.99;    // RMSprop exponential decay rate
    double epsilon = 1e-2;  // RMSprop fuzz factor
    int replay_capacity = 10;
    int replay_activation_episode = 1000;
    double gamma = 0.99;
    double entropy_coef = 0.01;
    std::int64_t max_episodes = 20000;
    std::uint64_t seed = 0;
    int hidden_dim = 20;
    double reward_scale = 1.0;  // scales environment rewards before the update
    bool mask_illegal = true;   // mask illegal actions in training rollouts
    double illegal_penalty = -1.0;
    std::int64_t epoch_episodes = 0;  // 0 = one pass over the train split
    std::int64_t episode_step_cap = 10000;

    void validate() const;
};

struct TrajectoryStep {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    ActionMask mask;  // empty = no masking was applied
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    bool terminal = true;

    double total_reward() const;
};

/// FIFO episode store of bounded capacity.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity) : capacity_(capacity) {}
    void push(Trajectory traj);
    const Trajectory& sample(Rng& rng) const;
    std::size_t size() const { return episodes_.size(); }
    bool empty() const { return episodes_.empty(); }

private:
    int capacity_;
    std::deque<Trajectory> episodes_;
};

/// Gradients (or squared-gradient accumulators) with PolicyNet's shapes.
struct NetGradients {
    std::vector<double> w1, b1, wp, bp, wv, bv;

    static NetGradients zeros_like(const PolicyNet& net);
    void add(const NetGradients& other);
    bool is_finite() const;
};

struct RmsPropState {
    NetGradients acc;  // running average of squared gradients

    static RmsPropState zeros_like(const PolicyNet& net);
};

/// Analytic actor-critic gradients of the episode surrogate loss
///   L = sum_t [ -log pi(a_t|s_t) * A_t  -  entropy_coef * H(pi_t)
///               + (G_t - V(s_t))^2 ]
/// with G_t the gamma-discounted return-to-go and the advantage
/// A_t = G_t - V(s_t) held constant (no gradient through the actor term's V).
NetGradients compute_gradients(const PolicyNet& net, const Trajectory& traj, double gamma,
                               double entropy_coef = 0.0);

/// Per parameter: acc = decay*acc + (1-decay)*g^2; p -= lr * g / (sqrt(acc)+eps).
void rmsprop_update(PolicyNet& net, const NetGradients& grads, RmsPropState& state,
                    const TrainConfig& config);

struct Checkpoint {
    PolicyNet net;
    RmsPropState opt;
    std::uint64_t rng_state = 0;
    std::int64_t episode = 0;
    TrainConfig config;
};

inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct EpochInfo {
    int epoch = 0;
    std::int64_t episodes_done = 0;
    const PolicyNet* net = nullptr;
    double mean_return_last_100 = 0.0;
};

struct TrainHooks {
    std::function<void(const EpochInfo&)> on_epoch;
};

struct TrainResult {
    PolicyNet net;
    RmsPropState opt;
    std::vector<double> episode_returns;  // raw (unscaled) return per episode
    std::int64_t episodes = 0;
};

/// Trains the internal agent on single-item episodes sampled uniformly from
/// the train split. Deterministic given (corpus, setup, config).
TrainResult train_internal(const Corpus& train, const RewardSetup& setup,
                           const TrainConfig& config, const TrainHooks& hooks = {});

/// Trains the outer agent on random n-item queues against a frozen internal
/// policy. The internal parameters are never touched.
TrainResult train_outer(const Corpus& train, const PolicyNet& frozen_internal, int n,
                        const TrainConfig& config, const TrainHooks& hooks = {});

} // namespace merlin
