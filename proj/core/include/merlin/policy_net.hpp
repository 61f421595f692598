#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "merlin/errors.hpp"
#include "merlin/rng.hpp"

namespace merlin {

using ActionMask = std::vector<std::uint8_t>;

struct ForwardResult {
    std::vector<double> probs;  // masked softmax; masked entries exactly 0
    double value = 0.0;
};

/// One-hidden-layer actor-critic net: shared ReLU hidden layer, softmax policy
/// head and scalar value head.
struct PolicyNet {
    int input_dim = 0;
    int hidden_dim = 0;
    int action_dim = 0;
    std::vector<double> w1, b1;  // hidden x input (row-major), hidden
    std::vector<double> wp, bp;  // action x hidden, action
    std::vector<double> wv, bv;  // 1 x hidden, 1

    /// Glorot-uniform init: +-sqrt(6 / (fan_in + fan_out)).
    static PolicyNet init(int input_dim, int hidden_dim, int action_dim, Rng& rng);

    ForwardResult forward(std::span<const double> x, const ActionMask* mask = nullptr) const;

    std::size_t parameter_count() const;
    bool operator==(const PolicyNet&) const = default;
};

/// Sample an index proportionally to probs. Throws UsageError if probs sums to 0.
int sample_action(std::span<const double> probs, Rng& rng);

/// Deterministic argmax over probs; ties broken toward the lowest index.
int greedy_action(std::span<const double> probs);

/// FNV-1a over the raw parameter bytes; used for freeze contracts.
std::uint64_t parameter_hash(const PolicyNet& net);

} // namespace merlin
