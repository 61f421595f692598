#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/corpus.hpp"
#include "merlin/errors.hpp"

namespace merlin {

inline constexpr double kUnqueried = -1.0;
inline constexpr double kDefaultIllegalPenalty = -1.0;

/// Per-item state of the internal agent: one cell per detector, -1 until the
/// detector has been queried, and the accumulated runtime of all queries.
struct InternalState {
    std::vector<double> outputs;   // each -1 or a confidence in [0,1]
    double elapsed_seconds = 0.0;
    bool terminal = false;
    std::optional<Label> verdict;

    int detector_count() const { return static_cast<int>(outputs.size()); }
    bool queried(int detector) const {
        return outputs[static_cast<std::size_t>(detector)] != kUnqueried;
    }
    int queried_count() const;

    bool operator==(const InternalState&) const = default;
};

/// Query one detector, or emit a terminal classification. k + 2 actions total;
/// flat index order: queries 0..k-1, then classify-negative, classify-positive.
struct InternalAction {
    enum class Type { query, classify_negative, classify_positive };
    Type type = Type::query;
    int detector = -1;  // valid when type == query

    static InternalAction query_detector(int j) { return {Type::query, j}; }
    static InternalAction classify_negative() { return {Type::classify_negative, -1}; }
    static InternalAction classify_positive() { return {Type::classify_positive, -1}; }

    static InternalAction from_index(int index, int detector_count);
    int to_index(int detector_count) const;
    bool is_classify() const { return type != Type::query; }

    bool operator==(const InternalAction&) const = default;
};

inline int action_count(int detector_count) { return detector_count + 2; }

/// Monotone non-decreasing time cost C(t) with C(0) >= 0.
struct CostFunction {
    enum class Kind { linear, affine, custom_monotone };
    Kind kind = Kind::linear;
    double slope = 1.0;
    double intercept = 0.0;
    // custom_monotone: piecewise-linear through (t, value) knots, extrapolated
    // by the last segment's slope.
    std::vector<std::pair<double, double>> knots;

    double operator()(double t) const;
    void validate() const;

    bool operator==(const CostFunction&) const = default;
};

/// One of tp/tn/fp/fn: either a constant or coeff * C(t).
struct RewardTerm {
    enum class Kind { constant, cost_scaled };
    Kind kind = Kind::constant;
    double value = 0.0;  // the constant, or the coefficient on C(t)

    static RewardTerm constant(double v) { return {Kind::constant, v}; }
    static RewardTerm cost_scaled(double coeff) { return {Kind::cost_scaled, coeff}; }
    double evaluate(const CostFunction& cost, double elapsed) const;

    bool operator==(const RewardTerm&) const = default;
};

struct RewardSetup {
    RewardTerm tp, tn, fp, fn;
    CostFunction cost_fn;

    /// The five presets exp1..exp5:
    ///   exp1:  C(t),  C(t), -C(t),   -C(t)
    ///   exp2:  C(t),  C(t), -10C(t), -10C(t)
    ///   exp3:  1,     1,    -C(t),   -C(t)
    ///   exp4:  10,    10,   -C(t),   -C(t)
    ///   exp5:  100,   100,  -C(t),   -C(t)
    /// exp1/exp2 reward slower correct analysis and are experimental.
    static RewardSetup preset(std::string_view name);
    static std::vector<std::string> preset_names();

    bool operator==(const RewardSetup&) const = default;
};

struct InternalStepResult {
    double reward = 0.0;
    bool done = false;
    bool illegal = false;
    double dt = 0.0;  // runtime consumed by this action
};

/// Fresh state for an item: all detectors unqueried, elapsed 0.
InternalState internal_reset(const FileItem& item);

/// Applies one action in place. Queries reveal the latent reading and consume
/// its runtime with reward 0; re-queries are illegal (penalty, state
/// unchanged); classifications terminate with the setup's reward.
InternalStepResult internal_step(InternalState& state, const InternalAction& action,
                                 const FileItem& item, const RewardSetup& setup,
                                 double illegal_penalty = kDefaultIllegalPenalty);

/// Mask over the k+2 flat action indices. Classify is always legal while
/// non-terminal; a query is legal only if that detector is still unqueried.
std::vector<std::uint8_t> legal_actions(const InternalState& state);

} // namespace merlin
