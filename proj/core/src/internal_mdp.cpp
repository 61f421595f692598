#include "merlin/internal_mdp.hpp"

#include <algorithm>
#include <cmath>

namespace merlin {

int InternalState::queried_count() const {
    return static_cast<int>(std::count_if(outputs.begin(), outputs.end(),
                                          [](double v) { return v != kUnqueried; }));
}

InternalAction InternalAction::from_index(int index, int detector_count) {
    if (index < 0 || index >= action_count(detector_count))
        throw UsageError("action index out of range");
    if (index < detector_count) return query_detector(index);
    return index == detector_count ? classify_negative() : classify_positive();
}

int InternalAction::to_index(int detector_count) const {
    switch (type) {
        case Type::query: return detector;
        case Type::classify_negative: return detector_count;
        case Type::classify_positive: return detector_count + 1;
    }
    throw UsageError("invalid action type");
}

double CostFunction::operator()(double t) const {
    switch (kind) {
        case Kind::linear: return slope * t;
        case Kind::affine: return intercept + slope * t;
        case Kind::custom_monotone: {
            if (knots.empty()) throw ConfigError("custom cost function has no knots");
            if (t <= knots.front().first) return knots.front().second;
            for (std::size_t i = 1; i < knots.size(); ++i) {
                if (t <= knots[i].first) {
                    const auto& [t0, v0] = knots[i - 1];
                    const auto& [t1, v1] = knots[i];
                    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                }
            }
            if (knots.size() == 1) return knots.back().second;
            const auto& [t0, v0] = knots[knots.size() - 2];
            const auto& [t1, v1] = knots.back();
            return v1 + (v1 - v0) / (t1 - t0) * (t - t1);
        }
    }
    throw ConfigError("invalid cost function kind");
}

void CostFunction::validate() const {
    switch (kind) {
        case Kind::linear:
            if (slope < 0.0) throw ConfigError("cost function: slope must be >= 0");
            return;
        case Kind::affine:
            if (slope < 0.0) throw ConfigError("cost function: slope must be >= 0");
            if (intercept < 0.0) throw ConfigError("cost function: C(0) must be >= 0");
            return;
        case Kind::custom_monotone: {
            if (knots.empty()) throw ConfigError("cost function: no knots");
            if (knots.front().second < 0.0 || knots.front().first < 0.0)
                throw ConfigError("cost function: knots must satisfy C(0) >= 0");
            for (std::size_t i = 1; i < knots.size(); ++i) {
                if (knots[i].first <= knots[i - 1].first)
                    throw ConfigError("cost function: knot times must increase");
                if (knots[i].second < knots[i - 1].second)
                    throw ConfigError("cost function: values must be non-decreasing");
            }
            return;
        }
    }
    throw ConfigError("invalid cost function kind");
}

double RewardTerm::evaluate(const CostFunction& cost, double elapsed) const {
    return kind == Kind::constant ? value : value * cost(elapsed);
}

RewardSetup RewardSetup::preset(std::string_view name) {
    const CostFunction linear{};  // C(t) = t
    auto cost = [](double coeff) { return RewardTerm::cost_scaled(coeff); };
    auto constant = [](double v) { return RewardTerm::constant(v); };
    if (name == "exp1") return {cost(1), cost(1), cost(-1), cost(-1), linear};
    if (name == "exp2") return {cost(1), cost(1), cost(-10), cost(-10), linear};
    if (name == "exp3") return {constant(1), constant(1), cost(-1), cost(-1), linear};
    if (name == "exp4") return {constant(10), constant(10), cost(-1), cost(-1), linear};
    if (name == "exp5") return {constant(100), constant(100), cost(-1), cost(-1), linear};
    throw ConfigError("unknown reward preset '" + std::string(name) +
                      "' (valid: exp1 exp2 exp3 exp4 exp5)");
}

std::vector<std::string> RewardSetup::preset_names() {
    return {"exp1", "exp2", "exp3", "exp4", "exp5"};
}

InternalState internal_reset(const FileItem& item) {
    InternalState s;
    s.outputs.assign(item.readings.size(), kUnqueried);
    return s;
}

InternalStepResult internal_step(InternalState& state, const InternalAction& action,
                                 const FileItem& item, const RewardSetup& setup,
                                 double illegal_penalty) {
    if (state.terminal) throw UsageError("internal_step: state is terminal");
    const int k = state.detector_count();
    if (k != static_cast<int>(item.readings.size()))
        throw UsageError("internal_step: state/item detector count mismatch");

    InternalStepResult res;
    if (action.type == InternalAction::Type::query) {
        if (action.detector < 0 || action.detector >= k)
            throw UsageError("internal_step: detector index out of range");
        if (state.queried(action.detector)) {
            res.reward = illegal_penalty;
            res.illegal = true;
            return res;
        }
        const Reading& rd = item.readings[static_cast<std::size_t>(action.detector)];
        state.outputs[static_cast<std::size_t>(action.detector)] = rd.confidence;
        state.elapsed_seconds += rd.runtime;
        res.dt = rd.runtime;
        return res;
    }

    const Label verdict = action.type == InternalAction::Type::classify_positive
                              ? Label::positive
                              : Label::negative;
    state.terminal = true;
    state.verdict = verdict;
    const bool correct = verdict == item.label;
    const RewardTerm& term = correct
        ? (item.is_positive() ? setup.tp : setup.tn)
        : (item.is_positive() ? setup.fn : setup.fp);
    res.reward = term.evaluate(setup.cost_fn, state.elapsed_seconds);
    res.done = true;
    return res;
}

std::vector<std::uint8_t> legal_actions(const InternalState& state) {
    const int k = state.detector_count();
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(action_count(k)), 0);
    if (state.terminal) return mask;
    for (int j = 0; j < k; ++j)
        mask[static_cast<std::size_t>(j)] = state.queried(j) ? 0 : 1;
    mask[static_cast<std::size_t>(k)] = 1;
    mask[static_cast<std::size_t>(k + 1)] = 1;
    return mask;
}

} // namespace merlin
