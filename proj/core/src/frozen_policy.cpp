#include "merlin/frozen_policy.hpp"

namespace merlin {

InternalAction greedy_internal_action(const PolicyNet& net, const InternalState& state) {
    if (state.terminal) throw UsageError("greedy_internal_action: state is terminal");
    const ActionMask mask = legal_actions(state);
    const ForwardResult fwd = net.forward(state.outputs, &mask);
    return InternalAction::from_index(greedy_action(fwd.probs), state.detector_count());
}

ItemTrace trace_item(const PolicyNet& net, const FileItem& item) {
    // Masked greedy never re-queries, so the loop is bounded by k+1 actions.
    const RewardSetup setup = RewardSetup::preset("exp3");  // reward value unused here
    InternalState state = internal_reset(item);
    ItemTrace trace;
    const int k = state.detector_count();
    while (!state.terminal) {
        const InternalAction a = greedy_internal_action(net, state);
        internal_step(state, a, item, setup);
        trace.action_indices.push_back(a.to_index(k));
        if (!a.is_classify()) ++trace.queries;
    }
    trace.total_seconds = state.elapsed_seconds;
    trace.verdict = *state.verdict;
    return trace;
}

InternalEval evaluate_internal(const PolicyNet& net, std::span<const FileItem> items) {
    if (items.empty()) throw UsageError("evaluate_internal: no items");
    InternalEval ev;
    for (const FileItem& item : items) {
        const ItemTrace tr = trace_item(net, item);
        if (tr.verdict == item.label) ev.accuracy += 1.0;
        ev.mean_elapsed_seconds += tr.total_seconds;
        ev.mean_queries += tr.queries;
    }
    const double n = static_cast<double>(items.size());
    ev.accuracy /= n;
    ev.mean_elapsed_seconds /= n;
    ev.mean_queries /= n;
    return ev;
}

} // namespace merlin
