#pragma once

#include <span>
#include <vector>

#include "merlin/internal_mdp.hpp"
#include "merlin/policy_net.hpp"

namespace merlin {

/// Deterministic action of a frozen internal policy: argmax of the policy head
/// over legal actions, ties toward the lowest index. Masking guarantees
/// termination within k+1 actions and makes per-item traces reproducible.
InternalAction greedy_internal_action(const PolicyNet& net, const InternalState& state);

/// Full greedy trajectory of one item processed alone.
struct ItemTrace {
    std::vector<int> action_indices;  // flat indices incl. the terminal classify
    double total_seconds = 0.0;
    Label verdict = Label::negative;
    int queries = 0;
};

ItemTrace trace_item(const PolicyNet& net, const FileItem& item);

struct InternalEval {
    double accuracy = 0.0;
    double mean_elapsed_seconds = 0.0;
    double mean_queries = 0.0;
};

/// Greedy evaluation over a held-out set: fraction of correct verdicts and the
/// mean per-item processing time.
InternalEval evaluate_internal(const PolicyNet& net, std::span<const FileItem> items);

} // namespace merlin
