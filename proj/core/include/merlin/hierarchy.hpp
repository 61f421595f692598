#pragma once

#include <string>
#include <vector>

#include "merlin/outer_mdp.hpp"
#include "merlin/policy_net.hpp"

namespace merlin {

/// A window of exactly n slot positions: real slot indices first, then
/// pad_count synthetic done-flagged pads in the trailing positions.
struct SubQueueView {
    std::vector<int> slot_indices;  // size n - pad_count
    int pad_count = 0;
    int window = 0;  // n
};

struct ReductionLevel {
    int subqueue_count = 0;
    std::vector<int> selected;  // one chosen slot per sub-queue
};

struct ReductionTrace {
    std::vector<ReductionLevel> levels;
    int final_slot = -1;
};

/// Splits the active slots (stable, ascending by index) into ceil(|active|/n)
/// views of exactly n entries; only the last view is padded.
std::vector<SubQueueView> partition(const std::vector<int>& active_slots, int n);

/// Encodes a view as the n x (k+1) matrix the outer agent expects; pad rows
/// are [-1, ..., -1, 1].
std::vector<double> encode_view(const QueueState& qs, const SubQueueView& view);

/// Masked argmax of the outer policy over the view. Never returns a pad or
/// done slot; ties break toward the lowest position.
int select_per_subqueue(const PolicyNet& outer_net, const QueueState& qs,
                        const SubQueueView& view);

/// Tournament reduction: partition + per-view selection until at most n
/// candidates survive, then one final selection over the padded survivor set.
/// For |active| <= n this is exactly one direct selection.
int hierarchical_select(const PolicyNet& outer_net, const QueueState& qs, int n,
                        ReductionTrace* trace = nullptr);

std::string to_json_string(const ReductionTrace& trace);

} // namespace merlin
