#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "merlin/corpus.hpp"
#include "merlin/frozen_policy.hpp"
#include "merlin/internal_mdp.hpp"
#include "merlin/policy_net.hpp"

namespace merlin {

/// One row of the queue: an item, its internal-agent state and bookkeeping.
/// Padded slots are synthetic done-flagged fillers used to reach the agent's
/// fixed window size; they are never advanced.
struct QueueSlot {
    FileItem item;
    InternalState state;
    bool done = false;
    bool padded = false;
    double waiting_seconds = 0.0;
    double arrival_time = 0.0;
    std::vector<int> action_trace;  // flat internal action indices applied so far

    double processing_seconds() const { return state.elapsed_seconds; }
    bool live() const { return !padded; }
    bool unfinished() const { return !padded && !done; }
};

/// Queue of slots under single-server semantics: exactly one internal action
/// executes at a time and the clock advances by its runtime.
struct QueueState {
    std::vector<QueueSlot> slots;
    double clock = 0.0;
    int n = 0;  // agent window size
    int k = 0;  // detectors per item
    std::int64_t illegal_selections = 0;

    int slot_count() const { return static_cast<int>(slots.size()); }
};

struct CompletionRecord {
    std::int64_t item_id = 0;
    double processing_seconds = 0.0;  // PT
    double waiting_seconds = 0.0;     // WT
    double completion_seconds = 0.0;  // C = PT + WT
    Label verdict = Label::negative;
};

struct OuterEnv {
    const PolicyNet* internal = nullptr;  // frozen; advances the selected slot greedily
    RewardSetup setup = RewardSetup::preset("exp3");
    double illegal_penalty = -1.0;
};

struct OuterStepResult {
    double reward = 0.0;
    double dt = 0.0;
    bool illegal = false;
    int internal_action = -1;  // flat index, -1 on illegal selections
    std::optional<CompletionRecord> completed;
};

/// Fresh queue over 1..n items; shorter lists are padded with done-flagged
/// slots so the encoded state is always n rows.
QueueState outer_reset(const std::vector<FileItem>& items, int n);

/// Like outer_reset but without the upper bound, for dynamic queues that can
/// outgrow the agent window. Pads up to n only when below it.
QueueState make_queue_state(const std::vector<FileItem>& items, int n);

/// Appends newly arrived items as live slots (visible from `arrival_time` on).
void add_arrivals(QueueState& qs, const std::vector<FileItem>& items, double arrival_time);

/// Advances the selected slot by exactly one action of the frozen internal
/// policy. Selecting a done or padded slot costs no simulated time and returns
/// the illegal penalty. Outer reward: -dt * (unfinished count before the step),
/// which telescopes to -sum of completion times over an episode.
OuterStepResult outer_step(QueueState& qs, int slot_index, const OuterEnv& env);

/// Row-major n x (k+1) matrix: per slot the k detector cells then the done
/// flag. Padded rows encode as [-1, ..., -1, 1].
std::vector<double> encode_outer_state(const QueueState& qs);

bool is_complete(const QueueState& qs);

/// Indices of live unfinished slots, ascending.
std::vector<int> active_slots(const QueueState& qs);

int unfinished_count(const QueueState& qs);

} // namespace merlin
