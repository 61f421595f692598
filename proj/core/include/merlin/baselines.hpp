#pragma once

#include <array>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "merlin/corpus.hpp"
#include "merlin/frozen_policy.hpp"
#include "merlin/outer_mdp.hpp"

namespace merlin {

/// The eight reference schedulers plus the trained agent. All of them drive
/// the same queue environment and the same frozen internal policy; only the
/// selection order differs.
enum class SchedulerKind { fcfs, sff, lff, mlfq, sept, cbpt, spt, lpt, merlin };

std::string_view to_string(SchedulerKind kind);
SchedulerKind scheduler_from_string(std::string_view name);
std::vector<SchedulerKind> all_scheduler_kinds();
std::vector<std::string> scheduler_names();

/// What each scheduler is allowed to know beyond the shared queue state.
std::string_view info_requirement(SchedulerKind kind);

/// FCFS/SFF/LFF/SEPT/CBPT/SPT/LPT run a started item to completion; MLFQ and
/// the agent may set items aside mid-analysis.
bool is_preemptive(SchedulerKind kind);

/// Realistic = restricted to information the agent also has (size at most).
bool is_realistic(SchedulerKind kind);

double pearson(std::span<const double> x, std::span<const double> y);

/// Empirical distribution of total processing time under the frozen policy,
/// with expected remaining time conditioned on the queried-detector count.
struct SeptModel {
    std::vector<double> expected_remaining;  // index = detectors already queried
    std::vector<std::int64_t> bucket_counts;
    std::vector<double> totals;  // one measured total per training item
    double mean_total = 0.0;

    /// Falls back to the unconditional mean when the bucket is empty.
    double remaining(int queried_count) const;

    bool operator==(const SeptModel&) const = default;
};

SeptModel build_sept_model(const Corpus& train, const PolicyNet& frozen_internal);

/// Detector whose confidences correlate most with the labels (|Pearson r|),
/// ties toward the lowest id.
int choose_cbpt_detector(const Corpus& train);

/// True total classification time per item under the frozen policy, obtained
/// by simulating each item alone. Pure; repeated calls agree exactly.
std::unordered_map<std::int64_t, double> oracle_totals(std::span<const FileItem> items,
                                                       const PolicyNet& frozen_internal);

struct MlfqThresholds {
    double t1 = 0.0;
    double t2 = 0.0;
};

/// 33rd/66th percentiles of the pooled per-detector runtimes in the train split.
MlfqThresholds mlfq_thresholds(const Corpus& train);

/// Mean latent runtime per detector over the train split; MLFQ keys items by
/// the mean runtime of their predicted next detector (per-item true runtimes
/// stay hidden from realistic schedulers).
std::vector<double> detector_mean_runtimes(const Corpus& train);

/// Three priority sub-queues (by next-action runtime) plus the exit lane for
/// slots whose next internal action is the zero-cost terminal classify.
struct MlfqState {
    std::array<std::deque<int>, 3> queues;
    std::deque<int> finishing;
    std::vector<int> bucket_of;        // per slot: 0..2, 3 = finishing, -1 = none
    std::vector<int> seen_trace_len;   // trace length at last assignment

    int member_count() const;
    void clear();
};

/// Everything a baseline may consult besides the live queue state. Built once
/// from the training split; the mutable MLFQ part is per-run.
struct SchedulerContext {
    SchedulerKind kind = SchedulerKind::fcfs;
    const SeptModel* sept = nullptr;
    int cbpt_detector = -1;
    MlfqThresholds thresholds;
    std::vector<double> mean_runtime_by_detector;
    std::unordered_map<std::int64_t, double> totals;  // oracle totals (SPT/LPT)
    MlfqState mlfq;

    /// Clears per-run state; static knowledge is kept.
    void begin_run() { mlfq.clear(); }
};

/// Selects the slot the scheduler advances next. Requires at least one
/// unfinished live slot.
int next_item(SchedulerContext& ctx, const QueueState& qs, const PolicyNet& frozen_internal);

} // namespace merlin
