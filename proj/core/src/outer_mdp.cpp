#include "merlin/outer_mdp.hpp"

namespace merlin {

namespace {

QueueSlot make_pad(int k) {
    QueueSlot pad;
    pad.done = true;
    pad.padded = true;
    pad.state.outputs.assign(static_cast<std::size_t>(k), kUnqueried);
    pad.state.terminal = true;
    return pad;
}

QueueSlot make_live(const FileItem& item, double arrival_time) {
    QueueSlot s;
    s.item = item;
    s.state = internal_reset(item);
    s.arrival_time = arrival_time;
    return s;
}

} // namespace

QueueState make_queue_state(const std::vector<FileItem>& items, int n) {
    if (n < 1) throw UsageError("queue: n must be >= 1");
    if (items.empty()) throw UsageError("queue: item list is empty");
    const int k = static_cast<int>(items.front().readings.size());
    QueueState qs;
    qs.n = n;
    qs.k = k;
    qs.slots.reserve(static_cast<std::size_t>(std::max<int>(n, static_cast<int>(items.size()))));
    for (const auto& item : items) {
        if (static_cast<int>(item.readings.size()) != k)
            throw UsageError("queue: items disagree on detector count");
        qs.slots.push_back(make_live(item, 0.0));
    }
    while (qs.slot_count() < n) qs.slots.push_back(make_pad(k));
    return qs;
}

QueueState outer_reset(const std::vector<FileItem>& items, int n) {
    if (static_cast<int>(items.size()) > n)
        throw UsageError("outer_reset: more items than the agent window n");
    return make_queue_state(items, n);
}

void add_arrivals(QueueState& qs, const std::vector<FileItem>& items, double arrival_time) {
    for (const auto& item : items) {
        if (static_cast<int>(item.readings.size()) != qs.k)
            throw UsageError("add_arrivals: detector count mismatch");
        qs.slots.push_back(make_live(item, arrival_time));
    }
}

OuterStepResult outer_step(QueueState& qs, int slot_index, const OuterEnv& env) {
    if (!env.internal) throw UsageError("outer_step: no internal policy");
    OuterStepResult res;
    if (slot_index < 0 || slot_index >= qs.slot_count() ||
        !qs.slots[static_cast<std::size_t>(slot_index)].unfinished()) {
        res.reward = env.illegal_penalty;
        res.illegal = true;
        ++qs.illegal_selections;
        return res;
    }

    const int before = unfinished_count(qs);
    QueueSlot& slot = qs.slots[static_cast<std::size_t>(slot_index)];
    const InternalAction action = greedy_internal_action(*env.internal, slot.state);
    const InternalStepResult step = internal_step(slot.state, action, slot.item, env.setup);
    res.internal_action = action.to_index(qs.k);
    res.dt = step.dt;
    slot.action_trace.push_back(res.internal_action);

    qs.clock += step.dt;
    if (step.dt > 0.0) {
        for (int i = 0; i < qs.slot_count(); ++i) {
            if (i == slot_index) continue;
            QueueSlot& other = qs.slots[static_cast<std::size_t>(i)];
            if (other.unfinished()) other.waiting_seconds += step.dt;
        }
    }

    if (step.done) {
        slot.done = true;
        CompletionRecord rec;
        rec.item_id = slot.item.id;
        rec.processing_seconds = slot.processing_seconds();
        rec.waiting_seconds = slot.waiting_seconds;
        rec.completion_seconds = rec.processing_seconds + rec.waiting_seconds;
        rec.verdict = *slot.state.verdict;
        res.completed = rec;
    }

    res.reward = -step.dt * static_cast<double>(before);
    return res;
}

std::vector<double> encode_outer_state(const QueueState& qs) {
    if (qs.slot_count() != qs.n)
        throw UsageError("encode_outer_state: queue has outgrown the agent window; "
                         "use sub-queue views");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(qs.n) * (qs.k + 1));
    for (const QueueSlot& slot : qs.slots) {
        for (double v : slot.state.outputs) out.push_back(v);
        out.push_back(slot.done ? 1.0 : 0.0);
    }
    return out;
}

bool is_complete(const QueueState& qs) {
    for (const QueueSlot& slot : qs.slots)
        if (slot.unfinished()) return false;
    return true;
}

std::vector<int> active_slots(const QueueState& qs) {
    std::vector<int> out;
    for (int i = 0; i < qs.slot_count(); ++i)
        if (qs.slots[static_cast<std::size_t>(i)].unfinished()) out.push_back(i);
    return out;
}

int unfinished_count(const QueueState& qs) {
    int n = 0;
    for (const QueueSlot& slot : qs.slots)
        if (slot.unfinished()) ++n;
    return n;
}

} // namespace merlin
