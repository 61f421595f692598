#include "merlin/hierarchy.hpp"

#include <json.hpp>

namespace merlin {

std::vector<SubQueueView> partition(const std::vector<int>& active_slots, int n) {
    if (n < 1) throw UsageError("partition: n must be >= 1");
    if (active_slots.empty()) throw UsageError("partition: no active slots");
    std::vector<SubQueueView> views;
    const int total = static_cast<int>(active_slots.size());
    const int count = (total + n - 1) / n;
    views.reserve(static_cast<std::size_t>(count));
    for (int v = 0; v < count; ++v) {
        SubQueueView view;
        view.window = n;
        const int begin = v * n;
        const int end = std::min(begin + n, total);
        view.slot_indices.assign(active_slots.begin() + begin, active_slots.begin() + end);
        view.pad_count = n - (end - begin);
        views.push_back(std::move(view));
    }
    return views;
}

std::vector<double> encode_view(const QueueState& qs, const SubQueueView& view) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(view.window) * (qs.k + 1));
    for (int idx : view.slot_indices) {
        const QueueSlot& slot = qs.slots[static_cast<std::size_t>(idx)];
        for (double v : slot.state.outputs) out.push_back(v);
        out.push_back(slot.done ? 1.0 : 0.0);
    }
    for (int p = 0; p < view.pad_count; ++p) {
        for (int j = 0; j < qs.k; ++j) out.push_back(kUnqueried);
        out.push_back(1.0);
    }
    return out;
}

int select_per_subqueue(const PolicyNet& outer_net, const QueueState& qs,
                        const SubQueueView& view) {
    ActionMask mask(static_cast<std::size_t>(view.window), 0);
    bool any = false;
    for (std::size_t pos = 0; pos < view.slot_indices.size(); ++pos) {
        if (qs.slots[static_cast<std::size_t>(view.slot_indices[pos])].unfinished()) {
            mask[pos] = 1;
            any = true;
        }
    }
    if (!any) throw UsageError("select_per_subqueue: view has no selectable slot");
    const ForwardResult fwd = outer_net.forward(encode_view(qs, view), &mask);
    const int pos = greedy_action(fwd.probs);
    return view.slot_indices[static_cast<std::size_t>(pos)];
}

int hierarchical_select(const PolicyNet& outer_net, const QueueState& qs, int n,
                        ReductionTrace* trace) {
    if (n < 1) throw UsageError("hierarchical_select: n must be >= 1");
    std::vector<int> candidates = active_slots(qs);
    if (candidates.empty()) throw UsageError("hierarchical_select: no active slots");
    if (trace) *trace = ReductionTrace{};

    while (static_cast<int>(candidates.size()) > n) {
        const std::vector<SubQueueView> views = partition(candidates, n);
        std::vector<int> selected;
        selected.reserve(views.size());
        for (const auto& view : views)
            selected.push_back(select_per_subqueue(outer_net, qs, view));
        if (trace)
            trace->levels.push_back({static_cast<int>(views.size()), selected});
        if (selected.size() == candidates.size()) {
            // n == 1: singleton views cannot shrink the candidate set. The
            // final pick is the first survivor (lowest slot index).
            const int final_slot = selected.front();
            if (trace) trace->final_slot = final_slot;
            return final_slot;
        }
        candidates = std::move(selected);
    }

    SubQueueView last;
    last.window = n;
    last.slot_indices = candidates;
    last.pad_count = n - static_cast<int>(candidates.size());
    const int final_slot = select_per_subqueue(outer_net, qs, last);
    if (trace) {
        trace->levels.push_back({1, {final_slot}});
        trace->final_slot = final_slot;
    }
    return final_slot;
}

std::string to_json_string(const ReductionTrace& trace) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : trace.levels)
        levels.push_back(nlohmann::json{{"subqueue_count", level.subqueue_count},
                                        {"selected", level.selected}});
    return nlohmann::json{{"levels", levels}, {"final_slot", trace.final_slot}}.dump();
}

} // namespace merlin
