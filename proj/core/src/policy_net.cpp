#include "merlin/policy_net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace merlin {

PolicyNet PolicyNet::init(int input_dim, int hidden_dim, int action_dim, Rng& rng) {
    if (input_dim < 1 || hidden_dim < 1 || action_dim < 1)
        throw ConfigError("PolicyNet::init: all dimensions must be >= 1");
    PolicyNet net;
    net.input_dim = input_dim;
    net.hidden_dim = hidden_dim;
    net.action_dim = action_dim;
    auto fill = [&rng](std::vector<double>& w, std::size_t count, int fan_in, int fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        w.resize(count);
        for (auto& v : w) v = rng.uniform(-bound, bound);
    };
    fill(net.w1, static_cast<std::size_t>(hidden_dim) * input_dim, input_dim, hidden_dim);
    net.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    fill(net.wp, static_cast<std::size_t>(action_dim) * hidden_dim, hidden_dim, action_dim);
    net.bp.assign(static_cast<std::size_t>(action_dim), 0.0);
    fill(net.wv, static_cast<std::size_t>(hidden_dim), hidden_dim, 1);
    net.bv.assign(1, 0.0);
    return net;
}

std::size_t PolicyNet::parameter_count() const {
    return w1.size() + b1.size() + wp.size() + bp.size() + wv.size() + bv.size();
}

ForwardResult PolicyNet::forward(std::span<const double> x, const ActionMask* mask) const {
    if (static_cast<int>(x.size()) != input_dim)
        throw UsageError("forward: input size mismatch");
    if (mask && static_cast<int>(mask->size()) != action_dim)
        throw UsageError("forward: mask size mismatch");

    std::vector<double> hidden(static_cast<std::size_t>(hidden_dim));
    for (int h = 0; h < hidden_dim; ++h) {
        double z = b1[static_cast<std::size_t>(h)];
        const double* row = &w1[static_cast<std::size_t>(h) * input_dim];
        for (int i = 0; i < input_dim; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
        hidden[static_cast<std::size_t>(h)] = z > 0.0 ? z : 0.0;
    }

    ForwardResult out;
    out.probs.assign(static_cast<std::size_t>(action_dim), 0.0);
    std::vector<double> logits(static_cast<std::size_t>(action_dim));
    double max_logit = -std::numeric_limits<double>::infinity();
    bool any_legal = false;
    for (int a = 0; a < action_dim; ++a) {
        double z = bp[static_cast<std::size_t>(a)];
        const double* row = &wp[static_cast<std::size_t>(a) * hidden_dim];
        for (int h = 0; h < hidden_dim; ++h) z += row[h] * hidden[static_cast<std::size_t>(h)];
        logits[static_cast<std::size_t>(a)] = z;
        if (!mask || (*mask)[static_cast<std::size_t>(a)]) {
            any_legal = true;
            max_logit = std::max(max_logit, z);
        }
    }
    if (!any_legal) throw UsageError("forward: mask leaves no legal action");

    double denom = 0.0;
    for (int a = 0; a < action_dim; ++a) {
        if (mask && !(*mask)[static_cast<std::size_t>(a)]) continue;
        const double e = std::exp(logits[static_cast<std::size_t>(a)] - max_logit);
        out.probs[static_cast<std::size_t>(a)] = e;
        denom += e;
    }
    for (auto& p : out.probs) p /= denom;

    double v = bv[0];
    for (int h = 0; h < hidden_dim; ++h)
        v += wv[static_cast<std::size_t>(h)] * hidden[static_cast<std::size_t>(h)];
    out.value = v;
    return out;
}

int sample_action(std::span<const double> probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) total += p;
    if (total <= 0.0) throw UsageError("sample_action: probabilities sum to zero");
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    // Rounding fell off the end; return the last index with nonzero mass.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return static_cast<int>(i);
    throw UsageError("sample_action: probabilities sum to zero");
}

int greedy_action(std::span<const double> probs) {
    if (probs.empty()) throw UsageError("greedy_action: empty distribution");
    int best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

std::uint64_t parameter_hash(const PolicyNet& net) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (byte * 8)) & 0xFFu;
            h *= 0x100000001B3ull;
        }
    };
    mix(static_cast<std::uint64_t>(net.input_dim));
    mix(static_cast<std::uint64_t>(net.hidden_dim));
    mix(static_cast<std::uint64_t>(net.action_dim));
    for (const auto* vec : {&net.w1, &net.b1, &net.wp, &net.bp, &net.wv, &net.bv})
        for (double v : *vec) mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

} // namespace merlin
