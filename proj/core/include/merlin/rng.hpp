#pragma once

#include <cmath>
#include <cstdint>

#include "merlin/errors.hpp"

namespace merlin {

/// Counter-based deterministic RNG (SplitMix64 core).
///
/// Every piece of randomness in the project flows from a single seed through
/// fork(): replications, episodes and generation passes each get an
/// independent stream, so results are bit-reproducible regardless of worker
/// count or evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng from_state(std::uint64_t s) { return Rng(s); }
    std::uint64_t state() const { return state_; }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw UsageError("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Standard normal via Box-Muller (no cached spare, so state stays a
    /// single word and checkpoints round-trip exactly).
    double normal01() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal01(); }

    /// Normal truncated to (0, inf) by rejection; mean must be positive.
    double truncated_normal_positive(double mean, double sd) {
        if (mean <= 0.0) throw UsageError("truncated_normal_positive: mean must be > 0");
        if (sd <= 0.0) return mean;
        for (int i = 0; i < 10000; ++i) {
            const double x = normal(mean, sd);
            if (x > 0.0) return x;
        }
        // Unreachable for sane (mean, sd); keep the draw strictly positive.
        return mean;
    }

    /// Derives an independent stream. Forking does not advance this RNG.
    Rng fork(std::uint64_t stream) const {
        return Rng(mix(state_ ^ mix(stream + 0xD1B54A32D192ED03ull)));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace merlin
