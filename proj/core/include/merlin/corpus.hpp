#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "merlin/errors.hpp"
#include "merlin/rng.hpp"

namespace merlin {

enum class Label : std::uint8_t { negative = 0, positive = 1 };

/// One classifier/detector the internal agent can query.
struct DetectorProfile {
    int id = 0;
    double mean_runtime = 1.0;     // seconds, > 0
    double runtime_sd = 0.0;       // seconds, >= 0
    double discrimination = 0.5;   // in [0,1]; 1 = perfectly separates classes
    double noise_sd = 0.5;         // >= 0

    bool operator==(const DetectorProfile&) const = default;
};

/// Pre-sampled detector response for one (item, detector) pair.
struct Reading {
    double confidence = 0.0;  // in [0,1]
    double runtime = 0.0;     // seconds, > 0

    bool operator==(const Reading&) const = default;
};

/// One queue item. Readings are latent: sampled once at creation so every
/// scheduler sees the identical stochastic realization.
struct FileItem {
    std::int64_t id = 0;
    Label label = Label::negative;
    std::int64_t size_bytes = 1;          // only the SFF/LFF baselines look at this
    std::vector<Reading> readings;        // exactly one per detector

    bool is_positive() const { return label == Label::positive; }
    bool operator==(const FileItem&) const = default;
};

struct SizeModel {
    double log_mean = 12.3;        // log-normal parameters for size_bytes
    double log_sd = 1.0;
    double time_rank_corr = 0.6;   // in [0,1]: rank coupling between size and total latent runtime

    bool operator==(const SizeModel&) const = default;
};

struct CorpusConfig {
    int n_items = 2000;
    int n_detectors = 5;
    double class_balance = 0.5;      // fraction of positive items
    double balance_tolerance = 0.02;
    double confidence_gain = 1.2;    // logit scale; grows as discrimination -> 1
    std::vector<DetectorProfile> detectors;  // empty = default ladder for n_detectors
    SizeModel size;

    bool operator==(const CorpusConfig&) const = default;
};

struct Corpus {
    std::vector<DetectorProfile> detectors;
    std::vector<FileItem> items;
    std::uint64_t seed = 0;
    CorpusConfig config;

    int detector_count() const { return static_cast<int>(detectors.size()); }
    bool operator==(const Corpus&) const = default;
};

/// Default detector ladder: runtimes rise geometrically, discrimination rises
/// with cost. Tuned so a cost-aware internal policy resolves most items with
/// the cheap front detectors and only escalates ambiguous ones.
std::vector<DetectorProfile> default_detectors(int n_detectors);

/// Deterministic in (config, seed). Confidences follow a logistic transform of
/// label-signed discrimination plus Gaussian noise; runtimes a truncated-at-zero
/// normal per detector.
Corpus generate_corpus(const CorpusConfig& config, std::uint64_t seed);

/// Label-stratified disjoint partition; returns (train, test).
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

inline constexpr int kCorpusFormatVersion = 1;

} // namespace merlin
