#include "merlin/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace merlin {

namespace {

using nlohmann::json;

void validate_config(const CorpusConfig& c) {
    if (c.n_items < 1) throw ConfigError("corpus config: n_items must be >= 1");
    if (c.n_detectors < 1) throw ConfigError("corpus config: n_detectors must be >= 1");
    if (c.class_balance <= 0.0 || c.class_balance >= 1.0)
        throw ConfigError("corpus config: class_balance must be in (0,1)");
    if (c.confidence_gain <= 0.0) throw ConfigError("corpus config: confidence_gain must be > 0");
    if (c.size.time_rank_corr < 0.0 || c.size.time_rank_corr > 1.0)
        throw ConfigError("corpus config: time_rank_corr must be in [0,1]");
}

void validate_detectors(const std::vector<DetectorProfile>& dets) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
        const auto& d = dets[j];
        if (d.id != static_cast<int>(j))
            throw ConfigError("detector ids must be contiguous from 0");
        if (d.mean_runtime <= 0.0) throw ConfigError("detector mean_runtime must be > 0");
        if (d.runtime_sd < 0.0) throw ConfigError("detector runtime_sd must be >= 0");
        if (d.discrimination < 0.0 || d.discrimination > 1.0)
            throw ConfigError("detector discrimination must be in [0,1]");
        if (d.noise_sd < 0.0) throw ConfigError("detector noise_sd must be >= 0");
    }
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Confidence for an item with label sign s in {-1,+1}: sigmoid of
/// gain/(1-d) * (d*s + noise). The gain diverges as d -> 1, so a perfect
/// noiseless detector yields exactly 1.0 / 0.0.
double sample_confidence(const DetectorProfile& det, double gain, double label_sign, Rng& rng) {
    const double noise = det.noise_sd > 0.0 ? rng.normal(0.0, det.noise_sd) : 0.0;
    const double raw = det.discrimination * label_sign + noise;
    double scale;
    if (det.discrimination >= 1.0) {
        scale = std::numeric_limits<double>::infinity();
    } else {
        scale = gain / (1.0 - det.discrimination);
    }
    double c = logistic(scale * raw);
    if (std::isnan(c)) c = 0.5;  // scale=inf with raw exactly 0
    return c;
}

json detector_to_json(const DetectorProfile& d) {
    return json{{"id", d.id},
                {"mean_runtime", d.mean_runtime},
                {"runtime_sd", d.runtime_sd},
                {"discrimination", d.discrimination},
                {"noise_sd", d.noise_sd}};
}

DetectorProfile detector_from_json(const json& j) {
    DetectorProfile d;
    d.id = j.at("id").get<int>();
    d.mean_runtime = j.at("mean_runtime").get<double>();
    d.runtime_sd = j.at("runtime_sd").get<double>();
    d.discrimination = j.at("discrimination").get<double>();
    d.noise_sd = j.at("noise_sd").get<double>();
    return d;
}

json config_to_json(const CorpusConfig& c) {
    json dets = json::array();
    for (const auto& d : c.detectors) dets.push_back(detector_to_json(d));
    return json{{"n_items", c.n_items},
                {"n_detectors", c.n_detectors},
                {"class_balance", c.class_balance},
                {"balance_tolerance", c.balance_tolerance},
                {"confidence_gain", c.confidence_gain},
                {"detectors", dets},
                {"size", json{{"log_mean", c.size.log_mean},
                              {"log_sd", c.size.log_sd},
                              {"time_rank_corr", c.size.time_rank_corr}}}};
}

CorpusConfig config_from_json(const json& j) {
    CorpusConfig c;
    c.n_items = j.at("n_items").get<int>();
    c.n_detectors = j.at("n_detectors").get<int>();
    c.class_balance = j.at("class_balance").get<double>();
    c.balance_tolerance = j.at("balance_tolerance").get<double>();
    c.confidence_gain = j.at("confidence_gain").get<double>();
    for (const auto& dj : j.at("detectors")) c.detectors.push_back(detector_from_json(dj));
    const auto& sj = j.at("size");
    c.size.log_mean = sj.at("log_mean").get<double>();
    c.size.log_sd = sj.at("log_sd").get<double>();
    c.size.time_rank_corr = sj.at("time_rank_corr").get<double>();
    return c;
}

} // namespace

std::vector<DetectorProfile> default_detectors(int n_detectors) {
    if (n_detectors < 1) throw ConfigError("default_detectors: n_detectors must be >= 1");
    // Anchor ladder; interpolated geometrically in runtime for other counts.
    struct Anchor { double rt, rt_sd, disc, noise; };
    static const Anchor lo{0.8, 0.15, 0.60, 0.42};
    static const Anchor hi{16.0, 3.0, 0.90, 0.42};
    std::vector<DetectorProfile> out;
    out.reserve(n_detectors);
    for (int j = 0; j < n_detectors; ++j) {
        const double t = n_detectors == 1 ? 0.5 : static_cast<double>(j) / (n_detectors - 1);
        DetectorProfile d;
        d.id = j;
        d.mean_runtime = lo.rt * std::pow(hi.rt / lo.rt, t);
        d.runtime_sd = lo.rt_sd * std::pow(hi.rt_sd / lo.rt_sd, t);
        d.discrimination = lo.disc + (hi.disc - lo.disc) * t;
        d.noise_sd = lo.noise + (hi.noise - lo.noise) * t;
        out.push_back(d);
    }
    return out;
}

Corpus generate_corpus(const CorpusConfig& config, std::uint64_t seed) {
    validate_config(config);

    Corpus corpus;
    corpus.seed = seed;
    corpus.config = config;
    corpus.detectors = config.detectors.empty() ? default_detectors(config.n_detectors)
                                                : config.detectors;
    if (static_cast<int>(corpus.detectors.size()) != config.n_detectors)
        throw ConfigError("corpus config: detectors list does not match n_detectors");
    validate_detectors(corpus.detectors);

    const int n = config.n_items;
    const int k = config.n_detectors;
    Rng root(seed);

    // Exact label counts, then a seeded shuffle for placement.
    const int n_pos = static_cast<int>(std::llround(n * config.class_balance));
    std::vector<Label> labels(static_cast<std::size_t>(n), Label::negative);
    std::fill(labels.begin(), labels.begin() + n_pos, Label::positive);
    {
        Rng r = root.fork(1);
        for (int i = n - 1; i > 0; --i) {
            const int j = r.uniform_int(0, i);
            std::swap(labels[i], labels[j]);
        }
    }

    corpus.items.reserve(static_cast<std::size_t>(n));
    std::vector<double> total_runtime(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        FileItem item;
        item.id = i;
        item.label = labels[static_cast<std::size_t>(i)];
        item.readings.reserve(static_cast<std::size_t>(k));
        const double sign = item.is_positive() ? 1.0 : -1.0;
        Rng r = root.fork(1000 + static_cast<std::uint64_t>(i));
        for (int j = 0; j < k; ++j) {
            const auto& det = corpus.detectors[static_cast<std::size_t>(j)];
            Reading rd;
            rd.confidence = sample_confidence(det, config.confidence_gain, sign, r);
            rd.runtime = r.truncated_normal_positive(det.mean_runtime, det.runtime_sd);
            total_runtime[static_cast<std::size_t>(i)] += rd.runtime;
            item.readings.push_back(rd);
        }
        corpus.items.push_back(std::move(item));
    }

    // Sizes: log-normal marginals, rank-coupled to total latent runtime so
    // SFF/LFF are meaningful ("smaller file is likely quicker").
    {
        Rng r = root.fork(2);
        std::vector<double> sizes(static_cast<std::size_t>(n));
        for (auto& s : sizes) s = std::exp(r.normal(config.size.log_mean, config.size.log_sd));
        std::sort(sizes.begin(), sizes.end());

        const double rho = config.size.time_rank_corr;
        std::vector<double> score(static_cast<std::size_t>(n));
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::vector<int> time_rank(static_cast<std::size_t>(n));
        {
            std::vector<int> by_time(order);
            std::sort(by_time.begin(), by_time.end(), [&](int a, int b) {
                const double ta = total_runtime[static_cast<std::size_t>(a)];
                const double tb = total_runtime[static_cast<std::size_t>(b)];
                return ta != tb ? ta < tb : a < b;
            });
            for (int rank = 0; rank < n; ++rank)
                time_rank[static_cast<std::size_t>(by_time[static_cast<std::size_t>(rank)])] = rank;
        }
        for (int i = 0; i < n; ++i)
            score[static_cast<std::size_t>(i)] =
                rho * time_rank[static_cast<std::size_t>(i)] + (1.0 - rho) * n * r.uniform01();
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = score[static_cast<std::size_t>(a)];
            const double sb = score[static_cast<std::size_t>(b)];
            return sa != sb ? sa < sb : a < b;
        });
        for (int rank = 0; rank < n; ++rank) {
            auto& item = corpus.items[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])];
            item.size_bytes = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::llround(sizes[static_cast<std::size_t>(rank)])));
        }
    }

    return corpus;
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split_train_test: test_fraction must be in (0,1)");

    std::vector<int> pos, neg;
    for (int i = 0; i < static_cast<int>(corpus.items.size()); ++i) {
        (corpus.items[static_cast<std::size_t>(i)].is_positive() ? pos : neg).push_back(i);
    }

    Rng rng(seed);
    auto pick_test = [&](std::vector<int>& ids, std::uint64_t stream) {
        Rng r = rng.fork(stream);
        for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i) {
            const int j = r.uniform_int(0, i);
            std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
        }
        const int n_test = static_cast<int>(std::llround(ids.size() * test_fraction));
        return std::vector<int>(ids.begin(), ids.begin() + n_test);
    };
    std::vector<int> test_ids = pick_test(pos, 10);
    {
        auto neg_test = pick_test(neg, 11);
        test_ids.insert(test_ids.end(), neg_test.begin(), neg_test.end());
    }
    std::sort(test_ids.begin(), test_ids.end());

    Corpus train, test;
    train.detectors = test.detectors = corpus.detectors;
    train.seed = test.seed = corpus.seed;
    train.config = test.config = corpus.config;
    std::size_t t = 0;
    for (int i = 0; i < static_cast<int>(corpus.items.size()); ++i) {
        const bool in_test = t < test_ids.size() && test_ids[t] == i;
        if (in_test) {
            ++t;
            test.items.push_back(corpus.items[static_cast<std::size_t>(i)]);
        } else {
            train.items.push_back(corpus.items[static_cast<std::size_t>(i)]);
        }
    }
    return {std::move(train), std::move(test)};
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    json items = json::array();
    for (const auto& it : corpus.items) {
        json readings = json::array();
        for (const auto& rd : it.readings)
            readings.push_back(json{{"confidence", rd.confidence}, {"runtime", rd.runtime}});
        items.push_back(json{{"id", it.id},
                             {"label", it.label == Label::positive ? 1 : 0},
                             {"size_bytes", it.size_bytes},
                             {"readings", std::move(readings)}});
    }
    json dets = json::array();
    for (const auto& d : corpus.detectors) dets.push_back(detector_to_json(d));

    json doc{{"format_version", kCorpusFormatVersion},
             {"kind", "merlin.corpus"},
             {"seed", corpus.seed},
             {"config", config_to_json(corpus.config)},
             {"detectors", std::move(dets)},
             {"items", std::move(items)}};

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(1, '\t') << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("corpus parse error: ") + e.what(), e.byte);
    }

    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kCorpusFormatVersion) throw VersionError(version, kCorpusFormatVersion);

        Corpus corpus;
        corpus.seed = doc.at("seed").get<std::uint64_t>();
        corpus.config = config_from_json(doc.at("config"));
        for (const auto& dj : doc.at("detectors"))
            corpus.detectors.push_back(detector_from_json(dj));
        for (const auto& ij : doc.at("items")) {
            FileItem it;
            it.id = ij.at("id").get<std::int64_t>();
            it.label = ij.at("label").get<int>() != 0 ? Label::positive : Label::negative;
            it.size_bytes = ij.at("size_bytes").get<std::int64_t>();
            for (const auto& rj : ij.at("readings")) {
                Reading rd;
                rd.confidence = rj.at("confidence").get<double>();
                rd.runtime = rj.at("runtime").get<double>();
                it.readings.push_back(rd);
            }
            if (it.readings.size() != corpus.detectors.size())
                throw ParseError("item " + std::to_string(it.id) + " has wrong reading count", 0);
            corpus.items.push_back(std::move(it));
        }
        return corpus;
    } catch (const json::exception& e) {
        throw ParseError(std::string("corpus field error: ") + e.what(), 0);
    }
}

} // namespace merlin
