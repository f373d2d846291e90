#pragma once

// Synthetic flow-feature scenarios: Gaussian self clusters, anomaly clusters
// placed away from self, a drifted copy of the self clusters, and signal frames
// whose PAMP/danger levels rise during attack episodes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ais/dca.hpp"
#include "ais/error.hpp"
#include "ais/random.hpp"
#include "ais/representation.hpp"

namespace ais {

struct ScenarioSpec {
    std::size_t dims = 2;
    std::size_t n_self_train = 500;
    std::size_t n_self_test = 200;
    std::size_t n_anomaly = 200;
    double self_spread = 0.05;     // per-axis standard deviation of self clusters
    double anomaly_spread = 0.05;
    double drift = 0.1;            // shift of every self cluster axis in the drifted set
    double feature_scale = 100.0;  // raw value = design value * scale
    std::size_t episode_length = 20;
    std::size_t antigens_per_frame = 4;
    std::uint64_t seed = 42;

    void validate() const {
        if (dims == 0) throw InputError("dims must be > 0");
        if (n_self_train == 0) throw InputError("n_self_train must be > 0");
        if (!(self_spread > 0.0) || !(anomaly_spread > 0.0)) throw InputError("spreads must be > 0");
        if (!(feature_scale > 0.0)) throw InputError("feature_scale must be > 0");
        if (episode_length == 0 || antigens_per_frame == 0)
            throw InputError("episode_length and antigens_per_frame must be > 0");
    }
};

struct LabeledRecord {
    RawRecord record;
    bool anomalous = false;
};

struct Scenario {
    std::vector<std::string> feature_names;
    std::vector<RawRecord> self_train;
    std::vector<RawRecord> drifted_self;
    std::vector<LabeledRecord> traffic;  // in episode order
    std::vector<SignalFrame> frames;
};

// Self clusters sit on the main diagonal at 0.25 and 0.75 on every axis;
// anomaly clusters sit on the alternating corners (0.25, 0.75, ...) and
// (0.75, 0.25, ...).
inline std::vector<std::vector<double>> self_centers(std::size_t dims) {
    return {std::vector<double>(dims, 0.25), std::vector<double>(dims, 0.75)};
}

inline std::vector<std::vector<double>> anomaly_centers(std::size_t dims) {
    std::vector<double> a(dims), b(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        a[i] = i % 2 == 0 ? 0.25 : 0.75;
        b[i] = i % 2 == 0 ? 0.75 : 0.25;
    }
    if (dims == 1) return {{0.5}};
    return {a, b};
}

namespace detail {

inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline RawRecord make_record(std::string id, const std::vector<double>& design, double scale,
                             const std::vector<std::string>& names) {
    RawRecord r;
    r.id = std::move(id);
    for (std::size_t i = 0; i < design.size(); ++i) r.fields.emplace_back(names[i], format_value(design[i] * scale));
    return r;
}

inline std::vector<double> draw_around(const std::vector<double>& center, double sd, double shift, Rng& rng) {
    std::vector<double> p(center.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(center[i] + shift + rng.normal(0.0, sd), 0.0, 1.0);
    return p;
}

}  // namespace detail

inline Scenario generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Scenario sc;
    for (std::size_t i = 0; i < spec.dims; ++i) sc.feature_names.push_back("f" + std::to_string(i));
    Rng rng(spec.seed);
    const auto selfc = self_centers(spec.dims);
    const auto anomc = anomaly_centers(spec.dims);

    for (std::size_t i = 0; i < spec.n_self_train; ++i)
        sc.self_train.push_back(detail::make_record(
            "s" + std::to_string(i), detail::draw_around(selfc[i % selfc.size()], spec.self_spread, 0.0, rng),
            spec.feature_scale, sc.feature_names));
    for (std::size_t i = 0; i < spec.n_self_train; ++i)
        sc.drifted_self.push_back(detail::make_record(
            "d" + std::to_string(i),
            detail::draw_around(selfc[i % selfc.size()], spec.self_spread, spec.drift, rng), spec.feature_scale,
            sc.feature_names));

    std::vector<LabeledRecord> normal, attack;
    for (std::size_t i = 0; i < spec.n_self_test; ++i)
        normal.push_back({detail::make_record("n" + std::to_string(i),
                                              detail::draw_around(selfc[i % selfc.size()], spec.self_spread, 0.0, rng),
                                              spec.feature_scale, sc.feature_names),
                          false});
    for (std::size_t i = 0; i < spec.n_anomaly; ++i)
        attack.push_back({detail::make_record("a" + std::to_string(i),
                                              detail::draw_around(anomc[i % anomc.size()], spec.anomaly_spread, 0.0, rng),
                                              spec.feature_scale, sc.feature_names),
                          true});

    // Alternate normal and attack episodes until both pools are drained.
    std::size_t ni = 0, ai = 0;
    for (bool attack_turn = false; ni < normal.size() || ai < attack.size(); attack_turn = !attack_turn) {
        auto& pool = attack_turn ? attack : normal;
        auto& idx = attack_turn ? ai : ni;
        const std::size_t end = std::min(pool.size(), idx + spec.episode_length);
        if (idx == end) continue;
        const bool is_attack = attack_turn;
        for (std::size_t begin = idx; begin < end; begin += spec.antigens_per_frame) {
            SignalFrame f;
            f.timestamp = static_cast<std::int64_t>(sc.frames.size());
            for (std::size_t j = begin; j < std::min(end, begin + spec.antigens_per_frame); ++j)
                f.active_antigens.push_back(pool[j].record.id);
            if (is_attack) {
                f.pamp = rng.uniform(0.5, 1.5);
                f.danger = rng.uniform(0.5, 1.5);
                f.safe = rng.uniform(0.0, 0.3);
            } else {
                f.pamp = 0.0;
                f.danger = rng.uniform(0.0, 0.3);
                f.safe = rng.uniform(1.0, 2.0);
            }
            sc.frames.push_back(std::move(f));
        }
        for (; idx < end; ++idx) sc.traffic.push_back(pool[idx]);
    }
    return sc;
}

}  // namespace ais
