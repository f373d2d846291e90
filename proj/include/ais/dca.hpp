#pragma once

// Dendritic cell algorithm. Signal frames are fused linearly into a
// costimulation increment and a context increment; cells sample every active
// antigen until their costimulation reaches a migration threshold, then
// present what they sampled as mature (context > 0) or semimature.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ais/error.hpp"
#include "ais/parallel.hpp"
#include "ais/random.hpp"

namespace ais {

struct SignalFrame {
    std::int64_t timestamp = 0;
    double pamp = 0.0;
    double danger = 0.0;
    double safe = 0.0;
    std::vector<std::string> active_antigens;
};

struct FusionWeights {
    double csm_pamp = 2.0;
    double csm_danger = 1.0;
    double csm_safe = 2.0;
    double k_pamp = 2.0;
    double k_danger = 1.0;
    double k_safe = 3.0;  // subtracted

    friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

struct Fused {
    double csm = 0.0;
    double k = 0.0;
};

inline Fused fuse(const SignalFrame& f, const FusionWeights& w) {
    return {w.csm_pamp * f.pamp + w.csm_danger * f.danger + w.csm_safe * f.safe,
            w.k_pamp * f.pamp + w.k_danger * f.danger - w.k_safe * f.safe};
}

enum class CellState { Immature, Mature, Semimature };

struct DendriticCell {
    std::map<std::string, std::uint64_t> sampled;  // multiset: id -> copies
    double csm = 0.0;
    double k = 0.0;
    double migration_threshold = 10.0;
    CellState state = CellState::Immature;

    bool migrated() const { return state != CellState::Immature; }
};

inline DendriticCell dc_step(DendriticCell cell, const SignalFrame& frame, const FusionWeights& w) {
    if (cell.migrated()) throw LifecycleError("cannot step a dendritic cell that has already migrated");
    for (const auto& id : frame.active_antigens) ++cell.sampled[id];
    const Fused inc = fuse(frame, w);
    cell.csm += inc.csm;
    cell.k += inc.k;
    if (cell.csm >= cell.migration_threshold)
        cell.state = cell.k > 0.0 ? CellState::Mature : CellState::Semimature;
    return cell;
}

struct McavEntry {
    std::uint64_t presentations_total = 0;
    std::uint64_t presentations_mature = 0;

    std::optional<double> mcav() const {
        if (presentations_total == 0) return std::nullopt;
        return static_cast<double>(presentations_mature) / static_cast<double>(presentations_total);
    }

    friend bool operator==(const McavEntry&, const McavEntry&) = default;
};

// Keyed by antigen id. Ids seen in the stream but never presented have total 0.
using McavTable = std::map<std::string, McavEntry>;

struct DcaParams {
    std::size_t pool_size = 100;
    double threshold_lo = 5.0;
    double threshold_hi = 15.0;
    std::uint64_t seed = 0;
    FusionWeights weights;
    unsigned threads = 1;
};

// Throws InputError unless timestamps strictly increase and every signal is
// finite and non-negative. The error text carries the frame index.
inline void validate_frames(std::span<const SignalFrame> frames) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        for (double s : {f.pamp, f.danger, f.safe})
            if (!std::isfinite(s) || s < 0.0)
                throw InputError("frame " + std::to_string(i) + ": signals must be finite and non-negative");
        if (i > 0 && f.timestamp <= frames[i - 1].timestamp)
            throw InputError("frame " + std::to_string(i) + ": timestamp " + std::to_string(f.timestamp) +
                             " does not increase");
    }
}

inline McavTable run_dca(std::span<const SignalFrame> frames, const DcaParams& p) {
    if (frames.empty()) throw InputError("signal stream is empty");
    if (p.pool_size == 0) throw InputError("pool_size must be > 0");
    if (!(p.threshold_lo > 0.0 && p.threshold_lo <= p.threshold_hi))
        throw InputError("migration threshold range must satisfy 0 < lo <= hi");
    validate_frames(frames);

    Rng rng(p.seed);
    auto fresh_cell = [&] {
        DendriticCell c;
        c.migration_threshold = rng.uniform(p.threshold_lo, p.threshold_hi);
        return c;
    };

    McavTable table;
    std::vector<DendriticCell> pool;
    pool.reserve(p.pool_size);
    for (std::size_t i = 0; i < p.pool_size; ++i) pool.push_back(fresh_cell());

    for (const auto& frame : frames) {
        for (const auto& id : frame.active_antigens) table.try_emplace(id);
        parallel_for(pool.size(), p.threads,
                     [&](std::size_t i) { pool[i] = dc_step(std::move(pool[i]), frame, p.weights); });
        // Collection and replacement run serially in cell order.
        for (auto& cell : pool) {
            if (!cell.migrated()) continue;
            const bool mature = cell.state == CellState::Mature;
            for (const auto& [id, copies] : cell.sampled) {
                auto& e = table[id];
                e.presentations_total += copies;
                if (mature) e.presentations_mature += copies;
            }
            cell = fresh_cell();
        }
    }
    return table;
}

enum class DangerVerdict { Anomalous, Normal, NoVerdict };

inline std::map<std::string, DangerVerdict> classify_mcav(const McavTable& table, double anomaly_threshold) {
    std::map<std::string, DangerVerdict> out;
    for (const auto& [id, e] : table) {
        const auto m = e.mcav();
        out[id] = !m ? DangerVerdict::NoVerdict
                     : (*m >= anomaly_threshold ? DangerVerdict::Anomalous : DangerVerdict::Normal);
    }
    return out;
}

}  // namespace ais
