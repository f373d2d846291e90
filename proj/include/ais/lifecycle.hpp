#pragma once

// Detector evolution between detection batches: revalidation against a
// drifted self set, age-based pruning of detectors that never matched, a
// bounded gene library of detectors that did, and library-seeded replacement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ais/error.hpp"
#include "ais/negsel.hpp"
#include "ais/random.hpp"

namespace ais {

struct LifecyclePolicy {
    std::int64_t max_age = 50;
    std::uint64_t min_matches_by_age = 1;
    std::int64_t revalidation_interval = 1;
    double library_seed_fraction = 0.5;
    double seed_mutation_scale = 0.05;
    std::size_t library_capacity = 256;

    void validate() const {
        if (max_age <= 0) throw PolicyError("max_age must be > 0");
        if (revalidation_interval <= 0) throw PolicyError("revalidation_interval must be > 0");
        if (!(library_seed_fraction >= 0.0 && library_seed_fraction <= 1.0))
            throw PolicyError("library_seed_fraction must be in [0, 1]");
        if (!(seed_mutation_scale > 0.0)) throw PolicyError("seed_mutation_scale must be > 0");
        if (library_capacity == 0) throw PolicyError("library capacity must be > 0");
    }
};

struct GeneEntry {
    std::vector<double> center;
    double radius = 0.0;
    std::int64_t archived_generation = 0;
    std::uint64_t lifetime_matches = 0;

    friend bool operator==(const GeneEntry&, const GeneEntry&) = default;
};

struct GeneLibrary {
    std::vector<GeneEntry> entries;
    std::size_t capacity = 256;

    friend bool operator==(const GeneLibrary&, const GeneLibrary&) = default;
};

struct Partition {
    DetectorSet kept;
    std::vector<Detector> removed;
};

// Splits off every detector that now overlaps the updated self set.
inline Partition revalidate(const DetectorSet& detectors, const SelfSet& current_self) {
    current_self.validate();
    Partition out;
    out.kept = detectors;
    out.kept.detectors.clear();
    for (const auto& d : detectors.detectors) {
        if (censor(d, current_self))
            out.removed.push_back(d);
        else
            out.kept.detectors.push_back(d);
    }
    return out;
}

// A detector is stale when it is older than max_age and has fewer than
// min_matches_by_age lifetime matches.
inline Partition prune_stale(const DetectorSet& detectors, const LifecyclePolicy& policy,
                             std::int64_t current_generation) {
    Partition out;
    out.kept = detectors;
    out.kept.detectors.clear();
    for (const auto& d : detectors.detectors) {
        const bool stale = current_generation - d.birth_generation > policy.max_age &&
                           d.match_count < policy.min_matches_by_age;
        (stale ? out.removed : out.kept.detectors).push_back(d);
    }
    return out;
}

// Appends the detector's genotype; over capacity, evicts the entry with the
// fewest lifetime matches (ties: oldest archived_generation, then earliest).
inline GeneLibrary archive(const Detector& detector, GeneLibrary library, std::int64_t generation) {
    if (detector.match_count == 0) throw PolicyError("only detectors with at least one match are archived");
    if (library.capacity == 0) throw PolicyError("library capacity must be > 0");
    library.entries.push_back({detector.center, detector.radius, generation, detector.match_count});
    while (library.entries.size() > library.capacity) {
        auto victim = std::min_element(library.entries.begin(), library.entries.end(),
                                       [](const GeneEntry& a, const GeneEntry& b) {
                                           if (a.lifetime_matches != b.lifetime_matches)
                                               return a.lifetime_matches < b.lifetime_matches;
                                           return a.archived_generation < b.archived_generation;
                                       });
        library.entries.erase(victim);
    }
    return library;
}

// Draws `count` library entries uniformly, jitters each center with N(0, scale)
// noise, and keeps the candidates that pass censoring against `self_set`.
inline std::vector<Detector> seed_from_library(const GeneLibrary& library, std::size_t count, double scale,
                                               const SelfSet& self_set, Rng& rng,
                                               std::int64_t birth_generation = 0) {
    std::vector<Detector> out;
    if (library.entries.empty() || count == 0) return out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& e = library.entries[rng.below(library.entries.size())];
        Detector d{0, e.center, e.radius, birth_generation, 0, Origin::LibrarySeeded};
        for (auto& x : d.center) x = std::clamp(x + rng.normal(0.0, scale), 0.0, 1.0);
        if (!censor(d, self_set)) out.push_back(std::move(d));
    }
    return out;
}

struct EvolveParams {
    std::uint64_t seed = 0;
    double random_radius = 0.05;         // used when the set is fixed-radius
    std::size_t max_random_attempts = 0; // 0 -> 100 * detectors needed
};

struct TurnoverSummary {
    std::size_t kept = 0;
    std::size_t invalidated = 0;
    std::size_t pruned = 0;
    std::size_t archived = 0;
    std::size_t seeded_library = 0;
    std::size_t seeded_random = 0;
    bool revalidated = false;

    friend bool operator==(const TurnoverSummary&, const TurnoverSummary&) = default;
};

struct EvolveResult {
    DetectorSet detectors;
    GeneLibrary library;
    TurnoverSummary summary;
};

// One evolution round: revalidate (on the policy cadence), prune stale,
// archive removed detectors that matched something, then replace the removed
// detectors with library-seeded candidates first and random ones after.
inline EvolveResult evolve(const DetectorSet& set, const GeneLibrary& library, const SelfSet& new_self,
                           const LifecyclePolicy& policy, const EvolveParams& params) {
    policy.validate();
    new_self.validate();
    if (!set.detectors.empty() && set.dimension() != new_self.dimension())
        throw DimensionError("self samples and detectors disagree on dimensionality");

    EvolveResult out;
    out.library = library;
    out.library.capacity = policy.library_capacity;
    const std::int64_t gen = set.generation + 1;

    DetectorSet current = set;
    std::vector<Detector> removed;
    if (gen % policy.revalidation_interval == 0) {
        auto r = revalidate(current, new_self);
        out.summary.revalidated = true;
        out.summary.invalidated = r.removed.size();
        removed = std::move(r.removed);
        current = std::move(r.kept);
    }
    auto p = prune_stale(current, policy, gen);
    out.summary.pruned = p.removed.size();
    removed.insert(removed.end(), p.removed.begin(), p.removed.end());
    current = std::move(p.kept);
    out.summary.kept = current.detectors.size();

    for (const auto& d : removed) {
        if (d.match_count == 0) continue;
        out.library = archive(d, std::move(out.library), gen);
        ++out.summary.archived;
    }

    const std::size_t needed = removed.size();
    Rng rng(params.seed, static_cast<std::uint64_t>(gen));
    const auto from_library = static_cast<std::size_t>(
        std::llround(policy.library_seed_fraction * static_cast<double>(needed)));
    auto seeded = seed_from_library(out.library, std::min(from_library, needed), policy.seed_mutation_scale,
                                    new_self, rng, gen);
    out.summary.seeded_library = seeded.size();
    for (auto& d : seeded) current.admit(std::move(d));

    std::size_t remaining = needed - out.summary.seeded_library;
    const std::size_t max_attempts = params.max_random_attempts ? params.max_random_attempts : 100 * remaining;
    const std::size_t dim = new_self.dimension();
    const bool variable = set.params.variant == Variant::VDetector;
    for (std::size_t attempt = 0; remaining > 0 && attempt < max_attempts; ++attempt) {
        Detector d{0, std::vector<double>(dim), params.random_radius, gen, 0, Origin::Random};
        for (auto& x : d.center) x = rng.uniform();
        if (variable) {
            const auto r = vdetector_radius(d.center, new_self);
            if (!r) continue;
            d.radius = *r;
        } else if (censor(d, new_self)) {
            continue;
        }
        current.admit(std::move(d));
        ++out.summary.seeded_random;
        --remaining;
    }

    current.generation = gen;
    out.detectors = std::move(current);
    return out;
}

}  // namespace ais
