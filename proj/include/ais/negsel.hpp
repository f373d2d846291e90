#pragma once

// Real-valued negative selection: hypersphere detectors censored against a
// self set, fixed-radius and variable-radius (V-detector) generation, and
// closed-ball classification.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ais/error.hpp"
#include "ais/parallel.hpp"
#include "ais/random.hpp"
#include "ais/representation.hpp"

namespace ais {

enum class Origin { Random, LibrarySeeded, Clonal };

inline std::string_view to_string(Origin o) {
    switch (o) {
        case Origin::Random: return "random";
        case Origin::LibrarySeeded: return "library-seeded";
        case Origin::Clonal: return "clonal";
    }
    return "random";
}

inline Origin origin_from_string(std::string_view s) {
    if (s == "random") return Origin::Random;
    if (s == "library-seeded") return Origin::LibrarySeeded;
    if (s == "clonal") return Origin::Clonal;
    throw InputError("unknown detector origin '" + std::string(s) + "'");
}

struct Detector {
    std::uint64_t id = 0;
    std::vector<double> center;
    double radius = 0.0;
    std::int64_t birth_generation = 0;
    std::uint64_t match_count = 0;
    Origin origin = Origin::Random;

    bool covers(std::span<const double> point) const { return euclidean(center, point) <= radius; }

    friend bool operator==(const Detector&, const Detector&) = default;
};

struct SelfSet {
    std::vector<std::vector<double>> samples;
    double self_radius = 0.05;

    std::size_t dimension() const { return samples.empty() ? 0 : samples.front().size(); }

    void validate() const {
        if (samples.empty()) throw InputError("self set is empty");
        if (!(self_radius >= 0.0)) throw InputError("self_radius must be >= 0");
        const std::size_t d = samples.front().size();
        for (const auto& s : samples)
            if (s.size() != d) throw DimensionError("self samples disagree on dimensionality");
    }

    // Distance from `point` to the closest sample.
    double nearest_distance(std::span<const double> point) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : samples) best = std::min(best, euclidean(point, s));
        return best;
    }
};

enum class Variant { Fixed, VDetector };

inline std::string_view to_string(Variant v) { return v == Variant::Fixed ? "fixed" : "vdetector"; }

// What produced a detector set; persisted alongside it.
struct GenerationParams {
    Variant variant = Variant::Fixed;
    std::uint64_t seed = 0;
    double radius = 0.0;
    double self_radius = 0.0;
    std::size_t target_count = 0;
    std::optional<double> target_coverage;
    std::size_t max_attempts = 0;
    std::size_t attempts = 0;
    std::optional<double> estimated_coverage;

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

struct DetectorSet {
    std::vector<Detector> detectors;
    std::string schema_fingerprint;
    std::uint64_t next_id = 0;
    std::int64_t generation = 0;
    GenerationParams params;

    std::size_t dimension() const { return detectors.empty() ? 0 : detectors.front().center.size(); }

    Detector& admit(Detector d) {
        d.id = next_id++;
        detectors.push_back(std::move(d));
        return detectors.back();
    }

    friend bool operator==(const DetectorSet&, const DetectorSet&) = default;
};

// True means reject: the candidate overlaps self (boundary counts as overlap).
inline bool censor(const Detector& candidate, const SelfSet& self_set) {
    for (const auto& s : self_set.samples) {
        if (s.size() != candidate.center.size())
            throw DimensionError("candidate has dimension " + std::to_string(candidate.center.size()) +
                                 ", self has " + std::to_string(s.size()));
        if (euclidean(candidate.center, s) <= candidate.radius + self_set.self_radius) return true;
    }
    return false;
}

// V-detector radii stop this far short of the nearest self halo so that an
// admitted detector still passes `censor` against the self set it came from.
inline constexpr double kTightnessMargin = 1e-10;

// Window length of the sliding coverage estimator.
inline constexpr std::size_t kCoverageWindow = 100;

struct NsaParams {
    std::size_t target_count = 100;
    double radius = 0.05;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 0;          // 0 -> 100 * target_count
    std::optional<double> target_coverage; // also stop once estimated coverage reaches this
    unsigned threads = 1;
};

struct VDetectorParams {
    double target_coverage = 0.95;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 100000;
    std::size_t max_detectors = std::numeric_limits<std::size_t>::max();
    unsigned threads = 1;
};

// Fraction of the last `kCoverageWindow` nonself sample points that were
// already covered when drawn.
class CoverageEstimator {
public:
    void observe(bool covered) {
        window_.push_back(covered);
        covered_ += covered;
        if (window_.size() > kCoverageWindow) {
            covered_ -= window_.front();
            window_.pop_front();
        }
    }
    bool full() const { return window_.size() == kCoverageWindow; }
    double estimate() const { return window_.empty() ? 0.0 : double(covered_) / double(window_.size()); }

private:
    std::deque<bool> window_;
    std::size_t covered_ = 0;
};

namespace detail {

inline constexpr std::size_t kCandidateBatch = 256;

inline bool covered_by_any(const std::vector<Detector>& ds, std::span<const double> p) {
    for (const auto& d : ds)
        if (d.covers(p)) return true;
    return false;
}

// Draws candidate centers from one stream in batches and computes their
// nearest-self distances in parallel; `visit(center, nearest)` runs serially in
// draw order and returns false to stop. Returns candidates consumed.
template <typename Visit>
std::size_t scan_candidates(const SelfSet& self_set, std::uint64_t seed, std::size_t max_attempts,
                            unsigned threads, Visit&& visit) {
    const std::size_t d = self_set.dimension();
    Rng rng(seed);
    std::size_t attempts = 0;
    std::vector<std::vector<double>> centers;
    std::vector<double> nearest;
    while (attempts < max_attempts) {
        const std::size_t n = std::min(detail::kCandidateBatch, max_attempts - attempts);
        centers.assign(n, std::vector<double>(d));
        for (auto& c : centers)
            for (auto& x : c) x = rng.uniform();
        nearest.assign(n, 0.0);
        parallel_for(n, threads, [&](std::size_t i) { nearest[i] = self_set.nearest_distance(centers[i]); });
        for (std::size_t i = 0; i < n; ++i) {
            ++attempts;
            if (!visit(std::move(centers[i]), nearest[i])) return attempts;
        }
    }
    return attempts;
}

}  // namespace detail

struct GenerationResult {
    DetectorSet set;
    std::size_t attempts = 0;
    std::optional<double> estimated_coverage;
};

// Fixed-radius negative selection: every uniformly drawn candidate that passes
// `censor` is admitted until target_count detectors exist, the coverage target
// (if any) is met, or max_attempts candidates have been drawn.
inline GenerationResult generate_nsa(const SelfSet& self_set, const NsaParams& p) {
    self_set.validate();
    if (p.target_count == 0) throw InputError("target_count must be > 0");
    if (!(p.radius > 0.0)) throw InputError("radius must be > 0");
    const std::size_t max_attempts = p.max_attempts ? p.max_attempts : 100 * p.target_count;

    GenerationResult out;
    CoverageEstimator coverage;
    const double reject_within = p.radius + self_set.self_radius;
    out.attempts = detail::scan_candidates(
        self_set, p.seed, max_attempts, p.threads, [&](std::vector<double> center, double nearest) {
            if (p.target_coverage && nearest > self_set.self_radius)
                coverage.observe(detail::covered_by_any(out.set.detectors, center));
            if (nearest > reject_within)
                out.set.admit(Detector{0, std::move(center), p.radius, 0, 0, Origin::Random});
            if (out.set.detectors.size() >= p.target_count) return false;
            return !(p.target_coverage && coverage.full() && coverage.estimate() >= *p.target_coverage);
        });
    if (out.set.detectors.empty())
        throw CoverageError("no candidate survived censoring after " + std::to_string(out.attempts) +
                                " attempts; self fills the space at radius " + std::to_string(p.radius),
                            out.attempts);
    if (p.target_coverage) out.estimated_coverage = coverage.estimate();
    out.set.params = GenerationParams{Variant::Fixed, p.seed, p.radius, self_set.self_radius, p.target_count,
                                      p.target_coverage, max_attempts, out.attempts, out.estimated_coverage};
    return out;
}

// V-detector: each uncovered nonself candidate becomes a detector whose radius
// reaches to the nearest self halo. Stops when the sliding-window coverage
// estimate reaches target_coverage.
inline GenerationResult generate_vdetector(const SelfSet& self_set, const VDetectorParams& p) {
    self_set.validate();
    if (!(p.target_coverage > 0.0 && p.target_coverage < 1.0))
        throw InputError("target_coverage must be in (0, 1)");
    if (p.max_attempts == 0) throw InputError("max_attempts must be > 0");

    GenerationResult out;
    CoverageEstimator coverage;
    bool reached = false;
    out.attempts = detail::scan_candidates(
        self_set, p.seed, p.max_attempts, p.threads, [&](std::vector<double> center, double nearest) {
            if (nearest <= self_set.self_radius) return true;  // a self point, not sampled
            const bool covered = detail::covered_by_any(out.set.detectors, center);
            coverage.observe(covered);
            if (coverage.full() && coverage.estimate() >= p.target_coverage) {
                reached = true;
                return false;
            }
            const double radius = nearest - self_set.self_radius - kTightnessMargin;
            if (!covered && radius > 0.0)
                out.set.admit(Detector{0, std::move(center), radius, 0, 0, Origin::Random});
            return out.set.detectors.size() < p.max_detectors;
        });
    (void)reached;
    if (out.set.detectors.empty())
        throw CoverageError("no V-detector admitted after " + std::to_string(out.attempts) + " attempts",
                            out.attempts);
    out.estimated_coverage = coverage.estimate();
    out.set.params = GenerationParams{Variant::VDetector, p.seed, 0.0, self_set.self_radius, 0,
                                      p.target_coverage, p.max_attempts, out.attempts, out.estimated_coverage};
    return out;
}

// Radius a V-detector centered at `center` would receive, or nullopt if the
// center lies within the self halo.
inline std::optional<double> vdetector_radius(std::span<const double> center, const SelfSet& self_set) {
    const double r = self_set.nearest_distance(center) - self_set.self_radius - kTightnessMargin;
    if (r > 0.0) return r;
    return std::nullopt;
}

}  // namespace ais
