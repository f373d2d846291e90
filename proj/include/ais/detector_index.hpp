#pragma once

// Bounding-volume hierarchy over detector balls plus the classifier built on
// it. Matching always ends in Detector::covers, so indexed and linear-scan
// classification agree exactly; boxes are padded outward so pruning never
// drops a true match to rounding.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ais/error.hpp"
#include "ais/negsel.hpp"
#include "ais/parallel.hpp"

namespace ais {

struct Verdict {
    bool nonself = false;
    std::vector<std::uint64_t> detector_ids;  // in detector-set order

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Reference implementation: test every detector.
inline Verdict linear_scan(const std::vector<Detector>& detectors, std::span<const double> point) {
    Verdict v;
    for (const auto& d : detectors)
        if (d.covers(point)) v.detector_ids.push_back(d.id);
    v.nonself = !v.detector_ids.empty();
    return v;
}

class DetectorIndex {
public:
    static constexpr std::size_t kLeafSize = 8;
    static constexpr double kPad = 1e-9;

    explicit DetectorIndex(const std::vector<Detector>& detectors) : detectors_(&detectors) {
        order_.resize(detectors.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (!detectors.empty()) {
            dim_ = detectors.front().center.size();
            for (const auto& d : detectors)
                if (d.center.size() != dim_) throw DimensionError("detectors disagree on dimensionality");
            build(0, order_.size());
        }
    }

    // Positions (into the detector vector) of every detector covering `point`, ascending.
    std::vector<std::size_t> query(std::span<const double> point) const {
        std::vector<std::size_t> hits;
        if (nodes_.empty()) return hits;
        if (point.size() != dim_) throw DimensionError("antigen dimension does not match detectors");
        std::vector<std::size_t> stack{0};
        while (!stack.empty()) {
            const Node& n = nodes_[stack.back()];
            stack.pop_back();
            if (!inside(n, point)) continue;
            if (n.left == kNone) {
                for (std::size_t i = n.begin; i < n.end; ++i)
                    if ((*detectors_)[order_[i]].covers(point)) hits.push_back(order_[i]);
            } else {
                stack.push_back(n.right);
                stack.push_back(n.left);
            }
        }
        std::sort(hits.begin(), hits.end());
        return hits;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Node {
        std::vector<double> lo, hi;
        std::size_t begin = 0, end = 0;
        std::size_t left = kNone, right = kNone;
    };

    bool inside(const Node& n, std::span<const double> p) const {
        for (std::size_t k = 0; k < dim_; ++k)
            if (p[k] < n.lo[k] || p[k] > n.hi[k]) return false;
        return true;
    }

    std::size_t build(std::size_t begin, std::size_t end) {
        const auto& ds = *detectors_;
        const std::size_t id = nodes_.size();
        nodes_.push_back({});
        Node n;
        n.begin = begin;
        n.end = end;
        n.lo.assign(dim_, std::numeric_limits<double>::infinity());
        n.hi.assign(dim_, -std::numeric_limits<double>::infinity());
        std::vector<double> cmin(dim_, std::numeric_limits<double>::infinity());
        std::vector<double> cmax(dim_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = begin; i < end; ++i) {
            const auto& d = ds[order_[i]];
            for (std::size_t k = 0; k < dim_; ++k) {
                n.lo[k] = std::min(n.lo[k], d.center[k] - d.radius - kPad);
                n.hi[k] = std::max(n.hi[k], d.center[k] + d.radius + kPad);
                cmin[k] = std::min(cmin[k], d.center[k]);
                cmax[k] = std::max(cmax[k], d.center[k]);
            }
        }
        if (end - begin > kLeafSize) {
            std::size_t axis = 0;
            for (std::size_t k = 1; k < dim_; ++k)
                if (cmax[k] - cmin[k] > cmax[axis] - cmin[axis]) axis = k;
            const std::size_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                             order_.begin() + static_cast<std::ptrdiff_t>(mid),
                             order_.begin() + static_cast<std::ptrdiff_t>(end),
                             [&](std::size_t a, std::size_t b) {
                                 if (ds[a].center[axis] != ds[b].center[axis])
                                     return ds[a].center[axis] < ds[b].center[axis];
                                 return a < b;
                             });
            n.left = build(begin, mid);
            n.right = build(mid, end);
        }
        nodes_[id] = std::move(n);
        return id;
    }

    const std::vector<Detector>* detectors_;
    std::size_t dim_ = 0;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

// Read-only classifier over a detector-set snapshot. Construction checks the
// set's schema fingerprint against the schema active for the antigens.
class Classifier {
public:
    Classifier(const DetectorSet& set, std::string_view active_fingerprint)
        : set_(&set), index_(set.detectors) {
        if (set.schema_fingerprint != active_fingerprint)
            throw SchemaMismatchError("detector set was trained under schema " + set.schema_fingerprint +
                                      " but the active schema is " + std::string(active_fingerprint));
    }

    Verdict classify(std::span<const double> point) const {
        Verdict v;
        for (std::size_t pos : index_.query(point)) v.detector_ids.push_back(set_->detectors[pos].id);
        v.nonself = !v.detector_ids.empty();
        return v;
    }

    std::vector<Verdict> classify_batch(std::span<const Antigen> antigens, unsigned threads = 1) const {
        std::vector<Verdict> out(antigens.size());
        parallel_for(antigens.size(), threads, [&](std::size_t i) { out[i] = classify(antigens[i].vector); });
        return out;
    }

private:
    const DetectorSet* set_;
    DetectorIndex index_;
};

// Applies match counts from a batch of verdicts (single owner, after the batch).
inline void record_matches(DetectorSet& set, std::span<const Verdict> verdicts) {
    std::vector<std::uint64_t> hits;
    for (const auto& v : verdicts) hits.insert(hits.end(), v.detector_ids.begin(), v.detector_ids.end());
    std::sort(hits.begin(), hits.end());
    for (auto& d : set.detectors) {
        auto [lo, hi] = std::equal_range(hits.begin(), hits.end(), d.id);
        d.match_count += static_cast<std::uint64_t>(hi - lo);
    }
}

// Classifies one antigen and increments the match count of every matching detector.
inline Verdict classify(const Antigen& antigen, DetectorSet& set, std::string_view active_fingerprint) {
    Verdict v;
    {
        const Classifier c(set, active_fingerprint);
        v = c.classify(antigen.vector);
    }
    record_matches(set, std::span<const Verdict>(&v, 1));
    return v;
}

}  // namespace ais
