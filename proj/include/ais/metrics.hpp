#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ais/error.hpp"

namespace ais {

struct EvaluationReport {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    std::size_t skipped = 0;  // predictions with no label
    std::optional<double> tpr;
    std::optional<double> fpr;
    std::optional<double> precision;
    std::optional<double> f1;
    std::size_t detector_count = 0;
    std::int64_t runtime_ms = 0;
    std::string config_digest;

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

// Fills the rate fields from the confusion counts. Rates with a zero
// denominator, and f1 when precision + recall = 0, are left empty.
inline void finalize_rates(EvaluationReport& r) {
    r.tpr = ratio(r.true_positives, r.true_positives + r.false_negatives);
    r.fpr = ratio(r.false_positives, r.false_positives + r.true_negatives);
    r.precision = ratio(r.true_positives, r.true_positives + r.false_positives);
    const double p = r.precision.value_or(0.0), t = r.tpr.value_or(0.0);
    r.f1 = p + t > 0.0 ? std::optional<double>(2.0 * p * t / (p + t)) : std::nullopt;
}

// Joins predictions (id -> predicted anomalous) with labels (id -> anomalous).
inline EvaluationReport evaluate(const std::vector<std::pair<std::string, bool>>& predictions,
                                 const std::map<std::string, bool>& labels) {
    EvaluationReport r;
    for (const auto& [id, predicted] : predictions) {
        const auto it = labels.find(id);
        if (it == labels.end()) {
            ++r.skipped;
            continue;
        }
        const bool actual = it->second;
        if (predicted && actual) ++r.true_positives;
        else if (predicted && !actual) ++r.false_positives;
        else if (!predicted && actual) ++r.false_negatives;
        else ++r.true_negatives;
    }
    if (r.true_positives + r.false_positives + r.true_negatives + r.false_negatives == 0)
        throw InputError("no prediction has a label");
    finalize_rates(r);
    return r;
}

}  // namespace ais
