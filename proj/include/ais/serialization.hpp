#pragma once

// Versioned JSON documents for every artifact the engine exchanges: feature
// schema, detector set, gene library, MCAV report and evaluation report.

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "ais/clonal.hpp"
#include "ais/dca.hpp"
#include "ais/error.hpp"
#include "ais/hash.hpp"
#include "ais/lifecycle.hpp"
#include "ais/metrics.hpp"
#include "ais/negsel.hpp"
#include "ais/representation.hpp"

namespace ais::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kDetectorSetVersion = 1;
inline constexpr int kGeneLibraryVersion = 1;
inline constexpr int kMcavVersion = 1;

namespace detail {

inline void expect_document(const json& j, std::string_view format, int version) {
    if (!j.is_object() || j.value("format", "") != format)
        throw InputError("document is not a '" + std::string(format) + "' file");
    if (j.value("version", -1) != version)
        throw InputError("unsupported " + std::string(format) + " version " + j.value("version", json(-1)).dump());
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace detail

// --- schema -----------------------------------------------------------------

inline json feature_list(const FeatureSchema& s) {
    json features = json::array();
    for (const auto& f : s.features) {
        json jf{{"name", f.name}};
        if (f.kind == FeatureKind::Continuous) {
            jf["kind"] = "continuous";
            jf["min"] = f.min;
            jf["max"] = f.max;
            jf["constant"] = f.constant;
        } else {
            jf["kind"] = "categorical";
            jf["vocabulary"] = f.vocabulary;
        }
        features.push_back(std::move(jf));
    }
    return features;
}

// Hash of the feature list (names, kinds, bounds, vocabularies).
inline std::string fingerprint(const FeatureSchema& s) { return hex64(fnv1a64(feature_list(s).dump())); }

inline json to_json(const FeatureSchema& s) {
    return {{"format", "ais-schema"},
            {"version", kSchemaVersion},
            {"schema_version", kSchemaVersion},
            {"fingerprint", fingerprint(s)},
            {"features", feature_list(s)}};
}

inline FeatureSchema schema_from_json(const json& j) {
    detail::expect_document(j, "ais-schema", kSchemaVersion);
    FeatureSchema s;
    try {
        for (const auto& jf : j.at("features")) {
            FeatureSpec f;
            f.name = jf.at("name").get<std::string>();
            const auto kind = jf.at("kind").get<std::string>();
            if (kind == "continuous") {
                f.kind = FeatureKind::Continuous;
                f.min = jf.at("min").get<double>();
                f.max = jf.at("max").get<double>();
                f.constant = f.min == f.max;
            } else if (kind == "categorical") {
                f.kind = FeatureKind::Categorical;
                f.vocabulary = jf.at("vocabulary").get<std::vector<std::string>>();
            } else {
                throw InputError("unknown feature kind '" + kind + "'");
            }
            s.features.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed schema document: ") + e.what());
    }
    s.validate();
    if (j.contains("fingerprint") && j.at("fingerprint") != fingerprint(s))
        throw InputError("schema document fingerprint does not match its contents");
    return s;
}

// --- detectors --------------------------------------------------------------

inline json to_json(const Detector& d) {
    return {{"id", d.id},
            {"center", d.center},
            {"radius", d.radius},
            {"birth_generation", d.birth_generation},
            {"match_count", d.match_count},
            {"origin", std::string(to_string(d.origin))}};
}

inline Detector detector_from_json(const json& j) {
    Detector d;
    d.id = j.at("id").get<std::uint64_t>();
    d.center = j.at("center").get<std::vector<double>>();
    d.radius = j.at("radius").get<double>();
    d.birth_generation = j.at("birth_generation").get<std::int64_t>();
    d.match_count = j.at("match_count").get<std::uint64_t>();
    d.origin = origin_from_string(j.at("origin").get<std::string>());
    if (!(d.radius > 0.0)) throw InputError("detector " + std::to_string(d.id) + " has a non-positive radius");
    for (double x : d.center)
        if (!(x >= 0.0 && x <= 1.0)) throw InputError("detector " + std::to_string(d.id) + " center leaves [0,1]");
    return d;
}

inline json to_json(const GenerationParams& p) {
    return {{"variant", std::string(to_string(p.variant))},
            {"seed", p.seed},
            {"radius", p.radius},
            {"self_radius", p.self_radius},
            {"target_count", p.target_count},
            {"target_coverage", detail::optional_json(p.target_coverage)},
            {"max_attempts", p.max_attempts},
            {"attempts", p.attempts},
            {"estimated_coverage", detail::optional_json(p.estimated_coverage)}};
}

inline GenerationParams params_from_json(const json& j) {
    GenerationParams p;
    const auto v = j.at("variant").get<std::string>();
    if (v != "fixed" && v != "vdetector") throw InputError("unknown generation variant '" + v + "'");
    p.variant = v == "fixed" ? Variant::Fixed : Variant::VDetector;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.radius = j.at("radius").get<double>();
    p.self_radius = j.at("self_radius").get<double>();
    p.target_count = j.at("target_count").get<std::size_t>();
    p.target_coverage = detail::optional_from<double>(j, "target_coverage");
    p.max_attempts = j.at("max_attempts").get<std::size_t>();
    p.attempts = j.at("attempts").get<std::size_t>();
    p.estimated_coverage = detail::optional_from<double>(j, "estimated_coverage");
    return p;
}

inline json to_json(const DetectorSet& s, const std::string& config_digest = "") {
    json ds = json::array();
    for (const auto& d : s.detectors) ds.push_back(to_json(d));
    return {{"format", "ais-detector-set"},
            {"version", kDetectorSetVersion},
            {"schema_fingerprint", s.schema_fingerprint},
            {"generation", s.generation},
            {"next_id", s.next_id},
            {"params", to_json(s.params)},
            {"config_digest", config_digest},
            {"detectors", std::move(ds)}};
}

inline DetectorSet detector_set_from_json(const json& j) {
    detail::expect_document(j, "ais-detector-set", kDetectorSetVersion);
    DetectorSet s;
    try {
        s.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
        s.generation = j.at("generation").get<std::int64_t>();
        s.next_id = j.at("next_id").get<std::uint64_t>();
        s.params = params_from_json(j.at("params"));
        for (const auto& jd : j.at("detectors")) s.detectors.push_back(detector_from_json(jd));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed detector-set document: ") + e.what());
    }
    for (const auto& d : s.detectors) {
        if (d.center.size() != s.detectors.front().center.size())
            throw InputError("detectors disagree on dimensionality");
        if (d.id >= s.next_id) throw InputError("detector id " + std::to_string(d.id) + " is not below next_id");
    }
    return s;
}

// --- gene library -----------------------------------------------------------

inline json to_json(const GeneLibrary& lib, const std::string& config_digest = "") {
    json entries = json::array();
    for (const auto& e : lib.entries)
        entries.push_back({{"center", e.center},
                           {"radius", e.radius},
                           {"archived_generation", e.archived_generation},
                           {"lifetime_matches", e.lifetime_matches}});
    return {{"format", "ais-gene-library"},
            {"version", kGeneLibraryVersion},
            {"capacity", lib.capacity},
            {"config_digest", config_digest},
            {"entries", std::move(entries)}};
}

inline GeneLibrary gene_library_from_json(const json& j) {
    detail::expect_document(j, "ais-gene-library", kGeneLibraryVersion);
    GeneLibrary lib;
    try {
        lib.capacity = j.at("capacity").get<std::size_t>();
        for (const auto& je : j.at("entries"))
            lib.entries.push_back({je.at("center").get<std::vector<double>>(), je.at("radius").get<double>(),
                                   je.at("archived_generation").get<std::int64_t>(),
                                   je.at("lifetime_matches").get<std::uint64_t>()});
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed gene-library document: ") + e.what());
    }
    if (lib.capacity == 0 || lib.entries.size() > lib.capacity)
        throw InputError("gene library exceeds its capacity");
    return lib;
}

// --- danger-theory report ---------------------------------------------------

inline std::string_view to_string(DangerVerdict v) {
    switch (v) {
        case DangerVerdict::Anomalous: return "anomalous";
        case DangerVerdict::Normal: return "normal";
        case DangerVerdict::NoVerdict: return "no-verdict";
    }
    return "no-verdict";
}

inline json to_json(const McavTable& table, double anomaly_threshold, const std::string& config_digest = "") {
    const auto verdicts = classify_mcav(table, anomaly_threshold);
    json antigens = json::object();
    for (const auto& [id, e] : table)
        antigens[id] = {{"presentations_total", e.presentations_total},
                        {"presentations_mature", e.presentations_mature},
                        {"mcav", detail::optional_json(e.mcav())},
                        {"verdict", std::string(to_string(verdicts.at(id)))}};
    return {{"format", "ais-mcav-report"},
            {"version", kMcavVersion},
            {"anomaly_threshold", anomaly_threshold},
            {"config_digest", config_digest},
            {"antigens", std::move(antigens)}};
}

struct McavReport {
    McavTable table;
    double anomaly_threshold = 0.5;
};

inline McavReport mcav_report_from_json(const json& j) {
    detail::expect_document(j, "ais-mcav-report", kMcavVersion);
    McavReport r;
    try {
        r.anomaly_threshold = j.at("anomaly_threshold").get<double>();
        for (const auto& [id, je] : j.at("antigens").items()) {
            McavEntry e{je.at("presentations_total").get<std::uint64_t>(),
                        je.at("presentations_mature").get<std::uint64_t>()};
            if (e.presentations_mature > e.presentations_total)
                throw InputError("antigen '" + id + "' has more mature than total presentations");
            r.table[id] = e;
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed MCAV report: ") + e.what());
    }
    return r;
}

// --- evaluation -------------------------------------------------------------

inline json to_json(const EvaluationReport& r) {
    return {{"true_positives", r.true_positives},
            {"false_positives", r.false_positives},
            {"true_negatives", r.true_negatives},
            {"false_negatives", r.false_negatives},
            {"skipped", r.skipped},
            {"tpr", detail::optional_json(r.tpr)},
            {"fpr", detail::optional_json(r.fpr)},
            {"precision", detail::optional_json(r.precision)},
            {"f1", detail::optional_json(r.f1)},
            {"detector_count", r.detector_count},
            {"runtime_ms", r.runtime_ms},
            {"config_digest", r.config_digest}};
}

// --- maturation history -----------------------------------------------------

inline json to_json(const StepStats& s) {
    return {{"generation", s.generation},
            {"best_fitness", s.best_fitness},
            {"mean_fitness", s.mean_fitness},
            {"clones", s.clones},
            {"clones_survived", s.clones_survived},
            {"fresh", s.fresh}};
}

}  // namespace ais::io
