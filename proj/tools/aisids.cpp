// aisids: command-line front end for the immune detection engine.
//
// Exit codes: 0 ok, 1 internal error, 2 input error, 3 coverage failure,
// 4 artifact mismatch.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ais/ais.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kInput = 2, kCoverage = 3, kMismatch = 4 };

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir = ".";
};

ais::EngineConfig load_config(const Common& c) {
    ais::EngineConfig cfg;
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in) throw ais::InputError("cannot open config '" + c.config_path + "'");
        cfg = ais::config_from_toml(ais::toml::parse(in));
    }
    if (c.seed) cfg.override_seed(*c.seed);
    cfg.set_threads(c.threads);
    return cfg;
}

ais::csv::Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ais::InputError("cannot open '" + path + "'");
    try {
        return ais::csv::read(in);
    } catch (const ais::ParseError& e) {
        throw ais::InputError(path + ": " + e.what());
    }
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ais::InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ais::InputError(path + ": " + e.what());
    }
}

fs::path out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return fs::path(c.out_dir) / name;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ais::InputError("cannot write '" + p.string() + "'");
    out << j.dump(2) << '\n';
}

std::set<std::string> non_feature_columns(const ais::EngineConfig& cfg) {
    return {cfg.representation.label_column};
}

std::vector<ais::Antigen> encode_all(const std::vector<ais::RawRecord>& records, const ais::FeatureSchema& schema,
                                     bool lenient) {
    std::vector<ais::Antigen> out;
    out.reserve(records.size());
    std::vector<std::string> warnings;
    const auto policy = lenient ? ais::UnknownCategory::ZeroOneHot : ais::UnknownCategory::Throw;
    for (const auto& r : records) out.push_back(ais::encode(r, schema, policy, &warnings));
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return out;
}

ais::SelfSet self_set_from(const std::vector<ais::Antigen>& antigens, double self_radius) {
    ais::SelfSet s;
    s.self_radius = self_radius;
    for (const auto& a : antigens) s.samples.push_back(a.vector);
    return s;
}

ais::FeatureSchema load_schema(const std::string& path) { return ais::io::schema_from_json(read_json(path)); }

std::string sibling_schema(const std::string& detectors_path) {
    return (fs::path(detectors_path).parent_path() / "schema.json").string();
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    std::string self_csv;
    std::string schema;
    std::string validation;
};

int cmd_train(const Common& common, const TrainArgs& a) {
    const auto cfg = load_config(common);
    const auto digest = ais::config_digest(cfg);
    const auto table = read_table(a.self_csv);
    const auto records = ais::csv::records(table, cfg.representation.id_column, non_feature_columns(cfg));
    if (records.empty()) throw ais::InputError(a.self_csv + ": no self records");
    const std::set<std::string> categorical(cfg.representation.categorical.begin(),
                                            cfg.representation.categorical.end());
    const auto schema = a.schema.empty() ? ais::fit_schema(records, categorical) : load_schema(a.schema);
    const auto fp = ais::io::fingerprint(schema);
    const auto antigens = encode_all(records, schema, cfg.representation.lenient);
    const auto self_set = self_set_from(antigens, cfg.negsel.self_radius);

    ais::GenerationResult gen;
    if (cfg.negsel.variant == ais::Variant::Fixed) {
        ais::NsaParams p;
        p.target_count = cfg.negsel.target_count;
        p.radius = cfg.negsel.radius;
        p.seed = cfg.negsel.seed;
        p.max_attempts = cfg.negsel.max_attempts;
        if (cfg.negsel.stop_at_coverage) p.target_coverage = cfg.negsel.target_coverage;
        p.threads = common.threads;
        gen = ais::generate_nsa(self_set, p);
    } else {
        ais::VDetectorParams p;
        p.target_coverage = cfg.negsel.target_coverage;
        p.seed = cfg.negsel.seed;
        if (cfg.negsel.max_attempts) p.max_attempts = cfg.negsel.max_attempts;
        p.max_detectors = cfg.negsel.max_detectors;
        p.threads = common.threads;
        gen = ais::generate_vdetector(self_set, p);
    }
    auto set = std::move(gen.set);
    set.schema_fingerprint = fp;

    if (cfg.clonal.enabled) {
        if (a.validation.empty()) throw ais::InputError("clonal maturation needs --validation <labeled csv>");
        const auto vt = read_table(a.validation);
        const auto labels = ais::csv::labels(vt, cfg.representation.id_column, cfg.representation.label_column);
        const auto vrecords = ais::csv::records(vt, cfg.representation.id_column, non_feature_columns(cfg));
        ais::ValidationSet validation;
        for (const auto& ag : encode_all(vrecords, schema, cfg.representation.lenient)) {
            const auto it = labels.find(ag.id);
            if (it == labels.end()) throw ais::InputError(a.validation + ": record '" + ag.id + "' has no label");
            (it->second ? validation.anomalous : validation.normal).push_back(ag.vector);
        }

        std::ofstream history(out_path(common, "maturation.jsonl"), std::ios::binary);
        auto pop = ais::Population::from(set);
        pop = ais::mature(std::move(pop), validation, cfg.clonal.maturation, self_set, nullptr,
                          [&](const ais::Population& p, const ais::StepStats& s) {
                              json line = ais::io::to_json(s);
                              if (s.generation % static_cast<std::int64_t>(cfg.clonal.snapshot_every) == 0) {
                                  json snap = json::array();
                                  for (const auto& d : p.members) snap.push_back(ais::io::to_json(d));
                                  line["population"] = std::move(snap);
                              }
                              history << line.dump() << '\n';
                          });
        set.detectors = std::move(pop.members);
        set.next_id = pop.next_id;
        set.generation = pop.generation;
    }

    write_json(out_path(common, "schema.json"), ais::io::to_json(schema));
    write_json(out_path(common, "detectors.json"), ais::io::to_json(set, digest));
    std::cout << "detectors=" << set.detectors.size() << " attempts=" << gen.attempts;
    if (gen.estimated_coverage) std::cout << " estimated_coverage=" << *gen.estimated_coverage;
    std::cout << " schema=" << fp << '\n';
    return kOk;
}

// --- detect ------------------------------------------------------------------

struct DetectArgs {
    std::string detectors;
    std::string schema;
    std::string traffic;
    bool record_matches = false;
};

int cmd_detect(const Common& common, const DetectArgs& a) {
    const auto cfg = load_config(common);
    auto set = ais::io::detector_set_from_json(read_json(a.detectors));
    const auto schema = load_schema(a.schema.empty() ? sibling_schema(a.detectors) : a.schema);
    const auto fp = ais::io::fingerprint(schema);
    const ais::Classifier classifier(set, fp);

    const auto table = read_table(a.traffic);
    const auto records = ais::csv::records(table, cfg.representation.id_column, non_feature_columns(cfg));
    const auto antigens = encode_all(records, schema, cfg.representation.lenient);
    const auto verdicts = classifier.classify_batch(antigens, common.threads);

    std::ofstream out(out_path(common, "alerts.jsonl"), std::ios::binary);
    std::size_t alerts = 0;
    for (std::size_t i = 0; i < antigens.size(); ++i) {
        if (!verdicts[i].nonself) continue;
        out << json{{"id", antigens[i].id}, {"detectors", verdicts[i].detector_ids}}.dump() << '\n';
        ++alerts;
    }
    if (a.record_matches) {
        ais::record_matches(set, verdicts);
        write_json(out_path(common, "detectors.json"), ais::io::to_json(set, ais::config_digest(cfg)));
    }
    std::cout << "antigens=" << antigens.size() << " alerts=" << alerts << " self=" << antigens.size() - alerts
              << '\n';
    return kOk;
}

// --- dca ---------------------------------------------------------------------

int cmd_dca(const Common& common, const std::string& signals) {
    const auto cfg = load_config(common);
    const auto table = read_table(signals);
    ais::csv::FrameColumns cols{cfg.dca.timestamp_column, cfg.dca.pamp_column, cfg.dca.danger_column,
                                cfg.dca.safe_column, cfg.dca.antigens_column};
    const auto frames = ais::csv::frames(table, cols);
    const auto mcav = ais::run_dca(frames, cfg.dca.params);
    write_json(out_path(common, "mcav.json"),
               ais::io::to_json(mcav, cfg.dca.anomaly_threshold, ais::config_digest(cfg)));
    std::size_t anomalous = 0, normal = 0, none = 0;
    for (const auto& [id, v] : ais::classify_mcav(mcav, cfg.dca.anomaly_threshold)) {
        if (v == ais::DangerVerdict::Anomalous) ++anomalous;
        else if (v == ais::DangerVerdict::Normal) ++normal;
        else ++none;
    }
    std::cout << "frames=" << frames.size() << " antigens=" << mcav.size() << " anomalous=" << anomalous
              << " normal=" << normal << " no_verdict=" << none << '\n';
    return kOk;
}

// --- evolve ------------------------------------------------------------------

struct EvolveArgs {
    std::string detectors;
    std::string library;
    std::string schema;
    std::string self_csv;
};

int cmd_evolve(const Common& common, const EvolveArgs& a) {
    const auto cfg = load_config(common);
    const auto set = ais::io::detector_set_from_json(read_json(a.detectors));
    const auto schema = load_schema(a.schema.empty() ? sibling_schema(a.detectors) : a.schema);
    const auto fp = ais::io::fingerprint(schema);
    if (set.schema_fingerprint != fp)
        throw ais::SchemaMismatchError("detector set schema " + set.schema_fingerprint + " does not match " + fp);
    ais::GeneLibrary library;
    library.capacity = cfg.lifecycle.policy.library_capacity;
    if (!a.library.empty() && fs::exists(a.library))
        library = ais::io::gene_library_from_json(read_json(a.library));

    const auto table = read_table(a.self_csv);
    const auto records = ais::csv::records(table, cfg.representation.id_column, non_feature_columns(cfg));
    const auto self_set = self_set_from(encode_all(records, schema, cfg.representation.lenient),
                                        set.params.self_radius > 0.0 ? set.params.self_radius : cfg.negsel.self_radius);

    ais::EvolveParams params;
    params.seed = cfg.lifecycle.seed;
    params.random_radius = set.params.radius > 0.0 ? set.params.radius : cfg.negsel.radius;
    const auto result = ais::evolve(set, library, self_set, cfg.lifecycle.policy, params);

    const auto digest = ais::config_digest(cfg);
    write_json(out_path(common, "detectors.json"), ais::io::to_json(result.detectors, digest));
    write_json(out_path(common, "library.json"), ais::io::to_json(result.library, digest));
    const auto& s = result.summary;
    std::cout << "kept=" << s.kept << " invalidated=" << s.invalidated << " pruned=" << s.pruned
              << " archived=" << s.archived << " seeded_library=" << s.seeded_library
              << " seeded_random=" << s.seeded_random << " detectors=" << result.detectors.detectors.size()
              << '\n';
    return kOk;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string alerts;
    std::string mcav;
    std::string labels;
    std::string detectors;
    bool record_runtime = false;
};

int cmd_evaluate(const Common& common, const EvaluateArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    const auto cfg = load_config(common);
    if (a.alerts.empty() == a.mcav.empty()) throw ais::InputError("give exactly one of --alerts or --mcav");
    const auto labels =
        ais::csv::labels(read_table(a.labels), cfg.representation.id_column, cfg.representation.label_column);
    if (labels.empty()) throw ais::InputError(a.labels + ": no labeled rows");

    std::vector<std::pair<std::string, bool>> predictions;
    std::size_t unlabeled = 0;
    if (!a.alerts.empty()) {
        std::ifstream in(a.alerts);
        if (!in) throw ais::InputError("cannot open '" + a.alerts + "'");
        std::set<std::string> alerted;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                alerted.insert(json::parse(line).at("id").get<std::string>());
            } catch (const json::exception&) {
                throw ais::ParseError(a.alerts + ": malformed alert record", line_no);
            }
        }
        // Every labeled antigen went through detection; alerts with no label are skipped.
        for (const auto& [id, unused] : labels) predictions.emplace_back(id, alerted.count(id) > 0);
        for (const auto& id : alerted) unlabeled += labels.count(id) == 0;
    } else {
        const auto report = ais::io::mcav_report_from_json(read_json(a.mcav));
        for (const auto& [id, v] : ais::classify_mcav(report.table, report.anomaly_threshold)) {
            if (v == ais::DangerVerdict::NoVerdict) {
                ++unlabeled;
                continue;
            }
            predictions.emplace_back(id, v == ais::DangerVerdict::Anomalous);
        }
    }

    auto report = ais::evaluate(predictions, labels);
    report.skipped += unlabeled;
    report.config_digest = ais::config_digest(cfg);
    if (!a.detectors.empty())
        report.detector_count = ais::io::detector_set_from_json(read_json(a.detectors)).detectors.size();
    if (a.record_runtime)
        report.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
    const json j = ais::io::to_json(report);
    write_json(out_path(common, "evaluation.json"), j);
    std::cout << j.dump() << '\n';
    return kOk;
}

// --- synth -------------------------------------------------------------------

void write_records(const fs::path& p, const std::vector<std::string>& names,
                   const std::vector<ais::RawRecord>& records) {
    std::ofstream out(p, std::ios::binary);
    std::vector<std::string> header{"id"};
    header.insert(header.end(), names.begin(), names.end());
    ais::csv::write_row(out, header);
    for (const auto& r : records) {
        std::vector<std::string> row{r.id};
        for (const auto& [k, v] : r.fields) row.push_back(v);
        ais::csv::write_row(out, row);
    }
}

int cmd_synth(const Common& common) {
    const auto cfg = load_config(common);
    const auto sc = ais::generate_scenario(cfg.synth);
    write_records(out_path(common, "self.csv"), sc.feature_names, sc.self_train);
    write_records(out_path(common, "drifted_self.csv"), sc.feature_names, sc.drifted_self);
    std::vector<ais::RawRecord> traffic;
    for (const auto& t : sc.traffic) traffic.push_back(t.record);
    write_records(out_path(common, "traffic.csv"), sc.feature_names, traffic);
    {
        std::ofstream out(out_path(common, "labels.csv"), std::ios::binary);
        ais::csv::write_row(out, {"id", "label"});
        for (const auto& t : sc.traffic) ais::csv::write_row(out, {t.record.id, t.anomalous ? "anomaly" : "normal"});
    }
    {
        std::ofstream out(out_path(common, "signals.csv"), std::ios::binary);
        ais::csv::write_row(out, {"timestamp", "pamp", "danger", "safe", "antigens"});
        for (const auto& f : sc.frames) {
            std::string ids;
            for (const auto& id : f.active_antigens) ids += (ids.empty() ? "" : ";") + id;
            ais::csv::write_row(out, {std::to_string(f.timestamp), ais::detail::format_value(f.pamp),
                                      ais::detail::format_value(f.danger), ais::detail::format_value(f.safe), ids});
        }
    }
    std::size_t anomalies = 0;
    for (const auto& t : sc.traffic) anomalies += t.anomalous;
    std::cout << "self=" << sc.self_train.size() << " traffic=" << sc.traffic.size() << " anomalies=" << anomalies
              << " frames=" << sc.frames.size() << '\n';
    return kOk;
}

// --- report ------------------------------------------------------------------

int cmd_report(const std::string& history) {
    std::ifstream in(history);
    if (!in) throw ais::InputError("cannot open '" + history + "'");
    std::string line;
    std::size_t line_no = 0;
    std::cout << "generation best_fitness mean_fitness clones survived fresh\n";
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            std::cout << j.at("generation").get<std::int64_t>() << ' ' << j.at("best_fitness").get<double>() << ' '
                      << j.at("mean_fitness").get<double>() << ' ' << j.at("clones").get<std::size_t>() << ' '
                      << j.at("clones_survived").get<std::size_t>() << ' ' << j.at("fresh").get<std::size_t>()
                      << '\n';
        } catch (const json::exception&) {
            throw ais::ParseError(history + ": malformed history record", line_no);
        }
    }
    return kOk;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "TOML configuration file");
    sub->add_option("--seed", c.seed, "Override every module seed");
    sub->add_option("--threads", c.threads, "Worker threads (does not change outputs)")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out-dir", c.out_dir, "Directory for output artifacts");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Artificial immune system intrusion detection engine"};
    app.require_subcommand(1);
    Common common;

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Generate a detector set from self samples");
    add_common(t, common);
    t->add_option("--self", train.self_csv, "Self (normal) records CSV")->required();
    t->add_option("--schema", train.schema, "Use this schema instead of fitting one");
    t->add_option("--validation", train.validation, "Labeled CSV for clonal maturation");

    DetectArgs detect;
    auto* d = app.add_subcommand("detect", "Classify traffic records with a detector set");
    add_common(d, common);
    d->add_option("--detectors", detect.detectors, "Detector set JSON")->required();
    d->add_option("--schema", detect.schema, "Schema JSON (default: schema.json beside the detectors)");
    d->add_option("--traffic", detect.traffic, "Traffic records CSV")->required();
    d->add_flag("--record-matches", detect.record_matches, "Write detectors.json with updated match counts");

    std::string signals;
    auto* c = app.add_subcommand("dca", "Run the dendritic cell algorithm over a signal stream");
    add_common(c, common);
    c->add_option("--signals", signals, "Signal frames CSV")->required();

    EvolveArgs evolve;
    auto* e = app.add_subcommand("evolve", "Revalidate, prune and replenish a detector set");
    add_common(e, common);
    e->add_option("--detectors", evolve.detectors, "Detector set JSON")->required();
    e->add_option("--library", evolve.library, "Gene library JSON (created if absent)");
    e->add_option("--schema", evolve.schema, "Schema JSON (default: schema.json beside the detectors)");
    e->add_option("--self", evolve.self_csv, "Fresh self records CSV")->required();

    EvaluateArgs evaluate;
    auto* v = app.add_subcommand("evaluate", "Score alerts or an MCAV report against labels");
    add_common(v, common);
    v->add_option("--alerts", evaluate.alerts, "alerts.jsonl from detect");
    v->add_option("--mcav", evaluate.mcav, "mcav.json from dca");
    v->add_option("--labels", evaluate.labels, "Labels CSV (id,label)")->required();
    v->add_option("--detectors", evaluate.detectors, "Detector set, for the detector count");
    v->add_flag("--record-runtime", evaluate.record_runtime, "Store wall-clock runtime in the report");

    auto* s = app.add_subcommand("synth", "Write a synthetic scenario");
    add_common(s, common);

    std::string history;
    auto* r = app.add_subcommand("report", "Summarize a maturation history");
    r->add_option("--history", history, "maturation.jsonl from train")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (*t) return cmd_train(common, train);
        if (*d) return cmd_detect(common, detect);
        if (*c) return cmd_dca(common, signals);
        if (*e) return cmd_evolve(common, evolve);
        if (*v) return cmd_evaluate(common, evaluate);
        if (*s) return cmd_synth(common);
        if (*r) return cmd_report(history);
    } catch (const ais::CoverageError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kCoverage;
    } catch (const ais::SchemaMismatchError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kMismatch;
    } catch (const ais::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kInput;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kInput;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return kInternal;
    }
    return kInternal;
}
