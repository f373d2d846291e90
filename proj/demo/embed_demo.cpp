// Embedding the engine directly: fit a schema on self records, generate
// V-detectors, classify a few probes, then run the danger-theory path on a
// synthetic signal stream.

#include <iostream>

#include "ais/ais.hpp"

int main() {
    ais::ScenarioSpec spec;
    spec.n_self_train = 200;
    spec.n_self_test = 40;
    spec.n_anomaly = 40;
    const auto scenario = ais::generate_scenario(spec);

    const auto schema = ais::fit_schema(scenario.self_train);
    ais::SelfSet self_set;
    for (const auto& r : scenario.self_train) self_set.samples.push_back(ais::encode(r, schema).vector);

    ais::VDetectorParams vp;
    vp.seed = 7;
    auto gen = ais::generate_vdetector(self_set, vp);
    gen.set.schema_fingerprint = ais::io::fingerprint(schema);
    std::cout << "V-detectors: " << gen.set.detectors.size() << " (estimated coverage "
              << gen.estimated_coverage.value_or(0.0) << ")\n";

    const ais::Classifier classifier(gen.set, ais::io::fingerprint(schema));
    std::size_t flagged = 0, anomalies = 0;
    for (const auto& t : scenario.traffic) {
        const auto v = classifier.classify(ais::encode(t.record, schema).vector);
        flagged += v.nonself && t.anomalous;
        anomalies += t.anomalous;
    }
    std::cout << "flagged " << flagged << " of " << anomalies << " anomalies\n";

    ais::DcaParams dp;
    dp.seed = 7;
    const auto table = ais::run_dca(scenario.frames, dp);
    std::size_t danger = 0;
    for (const auto& [id, v] : ais::classify_mcav(table, 0.5)) danger += v == ais::DangerVerdict::Anomalous;
    std::cout << "DCA marks " << danger << " of " << table.size() << " antigens anomalous\n";
}
