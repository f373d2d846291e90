#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ais/detector_index.hpp"
#include "ais/negsel.hpp"
#include "ais/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("aisids_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override {
        if (!HasFailure()) fs::remove_all(dir);
    }

    Outcome run(const std::string& args) {
        const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
        const std::string cmd = std::string(AISIDS_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path write(const std::string& name, const std::string& text) {
        const auto p = dir / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    std::string p(const std::string& name) const { return (dir / name).string(); }

    // Self points in a small cluster plus the box corners so min-max spans [0, 100].
    fs::path small_self() {
        std::string s = "id,x,y\nc0,0,0\nc1,100,100\n";
        for (int i = 0; i < 20; ++i)
            s += "s" + std::to_string(i) + "," + std::to_string(45 + i % 5 * 2) + "," + std::to_string(45 + i / 5 * 2) +
                 "\n";
        return write("self.csv", s);
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, TrainWritesRequestedDetectorCount) {
    small_self();
    write("cfg.toml", "[negsel]\nradius = 0.05\ntarget_count = 100\nseed = 1\n");
    const auto r = run("train --self " + p("self.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto set = ais::io::detector_set_from_json(json::parse(slurp(dir / "out/detectors.json")));
    EXPECT_EQ(set.detectors.size(), 100u);
    const auto schema = ais::io::schema_from_json(json::parse(slurp(dir / "out/schema.json")));
    EXPECT_EQ(set.schema_fingerprint, ais::io::fingerprint(schema));
    // every training sample, encoded by hand, falls outside every detector
    std::ifstream in(dir / "self.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string id, x, y;
        std::getline(ss, id, ',');
        std::getline(ss, x, ',');
        std::getline(ss, y, ',');
        const std::vector<double> v{std::stod(x) / 100.0, std::stod(y) / 100.0};
        EXPECT_FALSE(ais::linear_scan(set.detectors, v).nonself) << id;
    }
}

TEST_F(Cli, MalformedRowNamesTheLine) {
    std::string s = "id,x,y\n";
    for (int i = 2; i < 17; ++i) s += "r" + std::to_string(i) + ",1,2\n";
    s += "r17,1\n";
    write("bad.csv", s);
    const auto r = run("train --self " + p("bad.csv") + " --out-dir " + p("out"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 17"), std::string::npos) << r.err;
}

TEST_F(Cli, NonNumericColumnBecomesCategorical) {
    write("bad.csv", "id,x\na,1\nb,oops\nc,3\n");
    const auto r = run("train --self " + p("bad.csv") + " --out-dir " + p("out"));
    // a non-numeric value turns the column categorical, which is valid
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, ImpossibleCoverageExitsThree) {
    std::string s = "id,x,y\n";
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) s += "g" + std::to_string(i * 11 + j) + "," + std::to_string(i) + "," + std::to_string(j) + "\n";
    write("grid.csv", s);
    write("cfg.toml", "[negsel]\nradius = 0.2\nself_radius = 0.1\ntarget_count = 10\nmax_attempts = 500\n");
    const auto r = run("train --self " + p("grid.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out"));
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, DetectCoveredAntigenRaisesOneAlert) {
    small_self();
    write("cfg.toml", "[negsel]\nradius = 0.05\ntarget_count = 100\nseed = 1\n");
    ASSERT_EQ(run("train --self " + p("self.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out")).code, 0);
    const auto set = ais::io::detector_set_from_json(json::parse(slurp(dir / "out/detectors.json")));
    const auto& d = set.detectors.front();
    std::ostringstream t;
    t.precision(17);
    t << "id,x,y\nhit," << d.center[0] * 100 << "," << d.center[1] * 100 << "\nmiss,46,46\n";
    write("traffic.csv", t.str());
    const auto r = run("detect --detectors " + p("out/detectors.json") + " --traffic " + p("traffic.csv") +
                       " --out-dir " + p("det"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("alerts=1"), std::string::npos) << r.out;
    const auto alerts = slurp(dir / "det/alerts.jsonl");
    const auto j = json::parse(alerts.substr(0, alerts.find('\n')));
    EXPECT_EQ(j["id"], "hit");
    EXPECT_FALSE(j["detectors"].empty());
}

TEST_F(Cli, DetectEmptyTraffic) {
    small_self();
    ASSERT_EQ(run("train --self " + p("self.csv") + " --out-dir " + p("out")).code, 0);
    write("traffic.csv", "id,x,y\n");
    const auto r = run("detect --detectors " + p("out/detectors.json") + " --traffic " + p("traffic.csv") +
                       " --out-dir " + p("det"));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("alerts=0"), std::string::npos);
    EXPECT_EQ(slurp(dir / "det/alerts.jsonl"), "");
}

TEST_F(Cli, DetectFingerprintMismatchExitsFour) {
    small_self();
    ASSERT_EQ(run("train --self " + p("self.csv") + " --out-dir " + p("a")).code, 0);
    write("other.csv", "id,x,y\nq,0,0\nr,500,500\n");
    ASSERT_EQ(run("train --self " + p("other.csv") + " --out-dir " + p("b")).code, 0);
    write("traffic.csv", "id,x,y\nt,1,1\n");
    const auto r = run("detect --detectors " + p("a/detectors.json") + " --schema " + p("b/schema.json") +
                       " --traffic " + p("traffic.csv") + " --out-dir " + p("det"));
    EXPECT_EQ(r.code, 4) << r.err;
    const auto e = run("evolve --detectors " + p("a/detectors.json") + " --schema " + p("b/schema.json") +
                       " --self " + p("other.csv") + " --out-dir " + p("ev"));
    EXPECT_EQ(e.code, 4) << e.err;
}

TEST_F(Cli, DcaExtremes) {
    std::string safe = "timestamp,pamp,danger,safe,antigens\n", pamp = safe;
    for (int t = 0; t < 60; ++t) {
        const std::string ids = "a" + std::to_string(t % 5) + ";b" + std::to_string(t % 3);
        safe += std::to_string(t) + ",0,0,1," + ids + "\n";
        pamp += std::to_string(t) + ",1,0.5,0," + ids + "\n";
    }
    write("safe.csv", safe);
    write("pamp.csv", pamp);
    write("cfg.toml", "[dca]\npool_size = 10\n");
    for (const auto& [file, want] : {std::pair{"safe.csv", "normal"}, std::pair{"pamp.csv", "anomalous"}}) {
        const auto r = run("dca --signals " + p(file) + " --config " + p("cfg.toml") + " --out-dir " + p("out"));
        ASSERT_EQ(r.code, 0) << r.err;
        const auto j = json::parse(slurp(dir / "out/mcav.json"));
        ASSERT_EQ(j["antigens"].size(), 8u);
        for (const auto& [id, e] : j["antigens"].items()) EXPECT_EQ(e["verdict"], want) << file << " " << id;
    }
}

TEST_F(Cli, DcaNonMonotonicTimestampsExitTwo) {
    write("sig.csv", "timestamp,pamp,danger,safe,antigens\n1,0,0,1,a\n2,0,0,1,a\n2,0,0,1,a\n");
    const auto r = run("dca --signals " + p("sig.csv") + " --out-dir " + p("out"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST_F(Cli, EvolveNoDriftAndFullDrift) {
    small_self();
    write("cfg.toml", "[negsel]\nradius = 0.05\ntarget_count = 50\n");
    ASSERT_EQ(run("train --self " + p("self.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out")).code, 0);

    auto r = run("evolve --detectors " + p("out/detectors.json") + " --self " + p("self.csv") + " --library " +
                 p("lib.json") + " --out-dir " + p("ev1"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("kept=50 invalidated=0 pruned=0"), std::string::npos) << r.out;
    const auto before = ais::io::detector_set_from_json(json::parse(slurp(dir / "out/detectors.json")));
    const auto after = ais::io::detector_set_from_json(json::parse(slurp(dir / "ev1/detectors.json")));
    EXPECT_EQ(after.detectors, before.detectors);

    // New self fills the square except a hole where the old self sat, so every
    // old detector is invalidated while replacements still have room.
    std::string grid = "id,x,y\n";
    int n = 0;
    for (int i = 0; i <= 25; ++i)
        for (int j = 0; j <= 25; ++j) {
            const double x = 4.0 * i, y = 4.0 * j;
            if ((x - 49) * (x - 49) + (y - 49) * (y - 49) < 20.0 * 20.0) continue;
            grid += "g" + std::to_string(n++) + "," + std::to_string(x) + "," + std::to_string(y) + "\n";
        }
    write("grid.csv", grid);
    r = run("evolve --detectors " + p("out/detectors.json") + " --schema " + p("out/schema.json") + " --self " +
            p("grid.csv") + " --out-dir " + p("ev2"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("kept=0 invalidated=50"), std::string::npos) << r.out;
    const auto regen = ais::io::detector_set_from_json(json::parse(slurp(dir / "ev2/detectors.json")));
    EXPECT_FALSE(regen.detectors.empty());
    for (const auto& d : regen.detectors) EXPECT_EQ(d.birth_generation, 1);
}

TEST_F(Cli, EvaluateFixtures) {
    write("labels.csv", "id,label\na,anomaly\nb,anomaly\nc,normal\nd,normal\n");
    write("right.jsonl", "{\"id\":\"a\",\"detectors\":[1]}\n{\"id\":\"b\",\"detectors\":[2]}\n{\"id\":\"zz\",\"detectors\":[3]}\n");
    write("wrong.jsonl", "{\"id\":\"c\",\"detectors\":[1]}\n{\"id\":\"d\",\"detectors\":[2]}\n");

    auto r = run("evaluate --alerts " + p("right.jsonl") + " --labels " + p("labels.csv") + " --out-dir " + p("e1"));
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(slurp(dir / "e1/evaluation.json"));
    EXPECT_EQ(j["tpr"], 1.0);
    EXPECT_EQ(j["fpr"], 0.0);
    EXPECT_EQ(j["skipped"], 1);

    r = run("evaluate --alerts " + p("wrong.jsonl") + " --labels " + p("labels.csv") + " --out-dir " + p("e2"));
    ASSERT_EQ(r.code, 0) << r.err;
    j = json::parse(slurp(dir / "e2/evaluation.json"));
    EXPECT_EQ(j["tpr"], 0.0);
    EXPECT_EQ(j["fpr"], 1.0);
    EXPECT_TRUE(j["f1"].is_null());

    std::string labels = "id,label\n", alerts;
    for (int i = 0; i < 4; ++i) labels += "p" + std::to_string(i) + ",attack\n";
    for (int i = 0; i < 6; ++i) labels += "q" + std::to_string(i) + ",benign\n";
    for (const char* id : {"p0", "p1", "p2", "q0"}) alerts += std::string("{\"id\":\"") + id + "\",\"detectors\":[0]}\n";
    write("mixed_labels.csv", labels);
    write("mixed.jsonl", alerts);
    r = run("evaluate --alerts " + p("mixed.jsonl") + " --labels " + p("mixed_labels.csv") + " --out-dir " + p("e3"));
    ASSERT_EQ(r.code, 0) << r.err;
    j = json::parse(slurp(dir / "e3/evaluation.json"));
    EXPECT_EQ(j["true_positives"], 3);
    EXPECT_EQ(j["false_negatives"], 1);
    EXPECT_EQ(j["false_positives"], 1);
    EXPECT_EQ(j["true_negatives"], 5);
    EXPECT_EQ(j["tpr"], 0.75);
    EXPECT_EQ(j["fpr"].get<double>(), 1.0 / 6.0);

    write("empty.csv", "id,label\n");
    r = run("evaluate --alerts " + p("right.jsonl") + " --labels " + p("empty.csv") + " --out-dir " + p("e4"));
    EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, EvaluateMcavSkipsNoVerdict) {
    write("sig.csv", "timestamp,pamp,danger,safe,antigens\n0,3,0,0,x\n1,3,0,0,x\n2,3,0,0,x\n3,0,0,0,late\n");
    write("cfg.toml", "[dca]\npool_size = 2\n");
    ASSERT_EQ(run("dca --signals " + p("sig.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out")).code, 0);
    write("labels.csv", "id,label\nx,1\nlate,0\n");
    const auto r = run("evaluate --mcav " + p("out/mcav.json") + " --labels " + p("labels.csv") + " --out-dir " + p("e"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(slurp(dir / "e/evaluation.json"));
    EXPECT_EQ(j["true_positives"], 1);
    EXPECT_EQ(j["skipped"], 1);
}

TEST_F(Cli, SynthIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(run("synth --out-dir " + p("a")).code, 0);
    ASSERT_EQ(run("synth --out-dir " + p("b") + " --threads 8").code, 0);
    for (const char* f : {"self.csv", "drifted_self.csv", "traffic.csv", "labels.csv", "signals.csv"}) {
        const auto a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    }
    ASSERT_EQ(run("synth --seed 7 --out-dir " + p("c")).code, 0);
    EXPECT_NE(slurp(dir / "a/self.csv"), slurp(dir / "c/self.csv"));
}

TEST_F(Cli, SynthZeroAnomaliesAndBadSpec) {
    write("cfg.toml", "[synth]\nn_anomaly = 0\nn_self_test = 30\n");
    ASSERT_EQ(run("synth --config " + p("cfg.toml") + " --out-dir " + p("z")).code, 0);
    const auto labels = slurp(dir / "z/labels.csv");
    EXPECT_EQ(labels.find("anomaly"), std::string::npos);
    write("bad.toml", "[synth]\ndims = 0\n");
    EXPECT_EQ(run("synth --config " + p("bad.toml") + " --out-dir " + p("x")).code, 2);
}

TEST_F(Cli, TrainWithClonalMaturationAndReport) {
    ASSERT_EQ(run("synth --out-dir " + p("s")).code, 0);
    // labels.csv and traffic.csv share ids; join them into one validation file
    std::ifstream traffic(dir / "s/traffic.csv"), labels(dir / "s/labels.csv");
    std::string tl, ll, joined;
    std::getline(traffic, tl);
    std::getline(labels, ll);
    joined = tl + ",label\n";
    while (std::getline(traffic, tl) && std::getline(labels, ll)) joined += tl + "," + ll.substr(ll.find(',') + 1) + "\n";
    write("validation.csv", joined);
    write("cfg.toml", "[negsel]\ntarget_count = 30\n[clonal]\nenabled = true\ngenerations = 4\nsnapshot_every = 2\n");
    auto r = run("train --self " + p("s/self.csv") + " --validation " + p("validation.csv") + " --config " +
                 p("cfg.toml") + " --out-dir " + p("t"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream hist(dir / "t/maturation.jsonl");
    int lines = 0, snapshots = 0;
    for (std::string l; std::getline(hist, l); ++lines) snapshots += json::parse(l).contains("population");
    EXPECT_EQ(lines, 4);
    EXPECT_EQ(snapshots, 2);
    r = run("report --history " + p("t/maturation.jsonl"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("best_fitness"), std::string::npos);

    r = run("train --self " + p("s/self.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("t2"));
    EXPECT_EQ(r.code, 2) << "clonal needs --validation";
}

TEST_F(Cli, UnknownConfigKeyExitsTwo) {
    small_self();
    write("cfg.toml", "[negsel]\nradius = 0.05\nbogus = 1\n");
    const auto r = run("train --self " + p("self.csv") + " --config " + p("cfg.toml") + " --out-dir " + p("out"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("negsel.bogus"), std::string::npos) << r.err;
}
