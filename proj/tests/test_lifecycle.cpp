#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ais/lifecycle.hpp"
#include "ais/negsel.hpp"
#include "ais/random.hpp"
#include "oracles.hpp"

using namespace ais;

namespace {

Detector det(std::vector<double> c, double r, std::int64_t birth = 0, std::uint64_t matches = 0) {
    return Detector{0, std::move(c), r, birth, matches, Origin::Random};
}

DetectorSet set_of(std::vector<Detector> ds, std::int64_t generation = 0) {
    DetectorSet s;
    s.generation = generation;
    for (auto& d : ds) s.admit(std::move(d));
    return s;
}

SelfSet cluster(double cx, double cy, std::size_t n, std::uint64_t seed, double sd = 0.03) {
    Rng rng(seed);
    SelfSet s;
    s.self_radius = 0.02;
    for (std::size_t i = 0; i < n; ++i)
        s.samples.push_back({std::clamp(rng.normal(cx, sd), 0.0, 1.0), std::clamp(rng.normal(cy, sd), 0.0, 1.0)});
    return s;
}

void expect_sound(const DetectorSet& set, const SelfSet& self) {
    for (const auto& d : set.detectors)
        for (const auto& s : self.samples)
            EXPECT_GT(oracle::dist(d.center, s), static_cast<long double>(d.radius + self.self_radius))
                << "detector " << d.id;
}

}  // namespace

TEST(Revalidate, RemovesOverlappingDetectors) {
    SelfSet self;
    self.samples = {{0.5, 0.5}};
    self.self_radius = 0.05;
    const auto s = set_of({det({0.9, 0.9}, 0.1), det({0.55, 0.5}, 0.1), det({0.5, 0.7}, 0.15)});
    const auto p = revalidate(s, self);
    ASSERT_EQ(p.kept.detectors.size(), 1u);
    EXPECT_EQ(p.kept.detectors[0].id, 0u);
    ASSERT_EQ(p.removed.size(), 2u);
    EXPECT_EQ(p.removed[0].id, 1u);
    // 0.2 == 0.15 + 0.05 is on the boundary, which counts as overlap
    EXPECT_EQ(p.removed[1].id, 2u);
}

TEST(Revalidate, EmptySelfRejected) {
    EXPECT_THROW(revalidate(set_of({det({0.1}, 0.1)}), SelfSet{}), InputError);
}

TEST(PruneStale, Examples) {
    LifecyclePolicy pol;
    pol.max_age = 50;
    pol.min_matches_by_age = 1;
    const auto s = set_of({det({0.1}, 0.1, 0, 0), det({0.2}, 0.1, 0, 7), det({0.3}, 0.1, 90, 0),
                           det({0.4}, 0.1, 50, 0)});
    const auto p = prune_stale(s, pol, 100);
    ASSERT_EQ(p.removed.size(), 1u);
    EXPECT_EQ(p.removed[0].id, 0u);
    ASSERT_EQ(p.kept.detectors.size(), 3u);
    // age exactly max_age is not stale
    EXPECT_EQ(p.kept.detectors[2].id, 3u);
}

TEST(PruneStale, OrderPreservedAndPartitionComplete) {
    Rng rng(3);
    std::vector<Detector> ds;
    for (int i = 0; i < 200; ++i)
        ds.push_back(det({rng.uniform()}, 0.01, static_cast<std::int64_t>(rng.below(100)), rng.below(3)));
    const auto s = set_of(ds);
    LifecyclePolicy pol;
    pol.max_age = 40;
    pol.min_matches_by_age = 2;
    const auto p = prune_stale(s, pol, 100);
    EXPECT_EQ(p.kept.detectors.size() + p.removed.size(), s.detectors.size());
    for (const auto& d : p.removed) {
        EXPECT_GT(100 - d.birth_generation, 40);
        EXPECT_LT(d.match_count, 2u);
    }
    for (std::size_t i = 1; i < p.kept.detectors.size(); ++i)
        EXPECT_LT(p.kept.detectors[i - 1].id, p.kept.detectors[i].id);
}

TEST(Archive, EvictsFewestMatches) {
    GeneLibrary lib;
    lib.capacity = 2;
    lib = archive(det({0.1}, 0.1, 0, 5), lib, 1);
    lib = archive(det({0.2}, 0.1, 0, 3), lib, 2);
    lib = archive(det({0.3}, 0.1, 0, 4), lib, 3);
    ASSERT_EQ(lib.entries.size(), 2u);
    EXPECT_EQ(lib.entries[0].lifetime_matches, 5u);
    EXPECT_EQ(lib.entries[1].lifetime_matches, 4u);
}

TEST(Archive, TieEvictsOldest) {
    GeneLibrary lib;
    lib.capacity = 2;
    lib = archive(det({0.1}, 0.1, 0, 3), lib, 1);
    lib = archive(det({0.2}, 0.1, 0, 3), lib, 2);
    lib = archive(det({0.3}, 0.1, 0, 3), lib, 3);
    ASSERT_EQ(lib.entries.size(), 2u);
    EXPECT_EQ(lib.entries[0].archived_generation, 2);
    EXPECT_EQ(lib.entries[1].archived_generation, 3);
}

TEST(Archive, RejectsUnmatchedDetector) {
    EXPECT_THROW(archive(det({0.1}, 0.1, 0, 0), GeneLibrary{}, 1), PolicyError);
}

TEST(Archive, NeverExceedsCapacity) {
    Rng rng(5);
    GeneLibrary lib;
    lib.capacity = 16;
    for (int i = 0; i < 300; ++i) {
        lib = archive(det({rng.uniform()}, 0.1, 0, 1 + rng.below(50)), lib, i);
        EXPECT_LE(lib.entries.size(), 16u);
    }
}

TEST(SeedFromLibrary, NearTheArchivedGene) {
    SelfSet self;
    self.samples = {{0.1, 0.1}};
    self.self_radius = 0.02;
    GeneLibrary lib;
    lib.entries.push_back({{0.7, 0.7}, 0.05, 0, 3});
    Rng rng(11);
    const double scale = 0.01;
    const auto seeded = seed_from_library(lib, 200, scale, self, rng, 4);
    ASSERT_EQ(seeded.size(), 200u);
    for (const auto& d : seeded) {
        EXPECT_EQ(d.origin, Origin::LibrarySeeded);
        EXPECT_EQ(d.birth_generation, 4);
        EXPECT_EQ(d.match_count, 0u);
        EXPECT_EQ(d.radius, 0.05);
        for (double x : d.center) EXPECT_LE(std::abs(x - 0.7), 5 * scale);
    }
}

TEST(SeedFromLibrary, CandidatesOverlappingSelfAreDropped) {
    SelfSet self;
    self.samples = {{0.5, 0.5}};
    self.self_radius = 0.1;
    GeneLibrary lib;
    lib.entries.push_back({{0.5, 0.5}, 0.05, 0, 3});
    Rng rng(1);
    EXPECT_TRUE(seed_from_library(lib, 50, 0.01, self, rng).empty());
}

TEST(SeedFromLibrary, ZeroCountOrEmptyLibrary) {
    SelfSet self;
    self.samples = {{0.5, 0.5}};
    GeneLibrary lib;
    Rng rng(1);
    EXPECT_TRUE(seed_from_library(lib, 10, 0.01, self, rng).empty());
    lib.entries.push_back({{0.9, 0.9}, 0.05, 0, 3});
    EXPECT_TRUE(seed_from_library(lib, 0, 0.01, self, rng).empty());
}

TEST(Policy, Validation) {
    LifecyclePolicy p;
    EXPECT_NO_THROW(p.validate());
    p.library_seed_fraction = 1.5;
    EXPECT_THROW(p.validate(), PolicyError);
    p = {};
    p.max_age = 0;
    EXPECT_THROW(p.validate(), PolicyError);
    p = {};
    p.revalidation_interval = 0;
    EXPECT_THROW(p.validate(), PolicyError);
}

class Evolve : public ::testing::Test {
protected:
    void SetUp() override {
        self = cluster(0.3, 0.3, 150, 1);
        NsaParams np;
        np.target_count = 80;
        np.radius = 0.05;
        np.seed = 2;
        set = generate_nsa(self, np).set;
        set.params.radius = 0.05;
    }
    SelfSet self;
    DetectorSet set;
};

TEST_F(Evolve, NoDriftMeansNoTurnover) {
    const auto r = evolve(set, {}, self, {}, {7, 0.05, 0});
    EXPECT_TRUE(r.summary.revalidated);
    EXPECT_EQ(r.summary.invalidated, 0u);
    EXPECT_EQ(r.summary.pruned, 0u);
    EXPECT_EQ(r.summary.seeded_library + r.summary.seeded_random, 0u);
    EXPECT_EQ(r.detectors.detectors, set.detectors);
    EXPECT_EQ(r.detectors.generation, set.generation + 1);
}

TEST_F(Evolve, FullDriftRegeneratesEverything) {
    // New self covers the whole cube so every old detector overlaps it.
    SelfSet everywhere;
    everywhere.self_radius = 0.02;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) everywhere.samples.push_back({i / 20.0, j / 20.0});
    for (auto& d : set.detectors) d.match_count = 1;
    const auto r = evolve(set, {}, everywhere, {}, {7, 0.005, 20000});
    EXPECT_EQ(r.summary.invalidated, set.detectors.size());
    EXPECT_EQ(r.summary.kept, 0u);
    EXPECT_EQ(r.summary.archived, set.detectors.size());
    EXPECT_EQ(r.library.entries.size(), set.detectors.size());
    for (const auto& d : r.detectors.detectors) {
        EXPECT_NE(d.origin, Origin::Clonal);
        EXPECT_EQ(d.birth_generation, 1);
    }
    expect_sound(r.detectors, everywhere);
}

TEST_F(Evolve, ShiftedSelfStaysSoundAndReseeds) {
    const auto moved = cluster(0.6, 0.6, 150, 9);
    for (auto& d : set.detectors) d.match_count = 2;
    const auto r = evolve(set, {}, moved, {}, {7, 0.05, 0});
    EXPECT_GT(r.summary.invalidated, 0u);
    EXPECT_EQ(r.summary.kept + r.summary.invalidated, set.detectors.size());
    EXPECT_GT(r.summary.seeded_library, 0u);
    expect_sound(r.detectors, moved);

    const auto again = evolve(set, {}, moved, {}, {7, 0.05, 0});
    EXPECT_EQ(again.detectors, r.detectors);
    EXPECT_EQ(again.library, r.library);
    EXPECT_EQ(again.summary, r.summary);
}

TEST_F(Evolve, RevalidationCadence) {
    LifecyclePolicy pol;
    pol.revalidation_interval = 2;
    const auto moved = cluster(0.6, 0.6, 150, 9);
    // generation 0 -> 1 is off-cadence, 1 -> 2 is on it
    auto r = evolve(set, {}, moved, pol, {7, 0.05, 0});
    EXPECT_FALSE(r.summary.revalidated);
    EXPECT_EQ(r.summary.invalidated, 0u);
    r = evolve(r.detectors, r.library, moved, pol, {7, 0.05, 0});
    EXPECT_TRUE(r.summary.revalidated);
    expect_sound(r.detectors, moved);
}

TEST_F(Evolve, VDetectorSetsTopUpWithVariableRadii) {
    VDetectorParams vp;
    vp.seed = 4;
    vp.target_coverage = 0.9;
    auto vset = generate_vdetector(self, vp).set;
    const auto moved = cluster(0.6, 0.6, 150, 9);
    LifecyclePolicy pol;
    pol.library_seed_fraction = 0.0;
    const auto r = evolve(vset, {}, moved, pol, {3, 0.05, 0});
    ASSERT_GT(r.summary.seeded_random, 0u);
    for (const auto& d : r.detectors.detectors) {
        if (d.birth_generation != 1) continue;
        const double gap = moved.nearest_distance(d.center) - moved.self_radius - d.radius;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, 1e-9);
    }
    expect_sound(r.detectors, moved);
}

TEST(EvolveErrors, DimensionMismatch) {
    auto s = set_of({det({0.1, 0.1}, 0.05)});
    SelfSet self;
    self.samples = {{0.5, 0.5, 0.5}};
    EXPECT_THROW(evolve(s, {}, self, {}, {}), DimensionError);
}
