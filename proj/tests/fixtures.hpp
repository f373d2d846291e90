#pragma once

// Scenarios shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ais/clonal.hpp"
#include "ais/negsel.hpp"
#include "ais/random.hpp"

namespace fixture {

using namespace ais;

struct Toy {
    SelfSet self;
    ValidationSet validation;
    Population pop;
};

// Self cluster around the middle of the unit square; anomalies spread
// uniformly outside a 0.3 disc; 20 small random detectors to start.
inline Toy toy(std::uint64_t seed) {
    Toy t;
    Rng rng(seed);
    t.self.self_radius = 0.05;
    for (int i = 0; i < 100; ++i)
        t.self.samples.push_back({std::clamp(rng.normal(0.5, 0.07), 0.0, 1.0), std::clamp(rng.normal(0.5, 0.07), 0.0, 1.0)});
    for (int i = 0; i < 100; ++i)
        t.validation.normal.push_back(
            {std::clamp(rng.normal(0.5, 0.07), 0.0, 1.0), std::clamp(rng.normal(0.5, 0.07), 0.0, 1.0)});
    while (t.validation.anomalous.size() < 300) {
        std::vector<double> p{rng.uniform(), rng.uniform()};
        if (euclidean(p, std::vector<double>{0.5, 0.5}) > 0.3) t.validation.anomalous.push_back(p);
    }
    NsaParams p;
    p.target_count = 20;
    p.radius = 0.03;
    p.seed = seed;
    t.pop = Population::from(generate_nsa(t.self, p).set);
    return t;
}

}  // namespace fixture
