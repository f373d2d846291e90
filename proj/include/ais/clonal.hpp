#pragma once

// CLONALG-style affinity maturation of a detector population: fitness-ranked
// selection, rank-proportional cloning, hypermutation inversely scaled by
// fitness, re-censoring of mutants against self, elitist survivor selection
// and replacement of the worst members with fresh random detectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "ais/error.hpp"
#include "ais/negsel.hpp"
#include "ais/parallel.hpp"
#include "ais/random.hpp"

namespace ais {

struct ValidationSet {
    std::vector<std::vector<double>> normal;
    std::vector<std::vector<double>> anomalous;
};

struct Population {
    std::vector<Detector> members;
    std::int64_t generation = 0;
    std::vector<double> fitness;  // aligned with members once scored
    std::uint64_t next_id = 0;

    static Population from(const DetectorSet& set) {
        Population p;
        p.members = set.detectors;
        p.generation = set.generation;
        p.next_id = set.next_id;
        return p;
    }

    friend bool operator==(const Population&, const Population&) = default;
};

struct MaturationConfig {
    std::size_t n_select = 5;
    double beta = 1.0;
    double rho = 3.0;
    std::size_t d_replace = 2;
    std::size_t generations = 50;
    std::uint64_t rng_seed = 0;
    double fresh_radius = 0.05;      // radius of replacement detectors
    std::size_t fresh_attempts = 100; // candidates tried per replacement slot
    unsigned threads = 1;

    void validate(std::size_t pop_size) const {
        if (pop_size == 0) throw ValidationError("population is empty");
        if (n_select == 0 || n_select > pop_size)
            throw ValidationError("n_select must be in [1, population size]");
        if (d_replace >= pop_size) throw ValidationError("d_replace must be < population size");
        if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
        if (!(rho > 0.0)) throw ValidationError("rho must be > 0");
        if (generations == 0) throw ValidationError("generations must be > 0");
        if (!(fresh_radius > 0.0)) throw ValidationError("fresh_radius must be > 0");
    }
};

// Share of anomalous validation points the detector covers, zeroed outright if
// it covers any normal point.
inline double score_fitness(const Detector& detector, const ValidationSet& validation) {
    if (validation.anomalous.empty() || validation.normal.empty())
        throw ValidationError("validation set needs at least one normal and one anomalous antigen");
    for (const auto& s : validation.normal)
        if (detector.covers(s)) return 0.0;
    std::size_t hit = 0;
    for (const auto& a : validation.anomalous) hit += detector.covers(a);
    return static_cast<double>(hit) / static_cast<double>(validation.anomalous.size());
}

// count_i = round(beta * pop_size / (i + 1)) for 0-based rank i.
inline std::vector<std::size_t> clone_counts(std::span<const double> ranked_fitness, double beta,
                                             std::size_t pop_size) {
    std::vector<std::size_t> counts(ranked_fitness.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = std::round(beta * static_cast<double>(pop_size) / static_cast<double>(i + 1));
        counts[i] = c > 0.0 ? static_cast<std::size_t>(c) : 0;
    }
    return counts;
}

inline double mutation_scale(double normalized_fitness, double rho) { return std::exp(-rho * normalized_fitness); }

// Gaussian perturbation with standard deviation 0.1 * exp(-rho * fitness) on
// every center component (clamped to [0,1]) and multiplicatively on the radius.
inline Detector hypermutate(const Detector& parent, double normalized_fitness, double rho, Rng& rng) {
    const double sd = 0.1 * mutation_scale(normalized_fitness, rho);
    Detector child = parent;
    for (auto& x : child.center) x = std::clamp(x + rng.normal(0.0, sd), 0.0, 1.0);
    child.radius = std::max(1e-6, parent.radius * (1.0 + rng.normal(0.0, sd)));
    child.origin = Origin::Clonal;
    child.match_count = 0;
    return child;
}

struct StepStats {
    std::int64_t generation = 0;  // generation of the produced population
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t clones = 0;
    std::size_t clones_survived = 0;
    std::size_t fresh = 0;
};

namespace detail {

inline std::vector<double> score_all(const std::vector<Detector>& ds, const ValidationSet& v, unsigned threads) {
    std::vector<double> f(ds.size());
    parallel_for(ds.size(), threads, [&](std::size_t i) { f[i] = score_fitness(ds[i], v); });
    return f;
}

// Indices ordered by fitness descending; ties keep the earlier index first.
inline std::vector<std::size_t> rank_desc(const std::vector<double>& f) {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    return idx;
}

inline constexpr std::uint64_t kFreshStream = 0xF0000000ULL;

}  // namespace detail

inline Population maturation_step(const Population& pop, const ValidationSet& validation,
                                  const MaturationConfig& cfg, const SelfSet& self_set,
                                  StepStats* stats = nullptr) {
    const std::size_t pop_size = pop.members.size();
    cfg.validate(pop_size);
    self_set.validate();

    const auto fitness = detail::score_all(pop.members, validation, cfg.threads);
    const auto ranked = detail::rank_desc(fitness);

    std::vector<double> selected_fitness(cfg.n_select);
    for (std::size_t i = 0; i < cfg.n_select; ++i) selected_fitness[i] = fitness[ranked[i]];
    const auto counts = clone_counts(selected_fitness, cfg.beta, pop_size);
    const double best = selected_fitness.front();
    const std::int64_t next_gen = pop.generation + 1;

    struct Job {
        std::size_t parent;
        double normalized;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < cfg.n_select; ++i)
        for (std::size_t c = 0; c < counts[i]; ++c)
            jobs.push_back({ranked[i], best > 0.0 ? selected_fitness[i] / best : 0.0});

    std::vector<Detector> clones(jobs.size());
    std::vector<char> rejected(jobs.size(), 0);
    std::vector<double> clone_fitness(jobs.size(), 0.0);
    const auto gen_stream = static_cast<std::uint64_t>(pop.generation) << 32;
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        Rng rng(cfg.rng_seed, gen_stream | j);
        clones[j] = hypermutate(pop.members[jobs[j].parent], jobs[j].normalized, cfg.rho, rng);
        clones[j].birth_generation = next_gen;
        rejected[j] = censor(clones[j], self_set);
        if (!rejected[j]) clone_fitness[j] = score_fitness(clones[j], validation);
    });

    Population next;
    next.generation = next_gen;
    next.next_id = pop.next_id;

    std::vector<Detector> pool = pop.members;
    std::vector<double> pool_fitness = fitness;
    std::size_t survived = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (rejected[j]) continue;
        clones[j].id = next.next_id++;
        pool.push_back(std::move(clones[j]));
        pool_fitness.push_back(clone_fitness[j]);
        ++survived;
    }

    const auto order = detail::rank_desc(pool_fitness);
    for (std::size_t i = 0; i < pop_size; ++i) {
        next.members.push_back(pool[order[i]]);
        next.fitness.push_back(pool_fitness[order[i]]);
    }

    std::size_t fresh = 0;
    Rng fresh_rng(cfg.rng_seed, detail::kFreshStream | static_cast<std::uint64_t>(pop.generation) << 32);
    const std::size_t dim = self_set.dimension();
    for (std::size_t slot = pop_size - cfg.d_replace; slot < pop_size; ++slot) {
        for (std::size_t attempt = 0; attempt < cfg.fresh_attempts; ++attempt) {
            Detector d{0, std::vector<double>(dim), cfg.fresh_radius, next_gen, 0, Origin::Random};
            for (auto& x : d.center) x = fresh_rng.uniform();
            if (censor(d, self_set)) continue;
            d.id = next.next_id++;
            next.fitness[slot] = score_fitness(d, validation);
            next.members[slot] = std::move(d);
            ++fresh;
            break;
        }
    }

    if (stats) {
        stats->generation = next_gen;
        stats->best_fitness = *std::max_element(next.fitness.begin(), next.fitness.end());
        stats->mean_fitness =
            std::accumulate(next.fitness.begin(), next.fitness.end(), 0.0) / static_cast<double>(pop_size);
        stats->clones = jobs.size();
        stats->clones_survived = survived;
        stats->fresh = fresh;
    }
    return next;
}

// Runs cfg.generations maturation steps. `on_step` (optional) sees every
// produced population with its statistics.
inline Population mature(Population pop, const ValidationSet& validation, const MaturationConfig& cfg,
                         const SelfSet& self_set, std::vector<StepStats>* history = nullptr,
                         const std::function<void(const Population&, const StepStats&)>& on_step = {}) {
    for (std::size_t g = 0; g < cfg.generations; ++g) {
        StepStats s;
        pop = maturation_step(pop, validation, cfg, self_set, &s);
        if (history) history->push_back(s);
        if (on_step) on_step(pop, s);
    }
    return pop;
}

}  // namespace ais
