#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "adcprune/parallel.hpp"

namespace adcprune {

/// Minimisation objectives of one individual.
using Objectives = std::vector<double>;
using Rng = std::mt19937_64;

/// a <= b everywhere and a < b somewhere.
bool dominates(const Objectives& a, const Objectives& b);

/// Deb's fast non-dominated sort. Returns fronts of indices into `points`;
/// front 0 is the non-dominated set and every index appears exactly once.
std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::span<const Objectives> points);

/// Crowding distance of each member of `front` (same order). Extremes in any
/// objective get +inf; a zero-range objective contributes nothing.
std::vector<double> crowding_distance(std::span<const Objectives> points,
                                      std::span<const std::size_t> front);

/// Area dominated by `points` inside the box bounded by `reference` (both
/// objectives minimised). Points not strictly better than the reference in
/// both objectives contribute nothing.
double hypervolume_2d(std::span<const Objectives> points, std::array<double, 2> reference);

struct GaParams {
  int population = 50;
  int generations = 100;
  double crossover_prob = 0.7;
  double mutation_prob = 0.2;
  std::uint64_t seed = 1;
  int workers = 1;  // 0 = one per hardware thread

  void validate() const;
};

template <class Genome>
struct Individual {
  Genome genome{};
  Objectives objectives;
  int rank = 0;
  double crowding = 0.0;
  std::uint64_t eval_index = 0;
  bool failed = false;
};

struct GenerationStats {
  int generation = 0;
  double best_f1 = 0.0;
  double best_f2 = 0.0;
  std::size_t front0_size = 0;
  double hypervolume = 0.0;
};

template <class Genome>
struct Problem {
  /// Throwing marks the individual as failed; it then carries the failure
  /// objectives and is never archived. Called concurrently.
  std::function<Objectives(const Genome&, std::uint64_t eval_index)> evaluate;
  std::function<std::pair<Genome, Genome>(const Genome&, const Genome&, Rng&)> crossover;
  std::function<Genome(const Genome&, Rng&)> mutate;
};

struct EvolveOptions {
  /// Worst-case objectives assigned to failed evaluations.
  Objectives failure_objectives{1.0, std::numeric_limits<double>::max()};
  /// Reference point of the logged archive hypervolume.
  std::array<double, 2> hv_reference{1.0, 1.0};
  std::function<void(const GenerationStats&)> on_generation;
};

template <class Genome>
struct EvolutionResult {
  std::vector<Individual<Genome>> population;
  /// Every non-dominated, non-failed individual evaluated during the run,
  /// first evaluation kept among equal objective vectors, sorted by objectives.
  std::vector<Individual<Genome>> archive;
  std::vector<GenerationStats> log;
};

/// Fills rank and crowding for every member; returns the fronts.
template <class Genome>
std::vector<std::vector<std::size_t>> assign_rank_and_crowding(std::vector<Individual<Genome>>& pop) {
  std::vector<Objectives> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  auto fronts = fast_non_dominated_sort(objs);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    const auto dist = crowding_distance(objs, fronts[f]);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      pop[fronts[f][k]].rank = static_cast<int>(f);
      pop[fronts[f][k]].crowding = dist[k];
    }
  }
  return fronts;
}

/// Merges `candidates` into an elitist archive, dropping dominated entries and
/// later duplicates of an existing objective vector.
template <class Genome>
void update_archive(std::vector<Individual<Genome>>& archive,
                    const std::vector<Individual<Genome>>& candidates) {
  for (const auto& c : candidates) {
    if (c.failed) continue;
    const bool covered = std::any_of(archive.begin(), archive.end(), [&](const auto& a) {
      return a.objectives == c.objectives || dominates(a.objectives, c.objectives);
    });
    if (covered) continue;
    std::erase_if(archive, [&](const auto& a) { return dominates(c.objectives, a.objectives); });
    archive.push_back(c);
  }
  std::sort(archive.begin(), archive.end(), [](const auto& a, const auto& b) {
    return a.objectives != b.objectives ? a.objectives < b.objectives : a.eval_index < b.eval_index;
  });
}

namespace detail {

template <class Genome>
void evaluate_all(const Problem<Genome>& problem, std::vector<Individual<Genome>>& pop,
                  const GaParams& params, const EvolveOptions& options) {
  parallel_for(pop.size(), params.workers, [&](std::size_t i) {
    auto& ind = pop[i];
    try {
      ind.objectives = problem.evaluate(ind.genome, ind.eval_index);
      ind.failed = false;
    } catch (const std::exception&) {
      ind.objectives = options.failure_objectives;
      ind.failed = true;
    }
  });
}

template <class Genome>
GenerationStats summarize(int generation, const std::vector<Individual<Genome>>& pop,
                          const std::vector<Individual<Genome>>& archive,
                          const EvolveOptions& options) {
  GenerationStats s;
  s.generation = generation;
  s.best_f1 = std::numeric_limits<double>::infinity();
  s.best_f2 = std::numeric_limits<double>::infinity();
  for (const auto& ind : pop) {
    if (ind.rank == 0) ++s.front0_size;
    if (ind.failed || ind.objectives.size() < 2) continue;
    s.best_f1 = std::min(s.best_f1, ind.objectives[0]);
    s.best_f2 = std::min(s.best_f2, ind.objectives[1]);
  }
  std::vector<Objectives> pts;
  for (const auto& a : archive) pts.push_back(a.objectives);
  bool two_d = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.size() == 2; });
  s.hypervolume = two_d ? hypervolume_2d(pts, options.hv_reference)
                        : std::numeric_limits<double>::quiet_NaN();
  return s;
}

// Binary tournament on (rank, crowding); exact ties are a coin flip.
template <class Genome>
std::size_t tournament(const std::vector<Individual<Genome>>& pop, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  while (b == a) b = pick(rng);
  const auto& x = pop[a];
  const auto& y = pop[b];
  if (x.rank != y.rank) return x.rank < y.rank ? a : b;
  if (x.crowding != y.crowding) return x.crowding > y.crowding ? a : b;
  return std::bernoulli_distribution(0.5)(rng) ? a : b;
}

}  // namespace detail

/// Elitist (mu + lambda) NSGA-II. Variation runs serially on one RNG seeded
/// from params.seed; evaluations run in parallel and see only their genome and
/// eval index, so results do not depend on scheduling. `initial` must hold
/// exactly params.population genomes.
template <class Genome>
EvolutionResult<Genome> evolve(const Problem<Genome>& problem, std::vector<Genome> initial,
                               const GaParams& params, const EvolveOptions& options = {}) {
  params.validate();
  const auto size = static_cast<std::size_t>(params.population);
  if (initial.size() != size) {
    throw std::invalid_argument("initial population size must equal params.population");
  }
  Rng rng(params.seed);
  std::uint64_t next_index = 0;

  EvolutionResult<Genome> result;
  auto& pop = result.population;
  for (auto& g : initial) {
    Individual<Genome> ind;
    ind.genome = std::move(g);
    ind.eval_index = next_index++;
    pop.push_back(std::move(ind));
  }
  detail::evaluate_all(problem, pop, params, options);
  assign_rank_and_crowding(pop);
  update_archive(result.archive, pop);
  auto record = [&](int generation) {
    result.log.push_back(detail::summarize(generation, pop, result.archive, options));
    if (options.on_generation) options.on_generation(result.log.back());
  };
  record(0);

  std::bernoulli_distribution do_crossover(params.crossover_prob);
  std::bernoulli_distribution do_mutation(params.mutation_prob);
  for (int gen = 1; gen <= params.generations; ++gen) {
    std::vector<Individual<Genome>> offspring;
    offspring.reserve(size);
    while (offspring.size() < size) {
      const auto& p1 = pop[detail::tournament(pop, rng)].genome;
      const auto& p2 = pop[detail::tournament(pop, rng)].genome;
      std::pair<Genome, Genome> kids = do_crossover(rng) ? problem.crossover(p1, p2, rng)
                                                         : std::pair<Genome, Genome>{p1, p2};
      for (Genome* child : {&kids.first, &kids.second}) {
        if (offspring.size() == size) break;
        Individual<Genome> ind;
        ind.genome = do_mutation(rng) ? problem.mutate(*child, rng) : std::move(*child);
        ind.eval_index = next_index++;
        offspring.push_back(std::move(ind));
      }
    }
    detail::evaluate_all(problem, offspring, params, options);
    update_archive(result.archive, offspring);

    std::vector<Individual<Genome>> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    const auto fronts = assign_rank_and_crowding(combined);
    std::vector<Individual<Genome>> next;
    next.reserve(size);
    for (const auto& front : fronts) {
      if (next.size() + front.size() <= size) {
        for (std::size_t i : front) next.push_back(combined[i]);
        continue;
      }
      std::vector<std::size_t> order(front.begin(), front.end());
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return combined[a].crowding > combined[b].crowding;
      });
      for (std::size_t k = 0; next.size() < size; ++k) next.push_back(combined[order[k]]);
      break;
    }
    pop = std::move(next);
    assign_rank_and_crowding(pop);
    record(gen);
  }
  return result;
}

}  // namespace adcprune
