#pragma once

// Real-coded genetic algorithm: single-point mutation, whole arithmetic
// crossover and roulette-wheel selection over a parents+offspring pool.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "specunfold/evolution.hpp"

namespace specunfold {

struct GaConfig {
  std::size_t population_size = 200;
  std::size_t max_iterations = 3000;
  double mutation_prob = 0.1;
  double crossover_prob = 0.9;
  std::uint64_t seed = 0;
  bool elitism = false;  // keep the pool's best in the next population

  void validate() const {
    detail::require(population_size >= 4, "GA population size must be >= 4");
    detail::require(max_iterations >= 1, "GA needs at least one iteration");
    detail::require(mutation_prob >= 0.0 && mutation_prob <= 1.0,
                    "GA mutation probability must lie in [0, 1]");
    detail::require(crossover_prob >= 0.0 && crossover_prob <= 1.0,
                    "GA crossover probability must lie in [0, 1]");
  }
};

/// Initial population from a generator seeded with `config.seed`.
inline std::vector<Individual> initialize(const UnfoldProblem& problem,
                                          const GaConfig& config) {
  std::mt19937_64 rng(config.seed);
  return initialize(problem, config.population_size, rng);
}

/// Redraws one uniformly chosen locus i from (0, b_i).
template <std::uniform_random_bit_generator Rng>
Individual mutate(Individual individual, const UnfoldProblem& problem,
                  Rng& rng) {
  const auto bounds = problem.bounds();
  detail::require(individual.genes.size() == bounds.size(),
                  "individual length does not match problem groups");
  std::uniform_int_distribution<std::size_t> locus(0, bounds.size() - 1);
  const auto i = locus(rng);
  individual.genes[i] = detail::uniform_open(rng, bounds[i]);
  individual.fitness.reset();
  individual.residual_score = std::numeric_limits<double>::quiet_NaN();
  return individual;
}

/// o1 = u p1 + (1-u) p2, o2 = (1-u) p1 + u p2.
inline std::pair<Individual, Individual> crossover_with_weight(
    const Individual& p1, const Individual& p2, double u) {
  detail::require(p1.genes.size() == p2.genes.size(),
                  "crossover parents differ in length");
  Individual o1, o2;
  o1.genes.resize(p1.genes.size());
  o2.genes.resize(p1.genes.size());
  for (std::size_t i = 0; i < p1.genes.size(); ++i) {
    o1.genes[i] = u * p1.genes[i] + (1.0 - u) * p2.genes[i];
    o2.genes[i] = (1.0 - u) * p1.genes[i] + u * p2.genes[i];
  }
  return {std::move(o1), std::move(o2)};
}

template <std::uniform_random_bit_generator Rng>
std::pair<Individual, Individual> crossover(const Individual& p1,
                                            const Individual& p2, Rng& rng) {
  double u = 0.0;
  do {
    u = detail::unit_uniform(rng);
  } while (u <= 0.0);
  return crossover_with_weight(p1, p2, u);
}

/// Selection weights w_k = f_k - min f + 1e-9 (max f - min f + 1).
inline std::vector<double> roulette_weights(
    std::span<const Individual> population) {
  detail::require(!population.empty(), "roulette over an empty population");
  double lo = *population.front().fitness;
  double hi = lo;
  for (const auto& ind : population) {
    detail::require(ind.fitness.has_value(),
                    "roulette needs every fitness evaluated");
    lo = std::min(lo, *ind.fitness);
    hi = std::max(hi, *ind.fitness);
  }
  const double floor = 1e-9 * (hi - lo + 1.0);
  std::vector<double> w;
  w.reserve(population.size());
  for (const auto& ind : population) w.push_back(*ind.fitness - lo + floor);
  return w;
}

/// Samples `count` individuals with replacement, proportional to shifted
/// fitness.
template <std::uniform_random_bit_generator Rng>
std::vector<Individual> roulette_select(std::span<const Individual> population,
                                        std::size_t count, Rng& rng) {
  const auto w = roulette_weights(population);
  std::discrete_distribution<std::size_t> wheel(w.begin(), w.end());
  std::vector<Individual> chosen;
  chosen.reserve(count);
  for (std::size_t k = 0; k < count; ++k) chosen.push_back(population[wheel(rng)]);
  return chosen;
}

/// Runs the GA. History best is tracked outside the population; without
/// `config.elitism` good individuals can be lost by selection.
inline RunTrace run_ga(const UnfoldProblem& problem, const FitnessFunction& fn,
                       const GaConfig& config, const RunOptions& options = {}) {
  config.validate();
  fn.params.validate();
  std::mt19937_64 rng(config.seed);
  auto population = initialize(problem, config.population_size, rng);
  evaluate_population(fn, problem, population);

  detail::TraceRecorder recorder(fn.kind, options);
  recorder.start(population);

  const std::size_t n = config.population_size;
  std::vector<std::size_t> order(n);
  std::vector<Individual> pool;
  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    pool.assign(population.begin(), population.end());

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k + 1 < n; k += 2) {
      if (detail::unit_uniform(rng) >= config.crossover_prob) continue;
      auto [a, b] = crossover(population[order[k]], population[order[k + 1]], rng);
      pool.push_back(std::move(a));
      pool.push_back(std::move(b));
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (detail::unit_uniform(rng) >= config.mutation_prob) continue;
      pool.push_back(mutate(population[k], problem, rng));
    }

    evaluate_population(fn, problem, pool);
    recorder.offer(pool);
    const auto elite = pool[best_index(fn.kind, pool)];
    population = roulette_select(pool, n, rng);
    if (config.elitism) population.front() = elite;
    recorder.record(iter, population);
  }
  return std::move(recorder).finish();
}

}  // namespace specunfold
