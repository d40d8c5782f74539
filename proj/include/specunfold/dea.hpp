#pragma once

// Differential evolution: rand/1 mutation, binomial crossover, one-to-one
// greedy selection.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "specunfold/evolution.hpp"

namespace specunfold {

enum class MutationSign {
  difference,     ///< x1 + F (x2 - x3)
  sum_as_printed  ///< x1 + F (x2 + x3)
};

struct DeaConfig {
  std::size_t population_size = 200;
  std::size_t max_iterations = 3000;
  double scale_factor = 0.5;
  double crossover_prob = 0.9;
  std::uint64_t seed = 0;
  MutationSign mutation_sign = MutationSign::difference;
  bool force_gene = true;  // copy one random locus from the trial vector

  void validate() const {
    detail::require(population_size >= 4, "DEA population size must be >= 4");
    detail::require(max_iterations >= 1, "DEA needs at least one iteration");
    detail::require(scale_factor > 0.0 && scale_factor < 2.0,
                    "DEA scale factor must lie in (0, 2)");
    detail::require(crossover_prob >= 0.0 && crossover_prob <= 1.0,
                    "DEA crossover probability must lie in [0, 1]");
  }
};

/// x1 + F * (x2 -/+ x3), clamped into [0, b_i].
inline std::vector<double> de_combine(std::span<const double> x1,
                                      std::span<const double> x2,
                                      std::span<const double> x3, double scale,
                                      MutationSign sign,
                                      std::span<const double> bounds) {
  detail::require(x1.size() == bounds.size() && x2.size() == bounds.size() &&
                      x3.size() == bounds.size(),
                  "DE donors differ in length");
  const double s3 = sign == MutationSign::difference ? -1.0 : 1.0;
  std::vector<double> out(x1.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(x1[i] + scale * (x2[i] + s3 * x3[i]), 0.0, bounds[i]);
  return out;
}

/// Three mutually distinct donor indices, none equal to `target`.
template <std::uniform_random_bit_generator Rng>
std::array<std::size_t, 3> pick_donors(std::size_t population_size,
                                       std::size_t target, Rng& rng) {
  detail::require(population_size >= 4,
                  "DE mutation needs at least four individuals");
  std::uniform_int_distribution<std::size_t> pick(0, population_size - 1);
  std::array<std::size_t, 3> d{};
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t c = 0;
    bool clash = true;
    while (clash) {
      c = pick(rng);
      clash = c == target;
      for (std::size_t q = 0; q < k; ++q) clash = clash || c == d[q];
    }
    d[k] = c;
  }
  return d;
}

/// Temporary (trial) vector for slot `target`.
template <std::uniform_random_bit_generator Rng>
std::vector<double> de_mutate(std::span<const Individual> population,
                              std::size_t target, const DeaConfig& config,
                              const UnfoldProblem& problem, Rng& rng) {
  const auto d = pick_donors(population.size(), target, rng);
  return de_combine(population[d[0]].genes, population[d[1]].genes,
                    population[d[2]].genes, config.scale_factor,
                    config.mutation_sign, problem.bounds());
}

/// Binomial crossover: gene from `temporary` when u < pc, else from `target`.
/// With `force_gene`, one uniformly chosen locus always comes from `temporary`.
template <std::uniform_random_bit_generator Rng>
std::vector<double> de_crossover(std::span<const double> target,
                                 std::span<const double> temporary, double pc,
                                 Rng& rng, bool force_gene = true) {
  detail::require(target.size() == temporary.size(),
                  "DE crossover vectors differ in length");
  std::vector<double> out(target.begin(), target.end());
  const std::size_t forced =
      force_gene ? std::uniform_int_distribution<std::size_t>(
                       0, target.size() - 1)(rng)
                 : target.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = detail::unit_uniform(rng);
    if (u < pc || i == forced) out[i] = temporary[i];
  }
  return out;
}

/// The offspring survives only with strictly higher fitness.
inline const Individual& de_select(const Individual& target,
                                   const Individual& offspring) {
  return *offspring.fitness > *target.fitness ? offspring : target;
}

inline RunTrace run_dea(const UnfoldProblem& problem, const FitnessFunction& fn,
                        const DeaConfig& config,
                        const RunOptions& options = {}) {
  config.validate();
  fn.params.validate();
  std::mt19937_64 rng(config.seed);
  auto population = initialize(problem, config.population_size, rng);
  evaluate_population(fn, problem, population);

  detail::TraceRecorder recorder(fn.kind, options);
  recorder.start(population);

  const std::size_t n = config.population_size;
  std::vector<Individual> offspring(n);
  std::vector<Individual> joint;
  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto trial = de_mutate(std::span<const Individual>(population), k,
                                   config, problem, rng);
      offspring[k].genes = de_crossover(population[k].genes, trial,
                                        config.crossover_prob, rng,
                                        config.force_gene);
      offspring[k].fitness.reset();
    }

    if (fn.kind == FitnessKind::f3) {
      // Score targets and offspring against one shared context.
      joint.assign(population.begin(), population.end());
      joint.insert(joint.end(), offspring.begin(), offspring.end());
      evaluate_population(fn, problem, joint);
      std::copy_n(joint.begin(), n, population.begin());
      std::copy_n(joint.begin() + static_cast<std::ptrdiff_t>(n), n,
                  offspring.begin());
    } else {
      evaluate_population(fn, problem, offspring);
    }
    recorder.offer(offspring);

    for (std::size_t k = 0; k < n; ++k)
      if (&de_select(population[k], offspring[k]) == &offspring[k])
        population[k] = offspring[k];
    recorder.record(iter, population);
  }
  return std::move(recorder).finish();
}

}  // namespace specunfold
