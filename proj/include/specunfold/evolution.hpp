#pragma once

// Pieces shared by the GA and DE solvers: individuals, population scoring,
// history-best bookkeeping and run traces.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "specunfold/core.hpp"
#include "specunfold/fitness.hpp"
#include "specunfold/metrics.hpp"

namespace specunfold {

struct Individual {
  std::vector<double> genes;
  std::optional<double> fitness;  // unset after any change to genes
  double residual_score = std::numeric_limits<double>::quiet_NaN();
};

struct FitnessQuantiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

struct GenerationRecord {
  std::size_t iteration = 0;           // 1-based
  double best_fitness = 0.0;           // best of this generation's population
  double history_best_fitness = 0.0;   // as scored when it was found
  double history_best_qs = std::numeric_limits<double>::quiet_NaN();
  double last_best_qs = std::numeric_limits<double>::quiet_NaN();
  FitnessQuantiles quantiles{};
};

struct RunTrace {
  FitnessKind kind = FitnessKind::f2;
  std::vector<GenerationRecord> records;
  Individual history_best;
  Individual last_best;
  /// Lowest Qs among the initial random population (NaN without reference).
  double initial_best_qs = std::numeric_limits<double>::quiet_NaN();
};

/// Called after each generation with the surviving population.
using GenerationObserver =
    std::function<void(std::size_t iteration, std::span<const Individual>)>;

struct RunOptions {
  std::optional<std::vector<double>> reference;  // enables Qs in the trace
  QsDenominator qs_denominator = QsDenominator::calculated;
  GenerationObserver observer;
};

namespace detail {

/// Uniform draw from the open interval (0, upper).
template <std::uniform_random_bit_generator Rng>
double uniform_open(Rng& rng, double upper) {
  std::uniform_real_distribution<double> dist(0.0, upper);
  double v = 0.0;
  do {
    v = dist(rng);
  } while (v <= 0.0 || v >= upper);
  return v;
}

template <std::uniform_random_bit_generator Rng>
double unit_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace detail

/// `count` individuals with gene i uniform in (0, b_i).
template <std::uniform_random_bit_generator Rng>
std::vector<Individual> initialize(const UnfoldProblem& problem,
                                   std::size_t count, Rng& rng) {
  const auto bounds = problem.bounds();
  std::vector<Individual> population(count);
  for (auto& ind : population) {
    ind.genes.resize(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
      ind.genes[i] = detail::uniform_open(rng, bounds[i]);
  }
  return population;
}

/// Scores every individual whose fitness is unset. For F3 the whole span is
/// rescored against a context built from exactly these individuals.
inline void evaluate_population(const FitnessFunction& fn,
                                const UnfoldProblem& problem,
                                std::span<Individual> population) {
  if (fn.kind != FitnessKind::f3) {
    for (auto& ind : population) {
      if (ind.fitness) continue;
      const auto parts = evaluation_parts(problem, ind.genes, fn.kind);
      ind.residual_score = parts.residual_score();
      ind.fitness = fitness_from_parts(fn, parts);
    }
    return;
  }
  PopulationContext ctx;
  ctx.residual_scores.reserve(population.size());
  for (auto& ind : population) {
    if (!std::isfinite(ind.residual_score) || !ind.fitness)
      ind.residual_score = residual_score(problem, ind.genes);
    ctx.residual_scores.push_back(ind.residual_score);
  }
  const double top = ctx.max_score();
  for (auto& ind : population) ind.fitness = 2.0 * top - ind.residual_score;
}

/// True when `a` should be reported ahead of `b`. F3 fitness is relative to
/// its own population, so F3 compares residual scores instead.
inline bool better_than(FitnessKind kind, const Individual& a,
                        const Individual& b) {
  if (kind == FitnessKind::f3) return a.residual_score < b.residual_score;
  return *a.fitness > *b.fitness;
}

inline std::size_t best_index(FitnessKind kind,
                              std::span<const Individual> population) {
  detail::require(!population.empty(), "best of an empty population");
  std::size_t best = 0;
  for (std::size_t k = 1; k < population.size(); ++k)
    if (better_than(kind, population[k], population[best])) best = k;
  return best;
}

inline FitnessQuantiles fitness_quantiles(
    std::span<const Individual> population) {
  std::vector<double> f;
  f.reserve(population.size());
  for (const auto& ind : population) f.push_back(*ind.fitness);
  std::sort(f.begin(), f.end());
  return {f.front(), sorted_quantile(f, 0.25), sorted_quantile(f, 0.5),
          sorted_quantile(f, 0.75), f.back()};
}

namespace detail {

/// Shared per-generation bookkeeping for both solvers.
class TraceRecorder {
 public:
  TraceRecorder(FitnessKind kind, const RunOptions& options)
      : options_(options) {
    trace_.kind = kind;
  }

  void start(std::span<const Individual> initial) {
    offer(initial);
    if (options_.reference) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ind : initial) best = std::min(best, score(ind));
      trace_.initial_best_qs = best;
    }
    trace_.last_best = initial[best_index(trace_.kind, initial)];
  }

  /// Considers candidates for the history best without recording a generation.
  void offer(std::span<const Individual> candidates) {
    const auto idx = best_index(trace_.kind, candidates);
    if (!has_history_ ||
        better_than(trace_.kind, candidates[idx], trace_.history_best)) {
      trace_.history_best = candidates[idx];
      has_history_ = true;
    }
  }

  void record(std::size_t iteration, std::span<const Individual> population) {
    offer(population);
    const auto idx = best_index(trace_.kind, population);
    trace_.last_best = population[idx];
    GenerationRecord rec;
    rec.iteration = iteration;
    rec.best_fitness = *population[idx].fitness;
    rec.history_best_fitness = *trace_.history_best.fitness;
    if (options_.reference) {
      rec.history_best_qs = score(trace_.history_best);
      rec.last_best_qs = score(trace_.last_best);
    }
    rec.quantiles = fitness_quantiles(population);
    trace_.records.push_back(rec);
    if (options_.observer) options_.observer(iteration, population);
  }

  RunTrace finish() && { return std::move(trace_); }

 private:
  double score(const Individual& ind) const {
    return qs(*options_.reference, ind.genes, options_.qs_denominator);
  }

  const RunOptions& options_;
  RunTrace trace_;
  bool has_history_ = false;
};

}  // namespace detail

}  // namespace specunfold
