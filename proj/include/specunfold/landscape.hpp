#pragma once

// Fitness-landscape probes: a static scan of random candidates and a
// per-generation sampler that rides along a running solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "specunfold/evolution.hpp"
#include "specunfold/io.hpp"

namespace specunfold {

enum class SamplingMode {
  uniform_box,  ///< gene i uniform in (0, b_i)
  centered,     ///< uniform in [phi_i - r b_i, phi_i + r b_i] cut to (0, b_i)
};

struct LandscapeConfig {
  std::size_t sample_count = 200000;
  std::vector<FitnessKind> kinds{all_fitness_kinds.begin(),
                                 all_fitness_kinds.end()};
  std::uint64_t seed = 0;
  FitnessParams params{};
  SamplingMode mode = SamplingMode::uniform_box;
  double radius_fraction = 0.1;
  QsDenominator qs_denominator = QsDenominator::calculated;
};

/// One scanned candidate; `raw` and `normalized` follow `LandscapeConfig::kinds`.
struct LandscapeSample {
  double qs = 0.0;
  std::vector<double> raw;
  std::vector<double> normalized;
};

inline std::vector<LandscapeSample> static_landscape(
    const UnfoldProblem& problem, const Spectrum& reference,
    const LandscapeConfig& config) {
  detail::require(config.sample_count >= 1, "landscape needs >= 1 sample");
  detail::require(!config.kinds.empty(), "landscape needs a fitness kind");
  detail::require(reference.size() == problem.groups(),
                  "reference length does not match problem groups");
  config.params.validate();
  const auto bounds = problem.bounds();
  const auto ref = reference.fluence();
  const std::size_t nk = config.kinds.size();

  bool want_p1 = false, want_p2 = false;
  for (auto k : config.kinds) {
    want_p1 = want_p1 || needs_p1(k);
    want_p2 = want_p2 || needs_p2(k);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<LandscapeSample> samples(config.sample_count);
  std::vector<double> scores(config.sample_count);
  std::vector<double> genes(bounds.size());
  for (std::size_t s = 0; s < config.sample_count; ++s) {
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      if (config.mode == SamplingMode::uniform_box) {
        genes[i] = detail::uniform_open(rng, bounds[i]);
      } else {
        const double r = config.radius_fraction * bounds[i];
        const double lo = std::max(0.0, ref[i] - r);
        const double hi = std::min(bounds[i], ref[i] + r);
        genes[i] = hi > lo ? std::uniform_real_distribution<double>(lo, hi)(rng)
                           : lo;
      }
    }
    EvaluationParts parts{convolve(problem.response(), genes),
                          problem.counts().values()};
    if (want_p1) parts.p1 = penalty_p1(genes);
    if (want_p2) parts.p2 = penalty_p2(genes);
    auto& sample = samples[s];
    sample.qs = qs(ref, genes, config.qs_denominator);
    scores[s] = parts.residual_score();
    sample.raw.resize(nk);
    for (std::size_t k = 0; k < nk; ++k)
      if (config.kinds[k] != FitnessKind::f3)
        sample.raw[k] =
            fitness_from_parts({config.kinds[k], config.params}, parts);
  }

  // F3 is relative to the whole batch, so it is filled in afterwards.
  const double top = *std::max_element(scores.begin(), scores.end());
  for (std::size_t k = 0; k < nk; ++k) {
    std::vector<double> column(config.sample_count);
    for (std::size_t s = 0; s < config.sample_count; ++s) {
      if (config.kinds[k] == FitnessKind::f3)
        samples[s].raw[k] = 2.0 * top - scores[s];
      column[s] = samples[s].raw[k];
    }
    const auto norm = normalize_fitness(column);
    for (std::size_t s = 0; s < config.sample_count; ++s) {
      samples[s].normalized.resize(nk);
      samples[s].normalized[k] = norm[s];
    }
  }
  return samples;
}

inline std::string format_landscape(std::span<const LandscapeSample> samples,
                                    std::span<const FitnessKind> kinds) {
  std::string out = "qs";
  for (auto k : kinds) out += "," + std::string(to_string(k));
  for (auto k : kinds) out += "," + std::string(to_string(k)) + "_norm";
  out += '\n';
  for (const auto& s : samples) {
    out += format_number(s.qs);
    for (double v : s.raw) out += "," + format_number(v);
    for (double v : s.normalized) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

struct DynamicSample {
  std::size_t iteration = 0;
  std::size_t rank = 0;  // 0 = fittest
  double fitness = 0.0;
  double qs = 0.0;
};

/// After every generation, ranks the population by fitness and records every
/// tenth rank (ceil(10%) samples, starting from the best).
class DynamicSampler {
 public:
  explicit DynamicSampler(std::vector<double> reference,
                          QsDenominator denominator = QsDenominator::calculated)
      : reference_(std::move(reference)), denominator_(denominator) {}

  static std::vector<std::size_t> sampled_ranks(std::size_t population) {
    const std::size_t count = (population + 9) / 10;
    std::vector<std::size_t> ranks(count);
    for (std::size_t k = 0; k < count; ++k) ranks[k] = k * population / count;
    return ranks;
  }

  void observe(std::size_t iteration, std::span<const Individual> population) {
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return *population[a].fitness > *population[b].fitness;
    });
    for (auto rank : sampled_ranks(population.size())) {
      const auto& ind = population[order[rank]];
      samples_.push_back(
          {iteration, rank, *ind.fitness, qs(reference_, ind.genes, denominator_)});
    }
  }

  /// Observer bound to this sampler; the sampler must outlive the run.
  GenerationObserver observer() {
    return [this](std::size_t it, std::span<const Individual> pop) {
      observe(it, pop);
    };
  }

  const std::vector<DynamicSample>& samples() const noexcept { return samples_; }

 private:
  std::vector<double> reference_;
  QsDenominator denominator_;
  std::vector<DynamicSample> samples_;
};

}  // namespace specunfold
