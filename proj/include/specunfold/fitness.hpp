#pragma once

// The eight fitness functions F1..F8. Every kind is oriented so that a larger
// value means a fitter candidate.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specunfold/core.hpp"
#include "specunfold/forward_model.hpp"

namespace specunfold {

enum class FitnessKind { f1, f2, f3, f4, f5, f6, f7, f8 };

inline constexpr std::array<FitnessKind, 8> all_fitness_kinds{
    FitnessKind::f1, FitnessKind::f2, FitnessKind::f3, FitnessKind::f4,
    FitnessKind::f5, FitnessKind::f6, FitnessKind::f7, FitnessKind::f8};

inline std::string_view to_string(FitnessKind kind) {
  static constexpr std::array<std::string_view, 8> names{
      "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"};
  return names[static_cast<std::size_t>(kind)];
}

inline FitnessKind parse_fitness_kind(std::string_view token) {
  for (auto kind : all_fitness_kinds)
    if (to_string(kind) == token) return kind;
  throw ValidationError("unknown fitness kind '" + std::string(token) +
                        "' (expected f1..f8)");
}

/// Raised when a fitness term becomes NaN or infinite.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::string term, double value)
      : std::runtime_error("non-finite fitness term '" + term +
                           "': " + std::to_string(value)),
        term_(std::move(term)) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

struct FitnessParams {
  double beta1 = 0.1;
  double beta4 = 100.0;
  double beta6 = 100.0;
  double beta8 = 100.0;
  double epsilon = 1e-12;  // floor for every denominator that can reach zero

  void validate() const {
    detail::require(beta1 >= 0.0 && beta4 >= 0.0 && beta6 >= 0.0 &&
                        beta8 >= 0.0,
                    "fitness betas must be >= 0");
    detail::require(epsilon > 0.0, "fitness epsilon must be > 0");
  }
};

struct FitnessFunction {
  FitnessKind kind = FitnessKind::f2;
  FitnessParams params{};
};

/// Residual scores S_k = sum_j (T_j / C_j)^2 of the current population. Only
/// F3 reads it.
struct PopulationContext {
  std::vector<double> residual_scores;

  double max_score() const {
    detail::require(!residual_scores.empty(),
                    "F3 needs a non-empty population context");
    return *std::max_element(residual_scores.begin(), residual_scores.end());
  }
};

inline std::vector<double> residuals(const UnfoldProblem& problem,
                                     std::span<const double> candidate) {
  auto t = convolve(problem.response(), candidate);
  const auto c = problem.counts().values();
  for (std::size_t j = 0; j < t.size(); ++j) t[j] -= c[j];
  return t;
}

inline std::vector<double> residuals(const UnfoldProblem& problem,
                                     const Spectrum& candidate) {
  return residuals(problem, candidate.fluence());
}

/// Sum of squared first differences.
inline double penalty_p1(std::span<const double> phi) {
  detail::require(phi.size() >= 2, "p1 needs at least two groups");
  double sum = 0.0;
  for (std::size_t i = 1; i < phi.size(); ++i) {
    const double d = phi[i] - phi[i - 1];
    sum += d * d;
  }
  return sum;
}

/// Sum of squared second differences.
inline double penalty_p2(std::span<const double> phi) {
  detail::require(phi.size() >= 3, "p2 needs at least three groups");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
    const double d = phi[i - 1] - 2.0 * phi[i] + phi[i + 1];
    sum += d * d;
  }
  return sum;
}

inline double penalty_p1(const Spectrum& s) { return penalty_p1(s.fluence()); }
inline double penalty_p2(const Spectrum& s) { return penalty_p2(s.fluence()); }

inline bool needs_p1(FitnessKind kind) {
  return kind == FitnessKind::f4 || kind == FitnessKind::f8;
}
inline bool needs_p2(FitnessKind kind) { return kind == FitnessKind::f8; }

/// Everything a fitness value depends on, factored out of the candidate.
struct EvaluationParts {
  std::vector<double> reconstructed;  // R phi
  std::span<const double> counts;     // C
  double p1 = 0.0;
  double p2 = 0.0;

  double residual_score() const {
    double s = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double r = (reconstructed[j] - counts[j]) / counts[j];
      s += r * r;
    }
    return s;
  }
};

inline EvaluationParts evaluation_parts(const UnfoldProblem& problem,
                                        std::span<const double> candidate,
                                        FitnessKind kind) {
  EvaluationParts parts{convolve(problem.response(), candidate),
                        problem.counts().values()};
  if (needs_p1(kind)) parts.p1 = penalty_p1(candidate);
  if (needs_p2(kind)) parts.p2 = penalty_p2(candidate);
  return parts;
}

namespace detail {

inline double checked(const char* term, double value) {
  if (!std::isfinite(value)) throw EvaluationError(term, value);
  return value;
}

}  // namespace detail

inline double fitness_from_parts(const FitnessFunction& fn,
                                 const EvaluationParts& parts,
                                 const PopulationContext* ctx = nullptr) {
  const auto& p = fn.params;
  const auto& rec = parts.reconstructed;
  const auto c = parts.counts;
  const std::size_t m = c.size();
  detail::require(rec.size() == m, "reconstructed/count length mismatch");

  auto sum_t2 = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += (rec[j] - c[j]) * (rec[j] - c[j]);
    return detail::checked("sum T^2", s);
  };

  switch (fn.kind) {
    case FitnessKind::f1: {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double q = (rec[j] - c[j]) / (rec[j] + c[j]);
        s += p.beta1 - q * q;
      }
      return detail::checked("F1", s);
    }
    case FitnessKind::f2: {
      const double s = detail::checked("sum (T/C)^2", parts.residual_score());
      return 1.0 / std::max(s, p.epsilon);
    }
    case FitnessKind::f3: {
      if (ctx == nullptr)
        throw ValidationError("F3 needs a population context");
      const double s = detail::checked("sum (T/C)^2", parts.residual_score());
      return detail::checked("F3", 2.0 * ctx->max_score() - s);
    }
    case FitnessKind::f4: {
      const double d =
          sum_t2() + p.beta4 * detail::checked("p1", parts.p1);
      return 1.0 / std::max(d, p.epsilon);
    }
    case FitnessKind::f5: {
      double mean = 0.0;
      for (std::size_t j = 0; j < m; ++j) mean += rec[j] / c[j];
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double d = rec[j] / c[j] - mean;
        var += d * d;
      }
      const double sd =
          detail::checked("ratio stddev", std::sqrt(var / static_cast<double>(m)));
      return 1.0 / std::max(sd, p.epsilon);
    }
    case FitnessKind::f6: {
      const double s = detail::checked("sum (T/C)^2", parts.residual_score());
      return p.beta6 - s;
    }
    case FitnessKind::f7: {
      double c2 = 0.0;
      for (double v : c) c2 += v * v;
      return detail::checked("F7", std::sqrt(c2 / std::max(sum_t2(), p.epsilon)));
    }
    case FitnessKind::f8: {
      const double s = detail::checked("sum (T/C)^2", parts.residual_score());
      const double pen = detail::checked("p1 + p2", parts.p1 + parts.p2);
      return 1.0 / std::max(s + 0.5 * p.beta8 * pen, p.epsilon);
    }
  }
  throw ValidationError("invalid fitness kind");
}

/// Scores a candidate fluence vector. `ctx` is required for F3 only.
inline double evaluate(const FitnessFunction& fn, const UnfoldProblem& problem,
                       std::span<const double> candidate,
                       const PopulationContext* ctx = nullptr) {
  detail::require(candidate.size() == problem.groups(),
                  "candidate length does not match problem groups");
  return fitness_from_parts(fn, evaluation_parts(problem, candidate, fn.kind),
                            ctx);
}

inline double evaluate(const FitnessFunction& fn, const UnfoldProblem& problem,
                       const Spectrum& candidate,
                       const PopulationContext* ctx = nullptr) {
  return evaluate(fn, problem, candidate.fluence(), ctx);
}

inline double residual_score(const UnfoldProblem& problem,
                             std::span<const double> candidate) {
  EvaluationParts parts{convolve(problem.response(), candidate),
                        problem.counts().values()};
  return parts.residual_score();
}

}  // namespace specunfold
