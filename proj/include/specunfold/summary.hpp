#pragma once

#include <span>
#include <vector>

#include "specunfold/evolution.hpp"
#include "specunfold/metrics.hpp"

namespace specunfold {

/// Final figures of one solver run.
struct RunOutcome {
  double history_best_qs = 0.0;
  double last_best_qs = 0.0;
  double history_best_p1 = 0.0;
  double initial_best_qs = 0.0;
};

/// Raw per-run lists of one (algorithm, fitness, spectrum) cell. The lists are
/// the source of truth; statistics are always recomputed from them.
struct RunSummary {
  std::vector<RunOutcome> runs;

  std::vector<double> history_qs() const { return column(&RunOutcome::history_best_qs); }
  std::vector<double> last_qs() const { return column(&RunOutcome::last_best_qs); }
  std::vector<double> history_p1() const { return column(&RunOutcome::history_best_p1); }
  std::vector<double> initial_qs() const { return column(&RunOutcome::initial_best_qs); }

  Statistics history_stats() const { return describe(history_qs()); }
  Statistics last_stats() const { return describe(last_qs()); }
  Statistics p1_stats() const { return describe(history_p1()); }

 private:
  std::vector<double> column(double RunOutcome::*field) const {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto& r : runs) out.push_back(r.*field);
    return out;
  }
};

inline RunOutcome outcome_of(const RunTrace& trace,
                             std::span<const double> reference,
                             QsDenominator denominator = QsDenominator::calculated) {
  RunOutcome o;
  o.history_best_qs = qs(reference, trace.history_best.genes, denominator);
  o.last_best_qs = qs(reference, trace.last_best.genes, denominator);
  o.history_best_p1 = trace.history_best.genes.size() >= 2
                          ? penalty_p1(trace.history_best.genes)
                          : 0.0;
  o.initial_best_qs = trace.initial_best_qs;
  return o;
}

inline RunSummary summarize(std::span<const RunTrace> traces,
                            const Spectrum& reference,
                            QsDenominator denominator = QsDenominator::calculated) {
  detail::require(!traces.empty(), "summarize: no runs");
  RunSummary s;
  for (const auto& t : traces)
    s.runs.push_back(outcome_of(t, reference.fluence(), denominator));
  return s;
}

}  // namespace specunfold
