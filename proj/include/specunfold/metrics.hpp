#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "specunfold/core.hpp"

namespace specunfold {

/// Which spectrum normalizes the Qs distance.
enum class QsDenominator {
  calculated,  ///< sum of phi_cal^2 (default)
  reference,   ///< sum of phi_ref^2
};

/// Spectrum quality factor in percent; 0 means a perfect reconstruction.
inline double qs(std::span<const double> reference,
                 std::span<const double> calculated,
                 QsDenominator denominator = QsDenominator::calculated) {
  detail::require(reference.size() == calculated.size(),
                  "qs: spectra have different lengths");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - calculated[i];
    num += d * d;
    const double base = denominator == QsDenominator::calculated
                            ? calculated[i]
                            : reference[i];
    den += base * base;
  }
  detail::require(den > 0.0, "qs: denominator spectrum is all zero");
  return 100.0 * std::sqrt(num / den);
}

inline double qs(const Spectrum& reference, const Spectrum& calculated,
                 QsDenominator denominator = QsDenominator::calculated) {
  return qs(reference.fluence(), calculated.fluence(), denominator);
}

/// Min-max map onto [0, 1]; a constant batch maps to 0.5 everywhere.
inline std::vector<double> normalize_fitness(std::span<const double> values) {
  detail::require(!values.empty(), "normalize_fitness: empty input");
  for (double v : values)
    detail::require(std::isfinite(v), "normalize_fitness: non-finite input");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(values.size(), 0.5);
  if (range > 0.0) {
    for (std::size_t k = 0; k < values.size(); ++k)
      out[k] = std::clamp((values[k] - min) / range, 0.0, 1.0);
  }
  return out;
}

/// Linear-interpolated quantile of an ascending-sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  detail::require(!sorted.empty(), "quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// Descriptive statistics. The standard deviation divides by N.
struct Statistics {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline Statistics describe(std::span<const double> sample) {
  detail::require(!sample.empty(), "describe: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  Statistics s;
  s.count = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));
  s.median = sorted_quantile(sorted, 0.5);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

}  // namespace specunfold
