#pragma once

// Synthetic stand-ins for tabulated reference spectra and Bonner-sphere
// response matrices.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "specunfold/core.hpp"
#include "specunfold/fitness.hpp"

namespace specunfold {

enum class SyntheticShape {
  single_gaussian,    // one peak in lethargy
  double_peak,        // thermal + fast peaks
  flat,
  thermal_plus_fast,  // thermal peak, 1/E plateau, evaporation peak
};

inline std::string_view to_string(SyntheticShape shape) {
  switch (shape) {
    case SyntheticShape::single_gaussian: return "single-gaussian";
    case SyntheticShape::double_peak: return "double-peak";
    case SyntheticShape::flat: return "flat";
    case SyntheticShape::thermal_plus_fast: return "thermal-plus-fast";
  }
  return "?";
}

inline SyntheticShape parse_synthetic_shape(std::string_view token) {
  for (auto s : {SyntheticShape::single_gaussian, SyntheticShape::double_peak,
                 SyntheticShape::flat, SyntheticShape::thermal_plus_fast})
    if (to_string(s) == token) return s;
  throw ValidationError("unknown spectrum shape '" + std::string(token) + "'");
}

struct SyntheticSpec {
  SyntheticShape shape = SyntheticShape::single_gaussian;
  double target_p1 = 0.001;  // smoothness dial: p1 of the generated spectrum
  std::uint64_t seed = 0;
};

namespace detail {

/// Group midpoints mapped onto [0, 1] in log energy.
inline std::vector<double> lethargy_positions(const EnergyGrid& grid) {
  const double lo = std::log(grid.boundaries().front());
  const double hi = std::log(grid.boundaries().back());
  std::vector<double> x(grid.groups());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = (std::log(grid.log_midpoint(i)) - lo) / (hi - lo);
  return x;
}

inline double bell(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z);
}

inline double logistic(double x, double edge, double width) {
  return 1.0 / (1.0 + std::exp(-(x - edge) / width));
}

}  // namespace detail

/// Nonnegative spectrum of the requested shape, rescaled so that p1 equals
/// `spec.target_p1`.
inline Spectrum generate_synthetic(const SyntheticSpec& spec,
                                   std::shared_ptr<const EnergyGrid> grid) {
  detail::require(grid != nullptr, "synthetic spectrum needs a grid");
  detail::require(spec.target_p1 >= 0.0 && std::isfinite(spec.target_p1),
                  "target p1 must be finite and >= 0");
  const auto x = detail::lethargy_positions(*grid);
  std::mt19937_64 rng(spec.seed);
  auto jitter = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  std::vector<double> phi(x.size(), 0.0);
  switch (spec.shape) {
    case SyntheticShape::flat:
      detail::require(spec.target_p1 == 0.0,
                      "a flat spectrum has p1 = 0; target p1 must be 0");
      std::fill(phi.begin(), phi.end(), 1.0);
      return Spectrum(std::move(grid), std::move(phi));
    case SyntheticShape::single_gaussian: {
      const double c = jitter(0.55, 0.8);
      const double w = jitter(0.08, 0.14);
      for (std::size_t i = 0; i < x.size(); ++i) phi[i] = detail::bell(x[i], c, w);
      break;
    }
    case SyntheticShape::double_peak: {
      const double c1 = jitter(0.1, 0.2), w1 = jitter(0.05, 0.07);
      const double c2 = jitter(0.7, 0.85), w2 = jitter(0.06, 0.1);
      const double a2 = jitter(0.5, 1.0);
      for (std::size_t i = 0; i < x.size(); ++i)
        phi[i] = detail::bell(x[i], c1, w1) + a2 * detail::bell(x[i], c2, w2);
      break;
    }
    case SyntheticShape::thermal_plus_fast: {
      const double ct = jitter(0.12, 0.18), cf = jitter(0.75, 0.85);
      const double plateau = jitter(0.2, 0.4);
      for (std::size_t i = 0; i < x.size(); ++i)
        phi[i] = detail::bell(x[i], ct, 0.04) +
                 plateau * detail::logistic(x[i], ct + 0.08, 0.02) *
                     (1.0 - detail::logistic(x[i], cf, 0.03)) +
                 0.8 * detail::bell(x[i], cf, 0.06);
      break;
    }
  }
  detail::require(spec.target_p1 > 0.0,
                  "non-flat shapes need a positive target p1");
  const double raw = phi.size() >= 2 ? penalty_p1(phi) : 0.0;
  detail::require(raw > 0.0, "grid too coarse to reach the target p1");
  const double scale = std::sqrt(spec.target_p1 / raw);
  for (double& v : phi) v *= scale;
  return Spectrum(std::move(grid), std::move(phi));
}

inline Spectrum generate_synthetic(const SyntheticSpec& spec,
                                   const EnergyGrid& grid) {
  return generate_synthetic(spec, std::make_shared<const EnergyGrid>(grid));
}

/// m broad, overlapping bell-shaped response rows over log energy. Row peaks
/// move from thermal to fast and widen with the row index, like moderator
/// spheres of increasing size.
inline ResponseMatrix generate_synthetic_response(std::size_t m, std::size_t n,
                                                  std::uint64_t seed) {
  detail::require(m >= 1, "response needs at least one detector");
  detail::require(n >= 2, "response needs at least two groups");
  const auto grid = EnergyGrid::log_spaced(n);
  const auto x = detail::lethargy_positions(grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-0.02, 0.02);
  std::uniform_real_distribution<double> gain(0.8, 1.2);

  std::vector<double> values(m * n);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = m == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(m - 1);
    const double center = 0.12 + 0.72 * t + shift(rng);
    const double width = 0.10 + 0.10 * t;
    const double amplitude = gain(rng);
    for (std::size_t i = 0; i < n; ++i)
      values[j * n + i] = amplitude * (detail::bell(x[i], center, width) + 1e-6);
  }
  return ResponseMatrix(m, n, std::move(values));
}

}  // namespace specunfold
