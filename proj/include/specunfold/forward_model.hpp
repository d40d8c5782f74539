#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "specunfold/core.hpp"

namespace specunfold {

enum class NoiseMode {
  relative,  ///< C_j = clean_j * (1 + g_j)
  absolute,  ///< C_j = clean_j + g_j * mean(clean); same sigma for every detector
};

struct NoiseSpec {
  double relative_sigma = 0.05;
  std::uint64_t seed = 0;
  NoiseMode mode = NoiseMode::relative;

  void validate() const {
    detail::require(relative_sigma >= 0.0 && relative_sigma < 1.0,
                    "noise sigma must lie in [0, 1)");
  }
};

/// Noise-free counts: out_j = sum_i R_ji * phi_i.
inline std::vector<double> convolve(const ResponseMatrix& response,
                                    std::span<const double> fluence) {
  detail::require(fluence.size() == response.cols(),
                  "spectrum length does not match response columns");
  std::vector<double> out(response.rows(), 0.0);
  for (std::size_t j = 0; j < response.rows(); ++j) {
    const auto row = response.row(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * fluence[i];
    out[j] = acc;
  }
  return out;
}

inline std::vector<double> convolve(const ResponseMatrix& response,
                                    const Spectrum& spectrum) {
  return convolve(response, spectrum.fluence());
}

/// Perturbs clean counts with seeded Gaussian noise. Non-positive draws are
/// clamped to 1% of the clean value.
inline DetectorCounts add_noise(std::span<const double> clean,
                                const NoiseSpec& noise) {
  noise.validate();
  for (double c : clean)
    detail::require(std::isfinite(c) && c > 0.0,
                    "clean counts must be finite and > 0");
  std::vector<double> out(clean.begin(), clean.end());
  if (noise.relative_sigma == 0.0) return DetectorCounts(std::move(out));

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, noise.relative_sigma);
  double mean = 0.0;
  for (double c : clean) mean += c;
  mean /= static_cast<double>(clean.size());

  for (std::size_t j = 0; j < out.size(); ++j) {
    const double g = gauss(rng);
    out[j] = noise.mode == NoiseMode::relative ? clean[j] * (1.0 + g)
                                               : clean[j] + g * mean;
    if (out[j] <= 0.0) out[j] = clean[j] * 0.01;
  }
  return DetectorCounts(std::move(out));
}

/// Synthesizes a problem instance; the reference is returned for scoring.
inline std::pair<UnfoldProblem, Spectrum> make_problem(
    const ResponseMatrix& response, const Spectrum& reference,
    const NoiseSpec& noise) {
  const auto clean = convolve(response, reference);
  return {UnfoldProblem(response, add_noise(clean, noise)), reference};
}

}  // namespace specunfold
