#pragma once

// Domain types for the discretized unfolding problem C = R phi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace specunfold {

/// Raised when an input violates a type invariant (bad file, bad vector).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail

/// Energy group boundaries in MeV, strictly increasing and positive.
class EnergyGrid {
 public:
  explicit EnergyGrid(std::vector<double> boundaries)
      : boundaries_(std::move(boundaries)) {
    detail::require(boundaries_.size() >= 2,
                    "energy grid needs at least two boundaries");
    for (std::size_t i = 0; i < boundaries_.size(); ++i) {
      detail::require(std::isfinite(boundaries_[i]) && boundaries_[i] > 0.0,
                      "energy grid boundaries must be finite and > 0");
      if (i > 0)
        detail::require(boundaries_[i] > boundaries_[i - 1],
                        "energy grid boundaries must be strictly increasing");
    }
  }

  /// Log-spaced grid with `groups` groups spanning [low, high] MeV.
  static EnergyGrid log_spaced(std::size_t groups, double low = 1e-9,
                               double high = 15.8) {
    detail::require(groups >= 1, "energy grid needs at least one group");
    detail::require(low > 0.0 && high > low, "invalid energy range");
    std::vector<double> b(groups + 1);
    const double l0 = std::log(low);
    const double l1 = std::log(high);
    for (std::size_t i = 0; i <= groups; ++i)
      b[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                               static_cast<double>(groups));
    b.front() = low;
    b.back() = high;
    return EnergyGrid(std::move(b));
  }

  /// 53 groups between 1e-9 and 15.8 MeV.
  static EnergyGrid standard() { return log_spaced(53); }

  std::size_t groups() const noexcept { return boundaries_.size() - 1; }
  std::span<const double> boundaries() const noexcept { return boundaries_; }
  double lower(std::size_t group) const { return boundaries_.at(group); }
  double upper(std::size_t group) const { return boundaries_.at(group + 1); }

  /// Geometric midpoint of a group (midpoint in lethargy).
  double log_midpoint(std::size_t group) const {
    return std::sqrt(lower(group) * upper(group));
  }

  friend bool operator==(const EnergyGrid&, const EnergyGrid&) = default;

 private:
  std::vector<double> boundaries_;
};

/// Per-group fluence on a shared, immutable energy grid.
class Spectrum {
 public:
  Spectrum(std::shared_ptr<const EnergyGrid> grid, std::vector<double> fluence)
      : grid_(std::move(grid)), fluence_(std::move(fluence)) {
    detail::require(grid_ != nullptr, "spectrum needs an energy grid");
    detail::require(fluence_.size() == grid_->groups(),
                    "spectrum length " + std::to_string(fluence_.size()) +
                        " does not match grid group count " +
                        std::to_string(grid_->groups()));
    for (double v : fluence_)
      detail::require(std::isfinite(v) && v >= 0.0,
                      "spectrum fluence must be finite and >= 0");
  }

  Spectrum(EnergyGrid grid, std::vector<double> fluence)
      : Spectrum(std::make_shared<const EnergyGrid>(std::move(grid)),
                 std::move(fluence)) {}

  const EnergyGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const EnergyGrid>& grid_ptr() const noexcept {
    return grid_;
  }
  std::span<const double> fluence() const noexcept { return fluence_; }
  std::size_t size() const noexcept { return fluence_.size(); }
  double operator[](std::size_t i) const { return fluence_[i]; }

 private:
  std::shared_ptr<const EnergyGrid> grid_;
  std::vector<double> fluence_;
};

/// Row-major m x n detector response; rows are detectors, columns groups.
class ResponseMatrix {
 public:
  ResponseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    detail::require(rows_ >= 1 && cols_ >= 1,
                    "response matrix must be at least 1x1");
    detail::require(values_.size() == rows_ * cols_,
                    "response matrix value count does not match m*n");
    std::vector<bool> column_positive(cols_, false);
    for (std::size_t j = 0; j < rows_; ++j) {
      bool row_positive = false;
      for (std::size_t i = 0; i < cols_; ++i) {
        const double v = values_[j * cols_ + i];
        detail::require(std::isfinite(v) && v >= 0.0,
                        "response entries must be finite and >= 0");
        if (v > 0.0) {
          row_positive = true;
          column_positive[i] = true;
        }
      }
      detail::require(row_positive, "response row " + std::to_string(j) +
                                        " has no positive entry");
    }
    for (std::size_t i = 0; i < cols_; ++i)
      detail::require(column_positive[i], "response column " +
                                              std::to_string(i) +
                                              " has no positive entry");
  }

  static ResponseMatrix identity(std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    return ResponseMatrix(n, n, std::move(v));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t detector, std::size_t group) const {
    return values_[detector * cols_ + group];
  }
  std::span<const double> row(std::size_t detector) const {
    return std::span<const double>(values_).subspan(detector * cols_, cols_);
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Detector readings; strictly positive because fitness terms divide by them.
class DetectorCounts {
 public:
  explicit DetectorCounts(std::vector<double> values)
      : values_(std::move(values)) {
    detail::require(!values_.empty(), "detector counts must not be empty");
    for (double v : values_)
      detail::require(std::isfinite(v) && v > 0.0,
                      "detector counts must be finite and > 0");
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

 private:
  std::vector<double> values_;
};

/// Per-group upper bound b_i = min over detectors j with R_ji > 0 of C_j / R_ji.
inline std::vector<double> derive_bounds(const ResponseMatrix& response,
                                         const DetectorCounts& counts) {
  detail::require(counts.size() == response.rows(),
                  "counts length does not match response rows");
  std::vector<double> bounds(response.cols(),
                             std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < response.rows(); ++j) {
    for (std::size_t i = 0; i < response.cols(); ++i) {
      const double r = response(j, i);
      if (r > 0.0) bounds[i] = std::min(bounds[i], counts[j] / r);
    }
  }
  for (double b : bounds)
    detail::require(std::isfinite(b) && b > 0.0,
                    "group with no responding detector");
  return bounds;
}

/// Counts plus response plus the per-gene search box (0, b_i).
class UnfoldProblem {
 public:
  UnfoldProblem(ResponseMatrix response, DetectorCounts counts)
      : response_(std::move(response)), counts_(std::move(counts)) {
    bounds_ = derive_bounds(response_, counts_);
  }

  const ResponseMatrix& response() const noexcept { return response_; }
  const DetectorCounts& counts() const noexcept { return counts_; }
  std::span<const double> bounds() const noexcept { return bounds_; }
  std::size_t detectors() const noexcept { return response_.rows(); }
  std::size_t groups() const noexcept { return response_.cols(); }

 private:
  ResponseMatrix response_;
  DetectorCounts counts_;
  std::vector<double> bounds_;
};

}  // namespace specunfold
