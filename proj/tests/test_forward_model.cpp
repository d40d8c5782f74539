#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "specunfold/forward_model.hpp"
#include "test_util.hpp"

using namespace specunfold;

TEST(Convolve, Identity) {
  EXPECT_EQ(convolve(ResponseMatrix::identity(3), std::vector<double>{1, 2, 3}),
            (std::vector<double>{1, 2, 3}));
}

TEST(Convolve, HandProduct) {
  EXPECT_EQ(convolve(ResponseMatrix(2, 2, {1, 2, 3, 4}), std::vector<double>{1, 1}),
            (std::vector<double>{3, 7}));
}

TEST(Convolve, ZeroSpectrumGivesZeroCounts) {
  std::mt19937_64 rng(1);
  const auto r = testutil::random_response(4, 6, rng);
  EXPECT_EQ(convolve(r, std::vector<double>(6, 0.0)), std::vector<double>(4, 0.0));
}

TEST(Convolve, DimensionMismatchThrows) {
  EXPECT_THROW(convolve(ResponseMatrix::identity(3), std::vector<double>{1, 2}),
               ValidationError);
}

TEST(Convolve, IsLinear) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + trial % 8, n = 1 + trial % 11;
    const auto r = testutil::random_response(m, n, rng);
    const auto x = testutil::random_vector(n, rng), y = testutil::random_vector(n, rng);
    const double a = coef(rng), b = coef(rng);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
    const auto lhs = convolve(r, mix);
    const auto cx = convolve(r, x), cy = convolve(r, y);
    for (std::size_t j = 0; j < m; ++j) {
      const double rhs = a * cx[j] + b * cy[j];
      const double scale = std::abs(a * cx[j]) + std::abs(b * cy[j]);
      EXPECT_LE(std::abs(lhs[j] - rhs), 1e-12 * scale);
    }
  }
}

TEST(AddNoise, ZeroSigmaIsExact) {
  const std::vector<double> clean{100, 200, 0.5};
  const auto c = add_noise(clean, {0.0, 9});
  EXPECT_EQ(std::vector<double>(c.values().begin(), c.values().end()), clean);
}

TEST(AddNoise, DeterministicForFixedSeed) {
  const std::vector<double> clean{100, 200};
  const auto a = add_noise(clean, {0.05, 42});
  const auto b = add_noise(clean, {0.05, 42});
  const auto c = add_noise(clean, {0.05, 43});
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(AddNoise, RelativeSpreadMatchesSigma) {
  const std::vector<double> clean(10000, 100.0);
  const auto c = add_noise(clean, {0.05, 2024});
  double mean = 0.0;
  for (double v : c.values()) mean += v / 100.0 - 1.0;
  mean /= 10000.0;
  double ss = 0.0;
  for (double v : c.values()) ss += std::pow(v / 100.0 - 1.0 - mean, 2);
  const double sd = std::sqrt(ss / 9999.0);
  EXPECT_GE(sd, 0.045);
  EXPECT_LE(sd, 0.055);
}

TEST(AddNoise, NonPositiveDrawsAreClamped) {
  const std::vector<double> clean(5000, 10.0);
  const auto c = add_noise(clean, {0.99, 5});
  std::size_t clamped = 0;
  for (double v : c.values()) {
    EXPECT_GT(v, 0.0);
    if (v == 10.0 * 0.01) ++clamped;
  }
  EXPECT_GT(clamped, 0u);  // P(g <= -1) is about 16% at sigma 0.99
}

TEST(AddNoise, AbsoluteModeUsesOneSigma) {
  const std::vector<double> clean{1000.0, 10.0};
  NoiseSpec spec{0.01, 3, NoiseMode::absolute};
  const auto c = add_noise(clean, spec);
  // same draw scale (0.01 * mean = 5.05) for both detectors
  EXPECT_LT(std::abs(c[0] - 1000.0), 5.05 * 6);
  EXPECT_NE(c[1], 10.0);
}

TEST(AddNoise, RejectsBadInput) {
  EXPECT_THROW(add_noise(std::vector<double>{1.0, 0.0}, {0.05, 1}), ValidationError);
  EXPECT_THROW(add_noise(std::vector<double>{1.0}, {1.0, 1}), ValidationError);
  EXPECT_THROW(add_noise(std::vector<double>{1.0}, {-0.1, 1}), ValidationError);
}

TEST(MakeProblem, IdentityWithoutNoiseReproducesReference) {
  const Spectrum ref(EnergyGrid::log_spaced(3), {1.0, 2.0, 3.0});
  const auto [problem, kept] = make_problem(ResponseMatrix::identity(3), ref, {0.0, 0});
  EXPECT_TRUE(std::equal(problem.counts().values().begin(), problem.counts().values().end(),
                         ref.fluence().begin()));
  EXPECT_TRUE(std::equal(problem.bounds().begin(), problem.bounds().end(),
                         ref.fluence().begin()));
  EXPECT_TRUE(std::equal(kept.fluence().begin(), kept.fluence().end(), ref.fluence().begin()));
}

TEST(MakeProblem, FifteenByFiftyThreeGeometry) {
  std::mt19937_64 rng(8);
  const auto r = testutil::random_response(15, 53, rng);
  const Spectrum ref(EnergyGrid::standard(), testutil::random_vector(53, rng));
  const auto [p, kept] = make_problem(r, ref, {0.05, 1});
  EXPECT_EQ(p.counts().size(), 15u);
  EXPECT_EQ(p.bounds().size(), 53u);
}

TEST(MakeProblem, DeterministicForFixedSeed) {
  std::mt19937_64 rng(9);
  const auto r = testutil::random_response(5, 7, rng);
  const Spectrum ref(EnergyGrid::log_spaced(7), testutil::random_vector(7, rng));
  const auto a = make_problem(r, ref, {0.05, 77}).first;
  const auto b = make_problem(r, ref, {0.05, 77}).first;
  EXPECT_TRUE(std::equal(a.counts().values().begin(), a.counts().values().end(),
                         b.counts().values().begin()));
  EXPECT_TRUE(std::equal(a.bounds().begin(), a.bounds().end(), b.bounds().begin()));
}
