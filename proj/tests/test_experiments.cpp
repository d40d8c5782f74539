#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "specunfold/benchmark.hpp"
#include "specunfold/landscape.hpp"
#include "test_util.hpp"

using namespace specunfold;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("specunfold_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

// --- file formats ---

TEST(Io, NumbersRoundTripBitExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 10000; ++k) {
    const double v = u(rng) * std::pow(10.0, k % 40 - 20);
    double back = 0.0;
    ASSERT_TRUE(detail::try_parse_number(format_number(v), back));
    EXPECT_EQ(back, v);
  }
}

TEST(Io, ResponseSpectrumAndCountsRoundTrip) {
  const auto dir = scratch("roundtrip");
  std::mt19937_64 rng(2);
  const auto r = testutil::random_response(4, 7, rng);
  write(dir / "r.csv", format_response(r));
  const auto r2 = read_response(dir / "r.csv");
  EXPECT_TRUE(std::equal(r.values().begin(), r.values().end(), r2.values().begin()));

  const Spectrum s(EnergyGrid::log_spaced(7), testutil::random_vector(7, rng));
  write(dir / "s.csv", format_spectrum(s));
  const auto s2 = read_spectrum(dir / "s.csv");
  EXPECT_EQ(s2.grid(), s.grid());
  EXPECT_TRUE(std::equal(s.fluence().begin(), s.fluence().end(), s2.fluence().begin()));

  const auto c = testutil::random_vector(4, rng);
  write(dir / "c.csv", format_counts(c));
  const auto c2 = read_counts(dir / "c.csv");
  EXPECT_TRUE(std::equal(c.begin(), c.end(), c2.values().begin()));
}

TEST(Io, ResponseErrorsCarryFileAndLine) {
  const auto dir = scratch("bad_response");
  write(dir / "a.csv", "# response m=2 n=2\n1,2\n3,x\n");
  try {
    read_response(dir / "a.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("a.csv:3"), std::string::npos);
  }
  write(dir / "b.csv", "1,2\n3,4\n");
  EXPECT_THROW(read_response(dir / "b.csv"), ParseError);
  write(dir / "c.csv", "# response m=2 n=2\n1,2\n");
  EXPECT_THROW(read_response(dir / "c.csv"), ParseError);
  write(dir / "d.csv", "# response m=2 n=2\n1,2,3\n3,4\n");
  EXPECT_THROW(read_response(dir / "d.csv"), ParseError);
  write(dir / "e.csv", "# response m=2 n=2\n1,0\n0,0\n");  // empty row
  EXPECT_THROW(read_response(dir / "e.csv"), ParseError);
  EXPECT_THROW(read_response(dir / "missing.csv"), ParseError);
}

TEST(Io, CountsRejectZero) {
  const auto dir = scratch("bad_counts");
  write(dir / "c.csv", "5\n0\n");
  EXPECT_THROW(read_counts(dir / "c.csv"), ParseError);
  write(dir / "d.csv", "5\n1,2\n");
  EXPECT_THROW(read_counts(dir / "d.csv"), ParseError);
}

TEST(Io, SpectrumNeedsIncreasingBoundaries) {
  const auto dir = scratch("bad_spectrum");
  write(dir / "s.csv", "group_upper_bound_MeV,fluence\n1e-9\n1e-3,1\n1e-4,2\n");
  EXPECT_THROW(read_spectrum(dir / "s.csv"), ParseError);
  write(dir / "t.csv", "group_upper_bound_MeV,fluence\n1e-9\n1e-3,1\n1e-2,2\n");
  EXPECT_EQ(read_spectrum(dir / "t.csv").size(), 2u);
}

// --- synthetic generators ---

TEST(Synthetic, FlatShape) {
  const auto g = EnergyGrid::standard();
  const auto s = generate_synthetic({SyntheticShape::flat, 0.0, 1}, g);
  EXPECT_EQ(penalty_p1(s), 0.0);
  EXPECT_THROW(generate_synthetic({SyntheticShape::flat, 0.1, 1}, g), ValidationError);
}

TEST(Synthetic, ContinuityLadder) {
  const auto g = EnergyGrid::standard();
  for (auto shape : {SyntheticShape::single_gaussian, SyntheticShape::double_peak,
                     SyntheticShape::thermal_plus_fast})
    for (double p1 : {1.2, 0.1, 0.01, 0.001})
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto s = generate_synthetic({shape, p1, seed}, g);
        EXPECT_NEAR(penalty_p1(s), p1, 0.2 * p1);
        for (double v : s.fluence()) EXPECT_GE(v, 0.0);
      }
  EXPECT_THROW(generate_synthetic({SyntheticShape::double_peak, 0.0, 1}, g), ValidationError);
  EXPECT_THROW(generate_synthetic({SyntheticShape::double_peak, -1.0, 1}, g), ValidationError);
}

TEST(Synthetic, DeterministicForSeed) {
  const auto g = EnergyGrid::standard();
  const auto a = generate_synthetic({SyntheticShape::double_peak, 0.1, 5}, g);
  const auto b = generate_synthetic({SyntheticShape::double_peak, 0.1, 5}, g);
  const auto c = generate_synthetic({SyntheticShape::double_peak, 0.1, 6}, g);
  EXPECT_TRUE(std::equal(a.fluence().begin(), a.fluence().end(), b.fluence().begin()));
  EXPECT_FALSE(std::equal(a.fluence().begin(), a.fluence().end(), c.fluence().begin()));
}

TEST(Synthetic, ResponseMatchesGeometryAndIsIllPosed) {
  const auto r = generate_synthetic_response(15, 53, 1);
  ASSERT_EQ(r.rows(), 15u);
  ASSERT_EQ(r.cols(), 53u);
  for (std::size_t j = 0; j < 15; ++j) {
    double sum = 0.0;
    for (double v : r.row(j)) sum += v;
    EXPECT_GT(sum, 0.0);
  }
  Eigen::MatrixXd m(15, 53);
  for (std::size_t j = 0; j < 15; ++j)
    for (std::size_t i = 0; i < 53; ++i) m(j, i) = r(j, i);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto sv = svd.singularValues();
  // full row rank, so R R^T is invertible, but R^T R (53x53) has rank <= 15
  EXPECT_GT(sv(14), 0.0);
  const double cond = (sv(0) * sv(0)) / (sv(14) * sv(14));
  EXPECT_TRUE(std::isfinite(cond));
  EXPECT_GT(cond, 1e3);
  EXPECT_THROW(generate_synthetic_response(0, 53, 1), ValidationError);
  EXPECT_THROW(generate_synthetic_response(15, 1, 1), ValidationError);
}

// --- static landscape ---

namespace {

struct ToyProblem {
  std::shared_ptr<const EnergyGrid> grid =
      std::make_shared<const EnergyGrid>(EnergyGrid::log_spaced(12));
  Spectrum reference = generate_synthetic({SyntheticShape::single_gaussian, 0.01, 3}, grid);
  ResponseMatrix response = generate_synthetic_response(5, 12, 2);
  UnfoldProblem problem = make_problem(response, reference, {0.0, 0}).first;
};

}  // namespace

TEST(StaticLandscape, SingleSampleIsDegenerate) {
  const ToyProblem t;
  LandscapeConfig cfg;
  cfg.sample_count = 1;
  const auto s = static_landscape(t.problem, t.reference, cfg);
  ASSERT_EQ(s.size(), 1u);
  for (double v : s[0].normalized) EXPECT_EQ(v, 0.5);
  EXPECT_EQ(s[0].raw.size(), 8u);
}

TEST(StaticLandscape, NormalizedColumnsSpanUnitInterval) {
  const ToyProblem t;
  LandscapeConfig cfg;
  cfg.sample_count = 500;
  cfg.seed = 4;
  const auto s = static_landscape(t.problem, t.reference, cfg);
  for (std::size_t k = 0; k < 8; ++k) {
    double lo = 1.0, hi = 0.0;
    for (const auto& x : s) {
      lo = std::min(lo, x.normalized[k]);
      hi = std::max(hi, x.normalized[k]);
    }
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
  }
}

TEST(StaticLandscape, RawValuesMatchDirectEvaluation) {
  const ToyProblem t;
  LandscapeConfig cfg;
  cfg.sample_count = 50;
  cfg.kinds = {FitnessKind::f2, FitnessKind::f3, FitnessKind::f8};
  const auto s = static_landscape(t.problem, t.reference, cfg);
  // F3 = 2 max S - S, so F3 and F2 = 1/S must rank identically
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (s[a].raw[0] > s[b].raw[0]) { EXPECT_GT(s[a].raw[1], s[b].raw[1]); }
}

TEST(StaticLandscape, DeterministicAndCenteredModeStaysInBox) {
  const ToyProblem t;
  LandscapeConfig cfg;
  cfg.sample_count = 100;
  cfg.seed = 9;
  const auto a = format_landscape(static_landscape(t.problem, t.reference, cfg), cfg.kinds);
  const auto b = format_landscape(static_landscape(t.problem, t.reference, cfg), cfg.kinds);
  EXPECT_EQ(a, b);
  cfg.mode = SamplingMode::centered;
  const auto centered = static_landscape(t.problem, t.reference, cfg);
  const auto wide = static_landscape(t.problem, t.reference, LandscapeConfig{100});
  double mc = 0.0, mw = 0.0;
  for (const auto& x : centered) mc += x.qs;
  for (const auto& x : wide) mw += x.qs;
  EXPECT_LT(mc, mw);  // sampling around the reference gives better Qs
}

TEST(StaticLandscape, CsvHasHeaderAndOneRowPerSample) {
  const ToyProblem t;
  LandscapeConfig cfg;
  cfg.sample_count = 7;
  const auto csv = format_landscape(static_landscape(t.problem, t.reference, cfg), cfg.kinds);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "qs,f1,f2,f3,f4,f5,f6,f7,f8,f1_norm,f2_norm,f3_norm,f4_norm,f5_norm,f6_norm,"
            "f7_norm,f8_norm");
}

// --- dynamic sampling ---

TEST(DynamicSampler, TenPercentByRank) {
  EXPECT_EQ(DynamicSampler::sampled_ranks(200).size(), 20u);
  EXPECT_EQ(DynamicSampler::sampled_ranks(10), (std::vector<std::size_t>{0}));
  EXPECT_EQ(DynamicSampler::sampled_ranks(11).size(), 2u);
  for (std::size_t n : {4u, 10u, 37u, 200u}) {
    const auto r = DynamicSampler::sampled_ranks(n);
    EXPECT_EQ(r.front(), 0u);
    EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
    EXPECT_EQ(std::adjacent_find(r.begin(), r.end()), r.end());
    EXPECT_LT(r.back(), n);
  }
}

TEST(DynamicSampler, RecordsWithoutTouchingThePopulation) {
  const ToyProblem t;
  DynamicSampler sampler(std::vector<double>(t.reference.fluence().begin(),
                                             t.reference.fluence().end()));
  auto hash = [](std::span<const Individual> pop) {
    std::size_t h = 0;
    for (const auto& ind : pop) {
      for (double g : ind.genes) h = h * 31 + std::hash<double>{}(g);
      h = h * 31 + std::hash<double>{}(*ind.fitness);
    }
    return h;
  };
  std::size_t mismatches = 0;
  RunOptions opt;
  opt.observer = [&](std::size_t it, std::span<const Individual> pop) {
    const auto before = hash(pop);
    sampler.observe(it, pop);
    mismatches += hash(pop) != before;
  };
  GaConfig cfg;
  cfg.population_size = 30;
  cfg.max_iterations = 12;
  run_ga(t.problem, {FitnessKind::f2, {}}, cfg, opt);
  EXPECT_EQ(mismatches, 0u);
  ASSERT_EQ(sampler.samples().size(), 12u * 3u);
  for (std::size_t g = 0; g < 12; ++g) {
    const auto* s = &sampler.samples()[g * 3];
    EXPECT_EQ(s[0].iteration, g + 1);
    EXPECT_LT(s[0].rank, s[1].rank);
    EXPECT_LT(s[1].rank, s[2].rank);
    EXPECT_GE(s[0].fitness, s[1].fitness);
    EXPECT_GE(s[1].fitness, s[2].fitness);
  }
}

// --- benchmark grid ---

namespace {

SpectrumLibrary tiny_library() {
  SyntheticLibrarySpec spec;
  spec.detectors = 5;
  spec.groups = 10;
  spec.spectra = {{"a", {SyntheticShape::single_gaussian, 0.01, 1}},
                  {"b", {SyntheticShape::double_peak, 0.1, 2}}};
  return make_synthetic_library(spec);
}

BenchmarkConfig tiny_config() {
  BenchmarkConfig cfg;
  cfg.kinds = {FitnessKind::f2, FitnessKind::f3};
  cfg.runs_per_cell = 2;
  cfg.population_size = 8;
  cfg.max_iterations = 10;
  cfg.base_seed = 100;
  return cfg;
}

}  // namespace

TEST(Benchmark, GridShapeAndSeeds) {
  const auto grid = run_benchmark(tiny_library(), tiny_config());
  ASSERT_EQ(grid.cells.size(), 2u * 2u * 2u);
  for (const auto& c : grid.cells) {
    EXPECT_FALSE(c.error.has_value());
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{100, 101}));
    EXPECT_EQ(c.summary.runs.size(), 2u);
  }
  EXPECT_NE(grid.find("b", Algorithm::dea, FitnessKind::f3), nullptr);
  EXPECT_EQ(grid.find("c", Algorithm::dea, FitnessKind::f3), nullptr);
}

TEST(Benchmark, PersistsDeterministicallyAndResumes) {
  const auto lib = tiny_library();
  auto cfg = tiny_config();
  cfg.out_dir = scratch("bench_a");
  run_benchmark(lib, cfg);
  auto cfg2 = cfg;
  cfg2.out_dir = scratch("bench_b");
  cfg2.workers = 3;
  run_benchmark(lib, cfg2);
  std::size_t files = 0;
  for (const auto& f : fs::recursive_directory_iterator(cfg.out_dir)) {
    if (!f.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(f.path(), cfg.out_dir);
    EXPECT_EQ(slurp(f.path()), slurp(cfg2.out_dir / rel)) << rel;
  }
  EXPECT_EQ(files, 1u + 8u + 8u * 2u);  // summary + cells + traces

  const auto summary = slurp(cfg.out_dir / "summary.json");
  cfg.resume = true;
  const auto resumed = run_benchmark(lib, cfg);
  for (const auto& c : resumed.cells) EXPECT_TRUE(c.resumed);
  EXPECT_EQ(slurp(cfg.out_dir / "summary.json"), summary);
}

TEST(Benchmark, FailingCellIsRecordedAndOthersProceed) {
  const auto lib = tiny_library();
  auto cfg = tiny_config();
  cfg.out_dir = scratch("bench_fail");
  write(cfg.out_dir / "cells" / "a__ga__f2.csv", "run,seed\nbroken\n");
  cfg.resume = true;
  const auto grid = run_benchmark(lib, cfg);
  EXPECT_EQ(grid.failed(), 1u);
  EXPECT_TRUE(grid.find("a", Algorithm::ga, FitnessKind::f2)->error.has_value());
  EXPECT_FALSE(grid.find("a", Algorithm::dea, FitnessKind::f2)->error.has_value());
  const auto json = nlohmann::json::parse(slurp(cfg.out_dir / "summary.json"));
  EXPECT_FALSE(json["cells"][0]["error"].is_null());
}

TEST(Library, LoadsDirectoryLayoutAndManifest) {
  const auto dir = scratch("library");
  const auto lib = tiny_library();
  write(dir / "files" / "response.csv", format_response(lib.response));
  for (const auto& e : lib.spectra)
    write(dir / "files" / "spectra" / (e.name + ".csv"), format_spectrum(e.reference));
  write(dir / "files" / "counts" / "b.csv", format_counts(std::vector<double>(5, 2.0)));
  const auto loaded = load_library(dir / "files");
  ASSERT_EQ(loaded.spectra.size(), 2u);
  EXPECT_EQ(loaded.spectra[0].name, "a");
  EXPECT_FALSE(loaded.spectra[0].counts.has_value());
  EXPECT_TRUE(loaded.spectra[1].counts.has_value());
  EXPECT_EQ(loaded.source, LibrarySource::file);

  write(dir / "manifest" / "library.json",
        R"({"m": 5, "n": 10, "response_seed": 1, "spectra": [
             {"name": "a", "shape": "single-gaussian", "p1": 0.01, "seed": 1},
             {"name": "b", "shape": "double-peak", "p1": 0.1, "seed": 2}]})");
  const auto synth = load_library(dir / "manifest");
  EXPECT_EQ(synth.source, LibrarySource::synthetic);
  EXPECT_TRUE(std::equal(synth.response.values().begin(), synth.response.values().end(),
                         lib.response.values().begin()));

  write(dir / "bad" / "library.json", R"({"spectra": [{"name": "x", "shape": "cube", "p1": 1}]})");
  EXPECT_THROW(load_library(dir / "bad"), ParseError);
}
