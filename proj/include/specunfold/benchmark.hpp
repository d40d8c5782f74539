#pragma once

// Multi-run benchmark grid over (spectrum, algorithm, fitness) cells, with
// per-cell persistence so an interrupted grid can resume.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "specunfold/dea.hpp"
#include "specunfold/forward_model.hpp"
#include "specunfold/ga.hpp"
#include "specunfold/io.hpp"
#include "specunfold/summary.hpp"
#include "specunfold/synthetic.hpp"

namespace specunfold {

enum class Algorithm { ga, dea };

inline std::string_view to_string(Algorithm a) {
  return a == Algorithm::ga ? "ga" : "dea";
}

inline Algorithm parse_algorithm(std::string_view token) {
  if (token == "ga") return Algorithm::ga;
  if (token == "dea") return Algorithm::dea;
  throw ValidationError("unknown algorithm '" + std::string(token) +
                        "' (expected ga or dea)");
}

enum class LibrarySource { file, synthetic };

struct LibraryEntry {
  std::string name;
  Spectrum reference;
  std::optional<DetectorCounts> counts;  // measured counts, if supplied
};

/// Named reference spectra sharing one grid and one response matrix.
struct SpectrumLibrary {
  ResponseMatrix response;
  std::vector<LibraryEntry> spectra;
  LibrarySource source = LibrarySource::file;

  void validate() const {
    detail::require(!spectra.empty(), "spectrum library is empty");
    for (const auto& e : spectra) {
      detail::require(e.reference.grid() == spectra.front().reference.grid(),
                      "library spectra must share one energy grid");
      detail::require(e.reference.size() == response.cols(),
                      "spectrum '" + e.name +
                          "' does not match response columns");
      if (e.counts)
        detail::require(e.counts->size() == response.rows(),
                        "counts for '" + e.name +
                            "' do not match response rows");
    }
  }
};

/// Entry of a synthetic library manifest.
struct SyntheticEntry {
  std::string name;
  SyntheticSpec spec;
};

struct SyntheticLibrarySpec {
  std::size_t detectors = 15;
  std::size_t groups = 53;
  std::uint64_t response_seed = 1;
  std::vector<SyntheticEntry> spectra;
};

inline SpectrumLibrary make_synthetic_library(const SyntheticLibrarySpec& spec) {
  auto grid = std::make_shared<const EnergyGrid>(EnergyGrid::log_spaced(spec.groups));
  std::vector<LibraryEntry> entries;
  for (const auto& e : spec.spectra)
    entries.push_back({e.name, generate_synthetic(e.spec, grid), std::nullopt});
  SpectrumLibrary lib{
      generate_synthetic_response(spec.detectors, spec.groups, spec.response_seed),
      std::move(entries), LibrarySource::synthetic};
  lib.validate();
  return lib;
}

/// Loads `library.json` (synthetic manifest) if present, otherwise
/// `response.csv` + `spectra/<name>.csv` + optional `counts/<name>.csv`.
inline SpectrumLibrary load_library(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto manifest = dir / "library.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
      SyntheticLibrarySpec spec;
      spec.detectors = j.value("m", std::size_t{15});
      spec.groups = j.value("n", std::size_t{53});
      spec.response_seed = j.value("response_seed", std::uint64_t{1});
      for (const auto& s : j.at("spectra")) {
        SyntheticEntry e;
        e.name = s.at("name").get<std::string>();
        e.spec.shape = parse_synthetic_shape(s.at("shape").get<std::string>());
        e.spec.target_p1 = s.at("p1").get<double>();
        e.spec.seed = s.value("seed", std::uint64_t{0});
        spec.spectra.push_back(std::move(e));
      }
      return make_synthetic_library(spec);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(manifest.string(), 0, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(manifest.string(), 0, e.what());
    }
  }

  auto response = read_response(dir / "response.csv");
  if (!fs::exists(dir / "spectra") && fs::exists(dir / "reference.csv")) {
    // A single problem directory as written by `specunfold synth`.
    auto path = fs::absolute(dir).lexically_normal();
    if (path.filename().empty()) path = path.parent_path();
    LibraryEntry e{path.filename().string(), read_spectrum(dir / "reference.csv"),
                   std::nullopt};
    if (fs::exists(dir / "counts.csv")) e.counts = read_counts(dir / "counts.csv");
    std::vector<LibraryEntry> one;
    one.push_back(std::move(e));
    SpectrumLibrary lib{std::move(response), std::move(one), LibrarySource::file};
    lib.validate();
    return lib;
  }
  std::vector<fs::path> files;
  if (fs::is_directory(dir / "spectra"))
    for (const auto& f : fs::directory_iterator(dir / "spectra"))
      if (f.path().extension() == ".csv") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  std::vector<LibraryEntry> entries;
  for (const auto& f : files) {
    LibraryEntry e{f.stem().string(), read_spectrum(f), std::nullopt};
    const auto counts = dir / "counts" / f.filename();
    if (fs::exists(counts)) e.counts = read_counts(counts);
    entries.push_back(std::move(e));
  }
  if (entries.empty())
    throw ParseError((dir / "spectra").string(), 0, "no spectrum files found");
  SpectrumLibrary lib{std::move(response), std::move(entries), LibrarySource::file};
  lib.validate();
  return lib;
}

struct BenchmarkConfig {
  std::vector<Algorithm> algorithms{Algorithm::ga, Algorithm::dea};
  std::vector<FitnessKind> kinds{all_fitness_kinds.begin(),
                                 all_fitness_kinds.end()};
  std::size_t runs_per_cell = 20;
  std::uint64_t base_seed = 0;
  std::size_t population_size = 200;
  std::size_t max_iterations = 3000;
  double mutation_prob = 0.1;
  double crossover_prob = 0.9;
  double scale_factor = 0.5;
  MutationSign mutation_sign = MutationSign::difference;
  NoiseSpec noise{};  // seed + spectrum index gives each spectrum its noise
  FitnessParams params{};
  QsDenominator qs_denominator = QsDenominator::calculated;
  std::filesystem::path out_dir;  // empty: keep results in memory only
  bool resume = false;
  bool write_traces = true;
  std::size_t workers = 1;
};

struct CellResult {
  std::string spectrum;
  Algorithm algorithm = Algorithm::ga;
  FitnessKind kind = FitnessKind::f2;
  std::vector<std::uint64_t> seeds;
  RunSummary summary;
  std::optional<std::string> error;
  bool resumed = false;

  std::string id() const {
    return spectrum + "__" + std::string(to_string(algorithm)) + "__" +
           std::string(to_string(kind));
  }
};

struct BenchmarkGrid {
  std::vector<CellResult> cells;

  const CellResult* find(std::string_view spectrum, Algorithm a,
                         FitnessKind k) const {
    for (const auto& c : cells)
      if (c.spectrum == spectrum && c.algorithm == a && c.kind == k) return &c;
    return nullptr;
  }
  std::size_t failed() const {
    return static_cast<std::size_t>(std::count_if(
        cells.begin(), cells.end(), [](const auto& c) { return c.error.has_value(); }));
  }
};

/// Runs one solver on `problem` and scores it against `reference`.
inline RunTrace run_solver(Algorithm algorithm, const UnfoldProblem& problem,
                           const Spectrum& reference, const FitnessFunction& fn,
                           const BenchmarkConfig& cfg, std::uint64_t seed) {
  RunOptions options;
  options.reference = std::vector<double>(reference.fluence().begin(),
                                          reference.fluence().end());
  options.qs_denominator = cfg.qs_denominator;
  if (algorithm == Algorithm::ga) {
    GaConfig ga;
    ga.population_size = cfg.population_size;
    ga.max_iterations = cfg.max_iterations;
    ga.mutation_prob = cfg.mutation_prob;
    ga.crossover_prob = cfg.crossover_prob;
    ga.seed = seed;
    return run_ga(problem, fn, ga, options);
  }
  DeaConfig de;
  de.population_size = cfg.population_size;
  de.max_iterations = cfg.max_iterations;
  de.scale_factor = cfg.scale_factor;
  de.crossover_prob = cfg.crossover_prob;
  de.mutation_sign = cfg.mutation_sign;
  de.seed = seed;
  return run_dea(problem, fn, de, options);
}

/// Trace CSV: iteration, history-best fitness, history-best Qs.
inline std::string format_trace(const RunTrace& trace) {
  std::string out = "iteration,best_fitness,best_qs\n";
  for (const auto& r : trace.records)
    out += std::to_string(r.iteration) + "," +
           format_number(r.history_best_fitness) + "," +
           format_number(r.history_best_qs) + "\n";
  return out;
}

namespace detail {

inline std::string format_cell(const CellResult& cell) {
  std::string out =
      "run,seed,history_best_qs,last_best_qs,history_best_p1,initial_best_qs\n";
  for (std::size_t k = 0; k < cell.summary.runs.size(); ++k) {
    const auto& r = cell.summary.runs[k];
    out += std::to_string(k) + "," + std::to_string(cell.seeds[k]) + "," +
           format_number(r.history_best_qs) + "," +
           format_number(r.last_best_qs) + "," +
           format_number(r.history_best_p1) + "," +
           format_number(r.initial_best_qs) + "\n";
  }
  return out;
}

inline void parse_cell(const std::filesystem::path& path, CellResult& cell) {
  const auto file = path.string();
  const auto lines = read_lines(path);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto row = parse_row(file, lines[k], 6);
    const auto seed_field = split_fields(lines[k].text)[1];
    std::uint64_t seed = 0;
    const auto res = std::from_chars(seed_field.data(),
                                     seed_field.data() + seed_field.size(), seed);
    if (res.ec != std::errc{})
      throw ParseError(file, lines[k].number, "bad seed");
    cell.seeds.push_back(seed);
    cell.summary.runs.push_back({row[2], row[3], row[4], row[5]});
  }
  if (cell.summary.runs.empty())
    throw ParseError(file, 1, "cell file holds no runs");
}

inline nlohmann::json stats_json(const Statistics& s) {
  return {{"count", s.count}, {"mean", s.mean},   {"median", s.median},
          {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

}  // namespace detail

inline nlohmann::json to_json(const BenchmarkGrid& grid,
                              const BenchmarkConfig& cfg) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : grid.cells) {
    nlohmann::json j{{"id", c.id()},
                     {"spectrum", c.spectrum},
                     {"algorithm", to_string(c.algorithm)},
                     {"fitness", to_string(c.kind)}};
    if (c.error) {
      j["error"] = *c.error;
    } else {
      j["error"] = nullptr;
      j["runs"] = c.summary.runs.size();
      j["history_qs"] = detail::stats_json(c.summary.history_stats());
      j["last_qs"] = detail::stats_json(c.summary.last_stats());
      j["history_p1"] = detail::stats_json(c.summary.p1_stats());
    }
    cells.push_back(std::move(j));
  }
  nlohmann::json config{{"runs_per_cell", cfg.runs_per_cell},
                        {"base_seed", cfg.base_seed},
                        {"population_size", cfg.population_size},
                        {"max_iterations", cfg.max_iterations},
                        {"mutation_prob", cfg.mutation_prob},
                        {"crossover_prob", cfg.crossover_prob},
                        {"scale_factor", cfg.scale_factor},
                        {"noise_sigma", cfg.noise.relative_sigma},
                        {"noise_seed", cfg.noise.seed},
                        {"beta1", cfg.params.beta1},
                        {"beta4", cfg.params.beta4},
                        {"beta6", cfg.params.beta6},
                        {"beta8", cfg.params.beta8}};
  return {{"config", config}, {"cells", cells}};
}

/// Builds the problem each library spectrum is unfolded from.
inline std::vector<UnfoldProblem> library_problems(const SpectrumLibrary& lib,
                                                   const NoiseSpec& noise) {
  std::vector<UnfoldProblem> problems;
  for (std::size_t s = 0; s < lib.spectra.size(); ++s) {
    const auto& e = lib.spectra[s];
    if (e.counts) {
      problems.emplace_back(lib.response, *e.counts);
    } else {
      NoiseSpec n = noise;
      n.seed = noise.seed + s;
      problems.push_back(make_problem(lib.response, e.reference, n).first);
    }
  }
  return problems;
}

/// Executes every (spectrum, algorithm, fitness) cell; run r of a cell uses
/// seed base_seed + r. A failing cell records its error and the rest proceed.
inline BenchmarkGrid run_benchmark(const SpectrumLibrary& lib,
                                   const BenchmarkConfig& cfg) {
  namespace fs = std::filesystem;
  lib.validate();
  detail::require(cfg.runs_per_cell >= 1, "runs per cell must be >= 1");
  cfg.params.validate();
  const auto problems = library_problems(lib, cfg.noise);

  BenchmarkGrid grid;
  std::vector<std::size_t> spectrum_of;
  for (std::size_t s = 0; s < lib.spectra.size(); ++s)
    for (auto a : cfg.algorithms)
      for (auto k : cfg.kinds) {
        CellResult c;
        c.spectrum = lib.spectra[s].name;
        c.algorithm = a;
        c.kind = k;
        grid.cells.push_back(std::move(c));
        spectrum_of.push_back(s);
      }

  const bool persist = !cfg.out_dir.empty();
  auto run_cell = [&](std::size_t index) {
    auto& cell = grid.cells[index];
    const auto cell_file = cfg.out_dir / "cells" / (cell.id() + ".csv");
    try {
      if (persist && cfg.resume && fs::exists(cell_file)) {
        detail::parse_cell(cell_file, cell);
        cell.resumed = true;
        return;
      }
      const auto s = spectrum_of[index];
      const FitnessFunction fn{cell.kind, cfg.params};
      std::vector<RunTrace> traces;
      for (std::size_t r = 0; r < cfg.runs_per_cell; ++r) {
        const auto seed = cfg.base_seed + r;
        traces.push_back(run_solver(cell.algorithm, problems[s],
                                    lib.spectra[s].reference, fn, cfg, seed));
        cell.seeds.push_back(seed);
      }
      cell.summary = summarize(traces, lib.spectra[s].reference, cfg.qs_denominator);
      if (persist) {
        if (cfg.write_traces)
          for (std::size_t r = 0; r < traces.size(); ++r)
            write_text_atomic(cfg.out_dir / "traces" /
                                  (cell.id() + "__run" + std::to_string(r) + ".csv"),
                              format_trace(traces[r]));
        write_text_atomic(cell_file, detail::format_cell(cell));
      }
    } catch (const std::exception& e) {
      cell.summary.runs.clear();
      cell.seeds.clear();
      cell.error = e.what();
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(cfg.workers, 1, std::max<std::size_t>(1, grid.cells.size()));
  if (workers == 1) {
    for (std::size_t c = 0; c < grid.cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (auto c = next++; c < grid.cells.size(); c = next++) run_cell(c);
      });
  }

  if (persist)
    write_text_atomic(cfg.out_dir / "summary.json", to_json(grid, cfg).dump(2) + "\n");
  return grid;
}

}  // namespace specunfold
