// specunfold: command-line front end for unfolding, landscape scans,
// benchmarks and synthetic problem generation.
//
// Exit codes: 0 success, 1 runtime error, 2 usage or validation error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specunfold/specunfold.hpp"

namespace fs = std::filesystem;
using namespace specunfold;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct BetaFlags {
  FitnessParams params;
  void attach(CLI::App& cmd) {
    cmd.add_option("--beta1", params.beta1, "F1 per-detector constant")->capture_default_str();
    cmd.add_option("--beta4", params.beta4, "F4 smoothness weight")->capture_default_str();
    cmd.add_option("--beta6", params.beta6, "F6 constant")->capture_default_str();
    cmd.add_option("--beta8", params.beta8, "F8 smoothness weight")->capture_default_str();
  }
};

std::vector<FitnessKind> parse_kinds(const std::vector<std::string>& tokens) {
  std::vector<FitnessKind> kinds;
  for (const auto& t : tokens) kinds.push_back(parse_fitness_kind(t));
  return kinds;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SPECUNFOLD_WORKERS")) {
    try {
      const auto n = std::stoul(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ValidationError("SPECUNFOLD_WORKERS must be a positive integer");
  }
  return 1;
}

const std::vector<std::string> kAllKinds{"f1", "f2", "f3", "f4",
                                         "f5", "f6", "f7", "f8"};

// --- unfold ---

struct UnfoldArgs {
  std::string response, counts, reference, out = "unfold_out";
  std::string algo = "ga", fitness = "f2", mutation_sign = "difference";
  std::size_t pop = 200, iters = 3000;
  std::uint64_t seed = 0;
  double pm = 0.1, pc = 0.9, scale = 0.5;
  bool elitism = false, no_force_gene = false;
  BetaFlags betas;
};

void add_unfold(CLI::App& app, UnfoldArgs& a) {
  auto* cmd = app.add_subcommand("unfold", "Unfold one spectrum from counts");
  cmd->add_option("--response", a.response, "Response matrix CSV")->required();
  cmd->add_option("--counts", a.counts, "Detector counts CSV")->required();
  cmd->add_option("--reference", a.reference, "Reference spectrum CSV (enables Qs)");
  cmd->add_option("--algo", a.algo, "ga or dea")->required()->check(CLI::IsMember({"ga", "dea"}));
  cmd->add_option("--fitness", a.fitness, "f1..f8")->required()->check(CLI::IsMember(kAllKinds));
  cmd->add_option("--pop", a.pop, "Population size")->capture_default_str();
  cmd->add_option("--iters", a.iters, "Generations")->capture_default_str();
  cmd->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--pm", a.pm, "GA mutation probability")->capture_default_str();
  cmd->add_option("--pc", a.pc, "Crossover probability")->capture_default_str();
  cmd->add_option("--scale", a.scale, "DE scale factor F")->capture_default_str();
  cmd->add_option("--mutation-sign", a.mutation_sign, "DE: difference or sum")
      ->check(CLI::IsMember({"difference", "sum"}))->capture_default_str();
  cmd->add_flag("--elitism", a.elitism, "GA: carry the best individual over");
  cmd->add_flag("--no-force-gene", a.no_force_gene, "DE: disable the forced crossover gene");
  cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
  a.betas.attach(*cmd);
}

int run_unfold(const UnfoldArgs& a) {
  const auto response = read_response(a.response);
  const auto counts = read_counts(a.counts);
  detail::require(counts.size() == response.rows(),
                  a.counts + ": " + std::to_string(counts.size()) +
                      " counts but response has " + std::to_string(response.rows()) +
                      " rows");
  const UnfoldProblem problem(response, counts);
  std::optional<Spectrum> reference;
  if (!a.reference.empty()) {
    reference = read_spectrum(a.reference);
    detail::require(reference->size() == problem.groups(),
                    a.reference + ": spectrum length does not match response columns");
  }

  const FitnessFunction fn{parse_fitness_kind(a.fitness), a.betas.params};
  RunOptions options;
  if (reference)
    options.reference = std::vector<double>(reference->fluence().begin(),
                                            reference->fluence().end());
  RunTrace trace;
  if (a.algo == "ga") {
    GaConfig cfg{a.pop, a.iters, a.pm, a.pc, a.seed, a.elitism};
    trace = run_ga(problem, fn, cfg, options);
  } else {
    DeaConfig cfg;
    cfg.population_size = a.pop;
    cfg.max_iterations = a.iters;
    cfg.scale_factor = a.scale;
    cfg.crossover_prob = a.pc;
    cfg.seed = a.seed;
    cfg.mutation_sign =
        a.mutation_sign == "sum" ? MutationSign::sum_as_printed : MutationSign::difference;
    cfg.force_gene = !a.no_force_gene;
    trace = run_dea(problem, fn, cfg, options);
  }

  auto grid = reference ? reference->grid_ptr()
                        : std::make_shared<const EnergyGrid>(
                              EnergyGrid::log_spaced(problem.groups()));
  const Spectrum result(grid, trace.history_best.genes);
  const fs::path out(a.out);
  write_text_atomic(out / "spectrum.csv", format_spectrum(result));
  write_text_atomic(out / "trace.csv", format_trace(trace));
  if (fn.kind == FitnessKind::f3)
    write_text_atomic(out / "last_spectrum.csv",
                      format_spectrum(Spectrum(grid, trace.last_best.genes)));

  std::cout << "fitness " << format_number(*trace.history_best.fitness) << "\n";
  if (reference) {
    std::cout << "qs " << format_number(qs(*reference, result)) << "\n";
    std::cout << "qs_last " << format_number(trace.records.back().last_best_qs) << "\n";
  }
  return 0;
}

// --- benchmark ---

struct BenchmarkArgs {
  std::string library, out;
  std::size_t runs = 20, pop = 200, iters = 3000;
  std::uint64_t seed = 0, noise_seed = 0;
  double noise = 0.05, pm = 0.1, pc = 0.9, scale = 0.5;
  std::vector<std::string> algos{"ga", "dea"};
  std::vector<std::string> kinds = kAllKinds;
  bool resume = false, no_traces = false;
  BetaFlags betas;
};

void add_benchmark(CLI::App& app, BenchmarkArgs& a) {
  auto* cmd = app.add_subcommand("benchmark", "Run the multi-run benchmark grid");
  cmd->add_option("--library", a.library, "Library directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--runs", a.runs, "Runs per cell")->capture_default_str();
  cmd->add_option("--algos", a.algos, "Comma-separated: ga,dea")->delimiter(',')
      ->check(CLI::IsMember({"ga", "dea"}));
  cmd->add_option("--fitness-set", a.kinds, "Comma-separated fitness kinds")->delimiter(',')
      ->check(CLI::IsMember(kAllKinds));
  cmd->add_option("--pop", a.pop, "Population size")->capture_default_str();
  cmd->add_option("--iters", a.iters, "Generations")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Base seed; run r uses seed + r")->capture_default_str();
  cmd->add_option("--noise", a.noise, "Relative count noise sigma")->capture_default_str();
  cmd->add_option("--noise-seed", a.noise_seed, "Noise seed")->capture_default_str();
  cmd->add_option("--pm", a.pm, "GA mutation probability")->capture_default_str();
  cmd->add_option("--pc", a.pc, "Crossover probability")->capture_default_str();
  cmd->add_option("--scale", a.scale, "DE scale factor F")->capture_default_str();
  cmd->add_flag("--resume", a.resume, "Reuse completed cells in --out");
  cmd->add_flag("--no-traces", a.no_traces, "Skip per-run trace files");
  a.betas.attach(*cmd);
}

int run_benchmark_cmd(const BenchmarkArgs& a) {
  const auto lib = load_library(a.library);
  BenchmarkConfig cfg;
  cfg.algorithms.clear();
  for (const auto& t : a.algos) cfg.algorithms.push_back(parse_algorithm(t));
  cfg.kinds = parse_kinds(a.kinds);
  cfg.runs_per_cell = a.runs;
  cfg.base_seed = a.seed;
  cfg.population_size = a.pop;
  cfg.max_iterations = a.iters;
  cfg.mutation_prob = a.pm;
  cfg.crossover_prob = a.pc;
  cfg.scale_factor = a.scale;
  cfg.noise.relative_sigma = a.noise;
  cfg.noise.seed = a.noise_seed;
  cfg.params = a.betas.params;
  cfg.out_dir = a.out;
  cfg.resume = a.resume;
  cfg.write_traces = !a.no_traces;
  cfg.workers = worker_count();

  const auto grid = run_benchmark(lib, cfg);
  std::size_t resumed = 0;
  for (const auto& c : grid.cells) {
    resumed += c.resumed ? 1 : 0;
    if (c.error) {
      std::cerr << c.id() << ": " << *c.error << "\n";
      continue;
    }
    const auto s = c.summary.history_stats();
    std::cout << c.id() << " median_qs " << format_number(s.median) << " mean_qs "
              << format_number(s.mean) << "\n";
  }
  std::cout << grid.cells.size() << " cells, " << resumed << " resumed, "
            << grid.failed() << " failed\n";
  return grid.failed() == grid.cells.size() ? kRuntimeError : 0;
}

// --- landscape ---

struct LandscapeArgs {
  std::string response, counts, reference, out, mode = "uniform";
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  double radius = 0.1;
  std::vector<std::string> kinds = kAllKinds;
  BetaFlags betas;
};

void add_landscape(CLI::App& app, LandscapeArgs& a) {
  auto* cmd = app.add_subcommand("landscape", "Static Qs-fitness scan");
  cmd->add_option("--response", a.response, "Response matrix CSV")->required();
  cmd->add_option("--counts", a.counts, "Detector counts CSV")->required();
  cmd->add_option("--reference", a.reference, "Reference spectrum CSV")->required();
  cmd->add_option("--samples", a.samples, "Number of random spectra")->capture_default_str();
  cmd->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Output CSV")->required();
  cmd->add_option("--fitness-set", a.kinds, "Comma-separated fitness kinds")->delimiter(',')
      ->check(CLI::IsMember(kAllKinds));
  cmd->add_option("--mode", a.mode, "uniform or centered")
      ->check(CLI::IsMember({"uniform", "centered"}))->capture_default_str();
  cmd->add_option("--radius", a.radius, "Centered mode radius as a fraction of b_i")
      ->capture_default_str();
  a.betas.attach(*cmd);
}

int run_landscape(const LandscapeArgs& a) {
  const auto response = read_response(a.response);
  const auto counts = read_counts(a.counts);
  const auto reference = read_spectrum(a.reference);
  detail::require(counts.size() == response.rows(),
                  a.counts + ": count length does not match response rows");
  detail::require(reference.size() == response.cols(),
                  a.reference + ": spectrum length does not match response columns");
  const UnfoldProblem problem(response, counts);
  LandscapeConfig cfg;
  cfg.sample_count = a.samples;
  cfg.kinds = parse_kinds(a.kinds);
  cfg.seed = a.seed;
  cfg.params = a.betas.params;
  cfg.mode = a.mode == "centered" ? SamplingMode::centered : SamplingMode::uniform_box;
  cfg.radius_fraction = a.radius;
  const auto samples = static_landscape(problem, reference, cfg);
  write_text_atomic(a.out, format_landscape(samples, cfg.kinds));
  return 0;
}

// --- synth ---

struct SynthArgs {
  std::string shape = "single-gaussian", out;
  double p1 = 0.001, noise = 0.05;
  std::size_t m = 15, n = 53;
  std::uint64_t seed = 0, response_seed = 1, noise_seed = 0;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "Write a synthetic problem directory");
  cmd->add_option("--shape", a.shape, "single-gaussian, double-peak, flat, thermal-plus-fast")
      ->check(CLI::IsMember({"single-gaussian", "double-peak", "flat", "thermal-plus-fast"}))
      ->capture_default_str();
  cmd->add_option("--p1", a.p1, "Target first-difference penalty of the reference")
      ->capture_default_str();
  cmd->add_option("--m", a.m, "Detectors")->capture_default_str();
  cmd->add_option("--n", a.n, "Energy groups")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Spectrum seed")->capture_default_str();
  cmd->add_option("--response-seed", a.response_seed, "Response seed")->capture_default_str();
  cmd->add_option("--noise", a.noise, "Relative count noise sigma")->capture_default_str();
  cmd->add_option("--noise-seed", a.noise_seed, "Noise seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory")->required();
}

int run_synth(const SynthArgs& a) {
  const auto response = generate_synthetic_response(a.m, a.n, a.response_seed);
  const auto grid = std::make_shared<const EnergyGrid>(EnergyGrid::log_spaced(a.n));
  const auto reference =
      generate_synthetic({parse_synthetic_shape(a.shape), a.p1, a.seed}, grid);
  const auto [problem, ref] =
      make_problem(response, reference, NoiseSpec{a.noise, a.noise_seed});
  const fs::path out(a.out);
  write_text_atomic(out / "response.csv", format_response(response));
  write_text_atomic(out / "reference.csv", format_spectrum(ref));
  write_text_atomic(out / "counts.csv", format_counts(problem.counts().values()));
  std::cout << "p1 " << format_number(penalty_p1(ref)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neutron spectrum unfolding with evolutionary solvers"};
  app.require_subcommand(1);
  UnfoldArgs unfold;
  BenchmarkArgs bench;
  LandscapeArgs land;
  SynthArgs synth;
  add_unfold(app, unfold);
  add_benchmark(app, bench);
  add_landscape(app, land);
  add_synth(app, synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (app.got_subcommand("unfold")) return run_unfold(unfold);
    if (app.got_subcommand("benchmark")) return run_benchmark_cmd(bench);
    if (app.got_subcommand("landscape")) return run_landscape(land);
    if (app.got_subcommand("synth")) return run_synth(synth);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
