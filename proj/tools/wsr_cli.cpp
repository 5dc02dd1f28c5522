// Command-line front end: solve, certify, sweep and bench.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "wsr/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string seeds;
  std::optional<double> alpha;
  std::string mode;
  std::optional<std::size_t> max_iters;
  std::optional<double> tol;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Experiment config (key = value, starting with version = 1)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seeds", f.seeds, "Comma-separated seed list");
  cmd->add_option("--alpha", f.alpha, "Interference scale");
  cmd->add_option("--mode", f.mode, "Constraint structure")->check(CLI::IsMember({"total", "perlink", "grouped"}));
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap");
  cmd->add_option("--tol", f.tol, "KKT residual tolerance");
}

// Config file first, then command-line overrides.
wsr::ExperimentConfig build_config(const Flags& f, wsr::ExperimentMode mode) {
  wsr::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = wsr::load_experiment_config(f.config);
  cfg.mode = mode;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.seeds.empty()) {
    const auto parsed = wsr::parse_experiment_config_string("version = 1\nseeds = " + f.seeds + "\n");
    cfg.seeds = parsed.seeds;
  }
  if (f.alpha) {
    cfg.scenario.interference_scale = *f.alpha;
    if (mode == wsr::ExperimentMode::sweep) cfg.alphas = {*f.alpha};
  }
  if (!f.mode.empty()) cfg.scenario.mode = wsr::constraint_mode_from_string(f.mode);
  if (f.max_iters) cfg.solver.max_iters = *f.max_iters;
  if (f.tol) cfg.solver.kkt_tol = *f.tol;
  if (mode == wsr::ExperimentMode::sweep && cfg.alphas.empty()) cfg.alphas = {0.1, 1.0, 5.0};
  return cfg;
}

int run_verb(const Flags& f, wsr::ExperimentMode mode) {
  wsr::ExperimentConfig cfg;
  try {
    cfg = build_config(f, mode);
  } catch (const wsr::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wsr::kExitBadConfig;
  }
  return wsr::run_experiment(cfg, std::cerr);
}

int run_bench(const Flags& f, const std::string& links, const std::string& dims) {
  wsr::BenchmarkOptions opts;
  try {
    auto parse_list = [](const std::string& text) {
      return wsr::parse_experiment_config_string("version = 1\nseeds = " + text + "\n").seeds;
    };
    if (!links.empty()) {
      opts.links.clear();
      for (auto v : parse_list(links)) opts.links.push_back(v);
    }
    if (!dims.empty()) {
      opts.antennas.clear();
      for (auto v : parse_list(dims)) opts.antennas.push_back(static_cast<Eigen::Index>(v));
    }
    if (f.alpha) opts.interference_scale = *f.alpha;
    if (!f.seeds.empty()) opts.seed = parse_list(f.seeds).at(0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wsr::kExitBadConfig;
  }
  const wsr::BenchmarkResult r = wsr::benchmark_complexity(opts);
  std::ostringstream csv;
  wsr::write_benchmark_csv(csv, r);
  std::cout << csv.str();
  std::cout << "slope_links " << r.slope_links << "\nslope_antennas " << r.slope_antennas << '\n';
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    const std::filesystem::path dir = f.out;
    wsr::write_file_atomic(dir / "bench.csv", csv.str());
    nlohmann::json j{{"slope_links", r.slope_links}, {"slope_antennas", r.slope_antennas}, {"intercept", r.intercept}};
    wsr::write_file_atomic(dir / "bench.json", j.dump(2) + "\n");
  }
  return wsr::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted sum-rate maximization for MIMO interference networks"};
  app.require_subcommand(1);

  Flags solve_flags, certify_flags, sweep_flags, bench_flags;
  std::string bench_links, bench_dims;
  auto* solve = app.add_subcommand("solve", "Solve one network per seed");
  auto* certify = app.add_subcommand("certify", "Solve and check the reciprocal-network correspondence");
  auto* sweep = app.add_subcommand("sweep", "Solve over several interference scales");
  auto* bench = app.add_subcommand("bench", "Time one iteration over a grid of sizes");
  add_flags(solve, solve_flags);
  add_flags(certify, certify_flags);
  add_flags(sweep, sweep_flags);
  add_flags(bench, bench_flags);
  bench->add_option("--links", bench_links, "Comma-separated link counts");
  bench->add_option("--dims", bench_dims, "Comma-separated antenna counts (n = m)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return wsr::kExitBadConfig;
  }

  if (*solve) return run_verb(solve_flags, wsr::ExperimentMode::solve);
  if (*certify) return run_verb(certify_flags, wsr::ExperimentMode::certify);
  if (*sweep) return run_verb(sweep_flags, wsr::ExperimentMode::sweep);
  return run_bench(bench_flags, bench_links, bench_dims);
}
