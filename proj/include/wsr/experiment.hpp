#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wsr/duality.hpp"

namespace wsr {

enum class ExperimentMode { solve, certify, sweep };
const char* to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& text);

/// Flat key = value document. The first entry must be "version = 1".
///
///   version = 1
///   mode = sweep
///   links = 10
///   alphas = 0.1, 1, 5
///   seeds = 1, 2, 3
///
/// Unknown keys are rejected.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::solve;
  Scenario scenario;
  SolverConfig solver;
  std::vector<std::uint64_t> seeds;
  std::vector<double> alphas;  ///< sweep values; empty means the scenario alpha only
  std::filesystem::path out_dir = "out";
  double certify_tol = 1e-6;
};

inline constexpr int kExperimentConfigVersion = 1;

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config_string(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

/// Exit codes of run_experiment.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 1;
inline constexpr int kExitSolverAbort = 2;

/// Writes, for each seed (and each alpha of a sweep), the network file, the
/// trace CSV and a JSON summary or certificate; sweeps add aggregate.csv.
/// Errors are reported on `log` and mapped to the exit codes above.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);
int run_experiment(const std::filesystem::path& config_path, std::ostream& log);

/// Trace CSV: iter, objective_nats, lambda_scale, mu_<s>..., kkt_max_residual, wall_ms.
void write_trace_csv(std::ostream& out, const IterationTrace& trace, std::size_t num_groups);

nlohmann::json solve_summary(const Network& net, const SolveResult& result);
nlohmann::json certificate_json(const DualityReport& report);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<std::size_t, double>> points;  ///< (iteration, objective)
  nlohmann::json metadata;
};

PlotSeries emit_convergence_plot_data(const IterationTrace& trace, std::string label = {},
                                      nlohmann::json metadata = nlohmann::json::object());
nlohmann::json plot_json(const std::vector<PlotSeries>& series);

struct BenchmarkRow {
  std::size_t links = 0;
  Eigen::Index antennas = 0;  ///< n = m = N
  std::size_t iterations = 0;
  double per_iteration_ms = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  /// Least-squares fit log t = c + a log L + b log N over all rows; NaN for an axis with one value.
  double slope_links = 0.0;
  double slope_antennas = 0.0;
  double intercept = 0.0;
};

struct BenchmarkOptions {
  std::vector<std::size_t> links{2, 4, 8, 16};
  std::vector<Eigen::Index> antennas{2, 4, 8, 16};
  std::uint64_t seed = 1;
  double interference_scale = 1.0;
  double min_seconds = 0.05;  ///< keep iterating each cell at least this long
  std::size_t min_iterations = 5;
  std::size_t repeats = 3;    ///< best-of timing
};

BenchmarkResult benchmark_complexity(const BenchmarkOptions& options);
void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result);

/// Fits y = c + slope * x by least squares.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Writes text to path through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace wsr
