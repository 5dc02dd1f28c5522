#include "wsr/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "wsr/network_io.hpp"

namespace wsr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < 0) throw ConfigError("config: '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
  Scenario& sc = cfg.scenario;
  SolverConfig& so = cfg.solver;
  if (key == "mode") {
    cfg.mode = experiment_mode_from_string(v);
  } else if (key == "links") {
    sc.links = to_count(key, v);
  } else if (key == "tx") {
    sc.tx_antennas = static_cast<Eigen::Index>(to_count(key, v));
  } else if (key == "rx") {
    sc.rx_antennas = static_cast<Eigen::Index>(to_count(key, v));
  } else if (key == "alpha") {
    sc.interference_scale = to_real(key, v);
  } else if (key == "alphas") {
    cfg.alphas.clear();
    for (const auto& a : split_list(v)) cfg.alphas.push_back(to_real(key, a));
  } else if (key == "weight_lo") {
    sc.weight_lo = to_real(key, v);
  } else if (key == "weight_hi") {
    sc.weight_hi = to_real(key, v);
  } else if (key == "constraint") {
    sc.mode = constraint_mode_from_string(v);
  } else if (key == "total_power") {
    sc.total_power = to_real(key, v);
  } else if (key == "budget_min") {
    sc.budget_min = static_cast<int>(to_integer(key, v));
  } else if (key == "budget_max") {
    sc.budget_max = static_cast<int>(to_integer(key, v));
  } else if (key == "cells") {
    sc.cells = to_count(key, v);
  } else if (key == "cell_power") {
    sc.cell_power = to_real(key, v);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : split_list(v)) {
      const long long x = to_integer(key, s);
      if (x < 0) throw ConfigError("config: seeds must be nonnegative");
      cfg.seeds.push_back(static_cast<std::uint64_t>(x));
    }
  } else if (key == "out") {
    cfg.out_dir = v;
  } else if (key == "max_iters") {
    so.max_iters = to_count(key, v);
  } else if (key == "obj_tol") {
    so.obj_tol = to_real(key, v);
  } else if (key == "obj_window") {
    so.obj_window = to_count(key, v);
  } else if (key == "kkt_tol") {
    so.kkt_tol = to_real(key, v);
  } else if (key == "mu_probe_eps") {
    so.mu_probe_eps = to_real(key, v);
  } else if (key == "bisection_tol") {
    so.bisection_tol = to_real(key, v);
  } else if (key == "bisection_max_steps") {
    so.bisection_max_steps = to_count(key, v);
  } else if (key == "max_sweeps") {
    so.max_sweeps = to_count(key, v);
  } else if (key == "rank_tol") {
    so.rank_tol = to_real(key, v);
  } else if (key == "certify_tol") {
    cfg.certify_tol = to_real(key, v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::string alpha_tag(double alpha) {
  std::ostringstream s;
  s << "alpha_" << alpha;
  return s.str();
}

struct RunOutcome {
  std::size_t iterations = 0;
  std::string termination;
  double objective = 0.0;
};

RunOutcome run_one(const ExperimentConfig& cfg, const Scenario& sc, std::uint64_t seed,
                   const std::filesystem::path& dir, std::vector<PlotSeries>& plots, std::ostream& log) {
  const Network net = random_network(seed, sc);
  const std::string tag = seed_tag(seed);
  write_file_atomic(dir / ("network_" + tag + ".txt"), network_to_string(net));

  if (cfg.mode == ExperimentMode::certify) {
    CertifyOptions opts;
    opts.solver.max_iters = cfg.solver.max_iters;
    opts.solver.rank_tol = cfg.solver.rank_tol;
    opts.tolerance = cfg.certify_tol;
    const DualityReport report = certify_duality(net, opts);
    write_file_atomic(dir / ("certificate_" + tag + ".json"), certificate_json(report).dump(2) + "\n");
    log << tag << ": " << report.verdict << " (gap " << report.gap << ")\n";
    return {report.forward_iterations, report.forward_termination, report.forward_objective};
  }

  const SolveResult result = solve(net, cfg.solver);
  if (!result.trace.nondecreasing(cfg.solver.monotonic_slack)) {
    throw SolverError(tag + ": trace is not monotone; refusing to write it");
  }
  std::ostringstream csv;
  write_trace_csv(csv, result.trace, net.num_groups());
  write_file_atomic(dir / ("trace_" + tag + ".csv"), csv.str());
  write_file_atomic(dir / ("summary_" + tag + ".json"), solve_summary(net, result).dump(2) + "\n");
  plots.push_back(emit_convergence_plot_data(
      result.trace, tag + " alpha=" + format_real(sc.interference_scale),
      {{"seed", seed}, {"alpha", sc.interference_scale}, {"constraint", to_string(sc.mode)}}));
  log << tag << ": objective " << format_real(result.objective) << " nats after " << result.iterations
      << " iterations (" << to_string(result.reason) << ")\n";
  return {result.iterations, to_string(result.reason), result.objective};
}

}  // namespace

const char* to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::solve:
      return "solve";
    case ExperimentMode::certify:
      return "certify";
    case ExperimentMode::sweep:
      return "sweep";
  }
  return "unknown";
}

ExperimentMode experiment_mode_from_string(const std::string& text) {
  if (text == "solve") return ExperimentMode::solve;
  if (text == "certify") return ExperimentMode::certify;
  if (text == "sweep") return ExperimentMode::sweep;
  throw ConfigError("unknown experiment mode '" + text + "'");
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  bool have_version = false;
  std::map<std::string, int> seen;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (++seen[key] > 1) throw ConfigError("config: duplicate key '" + key + "'");
    if (!have_version) {
      if (key != "version") throw ConfigError("config: the first entry must be 'version'");
      if (to_integer(key, value) != kExperimentConfigVersion) {
        throw ConfigError("config: unsupported version '" + value + "'");
      }
      have_version = true;
      continue;
    }
    apply(cfg, key, value);
  }
  if (!have_version) throw ConfigError("config: missing 'version'");
  return cfg;
}

ExperimentConfig parse_experiment_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_experiment_config(in);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("config: the seed list is empty");
  validate(cfg.scenario);
  validate(cfg.solver);
  for (double a : cfg.alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("config: alphas must be finite and nonnegative");
  }
  if (!(cfg.certify_tol > 0.0)) throw ConfigError("config: certify_tol must be positive");
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::vector<PlotSeries> plots;
    if (cfg.mode == ExperimentMode::sweep) {
      const std::vector<double> alphas =
          cfg.alphas.empty() ? std::vector<double>{cfg.scenario.interference_scale} : cfg.alphas;
      std::ostringstream table;
      table << "alpha,seed,iterations,termination,objective_nats\n";
      for (double alpha : alphas) {
        Scenario sc = cfg.scenario;
        sc.interference_scale = alpha;
        const auto dir = cfg.out_dir / alpha_tag(alpha);
        std::filesystem::create_directories(dir);
        for (std::uint64_t seed : cfg.seeds) {
          const RunOutcome r = run_one(cfg, sc, seed, dir, plots, log);
          table << format_real(alpha) << ',' << seed << ',' << r.iterations << ',' << r.termination << ','
                << format_real(r.objective) << '\n';
        }
      }
      write_file_atomic(cfg.out_dir / "aggregate.csv", table.str());
    } else {
      for (std::uint64_t seed : cfg.seeds) run_one(cfg, cfg.scenario, seed, cfg.out_dir, plots, log);
    }
    if (!plots.empty()) write_file_atomic(cfg.out_dir / "convergence.json", plot_json(plots).dump(1) + "\n");
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const Error& e) {
    log << "solver abort: " << e.what() << '\n';
    return kExitSolverAbort;
  }
}

int run_experiment(const std::filesystem::path& config_path, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return run_experiment(cfg, log);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace, std::size_t num_groups) {
  out << "iter,objective_nats,lambda_scale";
  for (std::size_t s = 0; s < num_groups; ++s) out << ",mu_" << s;
  out << ",kkt_max_residual,wall_ms\n";
  for (const IterationRecord& r : trace.records) {
    out << r.iter << ',' << format_real(r.objective) << ',' << format_real(r.lambda_scale);
    for (std::size_t s = 0; s < num_groups; ++s) out << ',' << format_real(s < r.mu.size() ? r.mu[s] : 0.0);
    out << ',' << format_real(r.kkt_max) << ',' << format_real(r.wall_ms) << '\n';
  }
}

nlohmann::json solve_summary(const Network& net, const SolveResult& result) {
  nlohmann::json j;
  if (net.seed) j["seed"] = *net.seed;
  j["links"] = net.num_links();
  j["groups"] = net.num_groups();
  j["objective_nats"] = result.objective;
  j["rates_nats"] = result.rates;
  j["iterations"] = result.iterations;
  j["termination"] = to_string(result.reason);
  j["kkt_max_residual"] = result.kkt.max_residual();
  j["mu"] = result.dual.mu;
  j["usage"] = result.kkt.usage;
  std::size_t fallbacks = 0;
  for (const auto& r : result.trace.records) fallbacks += r.mu_fallback ? 1 : 0;
  j["mu_fallback_iterations"] = fallbacks;
  return j;
}

nlohmann::json certificate_json(const DualityReport& r) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["verdict"] = r.verdict;
  j["passed"] = r.passed;
  j["forward_objective_nats"] = r.forward_objective;
  j["reverse_objective_nats"] = r.reverse_objective;
  j["gap"] = r.gap;
  j["forward_iterations"] = r.forward_iterations;
  j["forward_termination"] = r.forward_termination;
  j["forward_kkt_max_residual"] = r.forward_kkt;
  j["reverse_kkt_max_residual"] = r.reverse_kkt;
  j["mu"] = r.mu;
  j["reverse_usage"] = r.reverse_usage;
  if (r.independent_objective) {
    j["independent_reverse_objective_nats"] = *r.independent_objective;
    j["independent_gap"] = *r.independent_gap;
    j["independent_agrees"] = *r.independent_agrees;
  }
  return j;
}

PlotSeries emit_convergence_plot_data(const IterationTrace& trace, std::string label, nlohmann::json metadata) {
  PlotSeries p;
  p.label = std::move(label);
  p.metadata = std::move(metadata);
  p.points.reserve(trace.size());
  for (const IterationRecord& r : trace.records) p.points.emplace_back(r.iter, r.objective);
  p.metadata["iterations"] = trace.size();
  return p;
}

nlohmann::json plot_json(const std::vector<PlotSeries>& series) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PlotSeries& s : series) {
    nlohmann::json x = nlohmann::json::array();
    nlohmann::json y = nlohmann::json::array();
    for (const auto& [i, f] : s.points) {
      x.push_back(i);
      y.push_back(f);
    }
    arr.push_back({{"label", s.label}, {"iteration", x}, {"objective_nats", y}, {"metadata", s.metadata}});
  }
  return {{"series", arr}};
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ConfigError("fit_line: x values are all equal");
  const double slope = (n * sxy - sx * sy) / den;
  return {(sy - slope * sx) / n, slope};
}

BenchmarkResult benchmark_complexity(const BenchmarkOptions& options) {
  using clock = std::chrono::steady_clock;
  BenchmarkResult out;
  SolverConfig cfg;
  for (std::size_t links : options.links) {
    for (Eigen::Index n : options.antennas) {
      Scenario sc;
      sc.links = links;
      sc.tx_antennas = n;
      sc.rx_antennas = n;
      sc.interference_scale = options.interference_scale;
      const Network net = random_network(options.seed, sc);
      const PrimalState start = make_primal_state(net, default_initialization(net, cfg));

      double best = std::numeric_limits<double>::infinity();
      std::size_t iters = 0;
      for (std::size_t rep = 0; rep < options.repeats; ++rep) {
        PrimalState state = start;
        std::size_t k = 0;
        const auto t0 = clock::now();
        double elapsed = 0.0;
        while (k < options.min_iterations || elapsed < options.min_seconds) {
          state = iterate(net, state, cfg).next;
          ++k;
          elapsed = std::chrono::duration<double>(clock::now() - t0).count();
        }
        best = std::min(best, 1e3 * elapsed / static_cast<double>(k));
        iters = k;
      }
      out.rows.push_back({links, n, iters, best});
    }
  }

  // Least squares on logs; an axis with a single value has no slope.
  const bool vary_links = options.links.size() > 1;
  const bool vary_antennas = options.antennas.size() > 1;
  const Eigen::Index cols = 1 + (vary_links ? 1 : 0) + (vary_antennas ? 1 : 0);
  const auto m = static_cast<Eigen::Index>(out.rows.size());
  Eigen::MatrixXd a(m, cols);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const BenchmarkRow& row = out.rows[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    a(i, j++) = 1.0;
    if (vary_links) a(i, j++) = std::log(static_cast<double>(row.links));
    if (vary_antennas) a(i, j++) = std::log(static_cast<double>(row.antennas));
    b(i) = std::log(row.per_iteration_ms);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.slope_links = nan;
  out.slope_antennas = nan;
  if (m >= cols) {
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    Eigen::Index j = 0;
    out.intercept = coef(j++);
    if (vary_links) out.slope_links = coef(j++);
    if (vary_antennas) out.slope_antennas = coef(j++);
  }
  return out;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "links,antennas,iterations,per_iteration_ms\n";
  for (const BenchmarkRow& r : result.rows) {
    out << r.links << ',' << r.antennas << ',' << r.iterations << ',' << format_real(r.per_iteration_ms) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace wsr
