#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wsr/netmodel.hpp"

namespace wsr {

struct SolverConfig {
  std::size_t max_iters = 10000;
  /// Stop when |F_{n+1} - F_n| / max(1, |F_n|) stays below obj_tol for
  /// obj_window consecutive iterations. Zero disables the test.
  double obj_tol = 1e-9;
  std::size_t obj_window = 3;
  /// Stop when the largest KKT residual of the current state drops below kkt_tol.
  double kkt_tol = 1e-7;
  /// Relative probe used for mu = 0+ when deciding which constraints bind.
  double mu_probe_eps = 1e-9;
  /// Target accuracy of |usage - 1| for binding groups.
  double bisection_tol = 1e-12;
  std::size_t bisection_max_steps = 300;
  /// Gauss-Seidel sweeps over the groups when groups overlap.
  std::size_t max_sweeps = 1000;
  /// Gauss-Seidel stops once every group satisfies its condition to this accuracy.
  double sweep_tol = 1e-10;
  double rank_tol = kDefaultRankTol;
  /// Allowed decrease of the objective between iterations before aborting.
  double monotonic_slack = 1e-10;
  /// Initial covariances are c_l * I with every group at this usage.
  double init_usage = 0.9;
};

void validate(const SolverConfig& cfg);

/// Dual variables: Lambda_l (m_l x m_l), mu_s per group, and the derived
/// Phi_l = sum_{s in S^l} mu_s Q_l^s + sum_{k != l} H_kl^H Lambda_k H_kl.
struct DualState {
  CovarianceSet lambda;
  std::vector<double> mu;
  CovarianceSet phi;
};

/// Lambda_l = w_l (Omega_l^-1 - (Omega_l + H_ll Sigma_l H_ll^H)^-1), pseudo-inverses.
CovarianceSet dual_lambda(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                          double rank_tol = kDefaultRankTol);

/// Phi_l from Lambda and mu.
CovarianceSet dual_phi(const Network& net, const CovarianceSet& lambda, const std::vector<double>& mu);

/// Explicit saddle point of the Lagrangian for fixed duals:
///   Sigma_l = w_l (Phi_l^-1 - (Phi_l + H_ll^H Lambda_l H_ll)^-1)
///   Omega_l = w_l H_ll (Phi_l + H_ll^H Lambda_l H_ll)^-1 H_ll^H
/// Throws IllPosedError when range(H_ll^H Lambda_l H_ll) is not inside range(Phi_l).
PrimalState saddle_step(const Network& net, const CovarianceSet& lambda, const CovarianceSet& phi,
                        double rank_tol = kDefaultRankTol);

struct MuSolution {
  std::vector<double> mu;
  std::vector<bool> binding;  ///< membership in the active set T
  std::size_t sweeps = 0;
  /// Largest |usage - 1| over binding groups, or usage overshoot of slack ones,
  /// in the scalar model used by the search.
  double max_violation = 0.0;
};

/// Chooses mu: zero for groups that stay slack at mu = 0+, and for the rest the
/// value that makes the tentative covariances use exactly the whole budget.
/// Overlapping groups are handled by cyclic per-group bisection.
MuSolution solve_mu(const Network& net, const CovarianceSet& lambda, const SolverConfig& cfg);

struct ScaledState {
  PrimalState state;
  double lambda_scale = 1.0;  ///< max group usage of the tentative covariances
  std::vector<double> tentative_usage;
};

/// Sigma = Sigma~ / lambda with lambda = max_s usage_s(Sigma~); Omega recomputed.
/// Throws SolverError unless 0 < lambda <= 1 (+1e-8).
ScaledState scale_and_commit(const Network& net, CovarianceSet sigma_tilde);

/// First-order and feasibility residuals of (Sigma, Omega, Lambda, mu).
///
/// With G_l = w_l H_ll^H (Omega_l + H_ll Sigma_l H_ll^H)^-1 H_ll:
///  - stationarity_full:  ||G_l - Phi_l||_F over the whole transmit space
///  - stationarity:       ||(G_l - Phi_l) Sigma_l||_F / max_k ||Sigma_k||_2, i.e.
///                        the condition restricted to the signal subspace
///  - multiplier_psd:     max(0, -min eig(Phi_l - G_l)); Phi_l - G_l is the
///                        multiplier of Sigma_l >= 0 and must be PSD
///  - lambda_residual:    ||w_l (Omega_l^-1 - (Omega_l + H Sigma H^H)^-1) - Lambda_l||_F
///  - primal_violation:   max(0, usage_s - 1)
///  - dual_violation:     max(0, -min eig(Lambda_l)) per link, max(0, -mu_s) per group
///  - complementary:      |mu_s (1 - usage_s)|
struct KktReport {
  std::vector<double> stationarity_full;
  std::vector<double> stationarity;
  std::vector<double> multiplier_psd;
  std::vector<double> lambda_residual;
  std::vector<double> usage;
  std::vector<double> primal_violation;
  std::vector<double> lambda_dual_violation;
  std::vector<double> mu_dual_violation;
  std::vector<double> complementary;

  /// Largest residual among the conditions that vanish at a KKT point
  /// (stationarity_full is excluded; it need not vanish when some transmit
  /// directions are off).
  double max_residual() const;
};

KktReport kkt_residual(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                       const CovarianceSet& lambda, const std::vector<double>& mu,
                       double rank_tol = kDefaultRankTol);

/// One row of the trace. Row n describes iteration n, which starts from
/// state Sigma^n: objective and kkt_max refer to Sigma^n, mu is the dual
/// chosen at Sigma^n, lambda_scale and complementary_slackness refer to the
/// tentative update built from it.
struct IterationRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  double lambda_scale = 1.0;
  std::vector<double> mu;
  double kkt_max = 0.0;
  double complementary_slackness = 0.0;  ///< max_s |mu_s (1 - usage_s(Sigma~))|
  double wall_ms = 0.0;
  bool mu_fallback = false;  ///< mu = 0 left Phi singular; all mu set to the probe value
};

struct IterationTrace {
  std::vector<IterationRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  /// Largest drop F_n - F_{n+1} over the trace (<= 0 for a monotone trace).
  double max_decrease() const;
  bool nondecreasing(double slack) const { return max_decrease() <= slack; }
};

struct IterateResult {
  PrimalState next;
  DualState duals;  ///< duals evaluated at the input state
  KktReport kkt;    ///< residuals of the input state with those duals
  IterationRecord record;
};

/// One update from a consistent primal state: duals, mu, saddle point and rescaling.
IterateResult iterate(const Network& net, const PrimalState& state, const SolverConfig& cfg);

enum class Termination { kkt_converged, objective_stalled, max_iters };
const char* to_string(Termination reason);

struct SolveResult {
  PrimalState primal;
  DualState dual;
  IterationTrace trace;
  KktReport kkt;
  Termination reason = Termination::max_iters;
  std::size_t iterations = 0;
  double objective = 0.0;
  std::vector<double> rates;
};

/// Sigma_l = c_l I, c_l chosen so that each group's usage is at most
/// cfg.init_usage, with equality whenever groups do not overlap.
CovarianceSet default_initialization(const Network& net, const SolverConfig& cfg);

/// Runs the iterative minimax algorithm until one of the stopping rules fires.
/// Throws SolverError if the objective decreases by more than monotonic_slack.
SolveResult solve(const Network& net, const SolverConfig& cfg = {},
                  std::optional<CovarianceSet> initial = std::nullopt);

/// Residuals of the saddle-point equations for (Sigma~, Omega~) against the
/// duals that produced them, restricted to the truncated subspaces: the
/// Sigma-side condition to range(H_ll^H), the Omega-side one to range(H_ll).
struct SaddleResidual {
  double sigma_condition = 0.0;
  double omega_condition = 0.0;
};
SaddleResidual saddle_equation_residual(const Network& net, const PrimalState& saddle,
                                        const CovarianceSet& lambda, const CovarianceSet& phi,
                                        double rank_tol = kDefaultRankTol);

}  // namespace wsr
