#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsr/solver.hpp"

namespace wsr {

/// Constraint structures for which the reciprocal correspondence is known.
enum class DualityMode { total, perlink };
const char* to_string(DualityMode mode);

/// Detects the constraint structure. Total power: one group over all links
/// with Q_l = I / P_T. Per-link: one group per link with Q_l = I / P_l and no
/// cross channels. Throws ConfigError for anything else.
DualityMode duality_mode(const Network& net);

/// Reverse link l transmits with m_l antennas and receives with n_l; the
/// reverse channel from transmitter k into receiver l is (forward H_kl)^H.
/// Weights and budgets carry over unchanged.
struct ReciprocalPair {
  Network forward;
  Network reverse;
  DualityMode mode = DualityMode::total;
  std::vector<double> budgets;  ///< P_s per group, shared by both networks
};

ReciprocalPair reciprocal_pair(const Network& net);
Network reciprocal_network(const Network& net);

/// Forward (Sigma; Lambda, mu) -> reverse (P/mu Lambda; mu/P Sigma, mu), with
/// the reverse Omega recomputed from the mapped Sigma and Phi rebuilt on the
/// reverse network. Throws IllPosedError when some mu_s is zero.
struct MappedState {
  PrimalState primal;
  DualState dual;
};
MappedState duality_map(const Network& net, const PrimalState& primal, const DualState& dual);

/// The correspondence holds at saddle points, so the forward solve stops on
/// the KKT test alone and to a tighter tolerance than plain solves.
inline SolverConfig certification_solver_config() {
  SolverConfig cfg;
  cfg.obj_tol = 0.0;
  cfg.kkt_tol = 1e-9;
  return cfg;
}

struct CertifyOptions {
  SolverConfig solver = certification_solver_config();
  double tolerance = 1e-6;           ///< objective gap and reverse KKT residual
  double feasibility_tol = 1e-8;     ///< allowed reverse usage overshoot
  bool independent_solve = true;     ///< also solve the reverse network from scratch
  double independent_tolerance = 1e-4;
};

struct DualityReport {
  std::string mode;
  std::string verdict;  ///< "pass", "fail" or "degenerate correspondence"
  bool passed = false;
  double forward_objective = 0.0;
  double reverse_objective = 0.0;  ///< reverse F at the mapped state
  double gap = 0.0;
  std::size_t forward_iterations = 0;
  std::string forward_termination;
  double forward_kkt = 0.0;
  double reverse_kkt = 0.0;
  std::vector<double> mu;
  std::vector<double> reverse_usage;
  std::optional<double> independent_objective;
  std::optional<double> independent_gap;
  /// Two independent solves may settle in different local optima, so this
  /// is reported next to the verdict rather than folded into it.
  std::optional<bool> independent_agrees;
};

DualityReport certify_duality(const Network& net, const CertifyOptions& options = {});

}  // namespace wsr
