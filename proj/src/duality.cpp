#include "wsr/duality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsr {

namespace {

// P with Q = I / P, or nullopt when Q is not a positive multiple of I.
std::optional<double> scalar_budget(const HermitianMatrix& q) {
  const Complex d = q(0, 0);
  if (d.real() <= 0.0) return std::nullopt;
  const CMatrix expected = CMatrix::Identity(q.dim(), q.dim()) * d.real();
  if ((q.matrix() - expected).norm() > 1e-12 * d.real()) return std::nullopt;
  return 1.0 / d.real();
}

std::vector<double> group_budgets(const Network& net) {
  std::vector<double> budgets;
  for (const ConstraintGroup& g : net.groups()) {
    std::optional<double> p;
    for (const HermitianMatrix& q : g.shaping) {
      const auto b = scalar_budget(q);
      if (!b || (p && std::abs(*b - *p) > 1e-12 * *p)) {
        throw ConfigError("duality: shaping matrices must all be I / P within a group");
      }
      p = b;
    }
    budgets.push_back(*p);
  }
  return budgets;
}

}  // namespace

const char* to_string(DualityMode mode) {
  return mode == DualityMode::total ? "total" : "perlink";
}

DualityMode duality_mode(const Network& net) {
  group_budgets(net);
  if (net.num_groups() == 1 && net.group(0).members.size() == net.num_links()) return DualityMode::total;
  bool per_link = net.num_groups() == net.num_links();
  for (const ConstraintGroup& g : net.groups()) per_link = per_link && g.members.size() == 1;
  for (LinkId l = 0; l < net.num_links(); ++l) per_link = per_link && net.memberships(l).size() == 1;
  if (!per_link) {
    throw ConfigError("duality: only total-power and per-link constraint structures have a known reciprocal");
  }
  if (net.has_interference()) {
    throw ConfigError("duality: per-link budgets are supported only without cross channels");
  }
  return DualityMode::perlink;
}

ReciprocalPair reciprocal_pair(const Network& net) {
  const DualityMode mode = duality_mode(net);
  const std::size_t n = net.num_links();
  std::vector<Link> links(n);
  for (LinkId l = 0; l < n; ++l) {
    links[l] = {net.link(l).rx_antennas, net.link(l).tx_antennas, net.link(l).weight};
  }
  std::vector<std::vector<CMatrix>> channels(n, std::vector<CMatrix>(n));
  for (LinkId l = 0; l < n; ++l) {
    for (LinkId k = 0; k < n; ++k) channels[l][k] = net.channel(k, l).adjoint();
  }
  const std::vector<double> budgets = group_budgets(net);
  std::vector<ConstraintGroup> groups;
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    ConstraintGroup g;
    g.members = net.group(s).members;
    for (LinkId l : g.members) {
      g.shaping.push_back(HermitianMatrix::scaled_identity(links[l].tx_antennas, 1.0 / budgets[s]));
    }
    groups.push_back(std::move(g));
  }
  Network reverse(std::move(links), std::move(channels), std::move(groups));
  reverse.seed = net.seed;
  reverse.scenario = net.scenario;
  return {net, std::move(reverse), mode, budgets};
}

Network reciprocal_network(const Network& net) { return reciprocal_pair(net).reverse; }

MappedState duality_map(const Network& net, const PrimalState& primal, const DualState& dual) {
  const ReciprocalPair pair = reciprocal_pair(net);
  check_transmit_shapes(net, primal.sigma);
  check_receive_shapes(net, dual.lambda);
  if (dual.mu.size() != net.num_groups()) throw ShapeError("duality_map: mu must have one entry per group");
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    if (!(dual.mu[s] > 0.0)) {
      throw IllPosedError("duality_map: mu of group " + std::to_string(s) +
                          " is zero; the correspondence is degenerate");
    }
  }
  MappedState out;
  CovarianceSet sigma_hat(net.num_links());
  out.dual.lambda.resize(net.num_links());
  for (LinkId l = 0; l < net.num_links(); ++l) {
    const GroupId s = net.memberships(l).front().group;
    const double ratio = pair.budgets[s] / dual.mu[s];
    sigma_hat[l] = ratio * dual.lambda[l];
    out.dual.lambda[l] = (1.0 / ratio) * primal.sigma[l];
  }
  out.dual.mu = dual.mu;
  out.dual.phi = dual_phi(pair.reverse, out.dual.lambda, out.dual.mu);
  out.primal = make_primal_state(pair.reverse, std::move(sigma_hat));
  return out;
}

DualityReport certify_duality(const Network& net, const CertifyOptions& options) {
  const ReciprocalPair pair = reciprocal_pair(net);
  DualityReport report;
  report.mode = to_string(pair.mode);

  const SolveResult fwd = solve(net, options.solver);
  report.forward_objective = fwd.objective;
  report.forward_iterations = fwd.iterations;
  report.forward_termination = to_string(fwd.reason);
  report.forward_kkt = fwd.kkt.max_residual();
  report.mu = fwd.dual.mu;

  if (std::any_of(fwd.dual.mu.begin(), fwd.dual.mu.end(), [](double m) { return !(m > 0.0); })) {
    report.verdict = "degenerate correspondence";
    return report;
  }

  const MappedState mapped = duality_map(net, fwd.primal, fwd.dual);
  report.reverse_objective = objective_F(pair.reverse, mapped.primal.sigma, mapped.primal.omega,
                                         options.solver.rank_tol);
  report.gap = std::abs(report.forward_objective - report.reverse_objective);
  report.reverse_usage = constraint_usage(pair.reverse, mapped.primal.sigma);
  report.reverse_kkt = kkt_residual(pair.reverse, mapped.primal.sigma, mapped.primal.omega, mapped.dual.lambda,
                                    mapped.dual.mu, options.solver.rank_tol)
                           .max_residual();

  if (options.independent_solve) {
    const SolveResult rev = solve(pair.reverse, options.solver);
    report.independent_objective = rev.objective;
    report.independent_gap = std::abs(rev.objective - report.forward_objective);
    report.independent_agrees = *report.independent_gap < options.independent_tolerance;
  }

  double overshoot = 0.0;
  for (double u : report.reverse_usage) overshoot = std::max(overshoot, u - 1.0);
  report.passed = report.gap < options.tolerance && report.reverse_kkt < options.tolerance &&
                  overshoot <= options.feasibility_tol;
  report.verdict = report.passed ? "pass" : "fail";
  return report;
}

}  // namespace wsr
