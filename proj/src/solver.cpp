#include "wsr/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace wsr {

namespace {

constexpr double kScaleSlack = 1e-8;
constexpr double kRoundoffCut = 1e3 * std::numeric_limits<double>::epsilon();

// V diag(sqrt(eig)) over the positive eigenvalues, however small.
CMatrix sqrt_factor(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  const RVector& ev = es.eigenvalues();
  Eigen::Index first = 0;
  while (first < ev.size() && !(ev(first) > 0.0)) ++first;
  const Eigen::Index r = ev.size() - first;
  return es.eigenvectors().rightCols(r) * ev.tail(r).cwiseSqrt().cast<Complex>().asDiagonal();
}

// X^+ - (X + B B^H)^+ = X^+ B (I + B^H X^+ B)^-1 B^H X^+ when range(B) lies in
// range(X). Unlike the plain difference it stays accurate, and PSD, for small B.
HermitianMatrix inverse_gap(const HermitianMatrix& base_inv, const CMatrix& b) {
  if (b.cols() == 0) return HermitianMatrix::zero(base_inv.dim());
  const CMatrix x = base_inv.matrix() * b;
  CMatrix k = b.adjoint() * x;
  k.diagonal().array() += 1.0;
  Eigen::LLT<CMatrix> llt(hermitize(k).matrix());
  return hermitize(x * llt.solve(CMatrix(x.adjoint())));
}

// Omega^-1 and (Omega + H Sigma H^H)^-1 at receiver l, with their difference.
struct ReceiverInverses {
  HermitianMatrix omega_inv;
  HermitianMatrix total_inv;
  HermitianMatrix gap;
};

ReceiverInverses receiver_inverses(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                                   LinkId l, double rank_tol) {
  ReceiverInverses r;
  r.omega_inv = pseudo_inverse(omega[l], rank_tol);
  r.gap = inverse_gap(r.omega_inv, net.channel(l, l) * sqrt_factor(sigma[l]));
  r.total_inv = r.omega_inv - r.gap;
  return r;
}

// C_l = sum_{k != l} H_kl^H Lambda_k H_kl.
CovarianceSet interference_duals(const Network& net, const CovarianceSet& lambda) {
  const std::size_t n = net.num_links();
  CovarianceSet c;
  c.reserve(n);
  for (LinkId l = 0; l < n; ++l) {
    CMatrix acc = CMatrix::Zero(net.link(l).tx_antennas, net.link(l).tx_antennas);
    for (LinkId k = 0; k < n; ++k) {
      if (k == l) continue;
      const CMatrix& h = net.channel(k, l);
      if (h.squaredNorm() == 0.0) continue;
      acc.noalias() += h.adjoint() * lambda[k].matrix() * h;
    }
    c.push_back(hermitize(acc));
  }
  return c;
}

// H_ll^H Lambda_l H_ll.
CovarianceSet own_signal_duals(const Network& net, const CovarianceSet& lambda) {
  CovarianceSet m;
  m.reserve(net.num_links());
  for (LinkId l = 0; l < net.num_links(); ++l) m.push_back(congruence(net.channel(l, l).adjoint(), lambda[l]));
  return m;
}

CovarianceSet assemble_phi(const Network& net, const CovarianceSet& c, const std::vector<double>& mu) {
  CovarianceSet phi = c;
  for (LinkId l = 0; l < net.num_links(); ++l) {
    for (const auto& ms : net.memberships(l)) {
      if (mu[ms.group] != 0.0) phi[l] += mu[ms.group] * net.group(ms.group).shaping[ms.slot];
    }
  }
  return phi;
}

// One member of a group reduced to scalars. With Q = L L^H, c and d are the
// eigenvalues of L^-1 C L^-H and L^-1 (C + M) L^-H, so that
//   tr(Q Sigma~(mu)) = w * sum_i [ g(c_i) - g(d_i) ],  g(x) = 1 / (mu + x).
struct ReducedLink {
  double weight = 1.0;
  RVector c;
  RVector d;
};

RVector whitened_eigenvalues(const Eigen::LLT<CMatrix>& llt, const CMatrix& x) {
  const auto lower = llt.matrixL();
  const CMatrix y = lower.solve(x);
  const CMatrix z = lower.solve(CMatrix(y.adjoint()));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (z + z.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

ReducedLink reduce_link(double weight, const HermitianMatrix& base, const HermitianMatrix& signal,
                        const HermitianMatrix& q) {
  Eigen::LLT<CMatrix> llt(q.matrix());
  if (llt.info() != Eigen::Success) throw IndefiniteError("solve_mu: shaping matrix is not positive definite");
  ReducedLink r;
  r.weight = weight;
  r.c = whitened_eigenvalues(llt, base.matrix());
  r.d = whitened_eigenvalues(llt, (base + signal).matrix());
  // Round-off around exact zeros would otherwise dominate g at the 0+ probe.
  // The cut sits far below the probe so genuinely small eigenvalues survive.
  const double tol = kRoundoffCut * std::max(1.0, r.d.maxCoeff());
  for (Eigen::Index i = 0; i < r.c.size(); ++i) {
    if (r.c(i) <= tol) r.c(i) = 0.0;
    if (r.d(i) <= tol) r.d(i) = 0.0;
  }
  return r;
}

double group_usage(const std::vector<ReducedLink>& links, double mu) {
  double total = 0.0;
  for (const ReducedLink& r : links) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.c.size(); ++i) {
      const double a = mu + r.c(i);
      const double b = mu + r.d(i);
      s += (a > 0.0 ? 1.0 / a : 0.0) - (b > 0.0 ? 1.0 / b : 0.0);
    }
    total += r.weight * s;
  }
  return total;
}

double largest_d(const std::vector<ReducedLink>& links) {
  double v = 0.0;
  for (const ReducedLink& r : links) {
    if (r.d.size() > 0) v = std::max(v, r.d.maxCoeff());
  }
  return v;
}

struct GroupRoot {
  double mu = 0.0;
  bool binding = false;
  double violation = 0.0;
};

GroupRoot solve_group(const std::vector<ReducedLink>& links, const SolverConfig& cfg, GroupId s) {
  const double eps = cfg.mu_probe_eps * std::max(1.0, largest_d(links));
  const double at_probe = group_usage(links, eps);
  if (at_probe < 1.0) return {0.0, false, 0.0};

  double lo = eps;
  double hi = std::max(1.0, 2.0 * eps);
  for (int k = 0; group_usage(links, hi) >= 1.0; ++k) {
    lo = hi;
    hi *= 2.0;
    if (k > 2000 || !std::isfinite(hi)) {
      throw SolverError("solve_mu: no upper bracket for group " + std::to_string(s) + " (usage at probe " +
                        std::to_string(at_probe) + ")");
    }
  }

  double best_mu = hi;
  double best_err = std::abs(group_usage(links, hi) - 1.0);
  for (std::size_t step = 0; step < cfg.bisection_max_steps; ++step) {
    // Geometric midpoint while the bracket spans decades, arithmetic after.
    const double mid = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const double u = group_usage(links, mid);
    const double err = std::abs(u - 1.0);
    if (err < best_err) {
      best_err = err;
      best_mu = mid;
    }
    if (err <= cfg.bisection_tol) return {mid, true, err};
    if (u >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return {best_mu, true, best_err};
  }
  std::ostringstream msg;
  msg << "solve_mu: bisection for group " << s << " did not converge in " << cfg.bisection_max_steps
      << " steps (bracket [" << lo << ", " << hi << "], |usage - 1| = " << best_err << ")";
  throw SolverError(msg.str());
}

bool groups_disjoint(const Network& net) {
  for (LinkId l = 0; l < net.num_links(); ++l) {
    if (net.memberships(l).size() > 1) return false;
  }
  return true;
}

std::vector<ReducedLink> reduce_group(const Network& net, GroupId s, const CovarianceSet& c,
                                      const CovarianceSet& m, const std::vector<double>& mu) {
  const ConstraintGroup& g = net.group(s);
  std::vector<ReducedLink> out;
  out.reserve(g.members.size());
  for (std::size_t slot = 0; slot < g.members.size(); ++slot) {
    const LinkId l = g.members[slot];
    HermitianMatrix base = c[l];
    for (const auto& ms : net.memberships(l)) {
      if (ms.group != s && mu[ms.group] != 0.0) base += mu[ms.group] * net.group(ms.group).shaping[ms.slot];
    }
    out.push_back(reduce_link(net.link(l).weight, base, m[l], g.shaping[slot]));
  }
  return out;
}

MuSolution solve_mu_impl(const Network& net, const CovarianceSet& c, const CovarianceSet& m,
                         const SolverConfig& cfg) {
  const std::size_t groups = net.num_groups();
  MuSolution sol;
  sol.mu.assign(groups, 0.0);
  sol.binding.assign(groups, false);
  const bool disjoint = groups_disjoint(net);

  for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    ++sol.sweeps;
    sol.max_violation = 0.0;
    for (GroupId s = 0; s < groups; ++s) {
      const GroupRoot root = solve_group(reduce_group(net, s, c, m, sol.mu), cfg, s);
      sol.mu[s] = root.mu;
      sol.binding[s] = root.binding;
      sol.max_violation = std::max(sol.max_violation, root.violation);
    }
    if (disjoint) return sol;

    // Each coordinate was solved against stale neighbours; re-evaluate all.
    double worst = 0.0;
    for (GroupId s = 0; s < groups; ++s) {
      const auto links = reduce_group(net, s, c, m, sol.mu);
      const double u = group_usage(links, sol.mu[s] > 0.0 ? sol.mu[s]
                                                          : cfg.mu_probe_eps * std::max(1.0, largest_d(links)));
      worst = std::max(worst, sol.mu[s] > 0.0 ? std::abs(u - 1.0) : std::max(0.0, u - 1.0));
    }
    sol.max_violation = worst;
    if (worst <= cfg.sweep_tol) return sol;
  }
  std::ostringstream msg;
  msg << "solve_mu: Gauss-Seidel sweeps did not converge after " << cfg.max_sweeps
      << " sweeps (max usage deviation " << sol.max_violation << ")";
  throw SolverError(msg.str());
}

PrimalState saddle_step_impl(const Network& net, const CovarianceSet& lambda, const CovarianceSet& m,
                             const CovarianceSet& phi, double rank_tol) {
  PrimalState out;
  out.sigma.reserve(net.num_links());
  out.omega.reserve(net.num_links());
  for (LinkId l = 0; l < net.num_links(); ++l) {
    const double w = net.link(l).weight;
    const PseudoInverse phi_inv = pseudo_inverse_with_rank(phi[l], rank_tol);
    if (phi_inv.rank < phi[l].dim() && !range_contained(m[l], phi[l], rank_tol)) {
      throw IllPosedError("saddle_step: range(H^H Lambda H) is not inside range(Phi) for link " +
                          std::to_string(l));
    }
    const HermitianMatrix gap =
        inverse_gap(phi_inv.inverse, net.channel(l, l).adjoint() * sqrt_factor(lambda[l]));
    const HermitianMatrix psi_inv = phi_inv.inverse - gap;
    out.sigma.push_back(w * gap);
    out.omega.push_back(w * congruence(net.channel(l, l), psi_inv));
  }
  return out;
}

ScaledState commit(const Network& net, CovarianceSet sigma_tilde, double max_scale) {
  ScaledState out;
  out.tentative_usage = constraint_usage(net, sigma_tilde);
  double lambda = 0.0;
  for (double u : out.tentative_usage) lambda = std::max(lambda, u);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw SolverError("scale_and_commit: scaling factor " + std::to_string(lambda) + " is not positive");
  }
  if (lambda > max_scale) {
    throw SolverError("scale_and_commit: scaling factor " + std::to_string(lambda) + " exceeds 1");
  }
  for (HermitianMatrix& s : sigma_tilde) s *= 1.0 / lambda;
  out.lambda_scale = lambda;
  out.state = make_primal_state(net, std::move(sigma_tilde));
  return out;
}

double min_eig_violation(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return std::max(0.0, -a.min_eigenvalue());
}

KktReport kkt_impl(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                   const CovarianceSet& lambda, const std::vector<double>& mu, const CovarianceSet& phi,
                   double rank_tol) {
  const std::size_t n = net.num_links();
  KktReport r;
  r.stationarity_full.resize(n);
  r.stationarity.resize(n);
  r.multiplier_psd.resize(n);
  r.lambda_residual.resize(n);
  r.lambda_dual_violation.resize(n);

  double sigma_scale = 0.0;
  for (const HermitianMatrix& s : sigma) {
    if (s.dim() > 0) sigma_scale = std::max(sigma_scale, std::abs(s.max_eigenvalue()));
  }
  for (LinkId l = 0; l < n; ++l) {
    const double w = net.link(l).weight;
    const ReceiverInverses inv = receiver_inverses(net, sigma, omega, l, rank_tol);
    const HermitianMatrix g = w * congruence(net.channel(l, l).adjoint(), inv.total_inv);
    const HermitianMatrix diff = g - phi[l];
    r.stationarity_full[l] = diff.norm();
    r.stationarity[l] = sigma_scale > 0.0 ? (diff.matrix() * sigma[l].matrix()).norm() / sigma_scale : 0.0;
    r.multiplier_psd[l] = min_eig_violation(phi[l] - g);
    r.lambda_residual[l] = (w * inv.gap - lambda[l]).norm();
    r.lambda_dual_violation[l] = min_eig_violation(lambda[l]);
  }
  r.usage = constraint_usage(net, sigma);
  const std::size_t groups = net.num_groups();
  r.primal_violation.resize(groups);
  r.mu_dual_violation.resize(groups);
  r.complementary.resize(groups);
  for (GroupId s = 0; s < groups; ++s) {
    r.primal_violation[s] = std::max(0.0, r.usage[s] - 1.0);
    r.mu_dual_violation[s] = std::max(0.0, -mu[s]);
    r.complementary[s] = std::abs(mu[s] * (1.0 - r.usage[s]));
  }
  return r;
}

void check_lambda(const Network& net, const CovarianceSet& lambda) {
  check_receive_shapes(net, lambda);
}

void check_mu(const Network& net, const std::vector<double>& mu) {
  if (mu.size() != net.num_groups()) throw ShapeError("mu must have one entry per constraint group");
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

void validate(const SolverConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("solver config: ") + what);
  };
  require(cfg.max_iters >= 1, "max_iters must be at least 1");
  require(cfg.obj_tol >= 0.0, "obj_tol must be nonnegative");
  require(cfg.obj_window >= 1, "obj_window must be at least 1");
  require(cfg.kkt_tol > 0.0, "kkt_tol must be positive");
  require(cfg.mu_probe_eps > 0.0, "mu_probe_eps must be positive");
  require(cfg.bisection_tol > 0.0, "bisection_tol must be positive");
  require(cfg.bisection_max_steps >= 1, "bisection_max_steps must be at least 1");
  require(cfg.max_sweeps >= 1, "max_sweeps must be at least 1");
  require(cfg.sweep_tol > 0.0, "sweep_tol must be positive");
  require(cfg.rank_tol > 0.0, "rank_tol must be positive");
  require(cfg.monotonic_slack >= 0.0, "monotonic_slack must be nonnegative");
  require(cfg.init_usage > 0.0 && cfg.init_usage <= 1.0, "init_usage must lie in (0, 1]");
}

CovarianceSet dual_lambda(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                          double rank_tol) {
  check_transmit_shapes(net, sigma);
  check_receive_shapes(net, omega);
  CovarianceSet lambda;
  lambda.reserve(net.num_links());
  for (LinkId l = 0; l < net.num_links(); ++l) {
    const ReceiverInverses inv = receiver_inverses(net, sigma, omega, l, rank_tol);
    lambda.push_back(net.link(l).weight * inv.gap);
  }
  return lambda;
}

CovarianceSet dual_phi(const Network& net, const CovarianceSet& lambda, const std::vector<double>& mu) {
  check_lambda(net, lambda);
  check_mu(net, mu);
  return assemble_phi(net, interference_duals(net, lambda), mu);
}

PrimalState saddle_step(const Network& net, const CovarianceSet& lambda, const CovarianceSet& phi,
                        double rank_tol) {
  check_lambda(net, lambda);
  check_transmit_shapes(net, phi);
  return saddle_step_impl(net, lambda, own_signal_duals(net, lambda), phi, rank_tol);
}

MuSolution solve_mu(const Network& net, const CovarianceSet& lambda, const SolverConfig& cfg) {
  validate(cfg);
  check_lambda(net, lambda);
  return solve_mu_impl(net, interference_duals(net, lambda), own_signal_duals(net, lambda), cfg);
}

ScaledState scale_and_commit(const Network& net, CovarianceSet sigma_tilde) {
  return commit(net, std::move(sigma_tilde), 1.0 + kScaleSlack);
}

double KktReport::max_residual() const {
  double m = 0.0;
  for (const auto* v : {&stationarity, &multiplier_psd, &lambda_residual, &primal_violation,
                        &lambda_dual_violation, &mu_dual_violation, &complementary}) {
    m = std::max(m, max_of(*v));
  }
  return m;
}

KktReport kkt_residual(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                       const CovarianceSet& lambda, const std::vector<double>& mu, double rank_tol) {
  check_transmit_shapes(net, sigma);
  check_receive_shapes(net, omega);
  const CovarianceSet phi = dual_phi(net, lambda, mu);
  return kkt_impl(net, sigma, omega, lambda, mu, phi, rank_tol);
}

double IterationTrace::max_decrease() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < records.size(); ++i) {
    worst = std::max(worst, records[i - 1].objective - records[i].objective);
  }
  return records.size() < 2 ? 0.0 : worst;
}

IterateResult iterate(const Network& net, const PrimalState& state, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  check_transmit_shapes(net, state.sigma);
  check_receive_shapes(net, state.omega);

  IterateResult out;
  out.record.objective = objective_F(net, state.sigma, state.omega, cfg.rank_tol);
  out.duals.lambda = dual_lambda(net, state.sigma, state.omega, cfg.rank_tol);
  const CovarianceSet c = interference_duals(net, out.duals.lambda);
  const CovarianceSet m = own_signal_duals(net, out.duals.lambda);

  MuSolution mu = solve_mu_impl(net, c, m, cfg);
  out.duals.phi = assemble_phi(net, c, mu.mu);
  PrimalState tentative;
  try {
    tentative = saddle_step_impl(net, out.duals.lambda, m, out.duals.phi, cfg.rank_tol);
  } catch (const IllPosedError&) {
    if (std::all_of(mu.mu.begin(), mu.mu.end(), [](double x) { return x > 0.0; })) throw;
    for (double& x : mu.mu) x = std::max(x, cfg.mu_probe_eps);
    out.record.mu_fallback = true;
    out.duals.phi = assemble_phi(net, c, mu.mu);
    tentative = saddle_step_impl(net, out.duals.lambda, m, out.duals.phi, cfg.rank_tol);
  }
  out.duals.mu = mu.mu;

  out.kkt = kkt_impl(net, state.sigma, state.omega, out.duals.lambda, out.duals.mu, out.duals.phi, cfg.rank_tol);
  const double max_scale = out.record.mu_fallback ? std::numeric_limits<double>::infinity() : 1.0 + kScaleSlack;
  ScaledState scaled = commit(net, std::move(tentative.sigma), max_scale);

  double comp = 0.0;
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    comp = std::max(comp, std::abs(out.duals.mu[s] * (1.0 - scaled.tentative_usage[s])));
  }
  out.next = std::move(scaled.state);
  out.record.lambda_scale = scaled.lambda_scale;
  out.record.mu = out.duals.mu;
  out.record.kkt_max = out.kkt.max_residual();
  out.record.complementary_slackness = comp;
  out.record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::kkt_converged:
      return "kkt_converged";
    case Termination::objective_stalled:
      return "objective_stalled";
    case Termination::max_iters:
      return "max_iters";
  }
  return "unknown";
}

CovarianceSet default_initialization(const Network& net, const SolverConfig& cfg) {
  // Usage of each group if every Sigma_l were the identity.
  std::vector<double> unit(net.num_groups(), 0.0);
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    for (const HermitianMatrix& q : net.group(s).shaping) unit[s] += q.trace();
  }
  CovarianceSet sigma;
  sigma.reserve(net.num_links());
  for (LinkId l = 0; l < net.num_links(); ++l) {
    double worst = 0.0;
    for (const auto& ms : net.memberships(l)) worst = std::max(worst, unit[ms.group]);
    sigma.push_back(HermitianMatrix::scaled_identity(net.link(l).tx_antennas, cfg.init_usage / worst));
  }
  return sigma;
}

SolveResult solve(const Network& net, const SolverConfig& cfg, std::optional<CovarianceSet> initial) {
  validate(cfg);
  CovarianceSet sigma = initial ? std::move(*initial) : default_initialization(net, cfg);
  check_transmit_shapes(net, sigma);
  for (LinkId l = 0; l < net.num_links(); ++l) {
    if (!sigma[l].is_psd(cfg.rank_tol)) {
      throw ConfigError("solve: initial covariance of link " + std::to_string(l) + " is not PSD");
    }
  }
  for (double u : constraint_usage(net, sigma)) {
    if (u > 1.0 + 1e-9) throw ConfigError("solve: initial covariances violate a power constraint");
  }

  SolveResult result;
  PrimalState state = make_primal_state(net, std::move(sigma));
  std::size_t stalled = 0;
  for (std::size_t n = 0;; ++n) {
    IterateResult step = iterate(net, state, cfg);
    step.record.iter = n;
    const double f = step.record.objective;
    if (!result.trace.empty()) {
      const double prev = result.trace.records.back().objective;
      if (f < prev - cfg.monotonic_slack) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve: objective decreased at iteration " << n << " from " << prev << " to " << f
            << " (drop " << prev - f << ", slack " << cfg.monotonic_slack << ", lambda "
            << result.trace.records.back().lambda_scale << ")";
        throw SolverError(msg.str());
      }
      const double rel = std::abs(f - prev) / std::max(1.0, std::abs(prev));
      stalled = (cfg.obj_tol > 0.0 && rel < cfg.obj_tol) ? stalled + 1 : 0;
    }
    result.trace.records.push_back(step.record);

    std::optional<Termination> reason;
    if (step.record.kkt_max < cfg.kkt_tol) {
      reason = Termination::kkt_converged;
    } else if (cfg.obj_tol > 0.0 && stalled >= cfg.obj_window) {
      reason = Termination::objective_stalled;
    } else if (n + 1 >= cfg.max_iters) {
      reason = Termination::max_iters;
    }
    if (reason) {
      result.reason = *reason;
      result.iterations = n + 1;
      result.objective = f;
      result.dual = std::move(step.duals);
      result.kkt = std::move(step.kkt);
      result.rates = achievable_rates(net, state.sigma, cfg.rank_tol);
      result.primal = std::move(state);
      return result;
    }
    state = std::move(step.next);
  }
}

SaddleResidual saddle_equation_residual(const Network& net, const PrimalState& saddle,
                                        const CovarianceSet& lambda, const CovarianceSet& phi,
                                        double rank_tol) {
  check_transmit_shapes(net, saddle.sigma);
  check_receive_shapes(net, saddle.omega);
  check_lambda(net, lambda);
  check_transmit_shapes(net, phi);
  SaddleResidual r;
  for (LinkId l = 0; l < net.num_links(); ++l) {
    const CMatrix& h = net.channel(l, l);
    const double w = net.link(l).weight;
    const ReceiverInverses inv = receiver_inverses(net, saddle.sigma, saddle.omega, l, rank_tol);
    const HermitianMatrix pv = range_projector(hermitize(h.adjoint() * h), rank_tol);
    const HermitianMatrix pu = range_projector(hermitize(h * h.adjoint()), rank_tol);
    const HermitianMatrix g = w * congruence(h.adjoint(), inv.total_inv);
    const HermitianMatrix s = congruence(pv.matrix(), g - phi[l]);
    const HermitianMatrix o = congruence(pu.matrix(), w * (inv.omega_inv - inv.total_inv) - lambda[l]);
    r.sigma_condition = std::max(r.sigma_condition, s.norm());
    r.omega_condition = std::max(r.omega_condition, o.norm());
  }
  return r;
}

}  // namespace wsr
