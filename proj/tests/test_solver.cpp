#include "doctest.h"

#include <cmath>

#include "support.hpp"

using namespace wsr;
using namespace wsr::test;

namespace {

Scenario small_scenario(double alpha, ConstraintMode mode, std::size_t links = 3) {
  Scenario sc;
  sc.links = links;
  sc.tx_antennas = 2;
  sc.rx_antennas = 2;
  sc.interference_scale = alpha;
  sc.mode = mode;
  return sc;
}

CovarianceSet scalar_set(std::initializer_list<double> values) {
  CovarianceSet s;
  for (double v : values) s.push_back(HermitianMatrix::scaled_identity(1, v));
  return s;
}

// mu for a single SISO link with gain g = |h|^2 lambda and budget P, from
// P phi^2 + P g phi - w g = 0 with phi = mu / P.
double siso_mu(double w, double g, double p) {
  const double phi = (-g + std::sqrt(g * g + 4.0 * w * g / p)) / 2.0;
  return p * phi;
}

}  // namespace

TEST_CASE("validate rejects bad solver configs") {
  CHECK_NOTHROW(validate(SolverConfig{}));
  SolverConfig c;
  c.max_iters = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = SolverConfig{};
  c.mu_probe_eps = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = SolverConfig{};
  c.init_usage = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = SolverConfig{};
  c.obj_tol = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("dual_lambda examples") {
  const Network one = siso_network({{2.0}}, {1.0}, 10.0);
  // w (1/1 - 1/(1 + 4 * 1)) = 0.8
  CHECK(dual_lambda(one, scalar_set({1.0}), scalar_set({1.0}))[0](0, 0).real() == doctest::Approx(0.8));
  CHECK(dual_lambda(one, scalar_set({0.0}), scalar_set({1.0}))[0].norm() == 0.0);
}

TEST_CASE("dual_lambda is minus the gradient of F in Omega") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const Network net = random_network(t, small_scenario(1.0, ConstraintMode::total));
    CovarianceSet sigma;
    for (LinkId l = 0; l < net.num_links(); ++l) sigma.push_back(random_pd(rng, 2));
    const CovarianceSet omega = interference_plus_noise(net, sigma);
    const CovarianceSet lambda = dual_lambda(net, sigma, omega);
    const LinkId l = static_cast<LinkId>(uniform_int(rng, 0, 2));
    const HermitianMatrix dir = with_spectrum(rng, RVector::Random(2));
    const double h = 1e-5;
    CovarianceSet up = omega, down = omega;
    up[l] += h * dir;
    down[l] -= h * dir;
    const double fd = (objective_F(net, sigma, up) - objective_F(net, sigma, down)) / (2.0 * h);
    const double analytic = -(lambda[l].matrix() * dir.matrix()).trace().real();
    CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    CHECK(lambda[l].is_psd());
  }
}

TEST_CASE("dual_phi examples") {
  const Network one = siso_network({{2.0}}, {1.0}, 4.0);
  CHECK(dual_phi(one, scalar_set({0.3}), {2.0})[0](0, 0).real() == doctest::Approx(0.5));

  // Phi_1 = mu / P + |h_21|^2 Lambda_2
  const Network two = siso_network({{1.0, 0.5}, {3.0, 1.0}}, {1.0, 1.0}, 2.0);
  const CovarianceSet phi = dual_phi(two, scalar_set({0.2, 0.1}), {1.0});
  CHECK(phi[0](0, 0).real() == doctest::Approx(0.5 + 9.0 * 0.1));
  CHECK(phi[1](0, 0).real() == doctest::Approx(0.5 + 0.25 * 0.2));

  CHECK_THROWS_AS(dual_phi(two, scalar_set({0.2, 0.1}), {1.0, 2.0}), ShapeError);
}

TEST_CASE("saddle_step: SISO closed form") {
  const double h = 1.5, lam = 0.4, phi = 0.25, w = 0.7;
  const Network one = siso_network({{h}}, {w}, 10.0);
  const PrimalState s = saddle_step(one, scalar_set({lam}), scalar_set({phi}));
  const double psi = phi + h * h * lam;
  CHECK(s.sigma[0](0, 0).real() == doctest::Approx(w * (1.0 / phi - 1.0 / psi)));
  CHECK(s.omega[0](0, 0).real() == doctest::Approx(w * h * h / psi));
}

TEST_CASE("saddle_step: singular Phi outside the signal range is ill-posed") {
  const Network one = siso_network({{1.0}}, {1.0}, 10.0);
  CHECK_THROWS_AS(saddle_step(one, scalar_set({0.5}), scalar_set({0.0})), IllPosedError);
  // Lambda = 0 keeps the problem well posed and gives Sigma = 0.
  const PrimalState s = saddle_step(one, scalar_set({0.0}), scalar_set({0.0}));
  CHECK(s.sigma[0].norm() == 0.0);
}

TEST_CASE("saddle_step satisfies the saddle-point equations") {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const std::size_t links = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    const Eigen::Index n = uniform_int(rng, 1, 3);
    const Network net = random_square_network(rng, links, n, t % 2 == 1);
    CovarianceSet lambda;
    for (LinkId l = 0; l < links; ++l) lambda.push_back(random_psd(rng, n, uniform_int(rng, 0, static_cast<int>(n))));
    std::vector<double> mu(net.num_groups());
    for (double& m : mu) m = uniform_real(rng, 0.05, 2.0);
    const CovarianceSet phi = dual_phi(net, lambda, mu);
    const PrimalState s = saddle_step(net, lambda, phi);
    for (LinkId l = 0; l < links; ++l) {
      CHECK(s.sigma[l].min_eigenvalue() >= -1e-9);
      CHECK(s.omega[l].min_eigenvalue() >= -1e-9);
    }
    const SaddleResidual r = saddle_equation_residual(net, s, lambda, phi);
    CHECK(r.sigma_condition < 1e-8);
    CHECK(r.omega_condition < 1e-8);
  }
}

TEST_CASE("solve_mu: SISO quadratic oracle") {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    const double h = uniform_real(rng, 0.2, 3.0), w = uniform_real(rng, 0.5, 1.0), p = uniform_real(rng, 0.5, 20.0);
    const double lam = uniform_real(rng, 0.01, 1.0);
    const Network one = siso_network({{h}}, {w}, p);
    const MuSolution sol = solve_mu(one, scalar_set({lam}), SolverConfig{});
    REQUIRE(sol.mu.size() == 1);
    CHECK(sol.binding[0]);
    CHECK(sol.mu[0] == doctest::Approx(siso_mu(w, h * h * lam, p)).epsilon(1e-9));
  }
}

TEST_CASE("solve_mu: zero Lambda leaves every group slack") {
  const Network net = random_network(3, small_scenario(1.0, ConstraintMode::perlink));
  CovarianceSet lambda(net.num_links(), HermitianMatrix::zero(2));
  const MuSolution sol = solve_mu(net, lambda, SolverConfig{});
  for (std::size_t s = 0; s < net.num_groups(); ++s) {
    CHECK(sol.mu[s] == 0.0);
    CHECK_FALSE(sol.binding[s]);
  }
}

TEST_CASE("solve_mu: binding groups use the whole budget") {
  Rng rng(14);
  for (ConstraintMode mode : {ConstraintMode::total, ConstraintMode::perlink, ConstraintMode::grouped}) {
    for (int t = 0; t < 10; ++t) {
      Scenario sc = small_scenario(uniform_real(rng, 0.0, 2.0), mode, 4);
      const Network net = random_network(50 + t, sc);
      const PrimalState st = make_primal_state(net, default_initialization(net, SolverConfig{}));
      const CovarianceSet lambda = dual_lambda(net, st.sigma, st.omega);
      const MuSolution sol = solve_mu(net, lambda, SolverConfig{});
      const CovarianceSet phi = dual_phi(net, lambda, sol.mu);
      const PrimalState tentative = saddle_step(net, lambda, phi);
      const std::vector<double> usage = constraint_usage(net, tentative.sigma);
      for (std::size_t s = 0; s < net.num_groups(); ++s) {
        CHECK(sol.mu[s] >= 0.0);
        if (sol.binding[s]) {
          CHECK(usage[s] == doctest::Approx(1.0).epsilon(1e-8));
        } else {
          CHECK(sol.mu[s] == 0.0);
          CHECK(usage[s] <= 1.0 + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("scale_and_commit examples and errors") {
  const Network two = siso_network({{1.0, 0.5}, {0.5, 1.0}}, {1.0, 1.0}, 4.0);
  const ScaledState s = scale_and_commit(two, scalar_set({1.0, 1.0}));
  CHECK(s.lambda_scale == doctest::Approx(0.5));
  CHECK(s.state.sigma[0](0, 0).real() == doctest::Approx(2.0));
  CHECK(s.state.omega[0](0, 0).real() == doctest::Approx(1.0 + 0.25 * 2.0));

  CHECK_THROWS_AS(scale_and_commit(two, scalar_set({0.0, 0.0})), SolverError);
  CHECK_THROWS_AS(scale_and_commit(two, scalar_set({3.0, 3.0})), SolverError);
  CHECK_THROWS_AS(scale_and_commit(two, scalar_set({1.0})), ShapeError);
}

TEST_CASE("kkt_residual examples") {
  // Single SISO link at full power: Lambda and mu from the closed form.
  const double h = 1.0, p = 10.0, w = 1.0;
  const Network one = siso_network({{h}}, {w}, p);
  const CovarianceSet sigma = scalar_set({p});
  const CovarianceSet omega = scalar_set({1.0});
  const CovarianceSet lambda = dual_lambda(one, sigma, omega);
  // Stationarity: w h^2 / (1 + h^2 P) = mu / P.
  const double mu = p * w * h * h / (1.0 + h * h * p);
  const KktReport good = kkt_residual(one, sigma, omega, lambda, {mu});
  CHECK(good.max_residual() < 1e-12);

  const KktReport bad_mu = kkt_residual(one, sigma, omega, lambda, {2.0 * mu});
  CHECK(bad_mu.stationarity[0] > 0.01);

  const KktReport over = kkt_residual(one, scalar_set({2.0 * p}), omega, lambda, {mu});
  CHECK(over.primal_violation[0] == doctest::Approx(1.0));

  const KktReport negative = kkt_residual(one, sigma, omega, lambda, {-mu});
  CHECK(negative.mu_dual_violation[0] == doctest::Approx(mu));

  const KktReport half = kkt_residual(one, scalar_set({p / 2.0}), omega, lambda, {mu});
  CHECK(half.complementary[0] == doctest::Approx(mu / 2.0));
}

TEST_CASE("default_initialization uses the budget evenly") {
  for (ConstraintMode mode : {ConstraintMode::total, ConstraintMode::perlink}) {
    const Network net = random_network(2, small_scenario(1.0, mode));
    const CovarianceSet s = default_initialization(net, SolverConfig{});
    for (double u : constraint_usage(net, s)) CHECK(u == doctest::Approx(0.9));
  }
  Scenario sc = small_scenario(1.0, ConstraintMode::grouped, 4);
  const Network net = random_network(2, sc);
  for (double u : constraint_usage(net, default_initialization(net, SolverConfig{}))) CHECK(u <= 0.9 + 1e-12);
}

TEST_CASE("solve: single SISO link reaches log(1 + P)") {
  const Network one = siso_network({{1.0}}, {1.0}, 10.0);
  const SolveResult r = solve(one);
  CHECK(r.objective == doctest::Approx(std::log(11.0)).epsilon(1e-9));
  CHECK(r.reason == Termination::kkt_converged);
  CHECK(r.primal.sigma[0](0, 0).real() == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("solve: isolated links decouple into single-link water-filling") {
  // Two links without interference under a total budget: the optimum splits
  // power so that w_l g_l / (1 + g_l p_l) is equal, the water-filling condition.
  const double g1 = 2.0, g2 = 1.0, p = 3.0;
  const Network two = siso_network({{std::sqrt(g1), 0.0}, {0.0, std::sqrt(g2)}}, {1.0, 1.0}, p);
  const SolveResult r = solve(two);
  // Water level nu with 1/nu - 1/g1 + 1/nu - 1/g2 = p.
  const double nu_inv = (p + 1.0 / g1 + 1.0 / g2) / 2.0;
  const double p1 = std::max(0.0, nu_inv - 1.0 / g1), p2 = std::max(0.0, nu_inv - 1.0 / g2);
  CHECK(r.primal.sigma[0](0, 0).real() == doctest::Approx(p1).epsilon(1e-7));
  CHECK(r.primal.sigma[1](0, 0).real() == doctest::Approx(p2).epsilon(1e-7));
}

TEST_CASE("solve: a link started at vanishing power recovers its share") {
  const double g1 = 2.0, g2 = 1.0, p = 3.0;
  const Network two = siso_network({{std::sqrt(g1), 0.0}, {0.0, std::sqrt(g2)}}, {1.0, 1.0}, p);
  // The objective barely moves while the link regrows, so stop on KKT only.
  SolverConfig cfg;
  cfg.obj_tol = 0.0;
  const SolveResult r = solve(two, cfg, scalar_set({2.9, 1e-30}));
  const double nu_inv = (p + 1.0 / g1 + 1.0 / g2) / 2.0;
  CHECK(r.primal.sigma[1](0, 0).real() == doctest::Approx(nu_inv - 1.0 / g2).epsilon(1e-6));
  CHECK(r.reason == Termination::kkt_converged);
}

TEST_CASE("solve rejects infeasible or indefinite starting points") {
  const Network one = siso_network({{1.0}}, {1.0}, 10.0);
  CHECK_THROWS_AS(solve(one, {}, scalar_set({20.0})), ConfigError);
  CHECK_THROWS_AS(solve(one, {}, scalar_set({-1.0})), ConfigError);
  CHECK_THROWS(solve(one, {}, CovarianceSet{}));
}

TEST_CASE("property: iterates are feasible, PSD and monotone") {
  Rng rng(15);
  for (int t = 0; t < 12; ++t) {
    const ConstraintMode mode = t % 3 == 0 ? ConstraintMode::total
                              : t % 3 == 1 ? ConstraintMode::perlink
                                           : ConstraintMode::grouped;
    const Network net = random_network(400 + t, small_scenario(uniform_real(rng, 0.0, 3.0), mode, 4));
    SolverConfig cfg;
    cfg.max_iters = 60;
    PrimalState st = make_primal_state(net, default_initialization(net, cfg));
    double prev = weighted_sum_rate(net, st.sigma);
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
      const IterateResult r = iterate(net, st, cfg);
      st = r.next;
      for (const HermitianMatrix& s : st.sigma) CHECK(s.min_eigenvalue() >= -1e-9);
      for (double u : constraint_usage(net, st.sigma)) CHECK(u <= 1.0 + 1e-9);
      const double f = weighted_sum_rate(net, st.sigma);
      CHECK(f >= prev - 1e-10);
      prev = f;
    }
  }
}

TEST_CASE("property: a converged point is a fixed point of the update") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Network net = random_network(seed, small_scenario(0.5, ConstraintMode::total));
    SolverConfig cfg;
    cfg.obj_tol = 0.0;
    cfg.kkt_tol = 1e-10;
    const SolveResult r = solve(net, cfg);
    REQUIRE(r.reason == Termination::kkt_converged);
    const IterateResult again = iterate(net, r.primal, cfg);
    for (LinkId l = 0; l < net.num_links(); ++l) {
      CHECK(max_abs_diff(again.next.sigma[l].matrix(), r.primal.sigma[l].matrix()) < 1e-6);
    }
  }
}

TEST_CASE("solve: trace records are consistent") {
  const Network net = random_network(8, small_scenario(1.0, ConstraintMode::perlink));
  const SolveResult r = solve(net);
  REQUIRE_FALSE(r.trace.empty());
  CHECK(r.iterations == r.trace.size());
  CHECK(r.trace.nondecreasing(1e-10));
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r.trace.records[i].iter == i);
    CHECK(r.trace.records[i].mu.size() == net.num_groups());
    CHECK(r.trace.records[i].lambda_scale > 0.0);
    CHECK(r.trace.records[i].lambda_scale <= 1.0 + 1e-8);
  }
  CHECK(r.objective == doctest::Approx(r.trace.records.back().objective));
  CHECK(r.objective == doctest::Approx(weighted_sum_rate(net, r.primal.sigma)));
  CHECK(r.rates.size() == net.num_links());
}

TEST_CASE("solve is deterministic") {
  const Network net = random_network(9, small_scenario(1.0, ConstraintMode::total));
  const SolveResult a = solve(net);
  const SolveResult b = solve(net);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}
