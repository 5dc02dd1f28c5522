#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "wsr/network_io.hpp"

using namespace wsr;
using namespace wsr::test;

namespace {

CovarianceSet zeros(const Network& net) {
  CovarianceSet s;
  for (const Link& l : net.links()) s.push_back(HermitianMatrix::zero(l.tx_antennas));
  return s;
}

CovarianceSet random_sigma(Rng& rng, const Network& net) {
  CovarianceSet s;
  for (const Link& l : net.links()) {
    s.push_back(random_psd(rng, l.tx_antennas, uniform_int(rng, 0, static_cast<int>(l.tx_antennas))));
  }
  return s;
}

Scenario small_scenario(double alpha, ConstraintMode mode) {
  Scenario sc;
  sc.links = 3;
  sc.tx_antennas = 2;
  sc.rx_antennas = 3;
  sc.interference_scale = alpha;
  sc.mode = mode;
  return sc;
}

}  // namespace

TEST_CASE("interference_plus_noise examples") {
  Rng rng(1);
  const Network net = random_network(4, small_scenario(1.0, ConstraintMode::total));
  for (const HermitianMatrix& o : interference_plus_noise(net, zeros(net))) {
    CHECK(max_abs_diff(o.matrix(), CMatrix::Identity(o.dim(), o.dim())) == 0.0);
  }

  const Network single = siso_network({{Complex(1.5, 0.3)}}, {1.0}, 10.0);
  const CovarianceSet one{HermitianMatrix::scaled_identity(1, 7.0)};
  CHECK(interference_plus_noise(single, one)[0](0, 0) == Complex(1.0, 0.0));

  // h_12 = 2, Sigma_2 = 3 gives Omega_1 = 1 + 4 * 3.
  const Network two = siso_network({{1.0, 2.0}, {0.5, 1.0}}, {1.0, 1.0}, 10.0);
  const CovarianceSet s{HermitianMatrix::scaled_identity(1, 1.0), HermitianMatrix::scaled_identity(1, 3.0)};
  const CovarianceSet o = interference_plus_noise(two, s);
  CHECK(o[0](0, 0).real() == doctest::Approx(13.0));
  CHECK(o[1](0, 0).real() == doctest::Approx(1.0 + 0.25 * 1.0));

  CHECK_THROWS_AS(interference_plus_noise(two, {HermitianMatrix::identity(1)}), ShapeError);
  CHECK_THROWS_AS(interference_plus_noise(two, {HermitianMatrix::identity(2), HermitianMatrix::identity(1)}),
                  ShapeError);
}

TEST_CASE("property: Omega is at least the identity") {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const Network net = random_network(t, small_scenario(uniform_real(rng, 0.0, 5.0), ConstraintMode::total));
    for (const HermitianMatrix& o : interference_plus_noise(net, random_sigma(rng, net))) {
      CHECK(o.min_eigenvalue() >= 1.0 - 1e-10);
    }
  }
}

TEST_CASE("achievable_rate examples") {
  const Network one = siso_network({{1.0}}, {1.0}, 10.0);
  CHECK(achievable_rate(one, {HermitianMatrix::scaled_identity(1, 3.0)}, 0) == doctest::Approx(std::log(4.0)));
  CHECK(achievable_rate(one, {HermitianMatrix::zero(1)}, 0) == 0.0);

  // Dense-determinant oracle on a 2-link 2x2 MIMO network.
  Rng rng(3);
  std::vector<Link> links{{2, 2, 0.7}, {2, 2, 0.9}};
  std::vector<std::vector<CMatrix>> ch(2, std::vector<CMatrix>(2));
  for (auto& row : ch) {
    for (auto& h : row) h = random_complex(rng, 2, 2);
  }
  const Network net(links, ch, total_power_groups(links, 5.0));
  for (int t = 0; t < 20; ++t) {
    const CovarianceSet s{random_pd(rng, 2), random_pd(rng, 2)};
    for (LinkId l = 0; l < 2; ++l) {
      const LinkId k = 1 - l;
      const CMatrix omega = CMatrix::Identity(2, 2) + ch[l][k] * s[k].matrix() * ch[l][k].adjoint();
      const CMatrix total = omega + ch[l][l] * s[l].matrix() * ch[l][l].adjoint();
      CHECK(achievable_rate(net, s, l) == doctest::Approx(logabsdet(total) - logabsdet(omega)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: own-power monotonicity of the rate") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const Network net = random_network(100 + t, small_scenario(1.0, ConstraintMode::total));
    CovarianceSet s = random_sigma(rng, net);
    const LinkId l = static_cast<LinkId>(uniform_int(rng, 0, 2));
    const double before = achievable_rate(net, s, l);
    s[l] += random_psd(rng, 2, uniform_int(rng, 0, 2));
    CHECK(achievable_rate(net, s, l) >= before - 1e-10);
  }
}

TEST_CASE("weighted_sum_rate examples") {
  const Network net = random_network(5, small_scenario(1.0, ConstraintMode::total));
  CHECK(weighted_sum_rate(net, zeros(net)) == 0.0);

  const Network one = siso_network({{1.0}}, {2.0}, 10.0);
  CHECK(weighted_sum_rate(one, {HermitianMatrix::identity(1)}) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("property: weighted sum-rate equals F at the consistent Omega") {
  Rng rng(6);
  for (int t = 0; t < 40; ++t) {
    const Network net = random_network(200 + t, small_scenario(uniform_real(rng, 0.0, 3.0), ConstraintMode::total));
    const CovarianceSet s = random_sigma(rng, net);
    const double wsr = weighted_sum_rate(net, s);
    CHECK(wsr >= 0.0);
    CHECK(std::abs(wsr - objective_F(net, s, interference_plus_noise(net, s))) < 1e-10);
  }
}

TEST_CASE("objective_F examples") {
  Rng rng(7);
  const Network net = random_network(6, small_scenario(1.0, ConstraintMode::total));
  CovarianceSet omega;
  for (const Link& l : net.links()) omega.push_back(random_pd(rng, l.rx_antennas, 0.5, 3.0));
  CHECK(objective_F(net, zeros(net), omega) == 0.0);
}

TEST_CASE("objective_F is decreasing and convex along PSD directions in Omega") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Network net = random_network(300 + t, small_scenario(1.0, ConstraintMode::total));
    const CovarianceSet s = random_sigma(rng, net);
    const CovarianceSet omega0 = interference_plus_noise(net, s);
    CovarianceSet dir;
    for (const Link& l : net.links()) dir.push_back(random_psd(rng, l.rx_antennas, 2));
    auto along = [&](double step) {
      CovarianceSet o = omega0;
      for (std::size_t l = 0; l < o.size(); ++l) o[l] += step * dir[l];
      return objective_F(net, s, o);
    };
    // Fine line search over t in [0, 2]: nonincreasing with nonnegative second differences.
    const int steps = 400;
    const double h = 2.0 / steps;
    double prev = along(0.0), cur = along(h);
    CHECK(cur <= prev + 1e-12);
    for (int i = 2; i <= steps; ++i) {
      const double next = along(i * h);
      CHECK(next <= cur + 1e-12);
      CHECK(next - 2.0 * cur + prev >= -1e-11);
      prev = cur;
      cur = next;
    }
  }
}

TEST_CASE("constraint_usage examples") {
  const Network net = random_network(9, small_scenario(1.0, ConstraintMode::total));
  CHECK(constraint_usage(net, zeros(net)) == std::vector<double>{0.0});

  // Equal split of P_T saturates the total-power group.
  const double pt = net.scenario ? net.scenario->total_power : 10.0;
  CovarianceSet equal;
  for (const Link& l : net.links()) {
    equal.push_back(HermitianMatrix::scaled_identity(l.tx_antennas, pt / 3.0 / static_cast<double>(l.tx_antennas)));
  }
  CHECK(constraint_usage(net, equal)[0] == doctest::Approx(1.0));

  const Network pl = random_network(9, small_scenario(1.0, ConstraintMode::perlink));
  CovarianceSet beams;
  for (LinkId l = 0; l < pl.num_links(); ++l) {
    const double budget = 1.0 / pl.group(l).shaping[0](0, 0).real();
    RVector d = RVector::Zero(2);
    d(0) = budget;
    beams.push_back(HermitianMatrix::diagonal(d));
  }
  for (double u : constraint_usage(pl, beams)) CHECK(u == doctest::Approx(1.0));
}

TEST_CASE("random_network default ensemble") {
  Scenario sc;  // defaults: L = 10, n = 3, m = 4, weights on [0.5, 1], P_T = 10
  const Network net = random_network(7, sc);
  CHECK(net.num_links() == 10);
  CHECK(net.num_groups() == 1);
  for (LinkId l = 0; l < 10; ++l) {
    CHECK(net.link(l).tx_antennas == 3);
    CHECK(net.link(l).rx_antennas == 4);
    CHECK(net.link(l).weight >= 0.5);
    CHECK(net.link(l).weight <= 1.0);
    CHECK(net.group(0).shaping[l].matrix().isApprox(CMatrix::Identity(3, 3) / 10.0));
  }

  sc.mode = ConstraintMode::perlink;
  const Network pl = random_network(7, sc);
  CHECK(pl.num_groups() == 10);
  for (const ConstraintGroup& g : pl.groups()) {
    const double budget = 1.0 / g.shaping[0](0, 0).real();
    CHECK(budget == doctest::Approx(std::round(budget)));
    CHECK(budget >= 1.0);
    CHECK(budget <= 10.0);
  }
}

TEST_CASE("random_network: channel statistics, alpha scaling and determinism") {
  Scenario sc;
  const Network a = random_network(3, sc);
  const Network b = random_network(3, sc);
  CHECK(network_to_string(a) == network_to_string(b));
  CHECK(network_to_string(a) != network_to_string(random_network(4, sc)));

  for (double alpha : {0.1, 5.0}) {
    sc.interference_scale = alpha;
    const Network s = random_network(3, sc);
    for (LinkId l = 0; l < 10; ++l) {
      for (LinkId k = 0; k < 10; ++k) {
        const CMatrix expected = (k == l ? 1.0 : alpha) * a.channel(l, k);
        CHECK(max_abs_diff(s.channel(l, k), expected) < 1e-14);
      }
    }
  }

  sc.interference_scale = 0.0;
  const Network iso = random_network(3, sc);
  CHECK_FALSE(iso.has_interference());
  CHECK(a.has_interference());

  // Unit variance per complex entry over many draws.
  double power = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Network n = random_network(seed, Scenario{});
    for (LinkId l = 0; l < 10; ++l) {
      power += n.channel(l, l).squaredNorm();
      count += 12;
    }
  }
  CHECK(power / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("random_network: grouped mode overlaps cells with per-link budgets") {
  Scenario sc;
  sc.mode = ConstraintMode::grouped;
  sc.cells = 2;
  const Network net = random_network(1, sc);
  CHECK(net.num_groups() == 12);
  for (LinkId l = 0; l < net.num_links(); ++l) CHECK(net.memberships(l).size() == 2);
}

TEST_CASE("random_network rejects invalid scenarios") {
  Scenario sc;
  sc.links = 0;
  CHECK_THROWS_AS(random_network(1, sc), ConfigError);
  sc = Scenario{};
  sc.weight_lo = 0.0;
  CHECK_THROWS_AS(random_network(1, sc), ConfigError);
  sc = Scenario{};
  sc.interference_scale = -1.0;
  CHECK_THROWS_AS(random_network(1, sc), ConfigError);
  sc = Scenario{};
  sc.tx_antennas = 0;
  CHECK_THROWS(random_network(1, sc));
}

TEST_CASE("Network validates shapes, weights and coverage") {
  // Channels are m_l x n_k: receiver of l by transmitter of k.
  std::vector<Link> links{{2, 3, 1.0}, {1, 2, 1.0}};
  std::vector<std::vector<CMatrix>> ch{{CMatrix::Zero(3, 2), CMatrix::Zero(3, 1)},
                                       {CMatrix::Zero(2, 2), CMatrix::Zero(2, 1)}};
  const Network ok(links, ch, total_power_groups(links, 1.0));
  CHECK(ok.channel(0, 1).rows() == 3);
  CHECK(ok.channel(0, 1).cols() == 1);

  auto bad = ch;
  bad[0][1] = CMatrix::Zero(3, 2);  // m_0 x n_0 instead of m_0 x n_1
  CHECK_THROWS_AS(Network(links, bad, total_power_groups(links, 1.0)), ShapeError);

  auto neg = links;
  neg[1].weight = 0.0;
  CHECK_THROWS_AS(Network(neg, ch, total_power_groups(neg, 1.0)), ConfigError);

  ConstraintGroup g0{{0}, {HermitianMatrix::identity(2)}};
  CHECK_THROWS_AS(Network(links, ch, {g0}), ConfigError);

  ConstraintGroup indefinite{{0, 1}, {HermitianMatrix::identity(2), HermitianMatrix::zero(1)}};
  CHECK_THROWS_AS(Network(links, ch, {indefinite}), ConfigError);
}

TEST_CASE("network text format round-trips exactly") {
  for (ConstraintMode mode : {ConstraintMode::total, ConstraintMode::perlink, ConstraintMode::grouped}) {
    Scenario sc;
    sc.mode = mode;
    const Network net = random_network(17, sc);
    const std::string text = network_to_string(net);
    const Network back = network_from_string(text);
    CHECK(network_to_string(back) == text);
    REQUIRE(back.seed);
    CHECK(*back.seed == 17);
    REQUIRE(back.scenario);
    CHECK(back.scenario->mode == mode);
    for (LinkId l = 0; l < net.num_links(); ++l) {
      CHECK(back.link(l).weight == net.link(l).weight);
      for (LinkId k = 0; k < net.num_links(); ++k) CHECK(back.channel(l, k) == net.channel(l, k));
    }
  }

  const auto path = std::filesystem::temp_directory_path() / "wsr_roundtrip_test.txt";
  const Network net = random_network(2, Scenario{});
  save_network(path, net);
  CHECK(network_to_string(load_network(path)) == network_to_string(net));
  std::filesystem::remove(path);
}

TEST_CASE("network reader rejects malformed documents") {
  const std::string good = network_to_string(siso_network({{1.0}}, {1.0}, 2.0));
  CHECK_NOTHROW(network_from_string(good));
  CHECK_THROWS_AS(network_from_string("format other 1\n"), ConfigError);
  CHECK_THROWS_AS(network_from_string(""), ConfigError);

  std::string truncated = good.substr(0, good.find("groups"));
  CHECK_THROWS_AS(network_from_string(truncated), ConfigError);

  std::string bad_number = good;
  bad_number.replace(bad_number.find("(1,0)"), 5, "(1,x)");
  CHECK_THROWS_AS(network_from_string(bad_number), ConfigError);

  CHECK_THROWS_AS(load_network("/nonexistent/wsr/file.txt"), ConfigError);
}
