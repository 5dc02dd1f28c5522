#include "wsr/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace wsr {

const char* to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::total:
      return "total";
    case ConstraintMode::perlink:
      return "perlink";
    case ConstraintMode::grouped:
      return "grouped";
  }
  return "?";
}

ConstraintMode constraint_mode_from_string(const std::string& text) {
  if (text == "total") return ConstraintMode::total;
  if (text == "perlink") return ConstraintMode::perlink;
  if (text == "grouped") return ConstraintMode::grouped;
  throw ConfigError("unknown constraint mode '" + text + "' (expected total, perlink or grouped)");
}

void validate(const Scenario& sc) {
  if (sc.links == 0) throw ConfigError("scenario: links must be positive");
  if (sc.tx_antennas <= 0 || sc.rx_antennas <= 0) throw ConfigError("scenario: antenna counts must be positive");
  if (!(sc.interference_scale >= 0.0) || !std::isfinite(sc.interference_scale)) {
    throw ConfigError("scenario: interference_scale must be finite and >= 0");
  }
  if (!(sc.weight_lo > 0.0) || !(sc.weight_hi >= sc.weight_lo) || !std::isfinite(sc.weight_hi)) {
    throw ConfigError("scenario: weight range must satisfy 0 < lo <= hi");
  }
  if (!(sc.total_power > 0.0) || !std::isfinite(sc.total_power)) throw ConfigError("scenario: total_power must be positive");
  if (sc.budget_min <= 0 || sc.budget_max < sc.budget_min) throw ConfigError("scenario: budgets must satisfy 0 < min <= max");
  if (sc.mode == ConstraintMode::grouped) {
    if (sc.cells == 0 || sc.cells > sc.links) throw ConfigError("scenario: cells must be in [1, links]");
    if (!(sc.cell_power > 0.0)) throw ConfigError("scenario: cell_power must be positive");
  }
}

Network::Network(std::vector<Link> links, std::vector<std::vector<CMatrix>> channels,
                 std::vector<ConstraintGroup> groups)
    : links_(std::move(links)), channels_(std::move(channels)), groups_(std::move(groups)) {
  const std::size_t n = links_.size();
  if (n == 0) throw ConfigError("network: at least one link is required");
  for (const Link& link : links_) {
    if (link.tx_antennas <= 0 || link.rx_antennas <= 0) throw ShapeError("network: antenna counts must be positive");
    if (!(link.weight > 0.0) || !std::isfinite(link.weight)) throw ConfigError("network: weights must be positive");
  }
  if (channels_.size() != n) throw ShapeError("network: channel table must have one row per link");
  for (std::size_t l = 0; l < n; ++l) {
    if (channels_[l].size() != n) throw ShapeError("network: channel table must be square");
    for (std::size_t k = 0; k < n; ++k) {
      const CMatrix& h = channels_[l][k];
      if (h.rows() != links_[l].rx_antennas || h.cols() != links_[k].tx_antennas) {
        throw ShapeError("network: H_" + std::to_string(l) + "," + std::to_string(k) + " is " +
                         std::to_string(h.rows()) + "x" + std::to_string(h.cols()) + ", expected " +
                         std::to_string(links_[l].rx_antennas) + "x" + std::to_string(links_[k].tx_antennas));
      }
    }
  }

  memberships_.assign(n, {});
  for (GroupId s = 0; s < groups_.size(); ++s) {
    const ConstraintGroup& g = groups_[s];
    if (g.members.empty()) throw ConfigError("network: constraint group " + std::to_string(s) + " is empty");
    if (g.shaping.size() != g.members.size()) throw ShapeError("network: group shaping list does not match members");
    for (std::size_t slot = 0; slot < g.members.size(); ++slot) {
      const LinkId l = g.members[slot];
      if (l >= n) throw ConfigError("network: group member out of range");
      for (const Membership& m : memberships_[l]) {
        if (m.group == s) throw ConfigError("network: link listed twice in one group");
      }
      const HermitianMatrix& q = g.shaping[slot];
      if (q.dim() != links_[l].tx_antennas) throw ShapeError("network: Q matrix must be n_l x n_l");
      if (!(q.min_eigenvalue() > 0.0)) throw ConfigError("network: Q matrices must be positive definite");
      memberships_[l].push_back({s, slot});
    }
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (memberships_[l].empty()) throw ConfigError("network: link " + std::to_string(l) + " belongs to no constraint group");
  }
}

bool Network::has_interference() const {
  for (std::size_t l = 0; l < links_.size(); ++l) {
    for (std::size_t k = 0; k < links_.size(); ++k) {
      if (k != l && channels_[l][k].squaredNorm() > 0.0) return true;
    }
  }
  return false;
}

void check_transmit_shapes(const Network& net, const CovarianceSet& sigma) {
  if (sigma.size() != net.num_links()) throw ShapeError("expected one transmit covariance per link");
  for (std::size_t l = 0; l < sigma.size(); ++l) {
    if (sigma[l].dim() != net.link(l).tx_antennas) {
      throw ShapeError("transmit covariance " + std::to_string(l) + " has the wrong dimension");
    }
  }
}

void check_receive_shapes(const Network& net, const CovarianceSet& omega) {
  if (omega.size() != net.num_links()) throw ShapeError("expected one receive covariance per link");
  for (std::size_t l = 0; l < omega.size(); ++l) {
    if (omega[l].dim() != net.link(l).rx_antennas) {
      throw ShapeError("receive covariance " + std::to_string(l) + " has the wrong dimension");
    }
  }
}

CovarianceSet interference_plus_noise(const Network& net, const CovarianceSet& sigma) {
  check_transmit_shapes(net, sigma);
  const std::size_t n = net.num_links();
  CovarianceSet omega;
  omega.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    const Eigen::Index m = net.link(l).rx_antennas;
    CMatrix acc = CMatrix::Identity(m, m);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == l) continue;
      const CMatrix& h = net.channel(l, k);
      acc.noalias() += h * sigma[k].matrix() * h.adjoint();
    }
    omega.push_back(hermitize(acc));
  }
  return omega;
}

PrimalState make_primal_state(const Network& net, CovarianceSet sigma) {
  CovarianceSet omega = interference_plus_noise(net, sigma);
  return PrimalState{std::move(sigma), std::move(omega)};
}

double achievable_rate(const Network& net, const CovarianceSet& sigma, LinkId l, double rank_tol) {
  const CovarianceSet omega = interference_plus_noise(net, sigma);
  const CMatrix& h = net.channel(l, l);
  return ext_logdet_diff(congruence(h, sigma.at(l)), omega[l], rank_tol);
}

std::vector<double> achievable_rates(const Network& net, const CovarianceSet& sigma, double rank_tol) {
  const CovarianceSet omega = interference_plus_noise(net, sigma);
  std::vector<double> rates(net.num_links());
  for (std::size_t l = 0; l < rates.size(); ++l) {
    rates[l] = ext_logdet_diff(congruence(net.channel(l, l), sigma[l]), omega[l], rank_tol);
  }
  return rates;
}

double weighted_sum_rate(const Network& net, const CovarianceSet& sigma, double rank_tol) {
  const std::vector<double> rates = achievable_rates(net, sigma, rank_tol);
  double total = 0.0;
  for (std::size_t l = 0; l < rates.size(); ++l) total += net.link(l).weight * rates[l];
  return total;
}

double objective_F(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                   double rank_tol) {
  check_transmit_shapes(net, sigma);
  check_receive_shapes(net, omega);
  double total = 0.0;
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    const HermitianMatrix signal = congruence(net.channel(l, l), sigma[l]);
    total += net.link(l).weight * ext_logdet_diff(signal, omega[l], rank_tol);
  }
  return total;
}

std::vector<double> constraint_usage(const Network& net, const CovarianceSet& sigma) {
  check_transmit_shapes(net, sigma);
  std::vector<double> usage(net.num_groups(), 0.0);
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    const ConstraintGroup& g = net.group(s);
    for (std::size_t slot = 0; slot < g.members.size(); ++slot) {
      // tr(Sigma Q) for Hermitian Sigma, Q is the real Frobenius inner product.
      const CMatrix& a = sigma[g.members[slot]].matrix();
      const CMatrix& q = g.shaping[slot].matrix();
      usage[s] += (a.array() * q.conjugate().array()).sum().real();
    }
  }
  return usage;
}

std::vector<ConstraintGroup> total_power_groups(const std::vector<Link>& links, double total_power) {
  ConstraintGroup g;
  for (LinkId l = 0; l < links.size(); ++l) {
    g.members.push_back(l);
    g.shaping.push_back(HermitianMatrix::scaled_identity(links[l].tx_antennas, 1.0 / total_power));
  }
  return {std::move(g)};
}

std::vector<ConstraintGroup> per_link_groups(const std::vector<Link>& links, const std::vector<double>& budgets) {
  if (budgets.size() != links.size()) throw ConfigError("per_link_groups: one budget per link is required");
  std::vector<ConstraintGroup> groups;
  for (LinkId l = 0; l < links.size(); ++l) {
    ConstraintGroup g;
    g.members.push_back(l);
    g.shaping.push_back(HermitianMatrix::scaled_identity(links[l].tx_antennas, 1.0 / budgets[l]));
    groups.push_back(std::move(g));
  }
  return groups;
}

Network random_network(std::uint64_t seed, const Scenario& sc) {
  validate(sc);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  std::vector<Link> links(sc.links);
  std::uniform_real_distribution<double> weight(sc.weight_lo, sc.weight_hi);
  for (Link& link : links) {
    link.tx_antennas = sc.tx_antennas;
    link.rx_antennas = sc.rx_antennas;
    link.weight = sc.weight_lo == sc.weight_hi ? sc.weight_lo : weight(rng);
  }

  std::vector<std::vector<CMatrix>> channels(sc.links, std::vector<CMatrix>(sc.links));
  for (std::size_t l = 0; l < sc.links; ++l) {
    for (std::size_t k = 0; k < sc.links; ++k) {
      CMatrix h(sc.rx_antennas, sc.tx_antennas);
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          const double re = normal(rng);
          const double im = normal(rng);
          h(i, j) = Complex(re, im) * inv_sqrt2;
        }
      }
      if (k != l) h *= sc.interference_scale;
      channels[l][k] = std::move(h);
    }
  }

  std::vector<ConstraintGroup> groups;
  std::uniform_int_distribution<int> budget(sc.budget_min, sc.budget_max);
  switch (sc.mode) {
    case ConstraintMode::total:
      groups = total_power_groups(links, sc.total_power);
      break;
    case ConstraintMode::perlink: {
      std::vector<double> budgets(sc.links);
      for (double& b : budgets) b = budget(rng);
      groups = per_link_groups(links, budgets);
      break;
    }
    case ConstraintMode::grouped: {
      // Contiguous cells with a shared budget, overlapping with per-link budgets.
      for (std::size_t c = 0; c < sc.cells; ++c) {
        ConstraintGroup g;
        const std::size_t begin = c * sc.links / sc.cells;
        const std::size_t end = (c + 1) * sc.links / sc.cells;
        for (LinkId l = begin; l < end; ++l) {
          g.members.push_back(l);
          g.shaping.push_back(HermitianMatrix::scaled_identity(links[l].tx_antennas, 1.0 / sc.cell_power));
        }
        groups.push_back(std::move(g));
      }
      std::vector<double> budgets(sc.links);
      for (double& b : budgets) b = budget(rng);
      for (ConstraintGroup& g : per_link_groups(links, budgets)) groups.push_back(std::move(g));
      break;
    }
  }

  Network net(std::move(links), std::move(channels), std::move(groups));
  net.seed = seed;
  net.scenario = sc;
  return net;
}

}  // namespace wsr
