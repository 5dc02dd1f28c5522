#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsr/matcore.hpp"

namespace wsr {

using LinkId = std::size_t;
using GroupId = std::size_t;

/// Transmit/receive antenna counts and weight of one link.
struct Link {
  Eigen::Index tx_antennas = 1;  ///< n_l
  Eigen::Index rx_antennas = 1;  ///< m_l
  double weight = 1.0;           ///< w_l > 0
};

/// One linear power-covariance constraint: sum over members of tr(Sigma_l Q_l) <= 1.
struct ConstraintGroup {
  std::vector<LinkId> members;
  std::vector<HermitianMatrix> shaping;  ///< Q_l^s, parallel to members, n_l x n_l PD
};

enum class ConstraintMode { total, perlink, grouped };

const char* to_string(ConstraintMode mode);
ConstraintMode constraint_mode_from_string(const std::string& text);

/// Parameters of a randomly generated interference network.
struct Scenario {
  std::size_t links = 10;
  Eigen::Index tx_antennas = 3;
  Eigen::Index rx_antennas = 4;
  double interference_scale = 1.0;  ///< alpha, multiplies every H_lk with k != l
  double weight_lo = 0.5;
  double weight_hi = 1.0;
  ConstraintMode mode = ConstraintMode::total;
  double total_power = 10.0;   ///< P_T, total mode
  int budget_min = 1;          ///< per-link budgets drawn uniformly from {min..max}
  int budget_max = 10;
  std::size_t cells = 2;       ///< grouped mode: contiguous cells with a shared budget
  double cell_power = 10.0;    ///< grouped mode: budget of each cell
};

void validate(const Scenario& scenario);

/// Interference network: links, channels H_lk (rx of l x tx of k), and
/// constraint groups covering every link. Immutable once constructed.
class Network {
 public:
  /// channels[l][k] is H_lk with shape m_l x n_k. Throws ShapeError or
  /// ConfigError when the invariants fail.
  Network(std::vector<Link> links, std::vector<std::vector<CMatrix>> channels,
          std::vector<ConstraintGroup> groups);

  std::size_t num_links() const { return links_.size(); }
  std::size_t num_groups() const { return groups_.size(); }
  const Link& link(LinkId l) const { return links_.at(l); }
  const std::vector<Link>& links() const { return links_; }
  const CMatrix& channel(LinkId rx, LinkId tx) const { return channels_[rx][tx]; }
  const std::vector<std::vector<CMatrix>>& channels() const { return channels_; }
  const ConstraintGroup& group(GroupId s) const { return groups_.at(s); }
  const std::vector<ConstraintGroup>& groups() const { return groups_; }

  /// S^l: groups containing link l, with the position of l inside each group.
  struct Membership {
    GroupId group;
    std::size_t slot;
  };
  const std::vector<Membership>& memberships(LinkId l) const { return memberships_.at(l); }

  /// True when some H_lk with k != l is nonzero.
  bool has_interference() const;

  /// Provenance, carried through serialization.
  std::optional<std::uint64_t> seed;
  std::optional<Scenario> scenario;

 private:
  std::vector<Link> links_;
  std::vector<std::vector<CMatrix>> channels_;
  std::vector<ConstraintGroup> groups_;
  std::vector<std::vector<Membership>> memberships_;
};

/// Per-link covariances.
using CovarianceSet = std::vector<HermitianMatrix>;

/// Transmit covariances Sigma_l and interference-plus-noise covariances Omega_l.
struct PrimalState {
  CovarianceSet sigma;
  CovarianceSet omega;
};

/// Omega_l = I + sum_{k != l} H_lk Sigma_k H_lk^H.
CovarianceSet interference_plus_noise(const Network& net, const CovarianceSet& sigma);

/// Builds a consistent primal state from Sigma.
PrimalState make_primal_state(const Network& net, CovarianceSet sigma);

/// R_l in nats, with interference treated as noise.
double achievable_rate(const Network& net, const CovarianceSet& sigma, LinkId l,
                       double rank_tol = kDefaultRankTol);
std::vector<double> achievable_rates(const Network& net, const CovarianceSet& sigma,
                                     double rank_tol = kDefaultRankTol);

/// sum_l w_l R_l.
double weighted_sum_rate(const Network& net, const CovarianceSet& sigma,
                         double rank_tol = kDefaultRankTol);

/// F(Sigma, Omega) = sum_l w_l * ext_logdet_diff(H_ll Sigma_l H_ll^H, Omega_l).
double objective_F(const Network& net, const CovarianceSet& sigma, const CovarianceSet& omega,
                   double rank_tol = kDefaultRankTol);

/// sum_{l in L^s} tr(Sigma_l Q_l^s) for every group s.
std::vector<double> constraint_usage(const Network& net, const CovarianceSet& sigma);

/// Throws ShapeError unless sigma has one n_l x n_l matrix per link.
void check_transmit_shapes(const Network& net, const CovarianceSet& sigma);
/// Throws ShapeError unless omega has one m_l x m_l matrix per link.
void check_receive_shapes(const Network& net, const CovarianceSet& omega);

/// Random network: unit-variance circular complex Gaussian channels, cross
/// channels scaled by alpha, weights uniform on [weight_lo, weight_hi].
/// Deterministic for a given seed.
Network random_network(std::uint64_t seed, const Scenario& scenario);

/// Convenience constructors for the common constraint structures.
std::vector<ConstraintGroup> total_power_groups(const std::vector<Link>& links, double total_power);
std::vector<ConstraintGroup> per_link_groups(const std::vector<Link>& links,
                                             const std::vector<double>& budgets);

}  // namespace wsr
