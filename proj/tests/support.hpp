#pragma once

// Random generators and small oracles shared by the test binaries.

#include <cmath>
#include <random>
#include <vector>

#include "wsr/solver.hpp"

namespace wsr::test {

using Rng = std::mt19937_64;

inline CMatrix random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(2.0));
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline CMatrix random_unitary(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(rng, n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// V diag(eigs) V^H for a random unitary V.
inline HermitianMatrix with_spectrum(Rng& rng, const RVector& eigs) {
  const CMatrix v = random_unitary(rng, eigs.size());
  return hermitize(v * eigs.cast<Complex>().asDiagonal() * v.adjoint());
}

/// PSD of the given rank with nonzero eigenvalues uniform on [lo, hi].
inline HermitianMatrix random_psd(Rng& rng, Eigen::Index n, Eigen::Index rank, double lo = 0.1, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RVector eigs = RVector::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i) eigs(i) = u(rng);
  return with_spectrum(rng, eigs);
}

inline HermitianMatrix random_pd(Rng& rng, Eigen::Index n, double lo = 0.1, double hi = 5.0) {
  return random_psd(rng, n, n, lo, hi);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Network of scalar links: h[l][k] is the gain from transmitter k into receiver l.
inline Network siso_network(const std::vector<std::vector<Complex>>& h, const std::vector<double>& weights,
                            double total_power) {
  const std::size_t n = h.size();
  std::vector<Link> links(n);
  std::vector<std::vector<CMatrix>> ch(n, std::vector<CMatrix>(n));
  for (std::size_t l = 0; l < n; ++l) {
    links[l] = {1, 1, weights[l]};
    for (std::size_t k = 0; k < n; ++k) ch[l][k] = CMatrix::Constant(1, 1, h[l][k]);
  }
  return Network(links, ch, total_power_groups(links, total_power));
}

/// log|det(M)| through LU, independent of the eigen-based routines.
inline double logabsdet(const CMatrix& m) {
  return std::log(std::abs(m.partialPivLu().determinant()));
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// log|A + B + k I| - log|B + k I| through eigenvalues, for the kappa limit.
inline double regularized_logdet_diff(const HermitianMatrix& a, const HermitianMatrix& b, double kappa) {
  const Eigen::Index n = a.dim();
  const CMatrix ki = kappa * CMatrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> s1(a.matrix() + b.matrix() + ki, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<CMatrix> s2(b.matrix() + ki, Eigen::EigenvaluesOnly);
  double v = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) v += std::log(s1.eigenvalues()(i)) - std::log(s2.eigenvalues()(i));
  return v;
}

/// Limit as kappa -> 0 from kappa in {1e-4, 1e-6, 1e-8}: the error is
/// linear in kappa, so extrapolate the two smallest and check against the third.
struct KappaLimit {
  double value;
  double spread;  ///< disagreement between the two extrapolations
};
inline KappaLimit kappa_limit(const HermitianMatrix& a, const HermitianMatrix& b) {
  const double f4 = regularized_logdet_diff(a, b, 1e-4);
  const double f6 = regularized_logdet_diff(a, b, 1e-6);
  const double f8 = regularized_logdet_diff(a, b, 1e-8);
  const double e68 = f8 - (f6 - f8) * 1e-8 / (1e-6 - 1e-8);
  const double e46 = f6 - (f4 - f6) * 1e-6 / (1e-4 - 1e-6);
  return {e68, std::abs(e68 - e46)};
}

/// Random PSD pair (A, B) with range(A) inside range(B), B often singular.
struct PsdPair {
  HermitianMatrix a;
  HermitianMatrix b;
};
inline PsdPair random_admissible_pair(Rng& rng, Eigen::Index n) {
  const Eigen::Index rank_b = uniform_int(rng, 1, static_cast<int>(n));
  const Eigen::Index rank_a = uniform_int(rng, 0, static_cast<int>(rank_b));
  const CMatrix v = random_unitary(rng, n);
  const CMatrix vb = v.leftCols(rank_b);
  RVector eb(rank_b);
  for (Eigen::Index i = 0; i < rank_b; ++i) eb(i) = uniform_real(rng, 0.2, 5.0);
  const HermitianMatrix b = hermitize(vb * eb.cast<Complex>().asDiagonal() * vb.adjoint());
  // A lives in a random subspace of range(B).
  const CMatrix mix = random_unitary(rng, rank_b).leftCols(rank_a);
  const CMatrix va = vb * mix;
  RVector ea(rank_a);
  for (Eigen::Index i = 0; i < rank_a; ++i) ea(i) = uniform_real(rng, 0.1, 5.0);
  const HermitianMatrix a = rank_a == 0 ? HermitianMatrix::zero(n)
                                        : hermitize(va * ea.cast<Complex>().asDiagonal() * va.adjoint());
  return {a, b};
}

/// Random network with square channels of size n = m, total or per-link budgets.
inline Network random_square_network(Rng& rng, std::size_t links, Eigen::Index n, bool per_link) {
  std::vector<Link> ls(links);
  for (auto& l : ls) l = {n, n, uniform_real(rng, 0.5, 1.0)};
  std::vector<std::vector<CMatrix>> ch(links, std::vector<CMatrix>(links));
  for (std::size_t l = 0; l < links; ++l) {
    for (std::size_t k = 0; k < links; ++k) ch[l][k] = random_complex(rng, n, n);
  }
  if (per_link) {
    std::vector<double> budgets(links);
    for (auto& p : budgets) p = uniform_int(rng, 1, 10);
    return Network(ls, ch, per_link_groups(ls, budgets));
  }
  return Network(ls, ch, total_power_groups(ls, 10.0));
}

}  // namespace wsr::test
