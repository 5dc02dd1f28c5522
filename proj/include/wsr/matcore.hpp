#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "wsr/error.hpp"

namespace wsr {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Eigenvalues below rank_tol * max(1, largest eigenvalue) are treated as zero.
inline constexpr double kDefaultRankTol = 1e-9;

/// Complex Hermitian matrix. Construction always goes through hermitize() or
/// a named factory, so the stored matrix is exactly Hermitian.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix scaled_identity(Eigen::Index dim, double value);
  /// diag(values)
  static HermitianMatrix diagonal(const RVector& values);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Real trace.
  double trace() const { return m_.trace().real(); }
  /// Ascending eigenvalues.
  RVector eigenvalues() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  /// Spectral-norm-relative PSD test: min eig >= -rank_tol * max(1, max eig).
  bool is_psd(double rank_tol = kDefaultRankTol) const;
  /// Frobenius norm.
  double norm() const { return m_.norm(); }

  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double s);

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

  friend HermitianMatrix hermitize(const CMatrix& a);

 private:
  explicit HermitianMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

/// (A + A^H) / 2. Throws ShapeError for non-square input.
HermitianMatrix hermitize(const CMatrix& a);

/// H X H^H, re-hermitized.
HermitianMatrix congruence(const CMatrix& h, const HermitianMatrix& x);

/// Moore-Penrose pseudo-inverse of a PSD matrix through its eigendecomposition.
/// Throws IndefiniteError if A has a negative eigenvalue beyond tolerance.
HermitianMatrix pseudo_inverse(const HermitianMatrix& a, double rank_tol = kDefaultRankTol);

struct PseudoInverse {
  HermitianMatrix inverse;
  Eigen::Index rank = 0;
  double smallest_kept = 0.0;  ///< smallest eigenvalue above the rank threshold
};
PseudoInverse pseudo_inverse_with_rank(const HermitianMatrix& a, double rank_tol = kDefaultRankTol);

/// Orthonormal basis (columns) of range(A) for PSD A, using the rank tolerance.
CMatrix range_basis(const HermitianMatrix& a, double rank_tol = kDefaultRankTol);

/// Orthogonal projector onto range(A).
HermitianMatrix range_projector(const HermitianMatrix& a, double rank_tol = kDefaultRankTol);

/// Factor R (n x rank) with A = R R^H, built from the truncated eigendecomposition.
CMatrix psd_factor(const HermitianMatrix& a, double rank_tol = kDefaultRankTol);

/// True when range(A) is contained in range(B) for PSD A, B, i.e. B restricted
/// to range(A + B) is positive definite.
bool range_contained(const HermitianMatrix& a, const HermitianMatrix& b,
                     double rank_tol = kDefaultRankTol);

/// Extended difference of logdet, in nats:
///   log|A1 + B1| - log|B1|
/// where A1, B1 are the restrictions of A, B to range(A + B). Equals
/// log|A + B| - log|B| when B is positive definite. Throws IllPosedError when
/// range(A) is not contained in range(B), since the block structure with a
/// positive definite B1 then does not exist.
double ext_logdet_diff(const HermitianMatrix& a, const HermitianMatrix& b,
                       double rank_tol = kDefaultRankTol);

/// log|A| for Hermitian positive definite A. Throws IndefiniteError otherwise.
double logdet_pd(const HermitianMatrix& a);

/// Result of simultaneously reducing a PSD pair (A, B) by a nonsingular T:
///
///   T A T^H          = diag(S1, 0,  S3, 0)
///   T^-H B T^-1      = diag(S1, S2, 0,  0)
///
/// Block sizes are (both, b_only, a_only, neither).
struct TruncationDecomposition {
  CMatrix transform;          ///< T
  CMatrix inverse_transform;  ///< T^-1
  Eigen::Index both = 0;
  Eigen::Index b_only = 0;
  Eigen::Index a_only = 0;
  Eigen::Index neither = 0;
  RVector s1;  ///< diagonal of S1 (positive)
  RVector s2;  ///< diagonal of S2 (positive)
  RVector s3;  ///< diagonal of S3 (positive)
  double reconstruction_error_a = 0.0;  ///< ||T A T^H - blocks|| / max(1, ||A||)
  double reconstruction_error_b = 0.0;  ///< ||T^-H B T^-1 - blocks|| / max(1, ||B||)
  double condition_number = 0.0;        ///< 2-norm condition number of T

  /// Size of the block on which B's image is positive definite (both + b_only).
  Eigen::Index signal_rank() const { return both + b_only; }
  CMatrix block_form_a() const;
  CMatrix block_form_b() const;
};

TruncationDecomposition simultaneous_decompose(const HermitianMatrix& a, const HermitianMatrix& b,
                                               double rank_tol = kDefaultRankTol);

}  // namespace wsr
