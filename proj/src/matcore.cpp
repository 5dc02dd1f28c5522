#include "wsr/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsr {

namespace {

using EigenSolver = Eigen::SelfAdjointEigenSolver<CMatrix>;

double threshold(double rank_tol, double largest) { return rank_tol * std::max(1.0, largest); }

EigenSolver decompose(const HermitianMatrix& a) {
  return EigenSolver(a.matrix(), Eigen::ComputeEigenvectors);
}

void require_psd(const EigenSolver& es, double rank_tol, const char* what) {
  const RVector& ev = es.eigenvalues();
  if (ev.size() == 0) return;
  const double tol = threshold(rank_tol, ev(ev.size() - 1));
  if (ev(0) < -tol) {
    throw IndefiniteError(std::string(what) + ": matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(ev(0)) + ")");
  }
}

// Columns of V whose eigenvalue exceeds the tolerance. Eigenvalues are
// ascending, so the kept block is a trailing column range.
Eigen::Index count_above(const RVector& ev, double tol) {
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) ++k;
  }
  return k;
}

// sum_i log(1 + c_i) over the eigenvalues of a PSD matrix.
double log1p_det(const CMatrix& c, double rank_tol) {
  if (c.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c, Eigen::EigenvaluesOnly);
  const RVector& ev = es.eigenvalues();
  if (ev(0) < -threshold(rank_tol, ev(ev.size() - 1))) {
    throw IndefiniteError("ext_logdet_diff (A): matrix is not positive semidefinite");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    sum += std::log1p(std::max(es.eigenvalues()(i), 0.0));
  }
  return sum;
}

}  // namespace

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return HermitianMatrix(CMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return HermitianMatrix(CMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::scaled_identity(Eigen::Index dim, double value) {
  return HermitianMatrix(CMatrix::Identity(dim, dim) * value);
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& values) {
  return HermitianMatrix(values.cast<Complex>().asDiagonal());
}

RVector HermitianMatrix::eigenvalues() const {
  if (dim() == 0) return RVector();
  return Eigen::SelfAdjointEigenSolver<CMatrix>(m_, Eigen::EigenvaluesOnly).eigenvalues();
}

double HermitianMatrix::min_eigenvalue() const {
  const RVector ev = eigenvalues();
  return ev.size() == 0 ? 0.0 : ev(0);
}

double HermitianMatrix::max_eigenvalue() const {
  const RVector ev = eigenvalues();
  return ev.size() == 0 ? 0.0 : ev(ev.size() - 1);
}

bool HermitianMatrix::is_psd(double rank_tol) const {
  const RVector ev = eigenvalues();
  if (ev.size() == 0) return true;
  return ev(0) >= -threshold(rank_tol, ev(ev.size() - 1));
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  if (other.dim() != dim()) throw ShapeError("HermitianMatrix: dimension mismatch in +=");
  m_ += other.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  if (other.dim() != dim()) throw ShapeError("HermitianMatrix: dimension mismatch in -=");
  m_ -= other.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianMatrix hermitize(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("hermitize: matrix is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ", expected square");
  }
  CMatrix h = 0.5 * (a + a.adjoint());
  return HermitianMatrix(std::move(h));
}

HermitianMatrix congruence(const CMatrix& h, const HermitianMatrix& x) {
  if (h.cols() != x.dim()) throw ShapeError("congruence: H columns do not match X");
  return hermitize(h * x.matrix() * h.adjoint());
}

PseudoInverse pseudo_inverse_with_rank(const HermitianMatrix& a, double rank_tol) {
  if (a.dim() == 0) return {a, 0, 0.0};
  const EigenSolver es = decompose(a);
  require_psd(es, rank_tol, "pseudo_inverse");
  const RVector& ev = es.eigenvalues();
  const double tol = threshold(rank_tol, ev(ev.size() - 1));
  RVector inv(ev.size());
  PseudoInverse out;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) {
      inv(i) = 1.0 / ev(i);
      if (out.rank == 0) out.smallest_kept = ev(i);
      ++out.rank;
    } else {
      inv(i) = 0.0;
    }
  }
  const CMatrix& v = es.eigenvectors();
  out.inverse = hermitize(v * inv.cast<Complex>().asDiagonal() * v.adjoint());
  return out;
}

HermitianMatrix pseudo_inverse(const HermitianMatrix& a, double rank_tol) {
  return pseudo_inverse_with_rank(a, rank_tol).inverse;
}

CMatrix range_basis(const HermitianMatrix& a, double rank_tol) {
  if (a.dim() == 0) return CMatrix(0, 0);
  const EigenSolver es = decompose(a);
  require_psd(es, rank_tol, "range_basis");
  const RVector& ev = es.eigenvalues();
  const Eigen::Index r = count_above(ev, threshold(rank_tol, ev(ev.size() - 1)));
  return es.eigenvectors().rightCols(r);
}

HermitianMatrix range_projector(const HermitianMatrix& a, double rank_tol) {
  const CMatrix u = range_basis(a, rank_tol);
  return hermitize(u * u.adjoint());
}

CMatrix psd_factor(const HermitianMatrix& a, double rank_tol) {
  if (a.dim() == 0) return CMatrix(0, 0);
  const EigenSolver es = decompose(a);
  require_psd(es, rank_tol, "psd_factor");
  const RVector& ev = es.eigenvalues();
  const Eigen::Index r = count_above(ev, threshold(rank_tol, ev(ev.size() - 1)));
  const RVector roots = ev.tail(r).cwiseSqrt();
  return es.eigenvectors().rightCols(r) * roots.cast<Complex>().asDiagonal();
}

bool range_contained(const HermitianMatrix& a, const HermitianMatrix& b, double rank_tol) {
  if (a.dim() != b.dim()) throw ShapeError("range_contained: dimension mismatch");
  const HermitianMatrix sum = a + b;
  const EigenSolver es = decompose(sum);
  const RVector& ev = es.eigenvalues();
  if (ev.size() == 0) return true;
  const double tol = threshold(rank_tol, ev(ev.size() - 1));
  const Eigen::Index r = count_above(ev, tol);
  if (r == 0) return true;
  const CMatrix u = es.eigenvectors().rightCols(r);
  const CMatrix b1 = u.adjoint() * b.matrix() * u;
  Eigen::SelfAdjointEigenSolver<CMatrix> es_b(0.5 * (b1 + b1.adjoint()), Eigen::EigenvaluesOnly);
  return es_b.eigenvalues()(0) > tol;
}

double logdet_pd(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  Eigen::LLT<CMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) throw IndefiniteError("logdet_pd: matrix is not positive definite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.dim(); ++i) sum += std::log(llt.matrixL()(i, i).real());
  return 2.0 * sum;
}

double ext_logdet_diff(const HermitianMatrix& a, const HermitianMatrix& b, double rank_tol) {
  if (a.dim() != b.dim()) throw ShapeError("ext_logdet_diff: dimension mismatch");
  if (a.dim() == 0) return 0.0;

  const EigenSolver es_b = decompose(b);
  require_psd(es_b, rank_tol, "ext_logdet_diff (B)");
  const RVector& evb = es_b.eigenvalues();
  const double scale = a.norm() + std::max(evb(evb.size() - 1), 0.0);
  const double tol = threshold(rank_tol, scale);

  if (evb(0) > tol) {
    // B positive definite: whiten by B^{-1/2} and sum log(1 + c_i).
    const RVector inv_root = evb.cwiseSqrt().cwiseInverse();
    const CMatrix w = es_b.eigenvectors() * inv_root.cast<Complex>().asDiagonal();
    const CMatrix c = w.adjoint() * a.matrix() * w;
    return log1p_det(0.5 * (c + c.adjoint()), rank_tol);
  }

  // Singular B: restrict both matrices to range(A + B), the orthogonal
  // complement of the joint null space, where B must be positive definite.
  const HermitianMatrix sum = a + b;
  const EigenSolver es_s = decompose(sum);
  require_psd(es_s, rank_tol, "ext_logdet_diff (A)");
  const RVector& evs = es_s.eigenvalues();
  const double tol_s = threshold(rank_tol, evs(evs.size() - 1));
  const Eigen::Index r = count_above(evs, tol_s);
  if (r == 0) return 0.0;
  const CMatrix u = es_s.eigenvectors().rightCols(r);
  const CMatrix a1 = u.adjoint() * a.matrix() * u;
  const CMatrix b1 = u.adjoint() * b.matrix() * u;
  Eigen::SelfAdjointEigenSolver<CMatrix> es_b1(0.5 * (b1 + b1.adjoint()), Eigen::ComputeEigenvectors);
  const RVector& evb1 = es_b1.eigenvalues();
  if (evb1(0) <= tol_s) {
    throw IllPosedError(
        "ext_logdet_diff: range(A) is not contained in range(B); the truncated block of B is "
        "singular (min eigenvalue " +
        std::to_string(evb1(0)) + ")");
  }
  const RVector inv_root = evb1.cwiseSqrt().cwiseInverse();
  const CMatrix w = es_b1.eigenvectors() * inv_root.cast<Complex>().asDiagonal();
  const CMatrix c = w.adjoint() * a1 * w;
  return log1p_det(0.5 * (c + c.adjoint()), rank_tol);
}

CMatrix TruncationDecomposition::block_form_a() const {
  const Eigen::Index n = transform.rows();
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < both; ++i) out(i, i) = s1(i);
  for (Eigen::Index i = 0; i < a_only; ++i) out(both + b_only + i, both + b_only + i) = s3(i);
  return out;
}

CMatrix TruncationDecomposition::block_form_b() const {
  const Eigen::Index n = transform.rows();
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < both; ++i) out(i, i) = s1(i);
  for (Eigen::Index i = 0; i < b_only; ++i) out(both + i, both + i) = s2(i);
  return out;
}

TruncationDecomposition simultaneous_decompose(const HermitianMatrix& a, const HermitianMatrix& b,
                                               double rank_tol) {
  if (a.dim() != b.dim()) throw ShapeError("simultaneous_decompose: dimension mismatch");
  const Eigen::Index n = a.dim();

  // A = R R^H, B = G G^H with full-column-rank factors.
  const CMatrix r = psd_factor(a, rank_tol);
  const CMatrix g = psd_factor(b, rank_tol);
  const Eigen::Index rank_a = r.cols();
  const Eigen::Index rank_b = g.cols();

  // G^H R = U diag(sigma) V^H; the nonzero singular values are S1.
  CMatrix u = CMatrix::Identity(rank_b, rank_b);
  CMatrix v = CMatrix::Identity(rank_a, rank_a);
  RVector sigma;
  Eigen::Index both = 0;
  if (rank_a > 0 && rank_b > 0) {
    Eigen::JacobiSVD<CMatrix> svd(g.adjoint() * r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u = svd.matrixU();
    v = svd.matrixV();
    sigma = svd.singularValues();
    const double tol = threshold(rank_tol, sigma.size() > 0 ? sigma(0) : 0.0);
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > tol) ++both;
    }
  }

  TruncationDecomposition out;
  out.both = both;
  out.b_only = rank_b - both;
  out.a_only = rank_a - both;
  out.neither = std::max<Eigen::Index>(0, n - rank_a - rank_b + both);

  // Columns of W = T^{-1}.
  CMatrix w(n, n);
  Eigen::Index col = 0;
  if (both > 0) {
    const RVector inv_root = sigma.head(both).cwiseSqrt().cwiseInverse();
    w.middleCols(col, both) = r * v.leftCols(both) * inv_root.cast<Complex>().asDiagonal();
    col += both;
  }
  if (out.b_only > 0) {
    // G (G^H G)^{-1} U2: its image under B is the identity block.
    const CMatrix gram_inv = (g.adjoint() * g).inverse();
    w.middleCols(col, out.b_only) = g * gram_inv * u.rightCols(out.b_only);
    col += out.b_only;
  }
  CMatrix w3;
  if (out.a_only > 0) {
    w3 = r * v.rightCols(out.a_only);
    w.middleCols(col, out.a_only) = w3;
    col += out.a_only;
  }
  if (out.neither > 0) {
    // Complete span(W3) to a basis of null(B).
    const EigenSolver es_b = decompose(b);
    const RVector& evb = es_b.eigenvalues();
    const double tol = threshold(rank_tol, evb(evb.size() - 1));
    const Eigen::Index null_dim = evb.size() - count_above(evb, tol);
    CMatrix null_b = es_b.eigenvectors().leftCols(null_dim);
    if (w3.cols() > 0) {
      Eigen::HouseholderQR<CMatrix> qr(w3);
      const CMatrix q3 = qr.householderQ() * CMatrix::Identity(n, w3.cols());
      null_b -= q3 * (q3.adjoint() * null_b);
    }
    Eigen::JacobiSVD<CMatrix> svd(null_b, Eigen::ComputeThinU);
    w.middleCols(col, out.neither) = svd.matrixU().leftCols(out.neither);
    col += out.neither;
  }
  if (col != n) throw ShapeError("simultaneous_decompose: inconsistent block sizes");

  out.inverse_transform = w;
  out.transform = w.inverse();
  out.s1 = both > 0 ? RVector(sigma.head(both)) : RVector();
  out.s2 = RVector::Ones(out.b_only);
  out.s3 = RVector::Ones(out.a_only);

  const CMatrix ta = out.transform * a.matrix() * out.transform.adjoint();
  const CMatrix tb = w.adjoint() * b.matrix() * w;
  out.reconstruction_error_a = (ta - out.block_form_a()).norm() / std::max(1.0, a.norm());
  out.reconstruction_error_b = (tb - out.block_form_b()).norm() / std::max(1.0, b.norm());
  Eigen::JacobiSVD<CMatrix> svd_t(out.transform);
  const RVector& sv = svd_t.singularValues();
  out.condition_number = n > 0 ? sv(0) / sv(n - 1) : 1.0;
  return out;
}

}  // namespace wsr
