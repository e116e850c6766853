#pragma once

// Product (curved) witnesses. Any linear witness splits as Z = Zx + Zp + Zxp;
// the product value Tr[Zx g] Tr[Zp g] + Tr[Zxp g]/2 - Tr[Zxp g]^2/4 is
// invariant under the x/p scaling family and so detects more than Z does.

#include "cvwit/symplectic.hpp"
#include "cvwit/witness.hpp"

#include <cmath>
#include <stdexcept>

namespace cvwit {

struct ProductWitness {
  Matrix Zx;
  Matrix Zp;
  Matrix Zxp;

  [[nodiscard]] Matrix recompose() const { return Zx + Zp + Zxp; }
};

inline ProductWitness decompose_xp(const Matrix& z) {
  require_phase_space(z);
  require_symmetric(z, 1e-8 * std::max(1.0, z.cwiseAbs().maxCoeff()));
  const int n = static_cast<int>(z.rows() / 2);
  const Matrix px = x_projector(n);
  const Matrix pp = p_projector(n);
  ProductWitness pw;
  pw.Zx = px * z * px;
  pw.Zp = pp * z * pp;
  pw.Zxp = px * z * pp + pp * z * px;
  return pw;
}

namespace detail {

inline double trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

inline void require_same_dim(const ProductWitness& pw, const CovarianceMatrix& gamma) {
  const auto d = gamma.matrix().rows();
  if (pw.Zx.rows() != d || pw.Zp.rows() != d || pw.Zxp.rows() != d || pw.Zx.cols() != d ||
      pw.Zp.cols() != d || pw.Zxp.cols() != d) {
    throw std::invalid_argument("product witness and covariance have different dimensions");
  }
}

}  // namespace detail

inline double product_value(const ProductWitness& pw, const CovarianceMatrix& gamma) {
  detail::require_same_dim(pw, gamma);
  const Matrix& g = gamma.matrix();
  const double tx = detail::trace_product(pw.Zx, g);
  const double tp = detail::trace_product(pw.Zp, g);
  const double txp = detail::trace_product(pw.Zxp, g);
  return tx * tp + 0.5 * txp - 0.25 * txp * txp;
}

/// S M S^T with S = sqrt(a) Px + Pp / sqrt(a).
inline Matrix scale_xp(const Matrix& m, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("scale_xp: a must be positive");
  require_phase_space(m);
  const int n = static_cast<int>(m.rows() / 2);
  const Matrix s = std::sqrt(a) * x_projector(n) + p_projector(n) / std::sqrt(a);
  require_symplectic(s);
  return s * m * s.transpose();
}

inline CovarianceMatrix scale_xp(const CovarianceMatrix& gamma, double a) {
  return CovarianceMatrix(scale_xp(gamma.matrix(), a));
}

/// a = sqrt(Tr[Zp g] / Tr[Zx g]), which equalizes the traces of a Zx and Zp / a.
inline double balance_parameter(const ProductWitness& pw, const CovarianceMatrix& gamma) {
  detail::require_same_dim(pw, gamma);
  const double tx = detail::trace_product(pw.Zx, gamma.matrix());
  const double tp = detail::trace_product(pw.Zp, gamma.matrix());
  if (!(tx > 0.0) || !(tp > 0.0)) {
    throw std::domain_error("balance_parameter: witness has a non-positive x or p trace on this covariance");
  }
  return std::sqrt(tp / tx);
}

/// a Zx + Zp / a + Zxp.
inline ProductWitness balanced(const ProductWitness& pw, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("balanced: a must be positive");
  return {a * pw.Zx, pw.Zp / a, pw.Zxp};
}

/// Product verdict: P_Z(g) < 1/4 - tol. The recomposed witness must pass the
/// three witness conditions for `partition`. If either x or p trace is not
/// positive the linear verdict Tr[Z g] < 1 - tol is returned instead.
inline bool detects_product(const ProductWitness& pw, const CovarianceMatrix& gamma,
                            const ModePartition& partition, double tol = 1e-8) {
  detail::require_same_dim(pw, gamma);
  const Matrix z = pw.recompose();
  const ValidationReport rep = validate_witness(z, partition);
  if (!rep.is_witness()) throw std::invalid_argument("detects_product: underlying matrix is not a witness");
  const double tx = detail::trace_product(pw.Zx, gamma.matrix());
  const double tp = detail::trace_product(pw.Zp, gamma.matrix());
  if (!(tx > 0.0) || !(tp > 0.0)) return detail::trace_product(z, gamma.matrix()) < 1.0 - tol;
  return product_value(pw, gamma) < 0.25 - tol;
}

}  // namespace cvwit
