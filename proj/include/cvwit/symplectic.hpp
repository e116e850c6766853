#pragma once

// Symplectic linear algebra on real phase-space matrices.
//
// Quadratures are always ordered (x1, p1, x2, p2, ..., xn, pn). Covariance
// matrices are vacuum-normalized: the vacuum of n modes is the 2n x 2n
// identity. Mode indices are zero-based throughout the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cvwit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-8;
inline constexpr double kSymplecticTol = 1e-8;
inline constexpr double kClampTol = 1e-10;

/// Number of modes held by each party. Parties own contiguous runs of modes.
class ModePartition {
 public:
  ModePartition() = default;

  explicit ModePartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("partition needs at least one party");
    for (int s : sizes_) {
      if (s <= 0) throw std::invalid_argument("partition sizes must be positive");
    }
    offsets_.resize(sizes_.size());
    std::exclusive_scan(sizes_.begin(), sizes_.end(), offsets_.begin(), 0);
  }

  /// One mode per party.
  static ModePartition singletons(int modes) {
    return ModePartition(std::vector<int>(static_cast<std::size_t>(modes), 1));
  }

  [[nodiscard]] std::size_t parties() const { return sizes_.size(); }
  [[nodiscard]] int modes() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), 0);
  }
  [[nodiscard]] int size(std::size_t party) const { return sizes_.at(party); }
  [[nodiscard]] int offset(std::size_t party) const { return offsets_.at(party); }
  [[nodiscard]] const std::vector<int>& sizes() const { return sizes_; }

  /// Quadrature indices (x and p) of one party, ascending.
  [[nodiscard]] std::vector<int> quadratures(std::size_t party) const {
    std::vector<int> idx;
    for (int m = 0; m < size(party); ++m) {
      idx.push_back(2 * (offset(party) + m));
      idx.push_back(2 * (offset(party) + m) + 1);
    }
    return idx;
  }

  /// Quadrature indices of a group of parties given as a bit mask over parties.
  [[nodiscard]] std::vector<int> quadratures_of_mask(unsigned mask) const {
    std::vector<int> idx;
    for (std::size_t k = 0; k < parties(); ++k) {
      if (mask & (1u << k)) {
        auto q = quadratures(k);
        idx.insert(idx.end(), q.begin(), q.end());
      }
    }
    return idx;
  }

  friend bool operator==(const ModePartition&, const ModePartition&) = default;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

/// Extract the principal submatrix on the given row/column indices.
inline Matrix principal_submatrix(const Matrix& m, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

inline double symmetry_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  if (m.size() > 0 && symmetry_defect(m) > tol) {
    throw std::invalid_argument("matrix is not symmetric");
  }
}

inline void require_phase_space(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  if (m.rows() == 0 || m.rows() % 2 != 0) {
    throw std::invalid_argument("phase-space matrix must have even, positive dimension");
  }
}

inline double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Real 2n x 2n symmetric matrix of second moments.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix entries, double symmetry_tol = 1e-10)
      : m_(std::move(entries)) {
    require_phase_space(m_);
    require_symmetric(m_, symmetry_tol);
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }

  [[nodiscard]] int modes() const { return static_cast<int>(m_.rows() / 2); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Direct sum of n copies of [[0, 1], [-1, 0]].
inline Matrix symplectic_form(int n) {
  if (n < 1) throw std::invalid_argument("symplectic_form: need n >= 1");
  Matrix s = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    s(2 * k, 2 * k + 1) = 1.0;
    s(2 * k + 1, 2 * k) = -1.0;
  }
  return s;
}

/// Real embedding [[A, -B], [B, A]] of the Hermitian matrix A + iB.
/// A + iB >= 0 iff the embedding is positive semidefinite.
inline Matrix real_embedding(const Matrix& re, const Matrix& im) {
  const auto d = re.rows();
  Matrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = re;
  out.topRightCorner(d, d) = -im;
  out.bottomLeftCorner(d, d) = im;
  out.bottomRightCorner(d, d) = re;
  return out;
}

/// Smallest eigenvalue of the real embedding of M + i*scale*sigma.
inline double heisenberg_margin(const Matrix& m, double scale = 1.0) {
  require_phase_space(m);
  return min_eigenvalue(real_embedding(m, scale * symplectic_form(static_cast<int>(m.rows() / 2))));
}

inline bool is_valid_covariance(const Matrix& gamma, double tol = kSymplecticTol) {
  require_phase_space(gamma);
  require_symmetric(gamma);
  return heisenberg_margin(gamma) >= -tol;
}

inline bool is_valid_covariance(const CovarianceMatrix& gamma, double tol = kSymplecticTol) {
  return is_valid_covariance(gamma.matrix(), tol);
}

/// Symmetric PSD square root; eigenvalues below zero are clamped.
inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Symplectic eigenvalues in descending order, one per mode.
///
/// Computed as the singular values of M^{1/2} sigma M^{1/2}, a real
/// antisymmetric matrix whose spectrum is {+-i s_j}; each singular value
/// therefore appears twice and the pairs are averaged. Rank-deficient M
/// produce zeros instead of the ill-conditioned spectrum of sigma*M.
inline std::vector<double> symplectic_eigenvalues(const Matrix& m, double tol = kSymplecticTol) {
  require_phase_space(m);
  require_symmetric(m, std::max(tol, kSymmetryTol) * std::max(1.0, m.cwiseAbs().maxCoeff()));
  const Matrix ms = 0.5 * (m + m.transpose());
  if (min_eigenvalue(ms) < -tol) {
    throw std::invalid_argument("symplectic_eigenvalues: matrix is not positive semidefinite");
  }
  const int n = static_cast<int>(m.rows() / 2);
  const Matrix root = psd_sqrt(ms);
  const Matrix t = root * symplectic_form(n) * root;
  Eigen::JacobiSVD<Matrix> svd(t);
  const Vector sv = svd.singularValues();  // descending
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double s = 0.5 * (sv(2 * j) + sv(2 * j + 1));
    out[static_cast<std::size_t>(j)] = s < kClampTol ? 0.0 : s;
  }
  return out;
}

inline double symplectic_trace(const Matrix& m, double tol = kSymplecticTol) {
  auto s = symplectic_eigenvalues(m, tol);
  return std::accumulate(s.begin(), s.end(), 0.0);
}

/// Flip the sign of the momentum row and column of each selected mode.
inline CovarianceMatrix partial_transpose(const CovarianceMatrix& gamma,
                                          const std::vector<int>& modes) {
  Matrix out = gamma.matrix();
  for (int m : modes) {
    if (m < 0 || m >= gamma.modes()) {
      throw std::out_of_range("partial_transpose: mode index " + std::to_string(m) +
                              " out of range");
    }
  }
  Vector flip = Vector::Ones(out.rows());
  for (int m : modes) flip(2 * m + 1) = -flip(2 * m + 1);
  out = flip.asDiagonal() * out * flip.asDiagonal();
  return CovarianceMatrix(out);
}

inline Matrix x_projector(int n) {
  Vector d = Vector::Zero(2 * n);
  for (int k = 0; k < n; ++k) d(2 * k) = 1.0;
  return d.asDiagonal();
}

inline Matrix p_projector(int n) {
  Vector d = Vector::Zero(2 * n);
  for (int k = 0; k < n; ++k) d(2 * k + 1) = 1.0;
  return d.asDiagonal();
}

/// P_p M P_p + P_x M P_x: zeroes every x-p cross entry.
inline Matrix pinch_xp(const Matrix& m) {
  require_phase_space(m);
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if ((i + j) % 2 != 0) out(i, j) = 0.0;
  return out;
}

/// Max-abs entry of S sigma S^T - sigma.
inline double symplectic_violation(const Matrix& s) {
  require_phase_space(s);
  const Matrix sigma = symplectic_form(static_cast<int>(s.rows() / 2));
  return (s * sigma * s.transpose() - sigma).cwiseAbs().maxCoeff();
}

inline bool is_symplectic(const Matrix& s, double tol = kSymplecticTol) {
  return symplectic_violation(s) <= tol;
}

inline void require_symplectic(const Matrix& s, double tol = kSymplecticTol) {
  const double v = symplectic_violation(s);
  if (v > tol) {
    throw std::invalid_argument("matrix is not symplectic (violation " + std::to_string(v) + ")");
  }
}

inline CovarianceMatrix apply_symplectic(const CovarianceMatrix& gamma, const Matrix& s,
                                         double tol = kSymplecticTol) {
  if (s.rows() != gamma.matrix().rows() || s.cols() != gamma.matrix().cols()) {
    throw std::invalid_argument("apply_symplectic: dimension mismatch");
  }
  require_symplectic(s, tol);
  Matrix out = s * gamma.matrix() * s.transpose();
  return CovarianceMatrix(0.5 * (out + out.transpose()), 1e-6);
}

/// Beam splitter with transmission angle theta between modes i and j. Acts as
/// [[cos, sin], [-sin, cos]] on (x_i, x_j) and identically on (p_i, p_j).
inline Matrix beam_splitter(int n, int i, int j, double theta) {
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("beam_splitter: mode out of range");
  if (i == j) throw std::invalid_argument("beam_splitter: modes must differ");
  Matrix s = Matrix::Identity(2 * n, 2 * n);
  const double c = std::cos(theta);
  const double t = std::sin(theta);
  for (int q = 0; q < 2; ++q) {
    const int a = 2 * i + q;
    const int b = 2 * j + q;
    s(a, a) = c;
    s(a, b) = t;
    s(b, a) = -t;
    s(b, b) = c;
  }
  return s;
}

/// Balanced beam splitter, (1/sqrt 2)[[1, 1], [-1, 1]] per quadrature pair.
inline Matrix beam_splitter_50_50(int n, int i, int j) {
  return beam_splitter(n, i, j, std::acos(-1.0) / 4.0);
}

/// Local squeezer diag(d, 1/d) on one mode.
inline Matrix squeezer(int n, int mode, double d) {
  if (mode < 0 || mode >= n) throw std::out_of_range("squeezer: mode out of range");
  if (d == 0.0) throw std::invalid_argument("squeezer: zero scale");
  Matrix s = Matrix::Identity(2 * n, 2 * n);
  s(2 * mode, 2 * mode) = d;
  s(2 * mode + 1, 2 * mode + 1) = 1.0 / d;
  return s;
}

/// Phase-space rotation of one mode.
inline Matrix phase_rotation(int n, int mode, double phi) {
  if (mode < 0 || mode >= n) throw std::out_of_range("phase_rotation: mode out of range");
  Matrix s = Matrix::Identity(2 * n, 2 * n);
  const int a = 2 * mode;
  s(a, a) = std::cos(phi);
  s(a, a + 1) = std::sin(phi);
  s(a + 1, a) = -std::sin(phi);
  s(a + 1, a + 1) = std::cos(phi);
  return s;
}

/// Moves mode k to position perm[k] (quadrature pairs travel together).
inline Matrix mode_permutation(int n, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("mode_permutation: wrong length");
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]++) {
      throw std::invalid_argument("mode_permutation: not a permutation");
    }
  }
  Matrix s = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    s(2 * perm[static_cast<std::size_t>(k)], 2 * k) = 1.0;
    s(2 * perm[static_cast<std::size_t>(k)] + 1, 2 * k + 1) = 1.0;
  }
  return s;
}

/// Von Neumann entropy (nats) of the Gaussian state with covariance gamma.
inline double gaussian_entropy(const CovarianceMatrix& gamma, double tol = kSymplecticTol) {
  if (!is_valid_covariance(gamma, tol)) {
    throw std::invalid_argument("gaussian_entropy: covariance violates the uncertainty relation");
  }
  double h = 0.0;
  for (double s : symplectic_eigenvalues(gamma.matrix(), tol)) {
    const double occ = std::max(0.0, (s - 1.0) / 2.0);
    if (occ <= kClampTol) continue;
    h += (occ + 1.0) * std::log(occ + 1.0) - occ * std::log(occ);
  }
  return h;
}

/// 1 / (1 + x_e) for a separability margin x_e.
inline double p_measure(double margin) {
  if (!(margin > -1.0)) throw std::domain_error("p_measure: margin must exceed -1");
  return 1.0 / (1.0 + margin);
}

}  // namespace cvwit
