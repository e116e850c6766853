#pragma once

// Dense primal-dual interior-point solver for block semidefinite programs
//
//   minimize    c^T x
//   subject to  F(x) = F0 + sum_i x_i F_i >= 0   (block diagonal)
//               a_j^T x = b_j                     (optional equalities)
//
// with dual
//
//   maximize    -Tr[F0 Z] - b^T y
//   subject to  Tr[F_i Z] = c_i + (A^T y)_i,  Z >= 0.
//
// The iteration runs on the homogeneous self-dual embedding of the pair, so a
// run either converges to a primal-dual optimum or produces a certificate of
// primal or dual infeasibility. Search directions use Nesterov-Todd scaling
// and a Mehrotra predictor-corrector step.

#include "cvwit/symplectic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cvwit::sdp {

using BlockMatrix = std::vector<Matrix>;

/// a^T x = rhs
struct LinearEquality {
  Vector coefficients;
  double rhs = 0.0;
};

/// Block SDP in inequality form. A 0 x 0 block inside F[i] stands for a zero
/// block of the declared size.
struct SdpProblem {
  Vector c;
  BlockMatrix F0;
  std::vector<BlockMatrix> F;
  std::vector<int> block_structure;
  std::vector<LinearEquality> equalities;

  [[nodiscard]] int variables() const { return static_cast<int>(c.size()); }

  void validate(double tol = kSymmetryTol) const {
    const std::size_t nb = block_structure.size();
    if (F0.size() != nb) throw std::invalid_argument("SdpProblem: F0 block count mismatch");
    if (F.size() != static_cast<std::size_t>(c.size())) {
      throw std::invalid_argument("SdpProblem: need one constraint matrix per variable");
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (block_structure[b] <= 0) throw std::invalid_argument("SdpProblem: block sizes must be positive");
      if (F0[b].rows() != block_structure[b] || F0[b].cols() != block_structure[b]) {
        throw std::invalid_argument("SdpProblem: F0 block " + std::to_string(b) + " has wrong size");
      }
      require_symmetric(F0[b], tol);
    }
    for (std::size_t i = 0; i < F.size(); ++i) {
      if (F[i].size() != nb) {
        throw std::invalid_argument("SdpProblem: F_" + std::to_string(i) + " block count mismatch");
      }
      for (std::size_t b = 0; b < nb; ++b) {
        if (F[i][b].size() == 0) continue;
        if (F[i][b].rows() != block_structure[b] || F[i][b].cols() != block_structure[b]) {
          throw std::invalid_argument("SdpProblem: F_" + std::to_string(i) + " block " +
                                      std::to_string(b) + " has wrong size");
        }
        require_symmetric(F[i][b], tol);
      }
    }
    for (const auto& eq : equalities) {
      if (eq.coefficients.size() != c.size()) {
        throw std::invalid_argument("SdpProblem: equality has wrong length");
      }
    }
  }
};

enum class Status { optimal, primal_infeasible, dual_infeasible, numerical_trouble, iteration_limit };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::primal_infeasible: return "primal_infeasible";
    case Status::dual_infeasible: return "dual_infeasible";
    case Status::numerical_trouble: return "numerical_trouble";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

/// On primal_infeasible, Z and y hold a certificate (Z >= 0, Tr[F_i Z] = (A^T y)_i,
/// Tr[F0 Z] + b^T y = -1). On dual_infeasible, x holds a direction with
/// sum_i x_i F_i >= 0, A x = 0 and c^T x = -1.
struct SdpSolution {
  Vector x;
  BlockMatrix Z;
  Vector y;
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  Status status = Status::numerical_trouble;
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-8;            // absolute duality gap
  double feasibility_tol = 1e-7;  // relative primal/dual residuals
  int max_iter = 200;
  double step_fraction = 0.98;
  int refinement_steps = 2;
  bool verbose = false;  // one progress line per iteration on stderr
};

/// Optional starting point; used only when F(x) > 0 and Z > 0.
struct StartingPoint {
  Vector x;
  BlockMatrix Z;
  Vector y;
};

// ---------------------------------------------------------------------------
// block-vector arithmetic

inline double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

inline double norm(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

inline BlockMatrix zeros(const std::vector<int>& dims) {
  BlockMatrix out;
  out.reserve(dims.size());
  for (int d : dims) out.push_back(Matrix::Zero(d, d));
  return out;
}

inline BlockMatrix identity(const std::vector<int>& dims) {
  BlockMatrix out;
  out.reserve(dims.size());
  for (int d : dims) out.push_back(Matrix::Identity(d, d));
  return out;
}

inline void axpy(double a, const BlockMatrix& x, BlockMatrix& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

inline double min_eigenvalue(const BlockMatrix& m) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& b : m) v = std::min(v, cvwit::min_eigenvalue(0.5 * (b + b.transpose())));
  return v;
}

/// F(x) = F0 + sum_i x_i F_i.
inline BlockMatrix evaluate(const SdpProblem& p, const Vector& x) {
  BlockMatrix out = p.F0;
  for (int i = 0; i < p.variables(); ++i) {
    for (std::size_t b = 0; b < out.size(); ++b) {
      if (p.F[i][b].size() != 0) out[b] += x(i) * p.F[i][b];
    }
  }
  return out;
}

/// (Tr[F_i Z])_i
inline Vector adjoint(const SdpProblem& p, const BlockMatrix& z) {
  Vector out(p.variables());
  for (int i = 0; i < p.variables(); ++i) {
    double s = 0.0;
    for (std::size_t b = 0; b < z.size(); ++b) {
      if (p.F[i][b].size() != 0) s += p.F[i][b].cwiseProduct(z[b]).sum();
    }
    out(i) = s;
  }
  return out;
}

inline Matrix equality_matrix(const SdpProblem& p) {
  Matrix a(static_cast<Eigen::Index>(p.equalities.size()), p.variables());
  for (std::size_t j = 0; j < p.equalities.size(); ++j) a.row(static_cast<Eigen::Index>(j)) = p.equalities[j].coefficients.transpose();
  return a;
}

inline Vector equality_rhs(const SdpProblem& p) {
  Vector b(static_cast<Eigen::Index>(p.equalities.size()));
  for (std::size_t j = 0; j < p.equalities.size(); ++j) b(static_cast<Eigen::Index>(j)) = p.equalities[j].rhs;
  return b;
}

/// c^T x + Tr[F0 Z] + b^T y, which equals Tr[F(x) Z] for any primal-dual
/// feasible pair and is non-negative there.
inline double weak_duality_residual(const SdpProblem& p, const Vector& x, const BlockMatrix& z,
                                    const Vector& y = Vector()) {
  double r = p.c.dot(x) + inner(p.F0, z);
  if (y.size() > 0) r += equality_rhs(p).dot(y);
  return r;
}

namespace detail {

/// Nesterov-Todd scaling of one block: W(u) = R^T u R maps z to lambda and
/// W^{-T}(u) = Rti^T u Rti maps s to the same diagonal lambda.
struct BlockScaling {
  Matrix r;
  Matrix rti;
  Vector lambda;
};

inline std::optional<BlockScaling> nt_scaling(const Matrix& s, const Matrix& z) {
  Eigen::LLT<Matrix> ls(0.5 * (s + s.transpose()));
  Eigen::LLT<Matrix> lz(0.5 * (z + z.transpose()));
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return std::nullopt;
  const Matrix lsm = ls.matrixL();
  const Matrix lzm = lz.matrixL();
  Eigen::JacobiSVD<Matrix> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector lam = svd.singularValues();
  if (lam.minCoeff() <= 0.0 || !lam.allFinite()) return std::nullopt;
  const Vector isq = lam.cwiseSqrt().cwiseInverse();
  BlockScaling w;
  w.r = lsm * svd.matrixV() * isq.asDiagonal();
  w.rti = lzm * svd.matrixU() * isq.asDiagonal();
  w.lambda = lam;
  return w;
}

struct Scaling {
  std::vector<BlockScaling> blocks;

  [[nodiscard]] BlockMatrix apply(const BlockMatrix& u) const {  // W u
    BlockMatrix out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = blocks[k].r.transpose() * u[k] * blocks[k].r;
    return out;
  }
  [[nodiscard]] BlockMatrix apply_transpose(const BlockMatrix& u) const {  // W^T u
    BlockMatrix out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = blocks[k].r * u[k] * blocks[k].r.transpose();
    return out;
  }
  [[nodiscard]] Matrix inverse_transpose(std::size_t k, const Matrix& u) const {  // W^{-T} u
    return blocks[k].rti.transpose() * u * blocks[k].rti;
  }
  [[nodiscard]] BlockMatrix inverse_transpose(const BlockMatrix& u) const {
    BlockMatrix out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = inverse_transpose(k, u[k]);
    return out;
  }
  [[nodiscard]] BlockMatrix inverse(const BlockMatrix& u) const {  // W^{-1} u
    BlockMatrix out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = blocks[k].rti * u[k] * blocks[k].rti.transpose();
    return out;
  }
};

inline Scaling identity_scaling(const std::vector<int>& dims) {
  Scaling w;
  for (int d : dims) w.blocks.push_back({Matrix::Identity(d, d), Matrix::Identity(d, d), Vector::Ones(d)});
  return w;
}

/// Solves lambda o X = rhs for diagonal lambda, o the symmetrized product.
inline BlockMatrix lyapunov_solve(const Scaling& w, const BlockMatrix& rhs) {
  BlockMatrix out(rhs.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    const Vector& l = w.blocks[k].lambda;
    out[k].resize(rhs[k].rows(), rhs[k].cols());
    for (Eigen::Index i = 0; i < l.size(); ++i)
      for (Eigen::Index j = 0; j < l.size(); ++j) out[k](i, j) = 2.0 * rhs[k](i, j) / (l(i) + l(j));
  }
  return out;
}

inline BlockMatrix sym_product(const BlockMatrix& a, const BlockMatrix& b) {
  BlockMatrix out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = 0.5 * (a[k] * b[k] + b[k] * a[k]);
  return out;
}

/// Largest alpha with lambda + alpha * d >= 0, capped at `cap`.
inline double max_step(const Scaling& w, const BlockMatrix& d, double cap) {
  double alpha = cap;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const Vector isq = w.blocks[k].lambda.cwiseSqrt().cwiseInverse();
    Matrix m = isq.asDiagonal() * d[k] * isq.asDiagonal();
    const double lmin = cvwit::min_eigenvalue(0.5 * (m + m.transpose()));
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

struct KktSolution {
  Vector x;
  Vector y;
  BlockMatrix z;
};

/// Solves
///   [ 0  A^T  G^T    ] [x]   [bx]
///   [ A  0    0      ] [y] = [by]
///   [ G  0   -W^T W  ] [z]   [bz]
/// where G x = -sum_i x_i F_i, by reduction to the Schur complement
/// H = G^T (W^T W)^{-1} G.
class KktSolver {
 public:
  KktSolver(const SdpProblem& p, const Matrix& a, const Scaling& w) : p_(p), a_(a), w_(w) {
    const int t = p.variables();
    const auto ne = a.rows();
    const std::size_t nb = p.block_structure.size();
    // scaled constraint matrices W^{-T} G_i, grouped per block
    scaled_.assign(nb, {});
    users_.assign(nb, {});
    for (int i = 0; i < t; ++i) {
      for (std::size_t b = 0; b < nb; ++b) {
        if (p.F[i][b].size() == 0) continue;
        users_[b].push_back(i);
      }
    }
    Matrix h = Matrix::Zero(t, t);
    for (std::size_t b = 0; b < nb; ++b) {
      const int d = p.block_structure[b];
      Matrix cols(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(users_[b].size()));
      for (std::size_t u = 0; u < users_[b].size(); ++u) {
        Matrix g = -w.inverse_transpose(b, p.F[users_[b][u]][b]);
        cols.col(static_cast<Eigen::Index>(u)) = Eigen::Map<const Vector>(g.data(), g.size());
      }
      Matrix gram = cols.transpose() * cols;
      for (std::size_t u = 0; u < users_[b].size(); ++u)
        for (std::size_t v = 0; v < users_[b].size(); ++v)
          h(users_[b][u], users_[b][v]) += gram(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      scaled_[b] = std::move(cols);
    }
    Matrix kkt = Matrix::Zero(t + ne, t + ne);
    kkt.topLeftCorner(t, t) = h;
    kkt.topRightCorner(t, ne) = a.transpose();
    kkt.bottomLeftCorner(ne, t) = a;
    // symmetric Ruiz equilibration: factor D K D instead of K
    equil_ = Vector::Ones(t + ne);
    for (int sweep = 0; sweep < 8; ++sweep) {
      Vector r = kkt.cwiseAbs().rowwise().maxCoeff();
      bool done = true;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r(i) <= 0.0) continue;
        const double f = 1.0 / std::sqrt(r(i));
        if (std::abs(f - 1.0) > 0.1) done = false;
        r(i) = f;
        equil_(i) *= f;
      }
      for (Eigen::Index i = 0; i < r.size(); ++i)
        if (r(i) <= 0.0) r(i) = 1.0;
      kkt = r.asDiagonal() * kkt * r.asDiagonal();
      if (done) break;
    }
    // quasi-definite regularization keeps near-null directions from amplifying noise
    for (int i = 0; i < t; ++i) kkt(i, i) += kRegularization;
    for (Eigen::Index i = 0; i < ne; ++i) kkt(t + i, t + i) -= kRegularization;
    lu_.compute(kkt);
  }

  [[nodiscard]] KktSolution solve(const Vector& bx, const Vector& by, const BlockMatrix& bz,
                                  int refinement) const {
    KktSolution sol = solve_once(bx, by, bz);
    Residual res = residual(sol, bx, by, bz);
    for (int it = 0; it < refinement; ++it) {
      KktSolution next = solve_once(res.rx, res.ry, res.rz);
      next.x += sol.x;
      next.y += sol.y;
      axpy(1.0, sol.z, next.z);
      Residual nres = residual(next, bx, by, bz);
      if (!(nres.norm < res.norm)) break;
      sol = std::move(next);
      res = std::move(nres);
    }
    return sol;
  }

  [[nodiscard]] BlockMatrix apply_g(const Vector& x) const {
    BlockMatrix out = zeros(p_.block_structure);
    for (int i = 0; i < p_.variables(); ++i)
      for (std::size_t b = 0; b < out.size(); ++b)
        if (p_.F[i][b].size() != 0) out[b] -= x(i) * p_.F[i][b];
    return out;
  }

 private:
  static constexpr double kRegularization = 1e-14;

  struct Residual {
    Vector rx, ry;
    BlockMatrix rz;
    double norm = 0.0;
  };

  /// Residual of the full unreduced system; the z part is measured after W^{-T}.
  [[nodiscard]] Residual residual(const KktSolution& sol, const Vector& bx, const Vector& by,
                                  const BlockMatrix& bz) const {
    Residual r;
    r.rx = bx - a_.transpose() * sol.y + adjoint(p_, sol.z);
    r.ry = by - a_ * sol.x;
    r.rz = bz;
    axpy(-1.0, apply_g(sol.x), r.rz);
    axpy(1.0, w_.apply_transpose(w_.apply(sol.z)), r.rz);
    const double zn = norm(w_.inverse_transpose(r.rz));
    r.norm = std::sqrt(r.rx.squaredNorm() + r.ry.squaredNorm() + zn * zn);
    return r;
  }

  [[nodiscard]] KktSolution solve_once(const Vector& bx, const Vector& by,
                                       const BlockMatrix& bz) const {
    const int t = p_.variables();
    const auto ne = a_.rows();
    const BlockMatrix bzs = w_.inverse_transpose(bz);
    Vector rhs(t + ne);
    rhs.head(t) = bx;
    rhs.tail(ne) = by;
    for (std::size_t b = 0; b < bzs.size(); ++b) {
      if (users_[b].empty()) continue;
      Vector proj = scaled_[b].transpose() * Eigen::Map<const Vector>(bzs[b].data(), bzs[b].size());
      for (std::size_t u = 0; u < users_[b].size(); ++u) rhs(users_[b][u]) += proj(static_cast<Eigen::Index>(u));
    }
    Vector sol = equil_.cwiseProduct(lu_.solve(equil_.cwiseProduct(rhs)));
    KktSolution out;
    out.x = sol.head(t);
    out.y = sol.tail(ne);
    // W z = W^{-T}(G x - bz)
    BlockMatrix wz(bzs.size());
    for (std::size_t b = 0; b < bzs.size(); ++b) {
      const int d = p_.block_structure[b];
      Vector gx = Vector::Zero(static_cast<Eigen::Index>(d) * d);
      for (std::size_t u = 0; u < users_[b].size(); ++u) gx += out.x(users_[b][u]) * scaled_[b].col(static_cast<Eigen::Index>(u));
      wz[b] = Eigen::Map<const Matrix>(gx.data(), d, d) - bzs[b];
    }
    out.z = w_.inverse(wz);
    return out;
  }

  const SdpProblem& p_;
  const Matrix& a_;
  const Scaling& w_;
  std::vector<Matrix> scaled_;
  std::vector<std::vector<int>> users_;
  Vector equil_;
  Eigen::PartialPivLU<Matrix> lu_;
};

inline bool all_finite(const BlockMatrix& m) {
  return std::all_of(m.begin(), m.end(), [](const Matrix& b) { return b.allFinite(); });
}

inline void shift_into_cone(BlockMatrix& m) {
  const double lmin = min_eigenvalue(m);
  const double nrm = norm(m);
  const double ts = -lmin;
  if (ts >= -1e-8 * std::max(nrm, 1.0)) {
    for (auto& b : m) b += (1.0 + ts) * Matrix::Identity(b.rows(), b.cols());
  }
}

inline SdpSolution solve_trivial(const SdpProblem& p, double tol) {
  SdpSolution sol;
  sol.x = Vector(0);
  sol.y = Vector(0);
  sol.Z = zeros(p.block_structure);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_block = 0;
  Vector worst_vec;
  for (std::size_t b = 0; b < p.F0.size(); ++b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.F0[b]);
    if (es.eigenvalues()(0) < worst) {
      worst = es.eigenvalues()(0);
      worst_block = b;
      worst_vec = es.eigenvectors().col(0);
    }
  }
  if (p.F0.empty() || worst >= -tol) {
    sol.status = Status::optimal;
    sol.primal_objective = sol.dual_objective = sol.gap = 0.0;
    sol.primal_residual = sol.dual_residual = 0.0;
  } else {
    sol.status = Status::primal_infeasible;
    sol.Z[worst_block] = worst_vec * worst_vec.transpose() / (-worst);
  }
  return sol;
}

}  // namespace detail

/// Solve the block SDP. Deterministic: identical inputs give identical iterates.
inline SdpSolution solve(const SdpProblem& p, const SolverOptions& opt = {},
                         const std::optional<StartingPoint>& start = std::nullopt) {
  using namespace detail;
  p.validate();
  const int t = p.variables();
  const std::vector<int>& dims = p.block_structure;
  if (t == 0 && p.equalities.empty()) return solve_trivial(p, opt.tol);

  const Matrix a = equality_matrix(p);
  const Vector b = equality_rhs(p);
  const BlockMatrix& h = p.F0;
  double degree = 0.0;
  for (int d : dims) degree += d;

  auto apply_g = [&](const Vector& x) {
    BlockMatrix out = zeros(dims);
    for (int i = 0; i < t; ++i)
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (p.F[i][k].size() != 0) out[k] -= x(i) * p.F[i][k];
    return out;
  };
  auto apply_gt = [&](const BlockMatrix& z) -> Vector { return -adjoint(p, z); };

  const double resx0 = std::max(1.0, p.c.norm());
  const double resy0 = std::max(1.0, b.norm());
  const double resz0 = std::max(1.0, norm(h));

  Vector x, y;
  BlockMatrix s, z;
  bool started = false;
  if (start && start->x.size() == t && start->Z.size() == dims.size()) {
    BlockMatrix s0 = evaluate(p, start->x);
    if (min_eigenvalue(s0) > 0.0 && min_eigenvalue(start->Z) > 0.0) {
      x = start->x;
      s = std::move(s0);
      z = start->Z;
      y = start->y.size() == a.rows() ? start->y : Vector::Zero(a.rows());
      started = true;
    }
  }
  if (!started) {
    const Scaling unit = identity_scaling(dims);
    KktSolver k0(p, a, unit);
    KktSolution primal = k0.solve(Vector::Zero(t), b, h, opt.refinement_steps);
    x = primal.x;
    s = primal.z;
    for (auto& blk : s) blk = -blk;
    KktSolution dual = k0.solve(-p.c, Vector::Zero(a.rows()), zeros(dims), opt.refinement_steps);
    y = dual.y;
    z = dual.z;
    shift_into_cone(s);
    shift_into_cone(z);
  }
  double tau = 1.0;
  double kappa = 1.0;

  SdpSolution sol;
  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    sol.iterations = iter;
    if (!x.allFinite() || !y.allFinite() || !all_finite(s) || !all_finite(z) ||
        !std::isfinite(tau) || !std::isfinite(kappa)) {
      sol.status = Status::numerical_trouble;
      return sol;
    }

    // residuals of the embedding
    const Vector gtz = apply_gt(z);
    const Vector hrx = a.transpose() * y + gtz;
    const Vector rx = hrx + p.c * tau;
    const Vector hry = a * x;
    const Vector ry = hry - b * tau;
    BlockMatrix hrz = s;
    axpy(1.0, apply_g(x), hrz);
    BlockMatrix rz = hrz;
    axpy(-tau, h, rz);
    const double cx = p.c.dot(x);
    const double by = b.dot(y);
    const double hz = inner(h, z);
    const double rt = kappa + cx + by + hz;
    const double sz = inner(s, z);

    const double pres = std::max(ry.norm() / tau / resy0, norm(rz) / tau / resz0);
    const double dres = rx.norm() / tau / resx0;
    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    const double gap = sz / (tau * tau);

    sol.primal_residual = pres;
    sol.dual_residual = dres;
    if (opt.verbose) {
      std::fprintf(stderr, "%3d  pcost % .8e  dcost % .8e  gap %.2e  pres %.2e  dres %.2e  k/t %.2e\n", iter, pcost,
                   dcost, gap, pres, dres, kappa / tau);
    }
    if (pres <= opt.feasibility_tol && dres <= opt.feasibility_tol && gap <= opt.tol &&
        std::abs(pcost - dcost) <= opt.tol) {
      sol.status = Status::optimal;
      sol.x = x / tau;
      sol.y = y / tau;
      sol.Z = z;
      for (auto& blk : sol.Z) {
        blk /= tau;
        blk = 0.5 * (blk + blk.transpose()).eval();
      }
      sol.primal_objective = pcost;
      sol.dual_objective = dcost;
      sol.gap = pcost - dcost;
      return sol;
    }
    if (by + hz < 0.0) {
      const double pinf = hrx.norm() / resx0 / (-(by + hz));
      if (pinf <= opt.feasibility_tol) {
        sol.status = Status::primal_infeasible;
        sol.x = Vector::Zero(t);
        sol.y = y / (-(by + hz));
        sol.Z = z;
        for (auto& blk : sol.Z) blk /= -(by + hz);
        return sol;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max(hry.norm() / resy0, norm(hrz) / resz0) / (-cx);
      if (dinf <= opt.feasibility_tol) {
        sol.status = Status::dual_infeasible;
        sol.x = x / (-cx);
        sol.y = Vector::Zero(a.rows());
        sol.Z = zeros(dims);
        return sol;
      }
    }
    if (iter == opt.max_iter) break;

    Scaling w;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      auto blk = nt_scaling(s[k], z[k]);
      if (!blk) {
        if (opt.verbose) std::fprintf(stderr, "scaling failed in block %zu\n", k);
        sol.status = Status::numerical_trouble;
        return sol;
      }
      w.blocks.push_back(std::move(*blk));
    }
    const double mu = (sz + tau * kappa) / (degree + 1.0);
    BlockMatrix lambda_sq(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
      lambda_sq[k] = w.blocks[k].lambda.cwiseAbs2().asDiagonal();
    }

    KktSolver kkt(p, a, w);
    const KktSolution u1 = kkt.solve(-p.c, b, h, opt.refinement_steps);
    const double denom_base = p.c.dot(u1.x) + b.dot(u1.y) + inner(h, u1.z);

    struct Direction {
      Vector dx, dy;
      BlockMatrix dz, ds, dzs, dss;  // unscaled and W-scaled
      double dtau = 0.0, dkappa = 0.0;
    };

    auto direction = [&](double sigma, const BlockMatrix& ds_rhs, double dkappa_rhs) {
      const double f = -(1.0 - sigma);
      BlockMatrix q = lyapunov_solve(w, ds_rhs);
      BlockMatrix rhs3 = rz;
      for (auto& blk : rhs3) blk *= f;
      axpy(-1.0, w.apply_transpose(q), rhs3);
      const KktSolution u2 = kkt.solve(f * rx, f * ry, rhs3, opt.refinement_steps);
      const double dtau_rhs = f * rt;
      Direction d;
      d.dtau = (dtau_rhs - dkappa_rhs / tau - p.c.dot(u2.x) - b.dot(u2.y) - inner(h, u2.z)) /
               (denom_base - kappa / tau);
      d.dx = u2.x + d.dtau * u1.x;
      d.dy = u2.y + d.dtau * u1.y;
      d.dz = u2.z;
      axpy(d.dtau, u1.z, d.dz);
      d.dzs = w.apply(d.dz);
      d.dss = q;
      axpy(-1.0, d.dzs, d.dss);
      d.ds = w.apply_transpose(d.dss);
      d.dkappa = (dkappa_rhs - kappa * d.dtau) / tau;
      return d;
    };

    auto step_length = [&](const Direction& d, double cap) {
      double alpha = std::min(max_step(w, d.dss, cap), max_step(w, d.dzs, cap));
      if (d.dtau < 0.0) alpha = std::min(alpha, -tau / d.dtau);
      if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa / d.dkappa);
      return alpha;
    };

    // predictor
    BlockMatrix ds_aff = lambda_sq;
    for (auto& blk : ds_aff) blk = -blk;
    const Direction aff = direction(0.0, ds_aff, -tau * kappa);
    const double alpha_aff = std::min(1.0, step_length(aff, 1.0));
    const double sigma = std::pow(std::clamp(1.0 - alpha_aff, 0.0, 1.0), 3);

    // corrector
    BlockMatrix ds_cc = sym_product(aff.dss, aff.dzs);
    for (std::size_t k = 0; k < dims.size(); ++k) {
      ds_cc[k] = -lambda_sq[k] - ds_cc[k];
      ds_cc[k].diagonal().array() += sigma * mu;
    }
    const double dk_cc = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
    const Direction dir = direction(sigma, ds_cc, dk_cc);
    const double alpha = std::min(1.0, opt.step_fraction * step_length(dir, 1.0 / opt.step_fraction));

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    axpy(alpha, dir.ds, s);
    axpy(alpha, dir.dz, z);
    for (auto& blk : s) blk = 0.5 * (blk + blk.transpose()).eval();
    for (auto& blk : z) blk = 0.5 * (blk + blk.transpose()).eval();
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }
  sol.status = Status::iteration_limit;
  sol.x = x / tau;
  sol.y = y / tau;
  sol.Z = z;
  for (auto& blk : sol.Z) blk /= tau;
  sol.primal_objective = p.c.dot(x) / tau;
  sol.dual_objective = -(b.dot(y) + inner(h, z)) / tau;
  sol.gap = sol.primal_objective - sol.dual_objective;
  return sol;
}

}  // namespace cvwit::sdp
