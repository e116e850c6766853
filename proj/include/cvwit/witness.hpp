#pragma once

// Optimal entanglement witnesses based on second moments.
//
// A witness is a real symmetric Z >= 0 with Tr[Z gamma_s] >= 1 on every
// separable covariance gamma_s. The optimal witness for a given gamma is read
// off the dual of the separability-margin program
//
//   maximize x_e  s.t.  gamma - (separable part) >= 0,
//                       separable part + (1 + x_e) i sigma >= 0,
//
// and satisfies Tr[Z gamma] = 1 + x_e at the optimum.

#include "cvwit/sdp.hpp"
#include "cvwit/symplectic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvwit {

/// Two-block coarse graining of N parties; `mask` marks the parties of the
/// first block and always contains party 0.
struct Bipartition {
  unsigned mask = 0;
  int parties = 0;

  [[nodiscard]] unsigned complement() const { return ((1u << parties) - 1u) & ~mask; }
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

/// All 2^(N-1) - 1 bipartitions of N parties, ascending by mask.
inline std::vector<Bipartition> enumerate_bipartitions(int parties) {
  if (parties < 2) throw std::invalid_argument("enumerate_bipartitions: need at least 2 parties");
  if (parties > 20) throw std::invalid_argument("enumerate_bipartitions: too many parties");
  std::vector<Bipartition> out;
  const unsigned full = (1u << parties) - 1u;
  for (unsigned m = 1; m < full; m += 2) out.push_back({m, parties});
  return out;
}

/// Restricts witnesses to Tr[Z A] = 0.
struct MeasurementConstraint {
  Matrix A;
};

/// Real symmetric basis element: ones at (j, k) and (k, j), zero elsewhere.
inline Matrix symmetric_basis(int j, int k, int n) {
  if (j < 0 || k < 0 || j >= n || k >= n) throw std::out_of_range("symmetric_basis: index out of range");
  Matrix f = Matrix::Zero(n, n);
  f(j, k) = 1.0;
  f(k, j) = 1.0;
  return f;
}

/// Constraints forbidding every x-p cross entry of the witness.
inline std::vector<MeasurementConstraint> xp_cross_constraints(int modes) {
  std::vector<MeasurementConstraint> out;
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j) out.push_back({symmetric_basis(2 * i, 2 * j + 1, 2 * modes)});
  return out;
}

struct ValidationTolerances {
  double psd = 1e-8;      // Z >= -psd
  double block = 1e-6;    // block symplectic traces >= 1/2 - block
  double strict = 1e-10;  // str[Z] < 1/2 - strict
};

/// The three witness conditions: (i) Z >= 0, (ii) the party-diagonal blocks
/// have symplectic traces summing to at least 1/2, (iii) str[Z] < 1/2. For the
/// multipartite variant (ii) must hold for every bipartition, and
/// block_str_sum is the smallest of those sums.
struct ValidationReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
  double block_str_sum = 0.0;
  double total_str = 0.0;
  std::vector<double> split_sums;
  bool cond_i = false;
  bool cond_ii = false;
  bool cond_iii = false;

  [[nodiscard]] bool is_witness() const { return cond_i && cond_ii && cond_iii; }
};

namespace detail {

inline void require_witness_shape(const Matrix& z, const ModePartition& partition) {
  require_phase_space(z);
  if (z.rows() != 2 * partition.modes()) {
    throw std::invalid_argument("witness dimension does not match the partition");
  }
  require_symmetric(z, 1e-8 * std::max(1.0, z.cwiseAbs().maxCoeff()));
}

/// Symplectic trace of a principal block, tolerating tiny negative eigenvalues.
inline double block_str(const Matrix& z, const std::vector<int>& idx) {
  Matrix b = principal_submatrix(z, idx);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b + b.transpose()));
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  Matrix clipped = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return symplectic_trace(0.5 * (clipped + clipped.transpose()), 1e-6);
}

inline std::vector<int> all_indices(int dim) {
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

inline void fill_common(ValidationReport& r, const Matrix& z, const ValidationTolerances& tol) {
  r.min_eigenvalue = min_eigenvalue(0.5 * (z + z.transpose()));
  r.psd = r.min_eigenvalue >= -tol.psd;
  r.cond_i = r.psd;
  r.total_str = block_str(z, all_indices(static_cast<int>(z.rows())));
  r.cond_iii = r.total_str < 0.5 - tol.strict;
}

}  // namespace detail

inline ValidationReport validate_witness(const Matrix& z, const ModePartition& partition,
                                         const ValidationTolerances& tol = {}) {
  detail::require_witness_shape(z, partition);
  ValidationReport r;
  detail::fill_common(r, z, tol);
  for (std::size_t k = 0; k < partition.parties(); ++k) {
    r.block_str_sum += detail::block_str(z, partition.quadratures(k));
  }
  r.cond_ii = r.block_str_sum >= 0.5 - tol.block;
  return r;
}

inline ValidationReport validate_multipartite_witness(const Matrix& z, const ModePartition& partition,
                                                      const ValidationTolerances& tol = {}) {
  detail::require_witness_shape(z, partition);
  if (partition.parties() < 2) throw std::invalid_argument("multipartite validation needs at least 2 parties");
  ValidationReport r;
  detail::fill_common(r, z, tol);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& bp : enumerate_bipartitions(static_cast<int>(partition.parties()))) {
    const double s = detail::block_str(z, partition.quadratures_of_mask(bp.mask)) +
                     detail::block_str(z, partition.quadratures_of_mask(bp.complement()));
    r.split_sums.push_back(s);
    worst = std::min(worst, s);
  }
  r.block_str_sum = worst;
  r.cond_ii = worst >= 0.5 - tol.block;
  return r;
}

/// Two-mode witness of the Duan criterion with weight a (a = 1 is the
/// balanced test on (x1 + x2)/sqrt 2 and (p1 - p2)/sqrt 2).
inline Matrix duan_witness(double a) {
  if (a == 0.0 || !std::isfinite(a)) throw std::invalid_argument("duan_witness: a must be nonzero");
  const double a2 = a * a;
  const double sgn = a > 0 ? 1.0 : -1.0;
  Matrix z(4, 4);
  // clang-format off
  z << a2,   0,    sgn,      0,
       0,    a2,   0,       -sgn,
       sgn,  0,    1 / a2,   0,
       0,   -sgn,  0,        1 / a2;
  // clang-format on
  return z / (2.0 * (a2 + 1.0 / a2));
}

struct WitnessOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool strict_start = true;  // seed the solver with the known strictly feasible pair
  bool verbose = false;
};

struct WitnessResult {
  Matrix Z;
  double c = std::numeric_limits<double>::quiet_NaN();
  double x_e = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  sdp::Status status = sdp::Status::numerical_trouble;
  int iterations = 0;
  ValidationReport conditions;
  double rescale = 1.0;  // factor applied to the raw dual so that condition (ii) holds exactly
  bool multipartite = false;

  [[nodiscard]] bool optimal() const { return status == sdp::Status::optimal; }
};

namespace detail {

/// Parameterizes a symmetric matrix on a set of quadratures by its upper
/// triangle; each entry becomes one SDP variable.
struct SymmetricBlockVars {
  std::vector<int> quads;
  int first_var = 0;

  [[nodiscard]] int count() const {
    const int d = static_cast<int>(quads.size());
    return d * (d + 1) / 2;
  }
};

inline Matrix unit_symmetric(int dim, int a, int b) {
  Matrix e = Matrix::Zero(dim, dim);
  e(a, b) = 1.0;
  e(b, a) = 1.0;
  if (a == b) e(a, a) = 1.0;
  return e;
}

/// Adds the entries of `blk` as variables: -E in the gamma block `outer`,
/// real_embedding(E, 0) in the Heisenberg block `inner_block`.
inline void add_block_variables(sdp::SdpProblem& p, SymmetricBlockVars& blk, std::size_t outer,
                                std::size_t inner_block, int full_dim) {
  const int d = static_cast<int>(blk.quads.size());
  blk.first_var = p.variables();
  const std::size_t nb = p.block_structure.size();
  std::vector<sdp::BlockMatrix> fs;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      sdp::BlockMatrix f(nb);
      f[outer] = -unit_symmetric(full_dim, blk.quads[static_cast<std::size_t>(a)], blk.quads[static_cast<std::size_t>(b)]);
      f[inner_block] = real_embedding(unit_symmetric(d, a, b), Matrix::Zero(d, d));
      fs.push_back(std::move(f));
    }
  }
  const auto old = p.c.size();
  p.c.conservativeResize(old + static_cast<Eigen::Index>(fs.size()));
  p.c.tail(static_cast<Eigen::Index>(fs.size())).setZero();
  for (auto& f : fs) p.F.push_back(std::move(f));
}

inline int add_variable(sdp::SdpProblem& p, double cost, sdp::BlockMatrix f) {
  const auto old = p.c.size();
  p.c.conservativeResize(old + 1);
  p.c(old) = cost;
  p.F.push_back(std::move(f));
  return static_cast<int>(old);
}

inline Matrix local_sigma(int quads) { return symplectic_form(quads / 2); }

/// Symmetrize and drop eigenvalues in (-tol, 0).
inline Matrix clean_witness(const Matrix& z, double tol) {
  Matrix s = 0.5 * (z + z.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector ev = es.eigenvalues();
  bool changed = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0 && ev(i) > -tol) {
      ev(i) = 0.0;
      changed = true;
    }
  }
  if (!changed) return s;
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline void check_inputs(const CovarianceMatrix& gamma, const ModePartition& partition,
                         const std::vector<MeasurementConstraint>& constraints) {
  if (partition.modes() != gamma.modes()) {
    throw std::invalid_argument("partition covers " + std::to_string(partition.modes()) +
                                " modes but the covariance has " + std::to_string(gamma.modes()));
  }
  for (const auto& con : constraints) {
    if (con.A.rows() != gamma.matrix().rows() || con.A.cols() != gamma.matrix().cols()) {
      throw std::invalid_argument("measurement constraint has wrong dimension");
    }
    require_symmetric(con.A);
  }
}

inline bool identity_satisfies(const std::vector<MeasurementConstraint>& constraints) {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const MeasurementConstraint& m) { return std::abs(m.A.trace()) <= 1e-12; });
}

/// The margin is read off the primal as x_e = margin . x + offset.
inline WitnessResult finish(const sdp::SdpSolution& sol, const CovarianceMatrix& gamma, const Vector& margin,
                            double offset, double tol) {
  WitnessResult out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status != sdp::Status::optimal) return out;
  out.Z = clean_witness(sol.Z[0], tol);
  out.x_e = margin.dot(sol.x) + offset;
  out.c = (out.Z.cwiseProduct(gamma.matrix())).sum() - 1.0;
  out.gap = sol.gap;
  return out;
}

/// Near rank-deficient blocks make the symplectic trace square-root sensitive
/// to solver noise. str is homogeneous, so scaling Z up by 1/(2 s) restores
/// condition (ii) exactly when the block sum s fell just short of 1/2.
template <class Validate>
void certify(WitnessResult& out, const CovarianceMatrix& gamma, Validate&& validate) {
  out.conditions = validate(out.Z);
  const double s = out.conditions.block_str_sum;
  if (s < 0.5 && s > 0.25) {
    out.rescale = 0.5 / s;
    out.Z *= out.rescale;
    out.c = (out.Z.cwiseProduct(gamma.matrix())).sum() - 1.0;
    out.conditions = validate(out.Z);
  }
}

}  // namespace detail

/// Optimal witness against full separability with respect to `partition`.
/// Measurement constraints restrict the witness to Tr[Z A_i] = 0.
inline WitnessResult fully_wit(const CovarianceMatrix& gamma, const ModePartition& partition,
                               const std::vector<MeasurementConstraint>& constraints = {},
                               const WitnessOptions& opt = {}) {
  detail::check_inputs(gamma, partition, constraints);
  const int dim = static_cast<int>(gamma.matrix().rows());
  const int n = gamma.modes();
  const std::size_t parties = partition.parties();

  sdp::SdpProblem p;
  p.c = Vector(0);
  p.block_structure.push_back(dim);
  p.F0.push_back(gamma.matrix());
  for (std::size_t k = 0; k < parties; ++k) {
    const int q = 2 * partition.size(k);
    p.block_structure.push_back(2 * q);
    p.F0.push_back(real_embedding(Matrix::Zero(q, q), detail::local_sigma(q)));
  }
  std::vector<detail::SymmetricBlockVars> blocks(parties);
  for (std::size_t k = 0; k < parties; ++k) {
    blocks[k].quads = partition.quadratures(k);
    detail::add_block_variables(p, blocks[k], 0, k + 1, dim);
  }
  sdp::BlockMatrix fxe(p.block_structure.size());
  for (std::size_t k = 0; k < parties; ++k) fxe[k + 1] = p.F0[k + 1];
  const int xe = detail::add_variable(p, -1.0, std::move(fxe));
  for (const auto& con : constraints) {
    sdp::BlockMatrix fa(p.block_structure.size());
    fa[0] = con.A;
    detail::add_variable(p, 0.0, std::move(fa));
  }

  std::optional<sdp::StartingPoint> start;
  const double lmin = min_eigenvalue(gamma.matrix());
  if (opt.strict_start && lmin > 0.0 && detail::identity_satisfies(constraints)) {
    const double eps = 0.5 * lmin;
    sdp::StartingPoint sp;
    sp.x = Vector::Zero(p.variables());
    for (const auto& blk : blocks) {
      const int d = static_cast<int>(blk.quads.size());
      int v = blk.first_var;
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b, ++v)
          if (a == b) sp.x(v) = eps;
    }
    sp.x(xe) = 0.5 * eps - 1.0;
    sp.Z.push_back(Matrix::Identity(dim, dim));
    for (std::size_t k = 0; k < parties; ++k) {
      const int q = 2 * partition.size(k);
      sp.Z.push_back(0.5 * real_embedding(Matrix::Identity(q, q), -detail::local_sigma(q) / (2.0 * n)));
    }
    start = std::move(sp);
  }

  sdp::SolverOptions so;
  so.tol = opt.tol;
  so.max_iter = opt.max_iter;
  so.verbose = opt.verbose;
  const auto sol = sdp::solve(p, so, start);
  Vector margin = Vector::Zero(p.variables());
  margin(xe) = 1.0;
  WitnessResult out = detail::finish(sol, gamma, margin, 0.0, opt.tol);
  if (out.optimal()) detail::certify(out, gamma, [&](const Matrix& z) { return validate_witness(z, partition); });
  return out;
}

/// Optimal witness against bi-separability: detects genuine multipartite
/// entanglement. Two parties reduce to fully_wit.
inline WitnessResult multi_wit(const CovarianceMatrix& gamma, const ModePartition& partition,
                               const std::vector<MeasurementConstraint>& constraints = {},
                               const WitnessOptions& opt = {}) {
  detail::check_inputs(gamma, partition, constraints);
  if (partition.parties() < 2) throw std::invalid_argument("multi_wit: need at least 2 parties");
  if (partition.parties() == 2) {
    WitnessResult r = fully_wit(gamma, partition, constraints, opt);
    r.multipartite = true;
    if (r.optimal()) r.conditions = validate_multipartite_witness(r.Z, partition);
    return r;
  }
  const int dim = static_cast<int>(gamma.matrix().rows());
  const int n = gamma.modes();
  const auto splits = enumerate_bipartitions(static_cast<int>(partition.parties()));
  const std::size_t nsplit = splits.size();

  sdp::SdpProblem p;
  p.c = Vector(0);
  p.block_structure.push_back(dim);
  p.F0.push_back(gamma.matrix());
  // two Heisenberg blocks per bipartition, then one scalar block per weight
  std::vector<std::array<detail::SymmetricBlockVars, 2>> groups(nsplit);
  for (std::size_t k = 0; k < nsplit; ++k) {
    groups[k][0].quads = partition.quadratures_of_mask(splits[k].mask);
    groups[k][1].quads = partition.quadratures_of_mask(splits[k].complement());
    for (const auto& g : groups[k]) {
      const int q = static_cast<int>(g.quads.size());
      p.block_structure.push_back(2 * q);
      p.F0.push_back(Matrix::Zero(2 * q, 2 * q));
    }
  }
  const std::size_t weight_block0 = p.block_structure.size();
  for (std::size_t k = 0; k < nsplit; ++k) {
    p.block_structure.push_back(1);
    p.F0.push_back(Matrix::Zero(1, 1));
  }
  for (std::size_t k = 0; k < nsplit; ++k) {
    for (std::size_t g = 0; g < 2; ++g) {
      detail::add_block_variables(p, groups[k][g], 0, 1 + 2 * k + g, dim);
    }
  }
  std::vector<int> weights;
  for (std::size_t k = 0; k < nsplit; ++k) {
    sdp::BlockMatrix f(p.block_structure.size());
    for (std::size_t g = 0; g < 2; ++g) {
      const int q = static_cast<int>(groups[k][g].quads.size());
      f[1 + 2 * k + g] = real_embedding(Matrix::Zero(q, q), detail::local_sigma(q));
    }
    f[weight_block0 + k] = Matrix::Ones(1, 1);
    weights.push_back(detail::add_variable(p, -1.0, std::move(f)));
  }
  // x_e = sum_k lambda_k - 1 is substituted out of the program
  for (const auto& con : constraints) {
    sdp::BlockMatrix fa(p.block_structure.size());
    fa[0] = con.A;
    detail::add_variable(p, 0.0, std::move(fa));
  }

  std::optional<sdp::StartingPoint> start;
  const double lmin = min_eigenvalue(gamma.matrix());
  if (opt.strict_start && lmin > 0.0 && detail::identity_satisfies(constraints)) {
    const double eps = 0.5 * lmin;
    const double kk = static_cast<double>(nsplit);
    sdp::StartingPoint sp;
    sp.x = Vector::Zero(p.variables());
    for (const auto& pair : groups) {
      for (const auto& blk : pair) {
        const int d = static_cast<int>(blk.quads.size());
        int v = blk.first_var;
        for (int a = 0; a < d; ++a)
          for (int b = a; b < d; ++b, ++v)
            if (a == b) sp.x(v) = eps / kk;
      }
    }
    for (int w : weights) sp.x(w) = eps / (2.0 * kk);
    sp.Z.push_back(Matrix::Identity(dim, dim));
    for (std::size_t k = 0; k < nsplit; ++k) {
      for (const auto& blk : groups[k]) {
        const int q = static_cast<int>(blk.quads.size());
        sp.Z.push_back(0.5 * real_embedding(Matrix::Identity(q, q), -detail::local_sigma(q) / static_cast<double>(n)));
      }
    }
    for (std::size_t k = 0; k < nsplit; ++k) sp.Z.push_back(Matrix::Ones(1, 1));
    start = std::move(sp);
  }

  sdp::SolverOptions so;
  so.tol = opt.tol;
  so.max_iter = opt.max_iter;
  so.verbose = opt.verbose;
  const auto sol = sdp::solve(p, so, start);
  Vector margin = Vector::Zero(p.variables());
  for (int w : weights) margin(w) = 1.0;
  WitnessResult out = detail::finish(sol, gamma, margin, -1.0, opt.tol);
  out.multipartite = true;
  if (out.optimal()) {
    detail::certify(out, gamma, [&](const Matrix& z) { return validate_multipartite_witness(z, partition); });
  }
  return out;
}

enum class Verdict { separable, entangled, boundary };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::separable: return "separable";
    case Verdict::entangled: return "entangled";
    case Verdict::boundary: return "boundary";
  }
  return "unknown";
}

/// Sign of the margin with a boundary band |x_e| < 10 tol.
inline Verdict verdict_from_margin(double x_e, double tol) {
  if (std::abs(x_e) < 10.0 * tol) return Verdict::boundary;
  return x_e < 0.0 ? Verdict::entangled : Verdict::separable;
}

/// Separability of gamma across `partition`. A separable verdict is exact for
/// Gaussian states only: a non-Gaussian state with these second moments may
/// still be entangled.
inline Verdict decide_separability(const CovarianceMatrix& gamma, const ModePartition& partition,
                                   double tol = 1e-8) {
  WitnessOptions opt;
  opt.tol = tol;
  const WitnessResult r = fully_wit(gamma, partition, {}, opt);
  if (!r.optimal()) {
    throw std::runtime_error("decide_separability: solver finished with status " + sdp::to_string(r.status));
  }
  return verdict_from_margin(r.x_e, tol);
}

}  // namespace cvwit
