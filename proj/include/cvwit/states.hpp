#pragma once

// Covariance matrices of the reference states, plus seeded random instances.

#include "cvwit/symplectic.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cvwit {

/// Counter-based generator: draw k of stream `seed` is splitmix64(seed, k).
/// Output is a pure function of (seed, counter), identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (++counter_);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Two-mode squeezed vacuum. The squeezed combinations are (x1 + x2)/sqrt 2 and
/// (p1 - p2)/sqrt 2, so the balanced Duan witness evaluates to exp(-2r).
inline CovarianceMatrix two_mode_squeezed(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("two_mode_squeezed: r must be >= 0");
  const double ch = std::cosh(2.0 * r);
  const double sh = std::sinh(2.0 * r);
  Matrix g = ch * Matrix::Identity(4, 4);
  g(0, 2) = g(2, 0) = -sh;
  g(1, 3) = g(3, 1) = sh;
  return CovarianceMatrix(g);
}

/// PPT-entangled 2x2-mode state of Werner and Wolf (modes split [2, 2]).
inline CovarianceMatrix ww_state() {
  Matrix g(8, 8);
  // clang-format off
  g << 2,  0,  0,  0,  1,  0,  0,  0,
       0,  1,  0,  0,  0,  0,  0, -1,
       0,  0,  2,  0,  0,  0, -1,  0,
       0,  0,  0,  1,  0, -1,  0,  0,
       1,  0,  0,  0,  2,  0,  0,  0,
       0,  0,  0, -1,  0,  4,  0,  0,
       0,  0, -1,  0,  0,  0,  2,  0,
       0, -1,  0,  0,  0,  0,  0,  4;
  // clang-format on
  return CovarianceMatrix(g);
}

/// GHZ-like pure state of N modes, with squeezing r1 on the first input mode
/// and r2 on the remaining N-1 before the beam-splitter network.
inline CovarianceMatrix ghz_covariance(int parties, double r1, double r2) {
  if (parties < 2) throw std::invalid_argument("ghz_covariance: need at least 2 parties");
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw std::invalid_argument("ghz_covariance: squeezing must be positive");
  const double n = parties;
  const double a = std::exp(2 * r1) / n + (n - 1) / n * std::exp(-2 * r2);
  const double b = std::exp(-2 * r1) / n + (n - 1) / n * std::exp(2 * r2);
  const double c = (std::exp(2 * r1) - std::exp(-2 * r2)) / n;
  const double d = (std::exp(-2 * r1) - std::exp(2 * r2)) / n;
  Matrix g = Matrix::Zero(2 * parties, 2 * parties);
  for (int i = 0; i < parties; ++i) {
    for (int j = 0; j < parties; ++j) {
      g(2 * i, 2 * j) = i == j ? a : c;
      g(2 * i + 1, 2 * j + 1) = i == j ? b : d;
    }
  }
  return CovarianceMatrix(g);
}

/// One entangled pair obtained by undoing partial transposition and symplectic
/// diagonalization: start from diag(e^{-2r}, e^{-2r}, alpha e^{2r}, alpha e^{2r}),
/// apply a balanced beam splitter, then transpose mode 1. `mirrored` flips the
/// beam-splitter orientation, which changes the sign of the correlations.
inline CovarianceMatrix swap_input_pair(double r, double alpha, bool mirrored = false) {
  if (!(r > 0.0) || !(alpha >= 1.0)) throw std::invalid_argument("swap_input_pair: need r > 0, alpha >= 1");
  Vector d(4);
  d << std::exp(-2 * r), std::exp(-2 * r), alpha * std::exp(2 * r), alpha * std::exp(2 * r);
  const Matrix bs = mirrored ? beam_splitter_50_50(2, 0, 1) : beam_splitter_50_50(2, 1, 0);
  CovarianceMatrix g(bs * d.asDiagonal() * bs.transpose(), 1e-12);
  return partial_transpose(g, {1});
}

/// Two pairs on modes (0, 1) and (2, 3), before the final beam splitter.
inline CovarianceMatrix swap_pairs(double r, double alpha) {
  Matrix g = Matrix::Zero(8, 8);
  g.topLeftCorner(4, 4) = swap_input_pair(r, alpha, false).matrix();
  g.bottomRightCorner(4, 4) = swap_input_pair(r, alpha, true).matrix();
  return CovarianceMatrix(g);
}

/// Entanglement-swapping state after modes 1 and 2 (zero-based) meet at a
/// balanced beam splitter.
inline CovarianceMatrix swap_state(double r, double alpha) {
  return apply_symplectic(swap_pairs(r, alpha), beam_splitter_50_50(4, 2, 1));
}

/// gamma + kappa * identity.
inline CovarianceMatrix add_noise(const CovarianceMatrix& gamma, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("add_noise: kappa must be >= 0");
  return CovarianceMatrix(gamma.matrix() + kappa * Matrix::Identity(gamma.matrix().rows(), gamma.matrix().cols()));
}

struct RandomStateOptions {
  double max_squeezing = 0.8;  // |ln d| bound for each squeezer
  int steps = 0;               // gates in the random circuit; 0 means 4n
  bool xp_block = false;       // omit phase rotations, keeping x and p uncoupled
};

/// S (I + D) S^T with D a non-negative diagonal of entries in [0, mix) and S a
/// seeded random product of squeezers, beam splitters, phase rotations and mode
/// permutations. Valid by construction and reproducible per seed.
inline CovarianceMatrix random_covariance(int modes, double mix, std::uint64_t seed,
                                          const RandomStateOptions& opt = {}) {
  if (modes < 1) throw std::invalid_argument("random_covariance: need at least one mode");
  if (!(mix >= 0.0)) throw std::invalid_argument("random_covariance: mix must be >= 0");
  CounterRng rng(seed);
  Vector diag = Vector::Ones(2 * modes);
  for (Eigen::Index i = 0; i < diag.size(); ++i) diag(i) += mix * rng.uniform();
  Matrix s = Matrix::Identity(2 * modes, 2 * modes);
  const int steps = opt.steps > 0 ? opt.steps : 4 * modes;
  const double pi = std::acos(-1.0);
  for (int k = 0; k < steps; ++k) {
    const int kinds = opt.xp_block ? 3 : 4;
    const int kind = rng.below(kinds);
    const int m = rng.below(modes);
    Matrix g;
    if (kind == 0) {
      g = squeezer(modes, m, std::exp(rng.uniform(-opt.max_squeezing, opt.max_squeezing)));
    } else if (kind == 1) {
      if (modes < 2) continue;
      int other = rng.below(modes - 1);
      if (other >= m) ++other;
      g = beam_splitter(modes, m, other, rng.uniform(0.0, pi));
    } else if (kind == 2) {
      std::vector<int> perm(static_cast<std::size_t>(modes));
      for (int i = 0; i < modes; ++i) perm[static_cast<std::size_t>(i)] = i;
      for (int i = modes - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.below(i + 1))]);
      g = mode_permutation(modes, perm);
    } else {
      g = phase_rotation(modes, m, rng.uniform(0.0, 2.0 * pi));
    }
    s = g * s;
  }
  Matrix out = s * diag.asDiagonal() * s.transpose();
  return CovarianceMatrix(0.5 * (out + out.transpose()));
}

}  // namespace cvwit
