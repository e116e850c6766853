#pragma once

#include "cvwit/states.hpp"
#include "cvwit/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <vector>

namespace cvwit::testing {

/// Random symplectic matrix from a seeded gate sequence.
inline Matrix random_symplectic(int n, std::uint64_t seed, int steps = 12) {
  CounterRng rng(seed);
  Matrix s = Matrix::Identity(2 * n, 2 * n);
  for (int k = 0; k < steps; ++k) {
    const int m = rng.below(n);
    switch (rng.below(n > 1 ? 3 : 2)) {
      case 0: s = squeezer(n, m, std::exp(rng.uniform(-0.7, 0.7))) * s; break;
      case 1: s = phase_rotation(n, m, rng.uniform(0.0, 6.283185307179586)) * s; break;
      default: {
        int o = rng.below(n - 1);
        if (o >= m) ++o;
        s = beam_splitter(n, m, o, rng.uniform(0.0, 3.141592653589793)) * s;
      }
    }
  }
  return s;
}

/// Symplectic eigenvalues from the spectrum of sigma M (eigenvalues +-i s_j),
/// independent of the library routine.
inline std::vector<double> oracle_symplectic_eigenvalues(const Matrix& m) {
  const int n = static_cast<int>(m.rows() / 2);
  Eigen::EigenSolver<Matrix> es(symplectic_form(n) * m);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < mags.size(); j += 2) out.push_back(0.5 * (mags[j] + mags[j + 1]));
  return out;
}

/// Minimum eigenvalue of gamma + i sigma computed in complex arithmetic.
inline double oracle_heisenberg_margin(const Matrix& gamma) {
  const int n = static_cast<int>(gamma.rows() / 2);
  Eigen::MatrixXcd h = gamma.cast<std::complex<double>>();
  h += std::complex<double>(0.0, 1.0) * symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return es.eigenvalues().minCoeff();
}

/// PPT oracle across the split first|rest for modes [0, first).
inline bool oracle_ppt(const Matrix& gamma, int first) {
  Matrix g = gamma;
  for (int m = 0; m < first; ++m) {
    g.row(2 * m + 1) *= -1.0;
    g.col(2 * m + 1) *= -1.0;
  }
  return oracle_heisenberg_margin(g) >= 0.0;
}

inline double trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

}  // namespace cvwit::testing
