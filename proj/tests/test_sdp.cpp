#include "cvwit/sdp.hpp"
#include "cvwit/states.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace cvwit;
using namespace cvwit::sdp;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// maximize t s.t. A - t I >= 0, written as minimize -t.
SdpProblem lambda_min_problem(const Matrix& a) {
  SdpProblem p;
  p.c = Vector::Constant(1, -1.0);
  p.block_structure = {static_cast<int>(a.rows())};
  p.F0 = {a};
  p.F = {{Matrix(-Matrix::Identity(a.rows(), a.cols()))}};
  return p;
}

Matrix random_symmetric(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-2.0, 2.0);
  return 0.5 * (a + a.transpose());
}

void expect_kkt(const SdpProblem& p, const SdpSolution& s, double tol) {
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_GE(min_eigenvalue(evaluate(p, s.x)), -10 * tol);
  EXPECT_GE(min_eigenvalue(s.Z), -10 * tol);
  Vector aty = Vector::Zero(p.variables());
  if (s.y.size() > 0) aty = equality_matrix(p).transpose() * s.y;
  EXPECT_LE((adjoint(p, s.Z) - p.c - aty).cwiseAbs().maxCoeff(), 10 * tol);
  EXPECT_LE(std::abs(inner(evaluate(p, s.x), s.Z)), 10 * tol);
  EXPECT_LE(std::abs(s.gap), tol);
}

}  // namespace

TEST(Solve, ScalarLinearProgram) {
  SdpProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.block_structure = {1};
  p.F0 = {scalar(-1.0)};
  p.F = {{scalar(1.0)}};
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
  EXPECT_NEAR(s.Z[0](0, 0), 1.0, 1e-8);
  expect_kkt(p, s, 1e-8);
}

TEST(Solve, FeasibilityProblem) {
  SdpProblem p;
  p.c = Vector::Zero(1);
  p.block_structure = {2};
  p.F0 = {Matrix(Eigen::Vector2d(0.0, 1.0).asDiagonal())};
  p.F = {{Matrix(Eigen::Vector2d(1.0, -1.0).asDiagonal())}};
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_GT(s.x(0), -1e-8);
  EXPECT_LT(s.x(0), 1.0 + 1e-8);
  EXPECT_GE(min_eigenvalue(evaluate(p, s.x)), -1e-8);
}

TEST(Solve, SmallestEigenvalueMatchesEigendecomposition) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_symmetric(4, seed);
    const SdpProblem p = lambda_min_problem(a);
    const SdpSolution s = solve(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.x(0), es.eigenvalues()(0), 1e-7);
    // the dual optimum is the projector onto the bottom eigenvector
    const Vector v = es.eigenvectors().col(0);
    EXPECT_NEAR((s.Z[0] - v * v.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-4);
    expect_kkt(p, s, 1e-8);
  }
}

TEST(Solve, MultipleBlocksAndEqualities) {
  // minimize x1 + x2 s.t. diag(x1, x2 - 0.2) >= 0 as two blocks, [[x2, x3],[x3, 1]] >= 0, x1 = 0.3
  SdpProblem p;
  p.c = Eigen::Vector3d(1.0, 1.0, 0.0);
  p.block_structure = {1, 1, 2};
  Matrix e01 = Matrix::Zero(2, 2);
  e01(0, 1) = e01(1, 0) = 1.0;
  Matrix e00 = Matrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  Matrix f0 = Matrix::Zero(2, 2);
  f0(1, 1) = 1.0;
  p.F0 = {scalar(0.0), scalar(-0.2), f0};
  p.F = {{scalar(1.0), Matrix(), Matrix()}, {Matrix(), scalar(1.0), e00}, {Matrix(), Matrix(), e01}};
  p.equalities.push_back({Eigen::Vector3d(1.0, 0.0, 0.0), 0.3});
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.x(0), 0.3, 1e-7);
  EXPECT_NEAR(s.x(1), 0.2, 1e-7);
  EXPECT_NEAR(s.primal_objective, 0.5, 1e-7);
  expect_kkt(p, s, 1e-8);
  // dual Z is block diagonal in the declared blocks
  ASSERT_EQ(s.Z.size(), 3u);
  EXPECT_EQ(s.Z[0].rows(), 1);
  EXPECT_EQ(s.Z[2].rows(), 2);
}

TEST(Solve, PrimalInfeasibleCarriesCertificate) {
  // x >= 0 and -1 - x >= 0
  SdpProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.block_structure = {1, 1};
  p.F0 = {scalar(0.0), scalar(-1.0)};
  p.F = {{scalar(1.0), scalar(-1.0)}};
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::primal_infeasible);
  EXPECT_GE(min_eigenvalue(s.Z), -1e-8);
  EXPECT_LT(inner(p.F0, s.Z), 0.0);
  EXPECT_NEAR(adjoint(p, s.Z)(0), 0.0, 1e-7);
}

TEST(Solve, FeasibilityCertificateWithoutVariables) {
  SdpProblem p;
  p.c = Vector(0);
  p.block_structure = {2};
  p.F0 = {Matrix(Eigen::Vector2d(1.0, -0.5).asDiagonal())};
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::primal_infeasible);
  EXPECT_LT(inner(p.F0, s.Z), 0.0);
  EXPECT_GE(min_eigenvalue(s.Z), -1e-12);

  p.F0 = {Matrix(Eigen::Vector2d(1.0, 0.5).asDiagonal())};
  EXPECT_EQ(solve(p).status, Status::optimal);
}

TEST(Solve, DualInfeasibleCarriesDirection) {
  // minimize -x s.t. x >= 0 is unbounded
  SdpProblem p;
  p.c = Vector::Constant(1, -1.0);
  p.block_structure = {1};
  p.F0 = {scalar(1.0)};
  p.F = {{scalar(1.0)}};
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::dual_infeasible);
  EXPECT_GT(s.x(0), 0.0);
  EXPECT_NEAR(p.c.dot(s.x), -1.0, 1e-6);
}

TEST(Solve, Deterministic) {
  const SdpProblem p = lambda_min_problem(random_symmetric(5, 3));
  const SdpSolution a = solve(p);
  const SdpSolution b = solve(p);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.x(0), b.x(0));
  EXPECT_EQ(a.primal_objective, b.primal_objective);
}

TEST(Solve, UsesStrictlyFeasibleStart) {
  const Matrix a = random_symmetric(4, 9);
  const SdpProblem p = lambda_min_problem(a);
  StartingPoint sp;
  sp.x = Vector::Constant(1, cvwit::min_eigenvalue(a) - 1.0);
  sp.Z = {Matrix(Matrix::Identity(4, 4) / 4.0)};
  const SdpSolution s = solve(p, {}, sp);
  expect_kkt(p, s, 1e-8);
  EXPECT_NEAR(s.x(0), cvwit::min_eigenvalue(a), 1e-7);
}

TEST(Solve, RejectsInconsistentProblems) {
  SdpProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.block_structure = {2};
  p.F0 = {Matrix::Identity(3, 3)};
  p.F = {{Matrix::Identity(2, 2)}};
  EXPECT_THROW(solve(p), std::invalid_argument);
  p.F0 = {Matrix::Identity(2, 2)};
  p.F = {};
  EXPECT_THROW(solve(p), std::invalid_argument);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 1.0;
  p.F = {{asym}};
  EXPECT_THROW(solve(p), std::invalid_argument);
}

TEST(WeakDuality, ResidualEqualsComplementarity) {
  const Matrix a = random_symmetric(4, 21);
  const SdpProblem p = lambda_min_problem(a);
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_LE(std::abs(weak_duality_residual(p, s.x, s.Z)), 1e-8);

  // shift x into the interior: still feasible, no longer optimal
  const Vector x = s.x - Vector::Constant(1, 0.25);
  const double r = weak_duality_residual(p, x, s.Z);
  EXPECT_GT(r, 0.2);
  EXPECT_NEAR(r, inner(evaluate(p, x), s.Z), 1e-8);
}
