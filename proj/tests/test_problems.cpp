#include "mlsdc/linear_solvers.hpp"
#include "mlsdc/problems.hpp"
#include "mlsdc/sweeper.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace mlsdc;

namespace {

Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = d(gen);
  return v;
}

// Matrix exponential of a symmetric matrix through its eigendecomposition.
Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, double t, const Eigen::VectorXd& v) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXd d = (t * es.eigenvalues()).array().exp();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose() * v;
}

}  // namespace

TEST(LinearSolvers, ThomasMatchesDenseSolve) {
  const int n = 40;
  const Eigen::VectorXd lo = random_vector(n - 1, 1), up = random_vector(n - 1, 2);
  const Eigen::VectorXd rhs = random_vector(n, 3);
  const Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 4.0) + random_vector(n, 4);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = diag(i);
    if (i > 0) A(i, i - 1) = lo(i - 1);
    if (i + 1 < n) A(i, i + 1) = up(i);
  }
  const Eigen::VectorXd x = solve_tridiagonal(lo, diag, up, rhs);
  EXPECT_LE((x - A.partialPivLu().solve(rhs)).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(LinearSolvers, ConjugateGradientAndGmres) {
  const int n = 30;
  Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
  const Eigen::MatrixXd spd = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = random_vector(n, 9);
  const Eigen::VectorXd exact = spd.ldlt().solve(b);
  const auto cg = conjugate_gradient([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(spd * v); },
                                     b, Eigen::VectorXd::Zero(n), 1e-12);
  EXPECT_TRUE(cg.converged);
  EXPECT_LE((cg.x - exact).norm(), 1e-10);

  const Eigen::MatrixXd ns = B + n * Eigen::MatrixXd::Identity(n, n);
  const auto g = gmres([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(ns * v); }, b,
                       Eigen::VectorXd::Zero(n), 1e-12, 10);
  EXPECT_TRUE(g.converged);
  EXPECT_LE((g.x - ns.partialPivLu().solve(b)).norm(), 1e-10);
}

TEST(Heat1D, InitialValueAndGrid) {
  const Heat1D heat(7, 0.1, 2);
  EXPECT_DOUBLE_EQ(heat.dx(), 1.0 / 8.0);
  const State u = heat.initial_value();
  for (std::size_t n = 0; n < 7; ++n) EXPECT_NEAR(u(n), std::sin(2 * std::numbers::pi * heat.x(n)), 1e-15);
}

TEST(Heat1D, ExactSolutionMatchesMatrixExponential) {
  const Heat1D heat(63, 0.1, 4);
  const Eigen::MatrixXd A = heat.dense_matrix();
  for (double t : {0.0, 0.05, 0.3}) {
    const State ex = *heat.exact_solution(t);
    EXPECT_LE((ex - expm_apply(A, t, heat.initial_value())).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Heat1D, EvalFMatchesDenseMatrixAndIsLinear) {
  const Heat1D heat(31, 0.3, 3);
  const State u = random_vector(31, 5), v = random_vector(31, 6);
  EXPECT_LE((heat.eval_f(u) - heat.dense_matrix() * u).lpNorm<Eigen::Infinity>(), 1e-9);
  const State lhs = heat.eval_f(2.5 * u - 1.5 * v);
  const State rhs = 2.5 * heat.eval_f(u) - 1.5 * heat.eval_f(v);
  EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Heat1D, NodeSolveMatchesDense) {
  const Heat1D heat(31, 0.1, 4);
  const State b = random_vector(31, 7);
  const double a = 0.013;
  const State u = heat.solve_node_implicit(a, b, b, 1e-12);
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(31, 31) - a * heat.dense_matrix();
  EXPECT_LE((u - K.partialPivLu().solve(b)).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Auzinger, ExactSolutionStaysOnCircle) {
  const Auzinger auz;
  for (double t : {0.0, 0.4, 1.7}) {
    const State u = *auz.exact_solution(t);
    EXPECT_NEAR(u.squaredNorm(), 1.0, 1e-15);
    EXPECT_NEAR(auz.eval_f(u).norm(), 1.0, 1e-14);
  }
}

TEST(Auzinger, JacobianMatchesFiniteDifferences) {
  const Auzinger auz;
  const State u = (State(2) << 0.7, -0.4).finished();
  const State v = (State(2) << 0.3, 0.9).finished();
  const double h = 1e-6;
  const State fd = (auz.eval_f(u + h * v) - auz.eval_f(u - h * v)) / (2 * h);
  const State jv = auz.apply_jacobian(u, v);
  EXPECT_LE((jv - fd).norm() / jv.norm(), 1e-6);
}

TEST(Auzinger, NodeSolveResidual) {
  const Auzinger auz;
  const State b = (State(2) << 1.0, 0.0).finished();
  const double a = 0.1;
  const State u = auz.solve_node_implicit(a, b, b, 1e-14);
  EXPECT_LE((u - a * auz.eval_f(u) - b).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(AllenCahn2D, ConstantOneIsSteady) {
  const AllenCahn2D ac(16, 0.2, 4);
  EXPECT_LE(ac.eval_f(State::Ones(256)).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE(ac.eval_f(State::Zero(256)).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(AllenCahn2D, JacobianMatchesFiniteDifferences) {
  const AllenCahn2D ac(16, 0.2, 4);
  const State u = ac.initial_value(), v = random_vector(256, 11);
  const double h = 1e-6;
  const State fd = (ac.eval_f(u + h * v) - ac.eval_f(u - h * v)) / (2 * h);
  const State jv = ac.apply_jacobian(u, v);
  EXPECT_LE((jv - fd).norm() / jv.norm(), 1e-6);
}

TEST(AllenCahn2D, LaplacianOfFourierMode) {
  const std::size_t N = 32;
  const AllenCahn2D ac(N, 0.2, 2);
  State u(N * N);
  for (std::size_t iy = 0; iy < N; ++iy)
    for (std::size_t ix = 0; ix < N; ++ix) u(iy * N + ix) = std::cos(2 * std::numbers::pi * 3 * ac.x(ix));
  const double dx = 1.0 / N;
  const double eig = -(2 - 2 * std::cos(2 * std::numbers::pi * 3 * dx)) / (dx * dx);
  EXPECT_LE((ac.laplacian(u) - eig * u).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(AllenCahn2D, NodeSolveResidual) {
  const AllenCahn2D ac(16, 0.2, 4);
  const State b = ac.initial_value();
  for (double a : {1e-3, 0.02}) {
    const State u = ac.solve_node_implicit(a, b, b, 1e-12);
    EXPECT_LE((u - a * ac.eval_f(u) - b).lpNorm<Eigen::Infinity>(), 1e-10) << "a=" << a;
  }
}

TEST(ScalarLinear, NodeSolveRoundTrip) {
  const ScalarLinear s(-2.0);
  const State b = State::Constant(1, 0.8);
  const State u = s.solve_node_implicit(0.25, b, b, 1e-14);
  EXPECT_NEAR(u(0), 0.8 / 1.5, 1e-15);
}

TEST(Problems, DimensionChecks) {
  const Heat1D heat(7, 0.1, 1);
  EXPECT_THROW(heat.eval_f(State::Zero(6)), std::invalid_argument);
  const Auzinger auz;
  EXPECT_THROW(auz.solve_node_implicit(0.1, State::Zero(3), State::Zero(3), 1e-12),
               std::invalid_argument);
}

TEST(ReferenceSolution, ScalarClosedForm) {
  const ScalarLinear s(-1.3);
  const State r = reference_solution(s, 0.7, 1e-12);
  EXPECT_NEAR(r(0), std::exp(-1.3 * 0.7), 1e-12);
}

TEST(ReferenceSolution, HeatMatchesExact) {
  const Heat1D heat(31, 0.1, 4);
  const State r = reference_solution(heat, 0.1, 1e-10);
  EXPECT_LE((r - *heat.exact_solution(0.1)).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(ReferenceSolution, AllenCahnIndependentOfNodeCount) {
  const AllenCahn2D ac(16, 0.2, 4);
  const State r7 = reference_solution(ac, 0.02, 1e-9);
  const State r4 = reference_solution(ac, 0.02, 1e-9, 4);
  EXPECT_LE((r7 - r4).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(ReferenceSolution, UnreachableAccuracyRaises) {
  const Auzinger auz;
  EXPECT_THROW(reference_solution(auz, 1.0, 1e-30, 2, 4), AccuracyNotReached);
}
