#include "mlsdc/diagnostics.hpp"
#include "mlsdc/problems.hpp"
#include "mlsdc/study.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace mlsdc;

TEST(ErrorNorms, InfNormAndLastNode) {
  NodeVector a(2, 2), b(2, 2);
  a.flat() << 1, 2, 3, 4;
  b.flat() << 1, 2.5, 3, 3;
  EXPECT_EQ(error_inf(a, b), 1.0);
  EXPECT_EQ(last_node_error(a, (State(2) << 3, 4.25).finished()), 0.25);
}

TEST(FitOrder, RecoversSyntheticSlope) {
  std::vector<double> dts, errs;
  for (int j = 0; j < 6; ++j) {
    dts.push_back(0.1 * std::ldexp(1.0, -j));
    errs.push_back(3.0 * std::pow(dts.back(), 4.0));
  }
  EXPECT_NEAR(fit_order(dts, errs), 4.0, 1e-12);
}

TEST(FitOrder, ExcludesFloorAndSaturatedPoints) {
  std::vector<FitPoint> pts;
  for (int j = 0; j < 6; ++j) {
    const double dt = std::ldexp(1.0, -j);
    pts.push_back({dt, std::pow(dt, 2.0) * 1e-3});
  }
  pts.push_back({1.0 / 128, 1e-16});
  pts[1].saturated = true;
  const FitResult r = fit_order_detailed(pts);
  EXPECT_NEAR(r.slope, 2.0, 1e-12);
  EXPECT_EQ(r.used.size(), 5u);
  EXPECT_EQ(r.excluded.size(), 2u);
}

TEST(FitOrder, TooFewPointsRaise) {
  EXPECT_THROW(fit_order({0.1, 0.05}, {1e-3, 1e-4}), InsufficientData);
  EXPECT_THROW(fit_order({0.1, 0.05, 0.025}, {1e-14, 1e-15, 1e-16}), InsufficientData);
  EXPECT_THROW(fit_order({0.1, 0.05, 0.025}, {NAN, NAN, 1e-3}), InsufficientData);
}

TEST(ContractionSlope, SyntheticSeries) {
  ErrorSeries s;
  s.reference_kind = ReferenceKind::CollocationSolution;
  for (int j = 0; j < 5; ++j) {
    const double dt = 0.1 * std::ldexp(1.0, -j);
    s.step_sizes.push_back(dt);
    s.errors.push_back({0.5, 0.5 * 7.0 * dt * dt, 0.5 * 49.0 * std::pow(dt, 4)});
  }
  EXPECT_NEAR(contraction_slope(s, 1), 2.0, 1e-12);
  EXPECT_NEAR(contraction_slope(s, 2), 2.0, 1e-12);
  EXPECT_THROW(contraction_slope(s, 0), std::invalid_argument);
}

TEST(ContractionSlope, BelowFloorRowsDropOut) {
  ErrorSeries s;
  for (int j = 0; j < 5; ++j) {
    const double dt = std::ldexp(1.0, -j);
    s.step_sizes.push_back(dt);
    const double e1 = j < 4 ? 1e-3 * dt : 1e-13;
    s.errors.push_back({1e-2, e1});
  }
  const FitResult r = contraction_slope_detailed(s, 1);
  EXPECT_NEAR(r.slope, 1.0, 1e-12);
  EXPECT_EQ(r.used.size(), 4u);
}

TEST(FourierTail, NaiveDftOracle) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(-1, 1);
  const std::size_t N = 24;
  std::vector<double> u(N);
  for (double& v : u) v = d(gen);
  const auto c = unitary_dft(u);
  for (std::size_t l = 0; l < N; ++l) {
    std::complex<double> s = 0;
    for (std::size_t n = 0; n < N; ++n)
      s += u[n] * std::polar(1.0, -2.0 * std::numbers::pi * double(n * l) / double(N));
    EXPECT_LE(std::abs(c[l] - s / std::sqrt(double(N))), 1e-13);
  }
}

TEST(FourierTail, Parseval) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> d(-1, 1);
  for (std::size_t N : {16u, 30u, 64u}) {
    std::vector<double> u(N);
    double energy = 0;
    for (double& v : u) { v = d(gen); energy += v * v; }
    double spec = 0;
    for (const auto& c : unitary_dft(u)) spec += std::norm(c);
    EXPECT_NEAR(spec, energy, 1e-12 * energy);
  }
}

TEST(FourierTail, PureModeAndMonotonicity) {
  const std::size_t N = 32;
  NodeVector e(1, N);
  for (std::size_t n = 0; n < N; ++n) e.node(0)(n) = std::cos(2 * std::numbers::pi * 5 * n / double(N));
  // cos of wavenumber 5 has two coefficients of magnitude sqrt(N)/2
  EXPECT_NEAR(fourier_tail(e, 5).max(), std::sqrt(double(N)), 1e-12);
  EXPECT_NEAR(fourier_tail(e, 6).max(), 0.0, 1e-12);
  // literal indexing only sees l >= N0, which includes the mirrored coefficient at N - 5
  EXPECT_NEAR(fourier_tail(e, 6, TailIndexing::Literal).max(), std::sqrt(double(N)) / 2, 1e-12);

  NodeVector r(2, N);
  r.flat() = Eigen::VectorXd::Random(2 * N);
  double prev = INFINITY;
  for (std::size_t N0 = 1; N0 <= N / 2; ++N0) {
    const double v = fourier_tail(r, N0).max();
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  EXPECT_THROW(fourier_tail(r, 0), std::invalid_argument);
  EXPECT_THROW(fourier_tail(r, N + 1), std::invalid_argument);
}

TEST(FourierTail, TwoDimensionalTakesMaximumOverLines) {
  const std::size_t N = 8;
  NodeVector e(1, N * N);
  for (std::size_t iy = 0; iy < N; ++iy)
    for (std::size_t ix = 0; ix < N; ++ix)
      e.node(0)(iy * N + ix) = iy == 2 ? std::cos(2 * std::numbers::pi * 3 * ix / double(N)) : 0.0;
  const FourierTail t = fourier_tail(e, 3, GridInfo{SpatialLayout::Periodic2D, N});
  EXPECT_TRUE(t.heuristic);
  EXPECT_NEAR(t.max(), std::sqrt(double(N)), 1e-12);
}

TEST(Study, HeatSdcSlopesAndDeterminism) {
  StudySetup s;
  s.label = "t";
  s.problem = std::make_shared<Heat1D>(31, 0.1, 4);
  s.num_nodes = 3;
  s.dt_list = {0.02, 0.01, 0.005, 0.0025};
  s.k_max = 3;
  s.timing = false;
  const StudyResult a = run_convergence_study(s);
  s.jobs = 3;
  const StudyResult b = run_convergence_study(s);
  ASSERT_EQ(a.rows.size(), 4u * 4u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].err_coll, b.rows[i].err_coll);
    EXPECT_EQ(a.rows[i].err_exact, b.rows[i].err_exact);
  }
  EXPECT_NEAR(a.contraction[1], 1.0, 0.4);
  EXPECT_NEAR(a.contraction[2], 1.0, 0.4);
}

TEST(Study, ZeroProblemHasZeroErrors) {
  StudySetup s;
  s.problem = std::make_shared<ZeroProblem>(3);
  s.coarse_problem = s.problem;
  s.method = Method::MLSDC;
  s.interpolation_order = 2;
  s.dt_list = {0.1, 0.05, 0.025};
  s.k_max = 2;
  const StudyResult r = run_convergence_study(s);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.err_coll, 0.0);
    EXPECT_EQ(row.err_exact, 0.0);
  }
}

TEST(Study, InvalidSetupRejected) {
  StudySetup s;
  EXPECT_THROW(run_convergence_study(s), std::invalid_argument);
  s.problem = std::make_shared<ZeroProblem>(1);
  s.dt_list = {0.1, 0.2};
  EXPECT_THROW(run_convergence_study(s), std::invalid_argument);
}
