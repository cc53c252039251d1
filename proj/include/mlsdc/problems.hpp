#pragma once

#include "mlsdc/linear_solvers.hpp"
#include "mlsdc/problem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace mlsdc {

/// 1D heat equation u_t = nu u_xx on [0,1], homogeneous Dirichlet boundaries,
/// second-order finite differences on N interior points.
class Heat1D final : public IVProblem {
 public:
  Heat1D(std::size_t N, double nu, int kappa) : N_(N), nu_(nu), kappa_(kappa) {
    if (N < 1) throw std::invalid_argument("Heat1D: N must be >= 1");
    if (!(nu > 0.0)) throw std::invalid_argument("Heat1D: nu must be > 0");
    if (kappa < 1) throw std::invalid_argument("Heat1D: kappa must be >= 1");
    dx_ = 1.0 / static_cast<double>(N + 1);
    c_ = nu / (dx_ * dx_);
  }

  std::string name() const override { return "heat1d"; }
  std::size_t dimension() const override { return N_; }
  bool is_linear() const override { return true; }
  GridInfo grid() const override { return {SpatialLayout::Dirichlet1D, N_}; }

  double nu() const noexcept { return nu_; }
  int kappa() const noexcept { return kappa_; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t n) const noexcept { return static_cast<double>(n + 1) * dx_; }

  /// FD eigenvalue (positive) belonging to the mode sin(kappa pi x).
  double mode_eigenvalue() const noexcept {
    return (2.0 - 2.0 * std::cos(kappa_ * std::numbers::pi * dx_)) / (dx_ * dx_);
  }

  State initial_value() const override {
    State u(N_);
    for (std::size_t n = 0; n < N_; ++n) u(n) = std::sin(kappa_ * std::numbers::pi * x(n));
    return u;
  }

  std::optional<State> exact_solution(double t) const override {
    return State(initial_value() * std::exp(-t * nu_ * mode_eigenvalue()));
  }

  State eval_f(const StateRef& u) const override {
    check_dim(u, "Heat1D::eval_f");
    const auto n = static_cast<Eigen::Index>(N_);
    State f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double left = i > 0 ? u(i - 1) : 0.0;
      const double right = i + 1 < n ? u(i + 1) : 0.0;
      f(i) = c_ * (left - 2.0 * u(i) + right);
    }
    return f;
  }

  State solve_linearized(double a, const StateRef& /*u*/, const StateRef& rhs,
                         double /*tol*/) const override {
    return solve_shifted(a, rhs);
  }

  State solve_node_implicit(double a, const StateRef& b, const StateRef& /*guess*/,
                            double /*tol*/, int /*max_iter*/ = 50) const override {
    check_dim(b, "Heat1D::solve_node_implicit");
    if (a == 0.0) return b;
    if (a < 0.0) throw std::invalid_argument("solve_node_implicit: a must be >= 0");
    return solve_shifted(a, b);
  }

  /// The matrix A of f(u) = A u, dense. Test and reference use only.
  Eigen::MatrixXd dense_matrix() const {
    const auto n = static_cast<Eigen::Index>(N_);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = -2.0 * c_;
      if (i > 0) A(i, i - 1) = c_;
      if (i + 1 < n) A(i, i + 1) = c_;
    }
    return A;
  }

 private:
  State solve_shifted(double a, const StateRef& rhs) const {
    check_dim(rhs, "Heat1D::solve");
    const auto n = static_cast<Eigen::Index>(N_);
    const Eigen::VectorXd off = Eigen::VectorXd::Constant(std::max<Eigen::Index>(n - 1, 0), -a * c_);
    const Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 1.0 + 2.0 * a * c_);
    return solve_tridiagonal(off, diag, off, rhs);
  }

  std::size_t N_;
  double nu_;
  int kappa_;
  double dx_;
  double c_;
};

/// 2D Allen-Cahn u_t = Lap u + u(1-u^2)/eps^2 on [-0.5,0.5]^2, periodic,
/// 5-point Laplacian. State is row-major: u[iy*N + ix].
class AllenCahn2D final : public IVProblem {
 public:
  AllenCahn2D(std::size_t N, double eps, int kappa) : N_(N), eps_(eps), kappa_(kappa) {
    if (N < 3) throw std::invalid_argument("AllenCahn2D: N must be >= 3");
    if (!(eps > 0.0)) throw std::invalid_argument("AllenCahn2D: eps must be > 0");
    if (kappa < 1) throw std::invalid_argument("AllenCahn2D: kappa must be >= 1");
    dx_ = 1.0 / static_cast<double>(N);
    inv_dx2_ = 1.0 / (dx_ * dx_);
    inv_eps2_ = 1.0 / (eps * eps);
  }

  std::string name() const override { return "allencahn2d"; }
  std::size_t dimension() const override { return N_ * N_; }
  GridInfo grid() const override { return {SpatialLayout::Periodic2D, N_}; }

  double eps() const noexcept { return eps_; }
  int kappa() const noexcept { return kappa_; }
  double x(std::size_t i) const noexcept { return -0.5 + static_cast<double>(i) * dx_; }

  State initial_value() const override {
    State u(dimension());
    for (std::size_t iy = 0; iy < N_; ++iy)
      for (std::size_t ix = 0; ix < N_; ++ix)
        u(iy * N_ + ix) = std::sin(kappa_ * std::numbers::pi * x(ix)) *
                          std::sin(kappa_ * std::numbers::pi * x(iy));
    return u;
  }

  State laplacian(const StateRef& u) const {
    State out(dimension());
    const std::size_t N = N_;
    for (std::size_t iy = 0; iy < N; ++iy) {
      const std::size_t up = (iy + 1) % N, down = (iy + N - 1) % N;
      for (std::size_t ix = 0; ix < N; ++ix) {
        const std::size_t right = (ix + 1) % N, left = (ix + N - 1) % N;
        out(iy * N + ix) = inv_dx2_ * (u(iy * N + left) + u(iy * N + right) + u(down * N + ix) +
                                       u(up * N + ix) - 4.0 * u(iy * N + ix));
      }
    }
    return out;
  }

  State eval_f(const StateRef& u) const override {
    check_dim(u, "AllenCahn2D::eval_f");
    State f = laplacian(u);
    f.array() += inv_eps2_ * u.array() * (1.0 - u.array().square());
    return f;
  }

  State apply_jacobian(const StateRef& u, const StateRef& v) const override {
    check_dim(u, "AllenCahn2D::apply_jacobian");
    check_dim(v, "AllenCahn2D::apply_jacobian");
    State out = laplacian(v);
    out.array() += inv_eps2_ * (1.0 - 3.0 * u.array().square()) * v.array();
    return out;
  }

  /// (I - a J(u)) is symmetric; CG while the reaction shift keeps it positive
  /// definite, GMRES otherwise.
  State solve_linearized(double a, const StateRef& u, const StateRef& rhs,
                         double tol) const override {
    check_dim(rhs, "AllenCahn2D::solve_linearized");
    if (a == 0.0) return rhs;
    const Eigen::ArrayXd shift = a * inv_eps2_ * (1.0 - 3.0 * u.array().square());
    auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      Eigen::VectorXd out = v - a * laplacian(v);
      out.array() -= shift * v.array();
      return out;
    };
    const State x0 = State::Zero(rhs.size());
    const State b = rhs;
    KrylovResult res;
    if (shift.maxCoeff() < 1.0) {
      res = conjugate_gradient(op, b, x0, tol, 5000);
    } else {
      res = gmres(op, b, x0, tol, 60, 5000);
    }
    if (!res.converged)
      throw SolverFailure("AllenCahn2D: inner linear solve did not converge", res.residual);
    return res.x;
  }

 private:
  std::size_t N_;
  double eps_;
  int kappa_;
  double dx_;
  double inv_dx2_;
  double inv_eps2_;
};

/// Two-dimensional ODE with the unit circle as attracting (lambda < 0) limit
/// cycle. Exact solution from (1,0) is (cos t, sin t).
class Auzinger final : public IVProblem {
 public:
  Auzinger(double lambda = -0.75, double rho = 3.0) : lambda_(lambda), rho_(rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("Auzinger: rho must be > 0");
  }

  std::string name() const override { return "auzinger"; }
  std::size_t dimension() const override { return 2; }
  double lambda() const noexcept { return lambda_; }
  double rho() const noexcept { return rho_; }

  State initial_value() const override { return State::Unit(2, 0); }

  std::optional<State> exact_solution(double t) const override {
    State u(2);
    u << std::cos(t), std::sin(t);
    return u;
  }

  State eval_f(const StateRef& u) const override {
    check_dim(u, "Auzinger::eval_f");
    const double x = u(0), y = u(1), r = 1.0 - x * x - y * y;
    State f(2);
    f << -y - lambda_ * x * r, x - lambda_ * rho_ * y * r;
    return f;
  }

  Eigen::Matrix2d jacobian(const StateRef& u) const {
    const double x = u(0), y = u(1), r = 1.0 - x * x - y * y;
    const double l = lambda_, lr = lambda_ * rho_;
    Eigen::Matrix2d J;
    J << -l * r + 2.0 * l * x * x, -1.0 + 2.0 * l * x * y,
        1.0 + 2.0 * lr * x * y, -lr * r + 2.0 * lr * y * y;
    return J;
  }

  State apply_jacobian(const StateRef& u, const StateRef& v) const override {
    check_dim(u, "Auzinger::apply_jacobian");
    check_dim(v, "Auzinger::apply_jacobian");
    return jacobian(u) * v;
  }

  State solve_linearized(double a, const StateRef& u, const StateRef& rhs,
                         double /*tol*/) const override {
    check_dim(rhs, "Auzinger::solve_linearized");
    const Eigen::Matrix2d K = Eigen::Matrix2d::Identity() - a * jacobian(u);
    return K.partialPivLu().solve(Eigen::Vector2d(rhs));
  }

 private:
  double lambda_;
  double rho_;
};

/// f = 0. Every iterate collapses onto the initial value.
class ZeroProblem final : public IVProblem {
 public:
  explicit ZeroProblem(std::size_t dim, double value = 1.0) : u0_(State::Constant(dim, value)) {
    if (dim < 1) throw std::invalid_argument("ZeroProblem: dim must be >= 1");
  }
  explicit ZeroProblem(State u0) : u0_(std::move(u0)) {}

  std::string name() const override { return "zero"; }
  std::size_t dimension() const override { return static_cast<std::size_t>(u0_.size()); }
  bool is_linear() const override { return true; }
  State initial_value() const override { return u0_; }
  std::optional<State> exact_solution(double) const override { return u0_; }
  State eval_f(const StateRef& u) const override {
    check_dim(u, "ZeroProblem::eval_f");
    return State::Zero(u.size());
  }

 private:
  State u0_;
};

/// Scalar u' = lambda u.
class ScalarLinear final : public IVProblem {
 public:
  explicit ScalarLinear(double lambda, double u0 = 1.0) : lambda_(lambda), u0_(u0) {}

  std::string name() const override { return "scalar"; }
  std::size_t dimension() const override { return 1; }
  bool is_linear() const override { return true; }
  double lambda() const noexcept { return lambda_; }
  State initial_value() const override { return State::Constant(1, u0_); }
  std::optional<State> exact_solution(double t) const override {
    return State::Constant(1, u0_ * std::exp(lambda_ * t));
  }
  State eval_f(const StateRef& u) const override {
    check_dim(u, "ScalarLinear::eval_f");
    return lambda_ * u;
  }
  State solve_node_implicit(double a, const StateRef& b, const StateRef&, double,
                            int = 50) const override {
    check_dim(b, "ScalarLinear::solve_node_implicit");
    if (a == 0.0) return b;
    return b / (1.0 - a * lambda_);
  }

 private:
  double lambda_;
  double u0_;
};

}  // namespace mlsdc
