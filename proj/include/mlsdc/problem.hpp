#pragma once

#include "mlsdc/errors.hpp"
#include "mlsdc/linear_solvers.hpp"
#include "mlsdc/node_vector.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

/// How the state vector is laid out in space. Transfer operators and the
/// Fourier tail need this.
enum class SpatialLayout {
  Pointwise,    // plain ODE, no grid
  Dirichlet1D,  // interior points x_n = n/(N+1), n = 1..N
  Periodic1D,   // x_i = x0 + i/N, i = 0..N-1
  Periodic2D,   // row-major N x N periodic grid
};

struct GridInfo {
  SpatialLayout layout = SpatialLayout::Pointwise;
  std::size_t points_per_axis = 0;
};

/// u' = f(u). Implementations must be immutable and reentrant after
/// construction.
class IVProblem {
 public:
  virtual ~IVProblem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual State initial_value() const = 0;
  virtual State eval_f(const StateRef& u) const = 0;

  virtual bool is_linear() const { return false; }
  virtual GridInfo grid() const { return {SpatialLayout::Pointwise, dimension()}; }
  virtual std::optional<State> exact_solution(double /*t*/) const { return std::nullopt; }

  /// J(u) v. Linear problems return f(v); the fallback is a central difference.
  virtual State apply_jacobian(const StateRef& u, const StateRef& v) const {
    check_dim(v, "apply_jacobian");
    if (is_linear()) return eval_f(v);
    check_dim(u, "apply_jacobian");
    const double vn = v.lpNorm<Eigen::Infinity>();
    if (vn == 0.0) return State::Zero(v.size());
    const double h = 1e-6 * std::max(1.0, u.lpNorm<Eigen::Infinity>()) / vn;
    const State up = u + h * v, um = u - h * v;
    return (eval_f(up) - eval_f(um)) / (2.0 * h);
  }

  /// Solves (I - a J(u)) x = rhs to ||residual||_inf <= tol.
  virtual State solve_linearized(double a, const StateRef& u, const StateRef& rhs,
                                 double tol) const {
    check_dim(rhs, "solve_linearized");
    const auto n = static_cast<Eigen::Index>(dimension());
    if (a == 0.0) return rhs;
    if (n <= 256) {
      Eigen::MatrixXd K = Eigen::MatrixXd::Identity(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const State e = State::Unit(n, j);
        K.col(j) -= a * apply_jacobian(u, e);
      }
      return K.partialPivLu().solve(rhs);
    }
    const State uu = u;
    auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return x - a * apply_jacobian(uu, x);
    };
    auto res = gmres(op, rhs, State::Zero(n), tol);
    if (!res.converged)
      throw SolverFailure("solve_linearized: GMRES did not converge", res.residual);
    return res.x;
  }

  /// Solves u - a f(u) = b. The default is Newton on top of solve_linearized.
  virtual State solve_node_implicit(double a, const StateRef& b, const StateRef& guess,
                                    double tol, int max_iter = 50) const {
    check_dim(b, "solve_node_implicit");
    if (a == 0.0) return b;
    if (a < 0.0) throw std::invalid_argument("solve_node_implicit: a must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_node_implicit: tol must be > 0");
    check_dim(guess, "solve_node_implicit");
    State u = guess;
    std::vector<double> history;
    for (int it = 0; it <= max_iter; ++it) {
      const State r = b - (u - a * eval_f(u));
      const double rn = r.lpNorm<Eigen::Infinity>();
      history.push_back(rn);
      if (rn <= tol) return u;
      if (!std::isfinite(rn) || it == max_iter) break;
      u += solve_linearized(a, u, r, 0.01 * rn);
    }
    throw SolverFailure(name() + ": Newton did not converge", history.back(), history);
  }

  void check_dim(const StateRef& v, const char* where) const {
    if (static_cast<std::size_t>(v.size()) != dimension())
      throw std::invalid_argument(std::string(where) + ": state has dimension " +
                                  std::to_string(v.size()) + ", expected " +
                                  std::to_string(dimension()));
  }
};

}  // namespace mlsdc
