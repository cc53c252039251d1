#pragma once

#include "mlsdc/collocation.hpp"
#include "mlsdc/errors.hpp"
#include "mlsdc/linear_solvers.hpp"
#include "mlsdc/node_vector.hpp"
#include "mlsdc/problem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

struct InitialGuess {
  enum class Kind { Spread, Zero, Random };
  Kind kind = Kind::Spread;
  std::uint64_t seed = 0;

  static InitialGuess spread() { return {Kind::Spread, 0}; }
  static InitialGuess zero() { return {Kind::Zero, 0}; }
  static InitialGuess random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

inline std::string to_string(InitialGuess::Kind k) {
  switch (k) {
    case InitialGuess::Kind::Spread: return "spread";
    case InitialGuess::Kind::Zero: return "zero";
    case InitialGuess::Kind::Random: return "random";
  }
  return "unknown";
}

inline InitialGuess::Kind guess_kind_from_string(const std::string& s) {
  if (s == "spread") return InitialGuess::Kind::Spread;
  if (s == "zero") return InitialGuess::Kind::Zero;
  if (s == "random") return InitialGuess::Kind::Random;
  throw std::invalid_argument("unknown initial guess '" + s + "' (expected spread, zero or random)");
}

struct SweepConfig {
  PreconditionerKind preconditioner = PreconditionerKind::RightRectangle;
  double node_solve_tol = 1e-12;
  int max_newton = 50;
  std::optional<int> k0_label;  // bookkeeping only

  void validate() const {
    if (!(node_solve_tol > 0.0)) throw std::invalid_argument("SweepConfig: node_solve_tol must be > 0");
    if (max_newton < 1) throw std::invalid_argument("SweepConfig: max_newton must be >= 1");
  }
};

/// Counters filled in by sdc_sweep when a pointer is supplied.
struct SweepStats {
  long node_solves = 0;
  long f_evals = 0;
};

/// Uniform [0,1) from the top 53 bits, so results do not depend on the
/// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline NodeVector make_initial_guess(const IVProblem& problem, std::size_t num_nodes,
                                     const InitialGuess& guess, const State* u0 = nullptr) {
  const State start = u0 ? *u0 : problem.initial_value();
  switch (guess.kind) {
    case InitialGuess::Kind::Spread:
      return NodeVector::spread(start, num_nodes);
    case InitialGuess::Kind::Zero:
      return NodeVector(num_nodes, problem.dimension());
    case InitialGuess::Kind::Random: {
      NodeVector U(num_nodes, problem.dimension());
      std::mt19937_64 gen(guess.seed);
      for (double& v : U.data()) v = unit_uniform(gen);
      return U;
    }
  }
  throw std::logic_error("make_initial_guess: bad kind");
}

inline void check_sweep_shapes(const NodeVector& U, const StateRef& u0,
                               const QuadratureTables& tables, const IVProblem& problem,
                               const char* where) {
  if (U.num_nodes() != tables.num_nodes() || U.dim() != problem.dimension() ||
      static_cast<std::size_t>(u0.size()) != problem.dimension())
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

/// U0 + dt (Q kron I) F(U).
inline NodeVector picard_sweep(const NodeVector& U, const StateRef& u0,
                               const QuadratureTables& tables, double dt,
                               const IVProblem& problem) {
  check_sweep_shapes(U, u0, tables, problem, "picard_sweep");
  NodeVector out = NodeVector::spread(u0, U.num_nodes());
  if (dt != 0.0) out.flat() += dt * apply_node_matrix(tables.Q, eval_F(problem, U)).flat();
  return out;
}

/// One SDC sweep by forward substitution over the nodes. `tau`, when given,
/// is added to the right-hand side (FAS-modified coarse problem). `F_old`
/// may carry F(U) if the caller already has it.
inline NodeVector sdc_sweep(const NodeVector& U, const StateRef& u0,
                            const QuadratureTables& tables, const Eigen::MatrixXd& QDelta,
                            double dt, const IVProblem& problem, const NodeVector* tau = nullptr,
                            const SweepConfig& config = {}, SweepStats* stats = nullptr,
                            const NodeVector* F_old = nullptr) {
  check_sweep_shapes(U, u0, tables, problem, "sdc_sweep");
  const std::size_t M = U.num_nodes();
  if (static_cast<std::size_t>(QDelta.rows()) != M || static_cast<std::size_t>(QDelta.cols()) != M)
    throw std::invalid_argument("sdc_sweep: QDelta has wrong shape");
  if (tau) NodeVector::require_same_shape(U, *tau, "sdc_sweep(tau)");

  NodeVector F_k_storage;
  if (F_old == nullptr) {
    F_k_storage = eval_F(problem, U);
    if (stats) stats->f_evals += static_cast<long>(M);
    F_old = &F_k_storage;
  } else {
    NodeVector::require_same_shape(U, *F_old, "sdc_sweep(F_old)");
  }

  const Eigen::MatrixXd QmQD = tables.Q - QDelta;
  NodeVector rhs = apply_node_matrix(QmQD, *F_old);
  rhs *= dt;

  NodeVector out(M, U.dim());
  NodeVector F_new(M, U.dim());
  for (std::size_t m = 0; m < M; ++m) {
    State b = u0 + rhs.node(m);
    if (tau) b += tau->node(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = QDelta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
      if (w != 0.0) b += (dt * w) * F_new.node(j);
    }
    const double a = dt * QDelta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    if (a == 0.0) {
      out.node(m) = b;
    } else {
      try {
        out.node(m) = problem.solve_node_implicit(a, b, U.node(m), config.node_solve_tol,
                                                  config.max_newton);
      } catch (const SolverFailure& e) {
        throw e.with_context("sdc_sweep node " + std::to_string(m), static_cast<int>(m));
      }
      if (stats) ++stats->node_solves;
    }
    if (m + 1 < M) {
      F_new.node(m) = problem.eval_f(out.node(m));
      if (stats) ++stats->f_evals;
    }
  }
  return out;
}

namespace detail {

// Builds the tau-free F(U) stack and applies dt (Q kron I) J(U) V.
inline NodeVector collocation_jacobian_apply(const IVProblem& problem, const NodeVector& U,
                                             const NodeVector& V, const Eigen::MatrixXd& Q,
                                             double dt) {
  NodeVector JV(V.num_nodes(), V.dim());
  for (std::size_t m = 0; m < V.num_nodes(); ++m)
    JV.node(m) = problem.apply_jacobian(U.node(m), V.node(m));
  NodeVector out = V;
  out.flat() -= dt * apply_node_matrix(Q, JV).flat();
  return out;
}

}  // namespace detail

/// Direct solution of the collocation problem C(U) = U0 to ||C(U) - U0||_inf <= tol.
/// Linear problems: dense LU of I - dt (Q kron A). Nonlinear: SDC warm start
/// followed by Newton with (preconditioned) Krylov or dense inner solves.
inline NodeVector solve_collocation(const IVProblem& problem, const QuadratureTables& tables,
                                    double dt, const StateRef& u0, double tol,
                                    PreconditionerKind warm_start = PreconditionerKind::RightRectangle) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_collocation: tol must be > 0");
  if (static_cast<std::size_t>(u0.size()) != problem.dimension())
    throw std::invalid_argument("solve_collocation: u0 has wrong dimension");
  const std::size_t M = tables.num_nodes();
  const std::size_t N = problem.dimension();
  const auto MN = static_cast<Eigen::Index>(M * N);
  std::vector<double> history;

  if (problem.is_linear()) {
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) A.col(j) = problem.eval_f(State::Unit(n, j));
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(MN, MN);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t j = 0; j < M; ++j) {
        const double q = tables.Q(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
        K.block(static_cast<Eigen::Index>(m) * n, static_cast<Eigen::Index>(j) * n, n, n) -= dt * q * A;
      }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    NodeVector U0 = NodeVector::spread(u0, M);
    NodeVector U(M, N);
    U.flat() = lu.solve(U0.flat());
    for (int refine = 0; refine < 3; ++refine) {
      const NodeVector r = collocation_residual(U, u0, tables, dt, problem);
      const double rn = r.flat().lpNorm<Eigen::Infinity>();
      history.push_back(rn);
      if (rn <= tol) return U;
      U.flat() -= lu.solve(r.flat());
    }
    const double rn = collocation_residual(U, u0, tables, dt, problem).flat().lpNorm<Eigen::Infinity>();
    history.push_back(rn);
    if (rn <= tol) return U;
    throw SolverFailure("solve_collocation: residual above tolerance after refinement", rn, history);
  }

  SweepConfig sc;
  sc.preconditioner = warm_start;
  sc.node_solve_tol = std::max(tol * 0.1, 1e-14);
  const QDeltaMatrix QD = compute_QDelta(warm_start, tables.nodes, &tables.Q);
  NodeVector U = NodeVector::spread(u0, M);
  for (int s = 0; s < 20; ++s) U = sdc_sweep(U, u0, tables, QD.matrix, dt, problem, nullptr, sc);

  // The preconditioner for the Krylov path always uses an implicit QDelta.
  const Eigen::MatrixXd QDp =
      QD.has_zero_diagonal()
          ? compute_QDelta(PreconditionerKind::RightRectangle, tables.nodes).matrix
          : QD.matrix;

  constexpr int max_newton = 30;
  for (int it = 0; it <= max_newton; ++it) {
    const NodeVector r = collocation_residual(U, u0, tables, dt, problem);
    const double rn = r.flat().lpNorm<Eigen::Infinity>();
    history.push_back(rn);
    if (rn <= tol) return U;
    if (!std::isfinite(rn) || it == max_newton) break;

    NodeVector delta(M, N);
    if (MN <= 512) {
      Eigen::MatrixXd K(MN, MN);
      NodeVector e(M, N);
      for (Eigen::Index c = 0; c < MN; ++c) {
        e.flat().setZero();
        e.flat()(c) = 1.0;
        K.col(c) = detail::collocation_jacobian_apply(problem, U, e, tables.Q, dt).flat();
      }
      delta.flat() = K.partialPivLu().solve(r.flat());
    } else {
      auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        NodeVector V(M, N);
        V.flat() = v;
        return detail::collocation_jacobian_apply(problem, U, V, tables.Q, dt).flat();
      };
      auto prec = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        NodeVector X(M, N);
        for (std::size_t m = 0; m < M; ++m) {
          State b = w.segment(static_cast<Eigen::Index>(m * N), static_cast<Eigen::Index>(N));
          for (std::size_t j = 0; j < m; ++j) {
            const double q = QDp(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
            if (q != 0.0) b += dt * q * problem.apply_jacobian(U.node(j), X.node(j));
          }
          const double a = dt * QDp(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
          X.node(m) = problem.solve_linearized(a, U.node(m), b, 1e-3 * std::max(b.norm(), 1e-300));
        }
        return X.flat();
      };
      const double rn2 = r.flat().norm();
      const double ktol = std::max(1e-6 * rn2, 0.1 * tol);
      auto res = gmres(op, r.flat(), Eigen::VectorXd::Zero(MN), ktol, 30, 600, prec);
      delta.flat() = res.x;
    }
    U -= delta;
  }
  throw SolverFailure("solve_collocation: Newton did not converge", history.back(), history);
}

inline NodeVector solve_collocation(const IVProblem& problem, const CollocationSpec& spec,
                                    const StateRef& u0, double tol) {
  return solve_collocation(problem, spec.tables(), spec.dt(), u0, tol);
}

/// Tracks ||U^{k+1} - U^k||_inf and throws once it grew by more than 10x for
/// three consecutive iterations (or went non-finite).
class DivergenceGuard {
 public:
  void observe(double increment, int iteration) {
    if (!std::isfinite(increment))
      throw DivergenceError("iteration produced non-finite values", iteration);
    if (prev_ > 0.0 && increment > 10.0 * prev_) {
      if (++streak_ >= 3)
        throw DivergenceError("increment grew by more than 10x for 3 consecutive iterations",
                              iteration);
    } else {
      streak_ = 0;
    }
    prev_ = increment;
  }

 private:
  double prev_ = 0.0;
  int streak_ = 0;
};

/// Iterates U^{(0)} .. U^{(k_max)}.
inline std::vector<NodeVector> run_sdc(const IVProblem& problem, const QuadratureTables& tables,
                                       double dt, const StateRef& u0, const SweepConfig& config,
                                       const NodeVector& initial, int k_max) {
  if (k_max < 0) throw std::invalid_argument("run_sdc: k_max must be >= 0");
  config.validate();
  const QDeltaMatrix QD = compute_QDelta(config.preconditioner, tables.nodes, &tables.Q);
  std::vector<NodeVector> iterates{initial};
  DivergenceGuard guard;
  for (int k = 1; k <= k_max; ++k) {
    iterates.push_back(sdc_sweep(iterates.back(), u0, tables, QD.matrix, dt, problem, nullptr, config));
    guard.observe((iterates[k].flat() - iterates[k - 1].flat()).lpNorm<Eigen::Infinity>(), k);
  }
  return iterates;
}

inline std::vector<NodeVector> run_sdc(const IVProblem& problem, const CollocationSpec& spec,
                                       const SweepConfig& config, const InitialGuess& guess,
                                       int k_max) {
  const QuadratureTables tables = spec.tables();
  const State u0 = problem.initial_value();
  return run_sdc(problem, tables, spec.dt(), u0, config,
                 make_initial_guess(problem, tables.num_nodes(), guess), k_max);
}

/// Value at t_end from `steps` collocation steps of M nodes each.
inline State collocation_propagate(const IVProblem& problem, const QuadratureTables& tables,
                                   const State& u0, double t_end, int steps, double tol) {
  State u = u0;
  const double dt = t_end / steps;
  for (int s = 0; s < steps; ++s) u = solve_collocation(problem, tables, dt, u, tol).last();
  return u;
}

/// High-order reference at t_end: collocation with many nodes, the step count
/// doubled until two successive results agree to `accuracy`.
inline State reference_solution(const IVProblem& problem, double t_end, double accuracy,
                                int num_nodes = 7, int max_steps = 1 << 12) {
  if (!(accuracy > 0.0)) throw std::invalid_argument("reference_solution: accuracy must be > 0");
  if (t_end == 0.0) return problem.initial_value();
  const QuadratureTables tables = QuadratureTables::gauss_radau_right(num_nodes);
  const double tol = std::max(1e-12, 1e-2 * accuracy);
  const State u0 = problem.initial_value();
  State coarse = collocation_propagate(problem, tables, u0, t_end, 1, tol);
  double diff = 0.0;
  for (int steps = 2; steps <= max_steps; steps *= 2) {
    State fine = collocation_propagate(problem, tables, u0, t_end, steps, tol);
    diff = (fine - coarse).lpNorm<Eigen::Infinity>();
    if (diff <= accuracy) return fine;
    coarse = std::move(fine);
  }
  throw AccuracyNotReached("reference_solution: step halving did not reach the requested accuracy",
                           diff);
}

}  // namespace mlsdc
