#pragma once

#include "mlsdc/node_vector.hpp"
#include "mlsdc/problem.hpp"
#include "mlsdc/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlsdc {

enum class NodeFamily { GaussRadauRight };

enum class PreconditionerKind { RightRectangle, LeftRectangle, LUTrick };

inline std::string to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::RightRectangle: return "right_rectangle";
    case PreconditionerKind::LeftRectangle: return "left_rectangle";
    case PreconditionerKind::LUTrick: return "lu_trick";
  }
  return "unknown";
}

inline PreconditionerKind preconditioner_from_string(const std::string& s) {
  if (s == "right_rectangle" || s == "RightRectangle" || s == "IE") return PreconditionerKind::RightRectangle;
  if (s == "left_rectangle" || s == "LeftRectangle" || s == "EE") return PreconditionerKind::LeftRectangle;
  if (s == "lu_trick" || s == "LUTrick" || s == "LU") return PreconditionerKind::LUTrick;
  throw std::invalid_argument("unknown preconditioner kind '" + s + "'");
}

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp;
  if (std::abs(1.0 - x * x) > 1e-300) {
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  } else {
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0));
  }
  return {p1, dp};
}

// Symmetric tridiagonal Jacobi matrix of the Legendre weight, size n.
inline Eigen::MatrixXd legendre_jacobi(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  return J;
}

}  // namespace detail

/// Gauss-Legendre rule with n points on [-1, 1] (Golub-Welsch plus a Newton polish).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(detail::legendre_jacobi(n));
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double xi = eig.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      auto [p, dp] = detail::legendre(n, xi);
      xi -= p / dp;
    }
    x[i] = xi;
    const double dp = detail::legendre(n, xi).second;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
  return {x, w};
}

/// Right-endpoint Gauss-Radau nodes on the unit interval: strictly increasing,
/// last node exactly 1.
inline std::vector<double> compute_nodes(int num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("compute_nodes: need at least one node");
  const int M = num_nodes;
  if (M == 1) return {1.0};

  // Golub's modification of the Jacobi matrix so that x = 1 is an eigenvalue.
  const int n = M - 1;
  const Eigen::MatrixXd Jn = detail::legendre_jacobi(n);
  const double bn = n / std::sqrt(4.0 * n * n - 1.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = bn * bn;
  const Eigen::VectorXd delta =
      (Jn - Eigen::MatrixXd::Identity(n, n)).partialPivLu().solve(rhs);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(M, M);
  J.topLeftCorner(n, n) = Jn;
  J(n, n - 1) = bn;
  J(n - 1, n) = bn;
  J(n, n) = 1.0 + delta(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J, Eigen::EigenvaluesOnly);
  std::vector<double> x(eig.eigenvalues().data(), eig.eigenvalues().data() + M);
  std::sort(x.begin(), x.end());

  // Interior nodes are the roots of P_{M-1} - P_M other than x = 1.
  for (int i = 0; i < M - 1; ++i) {
    double xi = x[i];
    for (int it = 0; it < 4; ++it) {
      auto [pa, dpa] = detail::legendre(M - 1, xi);
      auto [pb, dpb] = detail::legendre(M, xi);
      const double step = (pa - pb) / (dpa - dpb);
      xi -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = xi;
  }
  x[M - 1] = 1.0;

  std::vector<double> nodes(M);
  for (int i = 0; i < M; ++i) nodes[i] = 0.5 * (x[i] + 1.0);
  nodes[M - 1] = 1.0;
  return nodes;
}

inline void require_increasing_nodes(std::span<const double> nodes, const char* where) {
  if (nodes.empty()) throw std::invalid_argument(std::string(where) + ": empty node set");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] > 0.0 && nodes[i] <= 1.0))
      throw std::invalid_argument(std::string(where) + ": nodes must lie in (0, 1]");
    if (i > 0 && !(nodes[i] > nodes[i - 1]))
      throw std::invalid_argument(std::string(where) + ": nodes must be strictly increasing");
  }
}

/// Row i holds the weights that evaluate the interpolant through `source`
/// at `target[i]`.
inline Eigen::MatrixXd lagrange_matrix(std::span<const double> source,
                                       std::span<const double> target) {
  const auto n = static_cast<Eigen::Index>(source.size());
  Eigen::MatrixXd W(static_cast<Eigen::Index>(target.size()), n);
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    const double x = target[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      double w = 1.0;
      for (Eigen::Index l = 0; l < n; ++l) {
        if (l != j) w *= (x - source[l]) / (source[j] - source[l]);
      }
      W(i, j) = w;
    }
  }
  return W;
}

/// Spectral integration matrix: q(m, j) = integral of l_j from 0 to tau_m.
inline Eigen::MatrixXd compute_Q(std::span<const double> nodes) {
  require_increasing_nodes(nodes, "compute_Q");
  const int M = static_cast<int>(nodes.size());
  const auto [gx, gw] = gauss_legendre(2 * M);
  Eigen::MatrixXd Q(M, M);
  std::vector<double> pts(gx.size());
  for (int m = 0; m < M; ++m) {
    const double half = 0.5 * nodes[m];
    for (std::size_t i = 0; i < gx.size(); ++i) pts[i] = half * (gx[i] + 1.0);
    const Eigen::MatrixXd V = lagrange_matrix(nodes, pts);
    for (int j = 0; j < M; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < gx.size(); ++i) s += gw[i] * V(static_cast<Eigen::Index>(i), j);
      Q(m, j) = half * s;
    }
  }
  return Q;
}

inline std::vector<double> node_spacings(std::span<const double> nodes) {
  std::vector<double> d(nodes.size());
  double prev = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    d[m] = nodes[m] - prev;
    prev = nodes[m];
  }
  return d;
}

struct QDeltaMatrix {
  Eigen::MatrixXd matrix;
  PreconditionerKind kind = PreconditionerKind::RightRectangle;

  bool has_zero_diagonal() const { return matrix.diagonal().cwiseAbs().maxCoeff() == 0.0; }
};

/// Doolittle factorization A = L U with unit lower L, no pivoting.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> doolittle(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double s = A(i, j);
      for (Eigen::Index k = 0; k < i; ++k) s -= L(i, k) * U(k, j);
      U(i, j) = s;
    }
    if (std::abs(U(i, i)) <= 1e-14 * scale)
      throw FactorizationError("doolittle: singular leading minor at index " + std::to_string(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = A(j, i);
      for (Eigen::Index k = 0; k < i; ++k) s -= L(j, k) * U(k, i);
      L(j, i) = s / U(i, i);
    }
  }
  return {L, U};
}

/// Lower-triangular approximation of Q used to precondition the Picard
/// iteration. `Q` is only read for LUTrick.
inline QDeltaMatrix compute_QDelta(PreconditionerKind kind, std::span<const double> nodes,
                                   const Eigen::MatrixXd* Q = nullptr) {
  require_increasing_nodes(nodes, "compute_QDelta");
  const auto M = static_cast<Eigen::Index>(nodes.size());
  const auto d = node_spacings(nodes);
  QDeltaMatrix out{Eigen::MatrixXd::Zero(M, M), kind};
  switch (kind) {
    case PreconditionerKind::RightRectangle:
      for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index j = 0; j <= m; ++j) out.matrix(m, j) = d[j];
      break;
    case PreconditionerKind::LeftRectangle:
      for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index j = 0; j < m; ++j) out.matrix(m, j) = d[j + 1];
      break;
    case PreconditionerKind::LUTrick: {
      if (Q == nullptr) throw std::invalid_argument("compute_QDelta: LUTrick needs Q");
      if (Q->rows() != M || Q->cols() != M)
        throw std::invalid_argument("compute_QDelta: Q has wrong shape");
      const auto [L, U] = doolittle(Q->transpose());
      out.matrix = U.transpose();
      break;
    }
  }
  return out;
}

/// Nodes, integration matrix and node spacings for one collocation rule.
struct QuadratureTables {
  std::vector<double> nodes;
  Eigen::MatrixXd Q;
  std::vector<double> spacings;

  std::size_t num_nodes() const noexcept { return nodes.size(); }

  static QuadratureTables gauss_radau_right(int num_nodes) {
    QuadratureTables t;
    t.nodes = compute_nodes(num_nodes);
    t.Q = compute_Q(t.nodes);
    t.spacings = node_spacings(t.nodes);
    return t;
  }
};

struct CollocationSpec {
  int num_nodes = 3;
  NodeFamily family = NodeFamily::GaussRadauRight;
  double t0 = 0.0;
  double t1 = 1.0;

  double dt() const noexcept { return t1 - t0; }

  void validate() const {
    if (num_nodes < 1) throw std::invalid_argument("CollocationSpec: num_nodes must be >= 1");
    if (!(t1 - t0 > 0.0)) throw std::invalid_argument("CollocationSpec: need t1 > t0");
  }

  QuadratureTables tables() const {
    validate();
    return QuadratureTables::gauss_radau_right(num_nodes);
  }

  /// Physical time of every node.
  std::vector<double> node_times(const QuadratureTables& tables) const {
    std::vector<double> t(tables.nodes.size());
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = t0 + dt() * tables.nodes[m];
    return t;
  }
};

/// Evaluates F at every node.
inline NodeVector eval_F(const IVProblem& problem, const NodeVector& U) {
  NodeVector out(U.num_nodes(), U.dim());
  for (std::size_t m = 0; m < U.num_nodes(); ++m) out.node(m) = problem.eval_f(U.node(m));
  return out;
}

/// (A kron I) V for a small node-space matrix A.
inline NodeVector apply_node_matrix(const Eigen::MatrixXd& A, const NodeVector& V) {
  if (static_cast<std::size_t>(A.cols()) != V.num_nodes())
    throw std::invalid_argument("apply_node_matrix: matrix does not match node count");
  NodeVector out(static_cast<std::size_t>(A.rows()), V.dim());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    auto row = out.node(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) row += A(i, j) * V.node(static_cast<std::size_t>(j));
    }
  }
  return out;
}

/// C(U) - U0 with C(U) = U - dt (Q kron I) F(U).
inline NodeVector collocation_residual(const NodeVector& U, const StateRef& u0,
                                       const QuadratureTables& tables, double dt,
                                       const IVProblem& problem) {
  if (U.num_nodes() != tables.num_nodes() || U.dim() != problem.dimension() ||
      static_cast<std::size_t>(u0.size()) != problem.dimension())
    throw std::invalid_argument("collocation_residual: dimension mismatch");
  NodeVector r = U;
  if (dt != 0.0) {
    const NodeVector QF = apply_node_matrix(tables.Q, eval_F(problem, U));
    r.flat() -= dt * QF.flat();
  }
  for (std::size_t m = 0; m < r.num_nodes(); ++m) r.node(m) -= u0;
  return r;
}

}  // namespace mlsdc
