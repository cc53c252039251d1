#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mlsdc {

struct KrylovResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // 2-norm of the final (unpreconditioned) residual
  int iterations = 0;
  bool converged = false;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Thomas algorithm for a tridiagonal system. `lower[i]` couples row i+1 to
/// column i, `upper[i]` couples row i to column i+1.
inline Eigen::VectorXd solve_tridiagonal(const Eigen::VectorXd& lower, const Eigen::VectorXd& diag,
                                         const Eigen::VectorXd& upper, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = diag.size();
  if (rhs.size() != n || (n > 0 && (lower.size() != n - 1 || upper.size() != n - 1)))
    throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");
  if (n == 0) return {};
  Eigen::VectorXd c(n), d(n);
  double beta = diag(0);
  if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  c(0) = n > 1 ? upper(0) / beta : 0.0;
  d(0) = rhs(0) / beta;
  for (Eigen::Index i = 1; i < n; ++i) {
    beta = diag(i) - lower(i - 1) * c(i - 1);
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c(i) = i + 1 < n ? upper(i) / beta : 0.0;
    d(i) = (rhs(i) - lower(i - 1) * d(i - 1)) / beta;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) d(i) -= c(i) * d(i + 1);
  return d;
}

/// Matrix-free conjugate gradients for symmetric positive definite A.
/// Stops once ||b - A x||_2 <= tol.
inline KrylovResult conjugate_gradient(const LinearOperator& A, const Eigen::VectorXd& b,
                                       Eigen::VectorXd x0, double tol, int max_iter = 1000) {
  KrylovResult out;
  out.x = std::move(x0);
  Eigen::VectorXd r = b - A(out.x);
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;  // not SPD along p
    const double alpha = rr / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    out.iterations = it + 1;
  }
  out.residual = std::sqrt(rr);
  out.converged = out.converged || out.residual <= tol;
  return out;
}

/// Restarted GMRES(m) with optional right preconditioner M^{-1}.
/// Stops once ||b - A x||_2 <= tol.
inline KrylovResult gmres(const LinearOperator& A, const Eigen::VectorXd& b, Eigen::VectorXd x0,
                          double tol, int restart = 40, int max_iter = 2000,
                          const LinearOperator& precond = nullptr) {
  KrylovResult out;
  out.x = std::move(x0);
  const Eigen::Index n = b.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(restart, std::max<Eigen::Index>(n, 1)));
  auto apply_prec = [&](const Eigen::VectorXd& v) { return precond ? precond(v) : v; };

  Eigen::VectorXd r = b - A(out.x);
  double beta = r.norm();
  int total = 0;
  while (beta > tol && total < max_iter) {
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;
    int j = 0;
    for (; j < m && total < max_iter; ++j, ++total) {
      Eigen::VectorXd w = A(apply_prec(V.col(j)));
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double h = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = h > 0.0 ? H(j, j) / h : 1.0;
      sn(j) = h > 0.0 ? H(j + 1, j) / h : 0.0;
      H(j, j) = h;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) <= tol || H(j, j) == 0.0) {
        ++j;
        ++total;
        break;
      }
    }
    if (j == 0) break;
    const Eigen::VectorXd y =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    out.x += apply_prec(V.leftCols(j) * y);
    r = b - A(out.x);
    const double new_beta = r.norm();
    const bool stagnated = !(new_beta < beta);
    beta = new_beta;
    if (stagnated) break;
  }
  out.iterations = total;
  out.residual = beta;
  out.converged = beta <= tol;
  return out;
}

}  // namespace mlsdc
