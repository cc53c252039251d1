#pragma once

#include "mlsdc/collocation.hpp"
#include "mlsdc/diagnostics.hpp"
#include "mlsdc/errors.hpp"
#include "mlsdc/mlsdc.hpp"
#include "mlsdc/problem.hpp"
#include "mlsdc/sweeper.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mlsdc {

enum class Method { SDC, MLSDC };

inline std::string to_string(Method m) { return m == Method::SDC ? "SDC" : "MLSDC"; }

inline Method method_from_string(const std::string& s) {
  if (s == "SDC" || s == "sdc") return Method::SDC;
  if (s == "MLSDC" || s == "mlsdc") return Method::MLSDC;
  throw std::invalid_argument("unknown method '" + s + "' (expected SDC or MLSDC)");
}

/// Which error column the per-iteration order fit uses.
enum class OrderReference { Exact, LastNode };

struct StudySetup {
  std::string label = "custom";
  std::shared_ptr<const IVProblem> problem;         // fine level
  std::shared_ptr<const IVProblem> coarse_problem;  // MLSDC only
  Method method = Method::SDC;
  int num_nodes = 3;
  int coarse_nodes = 3;
  int interpolation_order = 8;
  SweepConfig sweep;
  InitialGuess guess;
  std::vector<double> dt_list;
  int k_max = 4;
  double t_end = 0.0;  // <= 0: a single step of size dt
  double collocation_tol = 1e-11;
  OrderReference order_reference = OrderReference::Exact;
  std::size_t tail_cutoff = 0;  // 0: no Fourier tail
  double fit_floor = 1e-13;
  double contraction_floor = 1e-12;
  int jobs = 1;
  bool timing = true;

  void validate() const {
    if (!problem) throw std::invalid_argument("StudySetup: problem missing");
    if (method == Method::MLSDC && !coarse_problem)
      throw std::invalid_argument("StudySetup: MLSDC needs a coarse problem");
    if (dt_list.empty()) throw std::invalid_argument("StudySetup: dt list is empty");
    for (std::size_t i = 0; i < dt_list.size(); ++i) {
      if (!(dt_list[i] > 0.0)) throw std::invalid_argument("StudySetup: dt values must be > 0");
      if (i > 0 && !(dt_list[i] < dt_list[i - 1]))
        throw std::invalid_argument("StudySetup: dt values must be strictly decreasing");
    }
    if (k_max < 0) throw std::invalid_argument("StudySetup: k_max must be >= 0");
    if (num_nodes < 1 || coarse_nodes < 1)
      throw std::invalid_argument("StudySetup: node counts must be >= 1");
    if (t_end > 0.0) {
      for (double dt : dt_list) {
        const double steps = t_end / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
          throw std::invalid_argument("StudySetup: t_end must be an integer multiple of every dt");
      }
    }
    sweep.validate();
  }
};

struct StudyRecord {
  std::string preset;
  double dt = 0.0;
  int k = 0;
  double err_coll = 0.0;
  double err_exact = 0.0;
  double err_last = 0.0;
  double order_fit = 0.0;
  double contraction_slope = 0.0;
  double E_max = 0.0;
  double wall_ms = 0.0;
};

struct StudyResult {
  std::vector<StudyRecord> rows;
  ErrorSeries coll;
  ErrorSeries exact;
  ErrorSeries last;
  std::vector<double> order;        // per k, NaN where the fit is impossible
  std::vector<double> contraction;  // per k, NaN for k = 0 or impossible
  std::vector<std::string> notes;   // per-cell failures and excluded points
  bool tail_heuristic = false;
};

namespace detail {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct CellResult {
  std::vector<double> coll, exact, last, tail, wall;
  std::string note;
};

class Iterator {
 public:
  Iterator(const StudySetup& s, const QuadratureTables& tables,
           const std::optional<LevelHierarchy>& hier)
      : s_(s), tables_(tables), hier_(hier) {
    if (s.method == Method::SDC)
      qdelta_ = compute_QDelta(s.sweep.preconditioner, tables.nodes, &tables.Q).matrix;
  }

  NodeVector step(const NodeVector& U, const State& u0, double dt) const {
    if (s_.method == Method::MLSDC) return mlsdc_iteration(*hier_, U, u0, dt);
    return sdc_sweep(U, u0, tables_, qdelta_, dt, *s_.problem, nullptr, s_.sweep);
  }

 private:
  const StudySetup& s_;
  const QuadratureTables& tables_;
  const std::optional<LevelHierarchy>& hier_;
  Eigen::MatrixXd qdelta_;
};

inline CellResult run_cell(const StudySetup& s, const QuadratureTables& tables,
                           const std::optional<LevelHierarchy>& hier, double dt) {
  using clock = std::chrono::steady_clock;
  const IVProblem& P = *s.problem;
  const std::size_t K = static_cast<std::size_t>(s.k_max) + 1;
  CellResult c{std::vector<double>(K, nan), std::vector<double>(K, nan), std::vector<double>(K, nan),
               std::vector<double>(K, nan), std::vector<double>(K, nan), {}};
  const Iterator it(s, tables, hier);
  const State u0 = P.initial_value();

  const NodeVector U_coll = solve_collocation(P, tables, dt, u0, s.collocation_tol);
  std::optional<NodeVector> exact_nodes;
  if (P.exact_solution(0.0)) {
    exact_nodes.emplace(tables.num_nodes(), P.dimension());
    for (std::size_t m = 0; m < tables.num_nodes(); ++m)
      exact_nodes->node(m) = *P.exact_solution(dt * tables.nodes[m]);
  }

  const auto t0 = clock::now();
  NodeVector U = make_initial_guess(P, tables.num_nodes(), s.guess);
  DivergenceGuard guard;
  try {
    for (std::size_t k = 0; k < K; ++k) {
      if (k > 0) {
        NodeVector next = it.step(U, u0, dt);
        guard.observe((next.flat() - U.flat()).lpNorm<Eigen::Infinity>(), static_cast<int>(k));
        U = std::move(next);
      }
      c.wall[k] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      c.coll[k] = error_inf(U, U_coll);
      if (exact_nodes) {
        c.exact[k] = error_inf(U, *exact_nodes);
        if (s.t_end <= 0.0) c.last[k] = last_node_error(U, exact_nodes->last());
      }
      if (s.tail_cutoff > 0) c.tail[k] = fourier_tail(U - U_coll, s.tail_cutoff, P.grid()).max();
    }
  } catch (const std::exception& e) {
    c.note = "dt=" + std::to_string(dt) + ": " + e.what();
    return c;
  }

  // Multi-step runs: error at t_end after propagating with k iterations per step.
  if (s.t_end > 0.0 && P.exact_solution(0.0)) {
    const int steps = static_cast<int>(std::lround(s.t_end / dt));
    const State exact_end = *P.exact_solution(s.t_end);
    for (std::size_t k = 0; k < K; ++k) {
      try {
        State u = u0;
        for (int n = 0; n < steps; ++n) {
          NodeVector V = make_initial_guess(P, tables.num_nodes(), s.guess, &u);
          for (std::size_t j = 0; j < k; ++j) V = it.step(V, u, dt);
          u = V.last();
          if (!u.allFinite()) throw DivergenceError("non-finite state", static_cast<int>(k));
        }
        c.last[k] = (u - exact_end).lpNorm<Eigen::Infinity>();
      } catch (const std::exception& e) {
        c.note += (c.note.empty() ? "" : "; ") + ("dt=" + std::to_string(dt) + " k=" +
                                                  std::to_string(k) + ": " + e.what());
      }
    }
  }
  return c;
}

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, jobs > 0 ? jobs : 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Runs every (dt, k) cell, then fits per-iteration orders and contraction
/// slopes. Failing cells are recorded, not fatal.
inline StudyResult run_convergence_study(const StudySetup& s) {
  s.validate();
  const QuadratureTables tables = QuadratureTables::gauss_radau_right(s.num_nodes);
  std::optional<LevelHierarchy> hier;
  if (s.method == Method::MLSDC)
    hier.emplace(LevelHierarchy::build(s.problem, s.coarse_problem, s.num_nodes, s.coarse_nodes,
                                       s.interpolation_order, s.sweep));

  const std::size_t D = s.dt_list.size();
  const std::size_t K = static_cast<std::size_t>(s.k_max) + 1;
  std::vector<detail::CellResult> cells(D);
  detail::parallel_for(D, s.jobs, [&](std::size_t i) {
    try {
      cells[i] = detail::run_cell(s, tables, hier, s.dt_list[i]);
    } catch (const std::exception& e) {
      const std::vector<double> blank(K, detail::nan);
      cells[i] = {blank, blank, blank, blank, blank,
                  "dt=" + std::to_string(s.dt_list[i]) + ": " + e.what()};
    }
  });

  StudyResult r;
  r.tail_heuristic = s.problem->grid().layout == SpatialLayout::Periodic2D && s.tail_cutoff > 0;
  r.coll = {s.dt_list, {}, ReferenceKind::CollocationSolution};
  r.exact = {s.dt_list, {}, ReferenceKind::ExactSolution};
  r.last = {s.dt_list, {}, ReferenceKind::LastNodeExact};
  for (const auto& c : cells) {
    r.coll.errors.push_back(c.coll);
    r.exact.errors.push_back(c.exact);
    r.last.errors.push_back(c.last);
    if (!c.note.empty()) r.notes.push_back(c.note);
  }

  const ErrorSeries& ord = s.order_reference == OrderReference::Exact ? r.exact : r.last;
  FitOptions fit_opt;
  fit_opt.floor = s.fit_floor;
  FitOptions con_opt;
  con_opt.floor = s.contraction_floor;
  r.order.assign(K, detail::nan);
  r.contraction.assign(K, detail::nan);
  const bool has_exact = s.problem->exact_solution(0.0).has_value();
  if (!has_exact) r.notes.push_back("no exact solution: order fits skipped");
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<FitPoint> pts;
    for (std::size_t i = 0; i < D; ++i) {
      FitPoint p{s.dt_list[i], ord.errors[i][k]};
      // The iterate already sits on the collocation solution: its error against
      // the exact solution is the collocation error, not an iteration error.
      if (s.order_reference == OrderReference::Exact && std::isfinite(r.coll.errors[i][k]) &&
          r.coll.errors[i][k] < 0.01 * ord.errors[i][k])
        p.saturated = true;
      pts.push_back(p);
    }
    if (has_exact) {
      try {
        const FitResult f = fit_order_detailed(pts, fit_opt);
        r.order[k] = f.slope;
        if (!f.excluded.empty())
          r.notes.push_back("order fit k=" + std::to_string(k) + ": " +
                            std::to_string(f.excluded.size()) + " point(s) excluded");
      } catch (const InsufficientData& e) {
        r.notes.push_back("order fit k=" + std::to_string(k) + ": " + e.what());
      }
    }
    if (k == 0) continue;
    try {
      r.contraction[k] = contraction_slope(r.coll, static_cast<int>(k), con_opt);
    } catch (const InsufficientData& e) {
      r.notes.push_back("contraction k=" + std::to_string(k) + ": " + e.what());
    }
  }

  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      StudyRecord row;
      row.preset = s.label;
      row.dt = s.dt_list[i];
      row.k = static_cast<int>(k);
      row.err_coll = r.coll.errors[i][k];
      row.err_exact = r.exact.errors[i][k];
      row.err_last = r.last.errors[i][k];
      row.order_fit = r.order[k];
      row.contraction_slope = r.contraction[k];
      row.E_max = cells[i].tail[k];
      row.wall_ms = s.timing ? cells[i].wall[k] : 0.0;
      r.rows.push_back(row);
    }
  return r;
}

}  // namespace mlsdc
