#pragma once

#include "mlsdc/collocation.hpp"
#include "mlsdc/errors.hpp"
#include "mlsdc/node_vector.hpp"
#include "mlsdc/problem.hpp"
#include "mlsdc/sweeper.hpp"
#include "mlsdc/transfer.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

struct Level {
  std::shared_ptr<const IVProblem> problem;
  QuadratureTables tables;
  QDeltaMatrix qdelta;

  static Level make(std::shared_ptr<const IVProblem> problem, int num_nodes,
                    PreconditionerKind kind) {
    if (!problem) throw std::invalid_argument("Level: null problem");
    Level l{std::move(problem), QuadratureTables::gauss_radau_right(num_nodes), {}};
    l.qdelta = compute_QDelta(kind, l.tables.nodes, &l.tables.Q);
    return l;
  }
};

/// Fine and coarse level plus the transfer operators between them. Without
/// any transfer both levels must be identical in shape (test mode).
class LevelHierarchy {
 public:
  LevelHierarchy(Level fine, Level coarse, std::optional<SpatialTransfer> spatial,
                 std::optional<TemporalTransfer> temporal, SweepConfig config = {})
      : fine_(std::move(fine)),
        coarse_(std::move(coarse)),
        spatial_(std::move(spatial)),
        temporal_(std::move(temporal)),
        config_(config) {
    config_.validate();
    const std::size_t Nh = fine_.problem->dimension(), NH = coarse_.problem->dimension();
    const std::size_t Mh = fine_.tables.num_nodes(), MH = coarse_.tables.num_nodes();
    if (spatial_) {
      if (spatial_->fine_dim() != Nh || spatial_->coarse_dim() != NH)
        throw std::invalid_argument("LevelHierarchy: spatial transfer does not match problem sizes");
    } else if (Nh != NH) {
      throw std::invalid_argument("LevelHierarchy: levels differ in size but no spatial transfer given");
    }
    if (temporal_) {
      if (temporal_->fine_nodes() != Mh || temporal_->coarse_nodes() != MH)
        throw std::invalid_argument("LevelHierarchy: temporal transfer does not match node counts");
    } else if (Mh != MH) {
      throw std::invalid_argument("LevelHierarchy: node counts differ but no temporal transfer given");
    }
  }

  /// Convenience constructor for the usual setups.
  static LevelHierarchy build(std::shared_ptr<const IVProblem> fine_problem,
                              std::shared_ptr<const IVProblem> coarse_problem, int fine_nodes,
                              int coarse_nodes, int p, const SweepConfig& config = {}) {
    Level fine = Level::make(fine_problem, fine_nodes, config.preconditioner);
    Level coarse = Level::make(coarse_problem, coarse_nodes, config.preconditioner);
    std::optional<SpatialTransfer> spatial;
    if (fine_problem->dimension() != coarse_problem->dimension()) {
      const GridInfo gf = fine_problem->grid(), gc = coarse_problem->grid();
      if (gf.layout != gc.layout)
        throw std::invalid_argument("LevelHierarchy: fine and coarse grids have different layouts");
      spatial.emplace(gf.layout, gf.points_per_axis, gc.points_per_axis, p);
    }
    std::optional<TemporalTransfer> temporal;
    if (fine_nodes != coarse_nodes) temporal.emplace(fine.tables.nodes, coarse.tables.nodes);
    return LevelHierarchy(std::move(fine), std::move(coarse), std::move(spatial),
                          std::move(temporal), config);
  }

  const Level& fine() const noexcept { return fine_; }
  const Level& coarse() const noexcept { return coarse_; }
  const std::optional<SpatialTransfer>& spatial() const noexcept { return spatial_; }
  const std::optional<TemporalTransfer>& temporal() const noexcept { return temporal_; }
  const SweepConfig& config() const noexcept { return config_; }

  State restrict_state(const StateRef& u) const {
    return spatial_ ? spatial_->restrict_state(u) : State(u);
  }
  State interpolate_state(const StateRef& u) const {
    return spatial_ ? spatial_->interpolate_state(u) : State(u);
  }

 private:
  Level fine_;
  Level coarse_;
  std::optional<SpatialTransfer> spatial_;
  std::optional<TemporalTransfer> temporal_;
  SweepConfig config_;
};

/// Fine node vector to coarse shape: temporal restriction, then injection.
inline NodeVector restrict(const LevelHierarchy& h, const NodeVector& U) {
  if (U.num_nodes() != h.fine().tables.num_nodes() || U.dim() != h.fine().problem->dimension())
    throw std::invalid_argument("restrict: input does not have the fine-level shape");
  const NodeVector T = h.temporal() ? apply_node_matrix(h.temporal()->restriction(), U) : U;
  if (!h.spatial()) return T;
  NodeVector out(T.num_nodes(), h.coarse().problem->dimension());
  for (std::size_t m = 0; m < T.num_nodes(); ++m) out.node(m) = h.spatial()->restrict_state(T.node(m));
  return out;
}

/// Coarse node vector to fine shape: spatial interpolation, then temporal.
inline NodeVector interpolate(const LevelHierarchy& h, const NodeVector& U) {
  if (U.num_nodes() != h.coarse().tables.num_nodes() || U.dim() != h.coarse().problem->dimension())
    throw std::invalid_argument("interpolate: input does not have the coarse-level shape");
  NodeVector S = U;
  if (h.spatial()) {
    S = NodeVector(U.num_nodes(), h.fine().problem->dimension());
    for (std::size_t m = 0; m < U.num_nodes(); ++m) S.node(m) = h.spatial()->interpolate_state(U.node(m));
  }
  return h.temporal() ? apply_node_matrix(h.temporal()->interpolation(), S) : S;
}

namespace detail {

struct TauParts {
  NodeVector tau;
  NodeVector U_H;  // restricted fine iterate
  NodeVector F_H;  // F on the coarse level at U_H
};

inline TauParts compute_tau_parts(const LevelHierarchy& h, const NodeVector& U_h, double dt) {
  const NodeVector F_h = eval_F(*h.fine().problem, U_h);
  NodeVector fine_int = apply_node_matrix(h.fine().tables.Q, F_h);
  fine_int *= dt;
  TauParts parts{restrict(h, fine_int), restrict(h, U_h), {}};
  parts.F_H = eval_F(*h.coarse().problem, parts.U_H);
  NodeVector coarse_int = apply_node_matrix(h.coarse().tables.Q, parts.F_H);
  coarse_int *= dt;
  parts.tau -= coarse_int;
  return parts;
}

}  // namespace detail

/// tau = R(dt Q_h F_h(U_h)) - dt Q_H F_H(R U_h).
inline NodeVector compute_tau(const LevelHierarchy& h, const NodeVector& U_h, double dt) {
  return detail::compute_tau_parts(h, U_h, dt).tau;
}

/// One two-level cycle: tau correction, coarse sweep, coarse correction, fine sweep.
inline NodeVector mlsdc_iteration(const LevelHierarchy& h, const NodeVector& U_h,
                                  const StateRef& u0_h, double dt) {
  if (static_cast<std::size_t>(u0_h.size()) != h.fine().problem->dimension())
    throw std::invalid_argument("mlsdc_iteration: u0 has wrong dimension");
  const int step_tau = 1, step_coarse = 2, step_fine = 4;
  int step = step_tau;
  try {
    detail::TauParts parts = detail::compute_tau_parts(h, U_h, dt);
    const State u0_H = h.restrict_state(u0_h);
    step = step_coarse;
    const NodeVector U_H_new = sdc_sweep(parts.U_H, u0_H, h.coarse().tables, h.coarse().qdelta.matrix,
                                         dt, *h.coarse().problem, &parts.tau, h.config(), nullptr,
                                         &parts.F_H);
    NodeVector U_half = U_h + interpolate(h, U_H_new - parts.U_H);
    step = step_fine;
    return sdc_sweep(U_half, u0_h, h.fine().tables, h.fine().qdelta.matrix, dt, *h.fine().problem,
                     nullptr, h.config());
  } catch (const SolverFailure& e) {
    throw e.with_context("mlsdc step " + std::to_string(step));
  }
}

inline std::vector<NodeVector> run_mlsdc(const LevelHierarchy& h, const StateRef& u0, double dt,
                                         const NodeVector& initial, int k_max) {
  if (k_max < 0) throw std::invalid_argument("run_mlsdc: k_max must be >= 0");
  std::vector<NodeVector> iterates{initial};
  DivergenceGuard guard;
  for (int k = 1; k <= k_max; ++k) {
    iterates.push_back(mlsdc_iteration(h, iterates.back(), u0, dt));
    guard.observe((iterates[k].flat() - iterates[k - 1].flat()).lpNorm<Eigen::Infinity>(), k);
  }
  return iterates;
}

}  // namespace mlsdc
