#pragma once

#include "mlsdc/errors.hpp"
#include "mlsdc/node_vector.hpp"
#include "mlsdc/problem.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

inline double error_inf(const NodeVector& U, const NodeVector& ref) {
  NodeVector::require_same_shape(U, ref, "error_inf");
  if (U.size() == 0) return 0.0;
  return (U.flat() - ref.flat()).lpNorm<Eigen::Infinity>();
}

inline double last_node_error(const NodeVector& U, const StateRef& exact_at_t1) {
  if (static_cast<std::size_t>(exact_at_t1.size()) != U.dim())
    throw std::invalid_argument("last_node_error: dimension mismatch");
  return (U.last() - exact_at_t1).lpNorm<Eigen::Infinity>();
}

enum class ReferenceKind { CollocationSolution, ExactSolution, LastNodeExact };

/// errors[i][k]: error at step size step_sizes[i] after k iterations.
struct ErrorSeries {
  std::vector<double> step_sizes;
  std::vector<std::vector<double>> errors;
  ReferenceKind reference_kind = ReferenceKind::CollocationSolution;

  void validate() const {
    if (errors.size() != step_sizes.size())
      throw std::invalid_argument("ErrorSeries: one error row per step size required");
    for (std::size_t i = 0; i < step_sizes.size(); ++i) {
      if (i > 0 && !(step_sizes[i] < step_sizes[i - 1]))
        throw std::invalid_argument("ErrorSeries: step sizes must be strictly decreasing");
      if (errors[i].size() != errors[0].size())
        throw std::invalid_argument("ErrorSeries: error table is not rectangular");
      for (double e : errors[i])
        if (!(e >= 0.0) && !std::isnan(e))
          throw std::invalid_argument("ErrorSeries: negative error");
    }
  }

  std::size_t num_iterations() const { return errors.empty() ? 0 : errors[0].size(); }
};

struct FitPoint {
  double dt;
  double error;
  bool saturated = false;  // caller-flagged: error already at the attainable accuracy
};

struct FitOptions {
  double floor = 1e-13;
  double ceiling = std::numeric_limits<double>::infinity();
  std::size_t min_points = 3;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<std::size_t> used;
  std::vector<std::size_t> excluded;
};

/// Least-squares slope of log(error) against log(dt).
inline FitResult fit_order_detailed(const std::vector<FitPoint>& points, const FitOptions& opt = {}) {
  FitResult r;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const FitPoint& p = points[i];
    const bool ok = p.dt > 0.0 && std::isfinite(p.error) && p.error > opt.floor &&
                    p.error <= opt.ceiling && !p.saturated;
    if (!ok) {
      r.excluded.push_back(i);
      continue;
    }
    r.used.push_back(i);
    const double x = std::log(p.dt), y = std::log(p.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(r.used.size());
  if (r.used.size() < std::max<std::size_t>(opt.min_points, 2))
    throw InsufficientData("fit_order: " + std::to_string(r.used.size()) +
                           " usable points, need " + std::to_string(opt.min_points));
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw InsufficientData("fit_order: step sizes are all equal");
  r.slope = (n * sxy - sx * sy) / denom;
  r.intercept = (sy - r.slope * sx) / n;
  return r;
}

inline double fit_order(const std::vector<FitPoint>& points, const FitOptions& opt = {}) {
  return fit_order_detailed(points, opt).slope;
}

inline double fit_order(const std::vector<double>& dts, const std::vector<double>& errors,
                        const FitOptions& opt = {}) {
  if (dts.size() != errors.size()) throw std::invalid_argument("fit_order: size mismatch");
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < dts.size(); ++i) pts.push_back({dts[i], errors[i]});
  return fit_order(pts, opt);
}

/// Slope of log(err_k / err_{k-1}) against log(dt). Rows where either error
/// is at or below the floor are left out.
inline FitResult contraction_slope_detailed(const ErrorSeries& series, int k,
                                            const FitOptions& opt = {}) {
  series.validate();
  if (k < 1 || static_cast<std::size_t>(k) >= series.num_iterations())
    throw std::invalid_argument("contraction_slope: iteration " + std::to_string(k) +
                                " not available");
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < series.step_sizes.size(); ++i) {
    const double prev = series.errors[i][static_cast<std::size_t>(k - 1)];
    const double cur = series.errors[i][static_cast<std::size_t>(k)];
    FitPoint p{series.step_sizes[i], 0.0};
    if (prev > opt.floor && cur > opt.floor && std::isfinite(prev) && std::isfinite(cur)) {
      p.error = cur / prev;
    } else {
      p.error = std::numeric_limits<double>::quiet_NaN();
    }
    pts.push_back(p);
  }
  FitOptions ratio_opt = opt;
  ratio_opt.floor = 0.0;
  return fit_order_detailed(pts, ratio_opt);
}

inline double contraction_slope(const ErrorSeries& series, int k, const FitOptions& opt = {}) {
  return contraction_slope_detailed(series, k, opt).slope;
}

/// Unitary DFT, c_l = N^{-1/2} sum_n u_n exp(-2 pi i n l / N).
inline std::vector<std::complex<double>> unitary_dft(const std::vector<double>& u) {
  std::vector<std::complex<double>> c;
  if (u.empty()) return c;
  Eigen::FFT<double> fft;
  fft.fwd(c, u);
  const double s = 1.0 / std::sqrt(static_cast<double>(u.size()));
  for (auto& v : c) v *= s;
  return c;
}

enum class TailIndexing {
  Folded,   // |wavenumber| = min(l, N - l) >= N0
  Literal,  // l = N0 .. N-1
};

inline double tail_sum(const std::vector<std::complex<double>>& c, std::size_t N0,
                       TailIndexing indexing) {
  const std::size_t N = c.size();
  double s = 0.0;
  for (std::size_t l = 0; l < N; ++l) {
    const std::size_t w = indexing == TailIndexing::Folded ? std::min(l, N - l) : l;
    if (w >= N0) s += std::abs(c[l]);
  }
  return s;
}

struct FourierTail {
  std::size_t cutoff = 0;
  std::vector<double> remainders;  // one per node
  bool heuristic = false;          // true for 2D (per-axis transforms, max aggregation)

  double max() const {
    return remainders.empty() ? 0.0 : *std::max_element(remainders.begin(), remainders.end());
  }
};

/// Fourier tail of the error at every node. 1D layouts transform each node
/// block; Periodic2D transforms every row and column and keeps the maximum.
inline FourierTail fourier_tail(const NodeVector& error, std::size_t N0, const GridInfo& grid,
                                TailIndexing indexing = TailIndexing::Folded) {
  FourierTail out;
  out.cutoff = N0;
  const std::size_t n = grid.layout == SpatialLayout::Periodic2D ? grid.points_per_axis : error.dim();
  if (grid.layout == SpatialLayout::Periodic2D && n * n != error.dim())
    throw std::invalid_argument("fourier_tail: grid does not match state dimension");
  if (N0 < 1 || N0 > n)
    throw std::invalid_argument("fourier_tail: cutoff N0=" + std::to_string(N0) +
                                " outside [1, " + std::to_string(n) + "]");
  std::vector<double> line(n);
  for (std::size_t m = 0; m < error.num_nodes(); ++m) {
    const auto block = error.node(m);
    double e = 0.0;
    if (grid.layout == SpatialLayout::Periodic2D) {
      out.heuristic = true;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) line[i] = block(r * n + i);
        e = std::max(e, tail_sum(unitary_dft(line), N0, indexing));
        for (std::size_t i = 0; i < n; ++i) line[i] = block(i * n + r);
        e = std::max(e, tail_sum(unitary_dft(line), N0, indexing));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) line[i] = block(i);
      e = tail_sum(unitary_dft(line), N0, indexing);
    }
    out.remainders.push_back(e);
  }
  return out;
}

inline FourierTail fourier_tail(const NodeVector& error, std::size_t N0,
                                TailIndexing indexing = TailIndexing::Folded) {
  return fourier_tail(error, N0, GridInfo{SpatialLayout::Periodic1D, error.dim()}, indexing);
}

}  // namespace mlsdc
