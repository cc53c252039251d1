#pragma once

#include "mlsdc/collocation.hpp"
#include "mlsdc/node_vector.hpp"
#include "mlsdc/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

/// Injection restriction plus piecewise Lagrange interpolation of even order
/// p between nested grids with coarsening ratio 2 per axis.
class SpatialTransfer {
 public:
  /// `fine_n` and `coarse_n` are points per axis.
  SpatialTransfer(SpatialLayout layout, std::size_t fine_n, std::size_t coarse_n, int p)
      : layout_(layout), fine_n_(fine_n), coarse_n_(coarse_n), p_(p) {
    if (p < 2 || p % 2 != 0)
      throw std::invalid_argument("SpatialTransfer: interpolation order p must be even and >= 2");
    if (static_cast<std::size_t>(p) > coarse_n)
      throw std::invalid_argument("SpatialTransfer: interpolation order p=" + std::to_string(p) +
                                  " exceeds coarse grid size " + std::to_string(coarse_n));
    switch (layout) {
      case SpatialLayout::Dirichlet1D:
        if (fine_n != 2 * coarse_n + 1)
          throw std::invalid_argument("SpatialTransfer: Dirichlet grids need N_h = 2 N_H + 1");
        break;
      case SpatialLayout::Periodic1D:
      case SpatialLayout::Periodic2D:
        if (fine_n != 2 * coarse_n)
          throw std::invalid_argument("SpatialTransfer: periodic grids need N_h = 2 N_H");
        break;
      case SpatialLayout::Pointwise:
        throw std::invalid_argument("SpatialTransfer: problem has no spatial grid");
    }
    build_stencils();
  }

  SpatialLayout layout() const noexcept { return layout_; }
  std::size_t fine_points() const noexcept { return fine_n_; }
  std::size_t coarse_points() const noexcept { return coarse_n_; }
  int order() const noexcept { return p_; }

  std::size_t fine_dim() const noexcept {
    return layout_ == SpatialLayout::Periodic2D ? fine_n_ * fine_n_ : fine_n_;
  }
  std::size_t coarse_dim() const noexcept {
    return layout_ == SpatialLayout::Periodic2D ? coarse_n_ * coarse_n_ : coarse_n_;
  }

  /// Fine index of coarse point k along one axis.
  std::size_t coincident(std::size_t k) const noexcept {
    return layout_ == SpatialLayout::Dirichlet1D ? 2 * k + 1 : 2 * k;
  }

  State restrict_state(const StateRef& u) const {
    check(u, fine_dim(), "restrict");
    State out(coarse_dim());
    if (layout_ == SpatialLayout::Periodic2D) {
      for (std::size_t ky = 0; ky < coarse_n_; ++ky)
        for (std::size_t kx = 0; kx < coarse_n_; ++kx)
          out(ky * coarse_n_ + kx) = u(coincident(ky) * fine_n_ + coincident(kx));
    } else {
      for (std::size_t k = 0; k < coarse_n_; ++k) out(k) = u(coincident(k));
    }
    return out;
  }

  State interpolate_state(const StateRef& u) const {
    check(u, coarse_dim(), "interpolate");
    if (layout_ != SpatialLayout::Periodic2D) {
      State out(fine_n_);
      interpolate_line(u.data(), 1, out.data(), 1);
      return out;
    }
    // x direction on every coarse row, then y direction on every fine column.
    std::vector<double> tmp(coarse_n_ * fine_n_);
    for (std::size_t ky = 0; ky < coarse_n_; ++ky)
      interpolate_line(u.data() + ky * coarse_n_, 1, tmp.data() + ky * fine_n_, 1);
    State out(fine_dim());
    for (std::size_t ix = 0; ix < fine_n_; ++ix)
      interpolate_line(tmp.data() + ix, fine_n_, out.data() + ix, fine_n_);
    return out;
  }

  /// The 1D interpolation matrix (fine_n x coarse_n), dense. Tests only.
  Eigen::MatrixXd interpolation_matrix_1d() const {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fine_n_),
                                              static_cast<Eigen::Index>(coarse_n_));
    for (std::size_t i = 0; i < fine_n_; ++i)
      for (std::size_t s = 0; s < stencils_[i].index.size(); ++s)
        P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(stencils_[i].index[s])) +=
            stencils_[i].weight[s];
    return P;
  }

 private:
  struct Stencil {
    std::vector<std::size_t> index;
    std::vector<double> weight;
  };

  void build_stencils() {
    stencils_.resize(fine_n_);
    const int p = p_;
    std::vector<double> pos(static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < fine_n_; ++i) {
      // fine point position measured in coarse spacings
      const double s = layout_ == SpatialLayout::Dirichlet1D ? 0.5 * static_cast<double>(i + 1)
                                                             : 0.5 * static_cast<double>(i);
      long lo = static_cast<long>(std::floor(s)) - p / 2 + 1;
      if (layout_ == SpatialLayout::Dirichlet1D) {
        // coarse points 0..N_H+1 including both boundary points
        lo = std::clamp<long>(lo, 0, static_cast<long>(coarse_n_) + 2 - p);
      }
      for (int q = 0; q < p; ++q) pos[static_cast<std::size_t>(q)] = static_cast<double>(lo + q);
      const double target[1] = {s};
      const Eigen::MatrixXd w = lagrange_matrix(pos, target);
      Stencil& st = stencils_[i];
      for (int q = 0; q < p; ++q) {
        const long k = lo + q;
        std::size_t idx;
        if (layout_ == SpatialLayout::Dirichlet1D) {
          if (k < 1 || k > static_cast<long>(coarse_n_)) continue;  // zero boundary value
          idx = static_cast<std::size_t>(k - 1);
        } else {
          const long n = static_cast<long>(coarse_n_);
          idx = static_cast<std::size_t>(((k % n) + n) % n);
        }
        st.index.push_back(idx);
        st.weight.push_back(w(0, q));
      }
    }
  }

  void interpolate_line(const double* in, std::size_t in_stride, double* out,
                        std::size_t out_stride) const {
    for (std::size_t i = 0; i < fine_n_; ++i) {
      const Stencil& st = stencils_[i];
      double v = 0.0;
      for (std::size_t s = 0; s < st.index.size(); ++s) v += st.weight[s] * in[st.index[s] * in_stride];
      out[i * out_stride] = v;
    }
  }

  static void check(const StateRef& u, std::size_t n, const char* where) {
    if (static_cast<std::size_t>(u.size()) != n)
      throw std::invalid_argument(std::string("SpatialTransfer::") + where +
                                  ": state has dimension " + std::to_string(u.size()) +
                                  ", expected " + std::to_string(n));
  }

  SpatialLayout layout_;
  std::size_t fine_n_;
  std::size_t coarse_n_;
  int p_;
  std::vector<Stencil> stencils_;
};

/// Lagrange evaluation between fine (M_h) and coarse (M_H) node sets.
class TemporalTransfer {
 public:
  TemporalTransfer(std::vector<double> fine_nodes, std::vector<double> coarse_nodes)
      : fine_(std::move(fine_nodes)), coarse_(std::move(coarse_nodes)) {
    require_increasing_nodes(fine_, "TemporalTransfer(fine)");
    require_increasing_nodes(coarse_, "TemporalTransfer(coarse)");
    if (coarse_.size() > fine_.size())
      throw std::invalid_argument("TemporalTransfer: coarse level has more nodes than fine");
    interp_ = lagrange_matrix(coarse_, fine_);
    restr_ = lagrange_matrix(fine_, coarse_);
  }

  const Eigen::MatrixXd& interpolation() const noexcept { return interp_; }
  const Eigen::MatrixXd& restriction() const noexcept { return restr_; }
  std::size_t fine_nodes() const noexcept { return fine_.size(); }
  std::size_t coarse_nodes() const noexcept { return coarse_.size(); }

 private:
  std::vector<double> fine_;
  std::vector<double> coarse_;
  Eigen::MatrixXd interp_;
  Eigen::MatrixXd restr_;
};

}  // namespace mlsdc
