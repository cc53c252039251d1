#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc {

using State = Eigen::VectorXd;
using StateRef = Eigen::Ref<const Eigen::VectorXd>;

/// Values at all M collocation nodes stacked into one vector of length M*N.
/// Block m is the state at node tau_m.
class NodeVector {
 public:
  NodeVector() = default;
  NodeVector(std::size_t num_nodes, std::size_t dim, double value = 0.0)
      : num_nodes_(num_nodes), dim_(dim), data_(num_nodes * dim, value) {}

  static NodeVector spread(const StateRef& u, std::size_t num_nodes) {
    NodeVector out(num_nodes, static_cast<std::size_t>(u.size()));
    for (std::size_t m = 0; m < num_nodes; ++m) out.node(m) = u;
    return out;
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  Eigen::Map<Eigen::VectorXd> node(std::size_t m) {
    return {data_.data() + m * dim_, static_cast<Eigen::Index>(dim_)};
  }
  Eigen::Map<const Eigen::VectorXd> node(std::size_t m) const {
    return {data_.data() + m * dim_, static_cast<Eigen::Index>(dim_)};
  }
  Eigen::Map<const Eigen::VectorXd> last() const { return node(num_nodes_ - 1); }

  Eigen::Map<Eigen::VectorXd> flat() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool same_shape(const NodeVector& other) const noexcept {
    return num_nodes_ == other.num_nodes_ && dim_ == other.dim_;
  }

  NodeVector& operator+=(const NodeVector& rhs) {
    require_same_shape(*this, rhs, "operator+=");
    flat() += rhs.flat();
    return *this;
  }
  NodeVector& operator-=(const NodeVector& rhs) {
    require_same_shape(*this, rhs, "operator-=");
    flat() -= rhs.flat();
    return *this;
  }
  NodeVector& operator*=(double s) {
    flat() *= s;
    return *this;
  }

  friend NodeVector operator+(NodeVector lhs, const NodeVector& rhs) { return lhs += rhs; }
  friend NodeVector operator-(NodeVector lhs, const NodeVector& rhs) { return lhs -= rhs; }
  friend NodeVector operator*(double s, NodeVector v) { return v *= s; }

  friend bool operator==(const NodeVector& a, const NodeVector& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

  static void require_same_shape(const NodeVector& a, const NodeVector& b,
                                 const char* where) {
    if (!a.same_shape(b)) {
      throw std::invalid_argument(std::string(where) + ": node vector shape mismatch (" +
                                  std::to_string(a.num_nodes_) + "x" +
                                  std::to_string(a.dim_) + " vs " +
                                  std::to_string(b.num_nodes_) + "x" +
                                  std::to_string(b.dim_) + ")");
    }
  }

 private:
  std::size_t num_nodes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace mlsdc
