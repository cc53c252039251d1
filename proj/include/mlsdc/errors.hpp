#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlsdc {

/// Raised when an iterative solve (Newton, Krylov, collocation) does not reach
/// its tolerance. Carries the last residual norm and, where known, the
/// collocation node the failure happened at.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual,
                std::vector<double> history = {}, int node = -1)
      : std::runtime_error(what),
        residual_(residual),
        history_(std::move(history)),
        node_(node) {}

  double residual() const noexcept { return residual_; }
  const std::vector<double>& residual_history() const noexcept { return history_; }
  int node() const noexcept { return node_; }

  SolverFailure with_context(const std::string& context, int node = -1) const {
    return SolverFailure(context + ": " + what(), residual_, history_,
                         node >= 0 ? node : node_);
  }

 private:
  double residual_;
  std::vector<double> history_;
  int node_;
};

class FactorizationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The increment of an iteration grew by more than 10x for three sweeps in a row.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

class InsufficientData : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A reference solution could not be certified to the requested accuracy.
class AccuracyNotReached : public std::runtime_error {
 public:
  AccuracyNotReached(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace mlsdc
