// MLSDC with coarsening in the collocation nodes (8 -> 6) on Auzinger's ODE,
// integrated to t = 1 with a few iterations per step.

#include "mlsdc/mlsdc.hpp"
#include "mlsdc/problems.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

int main() {
  using namespace mlsdc;
  auto problem = std::make_shared<Auzinger>(-0.75, 3.0);
  SweepConfig cfg;
  cfg.node_solve_tol = 1e-14;
  const auto hier = LevelHierarchy::build(problem, problem, 8, 6, 6, cfg);

  for (int steps : {8, 16, 32}) {
    const double dt = 1.0 / steps;
    std::printf("dt = 1/%d:", steps);
    for (int k = 1; k <= 3; ++k) {
      State u = problem->initial_value();
      for (int n = 0; n < steps; ++n) {
        NodeVector U = NodeVector::spread(u, 8);
        for (int j = 0; j < k; ++j) U = mlsdc_iteration(hier, U, u, dt);
        u = U.last();
      }
      std::printf("  k=%d err=%.2e", k, (u - *problem->exact_solution(1.0)).lpNorm<Eigen::Infinity>());
    }
    std::printf("\n");
  }
  return 0;
}
