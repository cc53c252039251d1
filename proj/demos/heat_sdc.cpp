// SDC on the 1D heat equation: error against the collocation solution and
// the exact discrete solution after each sweep, for one time step.

#include "mlsdc/collocation.hpp"
#include "mlsdc/diagnostics.hpp"
#include "mlsdc/problems.hpp"
#include "mlsdc/sweeper.hpp"

#include <cstdio>

int main() {
  using namespace mlsdc;
  const Heat1D heat(63, 0.1, 4);
  const double dt = 0.01;
  const auto tables = QuadratureTables::gauss_radau_right(5);
  const State u0 = heat.initial_value();

  const NodeVector U_coll = solve_collocation(heat, tables, dt, u0, 1e-12);
  const State exact = *heat.exact_solution(dt);

  SweepConfig cfg;
  const auto iterates = run_sdc(heat, tables, dt, u0, cfg, NodeVector::spread(u0, 5), 6);
  std::printf(" k   |U - U_coll|   |u_M - u(dt)|\n");
  for (std::size_t k = 0; k < iterates.size(); ++k)
    std::printf("%2zu   %.3e      %.3e\n", k, error_inf(iterates[k], U_coll),
                last_node_error(iterates[k], exact));
  return 0;
}
