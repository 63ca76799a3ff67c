#pragma once

#include <vector>

namespace gedkit {

struct AssignmentResult {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Optimal solutions to the square linear assignment problem (row-major cost
// matrix, n x n). Both solvers return the same objective value; the Hungarian
// one runs Kuhn-Munkres with potentials, the other the Jonker-Volgenant
// shortest augmenting path scheme.
AssignmentResult solve_assignment_hungarian(const std::vector<double>& cost, int n);
AssignmentResult solve_assignment_jv(const std::vector<double>& cost, int n);

}  // namespace gedkit
