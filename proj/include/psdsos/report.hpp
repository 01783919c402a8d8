#pragma once

#include <vector>

namespace psdsos {

/// Outcome of a first-order dual solve.
struct SolveReport {
  double dual_objective = 0.0;    ///< dual value (equals the primal optimum at convergence)
  double primal_objective = 0.0;  ///< primal objective at the recovered point
  double gap = 0.0;               ///< primal - dual
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  ///< seconds
  double max_constraint_residual = 0.0;  ///< convex regression only
  std::vector<double> trace;  ///< best-so-far minimized dual objective per iteration
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iters = 50000;
};

}  // namespace psdsos
