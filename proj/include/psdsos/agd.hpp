#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace psdsos {

using Vec = Eigen::VectorXd;

/// Smooth objective. Must return f(x); when `grad` is non-null it also
/// writes the gradient there. Value-only calls may take a cheaper path.
using SmoothObjective = std::function<double(const Vec& x, Vec* grad)>;

struct AgdOptions {
  double tol = 1e-10;
  int max_iters = 50000;
  /// Number of iterations over which the best objective must stall
  /// (relative change below tol) to declare convergence. The strongly convex
  /// scheme widens it to at least 10 sqrt(L/mu).
  int stall_window = 100;
};

struct AgdResult {
  Vec x;                      ///< best point found
  double value = 0.0;         ///< objective at x
  Vec grad;                   ///< gradient at x
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< best-so-far objective after each iteration
};

/// Nesterov's constant-momentum scheme for a mu-strongly convex, L-smooth
/// objective: step 1/L, momentum (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu)).
/// Stops when |grad| <= tol (1 + |f|) or the best value stalls.
AgdResult minimize_strongly_convex(const SmoothObjective& f, Vec x0, double lipschitz, double mu,
                                   const AgdOptions& opts);

/// Accelerated gradient with backtracking (the step is halved until the
/// sufficient-decrease test passes) and function-value restart, for smooth
/// convex objectives without a known strong-convexity constant.
/// `lipschitz0` is the initial curvature guess; it may grow or shrink.
AgdResult minimize_backtracking(const SmoothObjective& f, Vec x0, double lipschitz0, const AgdOptions& opts);

}  // namespace psdsos
