#pragma once

// Brute-force reference solvers for tiny problems.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace oracles {

using Fn3 = std::function<double(const std::array<double, 3>&)>;

// Dense grid over the box center +- radius, then repeated zooms: each round
// regrids a box a quarter the size around the best point so far.
inline std::pair<double, std::array<double, 3>> grid_zoom(const Fn3& f, std::array<double, 3> center, double radius,
                                                          int per_axis, int rounds) {
  std::array<double, 3> best = center;
  double fbest = std::numeric_limits<double>::infinity();
  for (int r = 0; r < rounds; ++r) {
    const double step = 2.0 * radius / (per_axis - 1);
    const std::array<double, 3> c = best;
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        for (int k = 0; k < per_axis; ++k) {
          const std::array<double, 3> x{c[0] - radius + i * step, c[1] - radius + j * step, c[2] - radius + k * step};
          const double v = f(x);
          if (v < fbest) {
            fbest = v;
            best = x;
          }
        }
    radius *= 0.25;
  }
  return {fbest, best};
}

// Least squares over max-affine fits in 1-D: theta is feasible when every
// point admits a slope zeta_i with theta_i + zeta_i (x_j - x_i) <= theta_j.
inline bool pwl_feasible_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      const double dx = x[j] - x[i];
      const double bound = (theta[j] - theta[i]) / dx;
      if (dx > 0)
        upper = std::min(upper, bound);
      else
        lower = std::max(lower, bound);
    }
    if (lower > upper) return false;
  }
  return true;
}

inline double pwl_brute_force_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lo, double hi,
                                 int per_axis, Eigen::VectorXd* arg = nullptr) {
  const double n = static_cast<double>(y.size());
  auto f = [&](const std::array<double, 3>& t) {
    Eigen::VectorXd theta(3);
    theta << t[0], t[1], t[2];
    if (!pwl_feasible_1d(x, theta)) return std::numeric_limits<double>::infinity();
    return (y - theta).squaredNorm() / n;
  };
  const double mid = 0.5 * (lo + hi);
  const auto [v, best] = grid_zoom(f, {mid, mid, mid}, 0.5 * (hi - lo), per_axis, 8);
  if (arg) {
    arg->resize(3);
    *arg << best[0], best[1], best[2];
  }
  return v;
}

}  // namespace oracles
