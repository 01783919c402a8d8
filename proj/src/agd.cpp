#include "psdsos/agd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psdsos/errors.hpp"

namespace psdsos {

namespace {

struct Tracker {
  const AgdOptions& opts;
  AgdResult& res;
  int window;

  // Records an evaluated point; returns true when a stopping rule fires.
  bool record(const Vec& x, double value, const Vec& grad) {
    if (!std::isfinite(value)) throw Error("objective became non-finite");
    if (res.trace.empty() || value < res.value) {
      res.x = x;
      res.value = value;
      res.grad = grad;
    }
    res.trace.push_back(res.value);
    const double scale = 1.0 + std::abs(res.value);
    if (grad.norm() <= opts.tol * scale) return true;
    const auto k = res.trace.size();
    const auto w = static_cast<std::size_t>(window);
    if (k > w) {
      const double drop = res.trace[k - 1 - w] - res.trace[k - 1];
      if (drop <= opts.tol * scale) return true;
    }
    return false;
  }
};

}  // namespace

AgdResult minimize_strongly_convex(const SmoothObjective& f, Vec x0, double lipschitz, double mu,
                                   const AgdOptions& opts) {
  if (!(lipschitz > 0.0) || !(mu > 0.0) || mu > lipschitz) throw InvalidArgument("need 0 < mu <= L");
  AgdResult res;
  // the constant-momentum iterates oscillate with a period of order sqrt(L/mu)
  const int window = std::max(opts.stall_window, static_cast<int>(std::ceil(10.0 * std::sqrt(lipschitz / mu))));
  Tracker tracker{opts, res, window};
  const double momentum = (std::sqrt(lipschitz) - std::sqrt(mu)) / (std::sqrt(lipschitz) + std::sqrt(mu));
  Vec x = std::move(x0);
  Vec y = x;
  Vec g(x.size());
  Vec x_next(x.size());
  for (int it = 0; it < opts.max_iters; ++it) {
    const double fy = f(y, &g);
    res.iterations = it + 1;
    if (tracker.record(y, fy, g)) {
      res.converged = true;
      break;
    }
    x_next = y - g / lipschitz;
    y = x_next + momentum * (x_next - x);
    x.swap(x_next);
  }
  return res;
}

AgdResult minimize_backtracking(const SmoothObjective& f, Vec x0, double lipschitz0, const AgdOptions& opts) {
  if (!(lipschitz0 > 0.0)) throw InvalidArgument("initial curvature must be positive");
  constexpr double kShrink = 0.9;
  constexpr double kRoundoff = 1e-14;
  AgdResult res;
  Tracker tracker{opts, res, opts.stall_window};
  double L = lipschitz0;
  Vec x = std::move(x0);
  Vec y = x;
  Vec g(x.size());
  Vec x_next(x.size());
  double t = 1.0;
  double fx = f(x, nullptr);
  for (int it = 0; it < opts.max_iters; ++it) {
    const double fy = f(y, &g);
    res.iterations = it + 1;
    if (tracker.record(y, fy, g)) {
      res.converged = true;
      break;
    }
    const double g2 = g.squaredNorm();
    double f_next = 0.0;
    for (int halvings = 0;; ++halvings) {
      x_next = y - g / L;
      f_next = f(x_next, nullptr);
      if (f_next <= fy - 0.5 * g2 / L + kRoundoff * (1.0 + std::abs(fy))) break;
      if (halvings > 60) throw Error("line search failed to find a decreasing step");
      L *= 2.0;
    }
    if (f_next > fx) {
      // momentum overshot: restart from x without it
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x.swap(x_next);
    fx = f_next;
    t = t_next;
    L *= kShrink;
  }
  return res;
}

}  // namespace psdsos
