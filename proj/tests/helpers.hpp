#pragma once

#include <cmath>
#include <functional>

#include <unsupported/Eigen/KroneckerProduct>

#include "psdsos/kernels.hpp"
#include "psdsos/rng.hpp"

namespace testing {

using psdsos::Mat;
using psdsos::Vec;

inline Mat random_matrix(psdsos::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Mat random_symmetric(psdsos::Rng& rng, Eigen::Index n) {
  const Mat a = random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

inline Mat random_psd(psdsos::Rng& rng, Eigen::Index n, Eigen::Index rank = -1) {
  const Mat a = random_matrix(rng, n, rank < 0 ? n : rank);
  return a * a.transpose();
}

inline Mat random_points(psdsos::Rng& rng, Eigen::Index n, Eigen::Index p, double lo = -1.0, double hi = 1.0) {
  Mat m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p; ++k) m(i, k) = rng.uniform(lo, hi);
  return m;
}

// Central differences of a scalar function of a vector.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double up = f(xp);
    xp[i] = x[i] - h;
    const double down = f(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace testing
