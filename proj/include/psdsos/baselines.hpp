#pragma once

#include <Eigen/Dense>

#include "psdsos/cvxreg.hpp"

namespace psdsos {

/// Kernel ridge regression, minimizing (1/n) sum (y_i - f(x_i))^2 + rho |f|^2.
struct KrrModel {
  KernelSpec kernel;
  Mat anchors;
  Vec alpha;
  double rho = 0.0;
};

/// alpha = (K + n rho I)^{-1} y. Requires rho > 0.
KrrModel krr_fit(const ScalarDataset& data, const KernelSpec& kernel, double rho);
Vec krr_predict(const KrrModel& model, const Mat& queries);

/// Max-affine convex function f(x) = max_i theta_i + zeta_i^T (x - x_i).
struct PwlModel {
  Mat anchors;
  Vec theta;
  Mat zeta;  ///< n x p, one subgradient per row
};

struct PwlOptions {
  double tol = 1e-9;
  int max_iters = 200000;
};

struct PwlFit {
  PwlModel model;
  double objective = 0.0;
  double max_violation = 0.0;  ///< max_ij theta_i + zeta_i^T (x_j - x_i) - theta_j
  int iterations = 0;
  bool converged = false;
};

/// Least-squares fit over max-affine functions: the QP
///   min (1/n) |y - theta|^2  s.t.  theta_i + zeta_i^T (x_j - x_i) <= theta_j,
/// solved with ADMM (operator splitting with over-relaxation and adaptive
/// penalty).
PwlFit pwl_fit(const ScalarDataset& data, const PwlOptions& opts = {});

double pwl_predict_point(const PwlModel& model, const Eigen::Ref<const Vec>& x);
Vec pwl_predict(const PwlModel& model, const Mat& queries);

}  // namespace psdsos
