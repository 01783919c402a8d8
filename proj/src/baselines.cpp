#include "psdsos/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psdsos/errors.hpp"

namespace psdsos {

KrrModel krr_fit(const ScalarDataset& data, const KernelSpec& kernel, double rho) {
  validate(data);
  if (!(rho > 0.0)) throw InvalidArgument("kernel ridge regression needs rho > 0");
  Mat A = gram(kernel, data.inputs);
  A.diagonal().array() += static_cast<double>(data.n()) * rho;
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw IndefiniteError("K + n rho I is not positive definite");
  KrrModel m;
  m.kernel = kernel;
  m.anchors = data.inputs;
  m.alpha = llt.solve(data.y);
  m.rho = rho;
  return m;
}

Vec krr_predict(const KrrModel& model, const Mat& queries) {
  if (queries.cols() != model.anchors.cols()) throw DimensionError("krr_predict: query dimension mismatch");
  return cross_gram(model.kernel, queries, model.anchors) * model.alpha;
}

namespace {

// Constraint rows for the ordered pairs (i, j), i != j, over u = (theta, zeta).
Mat pwl_constraints(const Mat& X) {
  const auto n = X.rows();
  const auto p = X.cols();
  Mat A = Mat::Zero(n * (n - 1), n * (1 + p));
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      A(row, i) = 1.0;
      A(row, j) = -1.0;
      A.block(row, n + i * p, 1, p) = X.row(j) - X.row(i);
      ++row;
    }
  }
  return A;
}

}  // namespace

PwlFit pwl_fit(const ScalarDataset& data, const PwlOptions& opts) {
  validate(data);
  const auto n = data.n();
  const auto p = data.input_dim();
  const double nn = static_cast<double>(n);
  PwlFit fit;
  fit.model.anchors = data.inputs;
  if (n == 1) {
    fit.model.theta = data.y;
    fit.model.zeta = Mat::Zero(1, p);
    fit.converged = true;
    return fit;
  }

  const Mat A = pwl_constraints(data.inputs);
  const auto nv = A.cols();
  const auto m = A.rows();
  Vec Pdiag = Vec::Zero(nv);
  Pdiag.head(n).setConstant(2.0 / nn);
  Vec q = Vec::Zero(nv);
  q.head(n) = -2.0 * data.y / nn;

  constexpr double kSigma = 1e-6;
  constexpr double kAlpha = 1.6;
  double rho = 0.1;
  const Mat AtA = A.transpose() * A;
  Eigen::LDLT<Mat> kkt;
  auto factor = [&] {
    Mat H = rho * AtA;
    H.diagonal() += Pdiag + Vec::Constant(nv, kSigma);
    kkt.compute(H);
  };
  factor();

  Vec x = Vec::Zero(nv);
  Vec z = Vec::Zero(m);
  Vec y = Vec::Zero(m);
  Vec Ax(m);
  for (int it = 1; it <= opts.max_iters; ++it) {
    const Vec xt = kkt.solve(kSigma * x - q + A.transpose() * (rho * z - y));
    const Vec zt = A * xt;
    x = kAlpha * xt + (1.0 - kAlpha) * x;
    const Vec zr = kAlpha * zt + (1.0 - kAlpha) * z;
    const Vec z_next = (zr + y / rho).cwiseMin(0.0);
    y += rho * (zr - z_next);
    z = z_next;
    fit.iterations = it;

    if (it % 10 != 0) continue;
    Ax = A * x;
    const Vec Aty = A.transpose() * y;
    const Vec Px = Pdiag.cwiseProduct(x);
    const double r_prim = (Ax - z).lpNorm<Eigen::Infinity>();
    const double r_dual = (Px + q + Aty).lpNorm<Eigen::Infinity>();
    const double s_prim = std::max(Ax.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>());
    const double s_dual =
        std::max({Px.lpNorm<Eigen::Infinity>(), Aty.lpNorm<Eigen::Infinity>(), q.lpNorm<Eigen::Infinity>()});
    if (r_prim <= opts.tol * (1.0 + s_prim) && r_dual <= opts.tol * (1.0 + s_dual)) {
      fit.converged = true;
      break;
    }
    if (it % 50 == 0) {
      const double ratio = std::sqrt((r_prim / std::max(s_prim, 1e-30)) / std::max(r_dual / std::max(s_dual, 1e-30), 1e-30));
      const double next = std::clamp(rho * ratio, 1e-6, 1e6);
      if (next > 5.0 * rho || next < 0.2 * rho) {
        rho = next;
        factor();
      }
    }
  }

  fit.model.theta = x.head(n);
  fit.model.zeta = Eigen::Map<const Mat>(x.data() + n, p, n).transpose();
  fit.objective = (data.y - fit.model.theta).squaredNorm() / nn;
  fit.max_violation = (A * x).maxCoeff();
  return fit;
}

double pwl_predict_point(const PwlModel& model, const Eigen::Ref<const Vec>& x) {
  if (x.size() != model.anchors.cols()) throw DimensionError("pwl_predict: query dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    best = std::max(best, model.theta[i] + model.zeta.row(i).dot(x - model.anchors.row(i).transpose()));
  }
  return best;
}

Vec pwl_predict(const PwlModel& model, const Mat& queries) {
  Vec out(queries.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out[i] = pwl_predict_point(model, queries.row(i).transpose());
  return out;
}

}  // namespace psdsos
