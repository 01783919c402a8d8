#include "psdsos/psdreg.hpp"

#include <chrono>
#include <cmath>

#include "psdsos/agd.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"

namespace psdsos {

PsdDataset PsdDataset::subset(const std::vector<Eigen::Index>& rows) const {
  PsdDataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(rows[i]);
    out.targets.push_back(targets.at(static_cast<std::size_t>(rows[i])));
  }
  return out;
}

void validate(const PsdDataset& data) {
  if (data.n() == 0) throw InvalidArgument("PSD dataset is empty");
  if (data.input_dim() == 0) throw InvalidArgument("PSD dataset has zero input dimension");
  if (static_cast<Eigen::Index>(data.targets.size()) != data.n()) {
    throw DimensionError("PSD dataset has " + std::to_string(data.n()) + " inputs but " +
                         std::to_string(data.targets.size()) + " targets");
  }
  const int d = data.d();
  if (d < 1) throw InvalidArgument("PSD targets must be at least 1x1");
  for (std::size_t i = 0; i < data.targets.size(); ++i) {
    const Mat& M = data.targets[i];
    if (M.rows() != d || M.cols() != d) throw DimensionError("target in row " + std::to_string(i + 1) + " is not " +
                                                             std::to_string(d) + "x" + std::to_string(d));
    if (!M.allFinite()) throw InvalidArgument("target in row " + std::to_string(i + 1) + " is not finite");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw InvalidArgument("target in row " + std::to_string(i + 1) + " is not symmetric");
    }
  }
  if (!data.inputs.allFinite()) throw InvalidArgument("PSD dataset inputs are not finite");
}

double primal_objective(const GramFactorization& features, const Mat& B, const PsdDataset& data,
                        const RegularizerSpec& reg) {
  const int d = data.d();
  if (B.rows() != features.n() * d || B.cols() != B.rows()) throw DimensionError("primal_objective: B shape");
  const Mat W = feature_matrix(features, data.inputs);
  const Vec fitted = contract_blocks(W, B, d);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    loss += (block_of(fitted, i, d) - data.targets[static_cast<std::size_t>(i)]).squaredNorm();
  return loss / (2.0 * static_cast<double>(data.n())) + omega(reg, B);
}

PsdRegressionDual::PsdRegressionDual(const PsdDataset& data, const GramFactorization& features,
                                     const RegularizerSpec& reg)
    : n_(data.n()), d_(data.d()), reg_(reg) {
  validate(data);
  if (!(reg.lambda2 > 0.0)) throw InvalidArgument("the smooth dual requires lambda2 > 0");
  if (features.d != d_) throw DimensionError("feature output size does not match targets");
  W_ = feature_matrix(features, data.inputs);
  targets_.resize(n_ * d_ * d_);
  for (Eigen::Index i = 0; i < n_; ++i) block_of(targets_, i, d_) = data.targets[static_cast<std::size_t>(i)];
  const Mat G = W_.transpose() * W_;
  lipschitz_ = static_cast<double>(n_) + lambda_max(G.cwiseProduct(G)) / reg.lambda2;
}

double PsdRegressionDual::value(const Vec& gamma, Vec* grad) const {
  if (gamma.size() != dim()) throw DimensionError("dual variable has the wrong size");
  const Mat S = assemble_blocks(W_, gamma, d_, reg_.lambda1);
  const double nn = static_cast<double>(n_);
  double value = 0.5 * nn * gamma.squaredNorm() + gamma.dot(targets_);
  if (grad == nullptr) {
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    double neg2 = 0.0;
    for (double l : es.eigenvalues()) neg2 += l < 0.0 ? l * l : 0.0;
    return value + neg2 / (2.0 * reg_.lambda2);
  }
  const Mat N = negative_part_unchecked(S);
  value += N.squaredNorm() / (2.0 * reg_.lambda2);
  *grad = nn * gamma + targets_ - contract_blocks(W_, N, d_) / reg_.lambda2;
  return value;
}

Mat PsdRegressionDual::recover_B(const Vec& gamma) const {
  return negative_part_unchecked(assemble_blocks(W_, gamma, d_, reg_.lambda1)) / reg_.lambda2;
}

std::pair<double, std::vector<Mat>> dual_objective_grad(const std::vector<Mat>& gamma, const PsdDataset& data,
                                                        const GramFactorization& features,
                                                        const RegularizerSpec& reg) {
  const PsdRegressionDual dual(data, features, reg);
  const int d = data.d();
  if (static_cast<Eigen::Index>(gamma.size()) != data.n()) throw DimensionError("need one dual block per sample");
  Vec flat(dual.dim());
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma[i].rows() != d || gamma[i].cols() != d) throw DimensionError("dual block has the wrong shape");
    block_of(flat, static_cast<Eigen::Index>(i), d) = symmetrized(gamma[i]);
  }
  Vec g;
  const double value = dual.value(flat, &g);
  std::vector<Mat> blocks;
  for (Eigen::Index i = 0; i < data.n(); ++i) blocks.emplace_back(block_of(g, i, d));
  return {value, std::move(blocks)};
}

PsdFit solve_dual(const PsdDataset& data, const KernelSpec& kernel, const RegularizerSpec& reg,
                  const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  validate(data);
  PsdFit fit;
  fit.model.factor = build_features(kernel, data.inputs, data.d());
  const PsdRegressionDual dual(data, fit.model.factor, reg);
  AgdOptions agd;
  agd.tol = opts.tol;
  agd.max_iters = opts.max_iters;
  auto objective = [&dual](const Vec& x, Vec* g) { return dual.value(x, g); };
  AgdResult res =
      minimize_strongly_convex(objective, Vec::Zero(dual.dim()), dual.lipschitz(), dual.strong_convexity(), agd);
  fit.gamma = res.x;
  fit.model.B = dual.recover_B(res.x);
  fit.model.hyperparameters = {{"lambda1", reg.lambda1}, {"lambda2", reg.lambda2}, {"sigma", kernel.sigma}};

  SolveReport& rep = fit.report;
  rep.dual_objective = -res.value;
  rep.primal_objective = primal_objective(fit.model.factor, fit.model.B, data, reg);
  rep.gap = rep.primal_objective - rep.dual_objective;
  rep.iterations = res.iterations;
  rep.converged = res.converged;
  rep.trace = std::move(res.trace);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return fit;
}

std::vector<Mat> predict(const SosModel& model, const Mat& queries) {
  if (queries.cols() != model.factor.input_dim()) throw DimensionError("predict: query dimension mismatch");
  const int d = model.factor.d;
  const Mat W = feature_matrix(model.factor, queries);
  const Vec out = contract_blocks(W, model.B, d);
  std::vector<Mat> result;
  result.reserve(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) result.emplace_back(block_of(out, i, d));
  return result;
}

}  // namespace psdsos
