#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psdsos/report.hpp"
#include "psdsos/sosmodel.hpp"

namespace psdsos {

/// Inputs x_i in R^p (rows) with symmetric d x d targets M_i.
struct PsdDataset {
  Mat inputs;
  std::vector<Mat> targets;

  Eigen::Index n() const { return inputs.rows(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
  int d() const { return targets.empty() ? 0 : static_cast<int>(targets.front().rows()); }

  PsdDataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Throws on empty data, inconsistent shapes, or targets asymmetric beyond 1e-9
/// (the message names the offending row, 1-based).
void validate(const PsdDataset& data);

/// (1/2n) sum |F_B(x_i) - M_i|_F^2 + lambda1 tr B + lambda2/2 |B|_F^2.
double primal_objective(const GramFactorization& features, const Mat& B, const PsdDataset& data,
                        const RegularizerSpec& reg);

/// The dual of PSD least squares in minimization form,
///
///   G(Gamma) = n/2 sum |Gamma_i|^2 + sum <Gamma_i, M_i> + 1/(2 lambda2) |[S(Gamma)]_-|^2,
///   S(Gamma) = sum_i Psi_i Gamma_i Psi_i^T + lambda1 I,
///
/// so that the primal optimum equals -min G. The gradient block i is
/// n Gamma_i + M_i - (1/lambda2) Psi_i^T [S]_- Psi_i, and the primal solution is
/// B = (1/lambda2) [S(Gamma)]_-.
class PsdRegressionDual {
 public:
  PsdRegressionDual(const PsdDataset& data, const GramFactorization& features, const RegularizerSpec& reg);

  /// Objective at a block vector of n symmetric d x d matrices; fills grad when non-null.
  double value(const Vec& gamma, Vec* grad) const;

  Mat recover_B(const Vec& gamma) const;

  /// Smoothness constant n + lambda_max(G o G) / lambda2, G the feature Gram matrix.
  double lipschitz() const { return lipschitz_; }
  double strong_convexity() const { return static_cast<double>(n_); }
  Eigen::Index dim() const { return n_ * d_ * d_; }

 private:
  Eigen::Index n_;
  int d_;
  RegularizerSpec reg_;
  Mat W_;          // n x n features of the training inputs
  Vec targets_;    // block vector of the M_i
  double lipschitz_;
};

/// Convenience wrapper returning the objective and gradient blocks.
std::pair<double, std::vector<Mat>> dual_objective_grad(const std::vector<Mat>& gamma, const PsdDataset& data,
                                                        const GramFactorization& features,
                                                        const RegularizerSpec& reg);

struct PsdFit {
  SosModel model;
  SolveReport report;
  Vec gamma;  ///< optimal dual block vector
};

/// Fits a PSD-valued kernel SoS model by accelerated gradient on the dual,
/// step 1/L with L = n + lambda_max(K o K)/lambda2 and strong convexity mu = n.
/// Requires lambda2 > 0.
PsdFit solve_dual(const PsdDataset& data, const KernelSpec& kernel, const RegularizerSpec& reg,
                  const SolverOptions& opts = {});

std::vector<Mat> predict(const SosModel& model, const Mat& queries);

}  // namespace psdsos
