#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "psdsos/kernels.hpp"

namespace psdsos {

/// Anchors, their Gram matrix and its upper Cholesky factor.
///
/// Features live in R^n: w(x) = R^{-T} v(x) with v(x)_i = k(x, x_i). The
/// matrix-valued feature of the model is Psi(x) = w(x) (x) I_d; it is never
/// materialized by the solvers.
struct GramFactorization {
  KernelSpec kernel;
  Mat anchors;  ///< n x p, one anchor per row
  int d = 1;    ///< output matrix size
  Mat K;
  Mat R;
  double jitter = 0.0;

  Eigen::Index n() const { return anchors.rows(); }
  Eigen::Index input_dim() const { return anchors.cols(); }
};

GramFactorization build_features(const KernelSpec& kernel, const Mat& anchors, int d);

/// Psi(x) = w (x) I_d, stored through its scalar part w.
struct FeatureBlock {
  Vec w;
  int d = 1;

  Mat dense() const;  ///< the nd x d matrix
};

FeatureBlock features_at(const GramFactorization& f, const Eigen::Ref<const Vec>& x);

/// Scalar features for every row of `points`, as columns of an n x m matrix.
Mat feature_matrix(const GramFactorization& f, const Mat& points);

/// Kernel SoS model F_B(x) = Psi(x)^T B Psi(x) with B PSD of size nd x nd.
struct SosModel {
  GramFactorization factor;
  Mat B;
  std::map<std::string, double> hyperparameters;
};

/// Validates B's shape and symmetry, and that lambda_min(B) >= -1e-8 lambda_max(B).
void validate(const SosModel& model);

Mat evaluate(const SosModel& model, const Eigen::Ref<const Vec>& x);

/// C = R~^{-1} B R~^{-T}, the coefficients over the kernel sections k(., x_i) I_d.
Mat coefficient_matrix(const SosModel& model);

struct RegularizerSpec {
  double lambda1 = 0.0;  ///< trace weight
  double lambda2 = 0.0;  ///< squared Frobenius weight

  RegularizerSpec() = default;
  RegularizerSpec(double l1, double l2);
};

/// lambda1 tr(B) + lambda2/2 |B|_F^2.
double omega(const RegularizerSpec& reg, const Mat& B);

// Kronecker block helpers shared by the dual solvers. A "block vector" holds
// m symmetric d x d matrices stored column-major, block i at offset i*d*d.

/// View of block i of a block vector.
inline Eigen::Map<Mat> block_of(Vec& blocks, Eigen::Index i, int d) {
  return Eigen::Map<Mat>(blocks.data() + i * d * d, d, d);
}
inline Eigen::Map<const Mat> block_of(const Vec& blocks, Eigen::Index i, int d) {
  return Eigen::Map<const Mat>(blocks.data() + i * d * d, d, d);
}

/// S = sum_i Psi_i Gamma_i Psi_i^T + shift * I with Psi_i = W.col(i) (x) I_d.
/// W is r x m; the result is rd x rd and exactly symmetric.
Mat assemble_blocks(const Mat& W, const Vec& gamma, int d, double shift);

/// out_i = Psi_i^T N Psi_i for each column of W, returned as a block vector.
/// N must be symmetric; the output blocks are exactly symmetric.
Vec contract_blocks(const Mat& W, const Mat& N, int d);

/// F = (w (x) I_d)^T B (w (x) I_d) as a d x d contraction of B's block grid.
Mat contract_one(const Vec& w, const Mat& B, int d);

// Model files: a JSON document, see README for the key names.
std::string serialize(const SosModel& model);
SosModel deserialize(const std::string& text);
void save_model(const SosModel& model, const std::string& path);
SosModel load_model(const std::string& path);

}  // namespace psdsos
