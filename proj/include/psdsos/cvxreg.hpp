#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psdsos/report.hpp"
#include "psdsos/sosmodel.hpp"

namespace psdsos {

/// Inputs x_i in R^p (rows) with scalar outputs y_i.
struct ScalarDataset {
  Mat inputs;
  Vec y;

  Eigen::Index n() const { return inputs.rows(); }
  Eigen::Index input_dim() const { return inputs.cols(); }

  ScalarDataset subset(const std::vector<Eigen::Index>& rows) const;
};

void validate(const ScalarDataset& data);

enum class Representation { approximate, exact };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view name);

/// Fitted convex regressor.
///
/// approximate: f(x) = sum_i alpha_i k(x, x_i)
/// exact:       f(x) = sum_i (alpha_i + delta_i) k(x, x_i)
///                     + 1/(2 rho) sum_j sum_pq Gamma_j[p,q] d^2 k(x, v_j) / dv_p dv_q
///
/// `certificate` is the SoS model over the constraint grid (d = p) whose
/// values match the Hessian of f at the grid points.
struct ConvexModel {
  Representation representation = Representation::approximate;
  KernelSpec kernel;
  Mat anchors;  ///< training inputs
  Vec alpha;
  Vec delta;    ///< exact only, empty otherwise
  Mat grid;     ///< constraint points v_j
  Vec gamma;    ///< exact only: p x p blocks, one per grid point
  double rho = 0.0;
  SosModel certificate;
  std::map<std::string, double> hyperparameters;

  Eigen::Index input_dim() const { return anchors.cols(); }
};

double predict_point(const ConvexModel& model, const Eigen::Ref<const Vec>& x);
Vec predict_scalar(const ConvexModel& model, const Mat& queries);

/// Hessian of the fitted function at x.
Mat hessian_at(const ConvexModel& model, const Eigen::Ref<const Vec>& x);

/// Hessian of f(x) = sum_i alpha_i k(x, x_i) at v. Gaussian family only.
Mat hessian_of_expansion(const KernelSpec& kernel, const Vec& alpha, const Mat& anchors,
                         const Eigen::Ref<const Vec>& v);

enum class LandmarkRule { first, uniform_random };

struct NystromSpec {
  int rank = 0;  ///< 0 disables compression
  LandmarkRule rule = LandmarkRule::uniform_random;
  std::uint64_t seed = 0;
};

/// Gram factor over r landmarks picked from the grid (d = p). With r = 0
/// every grid point is a landmark.
GramFactorization nystrom_features(const KernelSpec& kernel, const Mat& grid, const NystromSpec& spec);

struct ConvexFitParams {
  double rho = 1e-3;
  double lambda1 = 0.0;
  double lambda2 = 1e-3;
};

struct ConvexFit {
  ConvexModel model;
  SolveReport report;
};

/// Approximate representation: least squares plus rho |f|^2 over
/// f = sum alpha_i k(., x_i), with H_f(v_j) = Psi_j^T B Psi_j at every grid
/// point. Solved on the dual with accelerated gradient and backtracking.
/// An empty grid means the training inputs.
ConvexFit fit_approx(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                     const ConvexFitParams& params, const NystromSpec& nystrom = {},
                     const SolverOptions& opts = {});

/// Exact representation, where f may also use the derivative sections
/// d^2 k(., v_j). Gamma = 0 gives kernel ridge regression.
ConvexFit fit_exact(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                    const ConvexFitParams& params, const SolverOptions& opts = {});

/// Mean squared error plus rho |f|_H^2 plus Omega(B), evaluated for a fitted model.
double convex_primal_objective(const ConvexModel& model, const ScalarDataset& data);

/// Smooth dual of the approximate problem in minimization form. Exposed for
/// gradient checks; `fit_approx` uses it internally.
///
/// Coordinates beta = R alpha (R the training Gram factor) keep the problem
/// well conditioned:
///   G(Gamma) = z^T M^{-1} z + 1/(2 lambda2) |[S(Gamma)]_-|^2,
///   M = W W^T / n + rho I,  z = W y / n + 1/2 sum_j,pq Gamma_j[p,q] E_j,pq,
/// and the dual value is |y|^2/n - G. The gradient block j is the constraint
/// residual H_f(v_j) - Psi_j^T B Psi_j at beta = M^{-1} z, B = [S]_- / lambda2.
class ApproxConvexDual {
 public:
  ApproxConvexDual(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                   const ConvexFitParams& params, const NystromSpec& nystrom = {});

  double value(const Vec& gamma, Vec* grad) const;
  Vec beta(const Vec& gamma) const;
  Mat recover_B(const Vec& gamma) const;
  Vec alpha(const Vec& beta) const;

  Eigen::Index dim() const { return ell_ * p_ * p_; }
  double lipschitz() const { return lipschitz_; }
  double constant() const { return y_norm2_ / static_cast<double>(n_); }

  const GramFactorization& training_factor() const { return train_; }
  const GramFactorization& grid_factor() const { return grid_; }

 private:
  Eigen::Index n_;
  Eigen::Index ell_;
  int p_;
  ConvexFitParams params_;
  GramFactorization train_;
  GramFactorization grid_;
  Mat E_;    // n x (ell p p)
  Mat Wg_;   // grid features, r x ell
  Vec wy_;   // W y / n
  Eigen::LLT<Mat> M_;
  double y_norm2_;
  double lipschitz_;
};

/// Smooth dual of the exact problem. The minimizer over f of the Lagrangian
/// is f = sum c_i k(., x_i) + 1/(2 rho) sum Gamma_j[p,q] d^2 k(., v_j) with
/// c = Q (y - g / (2 rho)) / n, Q = (K/n + rho I)^{-1}, g = D Gamma.
class ExactConvexDual {
 public:
  ExactConvexDual(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                  const ConvexFitParams& params);

  double value(const Vec& gamma, Vec* grad) const;
  Vec coefficients(const Vec& gamma) const;  ///< c
  Vec ridge_coefficients() const;             ///< Q y / n
  Mat recover_B(const Vec& gamma) const;

  Eigen::Index dim() const { return ell_ * p_ * p_; }
  double lipschitz() const { return lipschitz_; }
  const GramFactorization& grid_factor() const { return grid_; }

 private:
  Eigen::Index n_;
  Eigen::Index ell_;
  int p_;
  ConvexFitParams params_;
  Vec y_;
  Mat K_;
  Mat D_;   // n x (ell p p), D[i, jpq] = d^2 k(x_i, v_j)/dv_p dv_q
  Mat K4_;  // (ell p p) x (ell p p)
  Eigen::LLT<Mat> Q_;  // factor of K/n + rho I
  GramFactorization grid_;
  Mat Wg_;
  double lipschitz_;
};

std::string serialize(const ConvexModel& model);
ConvexModel deserialize_convex(const std::string& text);
void save_convex_model(const ConvexModel& model, const std::string& path);
ConvexModel load_convex_model(const std::string& path);

}  // namespace psdsos
