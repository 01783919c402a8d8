#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "psdsos/cvxreg.hpp"

namespace psdsos {

/// max over probes of the distance to the nearest sample.
double fill_distance(const Mat& samples, const Mat& probes);

/// Regular grid with `per_axis` points per coordinate over the box [lo, hi].
Mat box_probes(const Vec& lo, const Vec& hi, int per_axis);

/// 3 p^m / m! * max(1, 18 (m-1)^2)^m.
double c0_constant(int m, int p);

enum class ConstantSource { user, sobolev };

struct SmoothnessConstants {
  int m = 1;
  double M = 1.0;    ///< algebra constant, |uv| <= M |u| |v|
  double D_m = 1.0;  ///< sup |d^a_x d^a_y k| <= D_m^2 over |a| = m
  ConstantSource source = ConstantSource::user;
};

/// Constants of the Sobolev space of order s on R^p. Requires s > p/2 + m.
SmoothnessConstants sobolev_constants(double s, int p, int m);

/// D_m for the Gaussian kernel exp(-|x-y|^2/sigma^2): the mixed derivative
/// peaks on the diagonal at (2m)!/m! sigma^{-2m}. Clamped below at 1.
double gaussian_derivative_bound(int m, double sigma);

struct EigenBound {
  double C0 = 0.0;
  double C = 0.0;
  double epsilon = 0.0;
  bool valid = false;  ///< h <= r min(1, 1/(18 (m-1)^2))
};

/// epsilon = C0 (seminorms + M D_m trB) h^m for inputs of dimension p, with
/// validity checked against the domain radius r.
EigenBound eigen_bound(double seminorm_sum, double trace_B, const SmoothnessConstants& c, int p, double h,
                       double radius);

using MatrixFunction = std::function<Mat(const Vec&)>;

/// Estimate of sum_i |F_ii|_{X,m}: the largest order-m central difference of
/// each diagonal entry over the probes, summed over i. This is an estimate,
/// not a bound.
double seminorm_estimate(const MatrixFunction& F, int m, const Mat& probes, double step);

/// min over probes of lambda_min(F(x)).
double empirical_min_eig(const MatrixFunction& F, const Mat& probes);

struct CertificateReport {
  double h = 0.0;
  Eigen::Index probe_count = 0;
  int m = 1;
  double C0 = 0.0;
  double seminorm_estimate = 0.0;  ///< finite-difference estimate
  double trace_B = 0.0;  ///< lambda_max(B) instead when lambda_max_form is set
  bool lambda_max_form = false;
  double C = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;  ///< convexity deficit, equal to epsilon for Hessian certificates
  bool valid = false;
};

/// Convexity deficit of a fitted convex model: f + eta/2 |x|^2 is convex on
/// the probed domain when the bound is valid. `probes` describe the domain;
/// the samples are the model's constraint grid. `lambda_max_form` swaps tr B
/// for the tighter lambda_max(B).
CertificateReport convexity_deficit(const ConvexModel& model, const SmoothnessConstants& c, const Mat& probes,
                                    double radius, double fd_step = 1e-3, bool lambda_max_form = false);

std::string to_json(const CertificateReport& report);

}  // namespace psdsos
