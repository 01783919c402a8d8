#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "psdsos/cvxreg.hpp"
#include "psdsos/psdreg.hpp"

namespace psdsos {

/// Point at time t on the Bures-Wasserstein geodesic from S0 to S1,
///   S(t) = ((1-t) I + t T) S0 ((1-t) I + t T),
///   T = S0^{-1/2} (S0^{1/2} S1 S0^{1/2})^{1/2} S0^{-1/2}.
/// A singular S0 with a definite S1 runs the geodesic backwards from S1. Two
/// singular endpoints must commute; then S(t) = ((1-t) S0^{1/2} + t S1^{1/2})^2.
/// An endpoint is singular when lambda_min <= 1e-12 lambda_max.
Mat bures_geodesic(const Mat& S0, const Mat& S1, double t);

struct BuresSpec {
  Mat S0;
  Mat S1;
  int n = 12;
};

/// The default 2 x 2 endpoints used by the experiments.
BuresSpec default_bures_spec(int n = 12, bool rank_one = false);

/// Samples at t_i = i / (n - 1), i = 0..n-1, with scalar inputs t_i.
PsdDataset gen_bures(const BuresSpec& spec);

/// f_a(x) = (cos(a x) - 1) / a^2 + x^2 / 2, with f_a''(x) = 1 - cos(a x) >= 0.
double f_a(double a, double x);

struct ConvexRegSpec {
  double a = 1.0;      ///< oscillation
  double b = 2.0;      ///< inputs uniform in [-b, b]^p
  int p = 1;
  int n = 10;
  double noise = 0.1;  ///< standard deviation of the additive Gaussian noise
  std::uint64_t seed = 0;
};

/// Y_i = f_a(|X_i|) + noise * eps_i. Deterministic given the seed. For p > 1
/// the radial composition is convex here (f_a is even, convex and increasing
/// on [0, inf)), but the generator does not rely on it.
ScalarDataset gen_convex_samples(const ConvexRegSpec& spec);

/// Noise-free ground truth f_a(|x|) at each row.
Vec convex_ground_truth(const ConvexRegSpec& spec, const Mat& points);

}  // namespace psdsos
