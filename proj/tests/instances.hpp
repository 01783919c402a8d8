#pragma once

// Constructed instances shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "psdsos/certify.hpp"
#include "psdsos/psdlinalg.hpp"
#include "psdsos/sosmodel.hpp"

namespace instances {

using psdsos::Mat;
using psdsos::Vec;

// F = F_B + perturbation that vanishes at every sample, on [-1, 1].
// Samples are evenly spaced so the perturbation c sin^2(pi (x + 1) / spacing)
// is zero on them and pulls the diagonal down by c between them.
struct EigInstance {
  psdsos::SosModel base;
  Mat samples;
  Mat probes;
  double c = 0.0;
  double spacing = 0.0;
  int d = 2;

  Mat operator()(const Vec& x) const {
    const double s = std::sin(std::numbers::pi * (x[0] + 1.0) / spacing);
    return psdsos::evaluate(base, x) - c * s * s * Mat::Identity(d, d);
  }
};

inline EigInstance make_eig_instance(psdsos::Rng& rng, int samples, int d, double sigma, double c) {
  EigInstance inst;
  inst.d = d;
  inst.c = c;
  inst.samples.resize(samples, 1);
  inst.spacing = 2.0 / (samples - 1);
  for (int i = 0; i < samples; ++i) inst.samples(i, 0) = -1.0 + i * inst.spacing;
  inst.base.factor = psdsos::build_features(psdsos::KernelSpec(psdsos::KernelFamily::gaussian, sigma), inst.samples, d);
  inst.base.B = testing::random_psd(rng, samples * d, 2) / (samples * d);
  inst.probes = psdsos::box_probes(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), 2001);
  return inst;
}

struct EigCheck {
  double empirical = 0.0;
  psdsos::EigenBound bound;
};

inline EigCheck check_eig_instance(const EigInstance& inst) {
  psdsos::SmoothnessConstants k;
  k.m = 1;
  k.D_m = psdsos::gaussian_derivative_bound(1, inst.base.factor.kernel.sigma);
  const psdsos::MatrixFunction F = [&inst](const Vec& x) { return inst(x); };
  const double h = psdsos::fill_distance(inst.samples, inst.probes);
  const double semi = psdsos::seminorm_estimate(F, 1, inst.probes, 1e-4);
  EigCheck out;
  out.bound = psdsos::eigen_bound(semi, inst.base.B.trace(), k, 1, h, 1.0);
  out.empirical = psdsos::empirical_min_eig(F, inst.probes);
  return out;
}

}  // namespace instances
