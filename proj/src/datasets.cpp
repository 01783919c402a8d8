#include "psdsos/datasets.hpp"

#include <cmath>
#include <numbers>

#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"
#include "psdsos/rng.hpp"

namespace psdsos {

namespace {

constexpr double kSingular = 1e-12;

Mat spectral_map(const SymEig& e, double (*fn)(double)) {
  Vec mapped = e.eigenvalues.unaryExpr(fn);
  return e.eigenvectors * mapped.asDiagonal() * e.eigenvectors.transpose();
}

double clamped_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

bool singular(const SymEig& e) {
  const double top = e.eigenvalues[0];
  return top <= 0.0 || e.eigenvalues[e.eigenvalues.size() - 1] <= kSingular * top;
}

Mat psd_endpoint(const Mat& S, const char* name) {
  const Mat sym = symmetrized(S);
  const double top = std::max(lambda_max(sym), 0.0);
  if (lambda_min(sym) < -1e-10 * std::max(top, 1.0)) throw InvalidArgument(std::string(name) + " is not PSD");
  return sym;
}

Mat generic_geodesic(const Mat& S0, const SymEig& e0, const Mat& S1, double t) {
  const Vec root = e0.eigenvalues.cwiseSqrt();
  const Mat& U = e0.eigenvectors;
  const Mat half = U * root.asDiagonal() * U.transpose();
  const Mat inv_half = U * root.cwiseInverse().asDiagonal() * U.transpose();
  const Mat middle = spectral_map(sym_eig(symmetrized(half * S1 * half)), clamped_sqrt);
  const Mat T = inv_half * middle * inv_half;
  const auto d = S0.rows();
  const Mat L = (1.0 - t) * Mat::Identity(d, d) + t * 0.5 * (T + T.transpose());
  const Mat out = L * S0 * L.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

Mat bures_geodesic(const Mat& S0_in, const Mat& S1_in, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("geodesic time must lie in [0, 1]");
  if (S0_in.rows() != S0_in.cols() || S1_in.rows() != S1_in.cols() || S0_in.rows() != S1_in.rows()) {
    throw DimensionError("geodesic endpoints must be square and of equal size");
  }
  const Mat S0 = psd_endpoint(S0_in, "first endpoint");
  const Mat S1 = psd_endpoint(S1_in, "second endpoint");
  if (t == 0.0) return S0;
  if (t == 1.0) return S1;
  const SymEig e0 = sym_eig(S0);
  const SymEig e1 = sym_eig(S1);
  const bool sing0 = singular(e0);
  const bool sing1 = singular(e1);
  if (!sing0) return generic_geodesic(S0, e0, S1, t);
  if (!sing1) return generic_geodesic(S1, e1, S0, 1.0 - t);
  const double scale = std::max(S0.norm() * S1.norm(), 1e-300);
  if ((S0 * S1 - S1 * S0).norm() > 1e-10 * scale) {
    throw InvalidArgument("both geodesic endpoints are singular and they do not commute");
  }
  const Mat mix = (1.0 - t) * spectral_map(e0, clamped_sqrt) + t * spectral_map(e1, clamped_sqrt);
  const Mat out = mix * mix;
  return 0.5 * (out + out.transpose());
}

BuresSpec default_bures_spec(int n, bool rank_one) {
  const double angle = std::numbers::pi / 3.0;
  Mat rot(2, 2);
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  BuresSpec spec;
  spec.n = n;
  if (rank_one) {
    // collinear rank-one endpoints commute
    spec.S0 = Mat::Zero(2, 2);
    spec.S0(0, 0) = 0.2;
    spec.S1 = Mat::Zero(2, 2);
    spec.S1(0, 0) = 1.5;
  } else {
    spec.S0 = Mat::Zero(2, 2);
    spec.S0.diagonal() << 1.0, 0.2;
    Mat D = Mat::Zero(2, 2);
    D.diagonal() << 0.3, 1.5;
    spec.S1 = rot * D * rot.transpose();
  }
  return spec;
}

PsdDataset gen_bures(const BuresSpec& spec) {
  if (spec.n < 2) throw InvalidArgument("a geodesic dataset needs n >= 2");
  PsdDataset data;
  data.inputs.resize(spec.n, 1);
  for (int i = 0; i < spec.n; ++i) {
    const double t = static_cast<double>(i) / (spec.n - 1);
    data.inputs(i, 0) = t;
    data.targets.push_back(bures_geodesic(spec.S0, spec.S1, t));
  }
  return data;
}

double f_a(double a, double x) { return (std::cos(a * x) - 1.0) / (a * a) + 0.5 * x * x; }

ScalarDataset gen_convex_samples(const ConvexRegSpec& spec) {
  if (!(spec.a > 0.0) || !(spec.b > 0.0) || spec.p < 1 || spec.n < 1 || !(spec.noise >= 0.0)) {
    throw InvalidArgument("invalid convex regression spec");
  }
  Rng rng(spec.seed);
  ScalarDataset data;
  data.inputs.resize(spec.n, spec.p);
  data.y.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    for (int k = 0; k < spec.p; ++k) data.inputs(i, k) = rng.uniform(-spec.b, spec.b);
    data.y[i] = f_a(spec.a, data.inputs.row(i).norm()) + spec.noise * rng.normal();
  }
  return data;
}

Vec convex_ground_truth(const ConvexRegSpec& spec, const Mat& points) {
  Vec out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = f_a(spec.a, points.row(i).norm());
  return out;
}

}  // namespace psdsos
