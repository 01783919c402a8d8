#include "psdsos/kernels.hpp"

#include <cmath>

#include "psdsos/errors.hpp"

namespace psdsos {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::exponential:
      return "exponential";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "exponential") return KernelFamily::exponential;
  throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily f, double s) : family(f), sigma(s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("kernel bandwidth must be positive and finite");
}

namespace {

void check_dims(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y) {
  if (x.size() != y.size()) {
    throw DimensionError("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
}

void check_gaussian(const KernelSpec& spec) {
  if (spec.family != KernelFamily::gaussian) {
    throw InvalidArgument("kernel derivatives require the gaussian family; the exponential kernel is not C^2 "
                          "at the diagonal");
  }
}

void check_index(int i, Eigen::Index dim) {
  if (i < 0 || i >= dim) throw InvalidArgument("derivative index " + std::to_string(i) + " out of range");
}

inline double kd(int a, int b) { return a == b ? 1.0 : 0.0; }

}  // namespace

double eval(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y) {
  check_dims(x, y);
  const double r2 = (x - y).squaredNorm();
  if (spec.family == KernelFamily::gaussian) return std::exp(-r2 / (spec.sigma * spec.sigma));
  return std::exp(-std::sqrt(r2) / spec.sigma);
}

// With delta = y - x and c = 1/sigma^2, k = exp(-c |delta|^2) and
//   dk/dy_p = a_p k,  a_p = -2 c delta_p.
double eval_d2(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y,
               int p, int q) {
  check_gaussian(spec);
  check_dims(x, y);
  check_index(p, x.size());
  check_index(q, x.size());
  const double c = 1.0 / (spec.sigma * spec.sigma);
  const double k = std::exp(-c * (y - x).squaredNorm());
  const double ap = -2.0 * c * (y[p] - x[p]);
  const double aq = -2.0 * c * (y[q] - x[q]);
  return (ap * aq - 2.0 * c * kd(p, q)) * k;
}

// k depends on y - x only, so d/dx = -d/ddelta; two x-derivatives cancel the sign.
double eval_d4(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y,
               int p, int q, int r, int s) {
  check_gaussian(spec);
  check_dims(x, y);
  for (int i : {p, q, r, s}) check_index(i, x.size());
  const double c = 1.0 / (spec.sigma * spec.sigma);
  const Vec delta = y - x;
  const double k = std::exp(-c * delta.squaredNorm());
  const double ap = -2.0 * c * delta[p];
  const double aq = -2.0 * c * delta[q];
  const double ar = -2.0 * c * delta[r];
  const double as = -2.0 * c * delta[s];
  const double quartic = ap * aq * ar * as;
  const double mixed = kd(p, q) * ar * as + kd(p, r) * aq * as + kd(q, r) * ap * as + kd(p, s) * aq * ar +
                       kd(q, s) * ap * ar + kd(r, s) * ap * aq;
  const double pairs = kd(p, q) * kd(r, s) + kd(p, r) * kd(q, s) + kd(p, s) * kd(q, r);
  return (quartic - 2.0 * c * mixed + 4.0 * c * c * pairs) * k;
}

Mat gram(const KernelSpec& spec, const Mat& points) {
  if (points.rows() == 0) throw InvalidArgument("gram: empty point set");
  const Eigen::Index n = points.rows();
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      K(i, j) = eval(spec, points.row(i).transpose(), points.row(j).transpose());
      K(j, i) = K(i, j);
    }
  }
  return K;
}

Mat cross_gram(const KernelSpec& spec, const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw DimensionError("cross_gram: point dimensions differ");
  Mat out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = eval(spec, a.row(i).transpose(), b.row(j).transpose());
  return out;
}

}  // namespace psdsos
