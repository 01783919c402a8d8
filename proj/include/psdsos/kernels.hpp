#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace psdsos {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class KernelFamily { gaussian, exponential };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Normalized translation-invariant kernel, k(x, x) = 1.
///
/// Bandwidth convention:
///   gaussian     k(x, y) = exp(-|x - y|^2 / sigma^2)
///   exponential  k(x, y) = exp(-|x - y| / sigma)
/// i.e. sigma rescales distances, it is not a variance (no factor 2).
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double sigma = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelFamily f, double s);

  bool differentiable() const { return family == KernelFamily::gaussian; }
};

double eval(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y);

/// d^2 k(x, y) / dy_p dy_q (indices are 0-based). Gaussian family only.
double eval_d2(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y,
               int p, int q);

/// d^4 k(x, y) / dx_p dx_q dy_r dy_s (0-based). Gaussian family only.
double eval_d4(const KernelSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y,
               int p, int q, int r, int s);

/// Gram matrix over the rows of `points`.
Mat gram(const KernelSpec& spec, const Mat& points);

/// Cross-kernel matrix, out(i, j) = k(a_i, b_j) over rows of a and b.
Mat cross_gram(const KernelSpec& spec, const Mat& a, const Mat& b);

}  // namespace psdsos
