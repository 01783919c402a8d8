#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/kernels.hpp"
#include "psdsos/psdlinalg.hpp"

using namespace psdsos;
using testing::random_points;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const KernelSpec gauss1(KernelFamily::gaussian, 1.0);
const KernelSpec expo1(KernelFamily::exponential, 1.0);

// d^2 k / dy_p dy_q by central differences of eval
double fd_d2(const KernelSpec& k, const Vec& x, const Vec& y, int p, int q, double h) {
  auto f = [&](double sp, double sq) {
    Vec z = y;
    z[p] += sp;
    z[q] += sq;
    return eval(k, x, z);
  };
  return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
}

// d^4 k / dx_p dx_q dy_r dy_s as nested differences of eval_d2 in x
double fd_d4(const KernelSpec& k, const Vec& x, const Vec& y, int p, int q, int r, int s, double h) {
  auto f = [&](double sp, double sq) {
    Vec z = x;
    z[p] += sp;
    z[q] += sq;
    return eval_d2(k, z, y, r, s);
  };
  return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("eval examples") {
    CHECK(eval(gauss1, v1(0.3), v1(0.3)) == 1.0);
    CHECK(eval(gauss1, v1(0), v1(1)) == doctest::Approx(0.3678794).epsilon(1e-7));
    CHECK(eval(expo1, v1(0), v1(1)) == doctest::Approx(0.3678794).epsilon(1e-7));
    CHECK(eval(KernelSpec(KernelFamily::exponential, 2.0), v2(0, 0), v2(3, 4)) == doctest::Approx(std::exp(-2.5)));
    CHECK(eval(KernelSpec(KernelFamily::gaussian, 2.0), v2(0, 0), v2(1, 1)) == doctest::Approx(std::exp(-0.5)));
  }

  TEST_CASE("eval errors") {
    CHECK_THROWS_AS(eval(gauss1, v1(0), v2(0, 0)), DimensionError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, 0.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, -1.0), InvalidArgument);
    CHECK_THROWS_AS(parse_kernel_family("laplace"), InvalidArgument);
    CHECK(parse_kernel_family("exponential") == KernelFamily::exponential);
    CHECK(to_string(KernelFamily::gaussian) == "gaussian");
  }

  TEST_CASE("eval_d2 examples") {
    CHECK(eval_d2(gauss1, v2(0.2, 0.1), v2(0.2, 0.1), 0, 0) == doctest::Approx(-2.0));
    CHECK(eval_d2(gauss1, v2(0.2, 0.1), v2(0.2, 0.1), 0, 1) == doctest::Approx(0.0));
    CHECK(eval_d2(gauss1, v2(0, 0), v2(1, 0), 0, 0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-9));
    CHECK(eval_d2(KernelSpec(KernelFamily::gaussian, 3.0), v1(0.5), v1(0.5), 0, 0) ==
          doctest::Approx(-2.0 / 9.0));
    CHECK(fd_d2(gauss1, v2(0, 0), v2(1, 0), 0, 0, 1e-5) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-5));
  }

  TEST_CASE("eval_d2 errors") {
    CHECK_THROWS_AS(eval_d2(expo1, v1(0), v1(1), 0, 0), InvalidArgument);
    CHECK_THROWS_AS(eval_d2(gauss1, v1(0), v1(1), 0, 1), InvalidArgument);
    CHECK_THROWS_AS(eval_d2(gauss1, v1(0), v1(1), -1, 0), InvalidArgument);
  }

  TEST_CASE("eval_d4 examples") {
    CHECK(eval_d4(gauss1, v1(0.4), v1(0.4), 0, 0, 0, 0) == doctest::Approx(12.0));
    CHECK(eval_d4(KernelSpec(KernelFamily::gaussian, 2.0), v1(0), v1(0), 0, 0, 0, 0) == doctest::Approx(0.75));
    CHECK(eval_d4(gauss1, v2(0, 0), v2(0, 0), 0, 0, 1, 1) == doctest::Approx(4.0));
    CHECK(fd_d4(gauss1, v1(0), v1(0), 0, 0, 0, 0, 1e-3) == doctest::Approx(12.0).epsilon(1e-4));
    CHECK(fd_d4(KernelSpec(KernelFamily::gaussian, 2.0), v1(0), v1(0), 0, 0, 0, 0, 1e-3) ==
          doctest::Approx(0.75).epsilon(1e-4));
    CHECK(fd_d4(gauss1, v2(0, 0), v2(0, 0), 0, 0, 1, 1, 1e-3) == doctest::Approx(4.0).epsilon(1e-4));
    CHECK_THROWS_AS(eval_d4(expo1, v1(0), v1(0), 0, 0, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(eval_d4(gauss1, v1(0), v1(0), 0, 0, 0, 1), InvalidArgument);
  }

  TEST_CASE("gram examples") {
    Mat one(1, 1);
    one << 0.7;
    CHECK(gram(gauss1, one)(0, 0) == 1.0);
    Mat twin(2, 1);
    twin << 0.5, 0.5;
    CHECK(gram(gauss1, twin).isApprox(Mat::Ones(2, 2)));
    Mat pts(2, 1);
    pts << 0.0, 1.0;
    Mat expected(2, 2);
    expected << 1.0, std::exp(-1.0), std::exp(-1.0), 1.0;
    CHECK(gram(gauss1, pts).isApprox(expected, 1e-12));
    CHECK_THROWS_AS(gram(gauss1, Mat(0, 1)), InvalidArgument);
    CHECK_THROWS_AS(cross_gram(gauss1, pts, Mat::Zero(2, 2)), DimensionError);
  }

  TEST_CASE("derivatives match finite differences on random draws") {
    Rng rng(11);
    int bad2 = 0, bad4 = 0;
    for (int t = 0; t < 100; ++t) {
      const int p = 1 + static_cast<int>(rng.index(3));
      const KernelSpec k(KernelFamily::gaussian, rng.uniform(0.5, 2.0));
      const Mat xy = random_points(rng, 2, p, -0.6, 0.6);
      const Vec x = xy.row(0).transpose();
      const Vec y = xy.row(1).transpose();
      const int a = static_cast<int>(rng.index(p)), b = static_cast<int>(rng.index(p));
      const int c = static_cast<int>(rng.index(p)), e = static_cast<int>(rng.index(p));
      const double d2 = eval_d2(k, x, y, a, b);
      if (std::abs(fd_d2(k, x, y, a, b, 1e-4) - d2) > 1e-4 * std::max(1.0, std::abs(d2))) ++bad2;
      const double d4 = eval_d4(k, x, y, a, b, c, e);
      if (std::abs(fd_d4(k, x, y, a, b, c, e, 1e-3) - d4) > 1e-4 * std::max(1.0, std::abs(d4))) ++bad4;
      CHECK(eval_d2(k, x, y, a, b) == eval_d2(k, x, y, b, a));
      CHECK(eval(k, x, y) == eval(k, y, x));
    }
    CHECK(bad2 == 0);
    CHECK(bad4 == 0);
  }

  TEST_CASE("gram is symmetric and PSD on random points") {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
      const Mat pts = random_points(rng, 30, 2);
      for (KernelFamily fam : {KernelFamily::gaussian, KernelFamily::exponential}) {
        const Mat K = gram(KernelSpec(fam, 0.5), pts);
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(lambda_min(K) >= -1e-10 * 30);
        CHECK(K.diagonal().isOnes());
      }
    }
  }
}
