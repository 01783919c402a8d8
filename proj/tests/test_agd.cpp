#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "psdsos/agd.hpp"
#include "psdsos/errors.hpp"

using namespace psdsos;

namespace {

// f(x) = 1/2 x^T A x - b^T x with A positive definite.
struct Quadratic {
  Mat A;
  Vec b;
  double operator()(const Vec& x, Vec* g) const {
    if (g) *g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  }
};

}  // namespace

TEST_SUITE("agd") {
  TEST_CASE("strongly convex quadratics") {
    Rng rng(1);
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + static_cast<int>(rng.index(8));
      Quadratic q{testing::random_psd(rng, n) + 0.5 * Mat::Identity(n, n), Vec::Random(n)};
      Eigen::SelfAdjointEigenSolver<Mat> es(q.A);
      const Vec xstar = q.A.ldlt().solve(q.b);
      const AgdResult r = minimize_strongly_convex(std::cref(q), Vec::Zero(n), es.eigenvalues().maxCoeff(),
                                                   es.eigenvalues().minCoeff(), {1e-12, 100000, 100});
      CHECK(r.converged);
      CHECK((r.x - xstar).norm() <= 1e-8 * (1 + xstar.norm()));
      for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
    }
    const Quadratic one{Mat::Identity(1, 1), Vec::Ones(1)};
    CHECK_THROWS_AS(minimize_strongly_convex(std::cref(one), Vec::Zero(1), 1.0, 2.0, {}), InvalidArgument);
  }

  TEST_CASE("backtracking on an ill-conditioned quadratic") {
    Mat A = Mat::Zero(3, 3);
    A.diagonal() << 1e-4, 1.0, 50.0;
    const Quadratic q{A, Vec::Ones(3)};
    const AgdResult r = minimize_backtracking(std::cref(q), Vec::Zero(3), 1.0, {1e-12, 200000, 100});
    const Vec xstar = Vec(A.diagonal()).cwiseInverse();
    CHECK(std::abs(r.value - q(xstar, nullptr)) <= 1e-6 * std::abs(q(xstar, nullptr)));
  }

  TEST_CASE("budget exhaustion is reported") {
    Rng rng(2);
    const Quadratic q{testing::random_psd(rng, 6) + 1e-3 * Mat::Identity(6, 6), Vec::Ones(6)};
    const AgdResult r = minimize_backtracking(std::cref(q), Vec::Zero(6), 1.0, {1e-14, 5, 100});
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 5);
  }
}
