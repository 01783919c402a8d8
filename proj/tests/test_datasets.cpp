#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "helpers.hpp"
#include "psdsos/datasets.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"

using namespace psdsos;

namespace {

// Bures-Wasserstein distance through Eigen's own matrix square root.
double bures_distance(const Mat& a, const Mat& b) {
  const Mat ra = a.sqrt();
  const Mat inner = (ra * b * ra).sqrt();
  return std::sqrt(std::max(0.0, a.trace() + b.trace() - 2.0 * inner.trace()));
}

Mat random_pd(Rng& rng, int d) { return testing::random_psd(rng, d) + 0.1 * Mat::Identity(d, d); }

}  // namespace

TEST_SUITE("datasets") {
  TEST_CASE("bures_geodesic examples") {
    const BuresSpec spec = default_bures_spec();
    CHECK((bures_geodesic(spec.S0, spec.S1, 0.0) - spec.S0).norm() < 1e-12);
    CHECK((bures_geodesic(spec.S0, spec.S1, 1.0) - spec.S1).norm() < 1e-12);
    CHECK((bures_geodesic(Mat::Identity(3, 3), 4 * Mat::Identity(3, 3), 0.5) - 2.25 * Mat::Identity(3, 3)).norm() <
          1e-12);
    for (double t : {0.2, 0.7}) CHECK((bures_geodesic(spec.S1, spec.S1, t) - spec.S1).norm() < 1e-12);
    CHECK_THROWS_AS(bures_geodesic(spec.S0, spec.S1, 1.5), InvalidArgument);
    CHECK_THROWS_AS(bures_geodesic(spec.S0, spec.S1, -0.1), InvalidArgument);
  }

  TEST_CASE("bures_geodesic is a constant-speed geodesic") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 1 + static_cast<int>(rng.index(4));
      const Mat a = random_pd(rng, d), b = random_pd(rng, d);
      const double total = bures_distance(a, b);
      for (double t : {0.1, 0.25, 0.5, 0.9}) {
        const Mat s = bures_geodesic(a, b, t);
        CHECK(lambda_min(s) >= -1e-10);
        CHECK((s - s.transpose()).norm() == 0.0);
        CHECK(bures_distance(a, s) == doctest::Approx(t * total).epsilon(1e-6).scale(1.0));
        CHECK(bures_distance(s, b) == doctest::Approx((1 - t) * total).epsilon(1e-6).scale(1.0));
      }
    }
  }

  TEST_CASE("rank-one endpoints") {
    const BuresSpec spec = default_bures_spec(12, true);
    const Mat mid = bures_geodesic(spec.S0, spec.S1, 0.5);
    const double r = 0.5 * (std::sqrt(0.2) + std::sqrt(1.5));
    CHECK(mid(0, 0) == doctest::Approx(r * r));
    CHECK(std::abs(mid(1, 1)) < 1e-14);
    Mat other = Mat::Zero(2, 2);
    other(1, 1) = 1.0;
    Mat tilted = Mat::Ones(2, 2) * 0.5;
    CHECK_THROWS_AS(bures_geodesic(other, tilted, 0.5), InvalidArgument);

    // singular start, definite end
    const Mat pd = 2.0 * Mat::Identity(2, 2);
    CHECK((bures_geodesic(other, pd, 0.0) - other).norm() < 1e-10);
    CHECK((bures_geodesic(other, pd, 1.0) - pd).norm() < 1e-10);
    CHECK(lambda_min(bures_geodesic(other, pd, 0.3)) >= -1e-10);
  }

  TEST_CASE("gen_bures samples the geodesic") {
    const BuresSpec spec = default_bures_spec(12);
    const PsdDataset data = gen_bures(spec);
    REQUIRE(data.inputs.rows() == 12);
    CHECK(data.inputs(0, 0) == 0.0);
    CHECK(data.inputs(11, 0) == 1.0);
    for (int i = 0; i < 12; ++i) {
      CHECK((data.targets[static_cast<std::size_t>(i)] - bures_geodesic(spec.S0, spec.S1, data.inputs(i, 0))).norm() ==
            0.0);
    }
    BuresSpec tiny = spec;
    tiny.n = 1;
    CHECK_THROWS_AS(gen_bures(tiny), InvalidArgument);
  }

  TEST_CASE("f_a examples") {
    CHECK(f_a(1.0, 0.0) == 0.0);
    CHECK(f_a(1.0, std::numbers::pi) == doctest::Approx(-2.0 + std::numbers::pi * std::numbers::pi / 2));
    CHECK(f_a(1.0, std::numbers::pi) == doctest::Approx(2.93480).epsilon(1e-5));
    Rng rng(2);
    for (int t = 0; t < 1000; ++t) {
      const double a = rng.uniform(0.5, 5), x = rng.uniform(-4, 4), y = rng.uniform(-4, 4);
      CHECK(f_a(a, 0.5 * (x + y)) <= 0.5 * (f_a(a, x) + f_a(a, y)) + 1e-12);
    }
  }

  TEST_CASE("gen_convex_samples") {
    ConvexRegSpec spec;
    spec.p = 2;
    spec.n = 25;
    spec.seed = 11;
    const ScalarDataset a = gen_convex_samples(spec), b = gen_convex_samples(spec);
    CHECK(a.inputs == b.inputs);
    CHECK(a.y == b.y);
    CHECK(a.inputs.cwiseAbs().maxCoeff() <= spec.b);
    spec.seed = 12;
    CHECK(gen_convex_samples(spec).y != a.y);

    spec.noise = 0.0;
    const ScalarDataset clean = gen_convex_samples(spec);
    const Vec truth = convex_ground_truth(spec, clean.inputs);
    for (Eigen::Index i = 0; i < clean.n(); ++i) {
      CHECK(clean.y[i] == f_a(spec.a, clean.inputs.row(i).norm()));
      CHECK(truth[i] == clean.y[i]);
    }

    spec.noise = 0.3;
    spec.n = 4000;
    spec.p = 1;
    const ScalarDataset noisy = gen_convex_samples(spec);
    const Vec resid = noisy.y - convex_ground_truth(spec, noisy.inputs);
    CHECK(resid.mean() == doctest::Approx(0.0).scale(1.0).epsilon(0.03));
    CHECK(std::sqrt(resid.squaredNorm() / 4000) == doctest::Approx(0.3).epsilon(0.05));
  }
}
