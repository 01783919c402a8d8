#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "instances.hpp"
#include "psdsos/certify.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"

using namespace psdsos;

namespace {

SmoothnessConstants unit_constants(int m = 1) {
  SmoothnessConstants c;
  c.m = m;
  return c;
}

// f = 0 with a 1 x 1 certificate B = I on the single grid point 0.
ConvexModel zero_model(double trace) {
  ConvexModel m;
  m.kernel = KernelSpec(KernelFamily::gaussian, 1.0);
  m.anchors = Mat::Zero(1, 1);
  m.alpha = Vec::Zero(1);
  m.grid = Mat::Zero(1, 1);
  m.certificate.factor = build_features(m.kernel, m.grid, 1);
  m.certificate.B = Mat::Constant(1, 1, trace);
  return m;
}

}  // namespace

TEST_SUITE("certify") {
  TEST_CASE("fill_distance examples") {
    const Mat line = box_probes(Vec::Zero(1), Vec::Ones(1), 1001);
    CHECK(fill_distance(line, line) == 0.0);
    Mat three(3, 1);
    three << 0.0, 0.5, 1.0;
    CHECK(fill_distance(three, line) == doctest::Approx(0.25).epsilon(1e-12));
    const Mat square = box_probes(Vec::Zero(2), Vec::Ones(2), 101);
    CHECK(fill_distance(Mat::Constant(1, 2, 0.5), square) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(fill_distance(Mat(0, 1), line), InvalidArgument);
    CHECK_THROWS(fill_distance(three, square));
  }

  TEST_CASE("c0_constant examples") {
    CHECK(c0_constant(1, 1) == doctest::Approx(3.0));
    CHECK(c0_constant(1, 3) == doctest::Approx(9.0));
    CHECK(c0_constant(2, 1) == doctest::Approx(486.0));
  }

  TEST_CASE("sobolev_constants examples") {
    const SmoothnessConstants c = sobolev_constants(3.0, 1, 1);
    CHECK(c.M == doctest::Approx(std::sqrt(2 * M_PI) * std::pow(2.0, 3.5)).epsilon(1e-10));
    CHECK(c.M == doctest::Approx(28.359).epsilon(1e-4));
    CHECK(c.D_m == doctest::Approx(std::sqrt(2 * M_PI / 3.0)).epsilon(1e-10));
    CHECK(c.D_m == doctest::Approx(1.4472).epsilon(1e-4));
    CHECK(c.source == ConstantSource::sobolev);
    CHECK_THROWS_AS(sobolev_constants(1.5, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(sobolev_constants(2.0, 2, 1), InvalidArgument);
  }

  TEST_CASE("gaussian_derivative_bound") {
    CHECK(gaussian_derivative_bound(1, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(gaussian_derivative_bound(1, 10.0) == 1.0);
    CHECK(gaussian_derivative_bound(2, 0.5) == doctest::Approx(std::sqrt(12.0) * 4.0));
  }

  TEST_CASE("eigen_bound examples") {
    CHECK(eigen_bound(0, 0, unit_constants(), 1, 0.1, 1.0).epsilon == 0.0);
    const EigenBound b = eigen_bound(0, 1, unit_constants(), 1, 0.1, 1.0);
    CHECK(b.epsilon == doctest::Approx(0.3));
    CHECK(b.valid);
    for (int m : {1, 2}) {
      const double e1 = eigen_bound(0.7, 1.3, unit_constants(m), 2, 0.01, 1.0).epsilon;
      const double e2 = eigen_bound(0.7, 1.3, unit_constants(m), 2, 0.02, 1.0).epsilon;
      CHECK(e2 == doctest::Approx(std::pow(2.0, m) * e1).epsilon(1e-12));
    }
    CHECK_FALSE(eigen_bound(0, 1, unit_constants(), 1, 2.0, 1.0).valid);
    CHECK_FALSE(eigen_bound(0, 1, unit_constants(2), 1, 0.1, 1.0).valid);
    CHECK(eigen_bound(0, 1, unit_constants(2), 1, 0.05, 1.0).valid);
    CHECK_THROWS_AS(eigen_bound(-1, 0, unit_constants(), 1, 0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(eigen_bound(0, -1, unit_constants(), 1, 0.1, 1.0), InvalidArgument);
  }

  TEST_CASE("eigen_bound is monotone in every input") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      SmoothnessConstants c = unit_constants(1 + static_cast<int>(rng.index(2)));
      c.M = rng.uniform(0.5, 3);
      c.D_m = rng.uniform(0.5, 3);
      const double s = rng.uniform(0, 2), tr = rng.uniform(0, 2), h = rng.uniform(0, 0.1);
      const double base = eigen_bound(s, tr, c, 1, h, 1.0).epsilon;
      const double up = 1.0 + rng.uniform(0, 1);
      CHECK(eigen_bound(s * up, tr, c, 1, h, 1.0).epsilon >= base);
      CHECK(eigen_bound(s, tr * up, c, 1, h, 1.0).epsilon >= base);
      CHECK(eigen_bound(s, tr, c, 1, h * up, 1.0).epsilon >= base);
      SmoothnessConstants cm = c, cd = c;
      cm.M *= up;
      cd.D_m *= up;
      CHECK(eigen_bound(s, tr, cm, 1, h, 1.0).epsilon >= base);
      CHECK(eigen_bound(s, tr, cd, 1, h, 1.0).epsilon >= base);
    }
  }

  TEST_CASE("seminorm_estimate recovers derivatives") {
    const Mat probes = box_probes(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), 201);
    const MatrixFunction F = [](const Vec& x) {
      Mat m = Mat::Zero(2, 2);
      m(0, 0) = 3.0 * x[0];
      m(1, 1) = x[0] * x[0];
      m(0, 1) = m(1, 0) = 100.0 * x[0];
      return m;
    };
    CHECK(seminorm_estimate(F, 1, probes, 1e-4) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(seminorm_estimate(F, 2, probes, 1e-3) == doctest::Approx(2.0).epsilon(1e-4));
    const Mat square = box_probes(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), 11);
    const MatrixFunction G = [](const Vec& x) { return Mat::Constant(1, 1, x[0] * x[1]); };
    CHECK(seminorm_estimate(G, 2, square, 1e-3) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("empirical_min_eig examples") {
    const Mat probes = box_probes(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), 101);
    const MatrixFunction diag = [](const Vec& x) {
      Mat m = Mat::Identity(2, 2);
      m(0, 0) = x[0];
      return m;
    };
    CHECK(empirical_min_eig(diag, probes) == doctest::Approx(-1.0));

    Rng rng(2);
    SosModel sos;
    sos.factor = build_features(KernelSpec(KernelFamily::gaussian, 0.5), testing::random_points(rng, 4, 1), 2);
    sos.B = testing::random_psd(rng, 8);
    CHECK(empirical_min_eig([&sos](const Vec& x) { return evaluate(sos, x); }, probes) >= -1e-8);
  }

  TEST_CASE("eigenvalue bound holds on constructed instances") {
    Rng rng(3);
    int checked = 0;
    for (int t = 0; t < 10; ++t) {
      const auto inst = instances::make_eig_instance(rng, 5 + static_cast<int>(rng.index(10)),
                                                     1 + static_cast<int>(rng.index(2)), rng.uniform(0.3, 1.0),
                                                     rng.uniform(0.05, 1.0));
      const auto res = instances::check_eig_instance(inst);
      CHECK(res.empirical < 0.0);
      if (res.bound.valid) {
        ++checked;
        CHECK(res.empirical >= -res.bound.epsilon);
      }
    }
    CHECK(checked == 10);
  }

  TEST_CASE("convexity_deficit examples") {
    const Mat wide = box_probes(Vec::Constant(1, -0.1), Vec::Constant(1, 0.1), 201);
    const Mat narrow = box_probes(Vec::Constant(1, -0.05), Vec::Constant(1, 0.05), 201);
    CHECK(convexity_deficit(zero_model(0.0), unit_constants(), wide, 1.0).eta == 0.0);
    const CertificateReport r = convexity_deficit(zero_model(1.0), unit_constants(), wide, 1.0);
    CHECK(r.eta == doctest::Approx(0.3));
    CHECK(r.h == doctest::Approx(0.1));
    CHECK(r.valid);
    CHECK(convexity_deficit(zero_model(1.0), unit_constants(), narrow, 1.0).eta == doctest::Approx(0.15));

    ConvexModel two = zero_model(1.0);
    two.certificate.B = Eigen::Vector2d(1.0, 2.0).asDiagonal();
    CHECK(convexity_deficit(two, unit_constants(), wide, 1.0).eta == doctest::Approx(0.9));
    const CertificateReport tight = convexity_deficit(two, unit_constants(), wide, 1.0, 1e-3, true);
    CHECK(tight.eta == doctest::Approx(0.6));
    CHECK(tight.lambda_max_form);

    ConvexModel bare = zero_model(1.0);
    bare.certificate.B.resize(0, 0);
    CHECK_THROWS_AS(convexity_deficit(bare, unit_constants(), wide, 1.0), InvalidArgument);
    CHECK_THROWS_AS(convexity_deficit(zero_model(1.0), unit_constants(), Mat::Zero(3, 2), 1.0), DimensionError);
    CHECK(to_json(r).find("\"seminorm_is_estimate\": true") != std::string::npos);
  }
}
