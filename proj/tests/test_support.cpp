#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include <Eigen/Dense>

#include "nsa/errors.hpp"
#include "nsa/linalg.hpp"
#include "nsa/rng.hpp"

using namespace nsa;
using namespace nsa::linalg;

TEST_CASE("named streams are deterministic and independent") {
  auto g1 = rng::stream(42, "alpha");
  auto g2 = rng::stream(42, "alpha");
  auto g3 = rng::stream(42, "beta");
  CHECK(g1() == g2());
  bool differs = false;
  for (int i = 0; i < 4; ++i) differs = differs || (g1() != g3());
  CHECK(differs);
}

TEST_CASE("halton sphere points land on the requested sphere") {
  for (uint32_t i = 0; i < 20; ++i) {
    Vec p = rng::halton_sphere_point(i, 3, 2.5);
    CHECK(std::abs(p.norm() - 2.5) < 1e-12);
  }
  Vec a = rng::halton_sphere_point(3, 2, 1.0);
  Vec b = rng::halton_sphere_point(3, 2, 1.0);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("operator norm estimate matches the dominant singular value") {
  auto gen = rng::stream(7, "opnorm");
  Mat d = Mat::Zero(30, 30);
  for (Index i = 0; i < 30; ++i) d(i, i) = 1.0 + 0.1 * double(i);
  d(29, 29) = 10.0;
  CMat m = d.cast<Cplx>();
  ApplyFn apply = [&](const CVec& v) { return CVec(m * v); };
  ApplyFn adj = [&](const CVec& v) { return CVec(m.adjoint() * v); };
  double est = estimate_operator_norm(30, apply, adj, gen);
  CHECK(est == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("kernel basis of a symmetric matrix has the right span") {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = -3.0;
  Mat k = symmetric_kernel_basis(m, 1e-10);
  REQUIRE(k.cols() == 2);
  CHECK((m * k).norm() < 1e-12);
}

TEST_CASE("subspace distance separates equal and orthogonal spans") {
  Mat a = Mat::Identity(4, 2);
  Mat rot(2, 2);
  rot << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  Mat b = a * rot;
  CHECK(subspace_distance(a, b) < 1e-7);
  CHECK(containment_residual(a, b) < 1e-14);
  Mat c = Mat::Zero(4, 2);
  c(2, 0) = 1.0;
  c(3, 1) = 1.0;
  CHECK(subspace_distance(a, c) == doctest::Approx(1.0));
  CHECK(containment_residual(a, c) == doctest::Approx(1.0));
}

TEST_CASE("orthonormal_columns drops dependent columns") {
  Mat m(3, 3);
  m.col(0) << 1, 0, 0;
  m.col(1) << 2, 0, 0;
  m.col(2) << 0, 1, 0;
  Mat q = orthonormal_columns(m, 1e-10);
  REQUIRE(q.cols() == 2);
  CHECK((q.transpose() * q - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("greedy pairing reports the matching gaps sorted") {
  std::vector<Cplx> a{{0.0, 0.0}, {1.0, 0.0}, {5.0, 0.0}};
  std::vector<Cplx> b{{1.0, 1e-3}, {5.0, 0.0}, {0.0, 2e-3}};
  auto d = greedy_pair_distances(a, b);
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[2] == doctest::Approx(2e-3));
}

TEST_CASE("line fit recovers exact affine data") {
  std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double xi : x) y.push_back(2.5 * xi - 1.0);
  auto fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.max_abs_residual < 1e-12);
}

TEST_CASE("line fit rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_line({1.0}, {2.0}), PreconditionError);
  CHECK_THROWS_AS(fit_line({1.0, 1.0}, {2.0, 3.0}), PreconditionError);
}
