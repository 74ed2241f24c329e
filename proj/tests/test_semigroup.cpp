#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "nsa/discretize.hpp"
#include "nsa/errors.hpp"
#include "nsa/oracles.hpp"
#include "nsa/potential.hpp"
#include "nsa/semigroup.hpp"
#include "nsa/spectral.hpp"

using namespace nsa;
using namespace nsa::semigroup;
using namespace nsa::spectral;
using namespace nsa::discretize;
using namespace nsa::potential;

namespace {

PotentialSpec well_1d(Cplx c2) {
  return PotentialSpec(1, Vec::Zero(1), Mat::Zero(1, 1), {{c2, {2}, 0}}, {Vec::Zero(1)});
}

GridOperator flow_op(Cplx c2) { return assemble(well_1d(c2), Grid(1, 4.5, 300), 0.05); }

CVec random_vector(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> gauss;
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Cplx(gauss(gen), gauss(gen));
  return v;
}

// Ground projection and remainder series of the rotated well, shared by the
// decay tests. Built once; every ingredient is deterministic.
struct DecayLab {
  GridOperator op;
  std::vector<Eigenpair> pairs;
  ProjectionDiagnostics diag;
  std::vector<double> times;
  std::vector<double> remainders;
  std::shared_ptr<DensePropagator> prop;
};

const DecayLab& complex_lab() {
  static const DecayLab lab = [] {
    GridOperator op = flow_op(Cplx(1.0, 1.0));
    auto pairs = eigs_in_disc(op, 8.0);
    std::vector<Cplx> spectrum;
    for (const auto& p : pairs) spectrum.push_back(p.lambda);
    auto diag = spectral_projection(op, pairs[0].lambda, 0.5 * op.h, 32, spectrum);
    auto times = default_time_grid();
    auto prop = std::make_shared<DensePropagator>(op, times);
    std::vector<CMat> pmats{projection_matrix(*diag.action)};
    std::vector<Cplx> lams{pairs[0].lambda};
    std::mt19937_64 gen(11);
    std::vector<double> rems;
    for (double t : times) rems.push_back(remainder_norm(*prop, t, op.h, lams, pmats, gen));
    return DecayLab{op, pairs, diag, times, rems, prop};
  }();
  return lab;
}

}  // namespace

TEST_CASE("propagation at zero time is the identity") {
  auto op = flow_op(Cplx(1.0, 1.0));
  std::mt19937_64 gen(1);
  CVec v = random_vector(gen, 300);
  CHECK((propagate(op, v, 0.0) - v).norm() == 0.0);
  CHECK((propagate_adjoint(op, v, 0.0) - v).norm() == 0.0);
}

TEST_CASE("krylov propagation matches the dense exponential") {
  auto op = flow_op(Cplx(1.0, 1.0));
  const CMat gen_mat = CMat(op.matrix) * Cplx(-1.0 / op.h);
  std::mt19937_64 gen(2);
  for (double t : {0.1, 1.0, 10.0}) {
    CVec v = random_vector(gen, 300);
    CVec dense = oracles::dense_expm(gen_mat, t) * v;
    CHECK((propagate(op, v, t) - dense).norm() / dense.norm() < 1e-9);
  }
}

TEST_CASE("semigroup contracts random vectors") {
  auto op = flow_op(Cplx(1.0, 1.0));
  std::mt19937_64 gen(3);
  for (double t : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      CVec v = random_vector(gen, 300);
      CHECK(propagate(op, v, t).norm() <= v.norm() * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("semigroup property composes") {
  auto op = flow_op(Cplx(1.0, 1.0));
  std::mt19937_64 gen(4);
  CVec v = random_vector(gen, 300);
  CVec two_steps = propagate(op, propagate(op, v, 0.7), 0.55);
  CVec one_step = propagate(op, v, 1.25);
  CHECK((two_steps - one_step).norm() / one_step.norm() < 1e-8);
}

TEST_CASE("adjoint propagation pairs with the forward flow") {
  auto op = flow_op(Cplx(1.0, 1.0));
  std::mt19937_64 gen(5);
  CVec u = random_vector(gen, 300), v = random_vector(gen, 300);
  Cplx forward = propagate(op, u, 0.8).dot(v);
  Cplx backward = u.dot(propagate_adjoint(op, v, 0.8));
  CHECK(std::abs(forward - backward) / std::abs(forward) < 1e-8);
}

TEST_CASE("propagation rejects bad arguments") {
  auto op = flow_op(Cplx(1.0, 1.0));
  CVec v = CVec::Ones(300);
  CHECK_THROWS_AS(propagate(op, v, -0.5), PreconditionError);
  CHECK_THROWS_AS(propagate(op, CVec::Ones(5), 1.0), PreconditionError);
  CHECK_THROWS_AS(propagate_adjoint(op, CVec::Ones(5), 1.0), PreconditionError);
}

TEST_CASE("ground eigenvector decays at its eigenvalue rate") {
  auto op = flow_op(Cplx(1.0));
  auto pairs = eigs_in_disc(op, 8.0);
  REQUIRE(!pairs.empty());
  CVec v0 = pairs[0].vector;
  CVec once = propagate(op, v0, 1.0);
  CVec expected = std::exp(-pairs[0].lambda / op.h) * v0;
  CHECK((once - expected).norm() < 1e-6);
  // lambda_0/h is 1 up to grid error, so the norm sits near e^{-1}
  CHECK(std::abs(once.norm() - std::exp(-1.0)) < 5e-3);
}

TEST_CASE("default time grid doubles every second point") {
  auto times = default_time_grid();
  REQUIRE(times.size() == 9);
  CHECK(times.front() == doctest::Approx(0.5));
  CHECK(times.back() == doctest::Approx(8.0));
  for (size_t k = 0; k + 1 < times.size(); ++k) CHECK(times[k] < times[k + 1]);
  for (size_t k = 0; k + 2 < times.size(); ++k)
    CHECK(std::abs(times[k + 2] - 2.0 * times[k]) < 1e-12 * times[k]);
}

TEST_CASE("dense propagator table reuses squarings and validates input") {
  auto op = assemble(well_1d(Cplx(1.0, 1.0)), Grid(1, 4.5, 48), 0.05);
  DensePropagator prop(op, {0.4, 0.8});
  const CMat gen_mat = CMat(op.matrix) * Cplx(-1.0 / op.h);
  CMat direct = oracles::dense_expm(gen_mat, 0.8);
  CHECK((prop.at(0.8) - direct).norm() / direct.norm() < 1e-10);
  CHECK_THROWS_AS(prop.at(0.33), PreconditionError);
  CHECK_THROWS_AS(DensePropagator(op, {}), PreconditionError);
  CHECK_THROWS_AS(DensePropagator(op, {-1.0, 2.0}), PreconditionError);
  CHECK_THROWS_AS(DensePropagator(op, {2.0, 2.0}), PreconditionError);
  PotentialSpec flat_2d(2, Vec::Zero(2), Mat::Zero(2, 2),
                        {{Cplx(1.0), {2, 0}, 0}, {Cplx(1.0), {0, 2}, 0}}, {Vec::Zero(2)});
  auto big = assemble(flat_2d, Grid(2, 6.0, 64), 0.1);
  CHECK_THROWS_AS(DensePropagator(big, {1.0}), PreconditionError);
}

TEST_CASE("projection range is flow-invariant") {
  const auto& lab = complex_lab();
  std::mt19937_64 gen(6);
  CVec w = lab.diag.action->apply(random_vector(gen, 300));
  for (double t : {0.5, 2.0, 5.0}) {
    CVec scaled = std::exp(-t * lab.pairs[0].lambda / lab.op.h) * w;
    CHECK((propagate(lab.op, w, t) - scaled).norm() / scaled.norm() < 1e-5);
  }
}

TEST_CASE("rotated well remainder decays at the spectral gap rate") {
  const auto& lab = complex_lab();
  REQUIRE(lab.pairs.size() == 3);
  CHECK(std::abs(lab.pairs[0].lambda / lab.op.h - std::sqrt(Cplx(1.0, 1.0))) < 2e-2);
  CHECK(std::abs(lab.diag.trace - 1.0) < 1e-6);

  auto series = decay_rate_fit(lab.times, lab.remainders, 2.0);
  // the reference envelope holds with constant 1 on the kept window
  for (size_t i = 0; i < series.times.size(); ++i)
    CHECK(series.remainder_norms[i] <= std::exp(-2.0 * series.times[i]));
  // true asymptotic rate is Re of the next lattice point over h: 3*Re sqrt(1+i)
  CHECK(series.fitted_rate > 1.9);
  CHECK(series.fitted_rate == doctest::Approx(3.0 * std::sqrt(Cplx(1.0, 1.0)).real()).epsilon(0.05));
  CHECK(series.fit_r_squared > 0.999);
  CHECK(series.max_line_deviation < 0.5);
  CHECK(series.reference_a == 2.0);
  // the two deepest samples sit below 10x the estimation floor and are dropped
  CHECK(series.times.size() == 7);
  CHECK(series.times.back() == doctest::Approx(4.0));
  CHECK(std::abs(lab.remainders[2] - 4.1999e-2) < 1e-3);
}

TEST_CASE("matrix-free remainder matches the dense table") {
  const auto& lab = complex_lab();
  std::vector<Cplx> lams{lab.pairs[0].lambda};
  std::vector<CMat> pmats{projection_matrix(*lab.diag.action)};
  std::vector<std::shared_ptr<const SpectralProjection>> projs{lab.diag.action};
  std::mt19937_64 gen(7);
  double dense = remainder_norm(*lab.prop, 1.0, lab.op.h, lams, pmats, gen);
  double free = remainder_norm(lab.op, 1.0, lams, projs, gen);
  CHECK(std::abs(free - dense) / dense < 1e-8);
}

TEST_CASE("remainder at time zero is order one") {
  const auto& lab = complex_lab();
  std::vector<Cplx> lams{lab.pairs[0].lambda};
  std::vector<std::shared_ptr<const SpectralProjection>> projs{lab.diag.action};
  std::mt19937_64 gen(8);
  double at_zero = remainder_norm(lab.op, 0.0, lams, projs, gen);
  CHECK(at_zero > 0.9);
  CHECK(at_zero < 3.0);
}

TEST_CASE("selfadjoint control decays at the next eigenvalue") {
  auto op = flow_op(Cplx(1.0));
  auto pairs = eigs_in_disc(op, 8.0);
  REQUIRE(pairs.size() == 4);
  std::vector<Cplx> spectrum;
  for (const auto& p : pairs) spectrum.push_back(p.lambda);
  auto diag = spectral_projection(op, pairs[0].lambda, 0.5 * op.h, 32, spectrum);
  auto times = default_time_grid();
  DensePropagator prop(op, times);
  std::vector<CMat> pmats{projection_matrix(*diag.action)};
  std::mt19937_64 gen(9);
  std::vector<double> rems;
  for (double t : times)
    rems.push_back(remainder_norm(prop, t, op.h, {pairs[0].lambda}, pmats, gen));
  auto series = decay_rate_fit(times, rems, 2.0);
  CHECK(std::abs(series.fitted_rate - 3.0) < 0.1);
  CHECK(series.fit_r_squared > 0.9999);
}

TEST_CASE("synthetic exponential series fits exactly") {
  std::vector<double> ts, rs;
  for (int k = 0; k < 9; ++k) {
    ts.push_back(0.3 * (k + 1));
    rs.push_back(std::exp(-2.0 * ts.back()));
  }
  auto series = decay_rate_fit(ts, rs, 2.0);
  CHECK(std::abs(series.fitted_rate - 2.0) < 1e-6);
  CHECK(std::abs(series.fit_r_squared - 1.0) < 1e-12);
  CHECK(series.max_line_deviation < 1e-9);
}

TEST_CASE("rate fit rejects unusable series") {
  CHECK_THROWS_AS(decay_rate_fit({1.0, 2.0}, {0.1}, 2.0), PreconditionError);
  CHECK_THROWS_AS(decay_rate_fit({1.0, 2.0, 3.0, 4.0, 5.0}, {0.1, 0.01, 0.0, 1e-4, 1e-5}, 2.0),
                  PreconditionError);
  CHECK_THROWS_AS(decay_rate_fit({1.0, 2.0, 3.0, 4.0, 5.0}, {1e-9, 1e-9, 1e-9, 1e-9, 1e-9}, 2.0),
                  NoiseFloor);
  // one sample under the floor leaves only four usable points
  CHECK_THROWS_AS(decay_rate_fit({1.0, 2.0, 3.0, 4.0, 5.0}, {0.1, 0.01, 1e-3, 1e-4, 1e-9}, 2.0),
                  NoiseFloor);
}
