#include "nsa/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "nsa/discretize.hpp"
#include "nsa/errors.hpp"
#include "nsa/linalg.hpp"
#include "nsa/model.hpp"
#include "nsa/oracles.hpp"
#include "nsa/potential.hpp"
#include "nsa/semigroup.hpp"
#include "nsa/spectral.hpp"

namespace nsa::checks {
namespace {

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

Mat random_antisymmetric(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> gauss;
  Mat a = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      a(i, j) = gauss(gen);
      a(j, i) = -a(i, j);
    }
  return a;
}

model::QuadraticModel random_model(std::mt19937_64& gen, Index n, bool degenerate = false) {
  std::normal_distribution<double> gauss;
  Mat a = random_antisymmetric(gen, n);
  Mat g1(n, n), g2(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      g1(i, j) = gauss(gen);
      g2(i, j) = gauss(gen);
    }
  Mat v1 = g1.transpose() * g1 + 0.1 * Mat::Identity(n, n);
  Mat v2 = 0.5 * (g2 + g2.transpose());
  if (degenerate) {
    Vec y(n);
    for (Index i = 0; i < n; ++i) y[i] = gauss(gen);
    y.normalize();
    Mat p = Mat::Identity(n, n) - y * y.transpose();
    v1 = p * v1 * p;
    v2 = p * v2 * p;
  }
  return model::QuadraticModel(a, v1.cast<Cplx>() + kImagUnit * v2.cast<Cplx>());
}

double nearest_distance(Cplx z, const std::vector<Cplx>& list) {
  double best = 1e300;
  for (Cplx w : list) best = std::min(best, std::abs(z - w));
  return best;
}

potential::PotentialSpec scalar_well(Cplx c2) {
  return potential::PotentialSpec(1, Vec::Zero(1), Mat::Zero(1, 1), {{c2, {2}, 0}},
                                  {Vec::Zero(1)});
}

// Criterion 1: the exact eigenvalue lattice of three quadratic models
// reproduces the Hermite-Galerkin oracle on the 8 lowest points, and the
// match survives doubling the truncation degree.
bool lattice_matches_galerkin(std::string& detail) {
  struct Bench {
    model::QuadraticModel model;
    int degree;
  };
  Mat half_j(2, 2);
  half_j << 0, 0.5, -0.5, 0;
  // degrees chosen so the coarse run already sits below 1e-10 on the 8
  // lowest points; the rotated well converges slowest in a fixed basis
  std::vector<Bench> benches{
      {model::QuadraticModel(Mat::Zero(1, 1), CMat::Ones(1, 1)), 40},
      {model::QuadraticModel(Mat::Zero(1, 1), Cplx(0, 2) * CMat::Ones(1, 1)), 60},
      {model::QuadraticModel(half_j, CMat::Identity(2, 2)), 20},
  };
  double worst = 0.0;
  for (const auto& bench : benches) {
    double bound = 4.0 * model::spectral_gap(bench.model).first.real();
    auto lattice = model::model_spectrum(bench.model, bound);
    while (lattice.size() < 8) {
      bound *= 2.0;
      lattice = model::model_spectrum(bench.model, bound);
    }
    auto coarse = oracles::hermite_galerkin_spectrum(bench.model, bench.degree);
    auto fine = oracles::hermite_galerkin_spectrum(bench.model, 2 * bench.degree);
    for (int k = 0; k < 8; ++k) {
      Cplx mu = lattice[size_t(k)].value;
      worst = std::max(worst, nearest_distance(mu, coarse));
      worst = std::max(worst, nearest_distance(mu, fine));
    }
  }
  detail = fmt("worst lattice-to-oracle distance %.2e over 3 models x 8 points", worst);
  return worst < 1e-6;
}

// Criterion 2: over 500 random models the singular space is trivial
// exactly when V is nonsingular, and the closed-form and bracket-kernel
// constructions give the same subspace.
bool singular_space_dichotomy(std::string& detail) {
  std::mt19937_64 gen(0x51dece);
  int degenerate_count = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Index n = 1 + trial % 3;
    bool degenerate = trial % 5 == 0;
    auto m = random_model(gen, n, degenerate);
    double sigma_min = Eigen::JacobiSVD<CMat>(m.V).singularValues().minCoeff();
    auto closed = model::singular_space_closed_form(m);
    auto iterative = model::singular_space_iterative(m, int(2 * n));
    if ((sigma_min > 1e-8) != (closed.dimension() == 0)) {
      detail = fmt("dichotomy broken at trial %d: sigma_min %.2e, dim %d", trial, sigma_min,
                   int(closed.dimension()));
      return false;
    }
    if (closed.dimension() != iterative.dimension()) {
      detail = fmt("route dimensions differ at trial %d", trial);
      return false;
    }
    if (closed.dimension() > 0) {
      ++degenerate_count;
      worst_gap = std::max(worst_gap,
                           linalg::containment_residual(closed.vectors, iterative.vectors));
    }
  }
  detail = fmt("500 models, %d with nontrivial space, worst containment residual %.2e",
               degenerate_count, worst_gap);
  return worst_gap < 1e-10;
}

// Criterion 3: trace-integral multiplicity, determinant winding, and the
// clustered pencil multiplicities agree, including an engineered double
// root.
bool multiplicity_triple_agreement(std::string& detail) {
  std::mt19937_64 gen(0x30c0de);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_model(gen, 1 + trial % 3);
    auto roots = model::pencil_eigenvalues(m);
    for (const auto& root : roots) {
      double radius = 0.05 * std::max(1.0, std::abs(root.lambda));
      int expected = 0;
      bool safe = true;
      for (const auto& other : roots) {
        double dist = std::abs(other.lambda - root.lambda);
        if (dist < radius) expected += other.multiplicity;
        if (dist > 0.8 * radius && dist < 1.2 * radius) safe = false;
      }
      if (!safe) continue;
      ++checked;
      int by_contour = model::pencil_multiplicity_contour(m, root.lambda, radius, 256);
      int by_winding = oracles::det_winding(m, root.lambda, radius, 256);
      if (by_contour != expected || by_winding != expected) {
        detail = fmt("trial %d: contour %d, winding %d, cluster %d", trial, by_contour,
                     by_winding, expected);
        return false;
      }
    }
  }
  model::QuadraticModel dbl(Mat::Zero(2, 2), CMat::Identity(2, 2));
  Cplx root = Cplx(0.0, 1.0 / std::sqrt(2.0));
  auto roots = model::pencil_eigenvalues(dbl);
  auto top = std::find_if(roots.begin(), roots.end(),
                          [&](const model::PencilRoot& r) { return r.lambda.imag() > 0; });
  int cluster = top->multiplicity;
  int by_contour = model::pencil_multiplicity_contour(dbl, root, 0.1, 256);
  int by_winding = oracles::det_winding(dbl, root, 0.1, 256);
  if (cluster != 2 || by_contour != 2 || by_winding != 2) {
    detail = fmt("double root: contour %d, winding %d, cluster %d", by_contour, by_winding,
                 cluster);
    return false;
  }
  detail = fmt("%d random contours agree; engineered double root counted as 2", checked);
  return checked > 100;
}

// Criterion 4: the smallest eigenvalue of the discretized cubic-tailed
// well tracks h * sqrt(1+i) with a deviation that shrinks polynomially
// in h.
bool leading_eigenvalue_scaling(std::string& detail) {
  potential::PotentialSpec spec(1, Vec::Zero(1), Mat::Zero(1, 1),
                                {{Cplx(1.0, 1.0), {2}, 0}, {Cplx(1.0, 0.0), {3}, 1}},
                                {Vec::Zero(1)});
  auto minima = potential::verify_minima(spec, {Vec::Zero(1)});
  auto table = spectral::leading_eigenvalue_asymptotics(spec, minima, {0.1, 0.05, 0.025},
                                                        discretize::Grid(1, 8.0, 800), 3.0);
  const Cplx reference(1.09868, 0.45509);
  double mu_gap = std::abs(table.mu0 - reference);
  double final_dev = table.rows.back().deviation;
  detail = fmt("slope %.3f in [0.7, 1.3]; |lambda0/h - mu0| = %.4f at h=0.025; mu0 off by %.1e",
               table.fitted_slope, final_dev, mu_gap);
  return table.fitted_slope > 0.7 && table.fitted_slope < 1.3 && final_dev < 0.05 &&
         mu_gap < 1e-4;
}

// Criterion 5: every computed contour projection is idempotent, has unit
// trace, and is stable under quadrature doubling; its norm is finite and
// reported.
bool projection_quality(std::string& detail) {
  discretize::Grid grid(1, 4.5, 300);
  std::string norms;
  for (Cplx c2 : {Cplx(1.0, 1.0), Cplx(1.0, 0.0)}) {
    auto op = discretize::assemble(scalar_well(c2), grid, 0.05);
    auto pairs = spectral::eigs_in_disc(op, 8.0);
    std::vector<Cplx> spectrum;
    for (const auto& p : pairs) spectrum.push_back(p.lambda);
    size_t centers = c2.imag() == 0.0 ? 1 : 2;
    for (size_t k = 0; k < centers; ++k) {
      auto diag = spectral::spectral_projection(op, pairs[k].lambda, 0.5 * op.h, 32, spectrum);
      norms += fmt(" %.4f", diag.op_norm);
      if (!(diag.idem_residual < 1e-4 && std::abs(diag.trace - Cplx(1.0)) < 1e-4 &&
            diag.doubling_drift < 1e-6 && std::isfinite(diag.op_norm))) {
        detail = fmt("projection at %.4f%+.4fi: idem %.1e, trace err %.1e, drift %.1e",
                     pairs[k].lambda.real(), pairs[k].lambda.imag(), diag.idem_residual,
                     std::abs(diag.trace - Cplx(1.0)), diag.doubling_drift);
        return false;
      }
    }
  }
  detail = "3 projections pass idempotency/trace/doubling gates; norms" + norms;
  return true;
}

// Criterion 6: after removing the ground projection the flow decays at
// the next lattice rate, clearly beating the reference envelope a=2; the
// selfadjoint control reproduces its exact gap 3.
bool remainder_decay_rate(std::string& detail) {
  discretize::Grid grid(1, 4.5, 300);
  auto times = semigroup::default_time_grid();
  std::mt19937_64 gen(0xdeca);
  double rates[2] = {0.0, 0.0};
  int idx = 0;
  for (Cplx c2 : {Cplx(1.0, 1.0), Cplx(1.0, 0.0)}) {
    auto op = discretize::assemble(scalar_well(c2), grid, 0.05);
    auto pairs = spectral::eigs_in_disc(op, 8.0);
    std::vector<Cplx> spectrum;
    for (const auto& p : pairs) spectrum.push_back(p.lambda);
    auto diag = spectral::spectral_projection(op, pairs[0].lambda, 0.5 * op.h, 32, spectrum);
    semigroup::DensePropagator prop(op, times);
    std::vector<CMat> pmats{semigroup::projection_matrix(*diag.action)};
    std::vector<double> rems;
    for (double t : times)
      rems.push_back(semigroup::remainder_norm(prop, t, op.h, {pairs[0].lambda}, pmats, gen));
    auto series = semigroup::decay_rate_fit(times, rems, 2.0);
    for (size_t i = 0; i < series.times.size(); ++i)
      if (series.remainder_norms[i] > std::exp(-2.0 * series.times[i])) {
        detail = fmt("envelope broken at t=%.2f", series.times[i]);
        return false;
      }
    rates[idx++] = series.fitted_rate;
  }
  detail = fmt("fitted rate %.3f >= 1.9 (next lattice rate 3.296); selfadjoint control %.3f",
               rates[0], rates[1]);
  return rates[0] >= 1.9 && std::abs(rates[1] - 3.0) <= 0.1;
}

// Criterion 7: along the vertical line through the spectral gap the
// resolvent norm scales like 1/h: the compensated sup varies by less
// than a factor 2 over a 4x range of h.
bool gap_line_resolvent_scaling(std::string& detail) {
  model::QuadraticModel qm(Mat::Zero(1, 1), 2.0 * Cplx(1.0, 1.0) * CMat::Ones(1, 1));
  std::vector<Cplx> mus;
  for (const auto& me : model::model_spectrum(qm, 12.0)) mus.push_back(me.value);
  discretize::Grid grid(1, 8.0, 800);
  double lo = 1e300, hi = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    auto op = discretize::assemble(scalar_well(Cplx(1.0, 1.0)), grid, h);
    double sup = spectral::line_sup_resolvent(op, mus, 2.0, -5.0 * h, 5.0 * h, 11);
    lo = std::min(lo, sup);
    hi = std::max(hi, sup);
  }
  detail = fmt("sup of h*norm in [%.6f, %.6f], ratio %.6f < 2", lo, hi, hi / lo);
  return hi / lo < 2.0;
}

// Criterion 8: on the imaginary axis the compensated product
// norm * h^(2/3) * s^(1/3) stays within 3x of its median over a 3x3
// (h, s) grid: bounded, with no growth as h shrinks.
bool parabolic_region_bound(std::string& detail) {
  discretize::Grid grid(1, 8.0, 800);
  std::vector<double> products;
  for (double h : {0.1, 0.05, 0.025}) {
    auto op = discretize::assemble(scalar_well(Cplx(1.0, 1.0)), grid, h);
    for (const auto& row : spectral::parabolic_probe(op, {1.0, 2.0, 4.0}, 10.0))
      products.push_back(row.compensated);
  }
  std::vector<double> sorted = products;
  std::nth_element(sorted.begin(), sorted.begin() + 4, sorted.end());
  double median = sorted[4];
  double lo = *std::min_element(products.begin(), products.end());
  double hi = *std::max_element(products.begin(), products.end());
  detail = fmt("9 compensated products in [%.4f, %.4f], median %.4f, spread within %.2fx",
               lo, hi, median, std::max(hi / median, median / lo));
  return hi < 3.0 * median && lo > median / 3.0;
}

// Criterion 9: the discrete flow contracts and composes: norms never
// grow past 1 + 1e-8 and split propagation agrees with one step to 1e-6,
// on 50 random vectors.
bool contraction_and_composition(std::string& detail) {
  auto op = discretize::assemble(scalar_well(Cplx(1.0, 1.0)), discretize::Grid(1, 4.5, 300),
                                 0.05);
  std::mt19937_64 gen(0xf10e);
  std::normal_distribution<double> gauss;
  double worst_excess = -1.0, worst_split = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    CVec v(300);
    for (Index i = 0; i < 300; ++i) v[i] = Cplx(gauss(gen), gauss(gen));
    for (double t : {0.1, 1.0, 10.0})
      worst_excess = std::max(worst_excess,
                              semigroup::propagate(op, v, t).norm() / v.norm() - 1.0);
    CVec split = semigroup::propagate(op, semigroup::propagate(op, v, 0.7), 0.55);
    CVec once = semigroup::propagate(op, v, 1.25);
    worst_split = std::max(worst_split, (split - once).norm() / once.norm());
  }
  detail = fmt("worst contraction excess %.1e <= 1e-8; worst composition gap %.1e <= 1e-6",
               worst_excess, worst_split);
  return worst_excess <= 1e-8 && worst_split <= 1e-6;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "quadratic lattice matches the Hermite-Galerkin oracle", 60, lattice_matches_galerkin},
    {2, "singular space is trivial exactly when V is nonsingular", 60, singular_space_dichotomy},
    {3, "contour, winding, and cluster multiplicities agree", 60, multiplicity_triple_agreement},
    {4, "leading eigenvalue tracks h times the model value", 300, leading_eigenvalue_scaling},
    {5, "contour projections are idempotent with unit trace", 120, projection_quality},
    {6, "semigroup remainder decays at the spectral gap rate", 600, remainder_decay_rate},
    {7, "resolvent norm on the gap line scales like 1/h", 180, gap_line_resolvent_scaling},
    {8, "imaginary-axis resolvent obeys the compensated bound", 300, parabolic_region_bound},
    {9, "discrete flow is a contraction with the composition law", 60,
     contraction_and_composition},
};

}  // namespace

int criterion_count() { return int(std::size(kCriteria)); }

CriterionResult run_criterion(int id) {
  if (id < 1 || id > criterion_count())
    throw PreconditionError("run_criterion: id out of range");
  const Criterion& criterion = kCriteria[id - 1];
  CriterionResult result;
  result.id = criterion.id;
  result.name = criterion.name;
  result.budget_seconds = criterion.budget_seconds;
  auto start = std::chrono::steady_clock::now();
  try {
    result.pass = criterion.run(result.detail);
  } catch (const std::exception& err) {
    result.pass = false;
    result.detail = fmt("threw: %s", err.what());
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.seconds > result.budget_seconds) {
    result.pass = false;
    result.detail += fmt("; over budget %.0fs", result.budget_seconds);
  }
  return result;
}

std::vector<CriterionResult> run_all() {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= criterion_count(); ++id) results.push_back(run_criterion(id));
  return results;
}

}  // namespace nsa::checks
