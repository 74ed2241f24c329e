#include "nsa/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "nsa/errors.hpp"
#include "nsa/linalg.hpp"
#include "nsa/oracles.hpp"

namespace nsa::semigroup {

using discretize::GridOperator;
using discretize::SpMat;

namespace {

// e^{-t A} v for the matrix-free action of A, Arnoldi with Expokit-style
// local error control: the defect of the Krylov exponential is estimated
// by the last-row magnitude beta * h_{m+1,m} * |E_{m,1}|.
CVec krylov_expm_apply(const std::function<CVec(const CVec&)>& apply_a, CVec v, double t,
                       Index dim) {
  if (t < 0.0) throw PreconditionError("propagate: negative time");
  if (t == 0.0) return v;

  const int m = int(std::min<Index>(dim, 36));
  const double tol = 1e-10;
  double remaining = t;
  double tau = t;
  while (remaining > 1e-16 * t) {
    double beta = v.norm();
    if (beta == 0.0) return v;

    CMat basis(dim, m + 1);
    CMat hess = CMat::Zero(m + 1, m);
    basis.col(0) = v / beta;
    int steps = m;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      CVec w = apply_a(basis.col(j));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          Cplx coef = basis.col(i).dot(w);
          hess(i, j) += coef;
          w -= coef * basis.col(i);
        }
      double wn = w.norm();
      hess(j + 1, j) = wn;
      if (wn < 1e-12 * std::abs(hess(j, j)) + 1e-300) {
        steps = j + 1;
        breakdown = true;
        break;
      }
      basis.col(j + 1) = w / wn;
    }

    tau = std::min(tau, remaining);
    if (breakdown) tau = remaining;  // invariant subspace: exact for any step
    const double skip = breakdown ? 0.0 : std::abs(hess(steps, steps - 1));
    int halvings = 0;
    for (;; ++halvings) {
      if (halvings > 60) throw StepFailure("propagate: local error will not converge");
      CMat e = (-tau * hess.topLeftCorner(steps, steps)).exp();
      CVec coef = beta * e.col(0);
      double out_norm = coef.norm();  // = step output norm, basis is orthonormal
      double err = beta * skip * std::abs(e(steps - 1, 0));
      // error is held relative to what survives the step, and the decay
      // per substep is capped at 10x so the estimate stays trustworthy
      bool too_deep = !breakdown && out_norm < 0.1 * beta;
      if ((err <= tol * out_norm && !too_deep) || breakdown) {
        v = basis.leftCols(steps) * coef;
        remaining -= tau;
        if (err < 0.01 * tol * out_norm) tau *= 2.0;
        break;
      }
      tau *= 0.5;
    }
    if (breakdown) break;  // took the whole remaining step exactly
  }
  return v;
}

}  // namespace

CVec propagate(const GridOperator& op, const CVec& v, double t) {
  if (v.size() != op.matrix.rows()) throw PreconditionError("propagate: vector size mismatch");
  const double inv_h = 1.0 / op.h;
  auto apply = [&](const CVec& x) { return CVec(inv_h * (op.matrix * x)); };
  return krylov_expm_apply(apply, v, t, v.size());
}

CVec propagate_adjoint(const GridOperator& op, const CVec& v, double t) {
  if (v.size() != op.matrix.rows()) throw PreconditionError("propagate: vector size mismatch");
  const SpMat madj = op.matrix.adjoint();
  const double inv_h = 1.0 / op.h;
  auto apply = [&](const CVec& x) { return CVec(inv_h * (madj * x)); };
  return krylov_expm_apply(apply, v, t, v.size());
}

std::vector<double> default_time_grid() {
  std::vector<double> times;
  for (int k = 0; k <= 8; ++k) times.push_back(0.5 * std::pow(std::sqrt(2.0), k));
  return times;
}

DensePropagator::DensePropagator(const GridOperator& op, const std::vector<double>& times)
    : times_(times) {
  if (op.matrix.rows() > 2000)
    throw PreconditionError("DensePropagator: dimension capped at 2000");
  if (times_.empty()) throw PreconditionError("DensePropagator: empty time grid");
  for (size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] < 0.0) throw PreconditionError("DensePropagator: negative time");
    if (i > 0 && times_[i] <= times_[i - 1])
      throw PreconditionError("DensePropagator: times must increase");
  }
  const CMat gen = CMat(op.matrix) * Cplx(-1.0 / op.h);
  for (size_t i = 0; i < times_.size(); ++i) {
    double t = times_[i];
    long half = -1;
    for (size_t j = 0; j < i; ++j)
      if (std::abs(t - 2.0 * times_[j]) <= 1e-12 * t) half = long(j);
    if (half >= 0)
      mats_.push_back(mats_[size_t(half)] * mats_[size_t(half)]);
    else
      mats_.push_back(oracles::dense_expm(gen, t));
  }
}

const CMat& DensePropagator::at(double t) const {
  for (size_t i = 0; i < times_.size(); ++i)
    if (std::abs(times_[i] - t) <= 1e-12 * std::max(1.0, t)) return mats_[i];
  throw PreconditionError("DensePropagator: time not in the table");
}

CMat projection_matrix(const spectral::SpectralProjection& pi) {
  CMat out(pi.dim(), pi.dim());
  for (Index j = 0; j < pi.dim(); ++j) out.col(j) = pi.apply(CVec::Unit(pi.dim(), j));
  return out;
}

double remainder_norm(const DensePropagator& prop, double t, double h,
                      const std::vector<Cplx>& lambdas, const std::vector<CMat>& proj_mats,
                      std::mt19937_64& gen) {
  if (lambdas.size() != proj_mats.size())
    throw PreconditionError("remainder_norm: eigenvalue/projection count mismatch");
  CMat rem = prop.at(t);
  for (size_t k = 0; k < lambdas.size(); ++k)
    rem -= std::exp(-t * lambdas[k] / h) * proj_mats[k];
  const CMat rem_h = rem.adjoint();
  auto apply = [&](const CVec& v) { return CVec(rem * v); };
  auto apply_h = [&](const CVec& v) { return CVec(rem_h * v); };
  return linalg::estimate_operator_norm(rem.rows(), apply, apply_h, gen);
}

double remainder_norm(const GridOperator& op, double t, const std::vector<Cplx>& lambdas,
                      const std::vector<std::shared_ptr<const spectral::SpectralProjection>>& projs,
                      std::mt19937_64& gen) {
  if (lambdas.size() != projs.size())
    throw PreconditionError("remainder_norm: eigenvalue/projection count mismatch");
  auto apply = [&](const CVec& v) {
    CVec out = propagate(op, v, t);
    for (size_t k = 0; k < projs.size(); ++k)
      out -= std::exp(-t * lambdas[k] / op.h) * projs[k]->apply(v);
    return out;
  };
  auto apply_h = [&](const CVec& v) {
    CVec out = propagate_adjoint(op, v, t);
    for (size_t k = 0; k < projs.size(); ++k)
      out -= std::conj(std::exp(-t * lambdas[k] / op.h)) * projs[k]->apply_adjoint(v);
    return out;
  };
  return linalg::estimate_operator_norm(op.matrix.rows(), apply, apply_h, gen);
}

DecaySeries decay_rate_fit(const std::vector<double>& times,
                           const std::vector<double>& remainder_norms, double reference_a) {
  if (times.size() != remainder_norms.size())
    throw PreconditionError("decay_rate_fit: length mismatch");
  const double floor = 1e-8;
  std::vector<double> ts, logs;
  for (size_t i = 0; i < times.size(); ++i) {
    if (remainder_norms[i] <= 0.0)
      throw PreconditionError("decay_rate_fit: remainder norms must be positive");
    if (remainder_norms[i] < 10.0 * floor) continue;
    ts.push_back(times[i]);
    logs.push_back(std::log(remainder_norms[i]));
  }
  if (ts.size() < 5)
    throw NoiseFloor("decay_rate_fit: fewer than 5 samples above 10x the noise floor");

  auto fit = linalg::fit_line(ts, logs);
  DecaySeries series;
  series.times = ts;
  for (double lg : logs) series.remainder_norms.push_back(std::exp(lg));
  series.fitted_rate = -fit.slope;
  series.reference_a = reference_a;
  series.fit_r_squared = fit.r_squared;
  series.max_line_deviation = fit.max_abs_residual;
  return series;
}

}  // namespace nsa::semigroup
