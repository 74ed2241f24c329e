#pragma once

#include <memory>
#include <random>
#include <vector>

#include "nsa/discretize.hpp"
#include "nsa/spectral.hpp"
#include "nsa/types.hpp"

namespace nsa::semigroup {

/// e^{-t M/h} v by Arnoldi approximation of the exponential action with
/// adaptive substepping (local error target 1e-10 relative per step).
/// Throws StepFailure when halving the substep 60 times cannot reach it.
CVec propagate(const discretize::GridOperator& op, const CVec& v, double t);

/// Adjoint flow e^{-t M^H/h} v, needed by randomized norm estimates.
CVec propagate_adjoint(const discretize::GridOperator& op, const CVec& v, double t);

/// Geometric time grid 0.5 * sqrt(2)^k, k = 0..8: covers the transient
/// and the asymptotic regime, and every second point doubles the
/// previous one so a dense table needs only two genuine exponentials.
std::vector<double> default_time_grid();

/// Table of dense propagators e^{-t M/h} at fixed times (dimension
/// <= 2000). Times that double an earlier entry are built by squaring.
class DensePropagator {
 public:
  DensePropagator(const discretize::GridOperator& op, const std::vector<double>& times);

  const std::vector<double>& times() const { return times_; }
  const CMat& at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<CMat> mats_;
};

/// Densified contour projector: the projection applied to every identity
/// column.
CMat projection_matrix(const spectral::SpectralProjection& pi);

/// || e^{-t M/h} - sum_k e^{-t lambda_k/h} P_k || with the dense
/// propagator table, by randomized power iteration on the remainder.
double remainder_norm(const DensePropagator& prop, double t, double h,
                      const std::vector<Cplx>& lambdas, const std::vector<CMat>& proj_mats,
                      std::mt19937_64& gen);

/// Matrix-free variant driven by the Krylov propagator; 100 propagations
/// per call, so reserve it for cross-checks.
double remainder_norm(const discretize::GridOperator& op, double t,
                      const std::vector<Cplx>& lambdas,
                      const std::vector<std::shared_ptr<const spectral::SpectralProjection>>& projs,
                      std::mt19937_64& gen);

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> remainder_norms;
  double fitted_rate = 0.0;
  double reference_a = 0.0;
  double fit_r_squared = 0.0;
  double max_line_deviation = 0.0;  // worst |log remainder - fit| over the window
};

/// Least-squares exponential rate of a remainder series. Requires at
/// least 5 samples above 10x the norm-estimation noise floor of 1e-8;
/// throws NoiseFloor otherwise. Samples below the floor are dropped.
DecaySeries decay_rate_fit(const std::vector<double>& times,
                           const std::vector<double>& remainder_norms, double reference_a);

}  // namespace nsa::semigroup
