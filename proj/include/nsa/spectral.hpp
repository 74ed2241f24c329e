#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "nsa/discretize.hpp"
#include "nsa/potential.hpp"
#include "nsa/types.hpp"

namespace nsa::spectral {

/// One converged eigenvalue of a grid operator with its unit eigenvector
/// and the directly measured residual ||Mv - lambda v||.
struct Eigenpair {
  Cplx lambda;
  CVec vector;
  double residual;
};

/// All eigenvalues of the grid operator in the open disc |lambda| < c*h,
/// by shift-invert Arnoldi at a fixed covering of the disc, deduplicated
/// and sorted by real part. Each candidate is kept only when its residual
/// beats 1e-8 times the matrix scale. The internal search reaches 15%
/// past the disc so boundary eigenvalues cannot hide.
std::vector<Eigenpair> eigs_in_disc(const discretize::GridOperator& op, double c,
                                    int max_count = 64);

struct AsymptoticsRow {
  double h;
  Cplx scaled;       // lambda0(h) / h
  double deviation;  // |lambda0(h)/h - mu0|
};

struct AsymptoticsTable {
  Cplx mu0;
  std::vector<AsymptoticsRow> rows;
  double fitted_slope;  // log deviation against log h
};

/// Tracks the eigenvalue nearest h*mu0 across the h list, where mu0 is
/// the bottom lattice point of the quadratic models at the verified
/// minima. Requires mu0 simple with gap > 0.1 to the next lattice point.
/// Throws AmbiguousPairing when two numerical eigenvalues sit within
/// 1e-3*h of the target.
AsymptoticsTable leading_eigenvalue_asymptotics(const potential::PotentialSpec& spec,
                                                const std::vector<potential::MinimumPoint>& minima,
                                                const std::vector<double>& h_list,
                                                const discretize::Grid& grid, double c);

struct ResolventSample {
  Cplx z;
  double norm;
  std::string method;
};

/// ||(M-z)^{-1}|| = 1/sigma_min(M-z) by power iteration on the inverse
/// Gram map, two sparse triangular solves per step. A singular
/// factorization reports norm = infinity instead of throwing.
ResolventSample resolvent_norm(const discretize::SpMat& m, Cplx z);
ResolventSample resolvent_norm(const discretize::GridOperator& op, Cplx z);

/// Dense cross-check of the same quantity via full SVD; dimension <= 2000.
ResolventSample resolvent_norm_dense(const discretize::SpMat& m, Cplx z);
ResolventSample resolvent_norm_dense(const discretize::GridOperator& op, Cplx z);

/// sup over `samples` points z = a*h + i*s, s uniform in [s_min, s_max],
/// of h * ||(M-z)^{-1}||. The line must keep distance > 0.05 from every
/// Re mu of the model lattice (model_mus), or the sup would track a pole.
double line_sup_resolvent(const discretize::GridOperator& op, const std::vector<Cplx>& model_mus,
                          double a, double s_min, double s_max, int samples);

struct ParabolicRow {
  double h;
  double s;
  double norm;
  double compensated;  // norm * h^{2/3} * s^{1/3}
};

/// Resolvent norms on the imaginary axis z = i*s for s >= c*h, with the
/// compensated product that the parabolic-region bound predicts to stay
/// O(1) as h shrinks.
std::vector<ParabolicRow> parabolic_probe(const discretize::GridOperator& op,
                                          const std::vector<double>& s_list, double c = 10.0);

/// Riesz projector onto the spectrum inside the circle |z - center| =
/// radius, as a trapezoidal contour quadrature with one sparse
/// factorization per node. Matrix-free: only apply/apply_adjoint actions.
class SpectralProjection {
 public:
  SpectralProjection(const discretize::SpMat& m, Cplx center, double radius, int nodes);

  Index dim() const { return dim_; }
  int nodes() const { return int(weights_.size()); }
  Cplx center() const { return center_; }
  double radius() const { return radius_; }

  CVec apply(const CVec& v) const;
  CVec apply_adjoint(const CVec& v) const;

  /// Exact trace by accumulating tr((z_m - M)^{-1}); dimension <= 2000.
  Cplx exact_trace() const;

 private:
  Index dim_;
  Cplx center_;
  double radius_;
  std::vector<Cplx> weights_;
  std::vector<std::unique_ptr<Eigen::SparseLU<discretize::SpMat>>> lus_;
};

struct ProjectionDiagnostics {
  Cplx lambda_center;
  double radius;
  int nodes;
  double idem_residual;   // ||Pi^2 - Pi|| estimate
  Cplx trace;             // NaN when the dimension exceeds the exact-trace cap
  double op_norm;         // ||Pi|| estimate
  double doubling_drift;  // max probe drift when nodes double
  double commutator;      // ||M Pi - Pi M|| estimate / matrix scale
  std::shared_ptr<const SpectralProjection> action;
};

/// Builds the projector for the eigenvalue(s) inside |z - lambda| <
/// radius and certifies it: the annulus [0.5, 1.5]*radius must be free of
/// known spectrum, node doubling must move probe images by < 1e-6, and
/// the randomized idempotency / commutator / norm estimates are reported.
ProjectionDiagnostics spectral_projection(const discretize::GridOperator& op, Cplx lambda,
                                          double radius, int nodes,
                                          const std::vector<Cplx>& known_spectrum,
                                          uint64_t probe_seed = 0x5eed);

}  // namespace nsa::spectral
