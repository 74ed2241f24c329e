#pragma once

#include <vector>

#include "nsa/types.hpp"

namespace nsa::model {

/// Quadratic magnetic Schrodinger operator Q = (D - Ax)^2 + (1/2) V x.x,
/// defined by a real magnetic matrix A and a complex symmetric electric
/// matrix V with Re V >= 0. V is symmetrized on construction; the PSD
/// condition on Re V is checked to a 1e-12 eigenvalue floor.
struct QuadraticModel {
  Index dim = 0;
  Mat A;
  CMat V;

  QuadraticModel(Mat a, CMat v);

  bool antisymmetric(double tol = 0.0) const;
};

/// Symmetric part removed from A by the gauge normalization.
struct GaugeRecord {
  Mat S;
};

/// Replace A by its antisymmetric part. The removed symmetric part S acts
/// as a quadratic gauge: the conjugated operator has the same spectrum.
std::pair<QuadraticModel, GaugeRecord> antisymmetrize(const QuadraticModel& model);

/// Hamilton map of the Weyl symbol of Q, blockwise [[-A, I], [A^2 - V/2, -A]].
struct HamiltonMap {
  CMat F;
};

HamiltonMap hamilton_map(const QuadraticModel& model);

/// One root of det T(lambda) = 0 with T(lambda) = lambda^2 + 2 lambda A + V/2.
struct PencilRoot {
  Cplx lambda;
  int multiplicity = 1;
};

/// All 2n pencil roots counted with multiplicity. Computed two ways
/// (Hamilton-map eigenvalues and the first companion linearization of the
/// pencil) and cross-checked to 1e-8 after greedy pairing; roots closer
/// than 1e-6 relative distance are clustered into one root with summed
/// multiplicity. Throws CrossCheckFailure or RealRootError.
std::vector<PencilRoot> pencil_eigenvalues(const QuadraticModel& model);

/// The n roots with Im lambda > 0, multiplicities included.
/// Throws CountMismatch when the positive-half count differs from n.
std::vector<PencilRoot> positive_half(const std::vector<PencilRoot>& roots, Index n);

/// One point of the eigenvalue lattice sum_j (lambda_j / i)(1 + 2 nu_j).
struct ModelEigenvalue {
  Cplx value;
  std::vector<int> index;        // representative nu (lexicographically smallest)
  int multiplicity = 1;          // number of index vectors merged into this value
  std::vector<Cplx> generators;  // the n values lambda_j / i, Re > 0
};

/// Lattice points with Re value <= re_bound, sorted by real part, values
/// agreeing to a relative 1e-9 merged with summed multiplicity. Enumerated
/// best-first on the real part, so only the requested window is visited.
/// Gauge-fixes A internally, as do spectral_gap and sector_angle: the
/// lattice cannot see the symmetric part of A.
std::vector<ModelEigenvalue> model_spectrum(const QuadraticModel& model, double re_bound);

/// Bottom eigenvalue mu0 = sum_j lambda_j / i and the real-part gap tau0
/// to the rest of the lattice.
std::pair<Cplx, double> spectral_gap(const QuadraticModel& model);

/// Half-opening angle of the sector containing the lattice:
/// theta0 = max_j |arg(lambda_j / i)|. Throws SectorViolation when a
/// generator leaves the open right half plane.
double sector_angle(const QuadraticModel& model);

/// Basis of the singular space S in R^{2n}.
struct SingularSpaceBasis {
  enum class Method { closed_form, iterative };
  Mat vectors;  // 2n x dim(S), orthonormal columns; 2n x 0 when S = {0}
  Method method = Method::closed_form;

  Index dimension() const { return vectors.cols(); }
};

/// S = {(y, Ay) : V1 y.y = 0, V2 y = 0}, by real linear algebra on the
/// kernel of V2 and the null directions of V1 restricted to it.
SingularSpaceBasis singular_space_closed_form(const QuadraticModel& model);

/// S from its definition: the common zero set of the iterated bracket
/// forms Y -> H^k_{Im q} Re q (Y), k = 0..max_k, realized as nested
/// kernels. Cross-checked against the closed form; a disagreement throws
/// MismatchWithClosedForm.
SingularSpaceBasis singular_space_iterative(const QuadraticModel& model, int max_k);

/// Matrix of the quadratic form Y -> H^k_{Im q} Re q (Y) on R^{2n}.
/// Exposed for the bracket-chain tests (k = 2 ends the chain).
Mat bracket_form_matrix(const QuadraticModel& model, int k);

/// Algebraic multiplicity of the pencil at lambda0 via the trace integral
/// (1/2 pi i) oint tr(T^{-1} dT) over |lambda - lambda0| = radius,
/// trapezoidal rule with `nodes` points. Throws ContourTooClose when a
/// root sits within 0.1*radius of the contour and NonIntegerResidual when
/// the count fails to round (residual >= 1e-6).
int pencil_multiplicity_contour(const QuadraticModel& model, Cplx lambda0, double radius,
                                int nodes);

}  // namespace nsa::model
