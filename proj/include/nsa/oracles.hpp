#pragma once

#include <vector>

#include "nsa/model.hpp"
#include "nsa/types.hpp"

namespace nsa::oracles {

/// Tensor Hermite basis of total degree <= max_degree in dim variables.
struct HermiteTruncation {
  Index dim = 0;
  int max_degree = 0;

  HermiteTruncation(Index dim, int max_degree);

  Index basis_size() const;
};

/// Eigenvalues of Q in the Hermite-Galerkin truncation of degree <= K,
/// sorted by real part. Matrix elements come from the exact ladder action
/// of x_j and d/dx_j (tridiagonal in each factor, no quadrature); products
/// are assembled on degree <= K+2 and cut back to <= K, so the retained
/// block is the exact Galerkin projection. Only the lowest quarter of the
/// list is trusted; stability under K doubling is the convergence check.
std::vector<Cplx> hermite_galerkin_spectrum(const model::QuadraticModel& model, int max_degree);

/// Trusted prefix length for a Galerkin spectrum of the given basis size.
Index trusted_count(Index basis_size);

/// exp(t m) by scaling and squaring. Dimension capped at 2000.
CMat dense_expm(const CMat& m, double t);

/// Winding number of lambda -> det T(lambda) around 0 along a circle,
/// by argument accumulation node to node. Throws ArgumentJump when a
/// step moves the argument by more than pi/2 (refine nodes), and
/// ContourTooClose on a vanishing determinant at a node.
int det_winding(const model::QuadraticModel& model, Cplx center, double radius, int nodes);

}  // namespace nsa::oracles
