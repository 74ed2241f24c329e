#pragma once

#include <Eigen/SparseCore>

#include "nsa/potential.hpp"
#include "nsa/types.hpp"

namespace nsa::discretize {

using SpMat = Eigen::SparseMatrix<Cplx>;

/// Interior nodes of a Dirichlet box [-L, L]^n, n in {1, 2}. Flat index
/// runs fastest along the last axis; spacing is 2L/(N+1) so the first and
/// last interior nodes sit one spacing inside the boundary.
struct Grid {
  Index dim;
  double half_width;
  Index points_per_dim;

  Grid(Index dim, double half_width, Index points_per_dim);

  double spacing() const { return 2.0 * half_width / double(points_per_dim + 1); }
  Index size() const;
  Vec node(Index flat) const;
};

/// Sparse stencil matrix for (hD - A)^2 + V on a grid. The five-point
/// (three-point in 1D) pattern makes the matrix exactly Hermitian whenever
/// V is real; the imaginary part of V sits on the diagonal.
struct GridOperator {
  double h;
  SpMat matrix;
  Grid grid;
  potential::PotentialSpec spec;
  /// set when delta^2 > h/4: the grid cannot resolve the semiclassical
  /// wavelength and eigenvalue targets of size O(h) lose accuracy
  bool resolution_warning;
};

/// Central-difference discretization of
///   sum_j [ -h^2 d_j^2 + i h (A_j d_j + d_j A_j) + A_j^2 ] + V
/// with A_j averaged onto edge midpoints from its node values, which is
/// what keeps the first-order term skew-symmetric (times i: Hermitian).
GridOperator assemble(const potential::PotentialSpec& spec, const Grid& grid, double h);

}  // namespace nsa::discretize
