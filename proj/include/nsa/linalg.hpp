#pragma once

#include <functional>
#include <random>
#include <vector>

#include "nsa/types.hpp"

namespace nsa::linalg {

using ApplyFn = std::function<CVec(const CVec&)>;

/// Randomized spectral-norm estimate of a linear map given its action and
/// the action of its adjoint: power iteration on X^H X started from
/// `probes` Gaussian vectors, `iters` sweeps each, best value kept.
double estimate_operator_norm(Index dim, const ApplyFn& apply, const ApplyFn& apply_adjoint,
                              std::mt19937_64& gen, int probes = 5, int iters = 10);

/// Orthonormal basis of the near-kernel of a real symmetric matrix:
/// eigenvectors whose |eigenvalue| <= tol * max(1, ||M||). Columns of the
/// result span the kernel; zero columns when the kernel is trivial.
Mat symmetric_kernel_basis(const Mat& m, double tol);

/// Largest principal-angle sine between the column spans of two
/// orthonormal bases (0 when the spans coincide; 1 when dimensions differ).
/// Floored near sqrt(machine eps) for coinciding spans; use
/// containment_residual when tighter agreement must be certified.
double subspace_distance(const Mat& a, const Mat& b);

/// Mutual-containment residual of two column spans: the largest entry of
/// either basis left unexplained by projecting onto the other span.
/// Linear in rounding error, so coinciding spans score near machine eps.
double containment_residual(const Mat& a, const Mat& b);

/// Orthonormalize columns, dropping directions below a rank tolerance.
Mat orthonormal_columns(const Mat& m, double tol = 1e-12);

/// Greedy nearest-neighbor pairing of two equally sized complex lists.
/// Returns the matched distance per pair, largest last.
std::vector<double> greedy_pair_distances(std::vector<Cplx> a, std::vector<Cplx> b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double max_abs_residual = 0.0;
};

/// Least-squares straight line y = slope*x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nsa::linalg
