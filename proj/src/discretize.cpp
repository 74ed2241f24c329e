#include "nsa/discretize.hpp"

#include <vector>

#include "nsa/errors.hpp"

namespace nsa::discretize {

Grid::Grid(Index dim_, double half_width_, Index points_per_dim_)
    : dim(dim_), half_width(half_width_), points_per_dim(points_per_dim_) {
  if (dim != 1 && dim != 2) throw PreconditionError("Grid: dim must be 1 or 2");
  if (half_width <= 0.0) throw PreconditionError("Grid: half_width must be positive");
  if (points_per_dim < 16) throw PreconditionError("Grid: need at least 16 points per axis");
  if (dim == 2 && points_per_dim > 256)
    throw PreconditionError("Grid: 2D capped at 256 points per axis");
}

Index Grid::size() const { return dim == 1 ? points_per_dim : points_per_dim * points_per_dim; }

Vec Grid::node(Index flat) const {
  const double delta = spacing();
  Vec x(dim);
  if (dim == 1) {
    x[0] = -half_width + double(flat + 1) * delta;
  } else {
    x[0] = -half_width + double(flat / points_per_dim + 1) * delta;
    x[1] = -half_width + double(flat % points_per_dim + 1) * delta;
  }
  return x;
}

GridOperator assemble(const potential::PotentialSpec& spec, const Grid& grid, double h) {
  if (spec.dim != grid.dim) throw PreconditionError("assemble: spec and grid dimension differ");
  if (h <= 0.0 || h > 1.0) throw PreconditionError("assemble: h must lie in (0, 1]");

  const Index n = grid.dim;
  const Index npts = grid.points_per_dim;
  const Index size = grid.size();
  const double delta = grid.spacing();
  const double kin = h * h / (delta * delta);

  std::vector<Vec> a(static_cast<size_t>(size));
  std::vector<Cplx> v(static_cast<size_t>(size));
  for (Index k = 0; k < size; ++k) {
    auto ev = potential::evaluate(spec, grid.node(k));
    a[size_t(k)] = ev.a;
    v[size_t(k)] = ev.v;
  }

  std::vector<Eigen::Triplet<Cplx>> trip;
  trip.reserve(size_t(size) * size_t(2 * n + 1));
  for (Index k = 0; k < size; ++k)
    trip.emplace_back(k, k, Cplx(2.0 * double(n) * kin + a[size_t(k)].squaredNorm()) + v[size_t(k)]);

  // one pass per axis over forward edges (k, k2); the midpoint average
  // abar enters both triangle entries with opposite sign on i, so the
  // magnetic block is Hermitian by construction
  for (Index axis = 0; axis < n; ++axis) {
    const Index stride = (n == 1 || axis == 1) ? 1 : npts;
    for (Index k = 0; k < size; ++k) {
      Index along = (n == 1) ? k : (axis == 0 ? k / npts : k % npts);
      if (along + 1 >= npts) continue;
      Index k2 = k + stride;
      double abar = 0.5 * (a[size_t(k)][axis] + a[size_t(k2)][axis]);
      Cplx hop(-kin, h * abar / delta);
      trip.emplace_back(k, k2, hop);
      trip.emplace_back(k2, k, std::conj(hop));
    }
  }

  SpMat m(size, size);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return GridOperator{h, std::move(m), grid, spec, delta * delta > h / 4.0};
}

}  // namespace nsa::discretize
