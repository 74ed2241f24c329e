#include "nsa/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "nsa/errors.hpp"

namespace nsa::oracles {

namespace {

// All multi-indices with |alpha| <= max_degree, grouped by ascending total
// degree so a degree cut is a leading block.
std::vector<std::vector<int>> multi_indices(Index n, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(size_t(n), 0);
  auto rec = [&](auto&& self, Index pos, int remaining) -> void {
    if (pos == n - 1) {
      cur[size_t(pos)] = remaining;
      out.push_back(cur);
      return;
    }
    for (int a = 0; a <= remaining; ++a) {
      cur[size_t(pos)] = a;
      self(self, pos + 1, remaining - a);
    }
  };
  for (int d = 0; d <= max_degree; ++d) rec(rec, 0, d);
  return out;
}

// Ladder action in coordinate j on the truncated basis. Hermite functions
// psi_k satisfy x psi_k = (sqrt(k) psi_{k-1} + sqrt(k+1) psi_{k+1})/sqrt(2)
// and d/dx psi_k = (sqrt(k) psi_{k-1} - sqrt(k+1) psi_{k+1})/sqrt(2).
// Raising steps that leave the truncation are dropped; they cannot reach
// the retained block through a product of at most two ladder factors.
Mat ladder(const std::vector<std::vector<int>>& basis, const std::map<std::vector<int>, Index>& at,
           Index j, double raise_sign) {
  const Index m = Index(basis.size());
  Mat op = Mat::Zero(m, m);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index c = 0; c < m; ++c) {
    std::vector<int> alpha = basis[size_t(c)];
    const int k = alpha[size_t(j)];
    if (k > 0) {
      alpha[size_t(j)] = k - 1;
      op(at.at(alpha), c) += std::sqrt(double(k)) * inv_sqrt2;
      alpha[size_t(j)] = k;
    }
    alpha[size_t(j)] = k + 1;
    auto it = at.find(alpha);
    if (it != at.end()) op(it->second, c) += raise_sign * std::sqrt(double(k + 1)) * inv_sqrt2;
  }
  return op;
}

}  // namespace

HermiteTruncation::HermiteTruncation(Index dim_, int max_degree_) : dim(dim_), max_degree(max_degree_) {
  if (dim < 1) throw PreconditionError("HermiteTruncation: dim must be positive");
  if (max_degree < 8) throw PreconditionError("HermiteTruncation: max_degree must be at least 8");
}

Index HermiteTruncation::basis_size() const {
  Index size = 1;
  for (Index k = 1; k <= dim; ++k) size = size * (max_degree + k) / k;
  return size;
}

Index trusted_count(Index basis_size) { return (basis_size + 3) / 4; }

std::vector<Cplx> hermite_galerkin_spectrum(const model::QuadraticModel& model, int max_degree) {
  HermiteTruncation trunc(model.dim, max_degree);
  if (!model.antisymmetric(1e-12))
    throw PreconditionError("hermite_galerkin_spectrum: A must be antisymmetric");

  const Index n = model.dim;
  const auto basis = multi_indices(n, max_degree + 2);
  std::map<std::vector<int>, Index> at;
  for (size_t i = 0; i < basis.size(); ++i) at[basis[i]] = Index(i);
  const Index ext = Index(basis.size());

  std::vector<Mat> x(static_cast<size_t>(n));
  std::vector<Mat> dx(static_cast<size_t>(n));
  for (Index j = 0; j < n; ++j) {
    x[size_t(j)] = ladder(basis, at, j, +1.0);
    dx[size_t(j)] = ladder(basis, at, j, -1.0);
  }

  // Q = sum_j (D_j - (Ax)_j)^2 + (1/2) sum_{jk} V_jk x_j x_k with D = -i d/dx.
  CMat q = CMat::Zero(ext, ext);
  for (Index j = 0; j < n; ++j) {
    CMat pj = -kImagUnit * dx[size_t(j)].cast<Cplx>();
    for (Index k = 0; k < n; ++k)
      if (model.A(j, k) != 0.0) pj -= model.A(j, k) * x[size_t(k)].cast<Cplx>();
    q += pj * pj;
  }
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      if (model.V(j, k) != Cplx(0.0)) q += 0.5 * model.V(j, k) * (x[size_t(j)] * x[size_t(k)]).cast<Cplx>();

  const Index cut = trunc.basis_size();
  Eigen::ComplexSchur<CMat> schur(q.topLeftCorner(cut, cut), false);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("hermite_galerkin_spectrum: Schur iteration failed");

  std::vector<Cplx> eig(static_cast<size_t>(cut));
  for (Index i = 0; i < cut; ++i) eig[size_t(i)] = schur.matrixT()(i, i);
  std::sort(eig.begin(), eig.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return eig;
}

CMat dense_expm(const CMat& m, double t) {
  if (m.rows() != m.cols()) throw PreconditionError("dense_expm: matrix must be square");
  if (m.rows() > 2000) throw PreconditionError("dense_expm: dimension capped at 2000");
  return (t * m).exp();
}

int det_winding(const model::QuadraticModel& model, Cplx center, double radius, int nodes) {
  if (nodes < 8) throw PreconditionError("det_winding: need at least 8 nodes");
  if (radius <= 0.0) throw PreconditionError("det_winding: radius must be positive");

  const Index n = model.dim;
  const CMat a = model.A.cast<Cplx>();
  auto det_at = [&](Cplx lambda) {
    CMat t = lambda * lambda * CMat::Identity(n, n) + 2.0 * lambda * a + 0.5 * model.V;
    return t.determinant();
  };

  Cplx first = det_at(center + radius);
  if (first == Cplx(0.0)) throw ContourTooClose("det_winding: determinant vanishes on contour");
  Cplx prev = first;
  double total = 0.0;
  for (int m = 1; m <= nodes; ++m) {
    Cplx d = first;
    if (m < nodes) {
      double theta = 2.0 * M_PI * double(m) / double(nodes);
      d = det_at(center + radius * std::exp(kImagUnit * theta));
      if (d == Cplx(0.0)) throw ContourTooClose("det_winding: determinant vanishes on contour");
    }
    double step = std::arg(d / prev);
    if (std::abs(step) > M_PI / 2.0)
      throw ArgumentJump("det_winding: argument step exceeds pi/2, refine nodes");
    total += step;
    prev = d;
  }
  double w = total / (2.0 * M_PI);
  int rounded = int(std::lround(w));
  if (std::abs(w - double(rounded)) > 1e-6)
    throw NonIntegerResidual("det_winding: accumulated argument is not a multiple of 2 pi");
  return rounded;
}

}  // namespace nsa::oracles
