#include "nsa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "nsa/errors.hpp"
#include "nsa/rng.hpp"

namespace nsa::linalg {

double estimate_operator_norm(Index dim, const ApplyFn& apply, const ApplyFn& apply_adjoint,
                              std::mt19937_64& gen, int probes, int iters) {
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    CVec v = rng::gaussian_cvector(gen, dim);
    double nv = v.norm();
    if (nv == 0.0) continue;
    v /= nv;
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
      CVec w = apply(v);
      double nw = w.norm();
      if (nw == 0.0) {
        sigma = 0.0;
        break;
      }
      sigma = nw;  // Rayleigh estimate ||Xv|| for unit v
      CVec u = apply_adjoint(w / nw);
      double nu = u.norm();
      if (nu == 0.0) break;
      v = u / nu;
    }
    best = std::max(best, sigma);
  }
  return best;
}

Mat symmetric_kernel_basis(const Mat& m, double tol) {
  if (m.rows() == 0) return Mat(0, 0);
  Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<Index> keep;
  for (Index i = 0; i < sym.rows(); ++i)
    if (std::abs(es.eigenvalues()[i]) <= tol * scale) keep.push_back(i);
  Mat basis(sym.rows(), Index(keep.size()));
  for (size_t c = 0; c < keep.size(); ++c) basis.col(Index(c)) = es.eigenvectors().col(keep[c]);
  return basis;
}

double subspace_distance(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a.transpose() * b);
  double min_cos = svd.singularValues().minCoeff();
  min_cos = std::clamp(min_cos, 0.0, 1.0);
  return std::sqrt(1.0 - min_cos * min_cos);
}

double containment_residual(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  Mat qa = orthonormal_columns(a);
  Mat qb = orthonormal_columns(b);
  double ab = (qb - qa * (qa.transpose() * qb)).cwiseAbs().maxCoeff();
  double ba = (qa - qb * (qb.transpose() * qa)).cwiseAbs().maxCoeff();
  return std::max(ab, ba);
}

Mat orthonormal_columns(const Mat& m, double tol) {
  if (m.cols() == 0) return m;
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(tol);
  Index rank = qr.rank();
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), rank);
  return q;
}

std::vector<double> greedy_pair_distances(std::vector<Cplx> a, std::vector<Cplx> b) {
  if (a.size() != b.size()) throw PreconditionError("greedy_pair_distances: size mismatch");
  std::vector<double> dists;
  while (!a.empty()) {
    size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j) {
        double d = std::abs(a[i] - b[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    dists.push_back(best);
    a.erase(a.begin() + ptrdiff_t(bi));
    b.erase(b.begin() + ptrdiff_t(bj));
  }
  std::sort(dists.begin(), dists.end());
  return dists;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw PreconditionError("fit_line: need at least two points");
  const double n = double(x.size());
  double sx = std::accumulate(x.begin(), x.end(), 0.0);
  double sy = std::accumulate(y.begin(), y.end(), 0.0);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw PreconditionError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  double mean_y = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace nsa::linalg
