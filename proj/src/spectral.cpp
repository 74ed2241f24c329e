#include "nsa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "nsa/errors.hpp"
#include "nsa/linalg.hpp"
#include "nsa/model.hpp"

namespace nsa::spectral {

using discretize::GridOperator;
using discretize::SpMat;

namespace {

double matrix_scale(const SpMat& m) {
  Vec row_sums = Vec::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.maxCoeff();
}

SpMat shifted_by(const SpMat& m, Cplx z) {
  SpMat id(m.rows(), m.cols());
  id.setIdentity();
  return SpMat(m - z * id);
}

CVec gaussian_unit(Index dim, std::mt19937_64& gen) {
  std::normal_distribution<double> gauss;
  CVec v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = Cplx(gauss(gen), gauss(gen));
  v.normalize();
  return v;
}

}  // namespace

std::vector<Eigenpair> eigs_in_disc(const GridOperator& op, double c, int max_count) {
  if (c <= 0.0) throw PreconditionError("eigs_in_disc: disc constant must be positive");
  if (max_count < 1) throw PreconditionError("eigs_in_disc: max_count must be positive");
  if (op.resolution_warning)
    throw PreconditionError("eigs_in_disc: grid too coarse to trust O(h) eigenvalues");

  const double radius = c * op.h;
  const Index dim = op.matrix.rows();
  const double scale = matrix_scale(op.matrix);

  // disc covering: one shift near the origin, two rings over the closed
  // right half disc (accretivity confines the spectrum there)
  std::vector<Cplx> shifts{Cplx(0.05 * radius, 0.0)};
  for (double frac : {0.45, 0.85})
    for (int k = -2; k <= 2; ++k) {
      double ang = double(k) * M_PI / 4.0;
      shifts.push_back(frac * radius * Cplx(std::cos(ang), std::sin(ang)));
    }

  const int m = int(std::min<Index>(dim, 60));
  std::vector<Eigenpair> found;
  size_t failures = 0;
  for (Cplx sigma : shifts) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted_by(op.matrix, sigma));
    if (lu.info() != Eigen::Success) {
      sigma += 0.04 * radius * Cplx(0.6, 0.8);
      lu.compute(shifted_by(op.matrix, sigma));
      if (lu.info() != Eigen::Success) {
        ++failures;
        continue;
      }
    }

    CMat basis(dim, m + 1);
    CMat hess = CMat::Zero(m + 1, m);
    std::mt19937_64 gen(0xa51c5ULL);
    basis.col(0) = gaussian_unit(dim, gen);
    int steps = m;
    for (int j = 0; j < m; ++j) {
      CVec w = lu.solve(basis.col(j));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          Cplx coef = basis.col(i).dot(w);
          hess(i, j) += coef;
          w -= coef * basis.col(i);
        }
      double wn = w.norm();
      hess(j + 1, j) = wn;
      if (wn < 1e-13) {
        steps = j + 1;
        break;
      }
      basis.col(j + 1) = w / wn;
    }

    Eigen::ComplexEigenSolver<CMat> es(hess.topLeftCorner(steps, steps));
    if (es.info() != Eigen::Success) {
      ++failures;
      continue;
    }
    for (Index i = 0; i < steps; ++i) {
      Cplx theta = es.eigenvalues()[i];
      if (std::abs(theta) < 1e-14) continue;
      Cplx lambda = sigma + 1.0 / theta;
      if (std::abs(lambda) > 1.15 * radius) continue;
      CVec vec = basis.leftCols(steps) * es.eigenvectors().col(i);
      vec.normalize();
      double resid = (op.matrix * vec - lambda * vec).norm();
      if (resid < 1e-8 * scale) found.push_back({lambda, std::move(vec), resid});
    }
  }
  if (failures == shifts.size()) throw ConvergenceFailure("eigs_in_disc: every shift failed");

  std::sort(found.begin(), found.end(), [](const Eigenpair& a, const Eigenpair& b) {
    return a.residual < b.residual;
  });
  std::vector<Eigenpair> out;
  const double tol_eq = 1e-6 * radius;
  for (auto& p : found) {
    if (std::abs(p.lambda) >= radius) continue;
    bool dup = false;
    for (const auto& q : out)
      if (std::abs(p.lambda - q.lambda) < tol_eq) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(std::move(p));
  }
  if (Index(out.size()) > max_count) {
    std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) {
      return std::abs(a.lambda) < std::abs(b.lambda);
    });
    out.resize(size_t(max_count));
  }
  std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  return out;
}

AsymptoticsTable leading_eigenvalue_asymptotics(const potential::PotentialSpec& spec,
                                                const std::vector<potential::MinimumPoint>& minima,
                                                const std::vector<double>& h_list,
                                                const discretize::Grid& grid, double c) {
  if (minima.empty()) throw PreconditionError("asymptotics: need at least one verified minimum");
  if (h_list.size() < 2) throw PreconditionError("asymptotics: need >= 2 h values for a slope");

  // bottom of the union of the model lattices, simplicity and gap checked
  std::vector<Cplx> lattice;
  double window = 0.0;
  for (const auto& mp : minima)
    window = std::max(window, 3.0 * std::abs(model::spectral_gap(mp.quadratic).first) + 1.0);
  for (const auto& mp : minima)
    for (const auto& pt : model::model_spectrum(mp.quadratic, window))
      for (int r = 0; r < pt.multiplicity; ++r) lattice.push_back(pt.value);
  std::sort(lattice.begin(), lattice.end(),
            [](Cplx a, Cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  const Cplx mu0 = lattice.front();
  if (lattice.size() < 2)
    throw PreconditionError("asymptotics: lattice window holds a single point");
  if (std::abs(lattice[1] - mu0) <= 0.1)
    throw PreconditionError("asymptotics: bottom eigenvalue not simple with margin 0.1");

  AsymptoticsTable table{mu0, {}, 0.0};
  std::vector<double> log_h, log_dev;
  for (double h : h_list) {
    auto pairs = eigs_in_disc(discretize::assemble(spec, grid, h), c);
    if (pairs.empty()) throw EmptyWindow("asymptotics: empty disc at h = " + std::to_string(h));
    const Cplx target = h * mu0;
    const Eigenpair* best = &pairs[0];
    int close = 0;
    for (const auto& p : pairs) {
      if (std::abs(p.lambda - target) < std::abs(best->lambda - target)) best = &p;
      if (std::abs(p.lambda - target) < 1e-3 * h) ++close;
    }
    if (close >= 2)
      throw AmbiguousPairing("asymptotics: two eigenvalues within 1e-3*h of h*mu0");
    double dev = std::abs(best->lambda / h - mu0);
    table.rows.push_back({h, best->lambda / h, dev});
    log_h.push_back(std::log(h));
    log_dev.push_back(std::log(std::max(dev, 1e-300)));
  }
  table.fitted_slope = linalg::fit_line(log_h, log_dev).slope;
  return table;
}

ResolventSample resolvent_norm(const SpMat& m, Cplx z) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(shifted_by(m, z));
  if (lu.info() != Eigen::Success)
    return {z, std::numeric_limits<double>::infinity(), "factorization-singular"};

  std::mt19937_64 gen(0x7e501e47ULL);
  CVec v = gaussian_unit(m.rows(), gen);
  double sigma = 0.0;
  double prev = -1.0;
  for (int it = 0; it < 5000; ++it) {
    CVec w = lu.solve(v);
    CVec u = lu.adjoint().solve(w);  // (M-z)^{-H} (M-z)^{-1} v
    double growth = u.norm();
    if (growth == 0.0) break;
    sigma = std::sqrt(growth);
    v = u / growth;
    if (prev > 0.0 && std::abs(sigma - prev) < 1e-10 * sigma) break;
    prev = sigma;
  }
  return {z, sigma, "iterative"};
}

ResolventSample resolvent_norm(const GridOperator& op, Cplx z) {
  return resolvent_norm(op.matrix, z);
}

ResolventSample resolvent_norm_dense(const SpMat& m, Cplx z) {
  if (m.rows() > 2000)
    throw PreconditionError("resolvent_norm_dense: dimension capped at 2000");
  CMat dense = CMat(shifted_by(m, z));
  Eigen::BDCSVD<CMat> svd(dense);
  double smin = svd.singularValues().minCoeff();
  if (smin == 0.0) return {z, std::numeric_limits<double>::infinity(), "exact-smallest-singular"};
  return {z, 1.0 / smin, "exact-smallest-singular"};
}

ResolventSample resolvent_norm_dense(const GridOperator& op, Cplx z) {
  return resolvent_norm_dense(op.matrix, z);
}

double line_sup_resolvent(const GridOperator& op, const std::vector<Cplx>& model_mus, double a,
                          double s_min, double s_max, int samples) {
  if (samples < 2) throw PreconditionError("line_sup_resolvent: need >= 2 samples");
  if (model_mus.empty()) throw PreconditionError("line_sup_resolvent: empty lattice");
  double sep = std::numeric_limits<double>::infinity();
  for (Cplx mu : model_mus) sep = std::min(sep, std::abs(a - mu.real()));
  if (sep <= 0.05)
    throw PreconditionError("line_sup_resolvent: a within 0.05 of a lattice real part");
  double sup = 0.0;
  for (int j = 0; j < samples; ++j) {
    double s = s_min + (s_max - s_min) * double(j) / double(samples - 1);
    sup = std::max(sup, op.h * resolvent_norm(op, Cplx(a * op.h, s)).norm);
  }
  return sup;
}

std::vector<ParabolicRow> parabolic_probe(const GridOperator& op, const std::vector<double>& s_list,
                                          double c) {
  std::vector<ParabolicRow> rows;
  for (double s : s_list) {
    if (s < c * op.h - 1e-12)
      throw PreconditionError("parabolic_probe: s below the c*h regime boundary");
    auto sample = resolvent_norm(op, Cplx(0.0, s));
    rows.push_back({op.h, s, sample.norm, sample.norm * std::pow(op.h, 2.0 / 3.0) * std::cbrt(s)});
  }
  return rows;
}

SpectralProjection::SpectralProjection(const SpMat& m, Cplx center, double radius, int nodes)
    : dim_(m.rows()), center_(center), radius_(radius) {
  if (radius <= 0.0) throw PreconditionError("SpectralProjection: radius must be positive");
  if (nodes < 4) throw PreconditionError("SpectralProjection: need >= 4 nodes");
  for (int k = 0; k < nodes; ++k) {
    double theta = 2.0 * M_PI * (double(k) + 0.5) / double(nodes);
    Cplx phase = std::exp(Cplx(0.0, theta));
    auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu->compute(shifted_by(m, center + radius * phase));  // z_k - M up to sign
    if (lu->info() != Eigen::Success)
      throw AnnulusNotClean("SpectralProjection: contour node hit the spectrum");
    lus_.push_back(std::move(lu));
    // quadrature weight for (1/2pi i) contour dz with dz = i r phase dtheta,
    // folded with the sign of (M - z) = -(z - M)
    weights_.push_back(-radius / double(nodes) * phase);
  }
}

CVec SpectralProjection::apply(const CVec& v) const {
  CVec out = CVec::Zero(dim_);
  for (size_t k = 0; k < lus_.size(); ++k) out += weights_[k] * lus_[k]->solve(v);
  return out;
}

CVec SpectralProjection::apply_adjoint(const CVec& v) const {
  CVec out = CVec::Zero(dim_);
  for (size_t k = 0; k < lus_.size(); ++k)
    out += std::conj(weights_[k]) * lus_[k]->adjoint().solve(v);
  return out;
}

Cplx SpectralProjection::exact_trace() const {
  if (dim_ > 2000) throw PreconditionError("exact_trace: dimension capped at 2000");
  Cplx tr(0.0);
  CMat id = CMat::Identity(dim_, dim_);
  for (size_t k = 0; k < lus_.size(); ++k) tr += weights_[k] * Cplx(lus_[k]->solve(id).trace());
  return tr;
}

ProjectionDiagnostics spectral_projection(const GridOperator& op, Cplx lambda, double radius,
                                          int nodes, const std::vector<Cplx>& known_spectrum,
                                          uint64_t probe_seed) {
  for (Cplx mu : known_spectrum) {
    double d = std::abs(mu - lambda);
    if (d >= 0.5 * radius && d <= 1.5 * radius)
      throw AnnulusNotClean("spectral_projection: eigenvalue inside the safety annulus");
  }

  auto pi = std::make_shared<SpectralProjection>(op.matrix, lambda, radius, nodes);
  SpectralProjection doubled(op.matrix, lambda, radius, 2 * nodes);

  const Index dim = op.matrix.rows();
  std::mt19937_64 gen(probe_seed);
  double drift = 0.0;
  for (int p = 0; p < 5; ++p) {
    CVec v = gaussian_unit(dim, gen);
    drift = std::max(drift, (pi->apply(v) - doubled.apply(v)).norm());
  }
  if (drift > 1e-6)
    throw QuadratureNotConverged("spectral_projection: node doubling drift " +
                                 std::to_string(drift));

  auto apply = [&pi](const CVec& v) { return pi->apply(v); };
  auto apply_h = [&pi](const CVec& v) { return pi->apply_adjoint(v); };
  double op_norm = linalg::estimate_operator_norm(dim, apply, apply_h, gen);

  auto idem = [&pi](const CVec& v) { return CVec(pi->apply(pi->apply(v)) - pi->apply(v)); };
  auto idem_h = [&pi](const CVec& v) {
    return CVec(pi->apply_adjoint(pi->apply_adjoint(v)) - pi->apply_adjoint(v));
  };
  double idem_residual = linalg::estimate_operator_norm(dim, idem, idem_h, gen);

  const SpMat madj = op.matrix.adjoint();
  auto comm = [&](const CVec& v) { return CVec(op.matrix * pi->apply(v) - pi->apply(op.matrix * v)); };
  auto comm_h = [&](const CVec& v) {
    return CVec(pi->apply_adjoint(madj * v) - madj * pi->apply_adjoint(v));
  };
  double commutator = linalg::estimate_operator_norm(dim, comm, comm_h, gen) /
                      matrix_scale(op.matrix);

  Cplx trace = dim <= 2000 ? pi->exact_trace()
                           : Cplx(std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN());
  return {lambda, radius, nodes, idem_residual, trace, op_norm, drift, commutator, pi};
}

}  // namespace nsa::spectral
