#include "nsa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nsa/errors.hpp"
#include "nsa/linalg.hpp"

namespace nsa::model {

namespace {

constexpr double kRePsdFloor = -1e-12;
constexpr double kImagAxisTol = 1e-8;      // |Im lambda| below this fails loudly
constexpr double kCrossCheckTol = 1e-8;    // Hamilton map vs companion matching
constexpr double kClusterRelTol = 1e-6;    // root clustering into multiplicities
constexpr double kLatticeMergeTol = 1e-9;  // merging equal lattice values
constexpr double kKernelTol = 1e-8;        // singular-space kernel threshold

std::string to_string(Cplx z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

/// T(lambda) = lambda^2 + 2 lambda A + V/2.
CMat pencil_value(const QuadraticModel& m, Cplx lambda) {
  CMat t = CMat::Identity(m.dim, m.dim) * (lambda * lambda);
  t += (2.0 * lambda) * m.A.cast<Cplx>();
  t += 0.5 * m.V;
  return t;
}

std::vector<Cplx> eigenvalues_of(const CMat& m) {
  Eigen::ComplexEigenSolver<CMat> solver(m, /*computeEigenvectors=*/false);
  std::vector<Cplx> vals(m.rows());
  for (Index i = 0; i < m.rows(); ++i) vals[i] = solver.eigenvalues()[i];
  return vals;
}

/// Cluster a flat eigenvalue list into roots with algebraic multiplicity.
/// Two values belong to one cluster when closer than tol*(1 + |value|).
std::vector<PencilRoot> cluster_roots(std::vector<Cplx> vals, double rel_tol) {
  std::sort(vals.begin(), vals.end(), [](Cplx a, Cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<PencilRoot> roots;
  std::vector<char> used(vals.size(), 0);
  for (size_t i = 0; i < vals.size(); ++i) {
    if (used[i]) continue;
    Cplx sum = vals[i];
    int count = 1;
    used[i] = 1;
    for (size_t j = i + 1; j < vals.size(); ++j) {
      if (used[j]) continue;
      Cplx mean = sum / double(count);
      if (std::abs(vals[j] - mean) <= rel_tol * (1.0 + std::abs(mean))) {
        sum += vals[j];
        ++count;
        used[j] = 1;
      }
    }
    roots.push_back({sum / double(count), count});
  }
  std::sort(roots.begin(), roots.end(), [](const PencilRoot& a, const PencilRoot& b) {
    return a.lambda.real() != b.lambda.real() ? a.lambda.real() < b.lambda.real()
                                              : a.lambda.imag() < b.lambda.imag();
  });
  return roots;
}

std::vector<Cplx> generators_with_multiplicity(const QuadraticModel& model) {
  // Spectrum-level entry points gauge-fix internally; the lattice does not
  // see the symmetric part of A.
  auto roots = pencil_eigenvalues(antisymmetrize(model).first);
  auto upper = positive_half(roots, model.dim);
  std::vector<Cplx> gens;
  for (const auto& r : upper)
    for (int k = 0; k < r.multiplicity; ++k) gens.push_back(r.lambda / kImagUnit);
  return gens;
}

}  // namespace

QuadraticModel::QuadraticModel(Mat a, CMat v) : dim(a.rows()), A(std::move(a)) {
  if (A.rows() != A.cols() || v.rows() != v.cols() || v.rows() != dim || dim < 1)
    throw PreconditionError("QuadraticModel: A and V must be square of equal size");
  V = 0.5 * (v + v.transpose());  // enforce exact symmetry
  Mat re_v = 0.5 * (V.real() + V.real().transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(re_v);
  double scale = std::max(1.0, re_v.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < kRePsdFloor * scale)
    throw PreconditionError("QuadraticModel: Re V must be positive semidefinite");
}

bool QuadraticModel::antisymmetric(double tol) const {
  return (A + A.transpose()).cwiseAbs().maxCoeff() <= tol;
}

std::pair<QuadraticModel, GaugeRecord> antisymmetrize(const QuadraticModel& model) {
  Mat s = 0.5 * (model.A + model.A.transpose());
  Mat a = model.A - s;
  return {QuadraticModel(a, model.V), GaugeRecord{s}};
}

HamiltonMap hamilton_map(const QuadraticModel& model) {
  if (!model.antisymmetric(1e-14 * std::max(1.0, model.A.cwiseAbs().maxCoeff())))
    throw PreconditionError("hamilton_map: A must be antisymmetric (run antisymmetrize)");
  const Index n = model.dim;
  CMat f = CMat::Zero(2 * n, 2 * n);
  f.topLeftCorner(n, n) = (-model.A).cast<Cplx>();
  f.topRightCorner(n, n) = CMat::Identity(n, n);
  f.bottomLeftCorner(n, n) = (model.A * model.A).cast<Cplx>() - 0.5 * model.V;
  f.bottomRightCorner(n, n) = (-model.A).cast<Cplx>();
  return {f};
}

std::vector<PencilRoot> pencil_eigenvalues(const QuadraticModel& model) {
  const Index n = model.dim;
  auto hamilton_vals = eigenvalues_of(hamilton_map(model).F);

  // First companion form on [lambda x; x]: lambda I - [[-2A, -V/2],[I, 0]].
  CMat comp = CMat::Zero(2 * n, 2 * n);
  comp.topLeftCorner(n, n) = (-2.0 * model.A).cast<Cplx>();
  comp.topRightCorner(n, n) = -0.5 * model.V;
  comp.bottomLeftCorner(n, n) = CMat::Identity(n, n);
  auto companion_vals = eigenvalues_of(comp);

  double scale = 1.0;
  for (Cplx z : hamilton_vals) scale = std::max(scale, std::abs(z));
  auto dists = linalg::greedy_pair_distances(hamilton_vals, companion_vals);
  if (!dists.empty() && dists.back() > kCrossCheckTol * scale)
    throw CrossCheckFailure("pencil_eigenvalues: Hamilton-map and companion roots differ by " +
                            std::to_string(dists.back()));

  auto roots = cluster_roots(hamilton_vals, kClusterRelTol);
  for (const auto& r : roots) {
    if (std::abs(r.lambda.imag()) < kImagAxisTol)
      throw RealRootError("pencil_eigenvalues: root " + to_string(r.lambda) +
                          " on the real axis; V is not invertible");
  }
  return roots;
}

std::vector<PencilRoot> positive_half(const std::vector<PencilRoot>& roots, Index n) {
  std::vector<PencilRoot> upper;
  int count = 0;
  for (const auto& r : roots) {
    if (r.lambda.imag() > 0) {
      upper.push_back(r);
      count += r.multiplicity;
    }
  }
  if (count != n)
    throw CountMismatch("positive_half: found " + std::to_string(count) + " roots, expected " +
                        std::to_string(n));
  return upper;
}

std::vector<ModelEigenvalue> model_spectrum(const QuadraticModel& model, double re_bound) {
  auto gens = generators_with_multiplicity(model);
  const Index n = model.dim;

  // Best-first enumeration over index vectors nu, keyed on Re(value).
  // Children only increment slots >= the last touched one, so each nu is
  // visited exactly once; Re(generator) > 0 makes the search monotone.
  struct Node {
    double re;
    Cplx value;
    std::vector<int> nu;
    int last;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.re > b.re; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> queue(cmp);

  Cplx mu0 = 0.0;
  for (Cplx g : gens) mu0 += g;
  queue.push({mu0.real(), mu0, std::vector<int>(n, 0), 0});

  std::vector<ModelEigenvalue> points;
  const double merge_slack = kLatticeMergeTol * (1.0 + std::abs(re_bound));
  while (!queue.empty()) {
    Node node = queue.top();
    queue.pop();
    if (node.re > re_bound + merge_slack) break;
    bool merged = false;
    for (auto& p : points) {
      if (std::abs(p.value - node.value) <= kLatticeMergeTol * (1.0 + std::abs(p.value))) {
        ++p.multiplicity;
        if (std::lexicographical_compare(node.nu.begin(), node.nu.end(), p.index.begin(),
                                         p.index.end()))
          p.index = node.nu;
        merged = true;
        break;
      }
    }
    if (!merged) points.push_back({node.value, node.nu, 1, gens});
    for (int j = node.last; j < int(n); ++j) {
      Node child = node;
      child.nu[j] += 1;
      child.value += 2.0 * gens[j];
      child.re = child.value.real();
      child.last = j;
      if (child.re <= re_bound + merge_slack) queue.push(std::move(child));
    }
  }
  if (points.empty())
    throw EmptyWindow("model_spectrum: no lattice point with Re <= " + std::to_string(re_bound));
  std::sort(points.begin(), points.end(), [](const ModelEigenvalue& a, const ModelEigenvalue& b) {
    return a.value.real() != b.value.real() ? a.value.real() < b.value.real()
                                            : a.value.imag() < b.value.imag();
  });
  return points;
}

std::pair<Cplx, double> spectral_gap(const QuadraticModel& model) {
  auto gens = generators_with_multiplicity(model);
  Cplx mu0 = 0.0;
  double min_re = std::numeric_limits<double>::infinity();
  for (Cplx g : gens) {
    mu0 += g;
    min_re = std::min(min_re, g.real());
  }
  // Every other lattice point adds 2 nu_j generators, so the real-part gap
  // is exactly twice the smallest generator real part.
  return {mu0, 2.0 * min_re};
}

double sector_angle(const QuadraticModel& model) {
  auto gens = generators_with_multiplicity(model);
  double theta0 = 0.0;
  for (Cplx g : gens) {
    double a = std::abs(std::arg(g));
    if (a >= std::numbers::pi / 2)
      throw SectorViolation("sector_angle: generator " + to_string(g) +
                            " outside the open right half plane");
    theta0 = std::max(theta0, a);
  }
  return theta0;
}

SingularSpaceBasis singular_space_closed_form(const QuadraticModel& model) {
  if (!model.antisymmetric(1e-14 * std::max(1.0, model.A.cwiseAbs().maxCoeff())))
    throw PreconditionError("singular_space_closed_form: A must be antisymmetric");
  const Index n = model.dim;
  Mat v1 = model.V.real();
  Mat v2 = model.V.imag();

  // ker V2, then the null directions of V1 restricted to it; V1 >= 0 turns
  // V1 y.y = 0 into V1 y = 0 on that subspace.
  Mat k = linalg::symmetric_kernel_basis(v2, kKernelTol);
  Mat y_basis(n, 0);
  if (k.cols() > 0) {
    Mat restricted = k.transpose() * v1 * k;
    Mat w = linalg::symmetric_kernel_basis(restricted, kKernelTol);
    y_basis = k * w;
  }

  Mat basis(2 * n, y_basis.cols());
  for (Index c = 0; c < y_basis.cols(); ++c) {
    basis.col(c).head(n) = y_basis.col(c);
    basis.col(c).tail(n) = model.A * y_basis.col(c);
  }
  basis = linalg::orthonormal_columns(basis);

  // Each basis vector must annihilate the symbol itself.
  for (Index c = 0; c < basis.cols(); ++c) {
    Vec y = basis.col(c).head(n);
    Vec eta = basis.col(c).tail(n);
    Vec d = eta - model.A * y;
    Cplx q = d.squaredNorm() + 0.5 * (model.V * y.cast<Cplx>()).dot(y.cast<Cplx>());
    if (std::abs(q) > 1e-12)
      throw Error("singular_space_closed_form: basis vector fails q(Y) = 0");
  }
  return {basis, SingularSpaceBasis::Method::closed_form};
}

Mat bracket_form_matrix(const QuadraticModel& model, int k) {
  const Index n = model.dim;
  // Symmetric matrices of Re q and Im q as forms on (y, eta).
  Mat m_re = Mat::Zero(2 * n, 2 * n);
  m_re.topLeftCorner(n, n) = model.A.transpose() * model.A + 0.5 * model.V.real();
  m_re.topRightCorner(n, n) = -model.A.transpose();
  m_re.bottomLeftCorner(n, n) = -model.A;
  m_re.bottomRightCorner(n, n) = Mat::Identity(n, n);
  Mat m_im = Mat::Zero(2 * n, 2 * n);
  m_im.topLeftCorner(n, n) = 0.5 * model.V.imag();

  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);

  // Poisson bracket on quadratic forms: M_{H_g f} = 2 (M_f J M_g - M_g J M_f).
  Mat m = m_re;
  for (int i = 0; i < k; ++i) {
    Mat next = 2.0 * (m * j * m_im - m_im * j * m);
    m = next;
  }
  return m;
}

SingularSpaceBasis singular_space_iterative(const QuadraticModel& model, int max_k) {
  const Index n = model.dim;
  if (max_k < 2 * int(n) - 1)
    throw PreconditionError("singular_space_iterative: max_k must be >= 2n - 1");
  if (!model.antisymmetric(1e-14 * std::max(1.0, model.A.cwiseAbs().maxCoeff())))
    throw PreconditionError("singular_space_iterative: A must be antisymmetric");

  Mat basis = Mat::Identity(2 * n, 2 * n);
  for (int k = 0; k <= max_k && basis.cols() > 0; ++k) {
    Mat form = bracket_form_matrix(model, k);
    Mat restricted = basis.transpose() * form * basis;
    Mat kernel = linalg::symmetric_kernel_basis(restricted, kKernelTol);
    basis = basis * kernel;
  }
  basis = linalg::orthonormal_columns(basis);

  auto closed = singular_space_closed_form(model);
  if (basis.cols() != closed.vectors.cols() ||
      linalg::containment_residual(basis, closed.vectors) > 1e-10)
    throw MismatchWithClosedForm("singular_space_iterative: disagrees with closed form");
  return {basis, SingularSpaceBasis::Method::iterative};
}

int pencil_multiplicity_contour(const QuadraticModel& model, Cplx lambda0, double radius,
                                int nodes) {
  if (radius <= 0 || nodes < 4)
    throw PreconditionError("pencil_multiplicity_contour: need radius > 0 and nodes >= 4");
  auto roots = pencil_eigenvalues(model);
  for (const auto& r : roots) {
    double d = std::abs(std::abs(r.lambda - lambda0) - radius);
    if (d < 0.1 * radius)
      throw ContourTooClose("pencil_multiplicity_contour: root " + to_string(r.lambda) +
                            " within 0.1*radius of the contour");
  }

  Cplx acc = 0.0;
  for (int m = 0; m < nodes; ++m) {
    double theta = 2.0 * std::numbers::pi * m / nodes;
    Cplx phase = std::polar(1.0, theta);
    Cplx z = lambda0 + radius * phase;
    CMat t = pencil_value(model, z);
    CMat dt = (2.0 * z) * CMat::Identity(model.dim, model.dim) + 2.0 * model.A.cast<Cplx>();
    Eigen::PartialPivLU<CMat> lu(t);
    acc += (lu.solve(dt)).trace() * (radius * phase);
  }
  // (1/2 pi i) * oint ... dz, trapezoid: dz = i r e^{i theta} dtheta.
  Cplx integral = acc / double(nodes);
  double count = integral.real();
  double residual = std::abs(integral - Cplx(std::round(count), 0.0));
  if (residual >= 1e-6)
    throw NonIntegerResidual("pencil_multiplicity_contour: residual " + std::to_string(residual));
  return int(std::lround(count));
}

}  // namespace nsa::model
