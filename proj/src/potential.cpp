#include "nsa/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "nsa/errors.hpp"
#include "nsa/rng.hpp"

namespace nsa::potential {

namespace {

int total_degree(const std::vector<int>& alpha) {
  int d = 0;
  for (int a : alpha) d += a;
  return d;
}

double xpow(const Vec& x, const std::vector<int>& alpha) {
  double p = 1.0;
  for (Index i = 0; i < x.size(); ++i)
    for (int k = 0; k < alpha[size_t(i)]; ++k) p *= x[i];
  return p;
}

double dxpow(const Vec& x, std::vector<int> alpha, Index j) {
  if (alpha[size_t(j)] == 0) return 0.0;
  double c = alpha[size_t(j)];
  alpha[size_t(j)] -= 1;
  return c * xpow(x, alpha);
}

double ddxpow(const Vec& x, std::vector<int> alpha, Index j, Index k) {
  if (alpha[size_t(j)] == 0) return 0.0;
  double c = alpha[size_t(j)];
  alpha[size_t(j)] -= 1;
  if (alpha[size_t(k)] == 0) return 0.0;
  c *= alpha[size_t(k)];
  alpha[size_t(k)] -= 1;
  return c * xpow(x, alpha);
}

// Shape (value, gradient, hessian) of x^alpha (1+|x|^2)^{-m}; the complex
// coefficient multiplies the whole shape afterwards.
struct TermShape {
  double value;
  Vec grad;
  Mat hess;
};

TermShape term_shape(const Vec& x, const VTerm& term) {
  const Index n = x.size();
  TermShape s{0.0, Vec::Zero(n), Mat::Zero(n, n)};
  const double p = xpow(x, term.alpha);
  if (term.damp == 0) {
    s.value = p;
    for (Index j = 0; j < n; ++j) s.grad[j] = dxpow(x, term.alpha, j);
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) s.hess(j, k) = ddxpow(x, term.alpha, j, k);
    return s;
  }
  const double m = term.damp;
  const double u = 1.0 + x.squaredNorm();
  const double w = std::pow(u, -m);
  const double wu = std::pow(u, -m - 1.0);
  const double wuu = std::pow(u, -m - 2.0);
  Vec wg = -2.0 * m * wu * x;
  s.value = p * w;
  for (Index j = 0; j < n; ++j) s.grad[j] = dxpow(x, term.alpha, j) * w + p * wg[j];
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) {
      double wjk = 4.0 * m * (m + 1.0) * x[j] * x[k] * wuu;
      if (j == k) wjk -= 2.0 * m * wu;
      s.hess(j, k) = ddxpow(x, term.alpha, j, k) * w + dxpow(x, term.alpha, j) * wg[k] +
                     dxpow(x, term.alpha, k) * wg[j] + p * wjk;
    }
  return s;
}

Vec argmin_witness(const std::vector<Vec>& pts, const std::vector<double>& vals, bool largest) {
  size_t best = 0;
  for (size_t i = 1; i < vals.size(); ++i)
    if (largest ? vals[i] > vals[best] : vals[i] < vals[best]) best = i;
  return pts[best];
}

}  // namespace

PotentialSpec::PotentialSpec(Index dim_, Vec a0_, Mat b_, std::vector<VTerm> v_terms_,
                             std::vector<Vec> declared_minima_)
    : dim(dim_),
      a0(std::move(a0_)),
      b(std::move(b_)),
      v_terms(std::move(v_terms_)),
      declared_minima(std::move(declared_minima_)) {
  if (dim < 1) throw PreconditionError("PotentialSpec: dim must be positive");
  if (a0.size() != dim || b.rows() != dim || b.cols() != dim)
    throw PreconditionError("PotentialSpec: magnetic map shape mismatch");
  for (const auto& t : v_terms) {
    if (Index(t.alpha.size()) != dim) throw PreconditionError("PotentialSpec: term exponent size");
    for (int a : t.alpha)
      if (a < 0) throw PreconditionError("PotentialSpec: negative exponent");
    if (t.damp < 0) throw PreconditionError("PotentialSpec: negative damping power");
    int growth = total_degree(t.alpha) - 2 * t.damp;
    if (t.damp == 0 && total_degree(t.alpha) > 2)
      throw PreconditionError("PotentialSpec: undamped term of degree > 2");
    if (growth > 2) throw PreconditionError("PotentialSpec: term grows faster than |x|^2");
  }
  for (const auto& x : declared_minima)
    if (x.size() != dim) throw PreconditionError("PotentialSpec: minimum candidate size");
}

Evaluation evaluate(const PotentialSpec& spec, const Vec& x) {
  const Index n = spec.dim;
  Evaluation ev{spec.a0 + spec.b * x, Cplx(0.0), CVec::Zero(n), CMat::Zero(n, n)};
  for (const auto& term : spec.v_terms) {
    TermShape s = term_shape(x, term);
    ev.v += term.coeff * s.value;
    ev.grad_v += term.coeff * s.grad.cast<Cplx>();
    ev.hess_v += term.coeff * s.hess.cast<Cplx>();
  }
  return ev;
}

std::vector<MinimumPoint> verify_minima(const PotentialSpec& spec,
                                        const std::vector<Vec>& candidates) {
  std::vector<MinimumPoint> out;
  for (const Vec& c : candidates) {
    Evaluation ev = evaluate(spec, c);
    const double v1 = ev.v.real();
    const double v2 = ev.v.imag();
    const double g1 = ev.grad_v.real().norm();
    const double g2 = ev.grad_v.imag().norm();
    if (std::abs(v1) > 1e-10)
      throw NotAMinimum("verify_minima: Re V = " + std::to_string(v1) + " at candidate");
    if (g1 > 1e-10)
      throw NotAMinimum("verify_minima: |grad Re V| = " + std::to_string(g1) + " at candidate");
    if (std::abs(v2) > 1e-10)
      throw NotAMinimum("verify_minima: Im V = " + std::to_string(v2) + " at candidate");
    if (g2 > 1e-10)
      throw NotAMinimum("verify_minima: |grad Im V| = " + std::to_string(g2) + " at candidate");
    // the zero of Re V must be isolated: positive on small spheres
    for (double r : {0.05, 0.1, 0.2}) {
      double lo = std::numeric_limits<double>::infinity();
      for (uint32_t i = 0; i < 128; ++i) {
        Vec y = rng::halton_sphere_point(i, spec.dim, r);
        lo = std::min(lo, evaluate(spec, Vec(c + y)).v.real());
      }
      if (lo <= 1e-12 * r * r)
        throw NotAMinimum("verify_minima: Re V not positive on the sphere of radius " +
                          std::to_string(r) + " (zero set of Re V is not finite there)");
    }
    Eigen::JacobiSVD<CMat> svd(ev.hess_v);
    if (svd.singularValues().minCoeff() < 1e-8)
      throw DegenerateHessian("verify_minima: sigma_min(V'') = " +
                              std::to_string(svd.singularValues().minCoeff()));
    out.push_back({c, ev.hess_v, spec.b, model::QuadraticModel(spec.b, ev.hess_v)});
  }
  return out;
}

bool AssumptionReport::all_pass() const {
  for (const auto& r : records)
    if (!r.pass) return false;
  return true;
}

const HypothesisRecord& AssumptionReport::find(const std::string& id) const {
  for (const auto& r : records)
    if (r.id == id) return r;
  throw PreconditionError("AssumptionReport: unknown record " + id);
}

AssumptionReport check_assumptions(const PotentialSpec& spec, double sample_radius,
                                   int shell_samples, const std::vector<double>& c_search_grid) {
  if (sample_radius < 10.0)
    throw PreconditionError("check_assumptions: sample_radius must be >= 10");
  if (shell_samples < 1000)
    throw PreconditionError("check_assumptions: need >= 1000 samples per shell");
  if (c_search_grid.empty()) throw PreconditionError("check_assumptions: empty constant grid");
  std::vector<double> grid = c_search_grid;
  std::sort(grid.begin(), grid.end());

  const Index n = spec.dim;
  const std::vector<double> radii{sample_radius / 4.0, sample_radius / 2.0, sample_radius,
                                  2.0 * sample_radius};

  std::vector<Vec> pts;
  pts.push_back(Vec::Zero(n));
  for (const auto& x : spec.declared_minima) pts.push_back(x);
  uint32_t offset = 0;
  for (double r : radii) {
    for (int i = 0; i < shell_samples; ++i)
      pts.push_back(rng::halton_sphere_point(offset + uint32_t(i), n, r));
    offset += uint32_t(shell_samples);
  }

  std::vector<double> v1(pts.size()), v2abs(pts.size()), g2sq(pts.size()), hnorm(pts.size()),
      xnorm(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    Evaluation ev = evaluate(spec, pts[i]);
    v1[i] = ev.v.real();
    v2abs[i] = std::abs(ev.v.imag());
    g2sq[i] = ev.grad_v.imag().squaredNorm();
    hnorm[i] = ev.hess_v.cwiseAbs().maxCoeff();
    xnorm[i] = pts[i].norm();
  }

  AssumptionReport report;

  {
    Eigen::JacobiSVD<Mat> svd(spec.b);
    double bnorm = spec.b.size() > 0 ? svd.singularValues().maxCoeff() : 0.0;
    report.records.push_back({"mag-gradient-bounded", true, Vec::Zero(n), bnorm, 0.0,
                              "affine map: the gradient is the constant linear part"});
    report.records.push_back({"mag-curvature-vanishes", true, Vec::Zero(n), 0.0, 0.0,
                              "affine map: curvature identically zero"});
  }
  {
    double sup = 0.0;
    Vec w = Vec::Zero(n);
    for (size_t i = 0; i < pts.size(); ++i)
      if (hnorm[i] > sup) {
        sup = hnorm[i];
        w = pts[i];
      }
    report.records.push_back({"v-hessian-bounded", true, w, sup, 0.0,
                              "bounded by the term degree rule; sampled sup reported"});
  }
  {
    double lo = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (double v : v1) {
      lo = std::min(lo, v);
      scale = std::max(scale, std::abs(v));
    }
    bool ok = lo >= -1e-12 * (1.0 + scale);
    report.records.push_back(
        {"v1-nonnegative", ok, argmin_witness(pts, v1, false), lo, 0.0, "sampled min of Re V"});
  }
  {
    std::vector<double> ratio(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) ratio[i] = v2abs[i] / (1.0 + v1[i] + g2sq[i]);
    double worst = *std::max_element(ratio.begin(), ratio.end());
    double constant = 0.0;
    for (double c : grid)
      if (worst <= c) {
        constant = c;
        break;
      }
    report.records.push_back({"v2-dominated-with-offset", constant > 0.0,
                              argmin_witness(pts, ratio, true), worst, constant,
                              "|Im V| against 1 + Re V + |grad Im V|^2"});
  }
  {
    HypothesisRecord rec{"v1-elliptic-at-infinity", false, Vec::Zero(n), 0.0, 0.0,
                         "Re V against (1 + |grad Im V|^2)/C outside |x| = C"};
    for (double c : grid) {
      double lo = std::numeric_limits<double>::infinity();
      Vec w = Vec::Zero(n);
      bool any = false;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (xnorm[i] < c) continue;
        any = true;
        double slack = v1[i] - (1.0 + g2sq[i]) / c;
        if (slack < lo) {
          lo = slack;
          w = pts[i];
        }
      }
      if (!any) break;
      rec.margin = lo;
      rec.witness = w;
      if (lo >= 0.0) {
        rec.pass = true;
        rec.constant = c;
        break;
      }
    }
    report.records.push_back(rec);
  }
  {
    double worst = 0.0;
    Vec w = Vec::Zero(n);
    for (const auto& x : spec.declared_minima) {
      Evaluation ev = evaluate(spec, x);
      double bad = std::max(std::abs(ev.v.imag()), ev.grad_v.imag().norm());
      if (bad > worst) {
        worst = bad;
        w = x;
      }
    }
    std::string note = spec.declared_minima.empty()
                           ? "no declared minima; vacuously true"
                           : "Im V and grad Im V at the declared minima";
    report.records.push_back({"v2-flat-at-minima", worst <= 1e-10, w, worst, 0.0, note});
  }
  {
    // symbol ellipticity lives on phase-space spheres
    HypothesisRecord rec{"symbol-elliptic-at-infinity", false, Vec::Zero(2 * n), 0.0, 0.0,
                         "Re p against m/C outside |X| = C in phase space"};
    std::vector<Vec> phase;
    std::vector<double> re_p, weight, pnorm;
    uint32_t poffset = 4 * uint32_t(shell_samples);
    for (double r : radii) {
      for (int i = 0; i < shell_samples; ++i) {
        Vec xp = rng::halton_sphere_point(poffset + uint32_t(i), 2 * n, r);
        Vec x = xp.head(n);
        Vec xi = xp.tail(n);
        Evaluation ev = evaluate(spec, x);
        double kinetic = (xi - ev.a).squaredNorm();
        phase.push_back(xp);
        re_p.push_back(kinetic + ev.v.real());
        weight.push_back(1.0 + kinetic + ev.v.real() + ev.grad_v.imag().squaredNorm());
        pnorm.push_back(xp.norm());
      }
      poffset += uint32_t(shell_samples);
    }
    for (double c : grid) {
      double lo = std::numeric_limits<double>::infinity();
      Vec w = Vec::Zero(2 * n);
      bool any = false;
      for (size_t i = 0; i < phase.size(); ++i) {
        if (pnorm[i] < c) continue;
        any = true;
        double slack = re_p[i] - weight[i] / c;
        if (slack < lo) {
          lo = slack;
          w = phase[i];
        }
      }
      if (!any) break;
      rec.margin = lo;
      rec.witness = w;
      if (lo >= 0.0) {
        rec.pass = true;
        rec.constant = c;
        break;
      }
    }
    report.records.push_back(rec);
  }
  {
    // global domination samples the shells plus the delicate zone near minima
    std::vector<Vec> gpts = pts;
    for (const auto& xj : spec.declared_minima)
      for (double r : {0.05, 0.1, 0.2, 0.5})
        for (uint32_t i = 0; i < 64; ++i)
          gpts.push_back(Vec(xj + rng::halton_sphere_point(i, n, r)));
    double worst = 0.0;
    Vec w = Vec::Zero(n);
    bool denominator_died = false;
    for (const auto& x : gpts) {
      Evaluation ev = evaluate(spec, x);
      double num = std::abs(ev.v.imag());
      double den = ev.v.real() + ev.grad_v.imag().squaredNorm();
      if (den <= 1e-14) {
        if (num > 1e-14) {
          denominator_died = true;
          w = x;
          worst = std::numeric_limits<double>::infinity();
          break;
        }
        continue;
      }
      double ratio = num / den;
      if (ratio > worst) {
        worst = ratio;
        w = x;
      }
    }
    double constant = 0.0;
    if (!denominator_died)
      for (double c : grid)
        if (worst <= c) {
          constant = c;
          break;
        }
    report.records.push_back({"v2-dominated-globally", constant > 0.0, w, worst, constant,
                              "|Im V| against Re V + |grad Im V|^2, minima neighborhoods included"});
  }
  return report;
}

double order_function(const PotentialSpec& spec, const Vec& x, const Vec& xi) {
  Evaluation ev = evaluate(spec, x);
  return 1.0 + (xi - ev.a).squaredNorm() + ev.v.real() + ev.grad_v.imag().squaredNorm();
}

OrderCheck check_order_property(const PotentialSpec& spec, double gamma, int trials,
                                std::mt19937_64& gen) {
  if (gamma != 0.5)
    throw PreconditionError("check_order_property: only gamma = 1/2 is supported");
  if (trials < 10000) throw PreconditionError("check_order_property: need >= 10^4 trials");

  const Index n = spec.dim;
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto ball_point = [&]() {
    Vec p(2 * n);
    for (Index i = 0; i < 2 * n; ++i) p[i] = g(gen);
    p.normalize();
    return Vec(20.0 * std::pow(u(gen), 1.0 / double(2 * n)) * p);
  };

  auto m_and_grad = [&](const Vec& xp) {
    Vec x = xp.head(n);
    Vec xi = xp.tail(n);
    Evaluation ev = evaluate(spec, x);
    Vec kin = xi - ev.a;
    double m = 1.0 + kin.squaredNorm() + ev.v.real() + ev.grad_v.imag().squaredNorm();
    Vec grad(2 * n);
    Vec v2g = ev.grad_v.imag();
    Mat v2h = ev.hess_v.imag();
    grad.head(n) = -2.0 * spec.b.transpose() * kin + ev.grad_v.real() + 2.0 * v2h * v2g;
    grad.tail(n) = 2.0 * kin;
    return std::pair<double, Vec>(m, grad);
  };

  OrderCheck check;
  for (int t = 0; t < trials; ++t) {
    Vec xp = ball_point();
    Vec yp = ball_point();
    auto [mx, gx] = m_and_grad(xp);
    auto [my, gy] = m_and_grad(yp);
    double bracket = 1.0 + (xp - yp).squaredNorm();
    check.worst_constant = std::max(check.worst_constant, mx / (bracket * my));
    check.grad_ratio_sup = std::max(check.grad_ratio_sup, gx.norm() / std::sqrt(mx));
    check.grad_ratio_sup = std::max(check.grad_ratio_sup, gy.norm() / std::sqrt(my));
  }
  return check;
}

}  // namespace nsa::potential
