#pragma once

#include <random>
#include <string>
#include <vector>

#include "nsa/model.hpp"
#include "nsa/types.hpp"

namespace nsa::potential {

/// One electric term c * x^alpha * (1 + |x|^2)^{-damp}. Pure monomials
/// (damp = 0) must have |alpha| <= 2; damped terms need |alpha| - 2 damp
/// <= 2. Either way all second derivatives stay bounded on R^n.
struct VTerm {
  Cplx coeff;
  std::vector<int> alpha;
  int damp = 0;
};

/// Magnetic map A(x) = a0 + B x plus an electric term list, with the
/// declared minima of Re V carried along for hypothesis checks.
struct PotentialSpec {
  Index dim = 0;
  Vec a0;
  Mat b;
  std::vector<VTerm> v_terms;
  std::vector<Vec> declared_minima;

  PotentialSpec(Index dim, Vec a0, Mat b, std::vector<VTerm> v_terms,
                std::vector<Vec> declared_minima = {});
};

/// Exact pointwise data of the potential pair at x.
struct Evaluation {
  Vec a;
  Cplx v;
  CVec grad_v;
  CMat hess_v;
};

/// Symbolic evaluation: values and first and second derivatives come from
/// term-by-term calculus, never from finite differences.
Evaluation evaluate(const PotentialSpec& spec, const Vec& x);

/// A verified zero of Re V with its quadratic model (eta - A'(x)y)^2
/// + (1/2) V''(x) y.y attached.
struct MinimumPoint {
  Vec x;
  CMat hess_v;
  Mat mag_jac;
  model::QuadraticModel quadratic;
};

/// Checks each candidate: V1, grad V1, V2, grad V2 all vanish to 1e-10,
/// V1 > 0 on small spheres around the candidate (the zero is isolated),
/// and V''(x) is invertible. Throws NotAMinimum naming the failed
/// condition, or DegenerateHessian when sigma_min(V'') < 1e-8.
std::vector<MinimumPoint> verify_minima(const PotentialSpec& spec,
                                        const std::vector<Vec>& candidates);

/// One hypothesis verdict: sampled margin, best constant where the
/// hypothesis involves one, and the worst witness point.
struct HypothesisRecord {
  std::string id;
  bool pass = false;
  Vec witness;
  double margin = 0.0;
  double constant = 0.0;
  std::string note;
};

struct AssumptionReport {
  std::vector<HypothesisRecord> records;

  bool all_pass() const;
  const HypothesisRecord& find(const std::string& id) const;
};

/// Samples the standing hypotheses on spheres |x| in {R/4, R/2, R, 2R}
/// (phase-space spheres for the symbol ellipticity record) and reports
/// per-hypothesis verdicts instead of throwing. Structural records:
///   mag-gradient-bounded      grad A = O(1)
///   mag-curvature-vanishes    second derivatives of affine A are zero
///   v-hessian-bounded         second derivatives of V bounded (term rule)
/// Sampled records:
///   v1-nonnegative            V1 >= 0
///   v2-dominated-with-offset  |V2| <= C (1 + V1 + |V2'|^2)
///   v1-elliptic-at-infinity   V1 >= (1 + |V2'|^2)/C for |x| >= C
///   v2-flat-at-minima         V2 and grad V2 vanish at declared minima
///   symbol-elliptic-at-infinity  Re p >= m/C for |X| >= C
///   v2-dominated-globally     |V2| <= C (V1 + |V2'|^2), minima included
/// Constants are the smallest passing entry of c_search_grid.
AssumptionReport check_assumptions(const PotentialSpec& spec, double sample_radius,
                                   int shell_samples, const std::vector<double>& c_search_grid);

/// Weight m(X) = 1 + (xi - A(x))^2 + V1(x) + |V2'(x)|^2.
double order_function(const PotentialSpec& spec, const Vec& x, const Vec& xi);

/// Sampled order-function constants over random pairs in a ball of
/// radius 20: worst m(X) / (<X-Y>^2 m(Y)) and the sampled sup of
/// |grad m| / m^{1/2}. Only the exponent from gamma = 1/2 is supported.
struct OrderCheck {
  double worst_constant = 0.0;
  double grad_ratio_sup = 0.0;
};

OrderCheck check_order_property(const PotentialSpec& spec, double gamma, int trials,
                                std::mt19937_64& gen);

}  // namespace nsa::potential
