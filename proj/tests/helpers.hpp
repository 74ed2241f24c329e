#pragma once

#include <random>
#include <vector>

#include "nsa/model.hpp"
#include "nsa/types.hpp"

namespace helpers {

using nsa::Cplx;
using nsa::Index;
using nsa::Mat;
using nsa::Vec;
using nsa::kImagUnit;

inline Mat random_antisymmetric(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> g;
  Mat w(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) w(i, j) = g(gen);
  return 0.5 * (w - w.transpose());
}

// Random admissible model: A antisymmetric, Re V positive definite unless
// degenerate, in which case Re V and Im V share a one-dimensional kernel.
inline nsa::model::QuadraticModel random_model(std::mt19937_64& gen, Index n,
                                               bool degenerate = false) {
  std::normal_distribution<double> g;
  Mat a = random_antisymmetric(gen, n);
  Mat g1(n, n), g2(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      g1(i, j) = g(gen);
      g2(i, j) = g(gen);
    }
  Mat v1 = g1.transpose() * g1 + 0.1 * Mat::Identity(n, n);
  Mat v2 = 0.5 * (g2 + g2.transpose());
  if (degenerate) {
    Vec y(n);
    for (Index i = 0; i < n; ++i) y[i] = g(gen);
    y.normalize();
    Mat p = Mat::Identity(n, n) - y * y.transpose();
    v1 = p * v1 * p;
    v2 = p * v2 * p;
  }
  return nsa::model::QuadraticModel(a, v1.cast<Cplx>() + kImagUnit * v2.cast<Cplx>());
}

inline std::vector<Cplx> flatten_spectrum(const std::vector<nsa::model::ModelEigenvalue>& spec) {
  std::vector<Cplx> flat;
  for (const auto& ev : spec)
    for (int r = 0; r < ev.multiplicity; ++r) flat.push_back(ev.value);
  return flat;
}

inline double nearest_distance(Cplx z, const std::vector<Cplx>& list) {
  double best = std::numeric_limits<double>::infinity();
  for (Cplx w : list) best = std::min(best, std::abs(z - w));
  return best;
}

}  // namespace helpers
