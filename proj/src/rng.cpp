#include "nsa/rng.hpp"

#include <cmath>

namespace nsa::rng {

Vec halton_sphere_point(uint32_t i, Index n, double rho) {
  // Low-discrepancy direction: Box-Muller on consecutive prime-base
  // radical-inverse pairs, then projection to the sphere of radius rho.
  static constexpr uint32_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                        31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  Vec g(n);
  for (Index k = 0; k < n; k += 2) {
    double u1 = radical_inverse(i + 1, primes[(2 * k) % 20]);
    double u2 = radical_inverse(i + 1, primes[(2 * k + 1) % 20]);
    u1 = std::max(u1, 1e-12);
    double r = std::sqrt(-2.0 * std::log(u1));
    g[k] = r * std::cos(2.0 * M_PI * u2);
    if (k + 1 < n) g[k + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  double nm = g.norm();
  if (nm == 0.0) {
    g.setZero();
    g[0] = 1.0;
    nm = 1.0;
  }
  return g * (rho / nm);
}

}  // namespace nsa::rng
