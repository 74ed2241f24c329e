#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "nsa/types.hpp"

namespace nsa::rng {

/// FNV-1a, used to derive independent substreams from (master seed, name).
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Deterministic generator for a named task under a master seed. Every
/// randomized estimator in the toolkit draws from one of these, so runs
/// are reproducible given (seed, task name).
inline std::mt19937_64 stream(std::uint64_t master_seed, std::string_view name) {
  std::uint64_t x = master_seed ^ hash_name(name);
  // splitmix64 scramble so nearby seeds decorrelate
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  x = x ^ (x >> 31);
  return std::mt19937_64(x);
}

inline Vec gaussian_vector(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> dist;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

inline CVec gaussian_cvector(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> dist;
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Cplx(dist(gen), dist(gen));
  return v;
}

/// Van der Corput radical inverse in the given base; Halton sequences are
/// built from coprime bases per dimension.
inline double radical_inverse(std::uint32_t i, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

/// Quasi-random point on the sphere |x| = rho in dimension n, index i.
/// Uses Halton pairs through a Box-Muller map; deterministic in i.
Vec halton_sphere_point(std::uint32_t i, Index n, double rho);

}  // namespace nsa::rng
