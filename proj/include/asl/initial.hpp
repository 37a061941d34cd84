#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "asl/grid.hpp"
#include "asl/norms.hpp"
#include "asl/rng.hpp"
#include "asl/spectral.hpp"

namespace asl {

/// Mean-zero random field with coefficient magnitudes ~ |k|^{-s} for 1 <= |k_int| <= k_max
/// (integer wavenumbers, Nyquist excluded), scaled to the requested L^2 norm.
inline ScalarField smooth_random_field(const TorusGrid& g, double s, int k_max, std::uint64_t seed, double l2 = 1.0) {
  if (k_max < 1 || k_max >= g.n() / 2) throw std::invalid_argument("smooth_random_field: k_max out of range");
  Rng rng(seed);
  SpectralField F(g);
  const int n = g.n();
  for (int ky = -k_max; ky <= k_max; ++ky)
    for (int kx = -k_max; kx <= k_max; ++kx) {
      const int kk = kx * kx + ky * ky;
      // One draw per conjugate pair, visited from the half-plane (ky > 0) or (ky == 0, kx > 0).
      if (kk == 0 || kk > k_max * k_max || ky < 0 || (ky == 0 && kx < 0)) continue;
      const double amp = std::pow(std::sqrt(static_cast<double>(kk)), -s);
      const cplx c(amp * rng.normal(), amp * rng.normal());
      const int ix = (kx + n) % n, iy = (ky + n) % n;
      F(ix, iy) = c;
      F(g.mirror(ix), g.mirror(iy)) = std::conj(c);
    }
  ScalarField f = inverse_transform(F);
  const double norm = lp_norm(f, 2.0);
  if (norm > 0.0) f *= l2 / norm;
  return f;
}

/// Squared periodic distance (L/pi)^2 (sin^2(pi dx/L) + sin^2(pi dy/L)): smooth on the
/// torus and equal to |x - c|^2 to leading order near c.
inline double periodic_dist2(const TorusGrid& g, double x, double y, double cx, double cy) {
  const double L = g.length(), a = std::sin(std::numbers::pi * (x - cx) / L), b = std::sin(std::numbers::pi * (y - cy) / L);
  return (L / std::numbers::pi) * (L / std::numbers::pi) * (a * a + b * b);
}

/// -1/2 log(d^2 + eps^2): log(1/|x - c|) mollified at scale eps, the BMO-but-unbounded exemplar.
inline ScalarField mollified_log(const TorusGrid& g, double cx, double cy, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollified_log: eps must be positive");
  return ScalarField::sample(g, [&](double x, double y) { return -0.5 * std::log(periodic_dist2(g, x, y, cx, cy) + eps * eps); });
}

inline ScalarField gaussian_bump(const TorusGrid& g, double cx, double cy, double sigma, double amplitude = 1.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_bump: sigma must be positive");
  return ScalarField::sample(
      g, [&](double x, double y) { return amplitude * std::exp(-periodic_dist2(g, x, y, cx, cy) / (2.0 * sigma * sigma)); });
}

}  // namespace asl
