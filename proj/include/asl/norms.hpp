#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "asl/dyadic.hpp"
#include "asl/grid.hpp"
#include "asl/rng.hpp"
#include "asl/spectral.hpp"

namespace asl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (integral |f|^p)^{1/p} by equal-weight quadrature; p = inf gives max |f|.
inline double lp_norm(const ScalarField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1, got " + std::to_string(p));
  double peak = 0.0;
  for (double v : f.values()) peak = std::max(peak, std::abs(v));
  if (std::isinf(p) || peak == 0.0) return peak;
  // Scale by the peak so large p neither overflows nor underflows.
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v) / peak, p);
  return peak * std::pow(s * f.grid().cell_area(), 1.0 / p);
}

/// ||f||_{H^s} = (sum_k |k|^{2s} |f^(k)|^2)^{1/2}. Negative s requires zero mean.
inline double sobolev_norm(const ScalarField& f, double s) {
  if (s < 0.0) require_mean_zero(f, "sobolev_norm");
  const SpectralField F = forward_transform(f);
  const TorusGrid& g = f.grid();
  double sum = 0.0;
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      const double k2 = g.k_squared(ix, iy);
      double w;
      if (k2 == 0.0)
        w = (s == 0.0) ? 1.0 : 0.0;
      else
        w = std::pow(k2, s);
      sum += w * std::norm(F(ix, iy));
    }
  return std::sqrt(sum);
}

struct PotentialNorm {
  double norm;              // ||grad phi||_2
  VectorField grad_phi;
};

/// Solves -Delta phi = w and returns ||grad phi||_2 with grad phi; this is the
/// H^{-1} norm of w.
///
/// The norm is that of the trigonometric interpolant, summed in Fourier space.
/// The sampled gradient drops the Nyquist row/column (its derivative vanishes at
/// the grid points), so for band-limited w the two agree to rounding.
inline PotentialNorm hminus1_via_potential(const ScalarField& w) {
  require_mean_zero(w, "hminus1_via_potential");
  const TorusGrid& g = w.grid();
  const SpectralField W = forward_transform(w);
  double sum = 0.0;
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      const double k2 = g.k_squared(ix, iy);
      if (k2 > 0.0) sum += std::norm(W(ix, iy)) / k2;
    }
  auto phi = detail::multiply(W, [&](int ix, int iy) {
    const double k2 = g.k_squared(ix, iy);
    return cplx(k2 == 0.0 ? 0.0 : 1.0 / k2, 0.0);
  });
  auto dx = detail::multiply(phi, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 0); });
  auto dy = detail::multiply(phi, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 1); });
  return {std::sqrt(sum), VectorField(detail::inverse_unchecked(dx), detail::inverse_unchecked(dy))};
}

/// Dyadic BMO seminorm on the torus (anchored lattice plus one-third shifts).
inline double bmo_norm(const ScalarField& f, int max_depth) {
  BmoLattice lat;
  lat.max_depth = max_depth;
  return dyadic_mean_oscillation(f.values(), f.n(), lat).value;
}

inline double bmo_norm(const ScalarField& f, const BmoLattice& lat = {}) {
  return dyadic_mean_oscillation(f.values(), f.n(), lat).value;
}

inline int default_bmo_depth(int n) { return log2_exact(n) - 1; }

struct GrowthRow {
  double p;
  double lp;   // ||f||_p
  double rhs;  // p^{1-p0/p} ||f||_BMO^{1-p0/p} ||f||_{p0}^{p0/p}
  double ratio;
};

struct GrowthProfile {
  double p0;
  double bmo;
  double lp0;
  std::vector<GrowthRow> rows;
  double sup_ratio = 0.0;
};

/// Measured ||f||_p against the BMO-L^{p0} interpolation bound for each p.
inline GrowthProfile lp_growth_profile(const ScalarField& f, const std::vector<double>& p_list, double p0,
                                       const BmoLattice& lat = {}) {
  if (p_list.empty()) throw std::invalid_argument("lp_growth_profile: empty p list");
  if (!(p0 < *std::min_element(p_list.begin(), p_list.end())))
    throw std::invalid_argument("lp_growth_profile: p0 must be below every p");
  GrowthProfile out{p0, bmo_norm(f, lat), lp_norm(f, p0), {}, 0.0};
  for (double p : p_list) {
    const double lp = lp_norm(f, p);
    const double theta = 1.0 - p0 / p;
    const double rhs = std::pow(p, theta) * std::pow(out.bmo, theta) * std::pow(out.lp0, p0 / p);
    double ratio;
    if (rhs > 0.0)
      ratio = lp / rhs;
    else
      ratio = lp > 0.0 ? kInf : 0.0;
    out.rows.push_back({p, lp, rhs, ratio});
    out.sup_ratio = std::max(out.sup_ratio, ratio);
  }
  return out;
}

struct ModulusSample {
  double r;
  double ratio;            // max |v(x)-v(y)| / (r |log r|)
  double lipschitz_ratio;  // max |v(x)-v(y)| / r
};

namespace detail {

inline double bilinear_periodic(const ScalarField& f, double x, double y) {
  const double h = f.grid().h();
  const int n = f.n();
  const double gx = x / h, gy = y / h;
  const double fx = std::floor(gx), fy = std::floor(gy);
  const double tx = gx - fx, ty = gy - fy;
  const int i0 = ((static_cast<long>(fx) % n) + n) % n, j0 = ((static_cast<long>(fy) % n) + n) % n;
  const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
  return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i1, j0) + (1 - tx) * ty * f(i0, j1) +
         tx * ty * f(i1, j1);
}

/// Grid cell where the centered-difference gradient of v is largest.
inline std::pair<int, int> steepest_cell(const VectorField& v) {
  const int n = v.grid().n();
  double best = -1.0;
  std::pair<int, int> at{0, 0};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n, jp = (j + 1) % n, jm = (j + n - 1) % n;
      const double a = v.x(ip, j) - v.x(im, j), b = v.x(i, jp) - v.x(i, jm);
      const double c = v.y(ip, j) - v.y(im, j), d = v.y(i, jp) - v.y(i, jm);
      const double g = a * a + b * b + c * c + d * d;
      if (g > best) {
        best = g;
        at = {i, j};
      }
    }
  return at;
}

}  // namespace detail

/// Samples pairs at distance r and records the worst log-Lipschitz ratio.
///
/// Half of the base points are uniform on the torus; the other half lie within r
/// of the cell where |grad v| peaks, since the supremum is attained there.
inline std::vector<ModulusSample> log_lipschitz_modulus(const VectorField& v, const std::vector<double>& r_values,
                                                        int samples_per_r, std::uint64_t seed) {
  if (samples_per_r < 100) throw std::invalid_argument("log_lipschitz_modulus: need at least 100 samples per r");
  const TorusGrid& g = v.grid();
  const double r_cap = std::exp(-1.0);
  for (double r : r_values) {
    if (!(r > 0.0) || r >= r_cap)
      throw std::invalid_argument("log_lipschitz_modulus: r must lie in (0, 1/e), got " + std::to_string(r));
    if (r < 2.0 * g.h())
      throw std::invalid_argument("log_lipschitz_modulus: r below two grid spacings is under-resolved");
  }
  const auto [ci, cj] = detail::steepest_cell(v);
  const double cx = g.x(ci), cy = g.x(cj);
  Rng rng(seed);
  std::vector<ModulusSample> out;
  for (double r : r_values) {
    double worst = 0.0;
    for (int s = 0; s < samples_per_r; ++s) {
      double x, y;
      if (s % 2 == 0) {
        x = rng.uniform(0.0, g.length());
        y = rng.uniform(0.0, g.length());
      } else {
        const double rad = r * std::sqrt(rng.uniform()), phi = two_pi * rng.uniform();
        x = cx + rad * std::cos(phi);
        y = cy + rad * std::sin(phi);
      }
      const double theta = two_pi * rng.uniform();
      const double x2 = x + r * std::cos(theta), y2 = y + r * std::sin(theta);
      const double dvx = detail::bilinear_periodic(v.x, x, y) - detail::bilinear_periodic(v.x, x2, y2);
      const double dvy = detail::bilinear_periodic(v.y, x, y) - detail::bilinear_periodic(v.y, x2, y2);
      worst = std::max(worst, std::hypot(dvx, dvy));
    }
    out.push_back({r, worst / (r * std::abs(std::log(r))), worst / r});
  }
  return out;
}

struct Point {
  double x = 0.0, y = 0.0;
};

/// integral |x - center| |f(x)| dx over the fundamental domain centred at `center`.
inline double first_moment(const ScalarField& f, Point center) {
  const TorusGrid& g = f.grid();
  const double L = g.length(), half = 0.5 * L;
  auto wrap = [&](double d) { return d - L * std::floor(d / L + 0.5); };
  double sum = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const double dist = std::hypot(wrap(g.x(i) - center.x), wrap(g.x(j) - center.y));
      const double a = std::abs(f(i, j));
      if (dist >= half && a >= 1e-10)
        throw std::invalid_argument("first_moment: support reaches the boundary of the fundamental domain");
      sum += dist * a;
    }
  return sum * g.cell_area();
}

struct HardyPairing {
  double pairing;  // max over kernels of |integral K f|
  double bound;    // ||f||_p + M_1
  double ratio;    // pairing / bound
  double lp;
  double moment;
};

/// Duality test of the Hardy-space bound: kernels must have dyadic BMO norm <= 1.
inline HardyPairing hardy_pairing_bound(const ScalarField& f, const std::vector<ScalarField>& kernels, double p,
                                        Point center, const BmoLattice& lat = {}) {
  if (!(p > 1.0)) throw std::invalid_argument("hardy_pairing_bound: p must exceed 1");
  require_mean_zero(f, "hardy_pairing_bound");
  const double lp = lp_norm(f, p);
  const double moment = first_moment(f, center);
  double pairing = 0.0;
  for (const ScalarField& K : kernels) {
    require_same_grid(f.grid(), K.grid(), "hardy_pairing_bound");
    if (bmo_norm(K, lat) > 1.0 + 1e-9)
      throw std::invalid_argument("hardy_pairing_bound: kernel BMO norm exceeds 1; normalize first");
    double s = 0.0;
    auto fv = f.values(), kv = K.values();
    for (std::size_t k = 0; k < fv.size(); ++k) s += fv[k] * kv[k];
    pairing = std::max(pairing, std::abs(s * f.grid().cell_area()));
  }
  const double bound = lp + moment;
  return {pairing, bound, bound > 0.0 ? pairing / bound : 0.0, lp, moment};
}

/// K / ||K||_BMO (returns K unchanged when its oscillation vanishes).
inline ScalarField normalize_bmo(ScalarField K, const BmoLattice& lat = {}) {
  const double b = bmo_norm(K, lat);
  if (b > 0.0) K *= 1.0 / b;
  return K;
}

struct NormReport {
  std::string name;
  double param = 0.0;  // p or s
  int depth = 0;
  double value = 0.0;
};

inline void write_norm_csv(std::ostream& os, const std::vector<NormReport>& rows) {
  os << "name,p_or_s,depth,value\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%.17g\n", r.name.c_str(), r.param, r.depth, r.value);
    os << buf;
  }
}

}  // namespace asl
