#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "asl/fft.hpp"
#include "asl/grid.hpp"

namespace asl {

// Unitary convention on the torus: F(k) = (1/L) * integral f(x) e^{-ik.x} dx, so that
// sum_k |F(k)|^2 = ||f||_2^2 and f(x) = (1/L) sum_k F(k) e^{ik.x}.

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kMeanZeroTolerance = 1e-10;

namespace detail {

inline SpectralField forward_unchecked(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  auto& fft = thread_fft(g.n());
  auto buf = fft.buffer();
  auto v = f.values();
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = cplx(v[k], 0.0);
  fft.forward();
  const double scale = g.length() / static_cast<double>(g.size());
  SpectralField out(g);
  auto c = out.coeffs();
  for (std::size_t k = 0; k < buf.size(); ++k) c[k] = buf[k] * scale;
  return out;
}

inline ScalarField inverse_unchecked(const SpectralField& F) {
  const TorusGrid& g = F.grid();
  auto& fft = thread_fft(g.n());
  auto buf = fft.buffer();
  auto c = F.coeffs();
  std::copy(c.begin(), c.end(), buf.begin());
  fft.backward();
  const double scale = 1.0 / g.length();
  ScalarField out(g);
  auto v = out.values();
  for (std::size_t k = 0; k < buf.size(); ++k) v[k] = buf[k].real() * scale;
  return out;
}

/// Multiplies every coefficient by m(ix, iy).
template <typename M>
SpectralField multiply(const SpectralField& F, M&& m) {
  SpectralField out(F.grid());
  const int n = F.n();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) out(ix, iy) = m(ix, iy) * F(ix, iy);
  return out;
}

/// Symbol i*k_axis, zero on the Nyquist row/column.
inline cplx derivative_symbol(const TorusGrid& g, int ix, int iy, int axis) {
  if (g.is_nyquist(ix) || g.is_nyquist(iy)) return {};
  return cplx(0.0, axis == 0 ? g.k(ix) : g.k(iy));
}

inline double integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_area();
}

inline double l2_quadrature(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().cell_area());
}

}  // namespace detail

inline void require_finite(const ScalarField& f, const char* what) {
  if (!f.all_finite()) throw std::invalid_argument(std::string(what) + ": non-finite sample values");
}

/// |f^(0)| <= 1e-10 ||f||_2, the admissibility test for negative-order operators.
inline bool is_mean_zero(const ScalarField& f) {
  const double mean_coeff = std::abs(detail::integral(f)) / f.grid().length();
  return mean_coeff <= kMeanZeroTolerance * detail::l2_quadrature(f);
}

inline void require_mean_zero(const ScalarField& f, const char* what) {
  if (!is_mean_zero(f))
    throw std::invalid_argument(std::string(what) + ": field must have zero mean (|f^(0)| > 1e-10 ||f||_2)");
}

inline ScalarField subtract_mean(ScalarField f) {
  f += -detail::integral(f) / (f.grid().length() * f.grid().length());
  return f;
}

inline SpectralField forward_transform(const ScalarField& f) {
  require_finite(f, "forward_transform");
  return detail::forward_unchecked(f);
}

inline ScalarField inverse_transform(const SpectralField& F) {
  const double defect = F.symmetry_defect();
  if (defect > kSymmetryTolerance * std::max(F.max_abs(), 1e-300) && defect > 0.0)
    throw std::invalid_argument("inverse_transform: coefficients are not conjugate-symmetric (defect " +
                                std::to_string(defect) + ")");
  return detail::inverse_unchecked(F);
}

inline VectorField spectral_gradient(const ScalarField& f) {
  const SpectralField F = forward_transform(f);
  const TorusGrid& g = f.grid();
  auto dx = detail::multiply(F, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 0); });
  auto dy = detail::multiply(F, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 1); });
  return {detail::inverse_unchecked(dx), detail::inverse_unchecked(dy)};
}

inline ScalarField spectral_divergence(const VectorField& v) {
  const TorusGrid& g = v.grid();
  SpectralField X = forward_transform(v.x);
  SpectralField Y = forward_transform(v.y);
  SpectralField out(g);
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix)
      out(ix, iy) = detail::derivative_symbol(g, ix, iy, 0) * X(ix, iy) +
                    detail::derivative_symbol(g, ix, iy, 1) * Y(ix, iy);
  return detail::inverse_unchecked(out);
}

/// Symbol |k|^{2 gamma}, with the zero mode annihilated.
inline double fractional_symbol(const TorusGrid& g, int ix, int iy, double gamma) {
  const double k2 = g.k_squared(ix, iy);
  return k2 == 0.0 ? 0.0 : std::pow(k2, gamma);
}

/// (-Delta)^gamma f for gamma in (0, 1].
inline ScalarField fractional_laplacian(const ScalarField& f, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("fractional_laplacian: gamma must lie in (0,1], got " + std::to_string(gamma));
  const TorusGrid& g = f.grid();
  auto F = detail::multiply(forward_transform(f),
                            [&](int ix, int iy) { return cplx(fractional_symbol(g, ix, iy, gamma), 0.0); });
  return detail::inverse_unchecked(F);
}

inline bool outside_two_thirds(const TorusGrid& g, int ix, int iy) {
  const int m = std::max(std::abs(g.kint(ix)), std::abs(g.kint(iy)));
  return 3 * m > g.n();
}

/// 2/3 rule: zero every mode with max(|k1|,|k2|) > n/3.
inline SpectralField dealias(SpectralField F) {
  const TorusGrid g = F.grid();
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix)
      if (outside_two_thirds(g, ix, iy)) F(ix, iy) = cplx{};
  return F;
}

/// Solves -Delta phi = w with zero-mean phi; w must be mean-zero.
inline ScalarField solve_poisson(const ScalarField& w) {
  require_mean_zero(w, "solve_poisson");
  const TorusGrid& g = w.grid();
  auto F = detail::multiply(forward_transform(w), [&](int ix, int iy) {
    const double k2 = g.k_squared(ix, iy);
    return cplx(k2 == 0.0 ? 0.0 : 1.0 / k2, 0.0);
  });
  return detail::inverse_unchecked(F);
}

}  // namespace asl
