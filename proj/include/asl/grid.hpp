#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace asl {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(long n) {
  int l = 0;
  while ((1L << l) < n) ++l;
  return l;
}

/// Periodic square grid on [0, L)^2 with n points per axis.
///
/// Sample (i, j) sits at x = i*h, y = j*h and is stored at j*n + i (rows are y).
/// Wavenumber index i maps to the integer k = i for i < n/2 and i - n otherwise,
/// scaled by 2*pi/L.
class TorusGrid {
 public:
  explicit TorusGrid(int n, double length = two_pi) : n_(n), length_(length) {
    if (!is_power_of_two(n) || n < 16)
      throw std::invalid_argument("TorusGrid: n must be a power of two >= 16, got " +
                                  std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("TorusGrid: period must be positive and finite");
  }

  int n() const { return n_; }
  double length() const { return length_; }
  double h() const { return length_ / n_; }
  double cell_area() const { return h() * h(); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  double k_unit() const { return two_pi / length_; }

  /// Signed integer wavenumber of index i.
  int kint(int i) const { return i < n_ / 2 ? i : i - n_; }
  double k(int i) const { return k_unit() * kint(i); }
  double k_squared(int ix, int iy) const {
    double kx = k(ix), ky = k(iy);
    return kx * kx + ky * ky;
  }
  bool is_nyquist(int i) const { return i == n_ / 2; }
  /// Index of -k.
  int mirror(int i) const { return i == 0 ? 0 : n_ - i; }

  double x(int i) const { return h() * i; }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int n_;
  double length_;
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

class ScalarField {
 public:
  explicit ScalarField(TorusGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}
  ScalarField(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("ScalarField: expected " + std::to_string(grid_.size()) +
                                  " samples, got " + std::to_string(values_.size()));
  }

  /// Samples g(x, y) at the grid points.
  template <typename F>
  static ScalarField sample(TorusGrid grid, F&& g) {
    ScalarField f(grid);
    const int n = grid.n();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) f(i, j) = g(grid.x(i), grid.x(j));
    return f;
  }

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * grid_.n() + i]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j) * grid_.n() + i]; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField +=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField -=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }
  ScalarField& operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
  }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Fourier coefficients, same storage layout as ScalarField.
class SpectralField {
 public:
  explicit SpectralField(TorusGrid grid) : grid_(grid), coeffs_(grid.size(), cplx{}) {}
  SpectralField(TorusGrid grid, std::vector<cplx> coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) throw std::invalid_argument("SpectralField: size mismatch");
  }

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }
  cplx& operator()(int ix, int iy) { return coeffs_[static_cast<std::size_t>(iy) * grid_.n() + ix]; }
  cplx operator()(int ix, int iy) const { return coeffs_[static_cast<std::size_t>(iy) * grid_.n() + ix]; }

  /// max |F(k) - conj(F(-k))|.
  double symmetry_defect() const {
    const int n = grid_.n();
    double worst = 0.0;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        worst = std::max(worst, std::abs((*this)(ix, iy) - std::conj((*this)(grid_.mirror(ix), grid_.mirror(iy)))));
    return worst;
  }
  double max_abs() const {
    double m = 0.0;
    for (const cplx& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField +=");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (cplx& c : coeffs_) c *= a;
    return *this;
  }

 private:
  TorusGrid grid_;
  std::vector<cplx> coeffs_;
};

struct VectorField {
  ScalarField x;
  ScalarField y;

  VectorField(ScalarField x_, ScalarField y_) : x(std::move(x_)), y(std::move(y_)) {
    require_same_grid(x.grid(), y.grid(), "VectorField");
  }
  explicit VectorField(TorusGrid grid) : x(grid), y(grid) {}

  const TorusGrid& grid() const { return x.grid(); }

  /// Pointwise Euclidean magnitude.
  ScalarField magnitude() const {
    ScalarField m(grid());
    auto mv = m.values();
    auto xv = x.values(), yv = y.values();
    for (std::size_t k = 0; k < mv.size(); ++k) mv[k] = std::hypot(xv[k], yv[k]);
    return m;
  }
};

/// Velocity gradient components d_i v_j.
struct TensorField {
  ScalarField dx_vx, dx_vy, dy_vx, dy_vy;

  ScalarField frobenius() const {
    ScalarField m(dx_vx.grid());
    auto mv = m.values();
    auto a = dx_vx.values(), b = dx_vy.values(), c = dy_vx.values(), d = dy_vy.values();
    for (std::size_t k = 0; k < mv.size(); ++k)
      mv[k] = std::sqrt(a[k] * a[k] + b[k] * b[k] + c[k] * c[k] + d[k] * d[k]);
    return m;
  }
  ScalarField trace() const { return dx_vx + dy_vy; }
};

}  // namespace asl
