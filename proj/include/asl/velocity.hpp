#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asl/grid.hpp"
#include "asl/norms.hpp"
#include "asl/spectral.hpp"

namespace asl {

enum class LawKind { None, BiotSavart, SQG, Newtonian, Custom };

/// Linear velocity operator given by a Fourier multiplier: v^_j(k) = m_j(k) rho^(k).
///
/// BiotSavart: m = i k_perp / |k|^2 with k_perp = (-k2, k1), i.e. v = grad_perp phi
/// for -Delta phi = omega. SQG: m = i k_perp / |k|. Newtonian: m = sign * i k / |k|^2,
/// sign = +1 attractive, -1 repulsive. Custom multipliers are looked up by integer
/// wavenumber; absent entries are zero.
class VelocityLaw {
 public:
  using Table = std::map<std::pair<int, int>, std::array<cplx, 2>>;

  VelocityLaw() = default;
  static VelocityLaw none() { return VelocityLaw(LawKind::None); }
  static VelocityLaw biot_savart() { return VelocityLaw(LawKind::BiotSavart); }
  static VelocityLaw sqg() { return VelocityLaw(LawKind::SQG); }
  static VelocityLaw newtonian(double sign = 1.0) {
    if (sign != 1.0 && sign != -1.0) throw std::invalid_argument("newtonian sign must be +1 or -1");
    VelocityLaw v(LawKind::Newtonian);
    v.sign_ = sign;
    return v;
  }
  static VelocityLaw custom(Table table, std::string source = "inline") {
    for (const auto& [k, m] : table)
      if (table.find({-k.first, -k.second}) == table.end() && (k.first != 0 || k.second != 0))
        throw std::invalid_argument("custom multiplier: missing entry for -k of (" + std::to_string(k.first) + "," +
                                    std::to_string(k.second) + ")");
    VelocityLaw v(LawKind::Custom);
    v.table_ = std::move(table);
    v.source_ = std::move(source);
    return v;
  }

  LawKind kind() const { return kind_; }
  double sign() const { return sign_; }

  std::string name() const {
    switch (kind_) {
      case LawKind::None: return "none";
      case LawKind::BiotSavart: return "biot_savart";
      case LawKind::SQG: return "sqg";
      case LawKind::Newtonian: return sign_ > 0 ? "newtonian_attractive" : "newtonian_repulsive";
      case LawKind::Custom: return "custom:" + source_;
    }
    return "?";
  }

  std::array<cplx, 2> multiplier(const TorusGrid& g, int ix, int iy) const {
    if (kind_ == LawKind::None || g.is_nyquist(ix) || g.is_nyquist(iy)) return {};
    const double kx = g.k(ix), ky = g.k(iy);
    const double k2 = kx * kx + ky * ky;
    if (kind_ == LawKind::Custom) {
      auto it = table_.find({g.kint(ix), g.kint(iy)});
      return it == table_.end() ? std::array<cplx, 2>{} : it->second;
    }
    if (k2 == 0.0) return {};
    const cplx i(0.0, 1.0);
    switch (kind_) {
      case LawKind::BiotSavart: return {i * (-ky) / k2, i * kx / k2};
      case LawKind::SQG: {
        const double k = std::sqrt(k2);
        return {i * (-ky) / k, i * kx / k};
      }
      case LawKind::Newtonian: return {sign_ * i * kx / k2, sign_ * i * ky / k2};
      default: return {};
    }
  }

  /// k . m(k) == 0 for every tabulated or analytic mode.
  bool divergence_free() const {
    if (kind_ == LawKind::Newtonian) return false;
    if (kind_ != LawKind::Custom) return true;
    for (const auto& [k, m] : table_)
      if (std::abs(static_cast<double>(k.first) * m[0] + static_cast<double>(k.second) * m[1]) > 1e-12) return false;
    return true;
  }

 private:
  explicit VelocityLaw(LawKind k) : kind_(k) {}
  LawKind kind_ = LawKind::None;
  double sign_ = 1.0;
  Table table_;
  std::string source_;
};

/// Reads a CSV multiplier table with header kx,ky,re_m1,im_m1,re_m2,im_m2.
inline VelocityLaw::Table read_multiplier_table(std::istream& is, const std::string& source) {
  std::string line;
  int lineno = 0;
  VelocityLaw::Table t;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "kx,ky,re_m1,im_m1,re_m2,im_m2")
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected header kx,ky,re_m1,im_m1,re_m2,im_m2");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double d = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || !std::isfinite(d))
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      v.push_back(d);
    }
    if (v.size() != 6) throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected 6 columns");
    if (v[0] != std::round(v[0]) || v[1] != std::round(v[1]))
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": wavenumbers must be integers");
    const std::pair<int, int> k{static_cast<int>(v[0]), static_cast<int>(v[1])};
    if (!t.emplace(k, std::array<cplx, 2>{cplx(v[2], v[3]), cplx(v[4], v[5])}).second)
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": duplicate wavenumber");
  }
  if (!header) throw std::runtime_error(source + ": empty multiplier table");
  return t;
}

/// biot_savart | sqg | newtonian_attractive | newtonian_repulsive | none | custom:<file>
inline VelocityLaw parse_law(const std::string& s) {
  if (s == "biot_savart") return VelocityLaw::biot_savart();
  if (s == "sqg") return VelocityLaw::sqg();
  if (s == "newtonian_attractive") return VelocityLaw::newtonian(1.0);
  if (s == "newtonian_repulsive") return VelocityLaw::newtonian(-1.0);
  if (s == "none") return VelocityLaw::none();
  if (s.rfind("custom:", 0) == 0) {
    const std::string path = s.substr(7);
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open multiplier table " + path);
    return VelocityLaw::custom(read_multiplier_table(is, path), path);
  }
  throw std::invalid_argument("unknown velocity law '" + s + "'");
}

namespace detail {

inline std::array<SpectralField, 2> velocity_spectrum(const VelocityLaw& law, const SpectralField& R) {
  const TorusGrid& g = R.grid();
  SpectralField vx(g), vy(g);
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      const auto m = law.multiplier(g, ix, iy);
      vx(ix, iy) = m[0] * R(ix, iy);
      vy(ix, iy) = m[1] * R(ix, iy);
    }
  return {std::move(vx), std::move(vy)};
}

inline ScalarField to_real(const VelocityLaw& law, const SpectralField& F) {
  return law.kind() == LawKind::Custom ? inverse_transform(F) : inverse_unchecked(F);
}

}  // namespace detail

inline VectorField apply_velocity(const VelocityLaw& law, const ScalarField& rho) {
  const auto V = detail::velocity_spectrum(law, forward_transform(rho));
  return {detail::to_real(law, V[0]), detail::to_real(law, V[1])};
}

/// d_i v_j via the multipliers i k_i m_j(k).
inline TensorField velocity_gradient(const VelocityLaw& law, const ScalarField& rho) {
  const auto V = detail::velocity_spectrum(law, forward_transform(rho));
  const TorusGrid& g = rho.grid();
  auto d = [&](const SpectralField& F, int axis) {
    return detail::to_real(
        law, detail::multiply(F, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, axis); }));
  };
  return {d(V[0], 0), d(V[1], 0), d(V[0], 1), d(V[1], 1)};
}

struct ConditionReport {
  std::string law;
  double c2_bmo_ratio = 0.0;     // sup ||grad V f||_BMO / ||f||_BMO
  double c2_lp_ratio = 0.0;      // sup ||grad V f||_p / (p ||f||_p)
  double c3_ratio = 0.0;         // sup ||V f||_2 / ||f||_{H^-1}
  double l2_ratio = 0.0;         // sup ||V f||_2 / ||f||_2
  double divfree_residual = 0.0; // sup ||div V f||_2 / ||f||_2
  double c3_multiplier_sup = 0.0;  // sup_k |k| |m(k)|
  double l2_multiplier_sup = 0.0;  // sup_k |m(k)|
  bool c3_analytic_ok = false;
  bool l2_analytic_ok = false;
};

namespace detail {

/// sup over k != 0 of w(k) on the full lattice and on the inner half |k_i| < n/4.
template <typename W>
std::pair<double, double> lattice_sup(const TorusGrid& g, W&& w) {
  double full = 0.0, inner = 0.0;
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      if (ix == 0 && iy == 0) continue;
      if (g.is_nyquist(ix) || g.is_nyquist(iy)) continue;
      const double v = w(ix, iy);
      full = std::max(full, v);
      if (std::abs(g.kint(ix)) < g.n() / 4 && std::abs(g.kint(iy)) < g.n() / 4) inner = std::max(inner, v);
    }
  return {full, inner};
}

inline double vec_norm(const std::array<cplx, 2>& m) { return std::sqrt(std::norm(m[0]) + std::norm(m[1])); }

}  // namespace detail

/// Empirical C2/C3 ratios over a corpus plus the analytic multiplier checks.
///
/// A multiplier bound counts as finite when its supremum over the full lattice
/// does not exceed the supremum over the inner half of the lattice; growth with
/// frequency means the bound fails as the grid refines.
inline ConditionReport check_conditions(const VelocityLaw& law, const std::vector<ScalarField>& corpus,
                                        const std::vector<double>& p_list) {
  if (corpus.empty()) throw std::invalid_argument("check_conditions: empty corpus");
  ConditionReport r;
  r.law = law.name();
  const TorusGrid& g0 = corpus.front().grid();
  auto [c3_full, c3_inner] = detail::lattice_sup(
      g0, [&](int ix, int iy) { return std::sqrt(g0.k_squared(ix, iy)) * detail::vec_norm(law.multiplier(g0, ix, iy)); });
  auto [l2_full, l2_inner] =
      detail::lattice_sup(g0, [&](int ix, int iy) { return detail::vec_norm(law.multiplier(g0, ix, iy)); });
  r.c3_multiplier_sup = c3_full;
  r.l2_multiplier_sup = l2_full;
  r.c3_analytic_ok = c3_full <= c3_inner * (1.0 + 1e-10);
  r.l2_analytic_ok = l2_full <= l2_inner * (1.0 + 1e-10);

  for (const ScalarField& f : corpus) {
    const VectorField v = apply_velocity(law, f);
    const TensorField dv = velocity_gradient(law, f);
    const double v2 = std::hypot(detail::l2_quadrature(v.x), detail::l2_quadrature(v.y));
    const double f2 = detail::l2_quadrature(f);
    if (f2 > 0.0) {
      r.l2_ratio = std::max(r.l2_ratio, v2 / f2);
      r.divfree_residual = std::max(r.divfree_residual, detail::l2_quadrature(dv.trace()) / f2);
    }
    if (is_mean_zero(f)) {
      const double hm1 = sobolev_norm(f, -1.0);
      if (hm1 > 0.0) r.c3_ratio = std::max(r.c3_ratio, v2 / hm1);
    }
    const double fb = bmo_norm(f);
    if (fb > 0.0) {
      double gb = 0.0;
      for (const ScalarField* c : {&dv.dx_vx, &dv.dx_vy, &dv.dy_vx, &dv.dy_vy}) gb = std::max(gb, bmo_norm(*c));
      r.c2_bmo_ratio = std::max(r.c2_bmo_ratio, gb / fb);
    }
    const ScalarField frob = dv.frobenius();
    for (double p : p_list) {
      const double fp = lp_norm(f, p);
      if (fp > 0.0) r.c2_lp_ratio = std::max(r.c2_lp_ratio, lp_norm(frob, p) / (p * fp));
    }
  }
  return r;
}

}  // namespace asl
