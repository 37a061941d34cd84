#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "asl/grid.hpp"
#include "asl/norms.hpp"
#include "asl/spectral.hpp"
#include "asl/velocity.hpp"

namespace asl {

/// A(rho) = 0, nu*rho, or nu*sign(rho)|rho|^m.
struct DiffusionSpec {
  enum class Kind { None, Linear, Porous };
  Kind kind = Kind::None;
  double nu = 0.0;
  double m = 1.0;

  static DiffusionSpec none() { return {}; }
  static DiffusionSpec linear(double nu) { return checked({Kind::Linear, nu, 1.0}); }
  static DiffusionSpec porous(double m, double nu) { return checked({Kind::Porous, nu, m}); }

  double A(double r) const {
    switch (kind) {
      case Kind::None: return 0.0;
      case Kind::Linear: return nu * r;
      case Kind::Porous: return nu * std::copysign(std::pow(std::abs(r), m), r);
    }
    return 0.0;
  }
  std::string name() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Linear: return "linear";
      case Kind::Porous: return "porous";
    }
    return "?";
  }

 private:
  static DiffusionSpec checked(DiffusionSpec d) {
    if (!(d.nu >= 0.0)) throw std::invalid_argument("diffusion: nu must be >= 0");
    if (!(d.m >= 1.0)) throw std::invalid_argument("diffusion: porous exponent m must be >= 1");
    return d;
  }
};

/// rho_t + div(rho V rho) = Laplacian A(rho).
struct Type1Problem {
  VelocityLaw law;
  DiffusionSpec diffusion;
  TorusGrid grid{16};
  double dt = 1e-3;
  double t_end = 1.0;
  ScalarField initial{TorusGrid(16)};
};

/// rho_t + V rho . grad rho = -nu (-Laplacian)^gamma rho. With `frozen_velocity` the
/// advecting field is fixed instead of V rho.
struct Type2Problem {
  VelocityLaw law;
  double nu = 0.0;
  double gamma = 1.0;
  TorusGrid grid{16};
  double dt = 1e-3;
  double t_end = 1.0;
  ScalarField initial{TorusGrid(16)};
  std::optional<VectorField> frozen_velocity;
};

using Problem = std::variant<Type1Problem, Type2Problem>;

struct StepRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kCflLimit = 0.5;
inline constexpr int kMaxHalvings = 12;

inline void validate(const Type1Problem& p) {
  require_same_grid(p.grid, p.initial.grid(), "Type1Problem");
  if (!(p.dt > 0.0) || !(p.t_end >= 0.0)) throw std::invalid_argument("Type1Problem: need dt > 0 and t_end >= 0");
  require_finite(p.initial, "Type1Problem initial");
}

inline void validate(const Type2Problem& p) {
  require_same_grid(p.grid, p.initial.grid(), "Type2Problem");
  if (!(p.dt > 0.0) || !(p.t_end >= 0.0)) throw std::invalid_argument("Type2Problem: need dt > 0 and t_end >= 0");
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw std::invalid_argument("Type2Problem: gamma must lie in (0,1]");
  if (!(p.nu >= 0.0)) throw std::invalid_argument("Type2Problem: nu must be >= 0");
  if (!p.frozen_velocity && !p.law.divergence_free())
    throw std::invalid_argument("Type2Problem: velocity law '" + p.law.name() + "' is not divergence-free");
  require_finite(p.initial, "Type2Problem initial");
}

/// Pseudospectral integrator: the state is held as dealiased Fourier coefficients,
/// the stiff linear part is integrated exactly and the rest by Lawson RK4.
class Integrator {
 public:
  explicit Integrator(Problem p) : prob_(std::move(p)) {
    std::visit([](const auto& q) { validate(q); }, prob_);
    const TorusGrid& g = grid();
    linear_.assign(g.size(), 0.0);
    double kmax2 = 0.0;
    for (int iy = 0; iy < g.n(); ++iy)
      for (int ix = 0; ix < g.n(); ++ix) {
        const std::size_t k = static_cast<std::size_t>(iy) * g.n() + ix;
        if (!outside_two_thirds(g, ix, iy)) kmax2 = std::max(kmax2, g.k_squared(ix, iy));
        if (auto* t1 = std::get_if<Type1Problem>(&prob_)) {
          if (t1->diffusion.kind == DiffusionSpec::Kind::Linear) linear_[k] = t1->diffusion.nu * g.k_squared(ix, iy);
        } else {
          const auto& t2 = std::get<Type2Problem>(prob_);
          linear_[k] = t2.nu * fractional_symbol(g, ix, iy, t2.gamma);
        }
      }
    kmax2_ = kmax2;
    if (auto* t2 = std::get_if<Type2Problem>(&prob_); t2 && t2->frozen_velocity) {
      frozen_max_ = std::max(lp_norm(t2->frozen_velocity->x, kInf), lp_norm(t2->frozen_velocity->y, kInf));
    }
  }

  const Problem& problem() const { return prob_; }
  const TorusGrid& grid() const {
    return std::visit([](const auto& q) -> const TorusGrid& { return q.grid; }, prob_);
  }
  double dt() const { return std::visit([](const auto& q) { return q.dt; }, prob_); }
  double t_end() const { return std::visit([](const auto& q) { return q.t_end; }, prob_); }
  const ScalarField& initial() const {
    return std::visit([](const auto& q) -> const ScalarField& { return q.initial; }, prob_);
  }

  /// Macro step that lands exactly on t_end: t_end / ceil(t_end / dt).
  double macro_dt() const {
    if (t_end() == 0.0) return 0.0;
    return t_end() / std::ceil(t_end() / dt() - 1e-9);
  }
  int macro_steps() const { return t_end() == 0.0 ? 0 : static_cast<int>(std::lround(t_end() / macro_dt())); }

  SpectralField project(const ScalarField& f) const { return dealias(forward_transform(f)); }

  /// Halvings of `step` needed so that the CFL (and explicit porous) limits hold
  /// for state U; throws StepRejected past kMaxHalvings.
  int required_halvings(const SpectralField& U, double step) const {
    const double h = grid().h();
    double vmax = frozen_max_;
    double porous_rate = 0.0;
    const bool frozen = frozen_max_ > 0.0 || is_frozen();
    if (!frozen) {
      const auto& law = std::visit([](const auto& q) -> const VelocityLaw& { return q.law; }, prob_);
      if (law.kind() != LawKind::None) {
        const auto V = detail::velocity_spectrum(law, U);
        vmax = std::max(lp_norm(detail::to_real(law, V[0]), kInf), lp_norm(detail::to_real(law, V[1]), kInf));
      }
    }
    if (auto* t1 = std::get_if<Type1Problem>(&prob_); t1 && t1->diffusion.kind == DiffusionSpec::Kind::Porous) {
      const double rmax = lp_norm(detail::inverse_unchecked(U), kInf);
      porous_rate = t1->diffusion.nu * t1->diffusion.m * std::pow(rmax, t1->diffusion.m - 1.0) * kmax2_;
    }
    for (int hv = 0; hv <= kMaxHalvings; ++hv) {
      const double d = std::ldexp(step, -hv);
      if (d * vmax / h <= kCflLimit && d * porous_rate <= kCflLimit) return hv;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "CFL violated after %d halvings (max|v| = %.6g, porous rate = %.6g, dt = %.6g)",
                  kMaxHalvings, vmax, porous_rate, step);
    throw StepRejected(buf);
  }

  /// Advances U by `step` in 2^halvings equal Lawson RK4 substeps.
  SpectralField advance(SpectralField U, double step, int halvings) const {
    const double d = std::ldexp(step, -halvings);
    const auto& E = factors(d), &E2 = factors(0.5 * d);
    for (int s = 0; s < (1 << halvings); ++s) U = lawson_rk4(U, d, E, E2);
    return U;
  }

  /// Explicit part: advection (and porous diffusion), dealiased.
  SpectralField nonlinear(const SpectralField& U) const {
    const TorusGrid& g = grid();
    SpectralField out(g);
    if (auto* t1 = std::get_if<Type1Problem>(&prob_)) {
      const ScalarField rho = detail::inverse_unchecked(U);
      if (t1->law.kind() != LawKind::None) {
        const auto V = detail::velocity_spectrum(t1->law, U);
        ScalarField fx = detail::to_real(t1->law, V[0]), fy = detail::to_real(t1->law, V[1]);
        auto r = rho.values();
        auto xv = fx.values(), yv = fy.values();
        for (std::size_t k = 0; k < r.size(); ++k) {
          xv[k] *= r[k];
          yv[k] *= r[k];
        }
        const SpectralField FX = detail::forward_unchecked(fx), FY = detail::forward_unchecked(fy);
        for (int iy = 0; iy < g.n(); ++iy)
          for (int ix = 0; ix < g.n(); ++ix)
            out(ix, iy) = -(detail::derivative_symbol(g, ix, iy, 0) * FX(ix, iy) +
                            detail::derivative_symbol(g, ix, iy, 1) * FY(ix, iy));
      }
      if (t1->diffusion.kind == DiffusionSpec::Kind::Porous) {
        ScalarField a(g);
        auto r = rho.values();
        auto av = a.values();
        for (std::size_t k = 0; k < r.size(); ++k) av[k] = t1->diffusion.A(r[k]);
        const SpectralField FA = detail::forward_unchecked(a);
        for (int iy = 0; iy < g.n(); ++iy)
          for (int ix = 0; ix < g.n(); ++ix) out(ix, iy) -= g.k_squared(ix, iy) * FA(ix, iy);
      }
    } else {
      const auto& t2 = std::get<Type2Problem>(prob_);
      if (t2.frozen_velocity || t2.law.kind() != LawKind::None) {
        ScalarField vx(g), vy(g);
        if (t2.frozen_velocity) {
          vx = t2.frozen_velocity->x;
          vy = t2.frozen_velocity->y;
        } else {
          const auto V = detail::velocity_spectrum(t2.law, U);
          vx = detail::to_real(t2.law, V[0]);
          vy = detail::to_real(t2.law, V[1]);
        }
        const ScalarField gx = detail::inverse_unchecked(
            detail::multiply(U, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 0); }));
        const ScalarField gy = detail::inverse_unchecked(
            detail::multiply(U, [&](int ix, int iy) { return detail::derivative_symbol(g, ix, iy, 1); }));
        ScalarField adv(g);
        auto a = adv.values();
        const auto xv = std::as_const(vx).values(), yv = std::as_const(vy).values(), gxv = gx.values(), gyv = gy.values();
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = -(xv[k] * gxv[k] + yv[k] * gyv[k]);
        out = detail::forward_unchecked(adv);
      }
    }
    return dealias(std::move(out));
  }

 private:
  bool is_frozen() const {
    auto* t2 = std::get_if<Type2Problem>(&prob_);
    return t2 && t2->frozen_velocity.has_value();
  }

  const std::vector<double>& factors(double d) const {
    auto it = cache_.find(d);
    if (it != cache_.end()) return it->second;
    std::vector<double> e(linear_.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(-linear_[k] * d);
    return cache_.emplace(d, std::move(e)).first->second;
  }

  static SpectralField scaled(const SpectralField& U, const std::vector<double>& E) {
    SpectralField out = U;
    auto c = out.coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= E[k];
    return out;
  }
  static SpectralField axpy(const SpectralField& a, double s, const SpectralField& b) {
    SpectralField out = a;
    auto c = out.coeffs();
    auto bc = b.coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += s * bc[k];
    return out;
  }

  // Lawson RK4 for u' = -L u + N(u), with E = e^{-L d}, E2 = e^{-L d/2}.
  SpectralField lawson_rk4(const SpectralField& u, double d, const std::vector<double>& E,
                           const std::vector<double>& E2) const {
    const SpectralField k1 = nonlinear(u);
    const SpectralField k2 = nonlinear(scaled(axpy(u, 0.5 * d, k1), E2));
    const SpectralField k3 = nonlinear(axpy(scaled(u, E2), 0.5 * d, k2));
    const SpectralField k4 = nonlinear(axpy(scaled(u, E), d, scaled(k3, E2)));
    SpectralField out(u.grid());
    auto o = out.coeffs();
    auto uc = u.coeffs(), a = k1.coeffs(), b = k2.coeffs(), c = k3.coeffs(), e = k4.coeffs();
    for (std::size_t k = 0; k < o.size(); ++k)
      o[k] = E[k] * uc[k] + (d / 6.0) * (E[k] * a[k] + 2.0 * E2[k] * (b[k] + c[k]) + e[k]);
    return out;
  }

  Problem prob_;
  std::vector<double> linear_;
  double kmax2_ = 0.0;
  double frozen_max_ = 0.0;
  mutable std::map<double, std::vector<double>> cache_;
};

inline ScalarField step_type1(const ScalarField& state, const Type1Problem& prob) {
  Integrator it(prob);
  const SpectralField U = it.project(state);
  return detail::inverse_unchecked(it.advance(U, prob.dt, it.required_halvings(U, prob.dt)));
}

inline ScalarField step_type2(const ScalarField& state, const Type2Problem& prob) {
  Integrator it(prob);
  const SpectralField U = it.project(state);
  return detail::inverse_unchecked(it.advance(U, prob.dt, it.required_halvings(U, prob.dt)));
}

struct DiagnosticRow {
  double t, mass, l2, linf, bmo;
};

struct Schedule {
  int snapshot_every = 0;  // macro steps between snapshots; 0: initial and final only
  bool bmo = false;        // include the dyadic BMO column
};

struct Trajectory {
  std::vector<double> times;  // snapshot times
  std::vector<ScalarField> snapshots;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<int> halvings;  // per macro step
  bool aborted = false;
  std::string error;
};

inline DiagnosticRow diagnose(double t, const ScalarField& rho, bool with_bmo) {
  return {t, detail::integral(rho), lp_norm(rho, 2.0), lp_norm(rho, kInf), with_bmo ? bmo_norm(rho) : 0.0};
}

/// Integrates to t_end with per-step diagnostics; a rejected step ends the run
/// with `aborted` set and the trajectory so far.
inline Trajectory run(const Problem& prob, const Schedule& sched = {}) {
  Integrator it(prob);
  Trajectory tr;
  SpectralField U = it.project(it.initial());
  ScalarField rho = detail::inverse_unchecked(U);
  tr.times.push_back(0.0);
  tr.snapshots.push_back(rho);
  tr.diagnostics.push_back(diagnose(0.0, rho, sched.bmo));
  const int steps = it.macro_steps();
  const double d = it.macro_dt();
  for (int s = 1; s <= steps; ++s) {
    try {
      const int hv = it.required_halvings(U, d);
      U = it.advance(std::move(U), d, hv);
      tr.halvings.push_back(hv);
    } catch (const StepRejected& e) {
      tr.aborted = true;
      tr.error = e.what();
      break;
    }
    const double t = s == steps ? it.t_end() : s * d;
    rho = detail::inverse_unchecked(U);
    if (!rho.all_finite()) {
      tr.aborted = true;
      tr.error = "non-finite state at t = " + std::to_string(t);
      break;
    }
    tr.diagnostics.push_back(diagnose(t, rho, sched.bmo));
    if (s == steps || (sched.snapshot_every > 0 && s % sched.snapshot_every == 0)) {
      tr.times.push_back(t);
      tr.snapshots.push_back(rho);
    }
  }
  return tr;
}

inline void write_diagnostics_csv(std::ostream& os, const Trajectory& tr, bool with_bmo) {
  os << (with_bmo ? "t,mass,l2,linf,bmo\n" : "t,mass,l2,linf\n");
  char buf[256];
  for (const auto& r : tr.diagnostics) {
    if (with_bmo)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass, r.l2, r.linf, r.bmo);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass, r.l2, r.linf);
    os << buf;
  }
}

}  // namespace asl
