#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "asl/initial.hpp"
#include "asl/norms.hpp"
#include "asl/solver.hpp"
#include "asl/velocity.hpp"

namespace asl {

enum class Metric { HMinus1, L2 };

inline std::string metric_name(Metric m) { return m == Metric::HMinus1 ? "hminus1" : "l2"; }

/// Mean-zero perturbation with |k|^{-s} spectrum on 1 <= |k| <= k_max, scaled so
/// that its distance in the twin metric is `amplitude`.
struct Perturbation {
  double amplitude = 0.0;
  double s = 2.0;
  int k_max = 4;
  std::uint64_t seed = 1;
};

struct TwinRun {
  Problem problem;  // its initial field is rho1(0)
  Perturbation perturbation;
  Metric metric = Metric::L2;
  int diag_every = 1;  // macro steps between diagnostics, at most 10
  std::optional<ScalarField> rho2_initial;  // overrides the perturbation
};

/// p-independent quantities at one diagnostic time.
struct TwinSample {
  double t = 0.0;
  double distance = 0.0;
  double w_l2 = 0.0, w_linf = 0.0;
  double gphi_l2 = 0.0, gphi_linf = 0.0;  // Type1 only
  double vw_l2 = 0.0, vw_linf = 0.0;      // Type1 only
  double grad_v1_bmo = 0.0, rho2_bmo = 0.0;  // Type1 only
  double t1 = 0.0;  // -int (A(rho1) - A(rho2)) w, Type1 only
  double grad_rho2_bmo = 0.0, grad_rho2_p0 = 0.0;  // Type2 only
};

struct TwinReport {
  Metric metric = Metric::L2;
  bool type1 = true;
  double p0 = 2.0;
  std::vector<TwinSample> samples;
  std::vector<ScalarField> rho1, rho2;  // snapshots at the sample times
  std::vector<int> halvings;
  bool aborted = false;
  std::string error;
  int n = 0;
  double dt = 0.0;

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& s : samples) t.push_back(s.t);
    return t;
  }
  std::vector<double> distances() const {
    std::vector<double> d;
    for (const auto& s : samples) d.push_back(s.distance);
    return d;
  }
};

namespace detail {

inline double tensor_bmo(const TensorField& T) {
  return std::max({bmo_norm(T.dx_vx), bmo_norm(T.dx_vy), bmo_norm(T.dy_vx), bmo_norm(T.dy_vy)});
}

inline double vector_bmo(const VectorField& v) { return std::max(bmo_norm(v.x), bmo_norm(v.y)); }

inline const VelocityLaw& law_of(const Problem& p) {
  return std::visit([](const auto& q) -> const VelocityLaw& { return q.law; }, p);
}

inline Problem with_initial(Problem p, ScalarField f) {
  std::visit([&](auto& q) { q.initial = std::move(f); }, p);
  return p;
}

/// rho1 - rho2 with its rounding-level mean removed. The mean is tested against the
/// size of the members, not of w, since a tiny difference of large fields carries
/// rounding of the fields' scale.
inline ScalarField mean_free_difference(const ScalarField& r1, const ScalarField& r2) {
  ScalarField w = r1;
  w -= r2;
  const double scale = std::max({lp_norm(r1, 2.0), lp_norm(r2, 2.0), lp_norm(w, 2.0)});
  const double mean = detail::integral(w) / (w.grid().length() * w.grid().length());
  if (std::abs(mean) * w.grid().length() > kMeanZeroTolerance * scale)
    throw std::invalid_argument("twin difference rho1 - rho2 is not mean-zero; the hminus1 metric needs equal masses");
  w += -mean;
  return w;
}

inline double metric_distance(Metric m, const ScalarField& w) {
  return m == Metric::L2 ? lp_norm(w, 2.0) : hminus1_via_potential(w).norm;
}

inline TwinSample measure(const Problem& prob, Metric metric, double p0, double t, const ScalarField& r1,
                          const ScalarField& r2) {
  TwinSample s;
  s.t = t;
  const bool need_mean_free = metric == Metric::HMinus1 || std::holds_alternative<Type1Problem>(prob);
  ScalarField w = need_mean_free ? mean_free_difference(r1, r2) : r1;
  if (!need_mean_free) w -= r2;
  s.w_l2 = lp_norm(w, 2.0);
  s.w_linf = lp_norm(w, kInf);
  s.distance = metric == Metric::L2 ? s.w_l2 : 0.0;
  if (auto* t1 = std::get_if<Type1Problem>(&prob)) {
    const bool zero = s.w_linf == 0.0;
    if (!zero) {
      const PotentialNorm pn = hminus1_via_potential(w);
      s.gphi_l2 = pn.norm;
      s.gphi_linf = lp_norm(pn.grad_phi.magnitude(), kInf);
      if (t1->law.kind() != LawKind::None) {
        const VectorField vw = apply_velocity(t1->law, w);
        s.vw_l2 = lp_norm(vw.magnitude(), 2.0);
        s.vw_linf = lp_norm(vw.magnitude(), kInf);
      }
    }
    if (metric == Metric::HMinus1) s.distance = s.gphi_l2;
    if (t1->law.kind() != LawKind::None) s.grad_v1_bmo = tensor_bmo(velocity_gradient(t1->law, r1));
    s.rho2_bmo = bmo_norm(r2);
    double pair = 0.0;
    for (std::size_t k = 0; k < w.values().size(); ++k)
      pair += (t1->diffusion.A(r1.values()[k]) - t1->diffusion.A(r2.values()[k])) * w.values()[k];
    s.t1 = -pair * w.grid().cell_area();
  } else {
    if (metric == Metric::HMinus1) s.distance = s.w_linf == 0.0 ? 0.0 : hminus1_via_potential(w).norm;
    const VectorField g2 = spectral_gradient(r2);
    s.grad_rho2_bmo = vector_bmo(g2);
    s.grad_rho2_p0 = lp_norm(g2.magnitude(), p0);
  }
  return s;
}

}  // namespace detail

/// Evolves both members with one integrator and a shared substep schedule.
inline TwinReport run_twin(const TwinRun& twin) {
  if (twin.diag_every < 1 || twin.diag_every > 10)
    throw std::invalid_argument("run_twin: diag_every must lie in [1, 10] macro steps");
  Integrator it(twin.problem);
  const TorusGrid& g = it.grid();
  ScalarField r1 = detail::inverse_unchecked(it.project(it.initial()));
  ScalarField r2 = r1;
  if (twin.rho2_initial) {
    require_same_grid(g, twin.rho2_initial->grid(), "run_twin");
    r2 = detail::inverse_unchecked(it.project(*twin.rho2_initial));
  } else if (twin.perturbation.amplitude != 0.0) {
    const auto& pt = twin.perturbation;
    if (3 * pt.k_max >= g.n()) throw std::invalid_argument("run_twin: perturbation k_max must satisfy 3 k_max < n");
    ScalarField d = smooth_random_field(g, pt.s, pt.k_max, pt.seed);
    d *= pt.amplitude / detail::metric_distance(twin.metric, d);
    r2 += d;
  }
  if (twin.metric == Metric::HMinus1) detail::mean_free_difference(r1, r2);
  Integrator it2(detail::with_initial(twin.problem, r2));

  TwinReport rep;
  rep.metric = twin.metric;
  rep.type1 = std::holds_alternative<Type1Problem>(twin.problem);
  rep.n = g.n();
  rep.dt = it.macro_dt();
  auto record = [&](double t) {
    rep.samples.push_back(detail::measure(twin.problem, twin.metric, rep.p0, t, r1, r2));
    rep.rho1.push_back(r1);
    rep.rho2.push_back(r2);
  };
  record(0.0);
  SpectralField U1 = it.project(r1), U2 = it.project(r2);
  const int steps = it.macro_steps();
  const double d = it.macro_dt();
  for (int s = 1; s <= steps; ++s) {
    try {
      const int hv = std::max(it.required_halvings(U1, d), it.required_halvings(U2, d));
      U1 = it.advance(std::move(U1), d, hv);
      U2 = it2.advance(std::move(U2), d, hv);
      rep.halvings.push_back(hv);
    } catch (const StepRejected& e) {
      rep.aborted = true;
      rep.error = e.what();
      break;
    }
    if (s % twin.diag_every == 0 || s == steps) {
      r1 = detail::inverse_unchecked(U1);
      r2 = detail::inverse_unchecked(U2);
      if (!r1.all_finite() || !r2.all_finite()) {
        rep.aborted = true;
        rep.error = "non-finite twin state";
        break;
      }
      record(s == steps ? it.t_end() : s * d);
    }
  }
  return rep;
}

struct EnvelopeRow {
  double t, distance, f, lhs, rhs;
  bool ok;
};

struct EnvelopeVerdict {
  std::string name;
  int p = 16;
  double fitted_C = 0.0;
  double slack = 3.0;
  double fraction_ok = 0.0;    // pointwise differential check
  bool integrated_ok = false;  // D^{1/p}(t) - D^{1/p}(s) <= int_s^t f on every Groenwall window
  double t0 = 0.0;             // window length 2^-3 ||f||_{L^{3/2}}^{-3} (capped at the run length)
  bool inconclusive = false;
  std::vector<EnvelopeRow> rows;  // lhs = dD/dt, rhs = p f D^{1-1/p}
  bool ok(double min_fraction = 1.0) const { return !inconclusive && integrated_ok && fraction_ok >= min_fraction; }
};

namespace detail {

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return s;
}

/// Fits D' <= C h D^{1-1/p} (f = C h / p) and checks it pointwise and in integrated
/// form over windows shorter than 2^-3 ||f||_{3/2}^{-3}.
inline EnvelopeVerdict fit_envelope(std::string name, const std::vector<double>& t, const std::vector<double>& D,
                                    const std::vector<double>& h, int p, double slack) {
  EnvelopeVerdict v;
  v.name = std::move(name);
  v.p = p;
  v.slack = slack;
  const std::size_t m = t.size();
  if (m < 7) {
    v.inconclusive = true;
    return v;
  }
  std::vector<double> dD(m, 0.0), g(m, 0.0);
  for (std::size_t i = 1; i + 1 < m; ++i) dD[i] = (D[i + 1] - D[i - 1]) / (t[i + 1] - t[i - 1]);
  for (std::size_t i = 0; i < m; ++i) g[i] = h[i] * std::pow(std::max(D[i], 0.0), 1.0 - 1.0 / p);
  double num = 0.0, den = 0.0, dmax = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    num += std::max(dD[i], 0.0) * g[i];
    den += g[i] * g[i];
    dmax = std::max(dmax, std::abs(dD[i]));
  }
  v.fitted_C = den > 0.0 ? num / den : 0.0;
  const double tol = 1e-12 * (1.0 + dmax);
  const double Cs = slack * v.fitted_C;
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = Cs * h[i] / p;
  int good = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool interior = i > 0 && i + 1 < m;
    const double rhs = Cs * g[i];
    const bool ok = !interior || dD[i] <= rhs + tol;
    if (interior && ok) ++good;
    v.rows.push_back({t[i], std::sqrt(std::max(D[i], 0.0)), f[i], dD[i], rhs, ok});
  }
  v.fraction_ok = static_cast<double>(good) / static_cast<double>(m - 2);

  // ||f||_{L^{3/2}(0,T)} and the window length from the iteration argument.
  std::vector<double> f32(m);
  for (std::size_t i = 0; i < m; ++i) f32[i] = std::pow(f[i], 1.5);
  const double nf = std::pow(trapezoid(t, f32, 0, m - 1), 2.0 / 3.0);
  const double T = t.back() - t.front();
  v.t0 = nf > 0.0 ? std::min(T, 0.125 / (nf * nf * nf)) : T;
  std::vector<double> root(m);
  for (std::size_t i = 0; i < m; ++i) root[i] = std::pow(std::max(D[i], 0.0), 1.0 / p);
  const double itol = 1e-12 * (1.0 + *std::max_element(root.begin(), root.end()));
  bool ok = true;
  // From 0 over the whole run, and restarted at every window start.
  std::size_t start = 0;
  while (ok && start + 1 < m) {
    for (std::size_t i = start + 1; i < m; ++i) {
      if (start > 0 && t[i] - t[start] > v.t0 + 1e-12) break;
      if (root[i] - root[start] > trapezoid(t, f, start, i) + itol) ok = false;
    }
    std::size_t next = start + 1;
    while (next + 1 < m && t[next + 1] - t[start] <= v.t0 + 1e-12) ++next;
    start = next;
  }
  v.integrated_ok = ok;
  return v;
}

}  // namespace detail

inline constexpr double kEnvelopeSlack = 3.0;

/// H^{-1} method: D = ||grad phi||_2^2 and h collects the T2 and T3 bounds,
/// h = (p B1 + 1) ||grad phi||_inf^{1/p} + (p B2 + 1)(||grad phi||_inf ||Vw||_inf)^{1/p} (||Vw||_2/||grad phi||_2)^{1-1/p}.
inline EnvelopeVerdict envelope_type1(const TwinReport& rep, int p = 16, double slack = kEnvelopeSlack) {
  if (!rep.type1 || rep.metric != Metric::HMinus1) throw std::invalid_argument("envelope_type1: needs a Type1 twin with hminus1 metric");
  if (p < 4) throw std::invalid_argument("envelope_type1: p must be >= 4");
  std::vector<double> t, D, h;
  for (const auto& s : rep.samples) {
    t.push_back(s.t);
    D.push_back(s.gphi_l2 * s.gphi_l2);
    const double a = (p * s.grad_v1_bmo + 1.0) * std::pow(s.gphi_linf, 1.0 / p);
    const double ratio = s.gphi_l2 > 0.0 ? s.vw_l2 / s.gphi_l2 : 0.0;
    const double b = (p * s.rho2_bmo + 1.0) * std::pow(s.gphi_linf * s.vw_linf, 1.0 / p) * std::pow(ratio, 1.0 - 1.0 / p);
    h.push_back(s.vw_linf == 0.0 && s.grad_v1_bmo == 0.0 ? 0.0 : a + b);
  }
  return detail::fit_envelope("type1_hminus1", t, D, h, p, slack);
}

/// L^2 method: D = ||w||_2^2 and h = 2 (p ||grad rho2||_BMO + ||grad rho2||_{p0}) ||w||_inf^{2/p}.
inline EnvelopeVerdict envelope_type2(const TwinReport& rep, int p = 16, double slack = kEnvelopeSlack,
                                      bool velocity_active = true) {
  if (rep.type1 || rep.metric != Metric::L2) throw std::invalid_argument("envelope_type2: needs a Type2 twin with l2 metric");
  if (p < 2) throw std::invalid_argument("envelope_type2: p must be >= 2");
  std::vector<double> t, D, h;
  for (const auto& s : rep.samples) {
    t.push_back(s.t);
    D.push_back(s.w_l2 * s.w_l2);
    h.push_back(velocity_active ? 2.0 * (p * s.grad_rho2_bmo + s.grad_rho2_p0) * std::pow(s.w_linf, 2.0 / p) : 0.0);
  }
  return detail::fit_envelope("type2_l2", t, D, h, p, slack);
}

/// r = 2 gamma q / (2 gamma q - d), defined for q > d/(2 gamma) and q > 1.
inline double exponent_l2(int d, double gamma, double q) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("exponent_l2: gamma must lie in (0,1]");
  const double crit = d / (2.0 * gamma);
  if (!(q > crit) || !(q > 1.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "exponent_l2: q = %g is not above the critical value d/(2 gamma) = %g (and q > 1)", q,
                  crit);
    throw std::invalid_argument(buf);
  }
  return 2.0 * gamma * q / (2.0 * gamma * q - d);
}

/// r = 2q / (2q - d), defined for q > d/2 and q > 1.
inline double exponent_hminus1(int d, double q) {
  const double crit = d / 2.0;
  if (!(q > crit) || !(q > 1.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "exponent_hminus1: q = %g is not above the critical value d/2 = %g (and q > 1)", q, crit);
    throw std::invalid_argument(buf);
  }
  return 2.0 * q / (2.0 * q - d);
}

struct DissipativeVerdict {
  std::string name;
  double q = 0.0, r = 0.0, gamma = 1.0, nu = 0.0;
  double viscous_factor = 0.0;  // nu^{-d/(2 gamma q - d)} (gamma = 1 for the H^{-1} bound)
  double fitted_C = 0.0;
  double slack = kEnvelopeSlack;
  bool bound_ok = false;
  double gn_constant = 0.0;  // largest Gagliardo-Nirenberg ratio over the snapshots
  std::vector<EnvelopeRow> rows;  // lhs = d(t), rhs = d(0) exp(slack C K int_0^t g), f = g(t)
  bool ok() const { return bound_ok && std::isfinite(gn_constant); }
};

namespace detail {

// Fits log(d(t)/d(0)) <= C K I(t) by least squares on the positive part and checks
// it with slack at every time.
inline void fit_exponential(DissipativeVerdict& v, const std::vector<double>& t, const std::vector<double>& d,
                            const std::vector<double>& g) {
  const std::size_t m = t.size();
  std::vector<double> I(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) I[i] = I[i - 1] + 0.5 * (t[i] - t[i - 1]) * (g[i] + g[i - 1]);
  const double K = v.viscous_factor;
  double num = 0.0, den = 0.0;
  const bool zero = d.front() == 0.0;
  for (std::size_t i = 1; i < m && !zero; ++i) {
    const double L = std::log(d[i] / d[0]);
    num += std::max(L, 0.0) * K * I[i];
    den += K * I[i] * K * I[i];
  }
  v.fitted_C = den > 0.0 ? num / den : 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double rhs = d[0] * std::exp(v.slack * v.fitted_C * K * I[i]);
    const bool r_ok = zero ? d[i] <= 1e-10 : d[i] <= rhs * (1.0 + 1e-12);
    ok = ok && r_ok;
    v.rows.push_back({t[i], d[i], g[i], d[i], zero ? 1e-10 : rhs, r_ok});
  }
  v.bound_ok = ok;
}

}  // namespace detail

/// Exponential L^2 stability for dissipative Type2 twins, driven by int ||grad rho2||_q^r.
/// Also records the Gagliardo-Nirenberg ratio ||w||_{2q/(q-1)} / (||w||_2^{1-a} || |grad|^gamma w ||_2^a), a = d/(2 q gamma).
inline DissipativeVerdict dissipative_bound_l2(const TwinRun& twin, const TwinReport& rep, double q,
                                               double slack = kEnvelopeSlack) {
  const auto* t2 = std::get_if<Type2Problem>(&twin.problem);
  if (!t2 || rep.type1) throw std::invalid_argument("dissipative_bound_l2: needs a Type2 twin");
  if (!(t2->nu > 0.0)) throw std::invalid_argument("dissipative_bound_l2: needs nu > 0");
  if (rep.metric != Metric::L2) throw std::invalid_argument("dissipative_bound_l2: needs the l2 metric");
  const int d = 2;
  DissipativeVerdict v;
  v.name = "dissipative_l2";
  v.q = q;
  v.gamma = t2->gamma;
  v.nu = t2->nu;
  v.slack = slack;
  v.r = exponent_l2(d, t2->gamma, q);
  v.viscous_factor = std::pow(t2->nu, -d / (2.0 * t2->gamma * q - d));
  const double a = d / (2.0 * q * t2->gamma), s = 2.0 * q / (q - 1.0);
  std::vector<double> t, dist, g;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    t.push_back(rep.samples[i].t);
    dist.push_back(rep.samples[i].w_l2);
    g.push_back(std::pow(lp_norm(spectral_gradient(rep.rho2[i]).magnitude(), q), v.r));
    if (rep.samples[i].w_l2 > 0.0) {
      ScalarField w = rep.rho1[i];
      w -= rep.rho2[i];
      const double frac = lp_norm(fractional_laplacian(subtract_mean(w), 0.5 * t2->gamma), 2.0);
      const double den = std::pow(lp_norm(w, 2.0), 1.0 - a) * std::pow(frac, a);
      if (den > 0.0) v.gn_constant = std::max(v.gn_constant, lp_norm(w, s) / den);
    }
  }
  detail::fit_exponential(v, t, dist, g);
  return v;
}

/// Exponential H^{-1} stability for Type1 twins with linear diffusion, driven by
/// int (||rho1||_q^r + ||rho2||_q^r). Also records the ratio
/// ||grad phi||_{2q/(q-1)} / (||grad phi||_2^{1-d/2q} ||w||_2^{d/2q}).
inline DissipativeVerdict dissipative_bound_hminus1(const TwinRun& twin, const TwinReport& rep, double q,
                                                    double slack = kEnvelopeSlack) {
  const auto* t1 = std::get_if<Type1Problem>(&twin.problem);
  if (!t1 || !rep.type1) throw std::invalid_argument("dissipative_bound_hminus1: needs a Type1 twin");
  if (t1->diffusion.kind != DiffusionSpec::Kind::Linear)
    throw std::invalid_argument("dissipative_bound_hminus1: the H^{-1} dissipative bound is limited to linear diffusion");
  if (!(t1->diffusion.nu > 0.0)) throw std::invalid_argument("dissipative_bound_hminus1: needs nu > 0");
  if (rep.metric != Metric::HMinus1) throw std::invalid_argument("dissipative_bound_hminus1: needs the hminus1 metric");
  const int d = 2;
  DissipativeVerdict v;
  v.name = "dissipative_hminus1";
  v.q = q;
  v.nu = t1->diffusion.nu;
  v.slack = slack;
  v.r = exponent_hminus1(d, q);
  v.viscous_factor = std::pow(v.nu, -d / (2.0 * q - d));
  const double a = d / (2.0 * q), s = 2.0 * q / (q - 1.0);
  std::vector<double> t, dist, g;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    t.push_back(rep.samples[i].t);
    dist.push_back(rep.samples[i].gphi_l2);
    g.push_back(std::pow(lp_norm(rep.rho1[i], q), v.r) + std::pow(lp_norm(rep.rho2[i], q), v.r));
    if (rep.samples[i].gphi_l2 > 0.0) {
      const ScalarField w = detail::mean_free_difference(rep.rho1[i], rep.rho2[i]);
      const PotentialNorm pn = hminus1_via_potential(w);
      const double den = std::pow(pn.norm, 1.0 - a) * std::pow(lp_norm(w, 2.0), a);
      if (den > 0.0) v.gn_constant = std::max(v.gn_constant, lp_norm(pn.grad_phi.magnitude(), s) / den);
    }
  }
  detail::fit_exponential(v, t, dist, g);
  return v;
}

/// True when d(t) never increases between diagnostic times (relative tolerance `rtol`).
inline bool is_contracting(const TwinReport& rep, double rtol = 1e-12) {
  for (std::size_t i = 1; i < rep.samples.size(); ++i)
    if (rep.samples[i].distance > rep.samples[i - 1].distance * (1.0 + rtol)) return false;
  return !rep.aborted;
}

struct ContractionProbe {
  std::vector<double> levels;
  std::vector<bool> contracting;
  std::optional<double> eps0;  // largest contracting level
};

/// Reruns the twin with rho1(0) scaled by each level (the perturbation is kept).
inline ContractionProbe contraction_probe(const TwinRun& twin, const std::vector<double>& levels) {
  ContractionProbe out;
  const ScalarField base = std::visit([](const auto& q) { return q.initial; }, twin.problem);
  for (double lv : levels) {
    TwinRun s = twin;
    ScalarField r = base;
    r *= lv;
    s.problem = detail::with_initial(twin.problem, r);
    if (twin.rho2_initial) {
      ScalarField r2 = *twin.rho2_initial;
      r2 -= base;
      r2 += r;
      s.rho2_initial = r2;
    }
    const bool c = is_contracting(run_twin(s));
    out.levels.push_back(lv);
    out.contracting.push_back(c);
    if (c && (!out.eps0 || lv > *out.eps0)) out.eps0 = lv;
  }
  return out;
}

/// |a - b| <= tol * max(|a|, |b|).
inline bool refinement_stable(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

inline void write_rows_csv(std::ostream& os, const std::vector<EnvelopeRow>& rows) {
  os << "t,distance,f,lhs,rhs,ok\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.distance, r.f, r.lhs, r.rhs, r.ok ? 1 : 0);
    os << buf;
  }
}

inline nlohmann::json to_json(const EnvelopeVerdict& v) {
  return {{"name", v.name},         {"p", v.p},
          {"fitted_C", v.fitted_C}, {"slack", v.slack},
          {"fraction_ok", v.fraction_ok}, {"integrated_ok", v.integrated_ok},
          {"t0", v.t0},             {"inconclusive", v.inconclusive}};
}

inline nlohmann::json to_json(const DissipativeVerdict& v) {
  return {{"name", v.name},       {"q", v.q},
          {"r", v.r},             {"gamma", v.gamma},
          {"nu", v.nu},           {"viscous_factor", v.viscous_factor},
          {"fitted_C", v.fitted_C}, {"slack", v.slack},
          {"bound_ok", v.bound_ok}, {"gn_constant", v.gn_constant}};
}

inline nlohmann::json to_json(const TwinReport& r) {
  return {{"metric", metric_name(r.metric)}, {"n", r.n}, {"dt", r.dt}, {"samples", r.samples.size()},
          {"aborted", r.aborted}, {"error", r.error},
          {"max_distance", r.samples.empty() ? 0.0 : std::max_element(r.samples.begin(), r.samples.end(), [](auto& a, auto& b) {
                                                       return a.distance < b.distance;
                                                     })->distance}};
}

}  // namespace asl
