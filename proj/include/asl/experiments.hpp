#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "asl/config.hpp"
#include "asl/harmonic.hpp"
#include "asl/initial.hpp"
#include "asl/norms.hpp"
#include "asl/rng.hpp"
#include "asl/snapshot.hpp"
#include "asl/solver.hpp"
#include "asl/stability.hpp"
#include "asl/velocity.hpp"

namespace asl {

inline constexpr const char* kVersion = "asl 1.0.0";

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunOptions {
  std::optional<int> n;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  bool quick = false;
  fs::path out;  // empty: no artifacts
};

struct Verdict {
  int id = 0;
  std::string preset;
  std::string title;
  bool pass = false;
  std::string detail;
  json metrics = json::object();
  double limit_seconds = 0.0;  // wall-clock budget for the full-size run; never written to disk
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Collects an output directory's files; nothing touches disk while `dir` is empty.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  const fs::path& dir() const { return dir_; }

  void text(const std::string& name, const std::string& body) {
    if (!enabled()) return;
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    os << body;
    files_.insert(name);
  }
  void snapshot(const std::string& name, const ScalarField& f) {
    if (!enabled()) return;
    save_snapshot((dir_ / name).string(), f);
    files_.insert(name);
  }
  void manifest(const json& extra, const Verdict& v) {
    if (!enabled()) return;
    json m = extra;
    m["version"] = kVersion;
    m["pass"] = v.pass;
    m["detail"] = v.detail;
    m["metrics"] = v.metrics;
    m["files"] = std::vector<std::string>(files_.begin(), files_.end());
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::set<std::string> files_;
};

inline json options_json(const std::string& preset, const RunOptions& o, int n, double dt, std::uint64_t seed) {
  std::string cmd = "asl preset " + preset + " --n " + std::to_string(n) + " --seed " + std::to_string(seed);
  if (dt > 0.0) cmd += " --dt " + fmt(dt);
  if (o.quick) cmd += " --quick";
  return {{"preset", preset}, {"n", n}, {"dt", dt}, {"seed", seed}, {"quick", o.quick}, {"reproduce", cmd}};
}

inline Rng seeded(std::uint64_t seed, std::uint64_t stream) { return Rng(seed * 0x9E3779B97F4A7C15ULL + stream); }

}  // namespace detail

// 1. (-Laplacian)^gamma on single Fourier modes.
inline Verdict preset_spectral_exactness(const RunOptions& o) {
  Verdict v{1, "spectral_exactness", "fractional Laplacian on Fourier modes"};
  v.limit_seconds = 1;
  const int n = o.n.value_or(32);
  detail::Artifacts art(o.out);
  TorusGrid g(n);
  std::string csv = "kx,ky,gamma,rel_error\n";
  double worst = 0.0;
  for (int kx : {1, 2, 4})
    for (int ky : {1, 2, 4})
      for (double gamma : {0.25, 0.5, 1.0}) {
        const double lam = std::pow(double(kx * kx + ky * ky), gamma);
        double err = 0.0;
        // cos and sin parts of e^{ik.x}.
        for (int part = 0; part < 2; ++part) {
          auto f = ScalarField::sample(g, [&](double x, double y) {
            return part == 0 ? std::cos(kx * x + ky * y) : std::sin(kx * x + ky * y);
          });
          const auto Lf = fractional_laplacian(f, gamma);
          double num = 0.0, den = 0.0;
          for (std::size_t k = 0; k < f.values().size(); ++k) {
            num = std::max(num, std::abs(Lf.values()[k] - lam * f.values()[k]));
            den = std::max(den, std::abs(lam * f.values()[k]));
          }
          err = std::max(err, num / den);
        }
        worst = std::max(worst, err);
        csv += std::to_string(kx) + "," + std::to_string(ky) + "," + detail::fmt(gamma) + "," + detail::fmt(err) + "\n";
      }
  art.text("modes.csv", csv);
  v.pass = worst <= 1e-12;
  v.metrics = {{"max_rel_error", worst}, {"n", n}};
  v.detail = "max relative error " + detail::fmt_short(worst) + " (limit 1e-12)";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, 0), v);
  return v;
}

// 2. ||w||_{H^-1} two ways: spectral Sobolev sum and quadrature of the sampled grad phi.
inline Verdict preset_hminus1_identity(const RunOptions& o) {
  Verdict v{2, "hminus1_identity", "H^-1 norm equals ||grad phi||_2"};
  v.limit_seconds = 10;
  const int n = o.n.value_or(o.quick ? 64 : 128);
  const std::uint64_t seed = o.seed.value_or(1);
  const int count = o.quick ? 20 : 100;
  detail::Artifacts art(o.out);
  TorusGrid g(n);
  Rng rng = detail::seeded(seed, 2);
  std::string csv = "index,s,k_max,sobolev,potential,quadrature,rel_error\n";
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const double s = rng.uniform(0.0, 3.0);
    const int kmax = 2 + static_cast<int>(rng.uniform() * (n / 2 - 3));
    const auto w = smooth_random_field(g, s, kmax, seed * 1000 + i, rng.uniform(0.1, 10.0));
    const double sob = sobolev_norm(w, -1.0);
    const PotentialNorm pn = hminus1_via_potential(w);
    const double quad = lp_norm(pn.grad_phi.magnitude(), 2.0);
    const double err = std::max(std::abs(sob - pn.norm), std::abs(sob - quad)) / sob;
    worst = std::max(worst, err);
    csv += std::to_string(i) + "," + detail::fmt(s) + "," + std::to_string(kmax) + "," + detail::fmt(sob) + "," +
           detail::fmt(pn.norm) + "," + detail::fmt(quad) + "," + detail::fmt(err) + "\n";
  }
  art.text("identity.csv", csv);
  v.pass = worst <= 1e-12;
  v.metrics = {{"fields", count}, {"n", n}, {"max_rel_error", worst}};
  v.detail = std::to_string(count) + " fields at n=" + std::to_string(n) + ", max relative error " +
             detail::fmt_short(worst) + " (limit 1e-12)";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, seed), v);
  return v;
}

// 3. ||f||_p against p^{1-p0/p} ||f||_BMO^{1-p0/p} ||f||_{p0}^{p0/p} on mollified logs, n and 2n.
inline Verdict preset_bmo_lp_growth(const RunOptions& o) {
  Verdict v{3, "bmo_lp_growth", "L^p growth linear in p for BMO functions"};
  v.limit_seconds = 120;
  const int n = o.n.value_or(o.quick ? 64 : 256);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  const std::vector<double> ps{4, 8, 16, 32, 64};
  const double p0 = 2.0;
  // Depths scale with the coarse grid so the finest stays resolved by about two cells.
  const std::vector<double> depths{0.2 * 256.0 / n, 0.1 * 256.0 / n, 0.05 * 256.0 / n};
  std::string csv = "n,eps,seed,p,lp,rhs,ratio\n";
  double C[2] = {0.0, 0.0};
  for (int r = 0; r < 2; ++r) {
    const int m = n << r;
    TorusGrid g(m);
    for (double eps : depths)
      for (std::uint64_t s = seed; s < seed + 3; ++s) {
        Rng rng = detail::seeded(s, 3);
        const double cx = rng.uniform(0.0, g.length()), cy = rng.uniform(0.0, g.length());
        const auto prof = lp_growth_profile(mollified_log(g, cx, cy, eps), ps, p0);
        C[r] = std::max(C[r], prof.sup_ratio);
        for (const auto& row : prof.rows)
          csv += std::to_string(m) + "," + detail::fmt(eps) + "," + std::to_string(s) + "," + detail::fmt(row.p) + "," +
                 detail::fmt(row.lp) + "," + detail::fmt(row.rhs) + "," + detail::fmt(row.ratio) + "\n";
      }
  }
  art.text("growth.csv", csv);
  const double change = std::abs(C[1] - C[0]) / C[0];
  v.pass = std::isfinite(C[0]) && C[0] > 0.0 && std::isfinite(C[1]) && change <= 0.2;
  v.metrics = {{"C_n", C[0]}, {"C_2n", C[1]}, {"relative_change", change}, {"n", n}};
  v.detail = "C=" + detail::fmt_short(C[0]) + " at n=" + std::to_string(n) + ", " + detail::fmt_short(C[1]) +
             " at n=" + std::to_string(2 * n) + ", change " + detail::fmt_short(100 * change) + "% (limit 20%)";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, seed), v);
  return v;
}

// 4. Biot-Savart velocity of a mollified log vortex: log-Lipschitz but not Lipschitz.
inline Verdict preset_log_lipschitz(const RunOptions& o) {
  Verdict v{4, "log_lipschitz", "velocity of BMO vorticity is log-Lipschitz"};
  v.limit_seconds = 60;
  const int n = o.n.value_or(1024);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  // Unit period so that r in [2h, 0.1] spans enough of |log r|.
  TorusGrid g(n, 1.0);
  Rng rng = detail::seeded(seed, 4);
  const double cx = rng.uniform(0.0, 1.0), cy = rng.uniform(0.0, 1.0);
  const auto w = subtract_mean(mollified_log(g, cx, cy, g.h()));
  const auto vel = apply_velocity(VelocityLaw::biot_savart(), w);
  std::vector<double> rs;
  for (double r = 2.0 * g.h(); r < 0.1; r *= 1.25) rs.push_back(r);
  rs.push_back(0.1);
  const auto m = log_lipschitz_modulus(vel, rs, o.quick ? 1000 : 4000, seed);
  std::string csv = "r,log_lipschitz_ratio,lipschitz_ratio\n";
  double small = 0.0, large = 0.0;
  for (const auto& s : m) {
    csv += detail::fmt(s.r) + "," + detail::fmt(s.ratio) + "," + detail::fmt(s.lipschitz_ratio) + "\n";
    if (s.r <= 10.0 * rs.front() * (1 + 1e-12)) small = std::max(small, s.ratio);
    if (s.r >= 0.01) large = std::max(large, s.ratio);
  }
  art.text("modulus.csv", csv);
  const double log_growth = small / large, lip_growth = m.front().lipschitz_ratio / m.back().lipschitz_ratio;
  v.pass = log_growth < 2.0 && lip_growth > 2.0;
  v.metrics = {{"log_decade_ratio", log_growth}, {"lipschitz_growth", lip_growth}, {"n", n}};
  v.detail = "log-Lipschitz decade ratio " + detail::fmt_short(log_growth) + " (< 2), Lipschitz growth " +
             detail::fmt_short(lip_growth) + " (> 2)";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, seed), v);
  return v;
}

namespace detail {

inline double brute_avg(const GridFunction& f, int level, int ax, int ay) {
  const int s = 1 << level;
  double t = 0.0;
  for (int j = ay; j < ay + s; ++j)
    for (int i = ax; i < ax + s; ++i) t += std::abs(f(i, j));
  return t / (double(s) * s);
}

// Every dyadic cube whose average exceeds alpha while no ancestor's does, by enumeration.
inline std::set<DyadicCube> brute_maximal_cubes(const GridFunction& f, double alpha) {
  const int n = f.n(), top = log2_exact(n);
  std::set<DyadicCube> out;
  for (int l = 0; l <= top; ++l)
    for (int ay = 0; ay < n; ay += 1 << l)
      for (int ax = 0; ax < n; ax += 1 << l) {
        if (brute_avg(f, l, ax, ay) <= alpha) continue;
        bool maximal = true;
        for (int up = l + 1; up <= top && maximal; ++up) {
          const int s = 1 << up;
          maximal = brute_avg(f, up, ax / s * s, ay / s * s) <= alpha;
        }
        if (maximal) out.insert({l, ax, ay});
      }
  return out;
}

inline GridFunction cz_corpus_member(int n, int index, std::uint64_t seed) {
  GridFunction f(TorusGrid(n, double(n)));
  Rng rng = seeded(seed, 500 + index);
  switch (index % 5) {
    case 0:  // log-normal noise
      for (double& v : f.values()) v = std::exp(1.5 * rng.normal());
      break;
    case 1:  // sparse spikes
      for (int k = 0; k < 12; ++k) f(static_cast<int>(rng.uniform() * n), static_cast<int>(rng.uniform() * n)) += 50.0 * rng.uniform();
      break;
    case 2: {  // smooth signed field
      const double a = rng.uniform(1, 4), b = rng.uniform(1, 4), ph = rng.uniform(0, two_pi);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f(i, j) = std::sin(a * two_pi * i / n + ph) * std::cos(b * two_pi * j / n);
      break;
    }
    case 3: {  // log singularity
      const double cx = rng.uniform(0, n), cy = rng.uniform(0, n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f(i, j) = -std::log(std::hypot(i + 0.5 - cx, j + 0.5 - cy) / n + 1e-3);
      break;
    }
    default:  // indicators of random rectangles
      for (int k = 0; k < 4; ++k) {
        const int x0 = static_cast<int>(rng.uniform() * n), y0 = static_cast<int>(rng.uniform() * n);
        const int w = 1 + static_cast<int>(rng.uniform() * n / 3), h = 1 + static_cast<int>(rng.uniform() * n / 3);
        for (int j = y0; j < std::min(n, y0 + h); ++j)
          for (int i = x0; i < std::min(n, x0 + w); ++i) f(i, j) += 1.0;
      }
  }
  return f;
}

}  // namespace detail

// 5. Calderon-Zygmund decomposition invariants and the maximal-cube oracle.
inline Verdict preset_cz_decomposition(const RunOptions& o) {
  Verdict v{5, "cz_decomposition", "Calderon-Zygmund decomposition properties"};
  v.limit_seconds = 30;
  const int n = o.n.value_or(64);
  const std::uint64_t seed = o.seed.value_or(1);
  const int count = o.quick ? 10 : 50;
  detail::Artifacts art(o.out);
  std::string csv = "index,alpha,bad_cubes,measure_e,reassembly,good_bound,averages,disjoint,oracle\n";
  int failures = 0;
  for (int idx = 0; idx < count; ++idx) {
    const GridFunction f = detail::cz_corpus_member(n, idx, seed);
    double mean_abs = 0.0;
    for (double x : f.values()) mean_abs += std::abs(x);
    mean_abs /= double(n) * n;
    const double alpha = mean_abs * (1.5 + idx % 4 * 1.5);
    const auto cz = cz_decompose(f, alpha);
    bool reassembly = true, good_bound = true, averages = true, disjoint = true;
    for (std::size_t k = 0; k < f.values().size(); ++k) {
      reassembly = reassembly && cz.good.values()[k] + cz.bad.values()[k] == f.values()[k];
      good_bound = good_bound && std::abs(cz.good.values()[k]) <= alpha;
    }
    for (double a : cz.bad_averages) averages = averages && a > alpha && a <= 4.0 * alpha;
    std::vector<int> cover(static_cast<std::size_t>(n) * n, 0);
    for (const auto& q : cz.bad_cubes)
      for (int j = q.ay; j < std::min(n, q.ay + q.side()); ++j)
        for (int i = q.ax; i < std::min(n, q.ax + q.side()); ++i) disjoint = disjoint && ++cover[j * n + i] == 1;
    const bool oracle = std::set<DyadicCube>(cz.bad_cubes.begin(), cz.bad_cubes.end()) == detail::brute_maximal_cubes(f, alpha);
    const bool ok = reassembly && good_bound && averages && disjoint && oracle;
    failures += !ok;
    csv += std::to_string(idx) + "," + detail::fmt(alpha) + "," + std::to_string(cz.bad_cubes.size()) + "," +
           detail::fmt(cz.measure_e) + "," + std::to_string(reassembly) + "," + std::to_string(good_bound) + "," +
           std::to_string(averages) + "," + std::to_string(disjoint) + "," + std::to_string(oracle) + "\n";
  }
  art.text("cz.csv", csv);
  v.pass = failures == 0;
  v.metrics = {{"functions", count}, {"failures", failures}, {"n", n}};
  v.detail = std::to_string(count - failures) + "/" + std::to_string(count) + " functions satisfy every invariant";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, seed), v);
  return v;
}

namespace detail {

struct NamedDomain {
  std::string name;
  std::function<bool(double, double)> in;  // unit-square coordinates
  bool unbounded;
};

inline std::vector<NamedDomain> uniform_domains() {
  return {
      {"square", [](double x, double y) { return x > 0.3 && x < 0.7 && y > 0.3 && y < 0.7; }, false},
      {"halfplane", [](double, double y) { return y < 0.5; }, true},
      {"lshape",
       [](double x, double y) { return x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75 && !(x > 0.5 && y > 0.5); }, false},
      {"tworect",
       [](double x, double y) {
         return (x > 0.15 && x < 0.45 && y > 0.3 && y < 0.7) || (x >= 0.45 && x < 0.85 && y > 0.4 && y < 0.6);
       },
       false},
      {"disk", [](double x, double y) { return std::hypot(x - 0.5, y - 0.5) < 0.25; }, false},
  };
}

inline std::vector<std::function<double(double, double)>> bmo_test_functions() {
  auto lg = [](double cx, double cy) {
    return [=](double x, double y) { return -0.5 * std::log((x - cx) * (x - cx) + (y - cy) * (y - cy) + 1e-4); };
  };
  return {
      lg(0.5, 0.5),
      lg(0.3, 0.45),
      lg(0.2, 0.2),
      [](double x, double) { return x < 0.5 ? 1.0 : 0.0; },
      [](double x, double y) { return std::sin(6 * x) * std::cos(5 * y); },
      [](double x, double y) { return 3 * x - 2 * y; },
      [](double x, double y) { return std::sqrt(std::hypot(x - 0.4, y - 0.45)); },
      [](double x, double y) { return std::hypot(x - 0.45, y - 0.5) < 0.1 ? 1.0 : 0.0; },
      [](double x, double y) { return std::cos(11 * x + 3 * y) + 0.5 * std::sin(7 * y); },
      [](double x, double y) { return x + y > 1.0 ? -1.0 : 1.0; },
  };
}

struct JonesRun {
  double C = 0.0;
  std::vector<std::tuple<std::string, int, double, double>> rows;  // domain, function, inside, extended
};

inline JonesRun jones_sweep(int n, const std::vector<NamedDomain>& doms) {
  JonesRun out;
  const auto fns = bmo_test_functions();
  for (const auto& d : doms) {
    const auto dom = RasterDomain::from_predicate(n, n, d.in, d.unbounded);
    const auto in = whitney_decompose(dom);
    const auto ext = whitney_decompose(RasterDomain(n, dom.complement().mask(), n, true));
    const auto a = jones_assign(in, ext, !d.unbounded);
    for (std::size_t k = 0; k < fns.size(); ++k) {
      GridFunction f(TorusGrid(n, double(n)));
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f(i, j) = dom.in(i, j) ? fns[k]((i + 0.5) / n, (j + 0.5) / n) : 0.0;
      const double inside = bmo_norm_domain(f, dom, -1);
      const double whole = bmo_norm_raster(jones_extend(f, dom, in, ext, a).extended);
      out.rows.emplace_back(d.name, static_cast<int>(k), inside, whole);
      out.C = std::max(out.C, whole / inside);
    }
  }
  return out;
}

}  // namespace detail

// 6. Jones extension: ||f~||_BMO <= C ||f||_BMO(Omega), C stable under refinement.
inline Verdict preset_jones_extension(const RunOptions& o) {
  Verdict v{6, "jones_extension", "Jones extension is bounded on BMO"};
  v.limit_seconds = 120;
  const int n = o.n.value_or(o.quick ? 64 : 128);
  detail::Artifacts art(o.out);
  const auto doms = detail::uniform_domains();
  std::string csv = "raster,domain,function,bmo_domain,bmo_extended,ratio\n";
  double C[2];
  for (int r = 0; r < 2; ++r) {
    const auto run = detail::jones_sweep(n << r, doms);
    C[r] = run.C;
    for (const auto& [dn, k, inside, whole] : run.rows)
      csv += std::to_string(n << r) + "," + dn + "," + std::to_string(k) + "," + detail::fmt(inside) + "," +
             detail::fmt(whole) + "," + detail::fmt(whole / inside) + "\n";
  }
  art.text("extension.csv", csv);
  const double change = std::abs(C[1] - C[0]) / C[0];
  v.pass = std::isfinite(C[0]) && std::isfinite(C[1]) && change <= 0.2;
  v.metrics = {{"C_n", C[0]}, {"C_2n", C[1]}, {"relative_change", change}, {"raster", n}};
  v.detail = "C=" + detail::fmt_short(C[0]) + " at raster " + std::to_string(n) + ", " + detail::fmt_short(C[1]) +
             " at " + std::to_string(2 * n) + ", change " + detail::fmt_short(100 * change) + "% (limit 20%)";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, 0), v);
  return v;
}

// 7. Twins from identical data stay identical.
inline Verdict preset_numerical_uniqueness(const RunOptions& o) {
  Verdict v{7, "numerical_uniqueness", "identical twins stay identical"};
  v.limit_seconds = 300;
  const int n = o.n.value_or(o.quick ? 32 : 128);
  const double dt = o.dt.value_or(0.01);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  TorusGrid g(n);
  std::vector<std::pair<std::string, Problem>> cases;
  const auto smooth = smooth_random_field(g, 2.0, 6, seed, 2.0);
  cases.emplace_back("euler", Type2Problem{.law = VelocityLaw::biot_savart(), .grid = g, .dt = dt, .t_end = 1.0, .initial = smooth});
  cases.emplace_back("sqg_nu0", Type2Problem{.law = VelocityLaw::sqg(), .gamma = 0.5, .grid = g, .dt = dt, .t_end = 1.0, .initial = smooth});
  cases.emplace_back("sqg_nu0.1",
                     Type2Problem{.law = VelocityLaw::sqg(), .nu = 0.1, .gamma = 0.5, .grid = g, .dt = dt, .t_end = 1.0, .initial = smooth});
  ScalarField dens = smooth_random_field(g, 2.0, 6, seed + 1, 0.5);
  dens += 1.0;
  cases.emplace_back("pks_porous", Type1Problem{.law = VelocityLaw::newtonian(1.0), .diffusion = DiffusionSpec::porous(2.0, 0.05),
                                                .grid = g, .dt = dt, .t_end = 1.0, .initial = dens});
  std::string csv = "case,t,distance\n";
  double worst = 0.0;
  bool aborted = false;
  json per = json::object();
  for (const auto& [name, prob] : cases) {
    const auto rep = run_twin({.problem = prob, .metric = Metric::L2});
    aborted = aborted || rep.aborted;
    double mx = 0.0;
    for (const auto& s : rep.samples) {
      mx = std::max(mx, s.distance);
      csv += name + "," + detail::fmt(s.t) + "," + detail::fmt(s.distance) + "\n";
    }
    per[name] = mx;
    worst = std::max(worst, mx);
  }
  art.text("distance.csv", csv);
  v.pass = !aborted && worst <= 1e-10;
  v.metrics = {{"max_distance", worst}, {"per_case", per}, {"n", n}, {"aborted", aborted}};
  v.detail = "4 twin pairs at n=" + std::to_string(n) + ", max d(t) " + detail::fmt_short(worst) + " (limit 1e-10)";
  art.manifest(detail::options_json(v.preset, o, n, dt, seed), v);
  return v;
}

namespace detail {

inline TwinRun euler_envelope_twin(int n, double dt, std::uint64_t seed) {
  TorusGrid g(n);
  Type1Problem p{.law = VelocityLaw::biot_savart(), .grid = g, .dt = dt, .t_end = 1.0,
                 .initial = smooth_random_field(g, 2.0, 5, seed, 5.0)};
  return {.problem = p, .perturbation = {1e-6, 2.0, 4, seed + 100}, .metric = Metric::HMinus1};
}

}  // namespace detail

// 8. Euler twin: BMO/L^p growth of the data and the H^-1 envelope for p in {8, 16, 32}.
inline Verdict preset_euler_bmo_uniqueness(const RunOptions& o) {
  Verdict v{8, "euler_bmo_uniqueness", "H^-1 envelope on an Euler twin"};
  v.limit_seconds = 300;
  const int n = o.n.value_or(o.quick ? 32 : 128);
  const double dt = o.dt.value_or(0.01);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  const TwinRun twin = detail::euler_envelope_twin(n, dt, seed);
  const auto rep = run_twin(twin);
  art.snapshot("rho1_initial.asf", rep.rho1.front());
  art.snapshot("rho2_initial.asf", rep.rho2.front());
  art.snapshot("rho1_final.asf", rep.rho1.back());
  art.snapshot("rho2_final.asf", rep.rho2.back());
  // L^p growth of the initial vorticity and of grad V rho1 (the BMO hypotheses in use).
  const auto& w0 = rep.rho1.front();
  const auto prof = lp_growth_profile(w0, {4, 8, 16, 32, 64}, 2.0);
  const auto prof_grad = lp_growth_profile(velocity_gradient(VelocityLaw::biot_savart(), w0).frobenius(), {4, 8, 16, 32, 64}, 2.0);
  json env = json::array();
  bool ok = !rep.aborted, integrated = true;
  double worst_fraction = 1.0;
  std::vector<double> Cs;
  for (int p : {8, 16, 32}) {
    const auto e = envelope_type1(rep, p);
    std::ostringstream os;
    write_rows_csv(os, e.rows);
    art.text("envelope_p" + std::to_string(p) + ".csv", os.str());
    env.push_back(to_json(e));
    ok = ok && !e.inconclusive && e.fraction_ok >= 0.99 && e.integrated_ok;
    integrated = integrated && e.integrated_ok;
    worst_fraction = std::min(worst_fraction, e.fraction_ok);
    Cs.push_back(e.fitted_C);
  }
  // Fitted constant under n -> 2n.
  const auto rep2 = run_twin(detail::euler_envelope_twin(2 * n, dt, seed));
  json refine = json::array();
  bool stable = !rep2.aborted;
  for (std::size_t k = 0; k < 3; ++k) {
    const int p = 8 << k;
    const double c2 = envelope_type1(rep2, p).fitted_C;
    refine.push_back({{"p", p}, {"C_n", Cs[k]}, {"C_2n", c2}});
    stable = stable && refinement_stable(Cs[k], c2, 0.5);
  }
  ok = ok && stable;
  art.text("twin_summary.json", json{{"twin", to_json(rep)}, {"envelopes", env}, {"refinement", refine},
                                     {"growth_vorticity", prof.sup_ratio}, {"growth_grad_velocity", prof_grad.sup_ratio}}
                                    .dump(2) + "\n");
  v.pass = ok;
  v.metrics = {{"min_fraction_ok", worst_fraction}, {"envelopes", env}, {"refinement", refine},
               {"growth_vorticity", prof.sup_ratio}, {"growth_grad_velocity", prof_grad.sup_ratio}, {"n", n}};
  v.detail = "pointwise envelope at >= " + detail::fmt_short(100 * worst_fraction) +
             "% of times (need 99%), integrated form " + (integrated ? "holds" : "fails") + ", C refinement " +
             (stable ? "stable" : "unstable") + " within 50%";
  art.manifest(detail::options_json(v.preset, o, n, dt, seed), v);
  return v;
}

namespace detail {

inline TwinRun sqg_dissipative_twin(int n, double dt, std::uint64_t seed) {
  TorusGrid g(n);
  Type2Problem p{.law = VelocityLaw::sqg(), .nu = 0.1, .gamma = 0.5, .grid = g, .dt = dt, .t_end = 1.0,
                 .initial = smooth_random_field(g, 2.0, 6, seed, 30.0)};
  return {.problem = p, .perturbation = {1e-4, 2.0, 4, seed + 100}, .metric = Metric::L2};
}

inline TwinRun pks_dissipative_twin(int n, double dt, std::uint64_t seed) {
  TorusGrid g(n);
  ScalarField r0 = smooth_random_field(g, 2.0, 6, seed + 1, 1.0);
  r0 += 1.0;
  Type1Problem p{.law = VelocityLaw::newtonian(1.0), .diffusion = DiffusionSpec::linear(0.5), .grid = g, .dt = dt,
                 .t_end = 1.0, .initial = r0};
  return {.problem = p, .perturbation = {1e-4, 2.0, 4, seed + 100}, .metric = Metric::HMinus1};
}

}  // namespace detail

// 9. Dissipative exponents r and the exponential stability bounds.
inline Verdict preset_sqg_dissipative_q4(const RunOptions& o) {
  Verdict v{9, "sqg_dissipative_q4", "dissipative exponents and exponential bounds"};
  v.limit_seconds = 300;
  const int n = o.n.value_or(o.quick ? 32 : 64);
  const double dt = o.dt.value_or(0.01);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  const double r_a = exponent_l2(2, 0.5, 4.0), r_b = exponent_l2(2, 1.0, 2.0), r_c = exponent_hminus1(2, 2.0);
  const bool exps = r_a == 2.0 && r_b == 2.0 && r_c == 2.0;
  json table = json::array({{{"bound", "l2"}, {"gamma", 0.5}, {"q", 4}, {"r", r_a}},
                            {{"bound", "l2"}, {"gamma", 1.0}, {"q", 2}, {"r", r_b}},
                            {{"bound", "hminus1"}, {"gamma", 1.0}, {"q", 2}, {"r", r_c}}});
  DissipativeVerdict L[2], H[2];
  for (int k = 0; k < 2; ++k) {
    const int m = n << k;
    const auto s1 = detail::sqg_dissipative_twin(m, dt, seed);
    L[k] = dissipative_bound_l2(s1, run_twin(s1), 4.0);
    const auto s2 = detail::pks_dissipative_twin(m, dt, seed);
    H[k] = dissipative_bound_hminus1(s2, run_twin(s2), 2.0);
  }
  for (int k = 0; k < 2; ++k) {
    std::ostringstream a, b;
    write_rows_csv(a, L[k].rows);
    write_rows_csv(b, H[k].rows);
    art.text("sqg_l2_n" + std::to_string(n << k) + ".csv", a.str());
    art.text("pks_hminus1_n" + std::to_string(n << k) + ".csv", b.str());
  }
  const bool bounds = L[0].ok() && L[1].ok() && H[0].ok() && H[1].ok();
  const bool stable = refinement_stable(L[0].fitted_C, L[1].fitted_C, 0.5) &&
                      refinement_stable(H[0].fitted_C, H[1].fitted_C, 0.5) &&
                      refinement_stable(L[0].gn_constant, L[1].gn_constant, 0.5) &&
                      refinement_stable(H[0].gn_constant, H[1].gn_constant, 0.5);
  v.pass = exps && bounds && stable;
  v.metrics = {{"exponents", table}, {"sqg_l2", {to_json(L[0]), to_json(L[1])}},
               {"pks_hminus1", {to_json(H[0]), to_json(H[1])}}, {"refinement_stable", stable}, {"n", n}};
  art.text("summary.json", v.metrics.dump(2) + "\n");
  v.detail = std::string("r table ") + (exps ? "exact" : "WRONG") + ", bounds " + (bounds ? "hold" : "fail") +
             " with slack 3, C_l2=" + detail::fmt_short(L[0].fitted_C) + "/" + detail::fmt_short(L[1].fitted_C) +
             ", C_h-1=" + detail::fmt_short(H[0].fitted_C) + "/" + detail::fmt_short(H[1].fitted_C) + " (n, 2n)";
  art.manifest(detail::options_json(v.preset, o, n, dt, seed), v);
  return v;
}

// 10. The porous pairing int (A(rho1) - A(rho2))(rho1 - rho2) stays nonnegative.
inline Verdict preset_porous_monotone(const RunOptions& o) {
  Verdict v{10, "porous_monotone", "monotone diffusion pairing is nonnegative"};
  v.limit_seconds = 120;
  const int n = o.n.value_or(o.quick ? 32 : 64);
  const double dt = o.dt.value_or(0.01);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  TorusGrid g(n);
  std::string csv = "m,t,pairing\n";
  double lowest = HUGE_VAL;
  bool aborted = false;
  for (double m : {2.0, 3.0}) {
    ScalarField r0 = smooth_random_field(g, 2.0, 6, seed, 0.5);
    r0 += 1.0;
    Type1Problem p{.law = VelocityLaw::newtonian(1.0), .diffusion = DiffusionSpec::porous(m, 0.02), .grid = g, .dt = dt,
                   .t_end = 1.0, .initial = r0};
    const auto rep = run_twin({.problem = p, .perturbation = {1e-2, 2.0, 4, seed + 100}, .metric = Metric::HMinus1});
    aborted = aborted || rep.aborted;
    for (const auto& s : rep.samples) {
      lowest = std::min(lowest, -s.t1);
      csv += detail::fmt(m) + "," + detail::fmt(s.t) + "," + detail::fmt(-s.t1) + "\n";
    }
  }
  art.text("pairing.csv", csv);
  v.pass = !aborted && lowest >= -1e-12;
  v.metrics = {{"min_pairing", lowest}, {"aborted", aborted}, {"n", n}};
  v.detail = "min pairing " + detail::fmt_short(lowest) + " over m in {2,3} (limit -1e-12)";
  art.manifest(detail::options_json(v.preset, o, n, dt, seed), v);
  return v;
}

// 11. Condition checks: Biot-Savart satisfies C3 with constant 1; SQG fails it and
// satisfies the L^2 analogue with constant 1.
inline Verdict preset_condition_checks(const RunOptions& o) {
  Verdict v{11, "condition_checks", "velocity condition checks"};
  v.limit_seconds = 1;
  const int n = o.n.value_or(64);
  const std::uint64_t seed = o.seed.value_or(1);
  detail::Artifacts art(o.out);
  TorusGrid g(n);
  std::vector<ScalarField> corpus;
  for (std::uint64_t s = 0; s < 4; ++s) corpus.push_back(smooth_random_field(g, 1.0 + s % 2, 8, seed + s));
  corpus.push_back(subtract_mean(mollified_log(g, 1.0, 2.0, 0.1)));
  const std::vector<double> ps{2, 4, 8, 16};
  const auto bs = check_conditions(VelocityLaw::biot_savart(), corpus, ps);
  const auto sq = check_conditions(VelocityLaw::sqg(), corpus, ps);
  auto js = [](const ConditionReport& r) {
    return json{{"law", r.law},
                {"c2_bmo_ratio", r.c2_bmo_ratio},
                {"c2_lp_ratio", r.c2_lp_ratio},
                {"c3_ratio", r.c3_ratio},
                {"l2_ratio", r.l2_ratio},
                {"divfree_residual", r.divfree_residual},
                {"c3_multiplier_sup", r.c3_multiplier_sup},
                {"l2_multiplier_sup", r.l2_multiplier_sup},
                {"c3_analytic_ok", r.c3_analytic_ok},
                {"l2_analytic_ok", r.l2_analytic_ok}};
  };
  const bool bs_ok = bs.c3_analytic_ok && std::abs(bs.c3_multiplier_sup - 1.0) <= 1e-12 && bs.c3_ratio <= 1.0 + 1e-10;
  const bool sq_ok = !sq.c3_analytic_ok && sq.l2_analytic_ok && std::abs(sq.l2_multiplier_sup - 1.0) <= 1e-12 &&
                     sq.l2_ratio <= 1.0 + 1e-10;
  v.pass = bs_ok && sq_ok;
  v.metrics = {{"biot_savart", js(bs)}, {"sqg", js(sq)}, {"n", n}};
  art.text("conditions.json", v.metrics.dump(2) + "\n");
  v.detail = std::string("Biot-Savart C3 ") + (bs.c3_analytic_ok ? "holds" : "fails") + " (sup " +
             detail::fmt_short(bs.c3_multiplier_sup) + "); SQG C3 " + (sq.c3_analytic_ok ? "holds" : "fails") +
             ", L2 analogue " + (sq.l2_analytic_ok ? "holds" : "fails") + " (sup " + detail::fmt_short(sq.l2_multiplier_sup) + ")";
  art.manifest(detail::options_json(v.preset, o, n, 0.0, seed), v);
  return v;
}

using PresetFn = std::function<Verdict(const RunOptions&)>;

struct PresetEntry {
  std::string name;
  PresetFn run;
};

/// Presets 1..11; the determinism check (12) runs the list twice and is separate.
inline const std::vector<PresetEntry>& presets() {
  static const std::vector<PresetEntry> p = {
      {"spectral_exactness", preset_spectral_exactness},
      {"hminus1_identity", preset_hminus1_identity},
      {"bmo_lp_growth", preset_bmo_lp_growth},
      {"log_lipschitz", preset_log_lipschitz},
      {"cz_decomposition", preset_cz_decomposition},
      {"jones_extension", preset_jones_extension},
      {"numerical_uniqueness", preset_numerical_uniqueness},
      {"euler_bmo_uniqueness", preset_euler_bmo_uniqueness},
      {"sqg_dissipative_q4", preset_sqg_dissipative_q4},
      {"porous_monotone", preset_porous_monotone},
      {"condition_checks", preset_condition_checks},
  };
  return p;
}

inline const PresetEntry* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

/// ASL_THREADS, default 1, at least 1.
inline int thread_cap() {
  const char* s = std::getenv("ASL_THREADS");
  if (!s) return 1;
  const int v = std::atoi(s);
  return v >= 1 ? v : 1;
}

struct VerifyResult {
  std::vector<Verdict> verdicts;
  std::vector<double> seconds;
  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
};

/// Runs every preset into out/<name>/ (in parallel up to `threads`) and writes summary.csv.
inline VerifyResult verify_all(const fs::path& out, bool quick, int threads) {
  const auto& list = presets();
  VerifyResult r;
  r.verdicts.resize(list.size());
  r.seconds.resize(list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < list.size(); i = next++) {
      RunOptions o;
      o.quick = quick;
      if (!out.empty()) o.out = out / list[i].name;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        r.verdicts[i] = list[i].run(o);
      } catch (const std::exception& e) {
        r.verdicts[i] = Verdict{static_cast<int>(i + 1), list[i].name, list[i].name, false, std::string("error: ") + e.what()};
      }
      r.seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(list.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream os(out / "summary.csv", std::ios::binary);
    os << "id,preset,pass,detail\n";
    for (const auto& v : r.verdicts) os << v.id << "," << v.preset << "," << (v.pass ? 1 : 0) << ",\"" << v.detail << "\"\n";
  }
  return r;
}

/// Byte-for-byte comparison of two directory trees; returns the first difference.
inline std::optional<std::string> compare_trees(const fs::path& a, const fs::path& b) {
  auto listing = [](const fs::path& root) {
    std::set<std::string> s;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) s.insert(fs::relative(e.path(), root).generic_string());
    return s;
  };
  const auto la = listing(a), lb = listing(b);
  if (la != lb) return std::string("file sets differ");
  for (const auto& rel : la) {
    std::ifstream fa(a / rel, std::ios::binary), fb(b / rel, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) return rel + " differs";
  }
  return std::nullopt;
}

// --- config-driven runs -----------------------------------------------------

namespace detail {

inline ScalarField initial_field(const ExperimentConfig& c, const TorusGrid& g) {
  const double L = g.length();
  ScalarField f(g);
  if (c.profile == "random") {
    f = smooth_random_field(g, c.spectrum, c.k_max, *c.seed, std::abs(c.amplitude));
  } else if (c.profile == "log") {
    f = subtract_mean(mollified_log(g, 0.5 * L, 0.5 * L, c.eps));
    f *= c.amplitude;
  } else if (c.profile == "bump") {
    f = gaussian_bump(g, 0.5 * L, 0.5 * L, c.eps, c.amplitude);
  } else {
    f = ScalarField::sample(g, [&](double x, double y) { return c.amplitude * std::cos(two_pi * x / L) * std::cos(two_pi * y / L); });
  }
  f += c.offset;
  return f;
}

inline Problem make_problem(const ExperimentConfig& c) {
  TorusGrid g(c.n, c.length);
  const ScalarField init = initial_field(c, g);
  const VelocityLaw law = parse_law(c.law);
  if (c.equation == "type1") {
    DiffusionSpec d = c.diffusion == "linear"   ? DiffusionSpec::linear(c.nu)
                      : c.diffusion == "porous" ? DiffusionSpec::porous(c.m, c.nu)
                                                : DiffusionSpec::none();
    return Type1Problem{.law = law, .diffusion = d, .grid = g, .dt = c.dt, .t_end = c.t_end, .initial = init};
  }
  return Type2Problem{.law = law, .nu = c.nu, .gamma = c.gamma, .grid = g, .dt = c.dt, .t_end = c.t_end, .initial = init};
}

inline TwinRun make_twin(const ExperimentConfig& c) {
  TwinRun t{.problem = make_problem(c)};
  t.perturbation = {c.perturbation, c.perturbation_spectrum, c.perturbation_k_max,
                    c.perturbation_seed.value_or(c.seed.value_or(0) + 1)};
  t.metric = c.metric == "hminus1" ? Metric::HMinus1 : Metric::L2;
  t.diag_every = c.diag_every;
  return t;
}

}  // namespace detail

/// Executes a parsed config into c.output; returns the verdict (exit status 0 iff pass).
inline Verdict execute(const ExperimentConfig& c, const std::string& config_text) {
  Verdict v{0, c.kind, c.kind};
  detail::Artifacts art(c.output);
  art.text("config.ini", config_text);
  art.text("config.resolved.ini", canonical_config(c));
  json extra{{"kind", c.kind}, {"reproduce", "asl run config.ini"}};
  if (c.kind == "norm_study") {
    const auto f = detail::initial_field(c, TorusGrid(c.n, c.length));
    art.snapshot("field.asf", f);
    std::vector<NormReport> rows;
    for (double p : c.norm_p) rows.push_back({"lp", p, 0, lp_norm(f, p)});
    const int depth = c.depth < 0 ? default_bmo_depth(c.n) : c.depth;
    rows.push_back({"bmo", 0, depth, bmo_norm(f, depth)});
    if (is_mean_zero(f)) rows.push_back({"sobolev", -1, 0, sobolev_norm(f, -1.0)});
    std::ostringstream os;
    write_norm_csv(os, rows);
    art.text("norms.csv", os.str());
    std::vector<double> ps;
    for (double p : c.norm_p)
      if (p > c.p0) ps.push_back(p);
    if (!ps.empty()) {
      const auto prof = lp_growth_profile(f, ps, c.p0);
      std::string g = "p,lp,rhs,ratio\n";
      for (const auto& r : prof.rows)
        g += detail::fmt(r.p) + "," + detail::fmt(r.lp) + "," + detail::fmt(r.rhs) + "," + detail::fmt(r.ratio) + "\n";
      art.text("growth.csv", g);
      v.metrics["growth_sup_ratio"] = prof.sup_ratio;
      v.pass = std::isfinite(prof.sup_ratio);
    } else {
      v.pass = true;
    }
    v.detail = "norms written";
  } else if (c.kind == "harmonic_study") {
    const int n = c.raster;
    const auto doms = detail::uniform_domains();
    const auto it = std::find_if(doms.begin(), doms.end(), [&](const auto& d) { return d.name == c.domain; });
    const auto dom = RasterDomain::from_predicate(n, n, it->in, it->unbounded);
    const auto in = whitney_decompose(dom);
    const auto ext = whitney_decompose(RasterDomain(n, dom.complement().mask(), n, true));
    const auto a = jones_assign(in, ext, !it->unbounded);
    std::ostringstream ci, ce;
    write_cubes_csv(ci, in.cube_list());
    write_cubes_csv(ce, ext.cube_list());
    art.text("whitney_interior.csv", ci.str());
    art.text("whitney_exterior.csv", ce.str());
    const auto fns = detail::bmo_test_functions();
    double C = 0.0;
    std::string csv = "function,bmo_domain,bmo_extended,ratio\n";
    for (std::size_t k = 0; k < fns.size(); ++k) {
      GridFunction f(TorusGrid(n, double(n)));
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f(i, j) = dom.in(i, j) ? fns[k]((i + 0.5) / n, (j + 0.5) / n) : 0.0;
      const double inside = bmo_norm_domain(f, dom, -1), whole = bmo_norm_raster(jones_extend(f, dom, in, ext, a).extended);
      C = std::max(C, whole / inside);
      csv += std::to_string(k) + "," + detail::fmt(inside) + "," + detail::fmt(whole) + "," + detail::fmt(whole / inside) + "\n";
    }
    art.text("extension.csv", csv);
    GridFunction f(TorusGrid(n, double(n)));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) f(i, j) = dom.in(i, j) ? fns[0]((i + 0.5) / n, (j + 0.5) / n) : 0.0;
    const auto cz = cz_decompose(f, c.alpha);
    std::ostringstream cb;
    write_cubes_csv(cb, cz.bad_cubes);
    art.text("cz_bad_cubes.csv", cb.str());
    v.metrics = {{"extension_constant", C}, {"c_prime", a.c_prime}, {"c_double_prime", a.c_double_prime},
                 {"bad_cubes", cz.bad_cubes.size()}, {"measure_e", cz.measure_e}};
    v.pass = std::isfinite(C);
    v.detail = "extension constant " + detail::fmt_short(C);
  } else if (c.kind == "condition_check") {
    TorusGrid g(c.n, c.length);
    std::vector<ScalarField> corpus;
    for (std::uint64_t s = 0; s < 4; ++s) corpus.push_back(smooth_random_field(g, c.spectrum, c.k_max, *c.seed + s));
    const VelocityLaw law = parse_law(c.law);
    const auto r = check_conditions(law, corpus, c.norm_p);
    v.metrics = {{"law", r.law},
                 {"c2_bmo_ratio", r.c2_bmo_ratio},
                 {"c2_lp_ratio", r.c2_lp_ratio},
                 {"c3_ratio", r.c3_ratio},
                 {"l2_ratio", r.l2_ratio},
                 {"divfree_residual", r.divfree_residual},
                 {"c3_multiplier_sup", r.c3_multiplier_sup},
                 {"l2_multiplier_sup", r.l2_multiplier_sup},
                 {"c3_analytic_ok", r.c3_analytic_ok},
                 {"l2_analytic_ok", r.l2_analytic_ok}};
    art.text("conditions.json", v.metrics.dump(2) + "\n");
    // Consistency: empirical ratios never exceed the multiplier suprema.
    v.pass = r.l2_ratio <= r.l2_multiplier_sup * (1 + 1e-10) + 1e-14 && r.c3_ratio <= r.c3_multiplier_sup * (1 + 1e-10) + 1e-14 &&
             (!law.divergence_free() || r.divfree_residual < 1e-10);
    v.detail = "C3 analytic " + std::string(r.c3_analytic_ok ? "holds" : "fails") + ", L2 analytic " +
               (r.l2_analytic_ok ? "holds" : "fails");
  } else if (c.kind == "single_run") {
    const Problem p = detail::make_problem(c);
    const auto tr = run(p, {.snapshot_every = 0, .bmo = true});
    std::ostringstream os;
    write_diagnostics_csv(os, tr, true);
    art.text("diagnostics.csv", os.str());
    art.snapshot("initial.asf", tr.snapshots.front());
    art.snapshot("final.asf", tr.snapshots.back());
    v.pass = !tr.aborted;
    v.metrics = {{"aborted", tr.aborted}, {"error", tr.error}, {"steps", tr.halvings.size()}};
    v.detail = tr.aborted ? "aborted: " + tr.error : "completed";
  } else if (c.kind == "twin_run") {
    const TwinRun t = detail::make_twin(c);
    const auto rep = run_twin(t);
    std::string csv = "t,distance\n";
    for (const auto& s : rep.samples) csv += detail::fmt(s.t) + "," + detail::fmt(s.distance) + "\n";
    art.text("distance.csv", csv);
    json checks = json::array();
    bool ok = !rep.aborted;
    if (c.check == "envelope") {
      for (double pd : c.p_list) {
        const int p = static_cast<int>(pd);
        const auto e = rep.type1 ? envelope_type1(rep, p) : envelope_type2(rep, p);
        std::ostringstream os;
        write_rows_csv(os, e.rows);
        art.text("envelope_p" + std::to_string(p) + ".csv", os.str());
        checks.push_back(to_json(e));
        ok = ok && e.ok(0.99);
      }
    } else if (c.check == "dissipative") {
      const auto d = rep.type1 ? dissipative_bound_hminus1(t, rep, *c.q) : dissipative_bound_l2(t, rep, *c.q);
      std::ostringstream os;
      write_rows_csv(os, d.rows);
      art.text("dissipative.csv", os.str());
      checks.push_back(to_json(d));
      ok = ok && d.ok();
    }
    v.metrics = {{"twin", to_json(rep)}, {"checks", checks}};
    art.text("summary.json", v.metrics.dump(2) + "\n");
    v.pass = ok;
    v.detail = rep.aborted ? "aborted: " + rep.error : (ok ? "all checks pass" : "a check failed");
  } else if (c.kind == "contraction_probe") {
    const auto pr = contraction_probe(detail::make_twin(c), c.levels);
    std::string csv = "level,contracting\n";
    for (std::size_t k = 0; k < pr.levels.size(); ++k)
      csv += detail::fmt(pr.levels[k]) + "," + std::to_string(pr.contracting[k] ? 1 : 0) + "\n";
    art.text("probe.csv", csv);
    v.metrics = {{"eps0", pr.eps0 ? json(*pr.eps0) : json(nullptr)}};
    v.pass = true;
    v.detail = pr.eps0 ? "largest contracting level " + detail::fmt_short(*pr.eps0) : "no level contracts";
  }
  art.manifest(extra, v);
  return v;
}

}  // namespace asl
