#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "asl/dyadic.hpp"
#include "asl/grid.hpp"

namespace asl {

// Rasters here are finite pieces of R^2: n x n unit cells, cell (i, j) covering
// [i, i+1] x [j, j+1] in lattice units. Nothing wraps.
using GridFunction = ScalarField;

struct DyadicCube {
  int level = 0;  // side 2^level cells
  int ax = 0, ay = 0;

  int side() const { return 1 << level; }
  double cx() const { return ax + 0.5 * side(); }
  double cy() const { return ay + 0.5 * side(); }
  double diam() const { return side() * std::sqrt(2.0); }
  bool contains_cell(int i, int j) const { return i >= ax && i < ax + side() && j >= ay && j < ay + side(); }

  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

/// Euclidean gap between two axis-aligned squares (0 when they touch or overlap).
inline double cube_distance(const DyadicCube& a, const DyadicCube& b) {
  const double gx = std::max({0.0, double(b.ax - (a.ax + a.side())), double(a.ax - (b.ax + b.side()))});
  const double gy = std::max({0.0, double(b.ay - (a.ay + a.side())), double(a.ay - (b.ay + b.side()))});
  return std::hypot(gx, gy);
}

/// Smallest lambda with a inside lambda*b (same center as b, lambda times the side).
inline double dilation_to_contain(const DyadicCube& a, const DyadicCube& b) {
  const double hx = std::max(std::abs(a.ax - b.cx()), std::abs(a.ax + a.side() - b.cx()));
  const double hy = std::max(std::abs(a.ay - b.cy()), std::abs(a.ay + a.side() - b.cy()));
  return 2.0 * std::max(hx, hy) / b.side();
}

inline void write_cubes_csv(std::ostream& os, const std::vector<DyadicCube>& cubes) {
  os << "level,ax,ay\n";
  for (const auto& q : cubes) os << q.level << ',' << q.ax << ',' << q.ay << '\n';
}

inline std::vector<DyadicCube> read_cubes_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "level,ax,ay") throw std::runtime_error("cube csv: expected header level,ax,ay");
  std::vector<DyadicCube> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    DyadicCube q;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> q.level >> c1 >> q.ax >> c2 >> q.ay) || c1 != ',' || c2 != ',' || q.level < 0 ||
        q.ax % q.side() != 0 || q.ay % q.side() != 0)
      throw std::runtime_error("cube csv line " + std::to_string(lineno) + ": malformed '" + line + "'");
    out.push_back(q);
  }
  return out;
}

/// Boolean raster of an open set. With `open_border` the set is taken to continue
/// past the raster edge (unbounded domains); otherwise the outside of the raster
/// belongs to the complement.
class RasterDomain {
 public:
  RasterDomain(int n, std::vector<std::uint8_t> mask, double resolution = 1.0, bool open_border = false)
      : n_(n), mask_(std::move(mask)), resolution_(resolution), open_border_(open_border) {
    if (!is_power_of_two(n)) throw std::invalid_argument("RasterDomain: n must be a power of two");
    if (mask_.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("RasterDomain: mask size");
    if (!(resolution > 0.0)) throw std::invalid_argument("RasterDomain: resolution must be positive");
    if (std::none_of(mask_.begin(), mask_.end(), [](auto v) { return v != 0; }))
      throw std::invalid_argument("RasterDomain: empty domain");
    sat_.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        sat_[idx1(i + 1, j + 1)] = (in(i, j) ? 1 : 0) + sat_[idx1(i, j + 1)] + sat_[idx1(i + 1, j)] - sat_[idx1(i, j)];
  }

  /// Cell (i, j) is in the domain iff pred(x, y) holds at its center, with x, y in
  /// physical units (cell side 1/resolution).
  template <typename P>
  static RasterDomain from_predicate(int n, double resolution, P&& pred, bool open_border = false) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(j) * n + i] = pred((i + 0.5) / resolution, (j + 0.5) / resolution);
    return RasterDomain(n, std::move(m), resolution, open_border);
  }

  int n() const { return n_; }
  double resolution() const { return resolution_; }
  bool open_border() const { return open_border_; }
  bool in(int i, int j) const { return mask_[static_cast<std::size_t>(j) * n_ + i] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  long count() const { return sat_.back(); }

  /// Number of domain cells inside the square [x0, x0+s) x [y0, y0+s), clipped to the raster.
  long cells_in(int x0, int y0, int s) const {
    const int a = std::clamp(x0, 0, n_), b = std::clamp(y0, 0, n_);
    const int c = std::clamp(x0 + s, 0, n_), d = std::clamp(y0 + s, 0, n_);
    return sat_[idx1(c, d)] - sat_[idx1(a, d)] - sat_[idx1(c, b)] + sat_[idx1(a, b)];
  }
  bool touches_border() const {
    for (int k = 0; k < n_; ++k)
      if (in(k, 0) || in(k, n_ - 1) || in(0, k) || in(n_ - 1, k)) return true;
    return false;
  }

  RasterDomain complement() const {
    std::vector<std::uint8_t> m(mask_.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = mask_[k] ? 0 : 1;
    return RasterDomain(n_, std::move(m), resolution_, open_border_);
  }

 private:
  std::size_t idx1(int i, int j) const { return static_cast<std::size_t>(j) * (n_ + 1) + i; }
  int n_;
  std::vector<std::uint8_t> mask_;
  double resolution_;
  bool open_border_;
  std::vector<long> sat_;
};

namespace detail {

/// 1-D squared distance transform (lower envelope of parabolas).
inline void edt_1d(const double* f, double* d, int len, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(len, 0);
  z.assign(len + 1, 0.0);
  int k = 0;
  int first = -1;
  for (int q = 0; q < len; ++q)
    if (f[q] < inf) {
      first = q;
      break;
    }
  if (first < 0) {
    for (int q = 0; q < len; ++q) d[q] = inf;
    return;
  }
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (int q = first + 1; q < len; ++q) {
    if (f[q] == inf) continue;
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < len; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

/// Exact Euclidean distance from every lattice vertex (n+1)^2 to the set of
/// vertices that are corners of complement cells (and, for a closed border, the
/// raster boundary).
inline std::vector<double> vertex_distance(const RasterDomain& dom) {
  const int n = dom.n(), m = n + 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(m) * m, inf);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (!dom.in(i, j))
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) g[static_cast<std::size_t>(j + dj) * m + i + di] = 0.0;
  if (!dom.open_border())
    for (int k = 0; k < m; ++k) g[k] = g[static_cast<std::size_t>(n) * m + k] = g[static_cast<std::size_t>(k) * m] = g[static_cast<std::size_t>(k) * m + n] = 0.0;
  std::vector<double> col(m), out(m);
  std::vector<int> v;
  std::vector<double> z;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) col[j] = g[static_cast<std::size_t>(j) * m + i];
    edt_1d(col.data(), out.data(), m, v, z);
    for (int j = 0; j < m; ++j) g[static_cast<std::size_t>(j) * m + i] = out[j];
  }
  for (int j = 0; j < m; ++j) {
    double* row = &g[static_cast<std::size_t>(j) * m];
    std::copy(row, row + m, col.begin());
    edt_1d(col.data(), row, m, v, z);
  }
  for (double& x : g) x = std::sqrt(x);
  return g;
}

}  // namespace detail

struct WhitneyCube {
  DyadicCube cube;
  double dist = 0.0;  // dist(Q, complement), lattice units
  bool boundary_layer = false;  // accepted at the minimum level without meeting the rule
  bool guard = false;           // within the guard band of an open raster border
};

struct WhitneyDecomposition {
  std::vector<WhitneyCube> cubes;
  int n = 0;
  double lower = 2.0, upper = 8.0;  // acceptance: lower*diam <= dist < upper*diam
  // Extremes of dist(Q)/l(Q) over regular (non-flagged, finite-distance) cubes.
  double min_dist_ratio = 0.0, max_dist_ratio = 0.0;
  bool unbounded_root = false;  // some cube has no complement in range

  std::vector<DyadicCube> cube_list() const {
    std::vector<DyadicCube> v;
    for (const auto& w : cubes) v.push_back(w.cube);
    return v;
  }
};

struct WhitneyOptions {
  int min_level = 0;
  double guard_fraction = 0.25;  // guard band width for open borders, fraction of n
};

/// Quadtree Whitney decomposition: a cube inside the domain is accepted once
/// dist(Q, complement) >= 2 diam(Q); at the minimum level every remaining inside
/// cube is accepted and flagged.
inline WhitneyDecomposition whitney_decompose(const RasterDomain& dom, const WhitneyOptions& opt = {}) {
  if (!dom.open_border() && dom.touches_border())
    throw std::invalid_argument("whitney_decompose: domain touches the raster border");
  const int n = dom.n(), m = n + 1;
  const auto vd = detail::vertex_distance(dom);
  const int guard = static_cast<int>(std::lround(opt.guard_fraction * n));
  WhitneyDecomposition out;
  out.n = n;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;

  std::vector<DyadicCube> stack{{log2_exact(n), 0, 0}};
  while (!stack.empty()) {
    const DyadicCube q = stack.back();
    stack.pop_back();
    const int s = q.side();
    const long inside = dom.cells_in(q.ax, q.ay, s);
    if (inside == 0) continue;
    const bool full = inside == static_cast<long>(s) * s;
    double dist = std::numeric_limits<double>::infinity();
    if (full) {
      for (int t = 0; t <= s; ++t) {
        dist = std::min({dist, vd[static_cast<std::size_t>(q.ay) * m + q.ax + t],
                         vd[static_cast<std::size_t>(q.ay + s) * m + q.ax + t],
                         vd[static_cast<std::size_t>(q.ay + t) * m + q.ax],
                         vd[static_cast<std::size_t>(q.ay + t) * m + q.ax + s]});
      }
    }
    const bool rule = full && dist >= out.lower * q.diam();
    if (full && (rule || q.level <= opt.min_level)) {
      WhitneyCube w{q, dist, !rule, false};
      if (dom.open_border())
        w.guard = q.ax < guard || q.ay < guard || q.ax + s > n - guard || q.ay + s > n - guard;
      if (!std::isfinite(dist)) out.unbounded_root = true;
      if (!w.boundary_layer && !w.guard && std::isfinite(dist)) {
        lo = std::min(lo, dist / s);
        hi = std::max(hi, dist / s);
      }
      out.cubes.push_back(w);
      continue;
    }
    const int h = s / 2;
    for (int c = 3; c >= 0; --c) stack.push_back({q.level - 1, q.ax + (c & 1) * h, q.ay + (c >> 1) * h});
  }
  std::sort(out.cubes.begin(), out.cubes.end(), [](const auto& a, const auto& b) { return a.cube < b.cube; });
  out.min_dist_ratio = std::isfinite(lo) ? lo : 0.0;
  out.max_dist_ratio = hi;
  return out;
}

/// Cube-to-cube map for the extension, with the recorded geometric constants.
struct JonesAssignment {
  std::vector<int> target;        // per exterior cube: index into interior.cubes
  std::vector<std::uint8_t> fallback;   // bounded case: T = Q0 because no large-enough cube exists
  std::vector<std::uint8_t> truncated;  // unbounded case: raster too small to find l(T) >= l(Q')
  std::optional<int> q0;          // index of Q0 (bounded case)
  double c_prime = 0.0;           // Omega inside C' Q0
  double c_double_prime = 0.0;    // T in C'' Q' and Q' in C'' T when l(T) >= l(Q')
  double dist_constant = 0.0;     // max d(Q', T) / l(T) over the same cubes
};

/// For every exterior cube, the closest interior cube at least as large. Equal
/// gaps are resolved by center distance, then by (level, ax, ay).
inline JonesAssignment jones_assign(const WhitneyDecomposition& interior, const WhitneyDecomposition& exterior,
                                    bool bounded) {
  if (interior.cubes.empty()) throw std::invalid_argument("jones_assign: no interior Whitney cubes");
  JonesAssignment a;
  const auto& W = interior.cubes;
  int top = 0;
  for (const auto& w : W) top = std::max(top, w.cube.level);

  if (bounded) {
    // Q0: a largest cube minimizing C' with Omega inside C' Q0.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < W.size(); ++t) {
      if (W[t].cube.level != top) continue;
      double lam = 0.0;
      for (const auto& w : W) lam = std::max(lam, dilation_to_contain(w.cube, W[t].cube));
      if (lam < best) {
        best = lam;
        a.q0 = static_cast<int>(t);
      }
    }
    a.c_prime = best;
  }

  auto closer = [](const DyadicCube& q, const DyadicCube& a, const DyadicCube& b) {
    const double da = cube_distance(q, a), db = cube_distance(q, b);
    if (da != db) return da < db;
    const double ca = std::hypot(a.cx() - q.cx(), a.cy() - q.cy()), cb = std::hypot(b.cx() - q.cx(), b.cy() - q.cy());
    if (ca != cb) return ca < cb;
    return a < b;
  };
  for (const auto& e : exterior.cubes) {
    const DyadicCube& q = e.cube;
    int pick = -1;
    // Boundary-layer cubes are raster artifacts; use them only when nothing else qualifies.
    for (int pass = 0; pass < 2 && pick < 0; ++pass)
      for (std::size_t t = 0; t < W.size(); ++t) {
        if (W[t].cube.level < q.level || (pass == 0 && W[t].boundary_layer)) continue;
        if (pick < 0 || closer(q, W[t].cube, W[pick].cube)) pick = static_cast<int>(t);
      }
    bool fb = false, tr = false;
    if (pick < 0) {
      if (bounded) {
        pick = *a.q0;
        fb = true;
      } else {
        for (std::size_t t = 0; t < W.size(); ++t) {
          if (W[t].cube.level != top) continue;
          if (pick < 0 || closer(q, W[t].cube, W[pick].cube)) pick = static_cast<int>(t);
        }
        tr = true;
      }
    }
    a.target.push_back(pick);
    a.fallback.push_back(fb);
    a.truncated.push_back(tr);
    const DyadicCube& T = W[pick].cube;
    if (!fb && !tr && !e.guard) {
      a.c_double_prime = std::max({a.c_double_prime, dilation_to_contain(T, q), dilation_to_contain(q, T)});
      a.dist_constant = std::max(a.dist_constant, cube_distance(q, T) / T.side());
    }
  }
  return a;
}

struct JonesExtension {
  GridFunction extended;
  double maximal_constant = 0.0;  // max |f~| / avg_B |f chi_Omega| over exterior cubes with l(T) >= l(Q')
};

namespace detail {

inline double cube_sum(const GridFunction& f, const DyadicCube& q, bool absolute, const RasterDomain* dom = nullptr) {
  double s = 0.0;
  for (int j = q.ay; j < q.ay + q.side(); ++j)
    for (int i = q.ax; i < q.ax + q.side(); ++i) {
      if (dom && !dom->in(i, j)) continue;
      s += absolute ? std::abs(f(i, j)) : f(i, j);
    }
  return s;
}

}  // namespace detail

/// f~ = f on Omega and avg_{T(Q')} f on each exterior Whitney cube Q'.
///
/// The maximal-function bound is checked with the box B spanned by Q' and T(Q'),
/// which contains every point of Q'.
inline JonesExtension jones_extend(const GridFunction& f, const RasterDomain& dom, const WhitneyDecomposition& interior,
                                   const WhitneyDecomposition& exterior, const JonesAssignment& a) {
  if (f.n() != dom.n()) throw std::invalid_argument("jones_extend: raster size mismatch");
  if (a.target.size() != exterior.cubes.size()) throw std::invalid_argument("jones_extend: assignment incomplete");
  const int n = dom.n();
  JonesExtension out{GridFunction(f.grid()), 0.0};
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(n) * n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (dom.in(i, j)) {
        out.extended(i, j) = f(i, j);
        covered[static_cast<std::size_t>(j) * n + i] = 1;
      }
  for (std::size_t e = 0; e < exterior.cubes.size(); ++e) {
    const DyadicCube& q = exterior.cubes[e].cube;
    const int t = a.target[e];
    if (t < 0 || t >= static_cast<int>(interior.cubes.size())) throw std::invalid_argument("jones_extend: assignment incomplete");
    const DyadicCube& T = interior.cubes[t].cube;
    const double avg = detail::cube_sum(f, T, false) / (double(T.side()) * T.side());
    for (int j = q.ay; j < q.ay + q.side(); ++j)
      for (int i = q.ax; i < q.ax + q.side(); ++i) {
        out.extended(i, j) = avg;
        covered[static_cast<std::size_t>(j) * n + i] = 1;
      }
    if (!a.fallback[e] && !a.truncated[e] && !exterior.cubes[e].guard && avg != 0.0) {
      const int x0 = std::min(q.ax, T.ax), y0 = std::min(q.ay, T.ay);
      const int x1 = std::max(q.ax + q.side(), T.ax + T.side()), y1 = std::max(q.ay + q.side(), T.ay + T.side());
      const int s = std::max(x1 - x0, y1 - y0);
      double box = 0.0;
      for (int j = y0; j < std::min(y0 + s, n); ++j)
        for (int i = x0; i < std::min(x0 + s, n); ++i)
          if (dom.in(i, j)) box += std::abs(f(i, j));
      box /= double(s) * s;
      out.maximal_constant = std::max(out.maximal_constant, std::abs(avg) / box);
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw std::invalid_argument("jones_extend: exterior decomposition leaves cells uncovered");
  return out;
}

/// g = f - f_{Q0} on Omega, zero outside.
inline GridFunction recenter_q0(const GridFunction& f, const RasterDomain& dom, const DyadicCube& q0) {
  const double avg = detail::cube_sum(f, q0, false) / (double(q0.side()) * q0.side());
  GridFunction g(f.grid());
  for (int j = 0; j < dom.n(); ++j)
    for (int i = 0; i < dom.n(); ++i) g(i, j) = dom.in(i, j) ? f(i, j) - avg : 0.0;
  return g;
}

/// Mean oscillation over dyadic cubes (and one-third shifts) that lie inside Omega.
/// Cubes do not wrap unless `periodic` is set (the raster is then read as a torus).
inline double bmo_norm_domain(const GridFunction& f, const RasterDomain& dom, int max_depth, bool periodic = false) {
  if (f.n() != dom.n()) throw std::invalid_argument("bmo_norm_domain: raster size mismatch");
  BmoLattice lat;
  lat.max_depth = max_depth;
  lat.periodic = periodic;
  const auto m = dyadic_mean_oscillation(f.values(), f.n(), lat, &dom.mask());
  if (m.side == 0) throw std::invalid_argument("bmo_norm_domain: no cube of minimum size fits in the domain");
  return m.value;
}

/// Non-periodic dyadic BMO over the whole raster (the extended function lives in R^2).
inline double bmo_norm_raster(const GridFunction& f, int max_depth = -1) {
  BmoLattice lat;
  lat.max_depth = max_depth;
  lat.periodic = false;
  return dyadic_mean_oscillation(f.values(), f.n(), lat).value;
}

/// Mf at each cell: max of |f| averages over the anchored dyadic cubes containing
/// it, levels 0..max_level. Levels above log2(n) are the cubes [0, 2^l)^2 with f
/// extended by zero.
inline GridFunction dyadic_maximal(const GridFunction& f, int max_level) {
  const int n = f.n(), top = log2_exact(n);
  if (max_level < 0) throw std::invalid_argument("dyadic_maximal: max_level must be >= 0");
  GridFunction M(f.grid());
  std::vector<double> sums(f.values().size());
  for (std::size_t k = 0; k < sums.size(); ++k) sums[k] = std::abs(f.values()[k]);
  for (std::size_t k = 0; k < sums.size(); ++k) M.values()[k] = sums[k];
  int w = n;  // sums holds w x w block sums at the current level
  for (int l = 1; l <= std::min(max_level, top); ++l) {
    const int w2 = w / 2;
    std::vector<double> next(static_cast<std::size_t>(w2) * w2);
    for (int b = 0; b < w2; ++b)
      for (int a = 0; a < w2; ++a)
        next[static_cast<std::size_t>(b) * w2 + a] = sums[(2 * b) * w + 2 * a] + sums[(2 * b) * w + 2 * a + 1] +
                                                     sums[(2 * b + 1) * w + 2 * a] + sums[(2 * b + 1) * w + 2 * a + 1];
    sums.swap(next);
    w = w2;
    const double area = std::ldexp(1.0, 2 * l);
    const int s = 1 << l;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) M(i, j) = std::max(M(i, j), sums[static_cast<std::size_t>(j / s) * w + i / s] / area);
  }
  if (max_level > top) {
    const double total = sums[0];
    const double area = std::ldexp(1.0, 2 * (top + 1));
    for (double& v : M.values()) v = std::max(v, total / area);
  }
  return M;
}

struct CZDecomposition {
  double alpha = 0.0;
  GridFunction good, bad;
  std::vector<DyadicCube> bad_cubes;  // levels above log2(n) are cubes [0, 2^l)^2 reaching past the raster
  std::vector<double> bad_averages;
  double measure_e = 0.0;  // |{Mf > alpha}| in physical units, including area outside the raster
};

/// Maximal dyadic cubes with avg |f| > alpha, f extended by zero outside the raster.
inline CZDecomposition cz_decompose(const GridFunction& f, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("cz_decompose: alpha must be positive");
  const int n = f.n(), top = log2_exact(n);
  // Block sums of |f| per level, finest first.
  std::vector<std::vector<double>> sums(top + 1);
  sums[0].resize(f.values().size());
  for (std::size_t k = 0; k < sums[0].size(); ++k) sums[0][k] = std::abs(f.values()[k]);
  for (int l = 1; l <= top; ++l) {
    const int w = n >> l, wp = w * 2;
    sums[l].resize(static_cast<std::size_t>(w) * w);
    for (int b = 0; b < w; ++b)
      for (int a = 0; a < w; ++a) {
        const auto& p = sums[l - 1];
        sums[l][static_cast<std::size_t>(b) * w + a] =
            p[(2 * b) * wp + 2 * a] + p[(2 * b) * wp + 2 * a + 1] + p[(2 * b + 1) * wp + 2 * a] + p[(2 * b + 1) * wp + 2 * a + 1];
      }
  }
  CZDecomposition cz{alpha, GridFunction(f.grid()), GridFunction(f.grid()), {}, {}, 0.0};
  const double cell = f.grid().cell_area();
  const double total = sums[top][0];
  // Super-cubes: the smallest cube [0, 2^l)^2, l >= top, whose average drops to alpha or below.
  int l_root = top;
  while (total / std::ldexp(1.0, 2 * l_root) > alpha) ++l_root;
  std::vector<std::uint8_t> in_bad(f.values().size(), 0);
  auto mark = [&](const DyadicCube& q, double avg) {
    cz.bad_cubes.push_back(q);
    cz.bad_averages.push_back(avg);
    cz.measure_e += std::ldexp(1.0, 2 * q.level) * cell;
    const int x1 = std::min(q.ax + q.side(), n), y1 = std::min(q.ay + q.side(), n);
    for (int j = q.ay; j < y1; ++j)
      for (int i = q.ax; i < x1; ++i) in_bad[static_cast<std::size_t>(j) * n + i] = 1;
  };
  if (l_root > top) {
    mark({l_root - 1, 0, 0}, total / std::ldexp(1.0, 2 * (l_root - 1)));
  } else {
    // Top-down: a cube is bad-maximal when its average exceeds alpha and no ancestor's does.
    std::vector<DyadicCube> stack{{top, 0, 0}};
    while (!stack.empty()) {
      const DyadicCube q = stack.back();
      stack.pop_back();
      const int w = n >> q.level;
      const double avg = sums[q.level][static_cast<std::size_t>(q.ay >> q.level) * w + (q.ax >> q.level)] /
                         std::ldexp(1.0, 2 * q.level);
      if (avg > alpha) {
        mark(q, avg);
        continue;
      }
      if (q.level == 0) continue;
      const int h = q.side() / 2;
      for (int c = 3; c >= 0; --c) stack.push_back({q.level - 1, q.ax + (c & 1) * h, q.ay + (c >> 1) * h});
    }
  }
  std::vector<std::size_t> order(cz.bad_cubes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cz.bad_cubes[a] < cz.bad_cubes[b]; });
  std::vector<DyadicCube> cubes;
  std::vector<double> avgs;
  for (auto k : order) {
    cubes.push_back(cz.bad_cubes[k]);
    avgs.push_back(cz.bad_averages[k]);
  }
  cz.bad_cubes = std::move(cubes);
  cz.bad_averages = std::move(avgs);
  for (std::size_t k = 0; k < in_bad.size(); ++k) {
    const double v = f.values()[k];
    cz.good.values()[k] = in_bad[k] ? 0.0 : v;
    cz.bad.values()[k] = v - cz.good.values()[k];
  }
  return cz;
}

/// max over bad cubes (inside the raster) of avg_Q |f - f_Q|^p / (p ||f||_BMO)^p, to the power 1/p.
inline double john_nirenberg_ratio(const GridFunction& f, const CZDecomposition& cz, double p, double bmo) {
  if (!(bmo > 0.0)) return 0.0;
  const int n = f.n();
  double worst = 0.0;
  for (const auto& q : cz.bad_cubes) {
    if (q.ax + q.side() > n || q.ay + q.side() > n) continue;
    const double area = double(q.side()) * q.side();
    const double mean = detail::cube_sum(f, q, false) / area;
    double s = 0.0;
    for (int j = q.ay; j < q.ay + q.side(); ++j)
      for (int i = q.ax; i < q.ax + q.side(); ++i) s += std::pow(std::abs(f(i, j) - mean), p);
    worst = std::max(worst, std::pow(s / area, 1.0 / p) / (p * bmo));
  }
  return worst;
}

}  // namespace asl
