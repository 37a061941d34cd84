#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "asl/grid.hpp"

namespace asl {

/// Lattice used by the dyadic mean-oscillation scan.
///
/// Cubes have side n >> j cells for j = 0..max_depth (never below min_side). With
/// `shifted`, the anchored lattice is joined by its translates by (s,0), (0,s) and
/// (s,s) where s = shift_cells (default round(n/3)).
struct BmoLattice {
  int max_depth = -1;  // -1: deepest level with side >= min_side
  bool shifted = true;
  bool periodic = true;  // cubes may wrap around the raster edge
  int shift_cells = -1;  // -1: round(n/3)
  int min_side = 2;
};

struct MeanOscillation {
  double value = 0.0;  // sup over admissible cubes of avg_Q |f - f_Q|
  int side = 0;        // side (cells) of a maximizing cube, 0 when no cube qualified
  int ax = 0, ay = 0;
  int cubes = 0;  // number of cubes scanned
};

namespace detail {

inline int resolve_depth(int n, const BmoLattice& lat) {
  const int top = log2_exact(n);
  if (lat.max_depth < -1) throw std::invalid_argument("bmo: max_depth must be >= 1");
  if (lat.max_depth == -1) return top - log2_exact(std::max(lat.min_side, 1));
  if (lat.max_depth < 1) throw std::invalid_argument("bmo: max_depth must be >= 1");
  if ((1L << lat.max_depth) > n)
    throw std::invalid_argument("bmo: depth " + std::to_string(lat.max_depth) + " too fine for n = " +
                                std::to_string(n));
  return lat.max_depth;
}

/// Mean oscillation over one s x s cube anchored at (x0, y0); returns false when
/// the cube leaves the mask or (non-periodic) the raster.
inline bool cube_oscillation(std::span<const double> f, int n, int x0, int y0, int s, bool periodic,
                             const std::vector<std::uint8_t>* mask, double& osc) {
  if (!periodic && (x0 < 0 || y0 < 0 || x0 + s > n || y0 + s > n)) return false;
  const int wrap = n - 1;
  double sum = 0.0;
  for (int dj = 0; dj < s; ++dj) {
    const std::size_t row = static_cast<std::size_t>((y0 + dj) & wrap) * n;
    for (int di = 0; di < s; ++di) {
      const std::size_t idx = row + ((x0 + di) & wrap);
      if (mask && !(*mask)[idx]) return false;
      sum += f[idx];
    }
  }
  const double mean = sum / (static_cast<double>(s) * s);
  double dev = 0.0;
  for (int dj = 0; dj < s; ++dj) {
    const std::size_t row = static_cast<std::size_t>((y0 + dj) & wrap) * n;
    for (int di = 0; di < s; ++di) dev += std::abs(f[row + ((x0 + di) & wrap)] - mean);
  }
  osc = dev / (static_cast<double>(s) * s);
  return true;
}

}  // namespace detail

/// Supremum of cube-averaged |f - f_Q| over the lattice; `mask` (optional, n*n)
/// restricts to cubes lying inside the marked cells.
inline MeanOscillation dyadic_mean_oscillation(std::span<const double> f, int n, const BmoLattice& lat,
                                               const std::vector<std::uint8_t>* mask = nullptr) {
  if (!is_power_of_two(n)) throw std::invalid_argument("bmo: raster size must be a power of two");
  if (f.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("bmo: size mismatch");
  const int depth = detail::resolve_depth(n, lat);
  const int shift = lat.shift_cells >= 0 ? lat.shift_cells : static_cast<int>(std::lround(n / 3.0));

  std::vector<std::pair<int, int>> offsets{{0, 0}};
  if (lat.shifted) offsets.insert(offsets.end(), {{shift, 0}, {0, shift}, {shift, shift}});

  MeanOscillation best;
  for (int j = 0; j <= depth; ++j) {
    const int s = n >> j;
    if (s < lat.min_side) break;
    for (auto [ox, oy] : offsets) {
      const int bx = ((ox % s) + s) % s, by = ((oy % s) + s) % s;
      for (int y0 = by; y0 < n; y0 += s)
        for (int x0 = bx; x0 < n; x0 += s) {
          double osc = 0.0;
          if (!detail::cube_oscillation(f, n, x0, y0, s, lat.periodic, mask, osc)) continue;
          ++best.cubes;
          if (best.side == 0 || osc > best.value) best = {osc, s, x0, y0, best.cubes};
        }
    }
  }
  return best;
}

}  // namespace asl
