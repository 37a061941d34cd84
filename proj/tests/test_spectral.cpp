#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "asl/rng.hpp"
#include "asl/snapshot.hpp"
#include "asl/spectral.hpp"

using namespace asl;

namespace {

ScalarField random_field(const TorusGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  ScalarField f(g);
  for (double& v : f.values()) v = rng.normal();
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(TorusGrid, RejectsBadSizes) {
  EXPECT_THROW(TorusGrid(8), std::invalid_argument);
  EXPECT_THROW(TorusGrid(48), std::invalid_argument);
  EXPECT_NO_THROW(TorusGrid(16));
  TorusGrid g(16);
  EXPECT_EQ(g.kint(0), 0);
  EXPECT_EQ(g.kint(8), -8);
  EXPECT_EQ(g.kint(15), -1);
}

TEST(Transform, ZeroFieldHasZeroCoefficients) {
  TorusGrid g(16);
  auto F = forward_transform(ScalarField(g));
  EXPECT_EQ(F.max_abs(), 0.0);
}

TEST(Transform, CosineLivesOnUnitModes) {
  TorusGrid g(32);
  auto F = forward_transform(ScalarField::sample(g, [](double x, double) { return std::cos(x); }));
  for (int iy = 0; iy < 32; ++iy)
    for (int ix = 0; ix < 32; ++ix) {
      const bool unit = iy == 0 && (ix == 1 || ix == 31);
      if (unit)
        EXPECT_NEAR(std::abs(F(ix, iy)), g.length() / 2.0, 1e-12);
      else
        EXPECT_LT(std::abs(F(ix, iy)), 1e-12);
    }
}

TEST(Transform, ParsevalAgainstQuadrature) {
  TorusGrid g(64, 3.0);
  auto f = random_field(g, 7);
  auto F = forward_transform(f);
  double s = 0.0;
  for (auto c : F.coeffs()) s += std::norm(c);
  double q = 0.0;
  for (double v : f.values()) q += v * v;
  q *= g.cell_area();
  EXPECT_NEAR(s / q, 1.0, 1e-12);
}

TEST(Transform, RejectsNonFinite) {
  TorusGrid g(16);
  ScalarField f(g);
  f(3, 4) = std::nan("");
  EXPECT_THROW(forward_transform(f), std::invalid_argument);
}

TEST(Transform, InverseOfPairedDeltasIsCosine) {
  TorusGrid g(32);
  SpectralField F(g);
  F(1, 0) = 0.5;
  F(31, 0) = 0.5;
  auto f = inverse_transform(F);
  auto expect = ScalarField::sample(g, [&](double x, double) { return std::cos(x) / g.length(); });
  EXPECT_LT(max_diff(f, expect), 1e-15);
}

TEST(Transform, RoundTripOnRandomSymmetricCoefficients) {
  TorusGrid g(32);
  Rng rng(3);
  SpectralField F(g);
  for (int iy = 0; iy < 32; ++iy)
    for (int ix = 0; ix < 32; ++ix) {
      const int mx = g.mirror(ix), my = g.mirror(iy);
      if (std::make_pair(my, mx) < std::make_pair(iy, ix)) continue;
      cplx c(rng.normal(), rng.normal());
      if (mx == ix && my == iy) c = c.real();
      F(ix, iy) = c;
      F(mx, my) = std::conj(c);
    }
  auto G = forward_transform(inverse_transform(F));
  double worst = 0.0;
  for (std::size_t k = 0; k < F.coeffs().size(); ++k) worst = std::max(worst, std::abs(F.coeffs()[k] - G.coeffs()[k]));
  EXPECT_LT(worst / F.max_abs(), 1e-12);
}

TEST(Transform, RejectsAsymmetricCoefficients) {
  TorusGrid g(16);
  SpectralField F(g);
  F(1, 0) = 1.0;
  EXPECT_THROW(inverse_transform(F), std::invalid_argument);
}

TEST(Gradient, SineAndConstant) {
  TorusGrid g(32);
  auto v = spectral_gradient(ScalarField::sample(g, [](double x, double) { return std::sin(x); }));
  EXPECT_LT(max_diff(v.x, ScalarField::sample(g, [](double x, double) { return std::cos(x); })), 1e-13);
  EXPECT_LT(max_abs(v.y), 1e-13);
  ScalarField c(g);
  c += 3.5;
  auto z = spectral_gradient(c);
  EXPECT_LT(max_abs(z.x) + max_abs(z.y), 1e-14);
}

TEST(Gradient, FourthOrderFiniteDifferenceOracle) {
  // Smooth periodic field; the 4th-order stencil error must shrink ~16x per refinement.
  auto fn = [](double x, double y) { return std::exp(std::sin(x) + 0.5 * std::cos(2 * y)); };
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    TorusGrid g(n);
    auto f = ScalarField::sample(g, fn);
    auto v = spectral_gradient(f);
    const double h = g.h();
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        auto at = [&](int di) { return f((i + di + n) % n, j); };
        const double fd = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
        err = std::max(err, std::abs(fd - v.x(i, j)));
      }
    if (prev > 0.0) EXPECT_GT(prev / err, 12.0);
    prev = err;
  }
}

TEST(FractionalLaplacian, Eigenfunctions) {
  TorusGrid g(32);
  auto c2 = ScalarField::sample(g, [](double x, double y) { return std::cos(2 * x); });
  auto r = fractional_laplacian(c2, 0.5);
  EXPECT_LT(max_diff(r, 2.0 * c2), 1e-12);
  auto s = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  EXPECT_LT(max_diff(fractional_laplacian(s, 1.0), s), 1e-13);
  EXPECT_THROW(fractional_laplacian(s, 0.0), std::invalid_argument);
  EXPECT_THROW(fractional_laplacian(s, 1.5), std::invalid_argument);
}

TEST(FractionalLaplacian, DenseSpectralSumOracle) {
  // Evaluate sum_k |k|^{2 gamma} F(k) e^{ik.x} / L directly at a few points.
  TorusGrid g(16);
  auto f = random_field(g, 11);
  const double gamma = 0.7;
  auto r = fractional_laplacian(f, gamma);
  auto F = forward_transform(f);
  for (auto [i, j] : {std::pair{0, 0}, {3, 5}, {15, 9}}) {
    cplx s = 0.0;
    for (int iy = 0; iy < 16; ++iy)
      for (int ix = 0; ix < 16; ++ix) {
        const double kx = g.k(ix), ky = g.k(iy);
        const double k2 = kx * kx + ky * ky;
        if (k2 == 0.0) continue;
        s += std::pow(k2, gamma) * F(ix, iy) * std::exp(cplx(0, kx * g.x(i) + ky * g.x(j)));
      }
    EXPECT_NEAR(s.real() / g.length(), r(i, j), 1e-11);
  }
}

TEST(FractionalLaplacian, GammaOneMatchesMinusDivGrad) {
  TorusGrid g(64);
  auto f = ScalarField::sample(g, [](double x, double y) { return std::sin(x) * std::cos(3 * y) + std::cos(5 * x + y); });
  auto lap = spectral_divergence(spectral_gradient(f));
  auto r = fractional_laplacian(f, 1.0);
  EXPECT_LT(max_diff(r, -1.0 * lap) / max_abs(r), 1e-10);
}

TEST(Dealias, KeepsLowModesAndZeroesHigh) {
  TorusGrid g(32);
  SpectralField F(g);
  F(3, 2) = 1.0;
  F(g.mirror(3), g.mirror(2)) = 1.0;
  auto D = dealias(F);
  EXPECT_EQ(D(3, 2), cplx(1.0));
  SpectralField H(g);
  H(g.n() / 2 - 1, 0) = 1.0;
  EXPECT_EQ(dealias(H)(g.n() / 2 - 1, 0), cplx(0.0));
}

TEST(Dealias, ProductMatchesTruncatedConvolution) {
  // Two band-limited fields at n = 16; the dealiased spectrum of the grid product
  // must equal the exact convolution restricted to the retained modes.
  TorusGrid g(16);
  Rng rng(5);
  auto band = [&]() {
    SpectralField F(g);
    for (int ky = -2; ky <= 2; ++ky)
      for (int kx = -2; kx <= 2; ++kx) {
        const int ix = (kx + 16) % 16, iy = (ky + 16) % 16;
        const int mx = g.mirror(ix), my = g.mirror(iy);
        if (std::make_pair(my, mx) < std::make_pair(iy, ix)) continue;
        cplx c(rng.normal(), rng.normal());
        if (mx == ix && my == iy) c = c.real();
        F(ix, iy) = c;
        F(mx, my) = std::conj(c);
      }
    return F;
  };
  auto A = band(), B = band();
  auto a = inverse_transform(A), b = inverse_transform(B);
  ScalarField ab(g);
  for (std::size_t k = 0; k < ab.values().size(); ++k) ab.values()[k] = a.values()[k] * b.values()[k];
  auto P = dealias(forward_transform(ab));
  for (int iy = 0; iy < 16; ++iy)
    for (int ix = 0; ix < 16; ++ix) {
      cplx exact = 0.0;
      const int kx = g.kint(ix), ky = g.kint(iy);
      if (!outside_two_thirds(g, ix, iy))
        for (int qy = -2; qy <= 2; ++qy)
          for (int qx = -2; qx <= 2; ++qx) {
            const int rx = kx - qx, ry = ky - qy;
            if (std::abs(rx) > 2 || std::abs(ry) > 2) continue;
            exact += A((qx + 16) % 16, (qy + 16) % 16) * B((rx + 16) % 16, (ry + 16) % 16);
          }
      exact /= g.length();
      EXPECT_NEAR(std::abs(P(ix, iy) - exact), 0.0, 1e-12);
    }
}

TEST(Poisson, RejectsNonzeroMeanAndInvertsLaplacian) {
  TorusGrid g(32);
  auto w = ScalarField::sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  auto phi = solve_poisson(w);
  EXPECT_LT(max_diff(phi, 0.5 * w), 1e-14);
  w += 1.0;
  EXPECT_THROW(solve_poisson(w), std::invalid_argument);
}

TEST(Snapshot, BitExactRoundTrip) {
  TorusGrid g(16, 1.2345678901234567);
  auto f = random_field(g, 99);
  std::stringstream ss;
  write_snapshot(ss, f);
  auto h = read_snapshot(ss);
  EXPECT_TRUE(h.grid() == g);
  for (std::size_t k = 0; k < f.values().size(); ++k) EXPECT_EQ(f.values()[k], h.values()[k]);
  std::stringstream bad("ASFIELD v2 n=16 L=1\n");
  EXPECT_THROW(read_snapshot(bad), std::runtime_error);
}
