#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "asl/norms.hpp"
#include "asl/rng.hpp"

using namespace asl;

namespace {

ScalarField random_mean_zero(const TorusGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  ScalarField f(g);
  for (double& v : f.values()) v = rng.normal();
  return subtract_mean(f);
}

double periodic_dist(const TorusGrid& g, double x, double y, double x0, double y0) {
  const double L = g.length();
  auto w = [&](double d) { return d - L * std::round(d / L); };
  return std::hypot(w(x - x0), w(y - y0));
}

// Mean oscillation over every s x s window at every anchor (periodic), s a power of two >= 2.
double brute_all_windows(const ScalarField& f) {
  const int n = f.n();
  double best = 0.0;
  for (int s = 2; s <= n; s *= 2)
    for (int y0 = 0; y0 < n; ++y0)
      for (int x0 = 0; x0 < n; ++x0) {
        double m = 0.0;
        for (int j = 0; j < s; ++j)
          for (int i = 0; i < s; ++i) m += f((x0 + i) % n, (y0 + j) % n);
        m /= s * s;
        double o = 0.0;
        for (int j = 0; j < s; ++j)
          for (int i = 0; i < s; ++i) o += std::abs(f((x0 + i) % n, (y0 + j) % n) - m);
        best = std::max(best, o / (s * s));
      }
  return best;
}

}  // namespace

TEST(LpNorm, ConstantAndSine) {
  TorusGrid g(32);
  ScalarField c(g);
  c += 3.0;
  for (double p : {1.0, 2.0, 7.5}) EXPECT_NEAR(lp_norm(c, p), 3.0 * std::pow(g.length(), 2.0 / p), 1e-12);
  EXPECT_EQ(lp_norm(c, kInf), 3.0);
  auto s = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  EXPECT_NEAR(lp_norm(s, 2.0), M_PI * std::sqrt(2.0), 1e-12);
  EXPECT_THROW(lp_norm(s, 0.5), std::invalid_argument);
}

TEST(LpNorm, HolderAndHomogeneity) {
  TorusGrid g(32, 1.7);
  auto f = random_mean_zero(g, 1);
  for (double p : {1.0, 3.0, 64.0, 400.0}) {
    EXPECT_LE(lp_norm(f, p), lp_norm(f, kInf) * std::pow(g.length(), 2.0 / p) * (1 + 1e-14));
    EXPECT_NEAR(lp_norm(-2.5 * f, p), 2.5 * lp_norm(f, p), 1e-12 * lp_norm(f, p));
  }
}

TEST(LpNorm, NonDecreasingOnUnitMeasure) {
  TorusGrid g(32, 1.0);
  auto f = random_mean_zero(g, 2);
  double prev = 0.0;
  for (double p : {1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
    const double v = lp_norm(f, p);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(SobolevNorm, SingleModes) {
  TorusGrid g(32);
  auto s = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  auto grad = spectral_gradient(s);
  EXPECT_NEAR(sobolev_norm(s, 1.0), std::hypot(lp_norm(grad.x, 2), lp_norm(grad.y, 2)), 1e-12);
  auto s2 = ScalarField::sample(g, [](double x, double) { return std::sin(2 * x); });
  EXPECT_NEAR(sobolev_norm(s2, -1.0), 0.5 * lp_norm(s2, 2), 1e-12);
  s2 += 1.0;
  EXPECT_THROW(sobolev_norm(s2, -1.0), std::invalid_argument);
}

TEST(HMinus1, PotentialIdentity) {
  TorusGrid g(64);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto w = random_mean_zero(g, seed);
    const double a = sobolev_norm(w, -1.0);
    EXPECT_NEAR(hminus1_via_potential(w).norm / a, 1.0, 1e-12);
  }
  // Band-limited w: the returned norm equals the quadrature of the sampled gradient.
  auto b = ScalarField::sample(g, [](double x, double y) { return std::sin(3 * x - y) + 0.2 * std::cos(7 * y); });
  auto rb = hminus1_via_potential(b);
  EXPECT_NEAR(rb.norm, std::hypot(lp_norm(rb.grad_phi.x, 2), lp_norm(rb.grad_phi.y, 2)), 1e-12 * rb.norm);
  auto s = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
  auto r = hminus1_via_potential(s);
  EXPECT_NEAR(r.norm, lp_norm(ScalarField::sample(g, [](double x, double) { return std::cos(x); }), 2), 1e-12);
  auto z = hminus1_via_potential(ScalarField(g));
  EXPECT_EQ(z.norm, 0.0);
}

TEST(Bmo, ConstantsAndHalfStep) {
  TorusGrid g(32);
  ScalarField c(g);
  c += 4.0;
  EXPECT_EQ(bmo_norm(c, 4), 0.0);
  auto step = ScalarField::sample(g, [&](double x, double) { return x < g.length() / 2 ? 1.0 : 0.0; });
  const double brute = brute_all_windows(step);
  EXPECT_DOUBLE_EQ(brute, 0.5);
  BmoLattice anchored;
  anchored.shifted = false;
  const auto m = dyadic_mean_oscillation(step.values(), 32, anchored);
  EXPECT_DOUBLE_EQ(m.value, 0.5);
  EXPECT_EQ(m.side, 32);
  EXPECT_DOUBLE_EQ(bmo_norm(step, 4), 0.5);
}

TEST(Bmo, DepthValidation) {
  TorusGrid g(16);
  ScalarField f(g);
  EXPECT_THROW(bmo_norm(f, 0), std::invalid_argument);
  EXPECT_THROW(bmo_norm(f, 5), std::invalid_argument);
  EXPECT_NO_THROW(bmo_norm(f, 4));
}

TEST(Bmo, InvariancesAndSupBound) {
  TorusGrid g(64);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto f = random_mean_zero(g, seed + 20);
    const double b = bmo_norm(f);
    auto shifted = f;
    shifted += 0.375;  // exactly representable so f_Q shifts exactly
    EXPECT_EQ(bmo_norm(shifted), b);
    EXPECT_NEAR(bmo_norm(-3.0 * f), 3.0 * b, 1e-12 * b);
    EXPECT_LE(b, 2.0 * lp_norm(f, kInf));
    EXPECT_LE(b, brute_all_windows(f) + 1e-15);
  }
}

TEST(Bmo, DyadicZoomLeavesNormUnchanged) {
  TorusGrid g(32);
  auto f = random_mean_zero(g, 5);
  TorusGrid g2(64);
  ScalarField z(g2);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) z(i, j) = f(i / 2, j / 2);
  BmoLattice lat;
  lat.shift_cells = 11;
  BmoLattice lat2;
  lat2.shift_cells = 22;
  EXPECT_NEAR(bmo_norm(z, lat2), bmo_norm(f, lat), 1e-12);
}

TEST(Bmo, TruncatedLogStabilizes) {
  TorusGrid g(256, 1.0);
  auto trunc = [&](double delta) {
    return ScalarField::sample(g, [&](double x, double y) {
      return -std::log(std::max(periodic_dist(g, x, y, 0.5 + 0.5 * g.h(), 0.5 + 0.5 * g.h()), delta));
    });
  };
  auto a = trunc(8 * g.h()), b = trunc(2 * g.h());
  const double ba = bmo_norm(a), bb = bmo_norm(b);
  EXPECT_NEAR(bb / ba, 1.0, 0.1);
  EXPECT_NEAR(lp_norm(b, kInf) - lp_norm(a, kInf), std::log(4.0), 1e-12);
}

TEST(GrowthProfile, ConstantAndPreconditions) {
  TorusGrid g(32);
  ScalarField c(g);
  c += 2.0;
  EXPECT_THROW(lp_growth_profile(c, {4, 8}, 4), std::invalid_argument);
  auto prof = lp_growth_profile(c, {4, 8}, 2);
  ASSERT_EQ(prof.rows.size(), 2u);
  EXPECT_EQ(prof.bmo, 0.0);
}

TEST(GrowthProfile, MollifiedLogIsLinearAndDilationStable) {
  TorusGrid g(128, 1.0);
  auto f = ScalarField::sample(g, [&](double x, double y) {
    const double r = periodic_dist(g, x, y, 0.5, 0.5);
    return -0.5 * std::log(r * r + 1e-6);
  });
  const std::vector<double> ps{4, 8, 16, 32, 64};
  auto prof = lp_growth_profile(f, ps, 2.0);
  ASSERT_TRUE(std::isfinite(prof.sup_ratio));
  for (std::size_t i = 1; i < prof.rows.size(); ++i)
    EXPECT_LE(prof.rows[i].lp / prof.rows[i].p, prof.rows[i - 1].lp / prof.rows[i - 1].p * (1 + 1e-12));
  // f(2x) on the torus: the 2 x 2 tiling of the same samples on a doubled raster.
  TorusGrid g2(256, 1.0);
  ScalarField t(g2);
  for (int j = 0; j < 256; ++j)
    for (int i = 0; i < 256; ++i) t(i, j) = f(i % 128, j % 128);
  auto prof2 = lp_growth_profile(t, ps, 2.0);
  EXPECT_NEAR(prof2.sup_ratio / prof.sup_ratio, 1.0, 0.05);
}

TEST(Modulus, ConstantAndSmoothFields) {
  TorusGrid g(128, 1.0);
  VectorField c(g);
  c.x += 1.0;
  for (auto s : log_lipschitz_modulus(c, {0.02, 0.2}, 200, 1)) EXPECT_LT(s.ratio, 1e-13);
  VectorField v(ScalarField::sample(g, [](double, double y) { return std::sin(two_pi * y) / two_pi; }),
                ScalarField::sample(g, [](double x, double) { return std::sin(two_pi * x) / two_pi; }));
  auto samples = log_lipschitz_modulus(v, {0.2, 0.02}, 400, 2);
  EXPECT_LT(samples[1].ratio, samples[0].ratio);
  // Lipschitz field: ratio * |log r| is bounded by the Lipschitz constant 1.
  for (auto s : samples) EXPECT_LE(s.lipschitz_ratio, 1.0 + 1e-9);
  EXPECT_THROW(log_lipschitz_modulus(v, {0.5}, 200, 1), std::invalid_argument);
  EXPECT_THROW(log_lipschitz_modulus(v, {0.1}, 50, 1), std::invalid_argument);
  EXPECT_THROW(log_lipschitz_modulus(v, {g.h()}, 200, 1), std::invalid_argument);
}

TEST(FirstMoment, DiscAgainstPolarIntegral) {
  TorusGrid g(512, 4.0);
  const double R = 0.5;
  auto disc = ScalarField::sample(g, [&](double x, double y) {
    const double r = std::hypot(x - 2.0, y - 2.0);
    return 0.5 * (1.0 - std::tanh((r - R) / (0.5 * g.h())));
  });
  for (double& v : disc.values())
    if (v < 1e-12) v = 0.0;
  const double m = first_moment(disc, {2.0, 2.0});
  EXPECT_NEAR(m / (2.0 * M_PI * R * R * R / 3.0), 1.0, 5e-3);
  EXPECT_GT(first_moment(disc, {2.3, 2.0}), m);
  EXPECT_EQ(first_moment(ScalarField(g), {1.0, 1.0}), 0.0);
  EXPECT_THROW(first_moment(disc, {0.0, 0.0}), std::invalid_argument);
}

TEST(HardyPairing, DipoleAgainstLogKernels) {
  TorusGrid g(128, 4.0);
  auto bump = [&](double cx, double cy) {
    return ScalarField::sample(g, [&](double x, double y) {
      const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      return r2 < 0.04 ? std::exp(-1.0 / (1.0 - r2 / 0.04)) : 0.0;
    });
  };
  auto f = bump(1.6, 2.0) - bump(2.4, 2.0);
  std::vector<ScalarField> kernels;
  for (double cx : {1.6, 2.0, 2.4})
    kernels.push_back(normalize_bmo(ScalarField::sample(g, [&](double x, double y) {
      return 0.5 * std::log((x - cx) * (x - cx) + (y - 2.0) * (y - 2.0) + 1e-4);
    })));
  auto res = hardy_pairing_bound(f, kernels, 2.0, {2.0, 2.0});
  EXPECT_GT(res.pairing, 0.0);
  EXPECT_TRUE(std::isfinite(res.ratio));
  EXPECT_LT(res.ratio, 10.0);
  // Linearity in the kernel: half the kernel, half the pairing.
  std::vector<ScalarField> halves;
  for (const auto& k : kernels) halves.push_back(0.5 * k);
  EXPECT_NEAR(hardy_pairing_bound(f, halves, 2.0, {2.0, 2.0}).pairing, 0.5 * res.pairing, 1e-12 * res.pairing);
  EXPECT_EQ(hardy_pairing_bound(ScalarField(g), kernels, 2.0, {2.0, 2.0}).pairing, 0.0);
  std::vector<ScalarField> doubled{2.0 * kernels[0]};
  EXPECT_THROW(hardy_pairing_bound(f, doubled, 2.0, {2.0, 2.0}), std::invalid_argument);
  auto shifted = f;
  shifted += 0.1;
  EXPECT_THROW(hardy_pairing_bound(shifted, kernels, 2.0, {2.0, 2.0}), std::invalid_argument);
}

TEST(NormReport, CsvRows) {
  std::ostringstream os;
  write_norm_csv(os, {{"lp", 2.0, 0, 1.5}, {"bmo", 0.0, 6, 0.25}});
  EXPECT_EQ(os.str(), "name,p_or_s,depth,value\nlp,2,0,1.5\nbmo,0,6,0.25\n");
}
