#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "asl/rng.hpp"
#include "asl/velocity.hpp"

using namespace asl;

namespace {

ScalarField smooth_random(const TorusGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  ScalarField f(g);
  for (int a = 1; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b) {
      const double amp = rng.normal() / (a * a + b * b), ph = two_pi * rng.uniform();
      f += ScalarField::sample(g, [&](double x, double y) { return amp * std::cos(a * x + b * y + ph); });
    }
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

TEST(Velocity, BiotSavartAnalyticOracle) {
  TorusGrid g(32);
  auto w = ScalarField::sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  auto v = apply_velocity(VelocityLaw::biot_savart(), w);
  EXPECT_LT(max_diff(v.x, ScalarField::sample(g, [](double x, double y) { return -0.5 * std::sin(x) * std::cos(y); })), 1e-14);
  EXPECT_LT(max_diff(v.y, ScalarField::sample(g, [](double x, double y) { return 0.5 * std::cos(x) * std::sin(y); })), 1e-14);
}

TEST(Velocity, SqgSingleMode) {
  TorusGrid g(32);
  auto v = apply_velocity(VelocityLaw::sqg(), ScalarField::sample(g, [](double x, double) { return std::cos(x); }));
  EXPECT_LT(max_abs(v.x), 1e-14);
  EXPECT_LT(max_diff(v.y, ScalarField::sample(g, [](double x, double) { return -std::sin(x); })), 1e-14);
}

TEST(Velocity, ZeroDensityGivesZeroVelocity) {
  TorusGrid g(16);
  for (auto law : {VelocityLaw::biot_savart(), VelocityLaw::sqg(), VelocityLaw::newtonian(), VelocityLaw::none()}) {
    auto v = apply_velocity(law, ScalarField(g));
    EXPECT_EQ(max_abs(v.x) + max_abs(v.y), 0.0);
  }
}

TEST(Velocity, NewtonianPointsUpTheGradientOfThePotential) {
  TorusGrid g(32);
  auto rho = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
  auto v = apply_velocity(VelocityLaw::newtonian(), rho);
  // -Delta phi = cos x gives phi = cos x and v = grad phi = (-sin x, 0).
  EXPECT_LT(max_diff(v.x, ScalarField::sample(g, [](double x, double) { return -std::sin(x); })), 1e-14);
  auto vr = apply_velocity(VelocityLaw::newtonian(-1.0), rho);
  EXPECT_LT(max_diff(vr.x, -1.0 * v.x), 1e-15);
}

TEST(VelocityGradient, TraceAndScaling) {
  TorusGrid g(32);
  auto mode = ScalarField::sample(g, [](double x, double y) { return std::cos(2 * x + y); });
  EXPECT_LT(max_abs(velocity_gradient(VelocityLaw::biot_savart(), mode).trace()), 1e-14);
  auto c2 = ScalarField::sample(g, [](double x, double) { return std::cos(2 * x); });
  auto v = apply_velocity(VelocityLaw::sqg(), c2);
  auto dv = velocity_gradient(VelocityLaw::sqg(), c2);
  const double vn = std::hypot(lp_norm(v.x, 2), lp_norm(v.y, 2));
  EXPECT_NEAR(lp_norm(dv.frobenius(), 2), 2.0 * vn, 1e-12);
}

TEST(VelocityGradient, MatchesGradientOfVelocity) {
  TorusGrid g(64);
  auto rho = smooth_random(g, 3);
  for (auto law : {VelocityLaw::biot_savart(), VelocityLaw::sqg(), VelocityLaw::newtonian()}) {
    auto v = apply_velocity(law, rho);
    auto dv = velocity_gradient(law, rho);
    auto gx = spectral_gradient(v.x), gy = spectral_gradient(v.y);
    const double scale = max_abs(dv.frobenius());
    EXPECT_LT(max_diff(dv.dx_vx, gx.x) / scale, 1e-12);
    EXPECT_LT(max_diff(dv.dy_vx, gx.y) / scale, 1e-12);
    EXPECT_LT(max_diff(dv.dx_vy, gy.x) / scale, 1e-12);
    EXPECT_LT(max_diff(dv.dy_vy, gy.y) / scale, 1e-12);
  }
}

TEST(Velocity, DivergenceFreeAndLinear) {
  TorusGrid g(64);
  auto f = smooth_random(g, 4), h = smooth_random(g, 5);
  for (auto law : {VelocityLaw::biot_savart(), VelocityLaw::sqg()}) {
    auto v = apply_velocity(law, f);
    EXPECT_LT(lp_norm(spectral_divergence(v), 2) / lp_norm(f, 2), 1e-12);
    auto lhs = apply_velocity(law, 2.0 * f + (-3.0) * h);
    auto a = apply_velocity(law, f), b = apply_velocity(law, h);
    EXPECT_LT(max_diff(lhs.x, 2.0 * a.x + (-3.0) * b.x), 1e-12 * max_abs(lhs.x));
  }
  EXPECT_TRUE(VelocityLaw::sqg().divergence_free());
  EXPECT_FALSE(VelocityLaw::newtonian().divergence_free());
}

TEST(Conditions, BiotSavartAndSqgMultiplierChecks) {
  TorusGrid g(64);
  std::vector<ScalarField> corpus{subtract_mean(smooth_random(g, 1)), subtract_mean(smooth_random(g, 2))};
  auto bs = check_conditions(VelocityLaw::biot_savart(), corpus, {4, 8});
  EXPECT_TRUE(bs.c3_analytic_ok);
  EXPECT_NEAR(bs.c3_multiplier_sup, 1.0, 1e-14);
  EXPECT_LE(bs.c3_ratio, 1.0 + 1e-10);
  EXPECT_LT(bs.divfree_residual, 1e-12);
  auto q = check_conditions(VelocityLaw::sqg(), corpus, {4, 8});
  EXPECT_FALSE(q.c3_analytic_ok);
  EXPECT_TRUE(q.l2_analytic_ok);
  EXPECT_NEAR(q.l2_multiplier_sup, 1.0, 1e-14);
  EXPECT_LE(q.l2_ratio, 1.0 + 1e-12);
  auto nw = check_conditions(VelocityLaw::newtonian(), corpus, {4});
  EXPECT_LE(nw.c3_ratio, 1.0 + 1e-10);
  EXPECT_THROW(check_conditions(VelocityLaw::sqg(), {}, {4}), std::invalid_argument);
}

TEST(CustomLaw, TableParsingAndApplication) {
  std::istringstream is(
      "kx,ky,re_m1,im_m1,re_m2,im_m2\n"
      "1,0,0,0,0,1\n"
      "-1,0,0,0,0,-1\n");
  auto law = VelocityLaw::custom(read_multiplier_table(is, "t.csv"), "t.csv");
  TorusGrid g(32);
  auto v = apply_velocity(law, ScalarField::sample(g, [](double x, double) { return std::cos(x); }));
  EXPECT_LT(max_diff(v.y, ScalarField::sample(g, [](double x, double) { return -std::sin(x); })), 1e-14);
  EXPECT_TRUE(law.divergence_free());
  std::istringstream bad("kx,ky,re_m1,im_m1,re_m2,im_m2\n1,0,0,0,0\n");
  EXPECT_THROW(read_multiplier_table(bad, "b.csv"), std::runtime_error);
  std::istringstream half("kx,ky,re_m1,im_m1,re_m2,im_m2\n1,0,0,0,0,1\n");
  EXPECT_THROW(VelocityLaw::custom(read_multiplier_table(half, "h.csv")), std::invalid_argument);
  EXPECT_THROW(parse_law("euler"), std::invalid_argument);
  EXPECT_EQ(parse_law("sqg").name(), "sqg");
}
