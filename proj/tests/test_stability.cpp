#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "asl/stability.hpp"

using namespace asl;

namespace {

TwinRun euler_twin(int n, double eps, double t_end = 0.5, double amp = 1.0) {
  TorusGrid g(n);
  Type1Problem p{.law = VelocityLaw::biot_savart(), .grid = g, .dt = 0.02, .t_end = t_end,
                 .initial = smooth_random_field(g, 2.0, 5, 7, amp)};
  return {.problem = p, .perturbation = {eps, 2.0, 4, 3}, .metric = Metric::HMinus1};
}

}  // namespace

TEST(Twin, IdenticalInitialsStayIdentical) {
  auto rep = run_twin(euler_twin(32, 0.0));
  ASSERT_FALSE(rep.aborted);
  for (const auto& s : rep.samples) EXPECT_LE(s.distance, 1e-10);
  auto env = envelope_type1(rep, 16);
  EXPECT_TRUE(env.integrated_ok);
}

TEST(Twin, PerturbationHasRequestedDistance) {
  auto rep = run_twin(euler_twin(32, 1e-3));
  EXPECT_NEAR(rep.samples.front().distance, 1e-3, 1e-15);
}

TEST(Twin, HeatDecayOfSingleModeDifference) {
  TorusGrid g(32);
  const double nu = 0.2, eps = 1e-3;
  auto base = smooth_random_field(g, 2.0, 4, 1);
  auto mode = ScalarField::sample(g, [](double x, double y) { return std::cos(2 * x + y); });
  mode *= eps / lp_norm(mode, 2.0);
  ScalarField r2 = base;
  r2 += mode;
  Type1Problem p{.law = VelocityLaw::none(), .diffusion = DiffusionSpec::linear(nu), .grid = g, .dt = 0.05, .t_end = 1.0,
                 .initial = base};
  auto rep = run_twin({.problem = p, .metric = Metric::L2, .rho2_initial = r2});
  for (const auto& s : rep.samples) EXPECT_NEAR(s.distance, eps * std::exp(-nu * 5 * s.t), 1e-15);
}

TEST(Twin, HMinus1DistanceMatchesSobolevNorm) {
  auto rep = run_twin(euler_twin(32, 1e-2));
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    ScalarField w = rep.rho1[i];
    w -= rep.rho2[i];
    EXPECT_NEAR(rep.samples[i].distance, sobolev_norm(subtract_mean(w), -1.0), 1e-12 * rep.samples[i].distance);
  }
}

TEST(Twin, RejectsNonMeanZeroDifferenceForHMinus1) {
  TorusGrid g(16);
  Type1Problem p{.grid = g, .dt = 0.1, .t_end = 0.1, .initial = ScalarField(g)};
  ScalarField r2(g);
  r2 += 1.0;
  EXPECT_THROW(run_twin({.problem = p, .metric = Metric::HMinus1, .rho2_initial = r2}), std::invalid_argument);
  EXPECT_THROW(run_twin({.problem = p, .metric = Metric::L2, .diag_every = 11}), std::invalid_argument);
}

TEST(Twin, MonotoneDiffusionPairingIsSignDefinite) {
  TorusGrid g(32);
  auto r0 = smooth_random_field(g, 2.0, 5, 4);
  r0 += 1.5;
  for (double m : {2.0, 3.0}) {
    Type1Problem p{.law = VelocityLaw::newtonian(), .diffusion = DiffusionSpec::porous(m, 0.05), .grid = g, .dt = 0.01,
                   .t_end = 0.2, .initial = r0};
    auto rep = run_twin({.problem = p, .perturbation = {1e-2, 2.0, 4, 9}, .metric = Metric::HMinus1});
    ASSERT_FALSE(rep.aborted) << rep.error;
    for (const auto& s : rep.samples) EXPECT_LE(s.t1, 1e-12);
  }
}

TEST(Envelope, ZeroVelocityGivesZeroForcingAndDecay) {
  TorusGrid g(32);
  Type1Problem p{.law = VelocityLaw::none(), .diffusion = DiffusionSpec::linear(0.1), .grid = g, .dt = 0.02, .t_end = 0.5,
                 .initial = smooth_random_field(g, 2.0, 4, 2)};
  auto rep = run_twin({.problem = p, .perturbation = {1e-3, 2.0, 4, 5}, .metric = Metric::HMinus1});
  auto env = envelope_type1(rep, 16);
  for (const auto& r : env.rows) EXPECT_EQ(r.f, 0.0);
  for (std::size_t i = 1; i < rep.samples.size(); ++i) EXPECT_LE(rep.samples[i].distance, rep.samples[i - 1].distance);
  EXPECT_TRUE(env.ok());
}

TEST(Envelope, EulerTwinSatisfiesFittedInequality) {
  auto rep = run_twin(euler_twin(32, 1e-6, 1.0, 5.0));
  for (int p : {8, 16, 32}) {
    auto env = envelope_type1(rep, p);
    EXPECT_FALSE(env.inconclusive);
    EXPECT_GT(env.fitted_C, 0.0);
    EXPECT_GE(env.fraction_ok, 0.99) << p;
    EXPECT_TRUE(env.integrated_ok) << p;
    // Passing with slack s implies passing with any larger slack.
    auto wide = envelope_type1(rep, p, 6.0);
    EXPECT_GE(wide.fraction_ok, env.fraction_ok);
  }
  EXPECT_THROW(envelope_type1(rep, 2), std::invalid_argument);
}

TEST(Envelope, InconclusiveOnCoarseDiagnostics) {
  TorusGrid g(16);
  Type1Problem p{.law = VelocityLaw::biot_savart(), .grid = g, .dt = 0.1, .t_end = 0.3,
                 .initial = smooth_random_field(g, 2.0, 3, 1)};
  auto rep = run_twin({.problem = p, .perturbation = {1e-3, 2.0, 3, 5}, .metric = Metric::HMinus1});
  EXPECT_TRUE(envelope_type1(rep).inconclusive);
}

TEST(Envelope, SqgTwinTypeTwo) {
  TorusGrid g(32);
  Type2Problem p{.law = VelocityLaw::sqg(), .grid = g, .dt = 0.02, .t_end = 1.0,
                 .initial = smooth_random_field(g, 2.0, 5, 3, 5.0)};
  auto rep = run_twin({.problem = p, .perturbation = {1e-5, 2.0, 4, 1}, .metric = Metric::L2});
  auto env = envelope_type2(rep, 16);
  EXPECT_GE(env.fraction_ok, 0.99);
  EXPECT_TRUE(env.integrated_ok);
  std::ostringstream os;
  write_rows_csv(os, env.rows);
  EXPECT_EQ(os.str().substr(0, 22), "t,distance,f,lhs,rhs,o");
}

TEST(Exponents, ValuesAndCriticalRejection) {
  EXPECT_EQ(exponent_l2(2, 0.5, 4.0), 2.0);
  EXPECT_EQ(exponent_l2(2, 1.0, 2.0), 2.0);
  EXPECT_EQ(exponent_hminus1(2, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(exponent_l2(2, 0.5, 3.0), 3.0);
  try {
    exponent_l2(2, 0.5, 2.0);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("d/(2 gamma) = 2"), std::string::npos);
  }
  EXPECT_THROW(exponent_hminus1(2, 1.0), std::invalid_argument);
}

TEST(Dissipative, L2BoundOnSqgTwin) {
  TorusGrid g(32);
  Type2Problem p{.law = VelocityLaw::sqg(), .nu = 0.1, .gamma = 0.5, .grid = g, .dt = 0.01, .t_end = 0.5,
                 .initial = smooth_random_field(g, 2.0, 5, 7, 30.0)};
  TwinRun tw{.problem = p, .perturbation = {1e-4, 2.0, 4, 3}, .metric = Metric::L2};
  auto rep = run_twin(tw);
  auto v = dissipative_bound_l2(tw, rep, 4.0);
  EXPECT_EQ(v.r, 2.0);
  EXPECT_TRUE(v.ok());
  EXPECT_GT(v.gn_constant, 0.0);
  EXPECT_THROW(dissipative_bound_l2(tw, rep, 2.0), std::invalid_argument);
}

TEST(Dissipative, HMinus1RejectsNonlinearDiffusion) {
  TorusGrid g(16);
  auto r0 = smooth_random_field(g, 2.0, 3, 1);
  r0 += 1.0;
  Type1Problem p{.law = VelocityLaw::newtonian(), .diffusion = DiffusionSpec::porous(2.0, 0.1), .grid = g, .dt = 0.05,
                 .t_end = 0.1, .initial = r0};
  TwinRun tw{.problem = p, .perturbation = {1e-3, 2.0, 3, 1}, .metric = Metric::HMinus1};
  auto rep = run_twin(tw);
  try {
    dissipative_bound_hminus1(tw, rep, 2.0);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("linear diffusion"), std::string::npos);
  }
}

TEST(Dissipative, HMinus1BoundOnAttractiveTwin) {
  TorusGrid g(32);
  auto r0 = smooth_random_field(g, 2.0, 5, 8);
  r0 += 1.0;
  Type1Problem p{.law = VelocityLaw::newtonian(), .diffusion = DiffusionSpec::linear(0.5), .grid = g, .dt = 0.01,
                 .t_end = 0.5, .initial = r0};
  TwinRun tw{.problem = p, .perturbation = {1e-4, 2.0, 4, 3}, .metric = Metric::HMinus1};
  auto v = dissipative_bound_hminus1(tw, run_twin(tw), 2.0);
  EXPECT_EQ(v.r, 2.0);
  EXPECT_TRUE(v.ok());
}

TEST(Contraction, PureDissipationContractsAtEveryLevel) {
  TorusGrid g(16);
  Type2Problem p{.law = VelocityLaw::none(), .nu = 0.1, .gamma = 0.4, .grid = g, .dt = 0.05, .t_end = 0.5,
                 .initial = smooth_random_field(g, 2.0, 3, 2)};
  auto pr = contraction_probe({.problem = p, .perturbation = {1e-3, 2.0, 3, 1}, .metric = Metric::L2}, {0.0, 1.0, 10.0});
  for (bool c : pr.contracting) EXPECT_TRUE(c);
  ASSERT_TRUE(pr.eps0.has_value());
  EXPECT_EQ(*pr.eps0, 10.0);
  EXPECT_TRUE(refinement_stable(1.0, 1.4, 0.5));
  EXPECT_FALSE(refinement_stable(1.0, 2.1, 0.5));
}
