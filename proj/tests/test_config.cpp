#include <gtest/gtest.h>

#include <filesystem>

#include "asl/experiments.hpp"

using namespace asl;

namespace {

std::string messages(const ConfigParseError& e) { return format_errors(e.errors); }

ConfigParseError parse_failure(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigParseError& e) {
    return e;
  }
  ADD_FAILURE() << "config parsed without error";
  return ConfigParseError({});
}

}  // namespace

TEST(Config, MinimalTwinRunTakesDefaults) {
  const auto c = parse_config("[experiment]\nkind = twin_run\nseed = 4\n");
  EXPECT_EQ(c.kind, "twin_run");
  EXPECT_EQ(*c.seed, 4u);
  EXPECT_EQ(c.n, 64);
  EXPECT_DOUBLE_EQ(c.length, two_pi);
  EXPECT_EQ(c.equation, "type2");
  EXPECT_DOUBLE_EQ(c.gamma, 1.0);
  EXPECT_DOUBLE_EQ(c.dt, 0.01);
  EXPECT_DOUBLE_EQ(c.t_end, 1.0);
  EXPECT_EQ(c.metric, "l2");
  EXPECT_EQ(c.p_list, std::vector<double>{16});
  EXPECT_EQ(c.output, "out/twin_run");
}

TEST(Config, CommentsListsAndWhitespace) {
  const auto c = parse_config(
      "# header\n[experiment]\n  kind=twin_run ; trailing\nseed = 1\n\n[twin]\np = 8, 16 ,32\n");
  EXPECT_EQ(c.p_list, (std::vector<double>{8, 16, 32}));
}

TEST(Config, GammaOutOfRangeNamesInterval) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\nseed = 1\n[model]\ngamma = 1.5\n");
  ASSERT_EQ(e.errors.size(), 1u);
  EXPECT_EQ(e.errors[0].line, 5);
  EXPECT_NE(e.errors[0].message.find("(0,1]"), std::string::npos) << messages(e);
}

TEST(Config, GammaZeroIsExcluded) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\nseed = 1\n[model]\ngamma = 0\n");
  EXPECT_NE(messages(e).find("(0,1]"), std::string::npos);
}

TEST(Config, DuplicateKeyReportsBothLines) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\nseed = 1\n[grid]\nn = 32\n\nn = 64\n");
  ASSERT_EQ(e.errors.size(), 1u);
  EXPECT_EQ(e.errors[0].line, 7);
  EXPECT_NE(e.errors[0].message.find("line 5"), std::string::npos);
  EXPECT_NE(e.errors[0].message.find("line 7"), std::string::npos);
}

TEST(Config, UnknownKeyHasLine) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\nseed = 1\n[grid]\nsize = 32\n");
  ASSERT_EQ(e.errors.size(), 1u);
  EXPECT_EQ(e.errors[0].line, 5);
  EXPECT_NE(e.errors[0].message.find("unknown key 'size'"), std::string::npos);
}

TEST(Config, MissingSeedForRandomData) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\n");
  EXPECT_NE(messages(e).find("missing experiment.seed"), std::string::npos);
  // Deterministic data needs no seed.
  EXPECT_NO_THROW(parse_config("[experiment]\nkind = norm_study\n[initial]\nprofile = log\n"));
}

TEST(Config, AllErrorsListedInLineOrder) {
  const auto e = parse_failure(
      "[experiment]\nkind = twin_run\n[grid]\nn = 48\n[model]\ngamma = 2\nnu = -1\nbogus = 3\n[time]\ndt = fast\n");
  // n not a power of two, gamma, nu, unknown key, dt type, missing seed.
  ASSERT_EQ(e.errors.size(), 6u) << messages(e);
  EXPECT_EQ(e.errors[0].line, 0);
  for (std::size_t k = 1; k < e.errors.size(); ++k) EXPECT_LT(e.errors[k - 1].line, e.errors[k].line);
  EXPECT_EQ(e.errors.back().line, 10);
}

TEST(Config, CrossFieldChecks) {
  const std::string head = "[experiment]\nkind = twin_run\nseed = 1\n";
  EXPECT_NE(messages(parse_failure(head + "[twin]\ncheck = dissipative\n")).find("twin.q"), std::string::npos);
  EXPECT_NE(messages(parse_failure(head + "[model]\nequation = type1\ngamma = 0.5\n")).find("type2 only"),
            std::string::npos);
  EXPECT_NE(messages(parse_failure(head + "[twin]\nmetric = hminus1\n")).find("use l2"), std::string::npos);
}

TEST(Config, UnknownLawRejected) {
  const auto e = parse_failure("[experiment]\nkind = twin_run\nseed = 1\n[model]\nlaw = euler\n");
  ASSERT_EQ(e.errors.size(), 1u);
  EXPECT_EQ(e.errors[0].line, 5);
  EXPECT_NO_THROW(parse_config("[experiment]\nkind = twin_run\nseed = 1\n[model]\nlaw = custom:table.txt\n"));
}

TEST(Config, CanonicalFormRoundTrips) {
  const auto a = parse_config(
      "[experiment]\nkind = twin_run\nseed = 9\n[model]\nequation = type1\nlaw = sqg\ndiffusion = porous\nm = 3\n"
      "nu = 0.25\n[twin]\nmetric = hminus1\np = 4, 8\n");
  const auto b = parse_config(canonical_config(a));
  EXPECT_EQ(canonical_config(a), canonical_config(b));
  EXPECT_DOUBLE_EQ(b.m, 3.0);
  EXPECT_EQ(b.p_list, (std::vector<double>{4, 8}));
}

TEST(Execute, RerunIsByteIdentical) {
  const auto root = std::filesystem::temp_directory_path() / "asl_exec_test";
  std::filesystem::remove_all(root);
  std::string text =
      "[experiment]\nkind = twin_run\nseed = 2\n[grid]\nn = 32\n[model]\nlaw = sqg\nnu = 0.05\ngamma = 0.5\n"
      "[time]\nt_end = 0.2\n[perturbation]\namplitude = 1e-3\n[twin]\np = 8\n";
  auto c = parse_config(text);
  c.output = (root / "run").string();
  EXPECT_TRUE(execute(c, text).pass);
  std::filesystem::copy(root / "run", root / "first", std::filesystem::copy_options::recursive);
  EXPECT_TRUE(execute(c, text).pass);
  const auto diff = compare_trees(root / "first", root / "run");
  EXPECT_FALSE(diff.has_value()) << *diff;
  EXPECT_TRUE(std::filesystem::exists(root / "run" / "manifest.json"));
  std::filesystem::remove_all(root);
}
