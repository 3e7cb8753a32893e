#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "losstest/simulate.hpp"

namespace losstest {
namespace {

ScenarioSpec scenario(ScenarioFamily family, std::size_t d = 2) {
  ScenarioSpec s;
  s.family = family;
  s.d = d;
  return s;
}

TEST(Generate, ClassificationLabelsAndFairCoin) {
  auto spec = scenario(ScenarioFamily::cls_null_smooth);
  spec.beta = 0.0;
  const auto data = generate(spec, 40'000, {3, 0});
  double sum = 0.0;
  for (double y : data.labels()) {
    ASSERT_TRUE(y == 1.0 || y == -1.0);
    sum += y;
  }
  EXPECT_LT(std::abs(sum / 40'000), 4.0 / std::sqrt(40'000.0));
}

TEST(Generate, FeaturesUniformOnCube) {
  const auto data = generate(scenario(ScenarioFamily::reg_alt_linear, 5), 5000, {4, 0});
  double mean = 0.0;
  for (double v : data.features().values()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    mean += v;
  }
  EXPECT_NEAR(mean / 25'000, 0.5, 0.01);
}

TEST(Generate, RegressionNoiseIsTruncated) {
  auto spec = scenario(ScenarioFamily::reg_null_smooth);
  spec.tau = 1.0;
  const auto data = generate(spec, 20'000, {5, 0});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double resid = data.label(i) - spec.conditional_mean(data.row(i));
    ASSERT_LE(std::abs(resid), kNoiseTruncation + 1e-12);
  }
}

TEST(Generate, Deterministic) {
  const auto spec = scenario(ScenarioFamily::cls_null_smooth, 3);
  EXPECT_EQ(generate(spec, 100, {9, 1}), generate(spec, 100, {9, 1}));
  EXPECT_FALSE(generate(spec, 100, {9, 1}) == generate(spec, 100, {9, 2}));
}

TEST(Generate, SpecErrors) {
  auto bad = scenario(ScenarioFamily::cls_alt_deterministic);
  bad.subset = FeatureSubset({0, 1});
  EXPECT_THROW(generate(bad, 10, {}), Error);
  bad.subset = FeatureSubset({0});
  bad.alt_feature = 0;
  EXPECT_THROW(generate(bad, 10, {}), Error);
  auto beta = scenario(ScenarioFamily::cls_null_smooth);
  beta.beta = 1.0;
  EXPECT_THROW(generate(beta, 10, {}), Error);
  EXPECT_THROW(generate(scenario(ScenarioFamily::reg_null_smooth), 3, {}), Error);
}

TEST(Scenario, NullFamiliesHaveNoExcessRisk) {
  for (auto f : {ScenarioFamily::cls_null_smooth, ScenarioFamily::reg_null_smooth}) {
    auto spec = scenario(f, 4);
    spec.subset = FeatureSubset({1, 3});
    const auto data = generate(spec, 2000, {6, 0});
    double sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double diff = spec.conditional_mean(data.row(i)) -
                          spec.projected_conditional_mean(project(data.row(i), spec.subset));
      sq += diff * diff;
    }
    EXPECT_EQ(sq, 0.0);
    EXPECT_EQ(spec.analytic_limit(), 0.0);
  }
}

TEST(Scenario, AlternativeLimits) {
  EXPECT_EQ(scenario(ScenarioFamily::cls_alt_deterministic).analytic_limit(), 1.0);
  EXPECT_EQ(scenario(ScenarioFamily::reg_alt_linear).analytic_limit(), 0.75);

  // Monte Carlo check of E m^2 - E m^^2 for reg_alt_linear.
  const auto spec = scenario(ScenarioFamily::reg_alt_linear, 3);
  const auto data = generate(spec, 200'000, {7, 0});
  double gap = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double m = spec.conditional_mean(data.row(i));
    const double mh = spec.projected_conditional_mean(project(data.row(i), spec.subset));
    gap += m * m - mh * mh;
  }
  EXPECT_NEAR(gap / 200'000, 0.75, 0.02);
}

TEST(Wilson, ContainsEstimateAndHandlesExtremes) {
  const auto zero = wilson_interval(0, 100);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_NEAR(zero.hi, 0.03699, 1e-4);
  const auto all = wilson_interval(100, 100);
  EXPECT_EQ(all.hi, 1.0);
  EXPECT_NEAR(all.lo, 0.96301, 1e-4);
  for (std::size_t s = 0; s <= 40; ++s) {
    const auto ci = wilson_interval(s, 40);
    EXPECT_LE(ci.lo, s / 40.0);
    EXPECT_GE(ci.hi, s / 40.0);
  }
}

TEST(Experiment, SingleTrialIsBernoulli) {
  const auto rep = run_experiment(scenario(ScenarioFamily::cls_null_smooth), {50}, 1, {1, 0});
  ASSERT_EQ(rep.rows.size(), 1u);
  const double r = rep.rows[0].rejection_rate;
  EXPECT_TRUE(r == 0.0 || r == 1.0);
}

TEST(Experiment, ReportInvariantsAndDeterminism) {
  const auto spec = scenario(ScenarioFamily::reg_alt_linear);
  const std::vector<std::size_t> grid{50, 200};
  const auto a = run_experiment(spec, grid, 30, {11, 0});
  setenv("LOSSTEST_THREADS", "1", 1);
  const auto b = run_experiment(spec, grid, 30, {11, 0});
  unsetenv("LOSSTEST_THREADS");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& row = a.rows[i];
    EXPECT_EQ(row.rejection_rate * 30, static_cast<double>(row.rejections));
    EXPECT_LE(row.wilson.lo, row.rejection_rate);
    EXPECT_GE(row.wilson.hi, row.rejection_rate);
    EXPECT_EQ(row.statistics, b.rows[i].statistics);
    EXPECT_EQ(row.mean_statistic, b.rows[i].mean_statistic);
    EXPECT_EQ(row.k, k_regression(grid[i]));
  }
}

TEST(PowerCurve, AlternativeMeanApproachesLimit) {
  const auto spec = scenario(ScenarioFamily::reg_alt_linear);
  const auto table = power_curve(spec, {100, 400, 1600}, 40, {13, 0});
  ASSERT_EQ(table.size(), 3u);
  for (std::size_t i = 1; i < table.size(); ++i) {
    EXPECT_LT(std::abs(table[i].mean_statistic - 0.75), std::abs(table[i - 1].mean_statistic - 0.75));
  }
  EXPECT_EQ(table.back().analytic_limit, 0.75);
  EXPECT_EQ(table.back().threshold, threshold(1600));
}

TEST(PowerCurve, NullMeanBelowThreshold) {
  const auto table = power_curve(scenario(ScenarioFamily::cls_null_smooth), {250, 1000}, 40, {17, 0});
  EXPECT_LE(table.back().mean_statistic, table.back().threshold);
}

TEST(PowerCurve, RegressionAlternativeReachesPower) {
  // Smallest grid n with rejection rate >= 0.9; recorded by scan.
  const std::vector<std::size_t> grid{10, 20, 40, 80, 160, 320, 640, 1280};
  const auto table = power_curve(scenario(ScenarioFamily::reg_alt_linear), grid, 50, {19, 0});
  std::optional<std::size_t> first;
  for (const auto& p : table) {
    if (p.rejection_rate >= 0.9) {
      first = p.n;
      break;
    }
  }
  ASSERT_TRUE(first.has_value());
  EXPECT_EQ(*first, 640u);
  EXPECT_GE(table.back().rejection_rate, 0.9);
}

}  // namespace
}  // namespace losstest
