#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "losstest/core.hpp"
#include "losstest/parallel.hpp"
#include "losstest/rng.hpp"

namespace losstest {
namespace {

Dataset rows_dataset(std::size_t n, std::size_t d = 2) {
  Matrix x(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(10 * i + j);
    y[i] = static_cast<double>(i);
  }
  return Dataset(std::move(x), std::move(y), LabelKind::regression);
}

TEST(Project, PicksComponentsInOrder) {
  EXPECT_EQ(project(std::vector{1.0, 2.0, 3.0}, FeatureSubset({0, 2})), (std::vector{1.0, 3.0}));
  EXPECT_EQ(project(std::vector{5.5}, FeatureSubset({0})), (std::vector{5.5}));
  EXPECT_EQ(project(std::vector{-1.0, 4.0}, FeatureSubset({1})), (std::vector{4.0}));
}

TEST(Project, OutOfRangeIndexIsInvalidSubset) {
  try {
    project(std::vector{1.0, 2.0}, FeatureSubset({2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_subset);
  }
}

TEST(Project, FullSetIsIdentityAndCompositionHolds) {
  Rng rng({11, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform() * 10 - 5;
    EXPECT_EQ(project(x, FeatureSubset::full(d)), x);

    // S: random nonempty subset; T: random positions within S.
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < d; ++j) {
      if (rng.uniform() < 0.6) s.push_back(j);
    }
    if (s.empty()) s.push_back(rng.below(d));
    std::vector<std::size_t> t;
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (rng.uniform() < 0.6) t.push_back(p);
    }
    if (t.empty()) t.push_back(0);
    std::vector<std::size_t> composed;
    for (std::size_t p : t) composed.push_back(s[p]);
    EXPECT_EQ(project(project(x, FeatureSubset(s)), FeatureSubset(t)), project(x, FeatureSubset(composed)));
  }
}

TEST(FeatureSubset, RejectsEmptyAndDuplicates) {
  EXPECT_THROW(FeatureSubset({}), Error);
  EXPECT_THROW(FeatureSubset({0, 0}), Error);
  EXPECT_EQ(FeatureSubset({2, 0}).to_string(), "0,2");
  EXPECT_EQ(FeatureSubset::all_but(3, 1), FeatureSubset({0, 2}));
}

TEST(Dataset, ValidatesOnConstruction) {
  EXPECT_THROW(Dataset(Matrix(1, 1, {NAN}), {1.0}, LabelKind::regression), Error);
  EXPECT_THROW(Dataset(Matrix(1, 1, {0.0}), {INFINITY}, LabelKind::regression), Error);
  EXPECT_THROW(Dataset(Matrix(1, 1, {0.0}), {0.0}, LabelKind::classification), Error);
  EXPECT_THROW(Dataset(Matrix(2, 1, {0.0, 1.0}), {1.0}, LabelKind::regression), Error);
  EXPECT_THROW(Dataset(Matrix(0, 1), {}, LabelKind::regression), Error);
  EXPECT_NO_THROW(Dataset(Matrix(1, 1, {0.0}), {-1.0}, LabelKind::classification));
}

TEST(Split, EvenCountHalves) {
  const auto s = split(rows_dataset(6));
  EXPECT_EQ(s.train.labels()[0], 0.0);
  EXPECT_EQ(s.train.labels()[2], 2.0);
  EXPECT_EQ(s.eval.labels()[0], 3.0);
  EXPECT_EQ(s.eval.labels()[2], 5.0);
  EXPECT_FALSE(s.dropped_last_row);
}

TEST(Split, OddCountDropsLastRow) {
  const auto s = split(rows_dataset(7));
  EXPECT_EQ(s.train.size(), 3u);
  EXPECT_EQ(s.eval.size(), 3u);
  EXPECT_EQ(s.eval.labels()[2], 5.0);
  EXPECT_TRUE(s.dropped_last_row);
}

TEST(Split, TooFewSamples) {
  try {
    split(rows_dataset(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_few_samples);
  }
}

TEST(Split, SeededShuffleIsReproducible) {
  const SplitOptions opt{true, {42, 0}};
  const auto a = split(rows_dataset(4), opt);
  const auto b = split(rows_dataset(4), opt);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.eval, b.eval);
  EXPECT_EQ(a.train.size(), 2u);
}

TEST(Split, IsAPartition) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 4 + seed % 9;
    const auto s = split(rows_dataset(n), {seed % 2 == 0, {seed, 3}});
    std::multiset<double> seen;
    for (double y : s.train.labels()) seen.insert(y);
    for (double y : s.eval.labels()) seen.insert(y);
    EXPECT_EQ(seen.size(), n - n % 2);
    EXPECT_EQ(std::set<double>(seen.begin(), seen.end()).size(), seen.size());
  }
}

TEST(Sgn, ZeroIsPositive) {
  EXPECT_EQ(sgn(0.0), 1.0);
  EXPECT_EQ(sgn(-0.3), -1.0);
  EXPECT_EQ(sgn(1e-300), 1.0);
}

TEST(Sgn, NeverZeroAndRecoversValue) {
  Rng rng({5, 5});
  for (int i = 0; i < 1000; ++i) {
    const double z = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10);
    EXPECT_NE(sgn(z), 0.0);
    if (z != 0.0) {
      EXPECT_EQ(sgn(z) * std::abs(z), z);
    }
  }
}

TEST(Rng, SameSpecSameStream) {
  Rng a({7, 3});
  Rng b({7, 3});
  Rng c({7, 4});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, TruncatedNormalStaysInBounds) {
  Rng rng({1, 1});
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double z = rng.truncated_normal(1.0);
    ASSERT_LE(std::abs(z), 1.0);
    sum += z;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.02);
}

TEST(Parallel, MatchesSerialAndPropagatesErrors) {
  std::vector<std::size_t> out(1000);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = i * i; }, 4);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw Error(ErrorKind::domain, "boom");
  }, 3), Error);
}

}  // namespace
}  // namespace losstest
