#include <random>

#include <gtest/gtest.h>

#include "dralloc/error.hpp"
#include "dralloc/rank.hpp"
#include "oracles.hpp"

using namespace dralloc;
using Vec = std::vector<double>;

namespace {

const RankOracle kCap1 = RankOracle::cardinality_cap(1.0);
const RankOracle kUnitBox = RankOracle::partition({{0}, {1}}, {1, 1});

}  // namespace

TEST(Rank, Evaluation) {
  EXPECT_DOUBLE_EQ(kCap1(0b11), 1.0);
  EXPECT_DOUBLE_EQ(kCap1(0), 0.0);
  const RankOracle t = RankOracle::explicit_table(3, {0, 1, 1, 2, 1, 2, 1.5, 2});
  EXPECT_DOUBLE_EQ(rank(t, 0b101), 2.0);
  EXPECT_THROW(rank(t, 0b1000), Error);
  EXPECT_FALSE(find_rank_violation(t, 3).has_value());
  EXPECT_TRUE(find_rank_violation(RankOracle::explicit_table(2, {0, 1, 1, 3}), 2).has_value());
  EXPECT_TRUE(find_rank_violation(RankOracle::explicit_table(2, {0, 1, 0.5, 0.8}), 2).has_value());
}

TEST(Rank, ValueExamples) {
  EXPECT_NEAR(pm_value(kCap1, Vec{0.3, 0.4}), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(pm_value(kCap1, Vec{0.6, 0.7}), 1.0);
  EXPECT_DOUBLE_EQ(pm_value(kCap1, Vec{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(pm_value(kUnitBox, Vec{0, 0}), 0.0);
}

TEST(Rank, TightSetIsMaximalMinimizer) {
  EXPECT_EQ(tight_set(kCap1, Vec{0.3, 0.4}), Subset{0});
  EXPECT_EQ(tight_set(kCap1, Vec{0.6, 0.7}), Subset{0b11});
  // Every subset is a minimizer; the union is the full set.
  EXPECT_EQ(tight_set(kCap1, Vec{1.0, 0.0}), Subset{0b11});
}

TEST(Rank, GradientExamples) {
  EXPECT_EQ(pm_grad(kCap1, Vec{0.3, 0.4}), (Vec{1, 1}));
  EXPECT_EQ(pm_grad(kCap1, Vec{0.6, 0.7}), (Vec{0, 0}));
  EXPECT_EQ(pm_grad(kUnitBox, Vec{0.5, 1.2}), (Vec{1, 0}));
}

TEST(Rank, LovaszExamples) {
  EXPECT_DOUBLE_EQ(lovasz(kCap1, Vec{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(lovasz(kCap1, Vec{0, 0}), 0.0);
  EXPECT_NEAR(lovasz(kUnitBox, Vec{0.5, 0.2}), 0.7, 1e-15);
}

TEST(Rank, MinFormMatchesGreedyOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int fixture = 0; fixture < 60; ++fixture) {
    const std::size_t m = 1 + rng() % 6;
    const RankOracle r = dralloc::testing::random_rank(m, rng);
    ASSERT_FALSE(find_rank_violation(r, m).has_value());
    for (int p = 0; p < 20; ++p) {
      Vec x(m);
      for (double& v : x) v = (rng() % 5 == 0) ? 0.0 : u(rng);
      EXPECT_NEAR(pm_value(r, x), dralloc::testing::pm_greedy_value(r, x), 1e-9);
      Vec w(m);
      for (double& v : w) v = u(rng);
      EXPECT_NEAR(lovasz(r, w), dralloc::testing::support_by_vertices(r, w), 1e-9);
    }
  }
}

TEST(Rank, GradientMatchesForwardDifference) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  const double h = 1e-7;
  for (int fixture = 0; fixture < 30; ++fixture) {
    const std::size_t m = 1 + rng() % 6;
    const RankOracle r = dralloc::testing::random_rank(m, rng);
    for (int p = 0; p < 50; ++p) {
      Vec x(m);
      for (double& v : x) v = u(rng);
      const Vec g = pm_grad(r, x);
      const double f0 = pm_value(r, x);
      for (std::size_t i = 0; i < m; ++i) {
        Vec y = x;
        y[i] += h;
        EXPECT_NEAR(g[i], (pm_value(r, y) - f0) / h, 1e-6);
      }
    }
  }
}

TEST(Rank, RayEnvelopeMatchesPointwise) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int fixture = 0; fixture < 20; ++fixture) {
    const std::size_t m = 1 + rng() % 6;
    const RankOracle r = dralloc::testing::random_rank(m, rng);
    const RankTable table(r, m);
    Vec z(m);
    for (double& v : z) v = u(rng);
    const RayEnvelope env(table, z, 50.0);
    for (double tau : {0.0, 0.3, 1.0, 2.7, 9.0, 49.0}) {
      Vec p(m);
      for (std::size_t i = 0; i < m; ++i) p[i] = tau * z[i];
      EXPECT_NEAR(env.value(tau), pm_value(r, p), 1e-12);
    }
    for (double b : env.breakpoints()) {
      EXPECT_GT(b, 0.0);
      EXPECT_LT(b, 50.0);
    }
  }
}

TEST(Rank, Limits) {
  EXPECT_THROW(RankTable(kCap1, 21), Error);
  EXPECT_THROW(RankOracle::explicit_table(2, {1, 1, 1, 1}), Error);
  EXPECT_THROW(RankOracle::partition({{0, 1}, {1}}, {1, 1}), Error);
}

TEST(Rank, BlockSplitMatchesSingleTable) {
  // The same rank as a partition (split into blocks) and as an explicit table (one block).
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  const RankOracle part = RankOracle::partition({{0, 3}, {1}, {2, 4, 5}}, {1.0, 0.5, 2.0});
  const RankOracle cov = RankOracle::coverage({1.0, 0.4, 0.7}, {{0}, {1}, {0}, {}, {2}, {1}});
  for (const RankOracle* r : {&part, &cov}) {
    Vec values(64);
    for (Subset s = 0; s < 64; ++s) values[s] = (*r)(s);
    const RankOracle flat = RankOracle::explicit_table(6, values);
    const RankTable split(*r, 6);
    EXPECT_GT(split.blocks().size(), 1u);
    EXPECT_EQ(RankTable(flat, 6).blocks().size(), 1u);
    for (Subset s = 0; s < 64; ++s) EXPECT_DOUBLE_EQ(split[s], values[s]);
    for (int p = 0; p < 100; ++p) {
      Vec x(6);
      for (double& v : x) v = u(rng);
      EXPECT_NEAR(pm_value(*r, x), pm_value(flat, x), 1e-12);
      EXPECT_EQ(tight_set(*r, x), tight_set(flat, x));
      const RayEnvelope a(split, x, 10.0), b(RankTable(flat, 6), x, 10.0);
      for (double tau : {0.0, 0.2, 0.7, 1.3, 4.0, 9.5}) {
        EXPECT_NEAR(a.value(tau), b.value(tau), 1e-12);
        EXPECT_EQ(a.at(tau).tight, b.at(tau).tight);
      }
    }
  }
}
