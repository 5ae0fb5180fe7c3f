#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gausscov/rng.hpp"
#include "oracles.hpp"

using gausscov::Philox4x32;
using gausscov::Rng;

TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  Rng a(42, 3), b(42, 4), c(43, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(Rng, UniformOpenIntervalAndUniform) {
  Rng r(1);
  std::vector<double> u(20000);
  for (double& v : u) {
    v = r.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  EXPECT_GT(oracle::ks_uniform_pvalue(u), 0.01);
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s4 / n, 3.0, 0.05);
}

TEST(Rng, NormalCdfIsGaussian) {
  Rng r(3);
  std::vector<double> u(20000);
  for (double& v : u) v = 0.5 * std::erfc(-r.normal() / std::sqrt(2.0));
  EXPECT_GT(oracle::ks_uniform_pvalue(u), 0.01);
}

TEST(Rng, BelowIsInRangeAndUnbiased) {
  Rng r(4);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, SampleDistinct) {
  Rng r(5);
  for (int t = 0; t < 100; ++t) {
    const auto s = r.sample(50, 10);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 10u);
    for (auto v : s) EXPECT_LT(v, 50u);
  }
  EXPECT_EQ(r.sample(3, 5).size(), 3u);
}
