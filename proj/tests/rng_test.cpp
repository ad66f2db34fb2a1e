#include "scengen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"

namespace scengen {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, UniformRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    ASSERT_GE(u, -3.0);
    ASSERT_LT(u, 5.0);
  }
}

TEST(Rng, UniformIntInclusiveBounds) {
  Rng rng(9);
  std::vector<int> seen(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const int v = rng.uniform_int(2, 7);
    ASSERT_GE(v, 2);
    ASSERT_LE(v, 7);
    seen[static_cast<std::size_t>(v - 2)]++;
  }
  // Each bucket should be near 10000; 5 sigma of a binomial is ~456.
  for (int count : seen) EXPECT_NEAR(count, 10000, 500);
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(13);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  // A 100-element shuffle leaving everything in place would mean a broken swap.
  std::vector<int> identity(100);
  std::iota(identity.begin(), identity.end(), 0);
  EXPECT_NE(v, identity);
}

TEST(Rng, ForkStreamsDiffer) {
  Rng root(21);
  Rng a = root.fork(0);
  Rng b = root.fork(1);
  EXPECT_NE(a.next_u64(), b.next_u64());

  // fork() does not advance the parent, so substreams are reproducible.
  Rng fresh = Rng(21).fork(0);
  Rng fresh2 = Rng(21).fork(0);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(fresh.next_u64(), fresh2.next_u64());
}

}  // namespace
}  // namespace scengen
