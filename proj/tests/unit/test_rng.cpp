#include <gtest/gtest.h>

#include <set>

#include "nid/rng.hpp"

TEST(Rng, SameSeedSameStream) {
  nid::Rng a(5);
  nid::Rng b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformInUnitInterval) {
  nid::Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Rng, IndexCoversRange) {
  nid::Rng rng(2);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) ++hist[rng.index(7)];
  for (const int h : hist) EXPECT_NEAR(h, 1000, 120);
}

TEST(Rng, DerivedSeedsDifferByStream) {
  std::set<std::uint64_t> seeds;
  for (const auto* s : {"split", "init", "mtp", "clnn", "kmeans"}) seeds.insert(nid::Rng::derive_seed(0, s));
  EXPECT_EQ(seeds.size(), 5u);
  EXPECT_EQ(nid::Rng::derive_seed(3, "mtp"), nid::Rng::derive_seed(3, "mtp"));
  EXPECT_NE(nid::Rng::derive_seed(3, "mtp"), nid::Rng::derive_seed(4, "mtp"));
}

TEST(Rng, Fnv1aKnownValues) {
  EXPECT_EQ(nid::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(nid::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, ShuffleIsPermutation) {
  nid::Rng rng(3);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  nid::shuffle(v, rng);
  std::multiset<int> s(v.begin(), v.end());
  EXPECT_EQ(s, (std::multiset<int>{1, 2, 3, 4, 5, 6, 7, 8}));
}
