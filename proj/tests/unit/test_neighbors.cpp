#include <gtest/gtest.h>

#include "nid/errors.hpp"
#include "nid/neighbors.hpp"
#include "nid/rng.hpp"
#include "oracles.hpp"

using nid::Matrix;

namespace {

Matrix random_unit_rows(nid::Rng& rng, std::size_t n, std::size_t d) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return nid::normalize_rows(m);
}

}  // namespace

TEST(MineNeighbors, ThreePointExample) {
  Matrix e(3, 2);
  e << 1, 0, 0.8, 0.6, 0, 1;
  const auto index = nid::mine_neighbors(e, 1);
  EXPECT_EQ(index.neighbor_ids[0], std::vector<std::size_t>{1});
  EXPECT_EQ(index.neighbor_ids[1], std::vector<std::size_t>{0});
  EXPECT_EQ(index.neighbor_ids[2], std::vector<std::size_t>{1});
}

TEST(MineNeighbors, LargeKReturnsEveryOtherInstance) {
  nid::Rng rng(1);
  const Matrix e = random_unit_rows(rng, 6, 3);
  const auto index = nid::mine_neighbors(e, 10);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(index.neighbor_ids[i].size(), 5u);
}

TEST(MineNeighbors, MatchesBruteForce) {
  nid::Rng rng(2);
  const Matrix e = random_unit_rows(rng, 200, 16);
  EXPECT_EQ(nid::mine_neighbors(e, 7).neighbor_ids, nid::oracle::brute_neighbors(e, 7));
}

TEST(MineNeighbors, TiesGoToLowerIds) {
  Matrix e(4, 2);
  e << 1, 0, 0, 1, 0, 1, 0, 1;
  const auto index = nid::mine_neighbors(e, 2);
  EXPECT_EQ(index.neighbor_ids[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(index.neighbor_ids[3], (std::vector<std::size_t>{1, 2}));
}

TEST(MineNeighbors, TopKIsPrefixOfTopKPlusOne) {
  nid::Rng rng(3);
  const Matrix e = random_unit_rows(rng, 50, 4);
  for (std::size_t k = 1; k < 10; ++k) {
    const auto a = nid::mine_neighbors(e, k);
    const auto b = nid::mine_neighbors(e, k + 1);
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_TRUE(std::equal(a.neighbor_ids[i].begin(), a.neighbor_ids[i].end(), b.neighbor_ids[i].begin()));
      EXPECT_FALSE(a.is_neighbor(i, i));
    }
  }
}

TEST(MineNeighbors, RejectsBadInput) {
  EXPECT_THROW(nid::mine_neighbors(Matrix::Ones(1, 2).normalized(), 1), nid::BadInput);
  Matrix e(2, 2);
  e << 2, 0, 0, 1;
  EXPECT_THROW(nid::mine_neighbors(e, 1), nid::BadInput);
}

TEST(EstimateK, Anchors) {
  EXPECT_EQ(nid::estimate_k(9003, 77), 58u);
  EXPECT_EQ(nid::estimate_k(1220, 16), 38u);
  EXPECT_EQ(nid::estimate_k(18000, 20), 450u);
  EXPECT_EQ(nid::estimate_k(3, 2), 1u);
  EXPECT_THROW(nid::estimate_k(10, 0), nid::BadInput);
}
