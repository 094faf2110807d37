#include <gtest/gtest.h>

#include <algorithm>

#include "nid/cluster.hpp"
#include "nid/errors.hpp"
#include "nid/metrics.hpp"

using nid::Matrix;

namespace {

Matrix blobs(nid::Rng& rng, const std::vector<std::pair<double, double>>& centers, std::size_t per) {
  Matrix m(static_cast<Eigen::Index>(centers.size() * per), 2);
  Eigen::Index r = 0;
  for (const auto& [x, y] : centers) {
    for (std::size_t i = 0; i < per; ++i, ++r) {
      m(r, 0) = x + rng.uniform(-1.0, 1.0);
      m(r, 1) = y + rng.uniform(-1.0, 1.0);
    }
  }
  return m;
}

}  // namespace

TEST(KMeans, SeparatesTwoBlobs) {
  nid::Rng rng(1);
  const Matrix pts = blobs(rng, {{0, 0}, {100, 100}}, 30);
  const auto res = nid::kmeans(pts, 2, 7);
  std::vector<std::size_t> truth(60, 0);
  std::fill(truth.begin() + 30, truth.end(), 1);
  EXPECT_DOUBLE_EQ(nid::clustering_accuracy(truth, res.labels), 1.0);
}

TEST(KMeans, SingleClusterIsTheMean) {
  Matrix pts(4, 2);
  pts << 0, 0, 2, 0, 0, 4, 2, 4;
  const auto res = nid::kmeans(pts, 1, 3);
  EXPECT_NEAR(res.centroids(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(res.centroids(0, 1), 2.0, 1e-12);
  // Total variance times n: sum of squared deviations.
  EXPECT_NEAR(res.inertia, 4 * (1.0 + 4.0), 1e-9);
}

TEST(KMeans, KEqualsNGivesZeroInertia) {
  Matrix pts(5, 2);
  pts << 0, 0, 1, 0, 5, 5, 9, 1, 3, 3;
  const auto res = nid::kmeans(pts, 5, 4);
  EXPECT_NEAR(res.inertia, 0.0, 1e-12);
  auto sorted = res.labels;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(KMeans, InertiaTraceIsNonIncreasing) {
  nid::Rng data(2);
  const Matrix pts = blobs(data, {{0, 0}, {3, 0}, {0, 3}, {3, 3}, {1.5, 1.5}}, 40);
  for (std::uint64_t s = 0; s < 20; ++s) {
    nid::Rng rng(s);
    const auto run = nid::kmeans_single(pts, 5, rng);
    for (std::size_t i = 1; i < run.inertia_trace.size(); ++i) {
      EXPECT_LE(run.inertia_trace[i], run.inertia_trace[i - 1] + 1e-9);
    }
    EXPECT_NEAR(run.result.inertia, nid::inertia(pts, run.result.labels, run.result.centroids), 1e-9);
  }
}

TEST(KMeans, ReturnsMinimumOverRestarts) {
  nid::Rng data(3);
  const Matrix pts = blobs(data, {{0, 0}, {2, 0}, {0, 2}, {2, 2}}, 15);
  nid::KMeansOptions opts;
  opts.restarts = 6;
  const auto best = nid::kmeans(pts, 4, 99, opts);
  double lowest = 1e300;
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    nid::Rng rng(nid::Rng::derive_seed(99, "kmeans-restart-" + std::to_string(r)));
    lowest = std::min(lowest, nid::kmeans_single(pts, 4, rng, opts).result.inertia);
  }
  EXPECT_DOUBLE_EQ(best.inertia, lowest);
}

TEST(KMeans, DeterministicAndRelabelInvariantInertia) {
  nid::Rng data(4);
  const Matrix pts = blobs(data, {{0, 0}, {5, 5}, {10, 0}}, 20);
  const auto a = nid::kmeans(pts, 3, 5);
  const auto b = nid::kmeans(pts, 3, 5);
  EXPECT_EQ(a.labels, b.labels);
  // Permute cluster ids and centroid rows together.
  std::vector<std::size_t> relabeled;
  for (const auto l : a.labels) relabeled.push_back((l + 1) % 3);
  Matrix moved(3, 2);
  for (Eigen::Index c = 0; c < 3; ++c) moved.row((c + 1) % 3) = a.centroids.row(c);
  EXPECT_NEAR(nid::inertia(pts, relabeled, moved), a.inertia, 1e-9);
}

TEST(KMeans, RepairsEmptyClustersWithDuplicatePoints) {
  Matrix pts(6, 1);
  pts << 0, 0, 0, 0, 0, 10;
  const auto res = nid::kmeans(pts, 3, 1);
  std::vector<std::size_t> sizes(3, 0);
  for (const auto l : res.labels) ++sizes[l];
  for (const auto s : sizes) EXPECT_GT(s, 0u);
}

TEST(KMeans, TooFewPointsThrows) {
  EXPECT_THROW(nid::kmeans(Matrix::Zero(2, 2), 3, 0), nid::BadInput);
  EXPECT_THROW(nid::kmeans(Matrix::Zero(2, 2), 0, 0), nid::BadInput);
}
