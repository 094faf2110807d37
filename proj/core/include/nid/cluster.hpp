#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nid/encoder.hpp"
#include "nid/rng.hpp"

namespace nid {

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  Matrix centroids;  // k x d
  double inertia = 0.0;

  /// JSON-lines {"id": i, "cluster": c}.
  void write_jsonl(std::ostream& out) const;
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

/// One k-means++ seeded Lloyd run.
struct KMeansRun {
  ClusterAssignment result;
  /// Inertia after every iteration; non-increasing.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
};

KMeansRun kmeans_single(const Matrix& points, std::size_t k, Rng& rng,
                        const KMeansOptions& options = {});

/// Best of `options.restarts` runs by inertia (ties to the earliest restart).
/// Throws BadInput if there are fewer points than clusters.
ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {});

double inertia(const Matrix& points, const std::vector<std::size_t>& labels, const Matrix& centroids);

}  // namespace nid
