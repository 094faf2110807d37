#include "nid/cluster.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

namespace {

using Index = Eigen::Index;

double sq_dist(const Matrix& a, Index i, const Matrix& b, Index j) { return (a.row(i) - b.row(j)).squaredNorm(); }

Matrix plus_plus_seed(const Matrix& points, std::size_t k, Rng& rng) {
  const Index n = points.rows();
  Matrix centroids(static_cast<Index>(k), points.cols());
  centroids.row(0) = points.row(static_cast<Index>(rng.index(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, sq_dist(points, i, centroids, static_cast<Index>(c - 1)));
      total += d;
    }
    Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    centroids.row(static_cast<Index>(c)) = points.row(pick);
  }
  return centroids;
}

// Nearest centroid per point, ties to the lower index.
void assign(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& labels,
            std::vector<double>& dist) {
  const Matrix cross = points * centroids.transpose();
  const Vector c_norm = centroids.rowwise().squaredNorm();
  for (Index i = 0; i < points.rows(); ++i) {
    const double p_norm = points.row(i).squaredNorm();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = std::max(0.0, p_norm - 2.0 * cross(i, c) + c_norm[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
  }
}

}  // namespace

double inertia(const Matrix& points, const std::vector<std::size_t>& labels, const Matrix& centroids) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    total += sq_dist(points, i, centroids, static_cast<Index>(labels[static_cast<std::size_t>(i)]));
  }
  return total;
}

KMeansRun kmeans_single(const Matrix& points, std::size_t k, Rng& rng, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw BadInput("k must be positive");
  if (n < k) throw BadInput("k-means needs at least k points (" + std::to_string(n) + " < " + std::to_string(k) + ")");

  KMeansRun run;
  Matrix centroids = plus_plus_seed(points, k, rng);
  std::vector<std::size_t> labels(n, 0);
  std::vector<std::size_t> previous;
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> sizes(k);
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    assign(points, centroids, labels, dist);
    // Repair empty clusters with the point farthest from its centroid.
    std::fill(sizes.begin(), sizes.end(), 0);
    for (const auto l : labels) ++sizes[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      if (far == n) break;
      --sizes[labels[far]];
      labels[far] = c;
      dist[far] = 0.0;
      sizes[c] = 1;
      centroids.row(static_cast<Index>(c)) = points.row(static_cast<Index>(far));
    }
    Matrix updated = Matrix::Zero(centroids.rows(), centroids.cols());
    for (std::size_t i = 0; i < n; ++i) updated.row(static_cast<Index>(labels[i])) += points.row(static_cast<Index>(i));
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto r = static_cast<Index>(c);
      if (sizes[c] > 0) {
        updated.row(r) /= static_cast<double>(sizes[c]);
      } else {
        updated.row(r) = centroids.row(r);
      }
      shift = std::max(shift, (updated.row(r) - centroids.row(r)).norm());
    }
    centroids = std::move(updated);
    run.inertia_trace.push_back(inertia(points, labels, centroids));
    run.iterations = it + 1;
    if (labels == previous || shift < options.tol) break;
    previous = labels;
  }
  run.result.labels = std::move(labels);
  run.result.centroids = std::move(centroids);
  run.result.inertia = run.inertia_trace.empty() ? 0.0 : run.inertia_trace.back();
  return run;
}

ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw BadInput("k must be positive");
  if (static_cast<std::size_t>(points.rows()) < k) {
    throw BadInput("k-means needs at least k points (" + std::to_string(points.rows()) + " < " + std::to_string(k) + ")");
  }
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  ClusterAssignment best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(Rng::derive_seed(seed, "kmeans-restart-" + std::to_string(r)));
    KMeansRun run = kmeans_single(points, k, rng, options);
    if (!have || run.result.inertia < best.inertia) {
      best = std::move(run.result);
      have = true;
    }
  }
  return best;
}

void ClusterAssignment::write_jsonl(std::ostream& out) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    nlohmann::ordered_json obj;
    obj["id"] = i;
    obj["cluster"] = labels[i];
    out << obj.dump() << '\n';
  }
}

}  // namespace nid
