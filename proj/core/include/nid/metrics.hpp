#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nid {

/// Label-agreement counts between two labelings over the same items.
struct Contingency {
  std::size_t rows = 0;  // distinct truth labels
  std::size_t cols = 0;  // distinct predicted labels
  std::vector<std::size_t> table;  // rows x cols, row-major
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  std::size_t n = 0;

  std::size_t at(std::size_t r, std::size_t c) const { return table[r * cols + c]; }
};

/// Labels are arbitrary ids; rows/cols follow ascending label order.
/// Throws LengthMismatch.
Contingency contingency(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

/// Mutual information over the arithmetic mean of the two entropies.
double nmi(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

/// Hubert-Arabie adjusted Rand index.
double ari(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

/// Matched fraction under the best one-to-one cluster-to-class assignment.
double clustering_accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

/// Minimum-cost assignment on a square cost matrix (row-major, n x n).
/// Returns the column assigned to each row.
std::vector<std::size_t> linear_assignment(std::span<const double> cost, std::size_t n);

struct ClusteringScores {
  double nmi = 0.0;
  double ari = 0.0;
  double acc = 0.0;
};

ClusteringScores score_clustering(std::span<const std::size_t> truth,
                                  std::span<const std::size_t> pred);

/// Dense ids for string labels in ascending string order.
std::vector<std::size_t> encode_labels(const std::vector<std::string>& labels);

}  // namespace nid
