#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nid/encoder.hpp"

namespace nid {

struct NeighborIndex {
  Matrix embeddings;  // n x d, unit-norm rows
  /// Per instance: min(K, n-1) ids by descending inner product, ties by ascending id.
  std::vector<std::vector<std::size_t>> neighbor_ids;
  std::size_t k = 0;
  std::size_t built_at_epoch = 0;

  std::size_t size() const { return neighbor_ids.size(); }
  /// Linear scan; neighborhoods are small.
  bool is_neighbor(std::size_t of, std::size_t candidate) const;

  /// JSON-lines, one {"id": i, "neighbors": [...]} per instance.
  void write_jsonl(std::ostream& out) const;
};

/// Exact top-K inner-product neighbors with self excluded.
/// Throws BadInput if n < 2 or a row norm deviates from 1 by more than 1e-4.
NeighborIndex mine_neighbors(const Matrix& embeddings, std::size_t k);

/// Rows scaled to unit norm; zero rows stay zero.
Matrix normalize_rows(const Matrix& m);

/// Half the average per-class training-set size, at least 1.
std::size_t estimate_k(std::size_t n_train, std::size_t n_classes);

}  // namespace nid
