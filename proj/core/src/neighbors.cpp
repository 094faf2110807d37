#include "nid/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

bool NeighborIndex::is_neighbor(std::size_t of, std::size_t candidate) const {
  const auto& ids = neighbor_ids.at(of);
  return std::find(ids.begin(), ids.end(), candidate) != ids.end();
}

void NeighborIndex::write_jsonl(std::ostream& out) const {
  for (std::size_t i = 0; i < neighbor_ids.size(); ++i) {
    nlohmann::ordered_json obj;
    obj["id"] = i;
    obj["neighbors"] = neighbor_ids[i];
    out << obj.dump() << '\n';
  }
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 0.0) out.row(r) /= n;
  }
  return out;
}

NeighborIndex mine_neighbors(const Matrix& embeddings, std::size_t k) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  const auto d = static_cast<std::size_t>(embeddings.cols());
  if (n < 2) throw BadInput("neighbor mining needs at least 2 instances");
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = embeddings.row(static_cast<Eigen::Index>(i)).norm();
    if (std::abs(norm - 1.0) > 1e-4) {
      throw BadInput("row " + std::to_string(i) + " has norm " + std::to_string(norm) + ", expected 1");
    }
  }
  NeighborIndex index;
  index.embeddings = embeddings;
  index.k = k;
  index.neighbor_ids.resize(n);
  const std::size_t take = std::min(k, n - 1);
  if (take == 0) return index;

  std::vector<double> scores(n);
  std::vector<std::size_t> candidates;
  candidates.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = embeddings.data() + i * d;
    for (std::size_t j = 0; j < n; ++j) {
      const double* xj = embeddings.data() + j * d;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += xi[c] * xj[c];
      scores[j] = s;
    }
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates.push_back(j);
    }
    const auto better = [&](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);
    index.neighbor_ids[i].assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return index;
}

std::size_t estimate_k(std::size_t n_train, std::size_t n_classes) {
  if (n_classes == 0) throw BadInput("estimate_k needs at least one class");
  return std::max<std::size_t>(1, n_train / (2 * n_classes));
}

}  // namespace nid
