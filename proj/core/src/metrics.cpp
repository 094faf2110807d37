#include "nid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nid/errors.hpp"

namespace nid {

namespace {

std::vector<std::size_t> dense(std::span<const std::size_t> labels, std::size_t& count) {
  std::map<std::size_t, std::size_t> ids;
  for (const auto l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [_, id] : ids) id = next++;
  count = next;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto l : labels) out.push_back(ids[l]);
  return out;
}

double comb2(std::size_t x) { return 0.5 * static_cast<double>(x) * (static_cast<double>(x) - 1.0); }

double entropy(const std::vector<std::size_t>& sums, double n) {
  double h = 0.0;
  for (const auto s : sums) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / n;
    h -= p * std::log(p);
  }
  return h;
}

// Each row and each column holds exactly one non-zero cell.
bool one_to_one(const Contingency& t) {
  std::vector<std::size_t> row_nz(t.rows, 0);
  std::vector<std::size_t> col_nz(t.cols, 0);
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      if (t.at(r, c) != 0) {
        ++row_nz[r];
        ++col_nz[c];
      }
    }
  }
  return t.rows == t.cols && std::all_of(row_nz.begin(), row_nz.end(), [](auto v) { return v == 1; }) &&
         std::all_of(col_nz.begin(), col_nz.end(), [](auto v) { return v == 1; });
}

}  // namespace

Contingency contingency(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) throw LengthMismatch(truth.size(), pred.size());
  Contingency t;
  const auto tr = dense(truth, t.rows);
  const auto pr = dense(pred, t.cols);
  t.table.assign(t.rows * t.cols, 0);
  t.row_sums.assign(t.rows, 0);
  t.col_sums.assign(t.cols, 0);
  t.n = truth.size();
  for (std::size_t i = 0; i < t.n; ++i) {
    ++t.table[tr[i] * t.cols + pr[i]];
    ++t.row_sums[tr[i]];
    ++t.col_sums[pr[i]];
  }
  return t;
}

double nmi(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  const Contingency t = contingency(truth, pred);
  if (t.n == 0) throw BadInput("nmi needs at least one item");
  const double n = static_cast<double>(t.n);
  const double hu = entropy(t.row_sums, n);
  const double hv = entropy(t.col_sums, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  if (hu == 0.0 || hv == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      const auto nij = t.at(r, c);
      if (nij == 0) continue;
      const double x = static_cast<double>(nij);
      mi += x / n * std::log(n * x / (static_cast<double>(t.row_sums[r]) * static_cast<double>(t.col_sums[c])));
    }
  }
  return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

double ari(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  const Contingency t = contingency(truth, pred);
  double index = 0.0;
  for (const auto v : t.table) index += comb2(v);
  double a = 0.0;
  double b = 0.0;
  for (const auto v : t.row_sums) a += comb2(v);
  for (const auto v : t.col_sums) b += comb2(v);
  const double pairs = comb2(t.n);
  const double expected = pairs > 0.0 ? a * b / pairs : 0.0;
  const double max_index = 0.5 * (a + b);
  const double denom = max_index - expected;
  if (denom == 0.0) return one_to_one(t) ? 1.0 : 0.0;
  return (index - expected) / denom;
}

std::vector<std::size_t> linear_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw BadInput("assignment cost matrix must be n x n");
  // Shortest augmenting path with row/column potentials, 1-based internally.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

double clustering_accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  const Contingency t = contingency(truth, pred);
  if (t.n == 0) return 0.0;
  // Rows are clusters, columns classes; zero-padded to square.
  const std::size_t s = std::max(t.rows, t.cols);
  std::vector<double> cost(s * s, 0.0);
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) cost[c * s + r] = -static_cast<double>(t.at(r, c));
  }
  const auto match = linear_assignment(cost, s);
  std::size_t hit = 0;
  for (std::size_t c = 0; c < t.cols; ++c) {
    if (match[c] < t.rows) hit += t.at(match[c], c);
  }
  return static_cast<double>(hit) / static_cast<double>(t.n);
}

ClusteringScores score_clustering(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  return {nmi(truth, pred), ari(truth, pred), clustering_accuracy(truth, pred)};
}

std::vector<std::size_t> encode_labels(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> ids;
  for (const auto& l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [_, id] : ids) id = next++;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(ids[l]);
  return out;
}

}  // namespace nid
