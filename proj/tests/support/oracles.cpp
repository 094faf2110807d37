#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace nid::oracle {

std::vector<std::vector<std::size_t>> brute_neighbors(const Matrix& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        s += x(static_cast<Eigen::Index>(i), c) * x(static_cast<Eigen::Index>(j), c);
      }
      scored.emplace_back(-s, j);
    }
    std::sort(scored.begin(), scored.end());
    for (std::size_t r = 0; r < std::min(k, scored.size()); ++r) out[i].push_back(scored[r].second);
  }
  return out;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

double ari_pairs(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred) {
  double both = 0, only_t = 0, only_p = 0, neither = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      const bool t = truth[i] == truth[j];
      const bool p = pred[i] == pred[j];
      if (t && p) both += 1;
      else if (t) only_t += 1;
      else if (p) only_p += 1;
      else neither += 1;
    }
  }
  const double denom = (both + only_t) * (only_t + neither) + (both + only_p) * (only_p + neither);
  if (denom == 0.0) return same_partition(truth, pred) ? 1.0 : 0.0;
  return 2.0 * (both * neither - only_t * only_p) / denom;
}

namespace {

template <typename Key>
double entropy_of(const std::map<Key, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) h -= c / n * std::log(c / n);
  return h;
}

}  // namespace

double nmi_entropies(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred) {
  std::map<std::size_t, double> cu, cv;
  std::map<std::pair<std::size_t, std::size_t>, double> cuv;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    cu[truth[i]] += 1;
    cv[pred[i]] += 1;
    cuv[{truth[i], pred[i]}] += 1;
  }
  const double n = static_cast<double>(truth.size());
  const double hu = entropy_of(cu, n);
  const double hv = entropy_of(cv, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  if (hu == 0.0 || hv == 0.0) return 0.0;
  const double mi = hu + hv - entropy_of(cuv, n);
  return mi / ((hu + hv) / 2.0);
}

std::size_t best_matching(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred) {
  std::vector<std::size_t> classes = truth;
  std::vector<std::size_t> clusters = pred;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::sort(clusters.begin(), clusters.end());
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
  // Pad both sides to a common size with sentinel labels that never match.
  const std::size_t s = std::max(classes.size(), clusters.size());
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  classes.resize(s, kNone);
  clusters.resize(s, kNone);
  std::vector<std::size_t> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      for (std::size_t c = 0; c < s; ++c) {
        if (clusters[c] == pred[i] && classes[perm[c]] == truth[i]) ++hits;
      }
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double contrastive_direct(const Matrix& z, const Adjacency& a, double tau) {
  const auto n = z.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) denom += std::exp(z.row(i).dot(z.row(k)) / tau);
    }
    double row = 0.0;
    double count = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) == 0) continue;
      row += -std::log(std::exp(z.row(i).dot(z.row(j)) / tau) / denom);
      count += 1.0;
    }
    total += row / count;
  }
  return total / static_cast<double>(n);
}

double partner_only_loss(const Matrix& z, double tau) {
  const auto n = z.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index partner = i ^ 1;
    double denom = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) denom += std::exp(z.row(i).dot(z.row(k)) / tau);
    }
    total += -std::log(std::exp(z.row(i).dot(z.row(partner)) / tau) / denom);
  }
  return total / static_cast<double>(n);
}

double cross_entropy_direct(const Vector& logits, std::size_t label) {
  double denom = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) denom += std::exp(logits[i]);
  return -std::log(std::exp(logits[static_cast<Eigen::Index>(label)]) / denom);
}

std::vector<double> numeric_gradient(const std::function<double()>& f, std::vector<double*> x, double h) {
  std::vector<double> g;
  g.reserve(x.size());
  for (double* p : x) {
    const double saved = *p;
    *p = saved + h;
    const double up = f();
    *p = saved - h;
    const double down = f();
    *p = saved;
    g.push_back((up - down) / (2.0 * h));
  }
  return g;
}

std::vector<double> numeric_gradient5(const std::function<double()>& f, std::vector<double*> x, double h) {
  std::vector<double> g;
  g.reserve(x.size());
  for (double* p : x) {
    const double saved = *p;
    auto at = [&](double offset) {
      *p = saved + offset;
      return f();
    };
    const double d = 8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h));
    *p = saved;
    g.push_back(d / (12.0 * h));
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

std::vector<std::vector<std::size_t>> all_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t max_label) {
    if (pos == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t l = 0; l <= max_label + 1; ++l) {
      if (pos == 0 && l > 0) break;
      cur[pos] = l;
      rec(pos + 1, pos == 0 ? 0 : std::max(max_label, l));
    }
  };
  if (n == 0) return {{}};
  rec(0, 0);
  return out;
}

}  // namespace nid::oracle
