#pragma once

// Slow, independent reference implementations used to check the library.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "nid/clnn.hpp"
#include "nid/encoder.hpp"

namespace nid::oracle {

// Top-k by full sort of (score desc, id asc), self excluded.
std::vector<std::vector<std::size_t>> brute_neighbors(const Matrix& x, std::size_t k);

// Pair-counting ARI over all C(n,2) pairs.
double ari_pairs(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred);

// NMI as (H(U) + H(V) - H(U,V)) / mean(H(U), H(V)).
double nmi_entropies(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred);

// Best matched count over every injective cluster-to-class map.
std::size_t best_matching(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred);

// True when the labelings induce the same partition.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// Term-by-term contrastive loss with plain exp/log.
double contrastive_direct(const Matrix& z, const Adjacency& a, double tau);

// Conventional single-positive contrastive loss: the positive of view i is i^1.
double partner_only_loss(const Matrix& z, double tau);

// -log(exp(l_y) / sum exp(l)).
double cross_entropy_direct(const Vector& logits, std::size_t label);

// Central differences of f over every coordinate of `x`.
std::vector<double> numeric_gradient(const std::function<double()>& f, std::vector<double*> x, double h = 1e-6);

// Five-point central differences: O(h^4) truncation, so a larger step keeps
// rounding noise small.
std::vector<double> numeric_gradient5(const std::function<double()>& f, std::vector<double*> x, double h = 1e-4);

// Norm of (a - b) over max(|a|, |b|, floor).
double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-10);

// Restricted growth strings of length n: every set partition exactly once.
std::vector<std::vector<std::size_t>> all_partitions(std::size_t n);

}  // namespace nid::oracle
