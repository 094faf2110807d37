#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nid/encoder.hpp"
#include "nid/neighbors.hpp"
#include "nid/text.hpp"

namespace nid {

enum class Augment { kRtr, kSwr, kShuffle, kDropout };

std::string_view to_string(Augment method);
/// Accepts "rtr", "swr", "shuffle", "dropout".
Augment parse_augment(std::string_view name);

struct AugmentSpec {
  Augment method = Augment::kRtr;
  /// Replacement probability for rtr, drop probability for dropout.
  double p = 0.25;
};

/// One augmented view: a token sequence plus an optional pooled-embedding
/// dropout mask (empty unless the method is dropout).
struct View {
  TokenSeq seq;
  Vector pooled_mask;
};

using AugmentFn = std::function<View(const TokenSeq&, Rng&)>;

/// The returned function keeps a reference to `vocab`.
AugmentFn make_augment(const AugmentSpec& spec, const Vocabulary& vocab, std::size_t embed_dim);

using Adjacency = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Known-intent class per instance id; empty vector or nullopt entries mean unlabeled.
using InstanceLabels = std::vector<std::optional<std::size_t>>;

/// Views ordered [x_1, x'_1, ..., x_M, x'_M].
struct AugmentedBatch {
  std::vector<View> views;
  /// Instance id each view was generated from.
  std::vector<std::size_t> origin;
  std::vector<std::size_t> anchors;
  Adjacency adjacency;

  std::size_t size() const { return views.size(); }
};

/// Samples one neighbor per anchor (the anchor itself when its neighborhood
/// is empty), augments both and builds the adjacency matrix.
AugmentedBatch build_batch(std::span<const std::size_t> anchors, std::span<const TokenSeq> data,
                           const NeighborIndex& index, const InstanceLabels& labels,
                           const AugmentFn& augment, Rng& rng);

/// A[i][j] = 1 (i != j) iff views i and j form a pair, or origin(j) is
/// origin(i) or one of its neighbors, or both origins carry the same known
/// label. The neighbor rule is directional.
Adjacency build_adjacency(std::span<const std::size_t> origin, const NeighborIndex& index,
                          const InstanceLabels& labels);

/// Mean over rows i of -1/|C_i| sum_{j in C_i} log softmax_{k != i}(z_i.z_k / tau)_j.
/// Throws EmptyPositiveRow if some row has no positive.
double contrastive_loss(const Matrix& z, const Adjacency& adjacency, double tau);

/// Gradient of contrastive_loss with respect to the unit rows `z`.
Matrix contrastive_grad_unit(const Matrix& z, const Adjacency& adjacency, double tau);

struct ContrastiveResult {
  double loss = 0.0;
  Matrix grad;  // with respect to the pre-normalization rows
};

/// Normalizes the rows of `v`, evaluates the loss and returns its gradient
/// with respect to `v` (through the normalization).
ContrastiveResult contrastive_grad(const Matrix& v, const Adjacency& adjacency, double tau);

/// Loss of a batch through encoder, projection head and normalization.
/// Accumulates gradients into `grads` when non-null.
double clnn_batch_loss(const EncoderParams& params, const AugmentedBatch& batch, double tau,
                       EncoderParams* grads, Matrix* z_out = nullptr);

struct ClnnConfig {
  /// Neighborhood size; 0 gives conventional partner-only contrastive learning.
  std::size_t k = 50;
  double tau = 0.07;
  std::size_t refresh_every = 5;
  AugmentSpec augment{};
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  AdamWHyper adam{};

  void validate() const;
};

struct ClnnStep {
  std::size_t epoch;
  std::size_t step;
  const AugmentedBatch& batch;
  const Matrix& z;
  double loss;
};

using ClnnObserver = std::function<void(const ClnnStep&)>;

struct ClnnLog {
  std::vector<double> epoch_loss;
  std::vector<double> step_loss;
  std::vector<std::size_t> refresh_epochs;

  void write_jsonl(std::ostream& out) const;
};

/// Contrastive training with nearest neighbors. At epochs divisible by
/// `refresh_every` the whole data set is re-encoded and the neighbor index
/// rebuilt from unit-normalized encoder outputs.
ClnnLog clnn_train(EncoderParams& params, std::span<const TokenSeq> data,
                   const InstanceLabels& labels, const ClnnConfig& config, const Vocabulary& vocab,
                   std::uint64_t seed, const ClnnObserver& observer = {});

/// Adjacency as row-major 0/1 lists, for debug dumps.
std::string adjacency_to_json(const AugmentedBatch& batch);

}  // namespace nid
