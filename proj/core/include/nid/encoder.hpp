#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nid/rng.hpp"
#include "nid/text.hpp"

namespace nid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EncoderDims {
  std::size_t embed = 64;
  std::size_t hidden = 128;
  std::size_t proj = 32;

  bool operator==(const EncoderDims&) const = default;
};

/// Parameter groups, used to restrict optimizer updates to the heads a
/// stage actually trains.
enum ParamGroup : unsigned {
  kGroupEncoder = 1u << 0,
  kGroupProjection = 1u << 1,
  kGroupClassifier = 1u << 2,
  kGroupMlm = 1u << 3,
  kGroupAll = 0xfu,
};

/// View over one tensor of an EncoderParams.
template <typename T>
struct BasicTensorView {
  std::string name;
  T* data;
  std::size_t rows;
  std::size_t cols;
  ParamGroup group;

  std::size_t size() const noexcept { return rows * cols; }
};
using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

/// Trainable tensors: token embeddings, two tanh hidden layers, a two-layer
/// projection head, a classifier head and a masked-token head.
struct EncoderParams {
  Matrix embedding;  // V x embed
  Matrix hidden1_w;  // hidden x embed
  Vector hidden1_b;
  Matrix hidden2_w;  // hidden x hidden
  Vector hidden2_b;
  Matrix proj1_w;    // hidden x hidden
  Vector proj1_b;
  Matrix proj2_w;    // proj x hidden
  Vector proj2_b;
  Matrix cls_w;      // classes x hidden
  Vector cls_b;
  Matrix mlm_w;      // V x hidden
  Vector mlm_b;

  EncoderDims dims() const;
  std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(cls_w.rows()); }

  /// Every tensor in a fixed order (the checkpoint order).
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;

  /// Same shapes, all zeros.
  static EncoderParams zeros_like(const EncoderParams& other);

  bool all_finite() const;
  /// Exact equality of shapes and entries.
  bool operator==(const EncoderParams& other) const;
};

/// Glorot-uniform weights, zero biases.
EncoderParams init_params(const EncoderDims& dims, std::size_t num_classes, std::size_t vocab_size,
                          std::uint64_t seed);

/// Replace the classifier head with a freshly initialized one of `num_classes` outputs.
void reset_classifier(EncoderParams& params, std::size_t num_classes, std::uint64_t seed);

struct EncodeTrace {
  Vector pooled;  // after the optional dropout mask
  Vector hidden1;
  Vector h;
};

/// Mean-pooled token embeddings through the two tanh layers.
Vector encode(const EncoderParams& params, const TokenSeq& seq);
Vector encode(const EncoderParams& params, std::span<const TokenId> ids);

/// One encoder output per row.
Matrix encode_all(const EncoderParams& params, std::span<const TokenSeq> data);

/// Forward pass keeping activations. `pooled_mask`, when non-empty, scales the
/// pooled embedding coordinate-wise (embedding dropout).
EncodeTrace encode_traced(const EncoderParams& params, std::span<const TokenId> ids,
                          const Vector& pooled_mask = Vector());

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/dh.
void backprop_encode(const EncoderParams& params, std::span<const TokenId> ids,
                     const EncodeTrace& trace, const Vector& pooled_mask, const Vector& dh,
                     EncoderParams& grads);

inline constexpr double kNormEps = 1e-12;

struct ProjectTrace {
  Vector hidden;  // tanh layer of the projection head
  Vector v;       // pre-normalization output
  Vector z;       // v / (|v| + eps)
};

/// Unit-norm projection of `h`; the zero vector maps to zero.
Vector project(const EncoderParams& params, const Vector& h);
ProjectTrace project_traced(const EncoderParams& params, const Vector& h);

/// d(loss)/dv from d(loss)/dz for z = v / (|v| + eps).
Vector normalize_backward(const Vector& v, const Vector& dz);

/// Accumulates projection-head gradients from d(loss)/dv; returns d(loss)/dh.
Vector backprop_project(const EncoderParams& params, const Vector& h, const ProjectTrace& trace,
                        const Vector& dv, EncoderParams& grads);

Vector classify_logits(const EncoderParams& params, const Vector& h);
/// Returns d(loss)/dh.
Vector backprop_classify(const EncoderParams& params, const Vector& h, const Vector& dlogits,
                         EncoderParams& grads);

/// One row of vocabulary logits per masked target. The context vector is the
/// encoding of the masked sequence, so all rows share it.
Matrix mlm_predict_logits(const EncoderParams& params, const MaskedExample& masked);

/// Embedding dropout: zero each coordinate with probability p, scale
/// survivors by 1/(1-p).
Vector dropout_augment(const Vector& vec, double p, Rng& rng);
/// The multiplicative mask dropout_augment applies.
Vector dropout_mask(std::size_t dim, double p, Rng& rng);

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptimizerState {
  EncoderParams m;
  EncoderParams v;
  std::uint64_t step = 0;

  static OptimizerState for_params(const EncoderParams& params);
};

/// Bias-corrected Adam with decoupled weight decay over the tensors in
/// `groups`. Throws NumericalError if an updated entry is non-finite.
void adamw_step(EncoderParams& params, const EncoderParams& grads, OptimizerState& state,
                const AdamWHyper& hyper, unsigned groups = kGroupAll);

}  // namespace nid
