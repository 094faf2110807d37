#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nid/encoder.hpp"
#include "nid/text.hpp"

namespace nid {

struct LabeledSeq {
  TokenSeq seq;
  std::size_t label = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

/// -log softmax(logits)[label]; gradient softmax - onehot(label).
LossAndGrad cross_entropy_loss(const Vector& logits, std::size_t label);

struct MlmLossAndGrad {
  double loss = 0.0;
  Matrix grad;  // same shape as the logits
};

/// Mean cross-entropy over masked targets; row r of `logits` scores target r.
MlmLossAndGrad mlm_loss(const Matrix& logits,
                        std::span<const std::pair<std::size_t, TokenId>> targets);

struct TrainRecord {
  std::size_t epoch = 0;
  double ce = 0.0;
  double mlm = 0.0;
  double total = 0.0;  // ce + mlm
  double dev_metric = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::string stop_reason;
  /// Epoch whose parameters were returned (0 when the last epoch was kept).
  std::size_t best_epoch = 0;

  void write_jsonl(std::ostream& out) const;
};

struct MtpConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double p_mask = 0.15;
  AdamWHyper adam{};
  /// Convergence: mean total loss improves by less than `converge_tol` for
  /// `converge_window` consecutive epochs.
  double converge_tol = 1e-4;
  std::size_t converge_window = 5;
};

struct JointLoss {
  double ce = 0.0;
  double mlm = 0.0;
  double total() const { return ce + mlm; }
};

/// Joint loss of one step: mean CE over `supervised` plus mean MLM over
/// `masked`. Accumulates gradients into `grads` when non-null.
JointLoss joint_batch_loss(const EncoderParams& params, std::span<const LabeledSeq> supervised,
                           std::span<const MaskedExample> masked, EncoderParams* grads);

/// Fraction of `data` whose argmax classifier logit equals the label.
double classification_accuracy(const EncoderParams& params, std::span<const LabeledSeq> data);

/// Joint CE (external labeled) + MLM (internal) pre-training. Epochs walk the
/// longer source once, cycling the shorter. The dev metric is accuracy on
/// `external_dev`, or on `external` when no dev set is given.
TrainLog mtp_pretrain(EncoderParams& params, std::span<const LabeledSeq> external,
                      std::span<const TokenSeq> internal_all, const MtpConfig& config,
                      std::uint64_t seed, std::span<const LabeledSeq> external_dev = {});

/// Tracks the best dev value and how long it has been since it improved.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Records the metric of `epoch` (1-based); returns true on a strict improvement.
  bool observe(std::size_t epoch, double metric);
  bool should_stop() const { return best_epoch_ > 0 && stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_ = 0.0;
};

using DevMetricFn = std::function<double(const EncoderParams&, std::size_t epoch)>;

/// Continual pre-training with the supervised term on internal known-intent
/// data. Stops after `patience` epochs without a dev improvement and leaves
/// `params` at the best epoch. `dev_metric` overrides accuracy on `dev`.
/// The classifier head must already have one output per known intent.
TrainLog continue_pretrain_known(EncoderParams& params, std::span<const LabeledSeq> internal_labeled,
                                 std::span<const TokenSeq> internal_all,
                                 std::span<const LabeledSeq> dev, const MtpConfig& config,
                                 std::size_t patience, std::uint64_t seed,
                                 const DevMetricFn& dev_metric = {});

}  // namespace nid
