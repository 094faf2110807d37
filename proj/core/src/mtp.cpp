#include "nid/mtp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

namespace {

// log-sum-exp with the max subtracted.
double log_sum_exp(const Eigen::Ref<const Vector>& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

constexpr unsigned kStage1Groups = kGroupEncoder | kGroupClassifier | kGroupMlm;

JointLoss run_joint_epoch(EncoderParams& params, OptimizerState& state,
                          std::span<const LabeledSeq> supervised, std::span<const TokenSeq> internal,
                          const MtpConfig& config, Rng& rng) {
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  std::vector<std::size_t> sup_order(supervised.size());
  std::vector<std::size_t> int_order(internal.size());
  std::iota(sup_order.begin(), sup_order.end(), 0);
  std::iota(int_order.begin(), int_order.end(), 0);
  shuffle(sup_order, rng);
  shuffle(int_order, rng);

  const std::size_t longest = std::max(supervised.size(), internal.size());
  const std::size_t steps = (longest + batch - 1) / batch;
  JointLoss sum;
  std::vector<LabeledSeq> sup_batch;
  std::vector<MaskedExample> mlm_batch;
  EncoderParams grads = EncoderParams::zeros_like(params);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t count = std::min(batch, longest - s * batch);
    sup_batch.clear();
    mlm_batch.clear();
    for (std::size_t i = 0; i < count; ++i) {
      sup_batch.push_back(supervised[sup_order[(s * batch + i) % supervised.size()]]);
      mlm_batch.push_back(mask_tokens(internal[int_order[(s * batch + i) % internal.size()]],
                                      config.p_mask, rng));
    }
    for (auto& t : grads.tensors()) std::fill_n(t.data, t.size(), 0.0);
    const JointLoss loss = joint_batch_loss(params, sup_batch, mlm_batch, &grads);
    adamw_step(params, grads, state, config.adam, kStage1Groups);
    sum.ce += loss.ce;
    sum.mlm += loss.mlm;
  }
  return {sum.ce / static_cast<double>(steps), sum.mlm / static_cast<double>(steps)};
}

TrainRecord make_record(std::size_t epoch, const JointLoss& loss, double dev) {
  return {epoch, loss.ce, loss.mlm, loss.ce + loss.mlm, dev};
}

}  // namespace

LossAndGrad cross_entropy_loss(const Vector& logits, std::size_t label) {
  if (label >= static_cast<std::size_t>(logits.size())) throw BadInput("label out of range");
  const double lse = log_sum_exp(logits);
  LossAndGrad out;
  out.loss = lse - logits[static_cast<Eigen::Index>(label)];
  out.grad = (logits.array() - lse).exp().matrix();
  out.grad[static_cast<Eigen::Index>(label)] -= 1.0;
  return out;
}

MlmLossAndGrad mlm_loss(const Matrix& logits, std::span<const std::pair<std::size_t, TokenId>> targets) {
  if (targets.empty()) throw NoTargets();
  if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw BadInput("mlm logits need one row per target");
  }
  const double scale = 1.0 / static_cast<double>(targets.size());
  MlmLossAndGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const auto ce = cross_entropy_loss(logits.row(row).transpose(), static_cast<std::size_t>(targets[r].second));
    out.loss += ce.loss * scale;
    out.grad.row(row) = ce.grad.transpose() * scale;
  }
  return out;
}

void TrainLog::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["epoch"] = r.epoch;
    obj["ce"] = r.ce;
    obj["mlm"] = r.mlm;
    obj["total"] = r.total;
    obj["dev"] = r.dev_metric;
    out << obj.dump() << '\n';
  }
}

JointLoss joint_batch_loss(const EncoderParams& params, std::span<const LabeledSeq> supervised,
                           std::span<const MaskedExample> masked, EncoderParams* grads) {
  JointLoss loss;
  if (!supervised.empty()) {
    const double scale = 1.0 / static_cast<double>(supervised.size());
    for (const auto& ex : supervised) {
      const auto trace = encode_traced(params, ex.seq.ids);
      const auto ce = cross_entropy_loss(classify_logits(params, trace.h), ex.label);
      loss.ce += ce.loss * scale;
      if (grads) {
        const Vector dh = backprop_classify(params, trace.h, ce.grad * scale, *grads);
        backprop_encode(params, ex.seq.ids, trace, Vector(), dh, *grads);
      }
    }
  }
  if (!masked.empty()) {
    const double scale = 1.0 / static_cast<double>(masked.size());
    const auto batch = static_cast<Eigen::Index>(masked.size());
    std::vector<EncodeTrace> traces;
    traces.reserve(masked.size());
    Matrix contexts(batch, params.mlm_w.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto& ex = masked[static_cast<std::size_t>(b)];
      if (ex.targets.empty()) throw NoTargets();
      traces.push_back(encode_traced(params, ex.ids));
      contexts.row(b) = traces.back().h.transpose();
    }
    // The head is applied to all contexts at once; every target of a sequence
    // shares its context row.
    Matrix logits = contexts * params.mlm_w.transpose();
    logits.rowwise() += params.mlm_b.transpose();
    Matrix dlogits(batch, logits.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto& targets = masked[static_cast<std::size_t>(b)].targets;
      const double lse = log_sum_exp(logits.row(b).transpose());
      const double per_target = 1.0 / static_cast<double>(targets.size());
      double row_loss = 0.0;
      for (const auto& [pos, orig] : targets) {
        if (orig < 0 || orig >= logits.cols()) throw BadInput("masked target outside the vocabulary");
        row_loss += (lse - logits(b, orig)) * per_target;
      }
      loss.mlm += row_loss * scale;
      if (grads) {
        dlogits.row(b) = (logits.row(b).array() - lse).exp().matrix() * scale;
        for (const auto& [pos, orig] : targets) dlogits(b, orig) -= per_target * scale;
      }
    }
    if (grads) {
      grads->mlm_w.noalias() += dlogits.transpose() * contexts;
      grads->mlm_b += dlogits.colwise().sum().transpose();
      const Matrix dh = dlogits * params.mlm_w;
      for (Eigen::Index b = 0; b < batch; ++b) {
        backprop_encode(params, masked[static_cast<std::size_t>(b)].ids, traces[static_cast<std::size_t>(b)],
                        Vector(), dh.row(b).transpose(), *grads);
      }
    }
  }
  return loss;
}

double classification_accuracy(const EncoderParams& params, std::span<const LabeledSeq> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    Eigen::Index best = 0;
    classify_logits(params, encode(params, ex.seq)).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainLog mtp_pretrain(EncoderParams& params, std::span<const LabeledSeq> external,
                      std::span<const TokenSeq> internal_all, const MtpConfig& config,
                      std::uint64_t seed, std::span<const LabeledSeq> external_dev) {
  if (external.empty()) throw InvalidCall("multi-task pre-training needs external labeled data");
  if (internal_all.empty()) throw InvalidCall("multi-task pre-training needs internal data");
  for (const auto& ex : external) {
    if (ex.label >= params.num_classes()) throw BadInput("external label exceeds classifier size");
  }
  Rng rng(seed);
  OptimizerState state = OptimizerState::for_params(params);
  const auto dev = external_dev.empty() ? external : external_dev;
  TrainLog log;
  log.stop_reason = "max_epochs";
  std::size_t flat_epochs = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const JointLoss loss = run_joint_epoch(params, state, external, internal_all, config, rng);
    log.records.push_back(make_record(epoch, loss, classification_accuracy(params, dev)));
    if (log.records.size() >= 2) {
      const double prev = log.records[log.records.size() - 2].total;
      flat_epochs = (prev - log.records.back().total < config.converge_tol) ? flat_epochs + 1 : 0;
    }
    if (config.converge_window > 0 && flat_epochs >= config.converge_window) {
      log.stop_reason = "converged";
      break;
    }
  }
  log.best_epoch = log.records.empty() ? 0 : log.records.back().epoch;
  return log;
}

bool EarlyStopper::observe(std::size_t epoch, double metric) {
  if (best_epoch_ == 0 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

TrainLog continue_pretrain_known(EncoderParams& params, std::span<const LabeledSeq> internal_labeled,
                                 std::span<const TokenSeq> internal_all,
                                 std::span<const LabeledSeq> dev, const MtpConfig& config,
                                 std::size_t patience, std::uint64_t seed,
                                 const DevMetricFn& dev_metric) {
  if (internal_labeled.empty()) {
    throw InvalidCall("continual pre-training requires labeled known-intent data");
  }
  if (internal_all.empty()) throw InvalidCall("continual pre-training needs internal data");
  for (const auto& ex : internal_labeled) {
    if (ex.label >= params.num_classes()) throw BadInput("known-intent label exceeds classifier size");
  }
  const auto dev_set = dev.empty() ? internal_labeled : dev;
  Rng rng(seed);
  OptimizerState state = OptimizerState::for_params(params);
  EarlyStopper stopper(patience);
  EncoderParams best = params;
  TrainLog log;
  log.stop_reason = "max_epochs";
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const JointLoss loss = run_joint_epoch(params, state, internal_labeled, internal_all, config, rng);
    const double metric = dev_metric ? dev_metric(params, epoch) : classification_accuracy(params, dev_set);
    log.records.push_back(make_record(epoch, loss, metric));
    if (stopper.observe(epoch, metric)) best = params;
    if (stopper.should_stop()) {
      log.stop_reason = "early_stop";
      break;
    }
  }
  params = std::move(best);
  log.best_epoch = stopper.best_epoch();
  return log;
}

}  // namespace nid
