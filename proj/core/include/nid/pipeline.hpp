#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nid/clnn.hpp"
#include "nid/corpus.hpp"
#include "nid/errors.hpp"
#include "nid/encoder.hpp"
#include "nid/metrics.hpp"
#include "nid/text.hpp"

namespace nid {

/// Experiment configuration. Serialized as flat `key=value` lines with
/// dotted section keys (`stage2.tau=0.07`); see RunConfig::keys().
struct RunConfig {
  std::filesystem::path external_path;
  std::filesystem::path internal_path;
  std::filesystem::path test_path;  // optional; evaluation uses the unlabeled split otherwise
  std::filesystem::path dev_path;   // optional; phase B holds out labeled data otherwise
  std::filesystem::path out_dir;

  double kcr = 0.0;
  double lar = 0.1;
  std::uint64_t seed = 0;

  EncoderDims dims{};
  std::size_t vocab_min_freq = 1;

  // Stage 1.
  double stage1_lr = 1e-3;
  double stage1_weight_decay = 0.01;
  std::size_t stage1_epochs = 30;
  std::size_t stage1_batch = 64;
  double stage1_p_mask = 0.15;
  std::size_t stage1_patience = 20;
  std::size_t stage1_known_epochs = 100;
  double stage1_dev_fraction = 0.2;

  // Stage 2. An empty k means "auto" (estimate_k).
  std::optional<std::size_t> stage2_k;
  double stage2_tau = 0.07;
  std::size_t stage2_batch = 64;
  std::size_t stage2_refresh_every = 5;
  std::size_t stage2_epochs = 50;
  Augment stage2_augment = Augment::kRtr;
  double stage2_augment_p = 0.25;
  double stage2_lr = 1e-3;
  double stage2_weight_decay = 0.01;

  // Clustering. k = 0 takes the ground-truth class count of the evaluation set.
  std::size_t cluster_k = 0;
  std::size_t cluster_restarts = 10;
  bool cluster_normalize = false;

  bool report_stage_metrics = false;
  bool report_embeddings = true;
  bool report_verbose = false;

  /// Every configuration key, in canonical order.
  static const std::vector<std::string>& keys();

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Parses `key=value` lines; blank lines and `#` comments are skipped.
  void apply_file(const std::filesystem::path& path);
  void apply_text(const std::string& text);

  /// Named hyperparameter sets: "desk" (defaults) and the large-backbone
  /// values "paper-banking", "paper-mcid", "paper-stackoverflow".
  void apply_preset(const std::string& name);

  /// Canonical `key=value` text over keys().
  std::string to_text() const;
  /// FNV-1a of to_text(), hex.
  std::string hash() const;

  void validate() const;
};

struct MetricsReport {
  ClusteringScores scores;
  std::size_t k_used = 0;
  std::size_t neighbors_k = 0;
  double kcr = 0.0;
  double lar = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  /// Scores of k-means on intermediate representations, keyed "init", "mtp".
  std::map<std::string, ClusteringScores> stage_scores;
  std::vector<std::pair<std::string, double>> timings;
  /// Stages in execution order.
  std::vector<std::string> stage_log;

  /// Fixed key order; timings omitted when `include_timings` is false.
  std::string to_json(bool include_timings = true) const;
};

/// Derived seed for one pipeline stage.
std::uint64_t stage_seed(std::uint64_t root, const std::string& stage);

/// A stage failure, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Partial runs for the per-stage subcommands.
struct RunOptions {
  /// Directory holding checkpoint.bin and vocab.json; skips init and stage 1.
  std::filesystem::path resume_from;
  bool skip_clnn = false;
};

/// load -> split -> vocab -> MTP (-> phase B when kcr > 0) -> mine -> CLNN
/// -> encode -> k-means -> metrics. Writes outputs when `out_dir` is set.
MetricsReport run_pipeline(const RunConfig& config, const RunOptions& options = {});

/// Same pipeline over in-memory corpora.
MetricsReport run_pipeline(const RunConfig& config, const std::vector<Utterance>& external,
                           const std::vector<Utterance>& internal, const std::vector<Utterance>& test = {},
                           const RunOptions& options = {});

/// Reads {"id", "cluster"|"label"} JSON-lines. Lines without "id" take their
/// 0-based line index.
std::map<std::size_t, std::string> read_id_labels(const std::filesystem::path& path);

/// Scores predictions against gold labels. Throws IdMismatch when the id sets differ.
MetricsReport evaluate(const std::filesystem::path& pred_path, const std::filesystem::path& gold_path);
MetricsReport evaluate(const std::map<std::size_t, std::string>& pred,
                       const std::map<std::size_t, std::string>& gold);

/// CSV "id,dim_0,...": one row of encoder outputs per utterance, 9 significant digits.
void export_embeddings(const EncoderParams& params, const Vocabulary& vocab,
                       const std::vector<Utterance>& data, const std::filesystem::path& out_path);

/// Tokenized texts of `data`.
std::vector<TokenSeq> tokenize_all(const std::vector<Utterance>& data, const Vocabulary& vocab);

}  // namespace nid
