#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nid {

struct Utterance {
  std::size_t id = 0;
  std::string text;
  std::optional<std::string> label;

  bool operator==(const Utterance&) const = default;
};

/// Split state for one experiment.
///
/// `internal_unlabeled` never carries labels. Its gold labels live in
/// `unlabeled_gold` (parallel to `internal_unlabeled`) and are read only by
/// evaluation code.
struct DatasetBundle {
  std::vector<Utterance> external_labeled;
  std::vector<Utterance> internal_labeled;
  std::vector<Utterance> internal_unlabeled;
  std::vector<std::string> unlabeled_gold;
  std::vector<Utterance> test;
  std::vector<std::string> known_intents;    // sorted
  std::vector<std::string> unknown_intents;  // sorted
  double kcr = 0.0;
  double lar = 1.0;

  /// internal_labeled followed by internal_unlabeled.
  std::vector<Utterance> internal_all() const;

  bool operator==(const DatasetBundle&) const = default;
};

std::vector<Utterance> load_jsonl(const std::filesystem::path& path);
std::vector<Utterance> read_jsonl(std::istream& in);
void save_jsonl(const std::filesystem::path& path, const std::vector<Utterance>& utterances);
void write_jsonl(std::ostream& out, const std::vector<Utterance>& utterances);

/// Distinct labels of `utterances`, sorted. Unlabeled entries are skipped.
std::vector<std::string> distinct_labels(const std::vector<Utterance>& utterances);

/// Known-class / labeled-ratio split of a fully labeled training set.
/// Fills the internal fields, intent inventories, kcr and lar.
DatasetBundle split_by_kcr_lar(const std::vector<Utterance>& train, double kcr, double lar,
                               std::uint64_t seed);

struct SynthSpec {
  std::size_t num_classes = 10;
  std::size_t per_class = 200;
  std::size_t keywords_per_class = 8;
  std::size_t noise_pool_size = 40;
  double keyword_rate = 0.7;
  std::pair<std::size_t, std::size_t> length_range{4, 10};
  std::uint64_t seed = 0;
  /// Namespace for keyword tokens and intent names, so corpora generated
  /// with different prefixes have disjoint keyword pools and intents.
  std::string prefix = "intent";

  void validate() const;
};

/// Keyword token `j` of class `c` under `prefix`.
std::string synth_keyword(const std::string& prefix, std::size_t c, std::size_t j);
/// Noise token `j`. Indices inside the shipped stop-word list map to those
/// words; later indices map to "filler<j>".
std::string synth_noise(std::size_t j);
std::string synth_label(const std::string& prefix, std::size_t c);

/// Keyword-bag utterances, `per_class` for each class, in class-major order.
std::vector<Utterance> synthesize_corpus(const SynthSpec& spec);

}  // namespace nid
