#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nid/rng.hpp"

namespace nid {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kMask = 2;
inline constexpr TokenId kFirstWordId = 3;

struct TokenSeq {
  std::vector<TokenId> ids;

  std::size_t length() const noexcept { return ids.size(); }
  bool operator==(const TokenSeq&) const = default;
};

struct MaskedExample {
  std::vector<TokenId> ids;
  /// (position, original id), positions strictly increasing.
  std::vector<std::pair<std::size_t, TokenId>> targets;
};

class Vocabulary {
 public:
  /// Specials only.
  Vocabulary();

  /// Words get ids kFirstWordId.. in the given order; stop-word ids are the
  /// intersection of `stopwords` with `words`.
  Vocabulary(std::vector<std::string> words, const std::vector<std::string>& stopwords);

  std::size_t size() const noexcept { return id_to_token_.size(); }
  std::size_t word_count() const noexcept { return size() - kFirstWordId; }

  /// kUnk for unknown tokens.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  bool contains(std::string_view token) const;
  bool valid(TokenId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  /// Stop-word ids, ascending.
  const std::vector<TokenId>& stopword_ids() const noexcept { return stopword_ids_; }
  bool is_stopword(TokenId id) const { return stopword_set_.contains(id); }

  /// JSON object {token: id} covering every id including specials.
  std::string to_json() const;
  static Vocabulary from_json(std::string_view json, const std::vector<std::string>& stopwords);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<TokenId> stopword_ids_;
  std::unordered_set<TokenId> stopword_set_;
};

/// The stop-word list shipped in core/data/stopwords.txt.
const std::vector<std::string>& builtin_stopwords();

/// Lowercase, split on whitespace, strip leading/trailing punctuation.
/// Tokens that are pure punctuation vanish.
std::vector<std::string> split_words(std::string_view text);

/// Throws EmptyAfterTokenize if no word survives.
TokenSeq tokenize(std::string_view text, const Vocabulary& vocab);

/// Frequency-ranked vocabulary: count desc, then token asc.
Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq,
                       const std::vector<std::string>& stopwords = builtin_stopwords());

/// Random token replacement: each position, with probability p, becomes a
/// uniformly drawn word id different from the original.
TokenSeq rtr_augment(const TokenSeq& seq, double p, const Vocabulary& vocab, Rng& rng);

/// Stop-word replacement: every stop-word position becomes a different
/// uniformly drawn stop-word. Identity when the vocabulary has < 2 stop-words.
TokenSeq swr_augment(const TokenSeq& seq, const Vocabulary& vocab, Rng& rng);

/// Uniform permutation of positions.
TokenSeq shuffle_augment(const TokenSeq& seq, Rng& rng);

/// Independent Bernoulli masking with at least one forced target.
MaskedExample mask_tokens(const TokenSeq& seq, double p_mask, Rng& rng);

}  // namespace nid
