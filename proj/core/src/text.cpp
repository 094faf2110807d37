#include "nid/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

namespace detail {
extern const std::string_view kStopwordData;
}

namespace {

const std::vector<std::string> kSpecials = {"[pad]", "[unk]", "[mask]"};

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

const std::vector<std::string>& builtin_stopwords() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> out;
    std::istringstream in{std::string(detail::kStopwordData)};
    std::string line;
    while (std::getline(in, line)) {
      const auto words = split_words(line);
      out.insert(out.end(), words.begin(), words.end());
    }
    return out;
  }();
  return words;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && is_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string word(text.substr(b, e - b));
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      out.push_back(std::move(word));
    }
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}, {}) {}

Vocabulary::Vocabulary(std::vector<std::string> words, const std::vector<std::string>& stopwords) {
  id_to_token_ = kSpecials;
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
  }
  for (auto& w : words) {
    if (token_to_id_.contains(w)) throw BadInput("duplicate vocabulary token '" + w + "'");
    token_to_id_.emplace(w, static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.push_back(std::move(w));
  }
  for (const auto& s : stopwords) {
    const auto it = token_to_id_.find(s);
    if (it != token_to_id_.end() && it->second >= kFirstWordId && stopword_set_.insert(it->second).second) {
      stopword_ids_.push_back(it->second);
    }
  }
  std::sort(stopword_ids_.begin(), stopword_ids_.end());
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) obj[id_to_token_[i]] = i;
  return obj.dump();
}

Vocabulary Vocabulary::from_json(std::string_view text, const std::vector<std::string>& stopwords) {
  const auto obj = nlohmann::json::parse(text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw BadInput("vocabulary JSON must be an object");
  std::map<std::int64_t, std::string> by_id;
  for (const auto& [token, id] : obj.items()) {
    if (!id.is_number_integer()) throw BadInput("vocabulary id for '" + token + "' is not an integer");
    if (!by_id.emplace(id.get<std::int64_t>(), token).second) throw BadInput("duplicate vocabulary id");
  }
  if (by_id.empty() || by_id.begin()->first != 0 ||
      by_id.rbegin()->first != static_cast<std::int64_t>(by_id.size()) - 1) {
    throw BadInput("vocabulary ids must be contiguous from 0");
  }
  for (std::size_t i = 0; i < kSpecials.size(); ++i) {
    if (by_id[static_cast<std::int64_t>(i)] != kSpecials[i]) throw BadInput("vocabulary special ids are wrong");
  }
  std::vector<std::string> words;
  for (const auto& [id, token] : by_id) {
    if (id >= kFirstWordId) words.push_back(token);
  }
  return Vocabulary(std::move(words), stopwords);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), builtin_stopwords());
}

TokenSeq tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSeq seq;
  for (const auto& w : split_words(text)) seq.ids.push_back(vocab.id(w));
  if (seq.ids.empty()) throw EmptyAfterTokenize();
  return seq;
}

Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq,
                       const std::vector<std::string>& stopwords) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& w : split_words(t)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_freq) kept.emplace_back(w, c);
  }
  // counts is ordered by token, so a stable sort on count keeps ties lexicographic.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, _] : kept) words.push_back(std::move(w));
  return Vocabulary(std::move(words), stopwords);
}

TokenSeq rtr_augment(const TokenSeq& seq, double p, const Vocabulary& vocab, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw AugmentError("replacement probability must lie in [0, 1]");
  const std::size_t words = vocab.word_count();
  if (p > 0.0 && words < 2) throw AugmentError("random token replacement needs at least 2 word tokens");
  TokenSeq out = seq;
  for (auto& id : out.ids) {
    if (!rng.bernoulli(p)) continue;
    if (id >= kFirstWordId) {
      auto r = static_cast<TokenId>(kFirstWordId + rng.index(words - 1));
      if (r >= id) ++r;
      id = r;
    } else {
      id = static_cast<TokenId>(kFirstWordId + rng.index(words));
    }
  }
  return out;
}

TokenSeq swr_augment(const TokenSeq& seq, const Vocabulary& vocab, Rng& rng) {
  const auto& stop = vocab.stopword_ids();
  if (stop.size() < 2) return seq;
  TokenSeq out = seq;
  for (auto& id : out.ids) {
    if (!vocab.is_stopword(id)) continue;
    const auto pos = static_cast<std::size_t>(std::lower_bound(stop.begin(), stop.end(), id) - stop.begin());
    auto r = static_cast<std::size_t>(rng.index(stop.size() - 1));
    if (r >= pos) ++r;
    id = stop[r];
  }
  return out;
}

TokenSeq shuffle_augment(const TokenSeq& seq, Rng& rng) {
  TokenSeq out = seq;
  shuffle(out.ids, rng);
  return out;
}

MaskedExample mask_tokens(const TokenSeq& seq, double p_mask, Rng& rng) {
  if (!(p_mask >= 0.0 && p_mask <= 1.0)) throw BadInput("mask probability must lie in [0, 1]");
  if (seq.ids.empty()) throw BadInput("cannot mask an empty sequence");
  MaskedExample out;
  out.ids = seq.ids;
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    if (rng.bernoulli(p_mask)) out.targets.emplace_back(i, seq.ids[i]);
  }
  if (out.targets.empty()) {
    const std::size_t i = rng.index(seq.ids.size());
    out.targets.emplace_back(i, seq.ids[i]);
  }
  for (const auto& [pos, _] : out.targets) out.ids[pos] = kMask;
  return out;
}

}  // namespace nid
