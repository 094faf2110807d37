#include "nid/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"
#include "nid/rng.hpp"
#include "nid/text.hpp"

namespace nid {

using json = nlohmann::json;

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// floor(ratio * count) with a small allowance for products such as
// 0.7 * 10 landing just under an integer.
std::size_t floor_fraction(double ratio, std::size_t count) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count) + 1e-9));
}

}  // namespace

std::vector<Utterance> DatasetBundle::internal_all() const {
  std::vector<Utterance> all = internal_labeled;
  all.insert(all.end(), internal_unlabeled.begin(), internal_unlabeled.end());
  return all;
}

std::vector<Utterance> read_jsonl(std::istream& in) {
  std::vector<Utterance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw LoadError(line_no, "expected a JSON object");
    const auto text = obj.find("text");
    if (text == obj.end() || !text->is_string()) throw LoadError(line_no, "missing string \"text\"");
    Utterance u;
    u.id = out.size();
    u.text = text->get<std::string>();
    if (blank(u.text)) throw LoadError(line_no, "empty \"text\"");
    if (const auto label = obj.find("label"); label != obj.end() && !label->is_null()) {
      if (!label->is_string()) throw LoadError(line_no, "\"label\" must be a string or null");
      u.label = label->get<std::string>();
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<Utterance>& utterances) {
  for (const auto& u : utterances) {
    json obj;
    obj["text"] = u.text;
    obj["label"] = u.label ? json(*u.label) : json(nullptr);
    out << obj.dump() << '\n';
  }
}

void save_jsonl(const std::filesystem::path& path, const std::vector<Utterance>& utterances) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, utterances);
}

std::vector<std::string> distinct_labels(const std::vector<Utterance>& utterances) {
  std::set<std::string> seen;
  for (const auto& u : utterances) {
    if (u.label) seen.insert(*u.label);
  }
  return {seen.begin(), seen.end()};
}

DatasetBundle split_by_kcr_lar(const std::vector<Utterance>& train, double kcr, double lar,
                               std::uint64_t seed) {
  if (!(kcr >= 0.0 && kcr <= 1.0)) throw SplitError("kcr must lie in [0, 1]");
  if (!(lar > 0.0 && lar <= 1.0)) throw SplitError("lar must lie in (0, 1]");
  std::map<std::string, std::vector<std::size_t>> by_intent;
  std::set<std::size_t> ids;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].label) throw SplitError("training utterance " + std::to_string(train[i].id) + " is unlabeled");
    if (!ids.insert(train[i].id).second) throw SplitError("duplicate id " + std::to_string(train[i].id));
    by_intent[*train[i].label].push_back(i);
  }

  std::vector<std::string> intents;
  for (const auto& [name, _] : by_intent) intents.push_back(name);

  const std::size_t n_known = floor_fraction(kcr, intents.size());
  if (kcr > 0.0 && n_known == 0) {
    throw SplitError("kcr " + std::to_string(kcr) + " selects no intent out of " +
                     std::to_string(intents.size()));
  }

  Rng rng(seed);
  std::vector<std::string> order = intents;
  shuffle(order, rng);

  DatasetBundle bundle;
  bundle.kcr = kcr;
  bundle.lar = lar;
  bundle.known_intents.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_known));
  bundle.unknown_intents.assign(order.begin() + static_cast<std::ptrdiff_t>(n_known), order.end());
  std::sort(bundle.known_intents.begin(), bundle.known_intents.end());
  std::sort(bundle.unknown_intents.begin(), bundle.unknown_intents.end());

  std::vector<bool> labeled(train.size(), false);
  for (const auto& intent : bundle.known_intents) {
    std::vector<std::size_t> members = by_intent[intent];
    const std::size_t n_lab = floor_fraction(lar, members.size());
    if (n_lab == 0) {
      throw SplitError("lar " + std::to_string(lar) + " labels no utterance of intent '" + intent +
                       "' (" + std::to_string(members.size()) + " utterances)");
    }
    // Partial Fisher-Yates: the first n_lab slots become a uniform sample.
    for (std::size_t i = 0; i < n_lab; ++i) {
      const std::size_t j = i + rng.index(members.size() - i);
      std::swap(members[i], members[j]);
      labeled[members[i]] = true;
    }
  }

  for (std::size_t i = 0; i < train.size(); ++i) {
    if (labeled[i]) {
      bundle.internal_labeled.push_back(train[i]);
    } else {
      Utterance hidden = train[i];
      bundle.unlabeled_gold.push_back(*hidden.label);
      hidden.label.reset();
      bundle.internal_unlabeled.push_back(std::move(hidden));
    }
  }
  return bundle;
}

void SynthSpec::validate() const {
  if (num_classes == 0 || per_class == 0 || keywords_per_class == 0 || noise_pool_size == 0) {
    throw BadInput("synthetic corpus sizes must be positive");
  }
  if (!(keyword_rate > 0.0 && keyword_rate <= 1.0)) throw BadInput("keyword_rate must lie in (0, 1]");
  if (length_range.first < 1 || length_range.second < length_range.first) {
    throw BadInput("length range must satisfy 1 <= min <= max");
  }
  if (prefix.empty() || !std::all_of(prefix.begin(), prefix.end(), [](unsigned char c) {
        return std::islower(c) != 0;
      })) {
    throw BadInput("prefix must be non-empty lowercase letters");
  }
}

std::string synth_keyword(const std::string& prefix, std::size_t c, std::size_t j) {
  return prefix + std::to_string(c) + "w" + std::to_string(j);
}

std::string synth_noise(std::size_t j) {
  const auto& stop = builtin_stopwords();
  return j < stop.size() ? stop[j] : "filler" + std::to_string(j);
}

std::string synth_label(const std::string& prefix, std::size_t c) {
  std::string digits = std::to_string(c);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return prefix + "_" + digits;
}

std::vector<Utterance> synthesize_corpus(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto [min_len, max_len] = spec.length_range;
  std::vector<Utterance> out;
  out.reserve(spec.num_classes * spec.per_class);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const std::string label = synth_label(spec.prefix, c);
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      const std::size_t len = min_len + rng.index(max_len - min_len + 1);
      std::string text;
      for (std::size_t t = 0; t < len; ++t) {
        if (t > 0) text += ' ';
        if (rng.bernoulli(spec.keyword_rate)) {
          text += synth_keyword(spec.prefix, c, rng.index(spec.keywords_per_class));
        } else {
          text += synth_noise(rng.index(spec.noise_pool_size));
        }
      }
      out.push_back(Utterance{out.size(), std::move(text), label});
    }
  }
  return out;
}

}  // namespace nid
