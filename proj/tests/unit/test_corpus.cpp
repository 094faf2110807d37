#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "nid/corpus.hpp"
#include "nid/errors.hpp"
#include "nid/text.hpp"

using nid::Utterance;

namespace {

std::vector<Utterance> labeled_corpus(std::size_t classes, std::size_t per_class) {
  std::vector<Utterance> out;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      out.push_back({out.size(), "utt " + std::to_string(out.size()), "intent" + std::to_string(c)});
    }
  }
  return out;
}

}  // namespace

TEST(ReadJsonl, AssignsLineIds) {
  std::istringstream in(R"({"text":"book a flight","label":"travel"})"
                        "\n"
                        R"({"text":"hi"})"
                        "\n");
  const auto u = nid::read_jsonl(in);
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u[0].id, 0u);
  EXPECT_EQ(u[1].id, 1u);
  EXPECT_EQ(u[0].label, "travel");
  EXPECT_FALSE(u[1].label.has_value());
}

TEST(ReadJsonl, MalformedLineReportsLineNumber) {
  std::istringstream in("{\"text\":\"a\"}\n{\"text\":\"b\"}\n{\"text\":\n");
  try {
    nid::read_jsonl(in);
    FAIL() << "expected LoadError";
  } catch (const nid::LoadError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ReadJsonl, RejectsMissingText) {
  std::istringstream in("{\"label\":\"x\"}\n");
  EXPECT_THROW(nid::read_jsonl(in), nid::LoadError);
}

TEST(ReadJsonl, RoundTripsThroughWrite) {
  const auto corpus = labeled_corpus(2, 3);
  std::stringstream buf;
  nid::write_jsonl(buf, corpus);
  EXPECT_EQ(nid::read_jsonl(buf), corpus);
}

TEST(LoadJsonl, MissingFileIsIoError) { EXPECT_THROW(nid::load_jsonl("/nonexistent/x.jsonl"), nid::IoError); }

TEST(Split, KnownIntentCountFloors) {
  const auto bundle = nid::split_by_kcr_lar(labeled_corpus(77, 4), 0.25, 0.5, 1);
  EXPECT_EQ(bundle.known_intents.size(), 19u);
  EXPECT_EQ(bundle.unknown_intents.size(), 58u);
}

TEST(Split, ZeroKcrLeavesEverythingUnlabeled) {
  const auto train = labeled_corpus(5, 10);
  const auto bundle = nid::split_by_kcr_lar(train, 0.0, 0.1, 1);
  EXPECT_TRUE(bundle.internal_labeled.empty());
  EXPECT_EQ(bundle.internal_unlabeled.size(), train.size());
  EXPECT_TRUE(bundle.known_intents.empty());
}

TEST(Split, LabeledCountPerKnownIntent) {
  const auto bundle = nid::split_by_kcr_lar(labeled_corpus(20, 900), 0.5, 0.1, 3);
  EXPECT_EQ(bundle.known_intents.size(), 10u);
  std::map<std::string, std::size_t> count;
  for (const auto& u : bundle.internal_labeled) ++count[*u.label];
  EXPECT_EQ(count.size(), 10u);
  for (const auto& [_, n] : count) EXPECT_EQ(n, 90u);
}

TEST(Split, PartitionAndNoLeakage) {
  const auto train = labeled_corpus(8, 25);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto b = nid::split_by_kcr_lar(train, 0.5, 0.3, seed);
    EXPECT_EQ(b.internal_labeled.size() + b.internal_unlabeled.size(), train.size());
    std::set<std::size_t> ids;
    for (const auto& u : b.internal_all()) EXPECT_TRUE(ids.insert(u.id).second);
    const std::set<std::string> known(b.known_intents.begin(), b.known_intents.end());
    for (const auto& u : b.internal_labeled) EXPECT_TRUE(known.contains(*u.label));
    for (const auto& u : b.internal_unlabeled) EXPECT_FALSE(u.label.has_value());
    ASSERT_EQ(b.unlabeled_gold.size(), b.internal_unlabeled.size());
    for (std::size_t i = 0; i < b.internal_unlabeled.size(); ++i) {
      EXPECT_EQ(b.unlabeled_gold[i], *train[b.internal_unlabeled[i].id].label);
    }
    EXPECT_EQ(b, nid::split_by_kcr_lar(train, 0.5, 0.3, seed));
  }
}

TEST(Split, TooFewLabeledUtterancesIsAnError) {
  EXPECT_THROW(nid::split_by_kcr_lar(labeled_corpus(4, 5), 0.5, 0.1, 0), nid::SplitError);
  EXPECT_THROW(nid::split_by_kcr_lar(labeled_corpus(2, 5), 0.2, 0.5, 0), nid::SplitError);
  EXPECT_THROW(nid::split_by_kcr_lar(labeled_corpus(2, 5), 1.5, 0.5, 0), nid::SplitError);
}

TEST(Synth, CountsAndDeterminism) {
  nid::SynthSpec spec;
  spec.num_classes = 2;
  spec.per_class = 5;
  spec.seed = 7;
  const auto a = nid::synthesize_corpus(spec);
  ASSERT_EQ(a.size(), 10u);
  std::map<std::string, int> per_label;
  for (const auto& u : a) ++per_label[*u.label];
  EXPECT_EQ(per_label.size(), 2u);
  for (const auto& [_, n] : per_label) EXPECT_EQ(n, 5);
  EXPECT_EQ(a, nid::synthesize_corpus(spec));
}

TEST(Synth, KeywordFractionMatchesRate) {
  nid::SynthSpec spec;
  spec.num_classes = 10;
  spec.per_class = 200;
  spec.keyword_rate = 0.7;
  spec.seed = 3;
  std::size_t tokens = 0;
  std::size_t keywords = 0;
  for (const auto& u : nid::synthesize_corpus(spec)) {
    for (const auto& w : nid::split_words(u.text)) {
      ++tokens;
      if (w.rfind(spec.prefix, 0) == 0) ++keywords;
    }
  }
  ASSERT_GE(tokens, 10000u);
  EXPECT_NEAR(static_cast<double>(keywords) / static_cast<double>(tokens), 0.7, 0.02);
}

TEST(Synth, KeywordPoolsAreDisjoint) {
  std::set<std::string> seen;
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t j = 0; j < 20; ++j) EXPECT_TRUE(seen.insert(nid::synth_keyword("intent", c, j)).second);
  }
}

TEST(Synth, NoiseWordsAreStopwords) {
  const auto& stop = nid::builtin_stopwords();
  for (std::size_t j = 0; j < 40; ++j) {
    EXPECT_NE(std::find(stop.begin(), stop.end(), nid::synth_noise(j)), stop.end());
  }
}

TEST(Synth, ValidatesSpec) {
  nid::SynthSpec spec;
  spec.keyword_rate = 0.0;
  EXPECT_THROW(spec.validate(), nid::BadInput);
  spec = {};
  spec.length_range = {5, 3};
  EXPECT_THROW(spec.validate(), nid::BadInput);
  spec = {};
  spec.prefix = "Bad1";
  EXPECT_THROW(spec.validate(), nid::BadInput);
}
