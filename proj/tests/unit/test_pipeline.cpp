#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nid/pipeline.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nid_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nid::RunConfig small_config() {
  nid::RunConfig c;
  c.dims = {8, 8, 4};
  c.stage1_epochs = 2;
  c.stage1_known_epochs = 3;
  c.stage1_patience = 2;
  c.stage2_epochs = 2;
  c.stage2_batch = 16;
  c.stage2_k = 3;
  c.cluster_restarts = 2;
  c.seed = 4;
  return c;
}

struct Corpora {
  std::vector<nid::Utterance> external;
  std::vector<nid::Utterance> internal;
};

Corpora small_corpora() {
  nid::SynthSpec ext;
  ext.num_classes = 3;
  ext.per_class = 15;
  ext.prefix = "ext";
  ext.seed = 1;
  nid::SynthSpec in;
  in.num_classes = 4;
  in.per_class = 15;
  in.seed = 2;
  return {nid::synthesize_corpus(ext), nid::synthesize_corpus(in)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(RunConfig, EveryKeyRoundTrips) {
  nid::RunConfig c;
  c.apply_preset("paper-stackoverflow");
  c.kcr = 0.25;
  c.seed = 99;
  c.external_path = "a/b.jsonl";
  c.cluster_normalize = true;
  nid::RunConfig back;
  back.apply_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  for (const auto& key : nid::RunConfig::keys()) {
    nid::RunConfig fresh;
    fresh.set(key, c.get(key));
    EXPECT_EQ(fresh.get(key), c.get(key)) << key;
  }
}

TEST(RunConfig, DoublesSurviveExactly) {
  nid::RunConfig c;
  c.stage2_tau = 0.1 + 0.2;
  nid::RunConfig back;
  back.set("stage2.tau", c.get("stage2.tau"));
  EXPECT_EQ(back.stage2_tau, c.stage2_tau);
}

TEST(RunConfig, TextSkipsCommentsAndBlanks) {
  nid::RunConfig c;
  c.apply_text("# header\n\nsplit.kcr=0.5\n  stage2.k = auto\nstage2.augment=swr\n");
  EXPECT_EQ(c.kcr, 0.5);
  EXPECT_FALSE(c.stage2_k.has_value());
  EXPECT_EQ(c.stage2_augment, nid::Augment::kSwr);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  nid::RunConfig c;
  EXPECT_THROW(c.set("stage3.lr", "1"), nid::ConfigError);
  EXPECT_THROW(c.set("seed", "many"), nid::ConfigError);
  EXPECT_THROW(c.apply_text("no equals sign"), nid::ConfigError);
  EXPECT_THROW(c.apply_preset("huge"), nid::ConfigError);
  c.kcr = 1.5;
  EXPECT_THROW(c.validate(), nid::ConfigError);
}

TEST(RunConfig, HashTracksSettingsButNotOutputDir) {
  nid::RunConfig a;
  nid::RunConfig b;
  b.out_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(RunConfig, PresetsSetStageTwoValues) {
  nid::RunConfig c;
  c.apply_preset("paper-banking");
  EXPECT_EQ(c.stage1_lr, 5e-5);
  EXPECT_EQ(c.stage2_lr, 1e-5);
  EXPECT_EQ(c.stage2_k, 50u);
  EXPECT_EQ(c.stage2_batch, 128u);
  c.apply_preset("paper-stackoverflow");
  EXPECT_EQ(c.stage2_lr, 1e-6);
  EXPECT_EQ(c.stage2_k, 500u);
  c.apply_preset("desk");
  EXPECT_FALSE(c.stage2_k.has_value());
}

TEST(StageSeed, DistinctPerStage) {
  EXPECT_NE(nid::stage_seed(1, "mtp"), nid::stage_seed(1, "clnn"));
  EXPECT_EQ(nid::stage_seed(1, "mtp"), nid::Rng::derive_seed(1, "mtp"));
}

TEST(Pipeline, RunsDeterministicallyAndWritesOutputs) {
  const auto data = small_corpora();
  auto cfg = small_config();
  const auto dir_a = scratch_dir("run_a");
  cfg.out_dir = dir_a;
  const auto a = nid::run_pipeline(cfg, data.external, data.internal);
  cfg.out_dir = scratch_dir("run_b");
  const auto b = nid::run_pipeline(cfg, data.external, data.internal);
  EXPECT_EQ(a.to_json(false), b.to_json(false));
  EXPECT_EQ(slurp(dir_a / "assignments.jsonl"),
            slurp(cfg.out_dir / "assignments.jsonl"));
  for (const auto* f : {"assignments.jsonl", "neighbors.jsonl", "checkpoint.bin", "vocab.json", "embeddings.csv",
                        "config.txt", "report.json", "mtp_log.jsonl", "clnn_log.jsonl"}) {
    EXPECT_TRUE(fs::exists(cfg.out_dir / f)) << f;
  }
  EXPECT_EQ(a.k_used, 4u);
  EXPECT_EQ(a.neighbors_k, 3u);
  EXPECT_EQ(a.stage_log, (std::vector<std::string>{"config", "split", "vocab", "tokenize", "init", "mtp", "clnn", "cluster",
                                                   "write"}));
}

TEST(Pipeline, KnownClassesAddContinuedPretraining) {
  const auto data = small_corpora();
  auto cfg = small_config();
  cfg.kcr = 0.5;
  cfg.lar = 0.5;
  const auto r = nid::run_pipeline(cfg, data.external, data.internal);
  EXPECT_NE(std::find(r.stage_log.begin(), r.stage_log.end(), "mtp_known"), r.stage_log.end());
  EXPECT_EQ(r.kcr, 0.5);
}

TEST(Pipeline, ReportKeysInFixedOrder) {
  const auto data = small_corpora();
  auto cfg = small_config();
  cfg.report_stage_metrics = true;
  const auto r = nid::run_pipeline(cfg, data.external, data.internal);
  const auto j = nlohmann::ordered_json::parse(r.to_json(true));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"nmi", "ari", "acc", "k_used", "neighbors_k", "kcr", "lar", "seed",
                                            "config_hash", "stages", "stage_scores", "timings"}));
  EXPECT_TRUE(j["stage_scores"].contains("init"));
  EXPECT_TRUE(j["stage_scores"].contains("mtp"));
  EXPECT_FALSE(nlohmann::ordered_json::parse(r.to_json(false)).contains("timings"));
}

TEST(Pipeline, StageFailuresCarryTheStageName) {
  auto data = small_corpora();
  data.external[0].label.reset();
  try {
    nid::run_pipeline(small_config(), data.external, data.internal);
    FAIL() << "expected a stage error";
  } catch (const nid::StageError& e) {
    EXPECT_EQ(e.stage(), "split");
  }
}

TEST(Evaluate, InvariantToClusterNames) {
  const std::map<std::size_t, std::string> gold{{0, "a"}, {1, "a"}, {2, "b"}, {3, "c"}};
  const std::map<std::size_t, std::string> pred{{0, "7"}, {1, "7"}, {2, "2"}, {3, "2"}};
  const std::map<std::size_t, std::string> renamed{{0, "x"}, {1, "x"}, {2, "y"}, {3, "y"}};
  const auto r = nid::evaluate(pred, gold);
  EXPECT_EQ(r.to_json(false), nid::evaluate(renamed, gold).to_json(false));
  const std::vector<std::size_t> t{0, 0, 1, 2};
  const std::vector<std::size_t> p{1, 1, 0, 0};
  EXPECT_NEAR(r.scores.acc, 0.75, 1e-15);
  EXPECT_NEAR(r.scores.ari, nid::oracle::ari_pairs(t, p), 1e-12);
  EXPECT_NEAR(r.scores.nmi, nid::oracle::nmi_entropies(t, p), 1e-12);
}

TEST(Evaluate, ListsMismatchedIds) {
  const std::map<std::size_t, std::string> gold{{0, "a"}, {1, "a"}, {2, "b"}};
  const std::map<std::size_t, std::string> pred{{0, "a"}, {1, "a"}, {5, "b"}};
  try {
    nid::evaluate(pred, gold);
    FAIL() << "expected IdMismatch";
  } catch (const nid::IdMismatch& e) {
    EXPECT_EQ(e.ids(), (std::vector<std::size_t>{2, 5}));
  }
}

TEST(Evaluate, ReadsFilesWithAndWithoutIds) {
  const auto dir = scratch_dir("eval");
  std::ofstream(dir / "pred.jsonl") << "{\"cluster\": 1}\n{\"cluster\": 1}\n{\"cluster\": 0}\n";
  std::ofstream(dir / "gold.jsonl") << "{\"id\": 2, \"label\": \"b\"}\n{\"id\": 0, \"label\": \"a\"}\n"
                                    << "{\"id\": 1, \"label\": \"a\"}\n";
  const auto pred = nid::read_id_labels(dir / "pred.jsonl");
  EXPECT_EQ(pred.at(2), "0");
  const auto r = nid::evaluate(dir / "pred.jsonl", dir / "gold.jsonl");
  EXPECT_EQ(r.scores.acc, 1.0);
}

TEST(ExportEmbeddings, OneRowPerUtteranceAndRoundTrips) {
  const auto data = small_corpora();
  std::vector<std::string> texts;
  for (const auto& u : data.internal) texts.push_back(u.text);
  const auto vocab = nid::build_vocab(texts, 1);
  const auto p = nid::init_params({5, 6, 3}, 2, vocab.size(), 1);
  const auto path = scratch_dir("emb") / "e.csv";
  nid::export_embeddings(p, vocab, data.internal, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,dim_0,dim_1,dim_2,dim_3,dim_4,dim_5");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream s(line);
    std::string cell;
    std::getline(s, cell, ',');
    const auto& u = data.internal[rows];
    EXPECT_EQ(std::stoul(cell), u.id);
    const auto h = nid::encode(p, nid::tokenize(u.text, vocab));
    for (Eigen::Index d = 0; d < h.size(); ++d) {
      std::getline(s, cell, ',');
      EXPECT_NEAR(std::stod(cell), h[d], 1e-7 * std::max(1.0, std::abs(h[d])));
    }
    ++rows;
  }
  EXPECT_EQ(rows, data.internal.size());
}
