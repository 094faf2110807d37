// nid: command-line runner for the intent-discovery pipeline.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nid/checkpoint.hpp"
#include "nid/cluster.hpp"
#include "nid/corpus.hpp"
#include "nid/neighbors.hpp"
#include "nid/pipeline.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::map<std::string, std::string> values;
};

void add_run_flags(CLI::App* app, RunFlags& flags) {
  app->add_option("--config", flags.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app->add_option("--preset", flags.preset, "desk | paper-banking | paper-mcid | paper-stackoverflow");
  for (const auto& key : nid::RunConfig::keys()) {
    app->add_option("--" + key, flags.values[key], "override " + key);
  }
}

// Preset, then file, then per-key flags.
nid::RunConfig resolve(const CLI::App* app, const RunFlags& flags) {
  nid::RunConfig config;
  if (!flags.preset.empty()) config.apply_preset(flags.preset);
  if (!flags.config_path.empty()) config.apply_file(flags.config_path);
  for (const auto& key : nid::RunConfig::keys()) {
    if (app->count("--" + key) > 0) config.set(key, flags.values.at(key));
  }
  return config;
}

struct Checkpoint {
  nid::EncoderParams params;
  nid::Vocabulary vocab;
};

Checkpoint load_dir(const std::filesystem::path& dir) {
  Checkpoint c{nid::load_checkpoint(dir / "checkpoint.bin"), nid::Vocabulary::load(dir / "vocab.json")};
  if (c.params.vocab_size() != c.vocab.size()) {
    throw nid::BadInput("checkpoint and vocab.json disagree on vocabulary size");
  }
  return c;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw nid::IoError("cannot write " + path.string());
  return out;
}

void print_report(const nid::MetricsReport& report) { std::cout << report.to_json() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"New intent discovery: multi-task pre-training, nearest-neighbor contrastive learning, k-means"};
  app.require_subcommand(1);
  std::string active = "nid";
  std::function<void()> action;

  // synth
  nid::SynthSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic keyword corpus as JSON-lines");
  synth_cmd->add_option("--classes", synth.num_classes, "number of intents")->capture_default_str();
  synth_cmd->add_option("--per-class", synth.per_class, "utterances per intent")->capture_default_str();
  synth_cmd->add_option("--keywords", synth.keywords_per_class, "keywords per intent")->capture_default_str();
  synth_cmd->add_option("--noise-pool", synth.noise_pool_size, "shared noise words")->capture_default_str();
  synth_cmd->add_option("--keyword-rate", synth.keyword_rate, "per-token keyword probability")->capture_default_str();
  synth_cmd->add_option("--min-len", synth.length_range.first, "minimum tokens")->capture_default_str();
  synth_cmd->add_option("--max-len", synth.length_range.second, "maximum tokens")->capture_default_str();
  synth_cmd->add_option("--prefix", synth.prefix, "lowercase label and keyword prefix")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output JSON-lines file")->required();
  synth_cmd->callback([&] {
    action = [&] { nid::save_jsonl(synth_out, nid::synthesize_corpus(synth)); };
  });

  // split
  RunFlags split_flags;
  auto* split_cmd = app.add_subcommand("split", "partition the internal corpus by known-class and labeled ratios");
  add_run_flags(split_cmd, split_flags);
  split_cmd->callback([&] {
    action = [&] {
      const nid::RunConfig config = resolve(split_cmd, split_flags);
      config.validate();
      if (config.out_dir.empty()) throw nid::ConfigError("--out is required");
      const auto bundle = nid::split_by_kcr_lar(nid::load_jsonl(config.internal_path), config.kcr, config.lar,
                                                nid::stage_seed(config.seed, "split"));
      std::filesystem::create_directories(config.out_dir);
      nid::save_jsonl(config.out_dir / "internal_labeled.jsonl", bundle.internal_labeled);
      nid::save_jsonl(config.out_dir / "internal_unlabeled.jsonl", bundle.internal_unlabeled);
      auto gold = open_out(config.out_dir / "unlabeled_gold.jsonl");
      for (std::size_t i = 0; i < bundle.internal_unlabeled.size(); ++i) {
        nlohmann::ordered_json o;
        o["id"] = bundle.internal_unlabeled[i].id;
        o["label"] = bundle.unlabeled_gold[i];
        gold << o.dump() << '\n';
      }
      nlohmann::ordered_json summary;
      summary["kcr"] = bundle.kcr;
      summary["lar"] = bundle.lar;
      summary["known_intents"] = bundle.known_intents;
      summary["unknown_intents"] = bundle.unknown_intents;
      summary["labeled"] = bundle.internal_labeled.size();
      summary["unlabeled"] = bundle.internal_unlabeled.size();
      open_out(config.out_dir / "split.json") << summary.dump(2) << '\n';
      std::cout << summary.dump(2) << '\n';
    };
  });

  // pretrain
  RunFlags pretrain_flags;
  auto* pretrain_cmd = app.add_subcommand("pretrain", "stage 1 only: train, then cluster the stage-1 embeddings");
  add_run_flags(pretrain_cmd, pretrain_flags);
  pretrain_cmd->callback([&] {
    action = [&] {
      nid::RunOptions options;
      options.skip_clnn = true;
      print_report(nid::run_pipeline(resolve(pretrain_cmd, pretrain_flags), options));
    };
  });

  // train-clnn
  RunFlags clnn_flags;
  std::string resume_dir;
  auto* clnn_cmd = app.add_subcommand("train-clnn", "stage 2 from a stage-1 output directory, then cluster");
  add_run_flags(clnn_cmd, clnn_flags);
  clnn_cmd->add_option("--resume", resume_dir, "directory with checkpoint.bin and vocab.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  clnn_cmd->callback([&] {
    action = [&] {
      nid::RunOptions options;
      options.resume_from = resume_dir;
      print_report(nid::run_pipeline(resolve(clnn_cmd, clnn_flags), options));
    };
  });

  // mine
  std::string mine_ckpt;
  std::string mine_data;
  std::string mine_out;
  std::size_t mine_k = 50;
  auto* mine_cmd = app.add_subcommand("mine", "top-K inner-product neighbors of encoded utterances");
  mine_cmd->add_option("--checkpoint", mine_ckpt, "directory with checkpoint.bin and vocab.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  mine_cmd->add_option("--data", mine_data, "JSON-lines utterances")->required()->check(CLI::ExistingFile);
  mine_cmd->add_option("--k", mine_k, "neighbors per utterance")->capture_default_str();
  mine_cmd->add_option("--out", mine_out, "output JSON-lines file")->required();
  mine_cmd->callback([&] {
    action = [&] {
      const Checkpoint c = load_dir(mine_ckpt);
      const auto data = nid::load_jsonl(mine_data);
      const auto index =
          nid::mine_neighbors(nid::normalize_rows(nid::encode_all(c.params, nid::tokenize_all(data, c.vocab))), mine_k);
      auto out = open_out(mine_out);
      for (std::size_t i = 0; i < data.size(); ++i) {
        nlohmann::ordered_json o;
        o["id"] = data[i].id;
        std::vector<std::size_t> ids;
        for (const auto j : index.neighbor_ids[i]) ids.push_back(data[j].id);
        o["neighbors"] = ids;
        out << o.dump() << '\n';
      }
    };
  });

  // cluster
  std::string cluster_ckpt;
  std::string cluster_data;
  std::string cluster_out;
  std::size_t cluster_k = 0;
  std::uint64_t cluster_seed = 0;
  bool cluster_normalize = false;
  nid::KMeansOptions kmeans_options;
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means over encoded utterances");
  cluster_cmd->add_option("--checkpoint", cluster_ckpt, "directory with checkpoint.bin and vocab.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  cluster_cmd->add_option("--data", cluster_data, "JSON-lines utterances")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--k", cluster_k, "clusters (0: number of distinct labels in --data)")->capture_default_str();
  cluster_cmd->add_option("--restarts", kmeans_options.restarts, "k-means++ restarts")->capture_default_str();
  cluster_cmd->add_option("--seed", cluster_seed, "random seed")->capture_default_str();
  cluster_cmd->add_flag("--normalize", cluster_normalize, "L2-normalize embeddings first");
  cluster_cmd->add_option("--out", cluster_out, "output assignments JSON-lines")->required();
  cluster_cmd->callback([&] {
    action = [&] {
      const Checkpoint c = load_dir(cluster_ckpt);
      const auto data = nid::load_jsonl(cluster_data);
      std::size_t k = cluster_k;
      if (k == 0) k = nid::distinct_labels(data).size();
      if (k == 0) throw nid::BadInput("--k is required when --data is unlabeled");
      nid::Matrix h = nid::encode_all(c.params, nid::tokenize_all(data, c.vocab));
      if (cluster_normalize) h = nid::normalize_rows(h);
      const auto assignment = nid::kmeans(h, k, cluster_seed, kmeans_options);
      auto out = open_out(cluster_out);
      for (std::size_t i = 0; i < data.size(); ++i) {
        nlohmann::ordered_json o;
        o["id"] = data[i].id;
        o["cluster"] = assignment.labels[i];
        out << o.dump() << '\n';
      }
    };
  });

  // evaluate
  std::string pred_path;
  std::string gold_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "NMI, ARI and ACC of predicted clusters against gold labels");
  eval_cmd->add_option("--pred", pred_path, "JSON-lines {id, cluster}")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", gold_path, "JSON-lines {id, label}")->required()->check(CLI::ExistingFile);
  eval_cmd->callback([&] {
    action = [&] {
      const auto report = nid::evaluate(pred_path, gold_path);
      nlohmann::ordered_json o;
      o["nmi"] = report.scores.nmi;
      o["ari"] = report.scores.ari;
      o["acc"] = report.scores.acc;
      o["k_used"] = report.k_used;
      std::cout << o.dump(2) << '\n';
    };
  });

  // pipeline
  RunFlags pipeline_flags;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "full run: stage 1, stage 2, k-means, metrics");
  add_run_flags(pipeline_cmd, pipeline_flags);
  pipeline_cmd->callback([&] {
    action = [&] { print_report(nid::run_pipeline(resolve(pipeline_cmd, pipeline_flags))); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (const auto* sub : app.get_subcommands()) active = sub->get_name();
  try {
    action();
  } catch (const nid::StageError& e) {
    std::cerr << "nid " << active << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "nid " << active << ": [" << active << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
