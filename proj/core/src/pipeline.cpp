#include "nid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nid/checkpoint.hpp"
#include "nid/cluster.hpp"
#include "nid/errors.hpp"
#include "nid/mtp.hpp"
#include "nid/neighbors.hpp"

namespace nid {

using ojson = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NID_PATH(KEY, MEMBER)                                                        \
  Field {                                                                            \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = v; },                   \
        [](const RunConfig& c) { return c.MEMBER.string(); }                         \
  }
#define NID_DOUBLE(KEY, MEMBER)                                                      \
  Field {                                                                            \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_double(KEY, v); }, \
        [](const RunConfig& c) { return format_double(c.MEMBER); }                   \
  }
#define NID_UINT(KEY, MEMBER)                                                                        \
  Field {                                                                                            \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = static_cast<decltype(c.MEMBER)>(parse_uint(KEY, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                                  \
  }
#define NID_BOOL(KEY, MEMBER)                                                        \
  Field {                                                                            \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); },  \
        [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      NID_PATH("data.external", external_path),
      NID_PATH("data.internal", internal_path),
      NID_PATH("data.test", test_path),
      NID_PATH("data.dev", dev_path),
      NID_PATH("out", out_dir),
      NID_UINT("seed", seed),
      NID_DOUBLE("split.kcr", kcr),
      NID_DOUBLE("split.lar", lar),
      NID_UINT("encoder.embed", dims.embed),
      NID_UINT("encoder.hidden", dims.hidden),
      NID_UINT("encoder.proj", dims.proj),
      NID_UINT("vocab.min_freq", vocab_min_freq),
      NID_DOUBLE("stage1.lr", stage1_lr),
      NID_DOUBLE("stage1.weight_decay", stage1_weight_decay),
      NID_UINT("stage1.epochs", stage1_epochs),
      NID_UINT("stage1.batch", stage1_batch),
      NID_DOUBLE("stage1.p_mask", stage1_p_mask),
      NID_UINT("stage1.patience", stage1_patience),
      NID_UINT("stage1.known_epochs", stage1_known_epochs),
      NID_DOUBLE("stage1.dev_fraction", stage1_dev_fraction),
      Field{"stage2.k",
            [](RunConfig& c, const std::string& v) {
              if (v == "auto") {
                c.stage2_k.reset();
              } else {
                c.stage2_k = static_cast<std::size_t>(parse_uint("stage2.k", v));
              }
            },
            [](const RunConfig& c) { return c.stage2_k ? std::to_string(*c.stage2_k) : std::string("auto"); }},
      NID_DOUBLE("stage2.tau", stage2_tau),
      NID_UINT("stage2.batch", stage2_batch),
      NID_UINT("stage2.refresh_every", stage2_refresh_every),
      NID_UINT("stage2.epochs", stage2_epochs),
      Field{"stage2.augment", [](RunConfig& c, const std::string& v) { c.stage2_augment = parse_augment(v); },
            [](const RunConfig& c) { return std::string(to_string(c.stage2_augment)); }},
      NID_DOUBLE("stage2.augment_p", stage2_augment_p),
      NID_DOUBLE("stage2.lr", stage2_lr),
      NID_DOUBLE("stage2.weight_decay", stage2_weight_decay),
      NID_UINT("cluster.k", cluster_k),
      NID_UINT("cluster.restarts", cluster_restarts),
      NID_BOOL("cluster.normalize", cluster_normalize),
      NID_BOOL("report.stage_metrics", report_stage_metrics),
      NID_BOOL("report.embeddings", report_embeddings),
      NID_BOOL("report.verbose", report_verbose),
  };
  return table;
}

#undef NID_PATH
#undef NID_DOUBLE
#undef NID_UINT
#undef NID_BOOL

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

class StageTimer {
 public:
  explicit StageTimer(MetricsReport& report) : report_(report) {}

  template <typename F>
  auto run(const std::string& stage, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    report_.stage_log.push_back(stage);
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto out = fn();
        record(stage, start);
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    report_.timings.emplace_back(stage, dt.count());
  }

  MetricsReport& report_;
};

ClusteringScores cluster_and_score(const Matrix& reps, std::size_t k, const std::vector<std::size_t>& gold,
                                   const RunConfig& config, std::uint64_t seed,
                                   std::vector<std::size_t>* labels_out = nullptr) {
  const Matrix points = config.cluster_normalize ? normalize_rows(reps) : reps;
  KMeansOptions opts;
  opts.restarts = config.cluster_restarts;
  const ClusterAssignment assignment = kmeans(points, k, seed, opts);
  if (labels_out) *labels_out = assignment.labels;
  return score_clustering(gold, assignment.labels);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

ojson scores_json(const ClusteringScores& s) {
  ojson o;
  o["nmi"] = s.nmi;
  o["ari"] = s.ari;
  o["acc"] = s.acc;
  return o;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

void RunConfig::apply_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_text(ss.str());
}

void RunConfig::apply_preset(const std::string& name) {
  if (name == "desk") {
    stage1_lr = 1e-3;
    stage2_lr = 1e-3;
    stage1_batch = 64;
    stage2_batch = 64;
    stage2_k.reset();
  } else if (name == "paper-banking" || name == "paper-mcid" || name == "paper-stackoverflow") {
    stage1_lr = 5e-5;
    stage1_batch = 64;
    stage1_patience = 20;
    stage2_batch = 128;
    stage2_tau = 0.07;
    stage2_refresh_every = 5;
    stage2_augment = Augment::kRtr;
    stage2_augment_p = 0.25;
    dims.proj = 128;
    if (name == "paper-stackoverflow") {
      stage2_lr = 1e-6;
      stage2_k = 500;
    } else {
      stage2_lr = 1e-5;
      stage2_k = 50;
    }
  } else {
    throw ConfigError("unknown preset '" + name + "' (desk, paper-banking, paper-mcid, paper-stackoverflow)");
  }
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(*this);
    out += '\n';
  }
  return out;
}

std::string RunConfig::hash() const {
  // The output directory does not affect results.
  RunConfig copy = *this;
  copy.out_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(copy.to_text())));
  return buf;
}

void RunConfig::validate() const {
  if (!(kcr >= 0.0 && kcr <= 1.0)) throw ConfigError("split.kcr must lie in [0, 1]");
  if (!(lar > 0.0 && lar <= 1.0)) throw ConfigError("split.lar must lie in (0, 1]");
  if (dims.embed == 0 || dims.hidden == 0 || dims.proj == 0) throw ConfigError("encoder dimensions must be positive");
  if (vocab_min_freq == 0) throw ConfigError("vocab.min_freq must be positive");
  if (!(stage1_lr > 0.0) || !(stage2_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (stage1_batch == 0 || stage2_batch == 0) throw ConfigError("batch sizes must be positive");
  if (!(stage1_p_mask >= 0.0 && stage1_p_mask <= 1.0)) throw ConfigError("stage1.p_mask must lie in [0, 1]");
  if (!(stage1_dev_fraction >= 0.0 && stage1_dev_fraction < 1.0)) {
    throw ConfigError("stage1.dev_fraction must lie in [0, 1)");
  }
  if (!(stage2_tau > 0.0)) throw ConfigError("stage2.tau must be positive");
  if (stage2_refresh_every == 0) throw ConfigError("stage2.refresh_every must be at least 1");
  if (!(stage2_augment_p >= 0.0 && stage2_augment_p <= 1.0)) throw ConfigError("stage2.augment_p must lie in [0, 1]");
  if (cluster_restarts == 0) throw ConfigError("cluster.restarts must be positive");
}

std::string MetricsReport::to_json(bool include_timings) const {
  ojson o;
  o["nmi"] = scores.nmi;
  o["ari"] = scores.ari;
  o["acc"] = scores.acc;
  o["k_used"] = k_used;
  o["neighbors_k"] = neighbors_k;
  o["kcr"] = kcr;
  o["lar"] = lar;
  o["seed"] = seed;
  o["config_hash"] = config_hash;
  o["stages"] = stage_log;
  ojson stages = ojson::object();
  for (const auto& [name, s] : stage_scores) stages[name] = scores_json(s);
  o["stage_scores"] = stages;
  if (include_timings) {
    ojson t = ojson::object();
    for (const auto& [name, secs] : timings) t[name] = secs;
    o["timings"] = t;
  }
  return o.dump(2);
}

std::uint64_t stage_seed(std::uint64_t root, const std::string& stage) { return Rng::derive_seed(root, stage); }

std::vector<TokenSeq> tokenize_all(const std::vector<Utterance>& data, const Vocabulary& vocab) {
  std::vector<TokenSeq> out;
  out.reserve(data.size());
  for (const auto& u : data) out.push_back(tokenize(u.text, vocab));
  return out;
}

MetricsReport run_pipeline(const RunConfig& config, const RunOptions& options) {
  MetricsReport scratch;
  StageTimer timer(scratch);
  auto load = [&](const std::filesystem::path& p) {
    return timer.run("load", [&] { return load_jsonl(p); });
  };
  if (config.external_path.empty() || config.internal_path.empty()) {
    throw StageError("load", "data.external and data.internal are required");
  }
  const auto external = load(config.external_path);
  const auto internal = load(config.internal_path);
  const auto test = config.test_path.empty() ? std::vector<Utterance>{} : load(config.test_path);
  MetricsReport report = run_pipeline(config, external, internal, test, options);
  report.timings.insert(report.timings.begin(), scratch.timings.begin(), scratch.timings.end());
  report.stage_log.insert(report.stage_log.begin(), "load");
  return report;
}

MetricsReport run_pipeline(const RunConfig& config, const std::vector<Utterance>& external,
                           const std::vector<Utterance>& internal, const std::vector<Utterance>& test,
                           const RunOptions& options) {
  MetricsReport report;
  report.kcr = config.kcr;
  report.lar = config.lar;
  report.seed = config.seed;
  report.config_hash = config.hash();
  StageTimer timer(report);
  timer.run("config", [&] { config.validate(); });

  const bool write = !config.out_dir.empty();
  if (write) std::filesystem::create_directories(config.out_dir);
  auto out_path = [&](const char* name) { return config.out_dir / name; };

  const DatasetBundle bundle = timer.run("split", [&] {
    DatasetBundle b = split_by_kcr_lar(internal, config.kcr, config.lar, stage_seed(config.seed, "split"));
    for (const auto& u : external) {
      if (!u.label) throw SplitError("external utterance " + std::to_string(u.id) + " is unlabeled");
    }
    b.external_labeled = external;
    b.test = test;
    return b;
  });

  const bool resume = !options.resume_from.empty();
  const Vocabulary vocab = timer.run("vocab", [&] {
    if (resume) return Vocabulary::load(options.resume_from / "vocab.json");
    std::vector<std::string> texts;
    for (const auto& u : bundle.external_labeled) texts.push_back(u.text);
    for (const auto& u : internal) texts.push_back(u.text);
    return build_vocab(texts, config.vocab_min_freq);
  });

  // Tokenized views of every data source.
  const auto ext_labels = distinct_labels(bundle.external_labeled);
  std::vector<LabeledSeq> ext_seqs;
  std::vector<Utterance> internal_all = bundle.internal_all();
  std::vector<TokenSeq> internal_seqs;
  std::vector<Utterance> eval_set;
  std::vector<std::string> eval_gold;
  timer.run("tokenize", [&] {
    for (const auto& u : bundle.external_labeled) {
      const auto idx = static_cast<std::size_t>(
          std::lower_bound(ext_labels.begin(), ext_labels.end(), *u.label) - ext_labels.begin());
      ext_seqs.push_back({tokenize(u.text, vocab), idx});
    }
    internal_seqs = tokenize_all(internal_all, vocab);
    if (!bundle.test.empty()) {
      eval_set = bundle.test;
      for (const auto& u : eval_set) {
        if (!u.label) throw BadInput("test utterance " + std::to_string(u.id) + " is unlabeled");
        eval_gold.push_back(*u.label);
      }
    } else {
      eval_set = bundle.internal_unlabeled;
      eval_gold = bundle.unlabeled_gold;
    }
    if (eval_set.empty()) throw BadInput("evaluation set is empty");
  });
  const std::vector<TokenSeq> eval_seqs = tokenize_all(eval_set, vocab);
  const std::vector<std::size_t> gold = encode_labels(eval_gold);
  const std::size_t gold_classes = std::set<std::string>(eval_gold.begin(), eval_gold.end()).size();
  report.k_used = config.cluster_k > 0 ? config.cluster_k : gold_classes;

  // Known-intent class per internal_all position.
  const auto& known = bundle.known_intents;
  auto known_index = [&](const std::string& label) -> std::optional<std::size_t> {
    const auto it = std::lower_bound(known.begin(), known.end(), label);
    if (it == known.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - known.begin());
  };
  InstanceLabels known_labels;
  std::vector<std::vector<std::size_t>> members(known.size());
  if (config.kcr > 0.0) {
    known_labels.assign(internal_all.size(), std::nullopt);
    for (std::size_t i = 0; i < bundle.internal_labeled.size(); ++i) {
      const auto idx = known_index(*internal_all[i].label);
      known_labels[i] = idx;
      members[*idx].push_back(i);
    }
  }

  const std::uint64_t kmeans_seed = stage_seed(config.seed, "kmeans");
  EncoderParams params;
  if (resume) {
    params = timer.run("resume", [&] {
      EncoderParams p = load_checkpoint(options.resume_from / "checkpoint.bin");
      if (p.vocab_size() != vocab.size()) throw BadInput("checkpoint and vocab.json disagree on vocabulary size");
      return p;
    });
  } else {
    params = timer.run("init", [&] {
      return init_params(config.dims, ext_labels.size(), vocab.size(), stage_seed(config.seed, "init"));
    });
    if (config.report_stage_metrics) {
      report.stage_scores["init"] =
          cluster_and_score(encode_all(params, eval_seqs), report.k_used, gold, config, kmeans_seed);
    }
  }

  MtpConfig mtp;
  mtp.epochs = config.stage1_epochs;
  mtp.batch_size = config.stage1_batch;
  mtp.p_mask = config.stage1_p_mask;
  mtp.adam.lr = config.stage1_lr;
  mtp.adam.weight_decay = config.stage1_weight_decay;
  if (!resume) {
    const TrainLog mtp_log = timer.run("mtp", [&] {
      return mtp_pretrain(params, ext_seqs, internal_seqs, mtp, stage_seed(config.seed, "mtp"));
    });
    if (write) {
      auto out = open_out(out_path("mtp_log.jsonl"));
      mtp_log.write_jsonl(out);
    }
  }

  if (!resume && config.kcr > 0.0) {
    timer.run("mtp_known", [&] {
      std::vector<LabeledSeq> train;
      std::vector<LabeledSeq> dev;
      if (!config.dev_path.empty()) {
        for (const auto& u : load_jsonl(config.dev_path)) {
          if (!u.label) continue;
          if (const auto idx = known_index(*u.label)) dev.push_back({tokenize(u.text, vocab), *idx});
        }
        for (std::size_t i = 0; i < bundle.internal_labeled.size(); ++i) {
          train.push_back({internal_seqs[i], *known_labels[i]});
        }
      } else {
        Rng rng(stage_seed(config.seed, "dev-holdout"));
        for (std::size_t c = 0; c < members.size(); ++c) {
          auto m = members[c];
          shuffle(m, rng);
          const auto hold = static_cast<std::size_t>(config.stage1_dev_fraction * static_cast<double>(m.size()));
          for (std::size_t j = 0; j < m.size(); ++j) {
            (j < hold ? dev : train).push_back({internal_seqs[m[j]], c});
          }
        }
      }
      reset_classifier(params, known.size(), stage_seed(config.seed, "classifier"));
      MtpConfig phase_b = mtp;
      phase_b.epochs = config.stage1_known_epochs;
      const TrainLog log = continue_pretrain_known(params, train, internal_seqs, dev, phase_b,
                                                   config.stage1_patience, stage_seed(config.seed, "mtp_known"));
      if (write) {
        auto out = open_out(out_path("mtp_known_log.jsonl"));
        log.write_jsonl(out);
      }
    });
  }
  if (config.report_stage_metrics && !resume) {
    report.stage_scores["mtp"] = cluster_and_score(encode_all(params, eval_seqs), report.k_used, gold, config, kmeans_seed);
  }

  ClnnConfig clnn;
  const std::size_t internal_classes = distinct_labels(internal).size();
  clnn.k = config.stage2_k ? *config.stage2_k : estimate_k(internal_all.size(), internal_classes);
  clnn.tau = config.stage2_tau;
  clnn.refresh_every = config.stage2_refresh_every;
  clnn.augment = {config.stage2_augment, config.stage2_augment_p};
  clnn.epochs = config.stage2_epochs;
  clnn.batch_size = config.stage2_batch;
  clnn.adam.lr = config.stage2_lr;
  clnn.adam.weight_decay = config.stage2_weight_decay;
  report.neighbors_k = options.skip_clnn ? 0 : clnn.k;
  if (!options.skip_clnn) timer.run("clnn", [&] {
    std::ofstream trace;
    ClnnObserver observer;
    if (write && config.report_verbose) {
      trace = open_out(out_path("batch_trace.jsonl"));
      // First batch of every epoch.
      observer = [&trace, last_epoch = std::size_t(-1)](const ClnnStep& s) mutable {
        if (s.epoch == last_epoch) return;
        last_epoch = s.epoch;
        trace << "{\"epoch\":" << s.epoch << ",\"step\":" << s.step << ",\"loss\":" << format_double(s.loss)
              << ",\"batch\":" << adjacency_to_json(s.batch) << "}\n";
      };
    }
    const ClnnLog log = clnn_train(params, internal_seqs, known_labels, clnn, vocab,
                                   stage_seed(config.seed, "clnn"), observer);
    if (write) {
      auto out = open_out(out_path("clnn_log.jsonl"));
      log.write_jsonl(out);
    }
  });

  std::vector<std::size_t> assignment;
  timer.run("cluster", [&] {
    report.scores = cluster_and_score(encode_all(params, eval_seqs), report.k_used, gold, config, kmeans_seed, &assignment);
  });

  if (write) {
    timer.run("write", [&] {
      {
        auto out = open_out(out_path("assignments.jsonl"));
        for (std::size_t i = 0; i < eval_set.size(); ++i) {
          ojson o;
          o["id"] = eval_set[i].id;
          o["cluster"] = assignment[i];
          out << o.dump() << '\n';
        }
      }
      if (report.neighbors_k > 0) {
        const NeighborIndex index = mine_neighbors(normalize_rows(encode_all(params, internal_seqs)), clnn.k);
        auto out = open_out(out_path("neighbors.jsonl"));
        index.write_jsonl(out);
      }
      save_checkpoint(out_path("checkpoint.bin"), params);
      vocab.save(out_path("vocab.json"));
      if (config.report_embeddings) export_embeddings(params, vocab, eval_set, out_path("embeddings.csv"));
      auto cfg = open_out(out_path("config.txt"));
      cfg << config.to_text();
    });
    auto out = open_out(out_path("report.json"));
    out << report.to_json() << '\n';
  }
  return report;
}

std::map<std::size_t, std::string> read_id_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::size_t, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw LoadError(line_no, "malformed JSON");
    std::size_t id = record++;
    if (const auto it = obj.find("id"); it != obj.end()) {
      if (!it->is_number_unsigned()) throw LoadError(line_no, "\"id\" must be a non-negative integer");
      id = it->get<std::size_t>();
    }
    std::string label;
    if (const auto c = obj.find("cluster"); c != obj.end() && !c->is_null()) {
      label = c->is_string() ? c->get<std::string>() : c->dump();
    } else if (const auto l = obj.find("label"); l != obj.end() && !l->is_null()) {
      label = l->is_string() ? l->get<std::string>() : l->dump();
    } else {
      throw LoadError(line_no, "expected \"cluster\" or \"label\"");
    }
    if (!out.emplace(id, std::move(label)).second) throw LoadError(line_no, "duplicate id " + std::to_string(id));
  }
  return out;
}

MetricsReport evaluate(const std::map<std::size_t, std::string>& pred,
                       const std::map<std::size_t, std::string>& gold) {
  std::vector<std::size_t> diff;
  for (const auto& [id, _] : pred) {
    if (!gold.contains(id)) diff.push_back(id);
  }
  for (const auto& [id, _] : gold) {
    if (!pred.contains(id)) diff.push_back(id);
  }
  if (!diff.empty()) {
    std::sort(diff.begin(), diff.end());
    throw IdMismatch(std::move(diff));
  }
  std::vector<std::string> p;
  std::vector<std::string> g;
  for (const auto& [id, label] : gold) {
    g.push_back(label);
    p.push_back(pred.at(id));
  }
  MetricsReport report;
  const auto gi = encode_labels(g);
  const auto pi = encode_labels(p);
  report.scores = score_clustering(gi, pi);
  report.k_used = std::set<std::string>(p.begin(), p.end()).size();
  report.stage_log = {"evaluate"};
  return report;
}

MetricsReport evaluate(const std::filesystem::path& pred_path, const std::filesystem::path& gold_path) {
  return evaluate(read_id_labels(pred_path), read_id_labels(gold_path));
}

void export_embeddings(const EncoderParams& params, const Vocabulary& vocab, const std::vector<Utterance>& data,
                       const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write " + out_path.string());
  const std::size_t d = params.dims().hidden;
  out << "id";
  for (std::size_t j = 0; j < d; ++j) out << ",dim_" << j;
  out << '\n';
  char buf[32];
  for (const auto& u : data) {
    const Vector h = encode(params, tokenize(u.text, vocab));
    out << u.id;
    for (Eigen::Index j = 0; j < h.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", h[j]);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + out_path.string());
}

}  // namespace nid
