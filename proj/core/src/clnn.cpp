#include "nid/clnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

std::string_view to_string(Augment method) {
  switch (method) {
    case Augment::kRtr: return "rtr";
    case Augment::kSwr: return "swr";
    case Augment::kShuffle: return "shuffle";
    case Augment::kDropout: return "dropout";
  }
  return "rtr";
}

Augment parse_augment(std::string_view name) {
  if (name == "rtr") return Augment::kRtr;
  if (name == "swr") return Augment::kSwr;
  if (name == "shuffle") return Augment::kShuffle;
  if (name == "dropout") return Augment::kDropout;
  throw BadInput("unknown augmentation '" + std::string(name) + "' (rtr, swr, shuffle, dropout)");
}

AugmentFn make_augment(const AugmentSpec& spec, const Vocabulary& vocab, std::size_t embed_dim) {
  const double p = spec.p;
  switch (spec.method) {
    case Augment::kRtr:
      return [&vocab, p](const TokenSeq& s, Rng& rng) { return View{rtr_augment(s, p, vocab, rng), {}}; };
    case Augment::kSwr:
      return [&vocab](const TokenSeq& s, Rng& rng) { return View{swr_augment(s, vocab, rng), {}}; };
    case Augment::kShuffle:
      return [](const TokenSeq& s, Rng& rng) { return View{shuffle_augment(s, rng), {}}; };
    case Augment::kDropout:
      return [p, embed_dim](const TokenSeq& s, Rng& rng) { return View{s, dropout_mask(embed_dim, p, rng)}; };
  }
  throw BadInput("unknown augmentation");
}

Adjacency build_adjacency(std::span<const std::size_t> origin, const NeighborIndex& index,
                          const InstanceLabels& labels) {
  const std::size_t m = origin.size();
  if (m % 2 != 0) throw BadInput("an augmented batch holds an even number of views");
  for (const auto o : origin) {
    if (o >= index.size()) throw BadInput("view origin " + std::to_string(o) + " outside the neighbor index");
    if (!labels.empty() && o >= labels.size()) throw BadInput("view origin outside the label map");
  }
  std::unordered_map<std::size_t, std::vector<std::size_t>> views_of;
  for (std::size_t v = 0; v < m; ++v) views_of[origin[v]].push_back(v);

  Adjacency a = Adjacency::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  auto mark_origin = [&](std::size_t row, std::size_t instance) {
    const auto it = views_of.find(instance);
    if (it == views_of.end()) return;
    for (const auto v : it->second) a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(v)) = 1;
  };
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    // (a) pair partner
    a(r, static_cast<Eigen::Index>(i ^ 1u)) = 1;
    // (b) same origin or origin in N(origin(i)); directional
    mark_origin(i, origin[i]);
    for (const auto nb : index.neighbor_ids[origin[i]]) mark_origin(i, nb);
    // (c) shared known label
    if (!labels.empty() && labels[origin[i]]) {
      for (std::size_t j = 0; j < m; ++j) {
        if (labels[origin[j]] && *labels[origin[j]] == *labels[origin[i]]) a(r, static_cast<Eigen::Index>(j)) = 1;
      }
    }
    a(r, r) = 0;
  }
  return a;
}

AugmentedBatch build_batch(std::span<const std::size_t> anchors, std::span<const TokenSeq> data,
                           const NeighborIndex& index, const InstanceLabels& labels,
                           const AugmentFn& augment, Rng& rng) {
  {
    std::vector<std::size_t> sorted(anchors.begin(), anchors.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw BadInput("anchors must be distinct");
  }
  AugmentedBatch batch;
  batch.anchors.assign(anchors.begin(), anchors.end());
  batch.views.reserve(2 * anchors.size());
  batch.origin.reserve(2 * anchors.size());
  for (const auto a : anchors) {
    if (a >= index.size() || a >= data.size()) throw BadInput("anchor " + std::to_string(a) + " out of range");
    const auto& hood = index.neighbor_ids[a];
    const std::size_t nb = hood.empty() ? a : hood[rng.index(hood.size())];
    batch.views.push_back(augment(data[a], rng));
    batch.views.push_back(augment(data[nb], rng));
    batch.origin.push_back(a);
    batch.origin.push_back(nb);
  }
  batch.adjacency = build_adjacency(batch.origin, index, labels);
  return batch;
}

namespace {

struct RowStats {
  std::vector<double> logits;  // s_ik, k != i
  double lse = 0.0;
  std::size_t positives = 0;
};

void check_shapes(const Matrix& z, const Adjacency& adjacency, double tau) {
  if (!(tau > 0.0)) throw BadInput("temperature must be positive");
  if (z.rows() < 2) throw BadInput("contrastive loss needs at least 2 views");
  if (adjacency.rows() != z.rows() || adjacency.cols() != z.rows()) throw BadInput("adjacency shape mismatch");
}

RowStats row_stats(const Matrix& z, const Adjacency& adjacency, double tau, Eigen::Index i) {
  const Eigen::Index m = z.rows();
  RowStats st;
  st.logits.assign(static_cast<std::size_t>(m), 0.0);
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k == i) continue;
    const double s = z.row(i).dot(z.row(k)) / tau;
    st.logits[static_cast<std::size_t>(k)] = s;
    mx = std::max(mx, s);
    if (adjacency(i, k)) ++st.positives;
  }
  if (st.positives == 0) throw EmptyPositiveRow(static_cast<std::size_t>(i));
  double sum = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k != i) sum += std::exp(st.logits[static_cast<std::size_t>(k)] - mx);
  }
  st.lse = mx + std::log(sum);
  return st;
}

}  // namespace

double contrastive_loss(const Matrix& z, const Adjacency& adjacency, double tau) {
  check_shapes(z, adjacency, tau);
  const Eigen::Index m = z.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const RowStats st = row_stats(z, adjacency, tau, i);
    double pos = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i && adjacency(i, j)) pos += st.lse - st.logits[static_cast<std::size_t>(j)];
    }
    total += pos / static_cast<double>(st.positives);
  }
  return total / static_cast<double>(m);
}

Matrix contrastive_grad_unit(const Matrix& z, const Adjacency& adjacency, double tau) {
  check_shapes(z, adjacency, tau);
  const Eigen::Index m = z.rows();
  // g(i,k) = dL/ds_ik with s_ik = z_i.z_k / tau.
  Matrix g = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const RowStats st = row_stats(z, adjacency, tau, i);
    const double inv_pos = 1.0 / static_cast<double>(st.positives);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      const double p = std::exp(st.logits[static_cast<std::size_t>(k)] - st.lse);
      g(i, k) = (p - (adjacency(i, k) ? inv_pos : 0.0)) / static_cast<double>(m);
    }
  }
  return (g + g.transpose()) * z / tau;
}

ContrastiveResult contrastive_grad(const Matrix& v, const Adjacency& adjacency, double tau) {
  Matrix z(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) z.row(i) = v.row(i) / (v.row(i).norm() + kNormEps);
  ContrastiveResult out;
  out.loss = contrastive_loss(z, adjacency, tau);
  const Matrix gz = contrastive_grad_unit(z, adjacency, tau);
  out.grad.resize(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out.grad.row(i) = normalize_backward(v.row(i).transpose(), gz.row(i).transpose()).transpose();
  }
  return out;
}

double clnn_batch_loss(const EncoderParams& params, const AugmentedBatch& batch, double tau,
                       EncoderParams* grads, Matrix* z_out) {
  const std::size_t m = batch.size();
  std::vector<EncodeTrace> enc(m);
  std::vector<ProjectTrace> proj(m);
  Matrix v(static_cast<Eigen::Index>(m), params.proj2_w.rows());
  for (std::size_t i = 0; i < m; ++i) {
    enc[i] = encode_traced(params, batch.views[i].seq.ids, batch.views[i].pooled_mask);
    proj[i] = project_traced(params, enc[i].h);
    v.row(static_cast<Eigen::Index>(i)) = proj[i].v.transpose();
  }
  const ContrastiveResult res = contrastive_grad(v, batch.adjacency, tau);
  if (z_out) {
    z_out->resize(v.rows(), v.cols());
    for (std::size_t i = 0; i < m; ++i) z_out->row(static_cast<Eigen::Index>(i)) = proj[i].z.transpose();
  }
  if (grads) {
    for (std::size_t i = 0; i < m; ++i) {
      const Vector dv = res.grad.row(static_cast<Eigen::Index>(i)).transpose();
      const Vector dh = backprop_project(params, enc[i].h, proj[i], dv, *grads);
      backprop_encode(params, batch.views[i].seq.ids, enc[i], batch.views[i].pooled_mask, dh, *grads);
    }
  }
  return res.loss;
}

void ClnnConfig::validate() const {
  if (!(tau > 0.0)) throw BadInput("temperature must be positive");
  if (refresh_every == 0) throw BadInput("refresh_every must be at least 1");
  if (batch_size == 0) throw BadInput("batch size must be positive");
  if (!(augment.p >= 0.0 && augment.p <= 1.0)) throw BadInput("augmentation probability must lie in [0, 1]");
  if (augment.method == Augment::kDropout && augment.p >= 1.0) throw BadInput("dropout probability must be < 1");
}

void ClnnLog::write_jsonl(std::ostream& out) const {
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    nlohmann::ordered_json obj;
    obj["epoch"] = e;
    obj["loss"] = epoch_loss[e];
    obj["refreshed"] = std::find(refresh_epochs.begin(), refresh_epochs.end(), e) != refresh_epochs.end();
    out << obj.dump() << '\n';
  }
}

ClnnLog clnn_train(EncoderParams& params, std::span<const TokenSeq> data,
                   const InstanceLabels& labels, const ClnnConfig& config, const Vocabulary& vocab,
                   std::uint64_t seed, const ClnnObserver& observer) {
  config.validate();
  const std::size_t n = data.size();
  if (n == 0) throw InvalidCall("contrastive training needs data");
  if (config.k >= n) throw InvalidCall("neighborhood size must be smaller than the data set");
  if (!labels.empty() && labels.size() != n) throw InvalidCall("label map must cover every instance");

  Rng rng(seed);
  const AugmentFn augment = make_augment(config.augment, vocab, params.dims().embed);
  OptimizerState state = OptimizerState::for_params(params);
  constexpr unsigned kGroups = kGroupEncoder | kGroupProjection;

  ClnnLog log;
  NeighborIndex index;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch % config.refresh_every == 0) {
      if (config.k == 0) {
        index = NeighborIndex{};
        index.neighbor_ids.assign(n, {});
      } else {
        index = mine_neighbors(normalize_rows(encode_all(params, data)), config.k);
      }
      index.built_at_epoch = epoch;
      log.refresh_epochs.push_back(epoch);
    }
    shuffle(order, rng);
    double epoch_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      const std::span<const std::size_t> anchors(order.data() + start, count);
      const AugmentedBatch batch = build_batch(anchors, data, index, labels, augment, rng);
      EncoderParams grads = EncoderParams::zeros_like(params);
      Matrix z;
      const double loss = clnn_batch_loss(params, batch, config.tau, &grads, &z);
      if (observer) observer(ClnnStep{epoch, step, batch, z, loss});
      adamw_step(params, grads, state, config.adam, kGroups);
      log.step_loss.push_back(loss);
      epoch_sum += loss;
      ++batches;
      ++step;
    }
    log.epoch_loss.push_back(epoch_sum / static_cast<double>(batches));
  }
  return log;
}

std::string adjacency_to_json(const AugmentedBatch& batch) {
  nlohmann::ordered_json obj;
  obj["origin"] = batch.origin;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < batch.adjacency.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < batch.adjacency.cols(); ++j) row.push_back(int{batch.adjacency(i, j)});
    rows.push_back(std::move(row));
  }
  obj["adjacency"] = std::move(rows);
  return obj.dump();
}

}  // namespace nid
