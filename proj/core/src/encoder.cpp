#include "nid/encoder.hpp"

#include <cmath>
#include <type_traits>

#include "nid/errors.hpp"

namespace nid {

namespace {

void glorot(Matrix& w, std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
            Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  w.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);
}

// Affine map out x in: fan_in = in, fan_out = out.
void affine(Matrix& w, Vector& b, std::size_t out, std::size_t in, Rng& rng) {
  glorot(w, out, in, in, out, rng);
  b = Vector::Zero(static_cast<Eigen::Index>(out));
}

template <typename T>
bool same(const T& a, const T& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

EncoderDims EncoderParams::dims() const {
  return {static_cast<std::size_t>(embedding.cols()), static_cast<std::size_t>(hidden1_w.rows()),
          static_cast<std::size_t>(proj2_w.rows())};
}

namespace {

template <typename Self>
auto collect_tensors(Self& s) {
  using T = std::conditional_t<std::is_const_v<Self>, const double, double>;
  using View = BasicTensorView<T>;
  auto mat = [](const char* name, auto& m, ParamGroup g) {
    return View{name, m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), g};
  };
  auto vec = [](const char* name, auto& v, ParamGroup g) {
    return View{name, v.data(), static_cast<std::size_t>(v.size()), 1, g};
  };
  return std::vector<View>{
      mat("embedding", s.embedding, kGroupEncoder),
      mat("hidden1.weight", s.hidden1_w, kGroupEncoder),
      vec("hidden1.bias", s.hidden1_b, kGroupEncoder),
      mat("hidden2.weight", s.hidden2_w, kGroupEncoder),
      vec("hidden2.bias", s.hidden2_b, kGroupEncoder),
      mat("proj1.weight", s.proj1_w, kGroupProjection),
      vec("proj1.bias", s.proj1_b, kGroupProjection),
      mat("proj2.weight", s.proj2_w, kGroupProjection),
      vec("proj2.bias", s.proj2_b, kGroupProjection),
      mat("classifier.weight", s.cls_w, kGroupClassifier),
      vec("classifier.bias", s.cls_b, kGroupClassifier),
      mat("mlm.weight", s.mlm_w, kGroupMlm),
      vec("mlm.bias", s.mlm_b, kGroupMlm),
  };
}

}  // namespace

std::vector<TensorView> EncoderParams::tensors() { return collect_tensors(*this); }
std::vector<ConstTensorView> EncoderParams::tensors() const { return collect_tensors(*this); }

EncoderParams EncoderParams::zeros_like(const EncoderParams& o) {
  EncoderParams z;
  z.embedding = Matrix::Zero(o.embedding.rows(), o.embedding.cols());
  z.hidden1_w = Matrix::Zero(o.hidden1_w.rows(), o.hidden1_w.cols());
  z.hidden1_b = Vector::Zero(o.hidden1_b.size());
  z.hidden2_w = Matrix::Zero(o.hidden2_w.rows(), o.hidden2_w.cols());
  z.hidden2_b = Vector::Zero(o.hidden2_b.size());
  z.proj1_w = Matrix::Zero(o.proj1_w.rows(), o.proj1_w.cols());
  z.proj1_b = Vector::Zero(o.proj1_b.size());
  z.proj2_w = Matrix::Zero(o.proj2_w.rows(), o.proj2_w.cols());
  z.proj2_b = Vector::Zero(o.proj2_b.size());
  z.cls_w = Matrix::Zero(o.cls_w.rows(), o.cls_w.cols());
  z.cls_b = Vector::Zero(o.cls_b.size());
  z.mlm_w = Matrix::Zero(o.mlm_w.rows(), o.mlm_w.cols());
  z.mlm_b = Vector::Zero(o.mlm_b.size());
  return z;
}

bool EncoderParams::all_finite() const {
  return embedding.allFinite() && hidden1_w.allFinite() && hidden1_b.allFinite() &&
         hidden2_w.allFinite() && hidden2_b.allFinite() && proj1_w.allFinite() &&
         proj1_b.allFinite() && proj2_w.allFinite() && proj2_b.allFinite() && cls_w.allFinite() &&
         cls_b.allFinite() && mlm_w.allFinite() && mlm_b.allFinite();
}

bool EncoderParams::operator==(const EncoderParams& o) const {
  return same(embedding, o.embedding) && same(hidden1_w, o.hidden1_w) && same(hidden1_b, o.hidden1_b) &&
         same(hidden2_w, o.hidden2_w) && same(hidden2_b, o.hidden2_b) && same(proj1_w, o.proj1_w) &&
         same(proj1_b, o.proj1_b) && same(proj2_w, o.proj2_w) && same(proj2_b, o.proj2_b) &&
         same(cls_w, o.cls_w) && same(cls_b, o.cls_b) && same(mlm_w, o.mlm_w) && same(mlm_b, o.mlm_b);
}

EncoderParams init_params(const EncoderDims& dims, std::size_t num_classes, std::size_t vocab_size,
                          std::uint64_t seed) {
  if (dims.embed == 0 || dims.hidden == 0 || dims.proj == 0 || num_classes == 0 || vocab_size == 0) {
    throw BadInput("encoder dimensions, class count and vocabulary size must be positive");
  }
  Rng rng(seed);
  EncoderParams p;
  glorot(p.embedding, vocab_size, dims.embed, vocab_size, dims.embed, rng);
  affine(p.hidden1_w, p.hidden1_b, dims.hidden, dims.embed, rng);
  affine(p.hidden2_w, p.hidden2_b, dims.hidden, dims.hidden, rng);
  affine(p.proj1_w, p.proj1_b, dims.hidden, dims.hidden, rng);
  affine(p.proj2_w, p.proj2_b, dims.proj, dims.hidden, rng);
  affine(p.cls_w, p.cls_b, num_classes, dims.hidden, rng);
  affine(p.mlm_w, p.mlm_b, vocab_size, dims.hidden, rng);
  return p;
}

void reset_classifier(EncoderParams& params, std::size_t num_classes, std::uint64_t seed) {
  if (num_classes == 0) throw BadInput("classifier needs at least one class");
  Rng rng(seed);
  affine(params.cls_w, params.cls_b, num_classes, static_cast<std::size_t>(params.hidden1_w.rows()), rng);
}

Vector encode(const EncoderParams& params, const TokenSeq& seq) { return encode(params, std::span(seq.ids)); }

Vector encode(const EncoderParams& params, std::span<const TokenId> ids) {
  return encode_traced(params, ids).h;
}

Matrix encode_all(const EncoderParams& params, std::span<const TokenSeq> data) {
  Matrix out(static_cast<Eigen::Index>(data.size()), params.hidden1_w.rows());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = encode(params, data[i]).transpose();
  }
  return out;
}

EncodeTrace encode_traced(const EncoderParams& params, std::span<const TokenId> ids,
                          const Vector& pooled_mask) {
  if (ids.empty()) throw BadInput("cannot encode an empty sequence");
  EncodeTrace t;
  t.pooled = Vector::Zero(params.embedding.cols());
  for (const TokenId id : ids) {
    if (id < 0 || id >= params.embedding.rows()) throw BadInput("token id " + std::to_string(id) + " outside the vocabulary");
    t.pooled += params.embedding.row(id).transpose();
  }
  t.pooled /= static_cast<double>(ids.size());
  if (pooled_mask.size() > 0) t.pooled.array() *= pooled_mask.array();
  t.hidden1 = (params.hidden1_w * t.pooled + params.hidden1_b).array().tanh().matrix();
  t.h = (params.hidden2_w * t.hidden1 + params.hidden2_b).array().tanh().matrix();
  return t;
}

void backprop_encode(const EncoderParams& params, std::span<const TokenId> ids,
                     const EncodeTrace& trace, const Vector& pooled_mask, const Vector& dh,
                     EncoderParams& grads) {
  const Vector dpre2 = dh.array() * (1.0 - trace.h.array().square());
  grads.hidden2_w.noalias() += dpre2 * trace.hidden1.transpose();
  grads.hidden2_b += dpre2;
  const Vector dpre1 = (params.hidden2_w.transpose() * dpre2).array() * (1.0 - trace.hidden1.array().square());
  grads.hidden1_w.noalias() += dpre1 * trace.pooled.transpose();
  grads.hidden1_b += dpre1;
  Vector dpooled = params.hidden1_w.transpose() * dpre1;
  if (pooled_mask.size() > 0) dpooled.array() *= pooled_mask.array();
  dpooled /= static_cast<double>(ids.size());
  for (const TokenId id : ids) grads.embedding.row(id) += dpooled.transpose();
}

ProjectTrace project_traced(const EncoderParams& params, const Vector& h) {
  ProjectTrace t;
  t.hidden = (params.proj1_w * h + params.proj1_b).array().tanh().matrix();
  t.v = params.proj2_w * t.hidden + params.proj2_b;
  t.z = t.v / (t.v.norm() + kNormEps);
  return t;
}

Vector project(const EncoderParams& params, const Vector& h) { return project_traced(params, h).z; }

Vector normalize_backward(const Vector& v, const Vector& dz) {
  const double n = v.norm();
  const double d = n + kNormEps;
  if (n == 0.0) return dz / d;
  // dz_k/dv_j = delta_kj / d - v_k v_j / (n d^2)
  return dz / d - v * (v.dot(dz) / (n * d * d));
}

Vector backprop_project(const EncoderParams& params, const Vector& h, const ProjectTrace& trace,
                        const Vector& dv, EncoderParams& grads) {
  grads.proj2_w.noalias() += dv * trace.hidden.transpose();
  grads.proj2_b += dv;
  const Vector dpre = (params.proj2_w.transpose() * dv).array() * (1.0 - trace.hidden.array().square());
  grads.proj1_w.noalias() += dpre * h.transpose();
  grads.proj1_b += dpre;
  return params.proj1_w.transpose() * dpre;
}

Vector classify_logits(const EncoderParams& params, const Vector& h) { return params.cls_w * h + params.cls_b; }

Vector backprop_classify(const EncoderParams& params, const Vector& h, const Vector& dlogits,
                         EncoderParams& grads) {
  grads.cls_w.noalias() += dlogits * h.transpose();
  grads.cls_b += dlogits;
  return params.cls_w.transpose() * dlogits;
}

Matrix mlm_predict_logits(const EncoderParams& params, const MaskedExample& masked) {
  const Vector context = encode(params, std::span(masked.ids));
  const Vector logits = params.mlm_w * context + params.mlm_b;
  Matrix out(static_cast<Eigen::Index>(masked.targets.size()), logits.size());
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) = logits.transpose();
  return out;
}

Vector dropout_mask(std::size_t dim, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw BadInput("dropout probability must lie in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - p);
  Vector mask(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
  return mask;
}

Vector dropout_augment(const Vector& vec, double p, Rng& rng) {
  return (vec.array() * dropout_mask(static_cast<std::size_t>(vec.size()), p, rng).array()).matrix();
}

OptimizerState OptimizerState::for_params(const EncoderParams& params) {
  return {EncoderParams::zeros_like(params), EncoderParams::zeros_like(params), 0};
}

void adamw_step(EncoderParams& params, const EncoderParams& grads, OptimizerState& state,
                const AdamWHyper& hyper, unsigned groups) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != g[i].size() || p[i].size() != m[i].size() || p[i].size() != v[i].size()) {
      throw BadInput("gradient shape mismatch in " + p[i].name);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if ((p[i].group & groups) == 0) continue;
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      const double gj = g[i].data[j];
      double& mj = m[i].data[j];
      double& vj = v[i].data[j];
      mj = hyper.beta1 * mj + (1.0 - hyper.beta1) * gj;
      vj = hyper.beta2 * vj + (1.0 - hyper.beta2) * gj * gj;
      const double m_hat = mj / bc1;
      const double v_hat = vj / bc2;
      double& pj = p[i].data[j];
      pj = pj - hyper.lr * (m_hat / (std::sqrt(v_hat) + hyper.eps)) - hyper.lr * hyper.weight_decay * pj;
      if (!std::isfinite(pj)) {
        throw NumericalError("non-finite value in " + p[i].name + " after optimizer step " +
                             std::to_string(state.step));
      }
    }
  }
}

}  // namespace nid
