#ifndef SASOFTMAX_MICRO_LM_HPP
#define SASOFTMAX_MICRO_LM_HPP

// Character-level decoder-only transformer with a hand-written backward
// pass. Pre-norm blocks, one attention head per layer (head dim = d_model),
// 4x GELU MLP without biases, tied input/output embedding, final layer norm.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sasoftmax/adam.hpp"
#include "sasoftmax/attention.hpp"
#include "sasoftmax/corpus.hpp"
#include "sasoftmax/error.hpp"
#include "sasoftmax/matrix.hpp"
#include "sasoftmax/metrics.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax {

struct TrainConfig {
  VariantKind kind = VariantKind::Baseline;
  std::size_t layers = 2;
  std::size_t d_model = 32;
  std::size_t seq_len = 64;
  std::size_t batch = 16;
  std::size_t steps = 2000;
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  bool rope = true;
  double rope_base = kDefaultRopeBase;
  double init_std = 0.02;
  // std of the query/key projections at init; raise it to start from
  // saturated attention
  double qk_init_std = 0.02;
  double eps = kDefaultEps;
  std::string corpus_path;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (layers == 0) fail("layers must be positive");
    if (d_model == 0) fail("d_model must be positive");
    if (rope && d_model % 2 != 0) fail("d_model must be even when rope is enabled");
    if (seq_len == 0) fail("seq_len must be positive");
    if (batch == 0) fail("batch must be positive");
    if (!(lr > 0.0)) fail("lr must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0)) fail("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) fail("beta2 must lie in (0, 1)");
    if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
    if (!(init_std > 0.0) || !(qk_init_std > 0.0)) fail("init std must be positive");
    if (!(eps > 0.0)) fail("eps must be positive");
    if (!(rope_base > 0.0)) fail("rope_base must be positive");
  }

  AdamConfig adam() const { return AdamConfig{lr, beta1, beta2, adam_eps}; }
};

/// Architecture description shared by forward, backward and checkpoints.
struct ModelSpec {
  VariantKind kind = VariantKind::Baseline;
  std::size_t layers = 0;
  std::size_t d_model = 0;
  std::size_t vocab = 0;
  std::optional<double> rope_base;
  double eps = kDefaultEps;

  static ModelSpec from_config(const TrainConfig& c, std::size_t vocab) {
    ModelSpec s;
    s.kind = c.kind;
    s.layers = c.layers;
    s.d_model = c.d_model;
    s.vocab = vocab;
    if (c.rope) s.rope_base = c.rope_base;
    s.eps = c.eps;
    return s;
  }
};

struct LayerParams {
  Matrix ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;
  Matrix ln2_gain, ln2_bias;
  Matrix w1, w2;
};

struct ModelParams {
  Matrix embedding;  // vocab x d_model, also the output projection
  std::vector<LayerParams> layers;
  Matrix lnf_gain, lnf_bias;

  std::vector<std::pair<std::string, Matrix*>> named_tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    out.emplace_back("embedding", &embedding);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      LayerParams& p = layers[l];
      const std::string pre = "layer" + std::to_string(l) + ".";
      out.emplace_back(pre + "ln1_gain", &p.ln1_gain);
      out.emplace_back(pre + "ln1_bias", &p.ln1_bias);
      out.emplace_back(pre + "wq", &p.wq);
      out.emplace_back(pre + "wk", &p.wk);
      out.emplace_back(pre + "wv", &p.wv);
      out.emplace_back(pre + "wo", &p.wo);
      out.emplace_back(pre + "ln2_gain", &p.ln2_gain);
      out.emplace_back(pre + "ln2_bias", &p.ln2_bias);
      out.emplace_back(pre + "w1", &p.w1);
      out.emplace_back(pre + "w2", &p.w2);
    }
    out.emplace_back("lnf_gain", &lnf_gain);
    out.emplace_back("lnf_bias", &lnf_bias);
    return out;
  }

  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const {
    auto mut = const_cast<ModelParams*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(mut.size());
    for (auto& [name, m] : mut) out.emplace_back(std::move(name), m);
    return out;
  }

  bool operator==(const ModelParams& o) const {
    auto a = named_tensors();
    auto b = o.named_tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(*a[i].second == *b[i].second)) return false;
    }
    return true;
  }
};

/// Zero tensors with the architecture's shapes.
inline ModelParams zero_params(const ModelSpec& spec) {
  const std::size_t d = spec.d_model;
  ModelParams p;
  p.embedding = Matrix(spec.vocab, d);
  p.layers.resize(spec.layers);
  for (auto& l : p.layers) {
    l.ln1_gain = Matrix(1, d);
    l.ln1_bias = Matrix(1, d);
    l.wq = Matrix(d, d);
    l.wk = Matrix(d, d);
    l.wv = Matrix(d, d);
    l.wo = Matrix(d, d);
    l.ln2_gain = Matrix(1, d);
    l.ln2_bias = Matrix(1, d);
    l.w1 = Matrix(d, 4 * d);
    l.w2 = Matrix(4 * d, d);
  }
  p.lnf_gain = Matrix(1, d);
  p.lnf_bias = Matrix(1, d);
  return p;
}

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  for (auto& [name, m] : z.named_tensors()) m->fill(0.0);
  return z;
}

/// Weights ~ N(0, init_std^2) (query/key projections use qk_init_std),
/// layer-norm gains 1 and biases 0. Drawn in named_tensors order.
inline ModelParams init_params(const ModelSpec& spec, const TrainConfig& cfg, std::mt19937_64& rng) {
  ModelParams p = zero_params(spec);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& [name, m] : p.named_tensors()) {
    const bool is_gain = name.ends_with("_gain");
    const bool is_bias = name.ends_with("_bias");
    if (is_gain) {
      m->fill(1.0);
    } else if (!is_bias) {
      const bool qk = name.ends_with(".wq") || name.ends_with(".wk");
      const double std = qk ? cfg.qk_init_std : cfg.init_std;
      for (double& x : m->data()) x = std * normal(rng);
    }
  }
  return p;
}

inline double global_norm(const ModelParams& p) {
  double s = 0.0;
  for (const auto& [name, m] : p.named_tensors()) {
    for (double x : m->data()) s += x * x;
  }
  return std::sqrt(s);
}

/// `count` windows of `seq_len` tokens, stored back to back.
struct Batch {
  std::size_t count = 0;
  std::size_t seq_len = 0;
  std::vector<int> inputs;
  std::vector<int> targets;

  static Batch from_windows(const std::vector<std::vector<int>>& inputs,
                            const std::vector<std::vector<int>>& targets, std::size_t seq_len) {
    if (inputs.size() != targets.size() || inputs.empty()) {
      throw Error(ErrorCode::ShapeMismatch, "need matching, non-empty input/target windows");
    }
    Batch b;
    b.count = inputs.size();
    b.seq_len = seq_len;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].size() != seq_len || targets[i].size() != seq_len) {
        throw Error(ErrorCode::ShapeMismatch, "window " + std::to_string(i) +
                                                  " does not have length " +
                                                  std::to_string(seq_len));
      }
      b.inputs.insert(b.inputs.end(), inputs[i].begin(), inputs[i].end());
      b.targets.insert(b.targets.end(), targets[i].begin(), targets[i].end());
    }
    return b;
  }

  /// Windows starting at the given token offsets; targets are shifted by one.
  static Batch from_offsets(const std::vector<int>& tokens, const std::vector<std::size_t>& starts,
                            std::size_t seq_len) {
    Batch b;
    b.count = starts.size();
    b.seq_len = seq_len;
    for (std::size_t s : starts) {
      if (s + seq_len + 1 > tokens.size()) {
        throw Error(ErrorCode::ShapeMismatch, "window runs past the end of the corpus");
      }
      b.inputs.insert(b.inputs.end(), tokens.begin() + static_cast<long>(s),
                      tokens.begin() + static_cast<long>(s + seq_len));
      b.targets.insert(b.targets.end(), tokens.begin() + static_cast<long>(s + 1),
                       tokens.begin() + static_cast<long>(s + seq_len + 1));
    }
    return b;
  }

  std::size_t rows() const noexcept { return count * seq_len; }
};

namespace lm_detail {

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> rstd;
};

inline Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                         LayerNormCache& cache) {
  const std::size_t n = x.rows(), d = x.cols();
  Matrix y(n, d);
  cache.xhat = Matrix(n, d);
  cache.rstd.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    double mean = 0.0;
    for (double v : xi) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : xi) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.rstd[i] = rstd;
    for (std::size_t c = 0; c < d; ++c) {
      const double xh = (xi[c] - mean) * rstd;
      cache.xhat(i, c) = xh;
      y(i, c) = xh * gain(0, c) + bias(0, c);
    }
  }
  return y;
}

inline Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const LayerNormCache& cache,
                                  Matrix& dgain, Matrix& dbias) {
  const std::size_t n = dy.rows(), d = dy.cols();
  Matrix dx(n, d);
  std::vector<double> dxhat(d);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double g = dy(i, c);
      const double xh = cache.xhat(i, c);
      dgain(0, c) += g * xh;
      dbias(0, c) += g;
      dxhat[c] = g * gain(0, c);
      mean_dxhat += dxhat[c];
      mean_dxhat_xhat += dxhat[c] * xh;
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) {
      dx(i, c) = cache.rstd[i] * (dxhat[c] - mean_dxhat - cache.xhat(i, c) * mean_dxhat_xhat);
    }
  }
  return dx;
}

inline constexpr double kGeluK = 0.7978845608028654;  // sqrt(2/pi)

inline double gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluK * (u + 0.044715 * u * u * u)));
}

inline double gelu_grad(double u) {
  const double t = std::tanh(kGeluK * (u + 0.044715 * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * 0.044715 * u * u);
}

inline Matrix rows_block(const Matrix& m, std::size_t start, std::size_t count) {
  Matrix out(count, m.cols());
  std::copy_n(m.data().begin() + static_cast<long>(start * m.cols()), count * m.cols(),
              out.data().begin());
  return out;
}

inline void set_rows_block(Matrix& m, std::size_t start, const Matrix& block) {
  std::copy(block.data().begin(), block.data().end(),
            m.data().begin() + static_cast<long>(start * m.cols()));
}

inline void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

struct LayerCache {
  Matrix x_in;
  LayerNormCache ln1;
  Matrix h1;
  std::vector<AttentionCache> attn;
  Matrix att;
  LayerNormCache ln2;
  Matrix h2;
  Matrix pre;
  Matrix act;
};

}  // namespace lm_detail

/// Everything backward needs from a forward call.
struct ModelCache {
  ModelSpec spec;
  Batch batch;
  std::vector<lm_detail::LayerCache> layers;
  lm_detail::LayerNormCache lnf;
  Matrix hf;
  Matrix probs;
};

struct ForwardResult {
  double loss = 0.0;
  ModelCache cache;
};

/// Mean next-token cross-entropy over every position of the batch.
inline ForwardResult forward_loss(const ModelSpec& spec, const ModelParams& params,
                                  const Batch& batch) {
  using namespace lm_detail;
  const std::size_t d = spec.d_model;
  const std::size_t t = batch.seq_len;
  const std::size_t n = batch.rows();
  if (batch.inputs.size() != n || batch.targets.size() != n || n == 0) {
    throw Error(ErrorCode::ShapeMismatch, "batch token count does not match count * seq_len");
  }
  require_shape(params.embedding, spec.vocab, d, "embedding");
  if (params.layers.size() != spec.layers) {
    throw Error(ErrorCode::ShapeMismatch, "parameter layer count does not match the spec");
  }

  ForwardResult res;
  ModelCache& c = res.cache;
  c.spec = spec;
  c.batch = batch;
  c.layers.resize(spec.layers);

  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const int tok = batch.inputs[i];
    if (tok < 0 || static_cast<std::size_t>(tok) >= spec.vocab) {
      throw Error(ErrorCode::UnknownSymbol, "token id " + std::to_string(tok) + " out of range");
    }
    std::copy_n(params.embedding.row(static_cast<std::size_t>(tok)).begin(), d, x.row(i).begin());
  }

  for (std::size_t l = 0; l < spec.layers; ++l) {
    const LayerParams& p = params.layers[l];
    LayerCache& lc = c.layers[l];
    lc.x_in = x;
    lc.h1 = layer_norm(x, p.ln1_gain, p.ln1_bias, lc.ln1);
    const Matrix q = matmul(lc.h1, p.wq);
    const Matrix k = matmul(lc.h1, p.wk);
    const Matrix v = matmul(lc.h1, p.wv);
    lc.att = Matrix(n, d);
    lc.attn.resize(batch.count);
    for (std::size_t b = 0; b < batch.count; ++b) {
      AttentionInput in;
      in.q = rows_block(q, b * t, t);
      in.k = rows_block(k, b * t, t);
      in.v = rows_block(v, b * t, t);
      in.kind = spec.kind;
      in.rope_base = spec.rope_base;
      in.eps = spec.eps;
      AttentionResult ar = attention_forward(in);
      set_rows_block(lc.att, b * t, ar.output);
      lc.attn[b] = std::move(ar.cache);
    }
    matmul_acc(lc.att, p.wo, x);  // residual
    lc.h2 = layer_norm(x, p.ln2_gain, p.ln2_bias, lc.ln2);
    lc.pre = matmul(lc.h2, p.w1);
    lc.act = Matrix(n, 4 * d);
    for (std::size_t i = 0; i < lc.pre.size(); ++i) lc.act.data()[i] = gelu(lc.pre.data()[i]);
    matmul_acc(lc.act, p.w2, x);  // residual
  }

  c.hf = layer_norm(x, params.lnf_gain, params.lnf_bias, c.lnf);
  c.probs = Matrix(n, spec.vocab);
  matmul_nt_acc(c.hf, params.embedding, c.probs);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto target = static_cast<std::size_t>(batch.targets[i]);
    if (batch.targets[i] < 0 || target >= spec.vocab) {
      throw Error(ErrorCode::UnknownSymbol, "target id out of range");
    }
    auto row = c.probs.row(i);
    double peak = row[0];
    for (double v : row) peak = std::max(peak, v);
    const double target_shifted = row[target] - peak;
    double s = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      s += v;
    }
    for (double& v : row) v /= s;
    total += std::log(s) - target_shifted;
  }
  res.loss = total / static_cast<double>(n);
  if (!std::isfinite(res.loss)) throw Error(ErrorCode::NonFiniteInput, "loss is not finite");
  return res;
}

/// Gradients of loss_scale * mean loss with respect to every parameter.
inline ModelParams backward(const ModelCache& c, const ModelParams& params,
                            double loss_scale = 1.0) {
  using namespace lm_detail;
  const ModelSpec& spec = c.spec;
  const std::size_t d = spec.d_model;
  const std::size_t n = c.batch.rows();
  const std::size_t t = c.batch.seq_len;
  if (c.layers.size() != params.layers.size() || c.probs.rows() != n ||
      c.probs.cols() != params.embedding.rows()) {
    throw Error(ErrorCode::CacheMismatch, "cache does not match the parameters");
  }
  ModelParams g = zero_params(spec);

  Matrix dlogits = c.probs;
  const double inv_n = loss_scale / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    dlogits(i, static_cast<std::size_t>(c.batch.targets[i])) -= 1.0;
    for (double& v : dlogits.row(i)) v *= inv_n;
  }
  matmul_tn_acc(dlogits, c.hf, g.embedding);
  const Matrix dhf = matmul(dlogits, params.embedding);
  Matrix dx = layer_norm_backward(dhf, params.lnf_gain, c.lnf, g.lnf_gain, g.lnf_bias);

  for (std::size_t l = spec.layers; l-- > 0;) {
    const LayerParams& p = params.layers[l];
    const LayerCache& lc = c.layers[l];
    LayerParams& gp = g.layers[l];

    // MLP
    matmul_tn_acc(lc.act, dx, gp.w2);
    Matrix dpre(n, 4 * d);
    matmul_nt_acc(dx, p.w2, dpre);
    for (std::size_t i = 0; i < dpre.size(); ++i) dpre.data()[i] *= gelu_grad(lc.pre.data()[i]);
    matmul_tn_acc(lc.h2, dpre, gp.w1);
    Matrix dh2(n, d);
    matmul_nt_acc(dpre, p.w1, dh2);
    add_into(dx, layer_norm_backward(dh2, p.ln2_gain, lc.ln2, gp.ln2_gain, gp.ln2_bias));

    // attention
    matmul_tn_acc(lc.att, dx, gp.wo);
    Matrix datt(n, d);
    matmul_nt_acc(dx, p.wo, datt);
    Matrix dq(n, d), dk(n, d), dv(n, d);
    for (std::size_t b = 0; b < c.batch.count; ++b) {
      const AttentionGrads ag = attention_backward(lc.attn[b], rows_block(datt, b * t, t));
      set_rows_block(dq, b * t, ag.dq);
      set_rows_block(dk, b * t, ag.dk);
      set_rows_block(dv, b * t, ag.dv);
    }
    matmul_tn_acc(lc.h1, dq, gp.wq);
    matmul_tn_acc(lc.h1, dk, gp.wk);
    matmul_tn_acc(lc.h1, dv, gp.wv);
    Matrix dh1(n, d);
    matmul_nt_acc(dq, p.wq, dh1);
    matmul_nt_acc(dk, p.wk, dh1);
    matmul_nt_acc(dv, p.wv, dh1);
    add_into(dx, layer_norm_backward(dh1, p.ln1_gain, lc.ln1, gp.ln1_gain, gp.ln1_bias));
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto dst = g.embedding.row(static_cast<std::size_t>(c.batch.inputs[i]));
    const auto src = dx.row(i);
    for (std::size_t col = 0; col < d; ++col) dst[col] += src[col];
  }
  return g;
}

struct AdamState {
  std::size_t step = 0;
  ModelParams m;
  ModelParams v;
};

inline AdamState make_adam_state(const ModelParams& params) {
  return AdamState{0, zeros_like(params), zeros_like(params)};
}

/// Bias-corrected Adam over every tensor. Throws NonFiniteGradient before
/// touching any parameter if a gradient entry is NaN/Inf.
inline void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
                      const AdamConfig& cfg) {
  auto pt = params.named_tensors();
  const auto gt = grads.named_tensors();
  auto mt = state.m.named_tensors();
  auto vt = state.v.named_tensors();
  if (gt.size() != pt.size() || mt.size() != pt.size() || vt.size() != pt.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the parameters");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].second->same_shape(*pt[i].second)) {
      throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch for " + pt[i].first);
    }
    const auto data = gt[i].second->data();
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (!std::isfinite(data[j])) {
        throw Error(ErrorCode::NonFiniteGradient,
                    gt[i].first + "[" + std::to_string(j) + "] = " + std::to_string(data[j]) +
                        " at step " + std::to_string(state.step + 1));
      }
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < pt.size(); ++i) {
    adam_update(pt[i].second->data(), gt[i].second->data(), mt[i].second->data(),
                vt[i].second->data(), state.step, cfg);
  }
}

struct TrainResult {
  RunMetrics metrics;
  ModelParams params;
  ModelSpec spec;
  Vocabulary vocab;
};

/// Seeded training run: init, window sampling and update order all derive
/// from config.seed. Constant learning rate, no clipping.
inline TrainResult train(const TrainConfig& config, const Corpus& corpus) {
  config.validate();
  if (corpus.tokens.size() < config.seq_len + 1) {
    throw Error(ErrorCode::CorpusTooSmall, "corpus shorter than seq_len + 1");
  }
  TrainResult res;
  res.vocab = corpus.vocab;
  res.spec = ModelSpec::from_config(config, corpus.vocab.size());
  std::mt19937_64 rng(config.seed);
  res.params = init_params(res.spec, config, rng);
  AdamState state = make_adam_state(res.params);
  const AdamConfig adam = config.adam();

  const std::size_t max_start = corpus.tokens.size() - config.seq_len - 1;
  std::uniform_int_distribution<std::size_t> pick(0, max_start);
  std::vector<std::size_t> starts(config.batch);
  res.metrics.steps.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    for (auto& s : starts) s = pick(rng);
    const Batch batch = Batch::from_offsets(corpus.tokens, starts, config.seq_len);
    const ForwardResult fwd = forward_loss(res.spec, res.params, batch);
    const ModelParams grads = backward(fwd.cache, res.params);
    const double gnorm = global_norm(grads);
    adam_step(res.params, grads, state, adam);
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.metrics.steps.push_back(StepMetrics{step, fwd.loss, gnorm, dt});
  }
  return res;
}

inline TrainResult train(const TrainConfig& config) {
  return train(config, load_corpus(config.corpus_path, config.seq_len));
}

/// exp(mean next-token cross-entropy) over non-overlapping windows of
/// seq_len predictions. A trailing partial window is dropped.
inline double evaluate_ppl(const ModelSpec& spec, const ModelParams& params,
                           const Vocabulary& vocab, std::string_view text, std::size_t seq_len) {
  if (seq_len == 0) throw Error(ErrorCode::InvalidArgument, "seq_len must be positive");
  const std::vector<int> tokens = vocab.encode(text);
  if (tokens.size() < seq_len + 1) {
    throw Error(ErrorCode::TextTooShort, "text has " + std::to_string(tokens.size()) +
                                             " tokens, need " + std::to_string(seq_len + 1));
  }
  const std::size_t windows = (tokens.size() - 1) / seq_len;
  double total = 0.0;
  for (std::size_t w = 0; w < windows; ++w) {
    const Batch b = Batch::from_offsets(tokens, {w * seq_len}, seq_len);
    total += forward_loss(spec, params, b).loss;
  }
  return std::exp(total / static_cast<double>(windows));
}

/// Per-layer attention weights (T x T) for one token sequence.
inline std::vector<Matrix> attention_maps(const ModelSpec& spec, const ModelParams& params,
                                          const std::vector<int>& tokens) {
  if (tokens.empty()) throw Error(ErrorCode::TextTooShort, "prompt is empty");
  Batch b;
  b.count = 1;
  b.seq_len = tokens.size();
  b.inputs = tokens;
  b.targets = tokens;
  const ForwardResult fwd = forward_loss(spec, params, b);
  std::vector<Matrix> maps;
  for (const auto& lc : fwd.cache.layers) maps.push_back(lc.attn.front().weights);
  return maps;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_MICRO_LM_HPP
