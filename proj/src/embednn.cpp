#include "linksched/embednn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "linksched/error.hpp"
#include "linksched/parallel.hpp"

namespace linksched {
namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kRateFloor = 1e-30;
constexpr double kNeighborInitScale = 0.02;

void glorot(Matrix& m, std::mt19937_64& rng) {
  const double half_width = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  for (double& v : m.values()) v = dist(rng);
}

// log of a probability clamped to [kProbClamp, 1 - kProbClamp]; d is the
// derivative of the clamped log (zero where the clamp is active).
double clamped_log(double p, double* d) {
  if (p < kProbClamp) {
    *d = 0.0;
    return std::log(kProbClamp);
  }
  if (p > 1.0 - kProbClamp) {
    *d = 0.0;
    return std::log(1.0 - kProbClamp);
  }
  *d = 1.0 / p;
  return std::log(p);
}

void check_embedding_shapes(const SchedGraph& graph, const EmbeddingParams& params) {
  const std::size_t p = params.dim();
  if (params.w1.rows() != p || params.w2.rows() != p || params.w3.cols() != p) {
    throw StateError("embedding weights have inconsistent embedding dimension");
  }
  if (params.w1.cols() != graph.feat_dim || params.w2.cols() != graph.feat_dim) {
    throw StateError("graph feature dimension " + std::to_string(graph.feat_dim) +
                     " does not match embedding weights (" + std::to_string(params.w1.cols()) + ")");
  }
  if (params.iterations < 1) throw StateError("embedding needs at least one iteration");
}

}  // namespace

void Architecture::validate() const {
  if (embed_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  if (iterations < 1) throw ConfigError("iteration count must be >= 1");
  if (quant_bits < 1 || quant_bits > 16) throw ConfigError("quantization bits must lie in [1, 16]");
  if (hidden < 1) throw ConfigError("hidden size must be >= 1");
  if (topology.kind == Topology::Kind::kKnn && topology.k < 1) throw ConfigError("knn topology needs K >= 1");
}

std::vector<Matrix*> ModelParams::parameters() {
  return {&embed.w1, &embed.w2, &embed.w3, &clf.hidden_w, &clf.bn_gamma, &clf.bn_beta, &clf.out_w, &clf.out_b};
}

std::vector<const Matrix*> ModelParams::parameters() const {
  return {&embed.w1, &embed.w2, &embed.w3, &clf.hidden_w, &clf.bn_gamma, &clf.bn_beta, &clf.out_w, &clf.out_b};
}

const char* ModelParams::parameter_name(std::size_t i) {
  static constexpr const char* kNames[kNumParamTensors] = {"W1",       "W2",      "W3",    "hidden_w",
                                                            "bn_gamma", "bn_beta", "out_w", "out_b"};
  return i < kNumParamTensors ? kNames[i] : "?";
}

void ModelParams::zero_grad() {
  const auto params = parameters();
  grad.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) grad[i].resize(params[i]->rows(), params[i]->cols());
}

ModelParams init_model(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  const auto p = static_cast<std::size_t>(arch.embed_dim);
  const auto h = static_cast<std::size_t>(arch.hidden);
  const std::size_t d = arch.feat_dim();

  ModelParams m;
  m.arch = arch;
  m.embed.iterations = arch.iterations;
  m.embed.w1.resize(p, d);
  m.embed.w2.resize(p, d);
  m.embed.w3.resize(p, p);
  m.clf.hidden_w.resize(h, p);
  m.clf.bn_gamma.resize(1, h, 1.0);
  m.clf.bn_beta.resize(1, h, 0.0);
  m.clf.out_w.resize(2, h);
  m.clf.out_b.resize(1, 2, 0.0);
  m.clf.running_mean.resize(1, h, 0.0);
  m.clf.running_var.resize(1, h, 1.0);

  std::mt19937_64 rng(seed);
  glorot(m.embed.w1, rng);
  glorot(m.embed.w2, rng);
  glorot(m.embed.w3, rng);
  // The neighbor term sums up to L - 1 embeddings.
  for (double& v : m.embed.w3.values()) v *= kNeighborInitScale;
  glorot(m.clf.hidden_w, rng);
  glorot(m.clf.out_w, rng);
  m.zero_grad();
  return m;
}

Matrix embed(const SchedGraph& graph, const EmbeddingParams& params, EmbedCache* cache) {
  check_embedding_shapes(graph, params);
  const std::size_t n = graph.num_nodes;
  const std::size_t p = params.dim();
  const auto iters = static_cast<std::size_t>(params.iterations);

  // Constant part: W1 x_v + W2 * (in-edge histogram of v).
  Matrix base(n, p);
  for (std::size_t v = 0; v < n; ++v) {
    auto out = base.row(v);
    const std::size_t nf = graph.node_feat[v];
    for (std::size_t i = 0; i < p; ++i) out[i] = params.w1(i, nf);
    for (auto f : graph.in_edge_features(v)) {
      for (std::size_t i = 0; i < p; ++i) out[i] += params.w2(i, f);
    }
  }

  if (cache) {
    cache->mu.assign(iters + 1, Matrix(n, p));
    cache->pre.assign(iters, Matrix());
    cache->nbr_sum.assign(iters, Matrix());
    cache->valid = true;
  }

  Matrix mu(n, p), sum(n, p), pre;
  for (std::size_t t = 0; t < iters; ++t) {
    sum.fill(0.0);
    if (t > 0) {
      for (std::size_t v = 0; v < n; ++v) {
        auto s = sum.row(v);
        for (auto u : graph.in_neighbors(v)) {
          const auto src = mu.row(u);
          for (std::size_t i = 0; i < p; ++i) s[i] += src[i];
        }
      }
    }
    pre = base;
    if (t > 0) matmul_abt(sum, params.w3, pre, /*accumulate=*/true);
    Matrix next(n, p);
    for (std::size_t i = 0; i < pre.size(); ++i) next.values()[i] = std::max(0.0, pre.values()[i]);
    if (cache) {
      cache->nbr_sum[t] = sum;
      cache->pre[t] = pre;
      cache->mu[t + 1] = next;
    }
    mu = std::move(next);
  }
  return mu;
}

void embed_backward(const SchedGraph& graph, const EmbeddingParams& params, const EmbedCache& cache,
                    const Matrix& dmu, Matrix& dw1, Matrix& dw2, Matrix& dw3) {
  if (!cache.valid) throw StateError("embedding backward called without a cached forward pass");
  const std::size_t n = graph.num_nodes;
  const std::size_t p = params.dim();
  const auto iters = static_cast<std::size_t>(params.iterations);
  if (cache.pre.size() != iters || dmu.rows() != n || dmu.cols() != p) {
    throw StateError("embedding cache does not match graph/parameters");
  }

  Matrix upstream = dmu;  // dL/d mu^(t)
  Matrix dbase(n, p);
  Matrix dpre(n, p), dsum;
  for (std::size_t t = iters; t-- > 0;) {
    const Matrix& pre = cache.pre[t];
    for (std::size_t i = 0; i < dpre.size(); ++i) {
      dpre.values()[i] = pre.values()[i] > 0.0 ? upstream.values()[i] : 0.0;
    }
    dbase += dpre;
    if (t == 0) break;  // mu^(0) = 0: no W3 contribution and nothing further upstream
    matmul_atb(dpre, cache.nbr_sum[t], dw3, /*accumulate=*/true);
    matmul_ab(dpre, params.w3, dsum);
    upstream.fill(0.0);
    for (std::size_t v = 0; v < n; ++v) {
      const auto ds = dsum.row(v);
      for (auto u : graph.in_neighbors(v)) {
        auto dst = upstream.row(u);
        for (std::size_t i = 0; i < p; ++i) dst[i] += ds[i];
      }
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    const auto db = dbase.row(v);
    const std::size_t nf = graph.node_feat[v];
    for (std::size_t i = 0; i < p; ++i) dw1(i, nf) += db[i];
    for (auto f : graph.in_edge_features(v)) {
      for (std::size_t i = 0; i < p; ++i) dw2(i, f) += db[i];
    }
  }
}

Matrix classify(const Matrix& embeddings, ClassifierParams& params, Mode mode, ClassifierCache* cache,
                bool update_running) {
  const std::size_t n = embeddings.rows();
  const std::size_t h = params.hidden_w.rows();
  if (embeddings.cols() != params.hidden_w.cols()) throw StateError("embedding dimension does not match classifier");

  Matrix pre;
  matmul_abt(embeddings, params.hidden_w, pre);

  std::vector<double> mean(h, 0.0), var(h, 0.0), inv_std(h);
  if (mode == Mode::kTrain) {
    if (n == 0) throw StateError("batch norm needs at least one row in train mode");
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = pre.row(r);
      for (std::size_t j = 0; j < h; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = pre.row(r);
      for (std::size_t j = 0; j < h; ++j) var[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
    }
    for (double& v : var) v /= static_cast<double>(n);
    if (update_running) {
      const double m = params.bn_momentum;
      const double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
      for (std::size_t j = 0; j < h; ++j) {
        params.running_mean(0, j) = (1.0 - m) * params.running_mean(0, j) + m * mean[j];
        params.running_var(0, j) = (1.0 - m) * params.running_var(0, j) + m * var[j] * unbias;
      }
    }
  } else {
    for (std::size_t j = 0; j < h; ++j) {
      mean[j] = params.running_mean(0, j);
      var[j] = params.running_var(0, j);
    }
  }
  for (std::size_t j = 0; j < h; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + params.bn_eps);

  Matrix xhat(n, h), bn_out(n, h), act(n, h);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < h; ++j) {
      const double xh = (pre(r, j) - mean[j]) * inv_std[j];
      const double y = params.bn_gamma(0, j) * xh + params.bn_beta(0, j);
      xhat(r, j) = xh;
      bn_out(r, j) = y;
      act(r, j) = y > 0.0 ? y : 0.0;
    }
  }

  Matrix logits;
  matmul_abt(act, params.out_w, logits);
  Matrix probs(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    logits(r, 0) += params.out_b(0, 0);
    logits(r, 1) += params.out_b(0, 1);
    const double mx = std::max(logits(r, 0), logits(r, 1));
    const double e0 = std::exp(logits(r, 0) - mx);
    const double e1 = std::exp(logits(r, 1) - mx);
    probs(r, 0) = e0 / (e0 + e1);
    probs(r, 1) = e1 / (e0 + e1);
  }

  if (cache) {
    cache->input = embeddings;
    cache->pre = std::move(pre);
    cache->xhat = std::move(xhat);
    cache->bn_out = std::move(bn_out);
    cache->act = std::move(act);
    cache->inv_std = std::move(inv_std);
    cache->logits = std::move(logits);
    cache->probs = probs;
    cache->mode = mode;
    cache->valid = true;
  }
  return probs;
}

Matrix classify_eval(const Matrix& embeddings, const ClassifierParams& params) {
  // Eval mode never writes to params.
  return classify(embeddings, const_cast<ClassifierParams&>(params), Mode::kEval, nullptr, false);
}

Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs) {
  Matrix out(probs.rows(), probs.cols());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) dot += dprobs(r, c) * probs(r, c);
    for (std::size_t c = 0; c < probs.cols(); ++c) out(r, c) = probs(r, c) * (dprobs(r, c) - dot);
  }
  return out;
}

LossResult supervised_loss(const Matrix& probs, std::span<const std::uint8_t> labels) {
  if (probs.rows() != labels.size() || probs.cols() != 2) throw StateError("supervised loss: shape mismatch");
  LossResult out;
  Matrix dprobs(probs.rows(), 2);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const std::size_t c = labels[l] ? 1 : 0;
    double d = 0.0;
    out.value -= clamped_log(probs(l, c), &d);
    dprobs(l, c) = -d;
  }
  out.dlogits = softmax_backward(probs, dprobs);
  return out;
}

LossResult unsupervised_loss(const Matrix& probs, const ChannelMatrix& ch, double omega) {
  const std::size_t n = probs.rows();
  if (n != ch.num_links || probs.cols() != 2) throw StateError("unsupervised loss: shape mismatch");
  std::vector<double> active(n);
  for (std::size_t l = 0; l < n; ++l) active[l] = probs(l, 1);

  std::vector<double> grad;
  const double rate = soft_sum_rate(ch, active, &grad) / ch.bandwidth_hz;
  Matrix dprobs(n, 2);
  LossResult out;
  if (!(rate <= kRateFloor)) {
    out.value = 1.0 / rate;
    const double coef = -1.0 / (rate * rate * ch.bandwidth_hz);
    for (std::size_t l = 0; l < n; ++l) dprobs(l, 1) = coef * grad[l];
  } else {
    out.value = 1.0 / kRateFloor;
  }
  if (omega != 0.0) {
    for (std::size_t l = 0; l < n; ++l) {
      double d = 0.0;
      out.value -= omega * clamped_log(probs(l, 0), &d);
      dprobs(l, 0) = -omega * d;
    }
  }
  out.dlogits = softmax_backward(probs, dprobs);
  return out;
}

const Matrix& forward_batch(ModelParams& model, std::span<const SchedGraph* const> graphs, Mode mode,
                            BatchForward& state, bool update_running) {
  state.graphs.assign(graphs.begin(), graphs.end());
  state.offsets.assign(1, 0);
  for (const auto* g : graphs) state.offsets.push_back(state.offsets.back() + g->num_nodes);
  state.embed.assign(graphs.size(), EmbedCache{});

  std::vector<Matrix> per_graph(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) { per_graph[i] = embed(*graphs[i], model.embed, &state.embed[i]); });

  Matrix pooled(state.num_nodes(), model.embed.dim());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& m = per_graph[i];
    std::copy(m.values().begin(), m.values().end(), pooled.row(state.offsets[i]).begin());
  }
  classify(pooled, model.clf, mode, &state.clf, update_running);
  return state.clf.probs;
}

void backward_batch(ModelParams& model, const BatchForward& state, const Matrix& dlogits) {
  const ClassifierCache& c = state.clf;
  if (!c.valid) throw StateError("backward called without a cached forward pass");
  if (dlogits.rows() != c.probs.rows() || dlogits.cols() != 2) throw StateError("upstream gradient shape mismatch");
  if (model.grad.size() != kNumParamTensors) model.zero_grad();
  auto& g = model.grad;
  auto& clf = model.clf;
  const std::size_t n = c.input.rows();
  const std::size_t h = clf.hidden_w.rows();

  // Output layer.
  matmul_atb(dlogits, c.act, g[6], true);
  for (std::size_t r = 0; r < n; ++r) {
    g[7](0, 0) += dlogits(r, 0);
    g[7](0, 1) += dlogits(r, 1);
  }
  Matrix dact;
  matmul_ab(dlogits, clf.out_w, dact);

  // ReLU, then the batch-norm affine.
  Matrix dxhat(n, h);
  std::vector<double> sum_dxhat(h, 0.0), sum_dxhat_xhat(h, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < h; ++j) {
      const double dy = c.bn_out(r, j) > 0.0 ? dact(r, j) : 0.0;
      g[4](0, j) += dy * c.xhat(r, j);
      g[5](0, j) += dy;
      const double dx = dy * clf.bn_gamma(0, j);
      dxhat(r, j) = dx;
      sum_dxhat[j] += dx;
      sum_dxhat_xhat[j] += dx * c.xhat(r, j);
    }
  }
  // Batch-norm normalization.
  Matrix dpre(n, h);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < h; ++j) {
      if (c.mode == Mode::kTrain) {
        dpre(r, j) = c.inv_std[j] * (dxhat(r, j) - inv_n * sum_dxhat[j] - c.xhat(r, j) * inv_n * sum_dxhat_xhat[j]);
      } else {
        dpre(r, j) = c.inv_std[j] * dxhat(r, j);
      }
    }
  }
  matmul_atb(dpre, c.input, g[3], true);
  Matrix dmu;
  matmul_ab(dpre, clf.hidden_w, dmu);

  // Embedding: per-graph partial gradients, summed in graph order.
  const std::size_t p = model.embed.dim();
  const std::size_t d = model.embed.w1.cols();
  struct Partial {
    Matrix w1, w2, w3;
  };
  std::vector<Partial> partial(state.graphs.size());
  parallel_for(state.graphs.size(), [&](std::size_t i) {
    const auto& graph = *state.graphs[i];
    Matrix slice(graph.num_nodes, p);
    for (std::size_t v = 0; v < graph.num_nodes; ++v) {
      const auto src = dmu.row(state.offsets[i] + v);
      std::copy(src.begin(), src.end(), slice.row(v).begin());
    }
    Partial& pg = partial[i];
    pg.w1.resize(p, d);
    pg.w2.resize(p, d);
    pg.w3.resize(p, p);
    embed_backward(graph, model.embed, state.embed[i], slice, pg.w1, pg.w2, pg.w3);
  });
  for (const auto& pg : partial) {
    g[0] += pg.w1;
    g[1] += pg.w2;
    g[2] += pg.w3;
  }
}

std::vector<double> predict_probs(const ModelParams& model, const SchedGraph& graph) {
  const Matrix mu = embed(graph, model.embed);
  const Matrix probs = classify_eval(mu, model.clf);
  std::vector<double> active(graph.num_nodes);
  for (std::size_t v = 0; v < graph.num_nodes; ++v) active[v] = probs(v, 1);
  return active;
}

ScheduleVector predict(const ModelParams& model, const SchedGraph& graph) {
  return ScheduleVector::from_soft(predict_probs(model, graph));
}

AdamState make_adam_state(const ModelParams& model) {
  AdamState s;
  for (const Matrix* p : model.parameters()) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(ModelParams& model, AdamState& state, const AdamConfig& cfg) {
  auto params = model.parameters();
  if (state.m.size() != params.size() || model.grad.size() != params.size()) {
    throw StateError("optimizer state does not match model parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    auto g = model.grad[i].values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    if (w.size() != g.size() || w.size() != m.size()) throw StateError("optimizer state shape mismatch");
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace linksched
