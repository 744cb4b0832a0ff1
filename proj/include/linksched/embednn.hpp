#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linksched/graph.hpp"
#include "linksched/netgen.hpp"
#include "linksched/tensor.hpp"

namespace linksched {

struct Architecture {
  int embed_dim = 32;   // p
  int iterations = 2;   // T
  int quant_bits = 3;   // q
  int hidden = 64;      // H
  Topology topology = Topology::full();

  std::size_t feat_dim() const { return std::size_t{1} << quant_bits; }
  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Structure2vec weights: W1 maps the node one-hot, W2 the in-edge histogram,
/// W3 the sum of in-neighbor embeddings.
struct EmbeddingParams {
  Matrix w1;  // p x 2^q
  Matrix w2;  // p x 2^q
  Matrix w3;  // p x p
  int iterations = 2;

  std::size_t dim() const { return w3.rows(); }
};

/// p -> H (no bias) -> batch norm -> ReLU -> H -> 2 -> softmax.
struct ClassifierParams {
  Matrix hidden_w;      // H x p
  Matrix bn_gamma;      // 1 x H
  Matrix bn_beta;       // 1 x H
  Matrix out_w;         // 2 x H
  Matrix out_b;         // 1 x 2
  Matrix running_mean;  // 1 x H
  Matrix running_var;   // 1 x H
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
};

inline constexpr std::size_t kNumParamTensors = 8;

struct ModelParams {
  Architecture arch;
  EmbeddingParams embed;
  ClassifierParams clf;
  // Mirrors the learnable tensors one-for-one.
  std::vector<Matrix> grad;
  std::string config_hash;

  // W1, W2, W3, hidden_w, bn_gamma, bn_beta, out_w, out_b.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  static const char* parameter_name(std::size_t i);

  void zero_grad();
};

// Glorot-uniform weights from a fixed seed, W3 scaled down by 50; gamma = 1, beta = 0,
// running stats (0, 1).
ModelParams init_model(const Architecture& arch, std::uint64_t seed);

enum class Mode { kTrain, kEval };

struct EmbedCache {
  std::vector<Matrix> mu;       // mu[t], t = 0..T, each L x p
  std::vector<Matrix> pre;      // pre[t] is the pre-activation of mu[t + 1]
  std::vector<Matrix> nbr_sum;  // nbr_sum[t] = sum of in-neighbor mu[t]
  bool valid = false;
};

// Runs T synchronous mean-field updates from mu = 0 and returns mu^(T) (L x p).
Matrix embed(const SchedGraph& graph, const EmbeddingParams& params, EmbedCache* cache = nullptr);

struct ClassifierCache {
  Matrix input;
  Matrix pre;
  Matrix xhat;
  Matrix act;  // post-ReLU hidden
  Matrix bn_out;
  std::vector<double> inv_std;
  Matrix logits;
  Matrix probs;
  Mode mode = Mode::kEval;
  bool valid = false;
};

// Rows of the returned N x 2 matrix are (P(inactive), P(active)). In train mode
// batch norm uses statistics over all N rows, and running statistics are updated
// when update_running is set.
Matrix classify(const Matrix& embeddings, ClassifierParams& params, Mode mode, ClassifierCache* cache = nullptr,
                bool update_running = true);
Matrix classify_eval(const Matrix& embeddings, const ClassifierParams& params);

struct LossResult {
  double value = 0.0;
  Matrix dlogits;  // N x 2
};

// Cross entropy against one-hot labels.
LossResult supervised_loss(const Matrix& probs, std::span<const std::uint8_t> labels);

// Reciprocal of the soft sum rate (in bits/s/Hz) plus the full-activation
// penalty -omega * sum log P(inactive).
LossResult unsupervised_loss(const Matrix& probs, const ChannelMatrix& ch, double omega);

// Chain rule through the row-wise softmax.
Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs);

/// Forward state for a mini-batch of graphs whose nodes share one batch-norm pool.
struct BatchForward {
  std::vector<const SchedGraph*> graphs;
  std::vector<std::size_t> offsets;  // node offset of each graph in the pool
  std::vector<EmbedCache> embed;
  ClassifierCache clf;

  std::size_t num_nodes() const { return offsets.empty() ? 0 : offsets.back(); }
};

// Returns the pooled N x 2 probabilities.
const Matrix& forward_batch(ModelParams& model, std::span<const SchedGraph* const> graphs, Mode mode,
                            BatchForward& state, bool update_running = true);

// Accumulates parameter gradients into model.grad. Throws StateError when
// state holds no cached forward pass.
void backward_batch(ModelParams& model, const BatchForward& state, const Matrix& dlogits);

// Reverse pass of the embedding recurrence for one graph; accumulates into the
// three gradient matrices.
void embed_backward(const SchedGraph& graph, const EmbeddingParams& params, const EmbedCache& cache,
                    const Matrix& dmu, Matrix& dw1, Matrix& dw2, Matrix& dw3);

// Eval-mode activation probabilities for one graph.
std::vector<double> predict_probs(const ModelParams& model, const SchedGraph& graph);
ScheduleVector predict(const ModelParams& model, const SchedGraph& graph);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

AdamState make_adam_state(const ModelParams& model);
void adam_step(ModelParams& model, AdamState& state, const AdamConfig& cfg);

}  // namespace linksched
