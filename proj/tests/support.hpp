// Reference implementations used as oracles by the test suites. Everything
// here is written from the model definition with plain loops and shares no
// code paths with the library beyond reading parameter values.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "linksched/embednn.hpp"
#include "linksched/graph.hpp"
#include "linksched/netgen.hpp"

namespace ref {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double dist(const linksched::Point& a, const linksched::Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Weighted sum rate of a (possibly fractional) activation vector.
inline double sum_rate(const linksched::ChannelMatrix& ch, const Vec& pi) {
  const std::size_t n = ch.num_links;
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double interference = ch.noise_power_w;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != l) interference += ch.tx_power_w * ch.gain[k * n + l] * pi[k];
    }
    const double signal = ch.tx_power_w * ch.gain[l * n + l] * pi[l];
    total += ch.weights[l] * ch.bandwidth_hz * std::log2(1.0 + signal / interference);
  }
  return total;
}

inline double sum_rate(const linksched::ChannelMatrix& ch, const std::vector<std::uint8_t>& rho) {
  return sum_rate(ch, Vec(rho.begin(), rho.end()));
}

// Best schedule by enumeration; ties go to the smallest rho read as a bit
// string with rho[0] most significant.
inline std::vector<std::uint8_t> exhaustive_best(const linksched::ChannelMatrix& ch) {
  const std::size_t n = ch.num_links;
  std::vector<std::uint8_t> best(n, 0);
  double best_rate = -1.0;
  std::vector<std::uint8_t> rho(n, 0);
  // Walk rho in lexicographic order as a binary counter with rho[n-1] fastest.
  for (std::uint64_t count = 0; count < (std::uint64_t{1} << n); ++count) {
    for (std::size_t l = 0; l < n; ++l) rho[l] = (count >> (n - 1 - l)) & 1U;
    const double r = sum_rate(ch, rho);
    if (r > best_rate) {
      best_rate = r;
      best = rho;
    }
  }
  return best;
}

inline std::size_t quant(double d, double lo, double hi, int q) {
  const double levels = std::pow(2.0, q);
  const double width = (hi - lo) / levels;
  double idx = std::floor((d - lo) / width);
  if (idx < 0) idx = 0;
  if (idx > levels - 1) idx = levels - 1;
  return static_cast<std::size_t>(idx);
}

struct RefGraph {
  std::vector<std::size_t> node;             // hot index of x_v
  std::vector<std::vector<std::size_t>> nbr;  // in-neighbors of v
  std::vector<std::vector<std::size_t>> feat; // hot index of alpha(u, v), aligned with nbr
};

// k <= 0 means fully connected.
inline RefGraph graph(const linksched::NetworkLayout& lay, int q, int k) {
  const std::size_t n = lay.tx.size();
  double node_lo = lay.config.d_min;
  const double node_hi = lay.config.d_max;
  if (node_hi <= node_lo) node_lo = 0.0;
  RefGraph g;
  g.node.resize(n);
  g.nbr.resize(n);
  g.feat.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    g.node[v] = quant(dist(lay.tx[v], lay.rx[v]), node_lo, node_hi, q);
    std::vector<std::size_t> cand;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v) cand.push_back(u);
    }
    if (k > 0 && cand.size() > static_cast<std::size_t>(k)) {
      std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        return dist(lay.tx[a], lay.rx[v]) < dist(lay.tx[b], lay.rx[v]);
      });
      cand.resize(static_cast<std::size_t>(k));
      std::sort(cand.begin(), cand.end());
    }
    g.nbr[v] = cand;
    for (std::size_t u : cand) g.feat[v].push_back(quant(dist(lay.tx[u], lay.rx[v]), 0.0, lay.config.area_edge, q));
  }
  return g;
}

inline double at(const linksched::Matrix& m, std::size_t r, std::size_t c) { return m(r, c); }

// Activation pattern: one entry per ReLU (argument > 0) and per clamped log
// (clamp active). Two inputs with equal patterns lie in one smooth region.
using Pattern = std::vector<std::uint8_t>;

inline Mat embed(const RefGraph& g, const linksched::EmbeddingParams& w, int iterations, Pattern* pat = nullptr) {
  const std::size_t n = g.node.size();
  const std::size_t p = w.w3.rows();
  Mat mu(n, Vec(p, 0.0));
  for (int t = 0; t < iterations; ++t) {
    Mat next(n, Vec(p, 0.0));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < p; ++i) {
        double s = at(w.w1, i, g.node[v]);
        for (std::size_t e = 0; e < g.nbr[v].size(); ++e) {
          s += at(w.w2, i, g.feat[v][e]);
          for (std::size_t j = 0; j < p; ++j) s += at(w.w3, i, j) * mu[g.nbr[v][e]][j];
        }
        next[v][i] = std::max(0.0, s);
        if (pat) pat->push_back(s > 0.0);
      }
    }
    mu = next;
  }
  return mu;
}

// Rows: (P(inactive), P(active)). Train mode normalizes with batch statistics.
inline Mat classify(const Mat& emb, const linksched::ClassifierParams& c, bool train, Pattern* pat = nullptr) {
  const std::size_t n = emb.size();
  const std::size_t h = c.hidden_w.rows();
  const std::size_t p = c.hidden_w.cols();
  Mat pre(n, Vec(h, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t i = 0; i < p; ++i) pre[r][j] += at(c.hidden_w, j, i) * emb[r][i];
    }
  }
  Vec mean(h, 0.0), var(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    if (train) {
      for (std::size_t r = 0; r < n; ++r) mean[j] += pre[r][j];
      mean[j] /= static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r) var[j] += (pre[r][j] - mean[j]) * (pre[r][j] - mean[j]);
      var[j] /= static_cast<double>(n);
    } else {
      mean[j] = at(c.running_mean, 0, j);
      var[j] = at(c.running_var, 0, j);
    }
  }
  Mat out(n, Vec(2, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    Vec act(h);
    for (std::size_t j = 0; j < h; ++j) {
      const double y = at(c.bn_gamma, 0, j) * (pre[r][j] - mean[j]) / std::sqrt(var[j] + c.bn_eps) + at(c.bn_beta, 0, j);
      act[j] = std::max(0.0, y);
      if (pat) pat->push_back(y > 0.0);
    }
    double z[2];
    for (int o = 0; o < 2; ++o) {
      z[o] = at(c.out_b, 0, o);
      for (std::size_t j = 0; j < h; ++j) z[o] += at(c.out_w, o, j) * act[j];
    }
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
    out[r] = {e0 / (e0 + e1), e1 / (e0 + e1)};
  }
  return out;
}

inline double clamp_log(double p, Pattern* pat = nullptr) {
  if (pat) pat->push_back(p < 1e-12 || p > 1.0 - 1e-12);
  return std::log(std::clamp(p, 1e-12, 1.0 - 1e-12));
}

inline double cross_entropy(const Mat& probs, const std::vector<std::uint8_t>& labels, Pattern* pat = nullptr) {
  double s = 0.0;
  for (std::size_t l = 0; l < probs.size(); ++l) s -= clamp_log(probs[l][labels[l]], pat);
  return s;
}

// Reciprocal of the soft sum rate in bits/s/Hz, minus omega * sum log P(inactive).
inline double unsupervised(const Mat& probs, const linksched::ChannelMatrix& ch, double omega,
                           Pattern* pat = nullptr) {
  Vec pi(probs.size());
  for (std::size_t l = 0; l < probs.size(); ++l) pi[l] = probs[l][1];
  double s = 1.0 / (sum_rate(ch, pi) / ch.bandwidth_hz);
  for (const auto& row : probs) s -= omega * clamp_log(row[0], pat);
  return s;
}

// Loss of one mini-batch whose nodes share the batch-norm pool.
inline double batch_loss(const linksched::ModelParams& m, const std::vector<RefGraph>& graphs,
                         const std::vector<std::vector<std::uint8_t>>* labels,
                         const std::vector<linksched::ChannelMatrix>* channels, double omega,
                         Pattern* pat = nullptr) {
  Mat pooled;
  std::vector<std::size_t> offs{0};
  for (const auto& g : graphs) {
    const Mat mu = embed(g, m.embed, m.arch.iterations, pat);
    pooled.insert(pooled.end(), mu.begin(), mu.end());
    offs.push_back(pooled.size());
  }
  const Mat probs = classify(pooled, m.clf, true, pat);
  double total = 0.0;
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const Mat slice(probs.begin() + static_cast<long>(offs[b]), probs.begin() + static_cast<long>(offs[b + 1]));
    total += labels ? cross_entropy(slice, (*labels)[b], pat) : unsupervised(slice, (*channels)[b], omega, pat);
  }
  return total;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Critical value of the one-sample KS test at alpha = 0.01.
inline double ks_critical_01(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace ref
