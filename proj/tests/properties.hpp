// Randomized invariant checks shared by the unit suite and the acceptance
// runner. Each property draws its own cases from a fixed seed.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "linksched/baselines.hpp"
#include "linksched/embednn.hpp"
#include "linksched/graph.hpp"
#include "linksched/hash.hpp"
#include "linksched/trainer.hpp"

namespace props {

struct Outcome {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0 && cases > 0; }
  void fail(int c, const std::string& why) {
    if (failures++ == 0) first_failure = "case " + std::to_string(c) + ": " + why;
  }
};

inline constexpr int kDefaultCases = 100;

namespace detail {

inline linksched::Architecture random_arch(std::mt19937_64& rng, const linksched::Topology& topo) {
  linksched::Architecture a;
  a.embed_dim = 2 + static_cast<int>(rng() % 7);
  a.hidden = 2 + static_cast<int>(rng() % 7);
  a.iterations = 1 + static_cast<int>(rng() % 4);
  a.quant_bits = 1 + static_cast<int>(rng() % 4);
  a.topology = topo;
  return a;
}

// Perturbs every parameter so no test relies on the init distribution.
inline linksched::ModelParams random_model(std::mt19937_64& rng, const linksched::Architecture& a) {
  auto m = linksched::init_model(a, rng());
  std::normal_distribution<double> n01;
  for (auto* p : m.parameters()) {
    for (double& v : p->values()) v += 0.3 * n01(rng);
  }
  for (double& v : m.clf.running_mean.values()) v = n01(rng);
  for (double& v : m.clf.running_var.values()) v = 0.2 + std::abs(n01(rng));
  return m;
}

inline linksched::NetworkLayout random_layout(std::mt19937_64& rng, int min_links, int max_links) {
  linksched::LayoutConfig c;
  c.num_pairs = min_links + static_cast<int>(rng() % static_cast<std::uint64_t>(max_links - min_links + 1));
  c.area_edge = 80.0 + static_cast<double>(rng() % 420);
  c.d_min = 2.0;
  c.d_max = std::min(65.0, c.area_edge);
  return linksched::generate_layout(c, rng());
}

inline std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace detail

// Relabeling the pairs relabels graph nodes/edges, per-link rates and the
// model's per-node outputs the same way.
inline Outcome permutation_equivariance(int cases = kDefaultCases, std::uint64_t seed = 101) {
  using namespace linksched;
  Outcome out{"permutation equivariance"};
  std::mt19937_64 rng(seed);
  for (int c = 0; c < cases; ++c, ++out.cases) {
    const auto topo = rng() % 2 ? Topology::full() : Topology::knn(1 + static_cast<int>(rng() % 6));
    const auto arch = detail::random_arch(rng, topo);
    const auto model = detail::random_model(rng, arch);
    const auto lay = detail::random_layout(rng, 2, 16);
    const std::size_t n = lay.size();
    const auto perm = detail::random_permutation(rng, n);  // new index i holds old pair perm[i]
    NetworkLayout moved = lay;
    for (std::size_t i = 0; i < n; ++i) {
      moved.tx[i] = lay.tx[perm[i]];
      moved.rx[i] = lay.rx[perm[i]];
    }
    const auto spec = QuantizerSpec::for_layout(lay.config, arch.quant_bits);
    const auto g0 = build_graph(lay, spec, topo);
    const auto g1 = build_graph(moved, spec, topo);
    std::vector<std::size_t> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
    bool graph_ok = true;
    for (std::size_t i = 0; i < n && graph_ok; ++i) {
      const std::size_t v = perm[i];
      graph_ok = g1.node_feat[i] == g0.node_feat[v];
      auto a = g0.in_neighbors(v);
      auto fa = g0.in_edge_features(v);
      auto b = g1.in_neighbors(i);
      auto fb = g1.in_edge_features(i);
      if (a.size() != b.size()) graph_ok = false;
      std::vector<std::pair<std::size_t, std::uint32_t>> ea, eb;
      for (std::size_t e = 0; graph_ok && e < a.size(); ++e) {
        ea.emplace_back(inv[a[e]], fa[e]);
        eb.emplace_back(b[e], fb[e]);
      }
      std::sort(ea.begin(), ea.end());
      graph_ok = graph_ok && ea == eb;
    }
    if (!graph_ok) {
      out.fail(c, "graph edges do not follow the relabeling");
      continue;
    }
    const auto p0 = predict_probs(model, g0);
    const auto p1 = predict_probs(model, g1);
    const auto ch0 = compute_channel(lay, ChannelConfig{}, 0);
    const auto ch1 = compute_channel(moved, ChannelConfig{}, 0);
    Schedule rho0(n), rho1(n);
    for (std::size_t i = 0; i < n; ++i) rho0[i] = rng() & 1U;
    for (std::size_t i = 0; i < n; ++i) rho1[i] = rho0[perm[i]];
    const auto r0 = sum_rate(ch0, rho0);
    const auto r1 = sum_rate(ch1, rho1);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(p1[i] - p0[perm[i]]) > 1e-9) {
        out.fail(c, "model output moved by " + std::to_string(std::abs(p1[i] - p0[perm[i]])));
        break;
      }
      if (std::abs(r1.per_link[i] - r0.per_link[perm[i]]) > 1e-9 * std::max(1.0, r0.per_link[perm[i]])) {
        out.fail(c, "per-link rate does not follow the relabeling");
        break;
      }
    }
  }
  return out;
}

// mu_v after T iterations is unaffected by any pair w that cannot reach v in
// T - 1 hops along in-edges: moving w's receiver changes w's node and in-edge
// features but leaves mu_v bit-identical.
inline Outcome t_hop_locality(int cases = kDefaultCases, std::uint64_t seed = 202) {
  using namespace linksched;
  Outcome out{"T-hop locality"};
  std::mt19937_64 rng(seed);
  int sensitive = 0;
  for (int c = 0; c < cases; ++c, ++out.cases) {
    const int k = 1 + static_cast<int>(rng() % 3);
    auto arch = detail::random_arch(rng, Topology::knn(k));
    arch.iterations = 1 + static_cast<int>(rng() % 3);
    const auto model = detail::random_model(rng, arch);
    LayoutConfig lc;
    lc.num_pairs = 20 + static_cast<int>(rng() % 20);
    lc.area_edge = 500.0;
    const auto lay = generate_layout(lc, rng());
    const auto spec = QuantizerSpec::for_layout(lay.config, arch.quant_bits);
    const auto g = build_graph(lay, spec, arch.topology);
    const std::size_t n = lay.size();
    const std::size_t v = rng() % n;

    // Nodes within T - 1 hops upstream of v.
    std::vector<int> hops(n, -1);
    hops[v] = 0;
    std::vector<std::size_t> frontier{v};
    for (int h = 1; h < arch.iterations; ++h) {
      std::vector<std::size_t> next;
      for (auto x : frontier) {
        for (auto u : g.in_neighbors(x)) {
          if (hops[u] < 0) {
            hops[u] = h;
            next.push_back(u);
          }
        }
      }
      frontier = std::move(next);
    }
    std::vector<std::size_t> outside;
    for (std::size_t w = 0; w < n; ++w) {
      if (hops[w] < 0) outside.push_back(w);
    }
    if (outside.empty()) {
      out.fail(c, "no node outside the receptive field; enlarge the layout");
      continue;
    }
    const std::size_t w = outside[rng() % outside.size()];
    NetworkLayout moved = lay;
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    const double d = spec.node_range.lo + (spec.node_range.hi - spec.node_range.lo) * ((rng() % 1000) / 1000.0);
    const double a = ang(rng);
    moved.rx[w] = {lay.tx[w].x + d * std::cos(a), lay.tx[w].y + d * std::sin(a)};
    const auto g2 = build_graph(moved, spec, arch.topology);
    const Matrix mu1 = embed(g, model.embed);
    const Matrix mu2 = embed(g2, model.embed);
    bool same = true;
    for (std::size_t i = 0; i < mu1.cols(); ++i) same = same && mu1(v, i) == mu2(v, i);
    if (!same) out.fail(c, "mu_v changed when a node outside its receptive field moved");
    for (std::size_t i = 0; i < mu1.cols(); ++i) {
      if (mu1(w, i) != mu2(w, i)) {
        ++sensitive;
        break;
      }
    }
  }
  // The perturbation must actually reach the moved node in most cases, or the
  // check above would be vacuous.
  if (sensitive < cases / 2) out.fail(-1, "perturbation changed mu_w in only " + std::to_string(sensitive) + " cases");
  return out;
}

inline Outcome quantization_monotone_one_hot(int cases = kDefaultCases, std::uint64_t seed = 303) {
  using namespace linksched;
  Outcome out{"quantization monotonicity and one-hotness"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50.0, 700.0);
  for (int c = 0; c < cases; ++c, ++out.cases) {
    const int q = 1 + static_cast<int>(rng() % 8);
    const double lo = std::abs(u(rng)) / 10.0;
    const DistanceRange r{lo, lo + 1.0 + std::abs(u(rng))};
    double d1 = u(rng), d2 = u(rng);
    if (d1 > d2) std::swap(d1, d2);
    if (quantize_index(d1, r, q) > quantize_index(d2, r, q)) {
      out.fail(c, "index decreased with distance");
      continue;
    }
    for (double d : {d1, d2, r.lo, r.hi}) {
      const auto v = quantize(d, r, q);
      const auto ones = std::count(v.begin(), v.end(), 1.0);
      const auto zeros = std::count(v.begin(), v.end(), 0.0);
      if (v.size() != (std::size_t{1} << q) || ones != 1 || zeros + ones != static_cast<long>(v.size())) {
        out.fail(c, "feature is not one-hot");
        break;
      }
    }
    if (quantize_index(r.lo, r, q) != 0 || quantize_index(r.hi, r, q) != (std::size_t{1} << q) - 1) {
      out.fail(c, "range endpoints map to the wrong interval");
    }
  }
  return out;
}

// Rows of the classifier output are probability pairs in both modes.
inline Outcome softmax_normalization(int cases = kDefaultCases, std::uint64_t seed = 404) {
  using namespace linksched;
  Outcome out{"softmax normalization"};
  std::mt19937_64 rng(seed);
  for (int c = 0; c < cases; ++c, ++out.cases) {
    const auto arch = detail::random_arch(rng, Topology::full());
    auto model = detail::random_model(rng, arch);
    const auto lay = detail::random_layout(rng, 1, 30);
    const auto g = build_graph(lay, QuantizerSpec::for_layout(lay.config, arch.quant_bits), arch.topology);
    const SchedGraph* gp = &g;
    BatchForward st;
    const Matrix train_probs = forward_batch(model, std::span<const SchedGraph* const>(&gp, 1), Mode::kTrain, st, false);
    const Matrix eval_probs = classify_eval(embed(g, model.embed), model.clf);
    for (const Matrix* m : {&train_probs, &eval_probs}) {
      for (std::size_t r = 0; r < m->rows(); ++r) {
        const double a = (*m)(r, 0), b = (*m)(r, 1);
        if (!(a >= 0.0 && b >= 0.0 && a <= 1.0 && b <= 1.0) || std::abs(a + b - 1.0) > 1e-12) {
          out.fail(c, "row " + std::to_string(r) + " = (" + std::to_string(a) + ", " + std::to_string(b) + ")");
          r = m->rows();
        }
      }
    }
  }
  return out;
}

// Everything seeded reproduces bit for bit: layouts, shadowed channels,
// initialization, random baselines and a short training run.
inline Outcome determinism_under_seed(int cases = kDefaultCases, std::uint64_t seed = 505) {
  using namespace linksched;
  Outcome out{"determinism under seed"};
  std::mt19937_64 rng(seed);
  for (int c = 0; c < cases; ++c, ++out.cases) {
    const std::uint64_t s = rng();
    LayoutConfig lc;
    lc.num_pairs = 3 + static_cast<int>(rng() % 4);
    ChannelConfig cc;
    cc.shadowing_std_db = static_cast<double>(rng() % 8);
    const auto l1 = generate_layout(lc, s), l2 = generate_layout(lc, s);
    if (!(l1 == l2)) {
      out.fail(c, "layout");
      continue;
    }
    if (compute_channel(l1, cc, s).gain != compute_channel(l2, cc, s).gain) {
      out.fail(c, "channel");
      continue;
    }
    if (heuristic_schedule(compute_channel(l1, cc, s), OracleKind::random_active(0.5), s).rho !=
        heuristic_schedule(compute_channel(l1, cc, s), OracleKind::random_active(0.5), s).rho) {
      out.fail(c, "random baseline");
      continue;
    }
    Dataset data = generate_dataset(lc, 4, s, cc.shadowing_std_db);
    label_records(data, ChannelConfig{}, OracleKind::brute_force());
    TrainConfig tc;
    tc.seed = s;
    tc.epochs_max = 2;
    tc.batch_size = 2;
    tc.val_fraction = 0.25;
    tc.arch.embed_dim = 3;
    tc.arch.hidden = 3;
    tc.mode = c % 2 ? TrainMode::kSupervised : TrainMode::kUnsupervised;
    const auto a = train(data, tc), b = train(data, tc);
    bool same = a.history.size() == b.history.size();
    for (std::size_t i = 0; same && i < a.history.size(); ++i) same = a.history[i].train_loss == b.history[i].train_loss;
    const auto pa = a.model.parameters(), pb = b.model.parameters();
    for (std::size_t i = 0; same && i < pa.size(); ++i) same = *pa[i] == *pb[i];
    same = same && a.model.clf.running_mean == b.model.clf.running_mean && a.model.clf.running_var == b.model.clf.running_var;
    if (!same) out.fail(c, "training run");
  }
  return out;
}

inline std::vector<Outcome> all(int cases = kDefaultCases) {
  return {permutation_equivariance(cases), t_hop_locality(cases), quantization_monotone_one_hot(cases),
          softmax_normalization(cases), determinism_under_seed(cases)};
}

}  // namespace props
