#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "linksched/netgen.hpp"

namespace linksched {

struct DistanceRange {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const DistanceRange&, const DistanceRange&) = default;
};

struct QuantizerSpec {
  int bits = 3;
  DistanceRange node_range{2.0, 65.0};
  DistanceRange edge_range{0.0, 500.0};

  std::size_t dim() const { return std::size_t{1} << bits; }
  void validate() const;

  // Node range [d_min, d_max], edge range [0, area_edge]. A degenerate
  // d_min == d_max widens the node range to [0, d_max].
  static QuantizerSpec for_layout(const LayoutConfig& config, int bits);
};

// Zero-based interval index in [0, 2^bits). Intervals are half-open with the
// last one closed; out-of-range distances clamp to the first/last interval.
std::size_t quantize_index(double d, const DistanceRange& range, int bits);
std::vector<double> quantize(double d, const DistanceRange& range, int bits);

struct Topology {
  enum class Kind { kFullyConnected, kKnn };
  Kind kind = Kind::kFullyConnected;
  int k = 0;

  static Topology full() { return {Kind::kFullyConnected, 0}; }
  static Topology knn(int k) { return {Kind::kKnn, k}; }
  // "full" or "knn:K".
  static Topology parse(const std::string& text);
  std::string name() const;
  std::size_t in_degree(std::size_t num_nodes) const;
  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Directed interference graph: node v is D2D pair v, edge u -> v is the
/// interference link from transmitter u to receiver v. One-hot features are
/// stored as their hot index. In-edges are kept in CSR form sorted by source.
struct SchedGraph {
  std::size_t num_nodes = 0;
  std::size_t feat_dim = 0;
  Topology topology;
  std::vector<std::uint32_t> node_feat;
  std::vector<std::uint32_t> in_offsets;  // size num_nodes + 1
  std::vector<std::uint32_t> in_src;
  std::vector<std::uint32_t> in_feat;

  std::span<const std::uint32_t> in_neighbors(std::size_t v) const {
    return {in_src.data() + in_offsets[v], in_offsets[v + 1] - in_offsets[v]};
  }
  std::span<const std::uint32_t> in_edge_features(std::size_t v) const {
    return {in_feat.data() + in_offsets[v], in_offsets[v + 1] - in_offsets[v]};
  }
  std::size_t num_edges() const { return in_src.size(); }

  std::vector<double> node_one_hot(std::size_t v) const;
  // Sum of the one-hot in-edge features of v: a count vector of length feat_dim.
  std::vector<double> edge_histogram(std::size_t v) const;
};

SchedGraph build_graph(const NetworkLayout& layout, const QuantizerSpec& spec, const Topology& topology);

// Debug dump: "node v feat" lines, then "edge u v feat" lines.
void write_edge_list(std::ostream& os, const SchedGraph& g);

}  // namespace linksched
