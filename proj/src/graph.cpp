#include "linksched/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "linksched/error.hpp"

namespace linksched {
namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BgPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using Entry = std::pair<BgPoint, std::uint32_t>;

// Nearest transmitters to each receiver, answered from an R-tree. Returns
// false when the answer could depend on a distance tie at the cut.
class TxIndex {
 public:
  explicit TxIndex(const NetworkLayout& layout) {
    std::vector<Entry> entries;
    entries.reserve(layout.size());
    for (std::size_t u = 0; u < layout.size(); ++u) {
      entries.emplace_back(BgPoint(layout.tx[u].x, layout.tx[u].y), static_cast<std::uint32_t>(u));
    }
    tree_ = bgi::rtree<Entry, bgi::rstar<16>>(entries);
  }

  bool nearest(const NetworkLayout& layout, std::size_t v, std::size_t k, std::vector<std::uint32_t>& out,
               std::vector<double>& dist) const {
    const BgPoint q(layout.rx[v].x, layout.rx[v].y);
    found_.clear();
    const auto self = static_cast<std::uint32_t>(v);
    tree_.query(bgi::nearest(q, static_cast<unsigned>(k + 1)) &&
                    bgi::satisfies([self](const Entry& e) { return e.second != self; }),
                std::back_inserter(found_));
    out.clear();
    for (const auto& e : found_) {
      dist[e.second] = layout.cross_distance(e.second, v);
      out.push_back(e.second);
    }
    std::sort(out.begin(), out.end(),
              [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    if (out.size() > k) {
      if (!(dist[out[k]] > dist[out[k - 1]] * (1.0 + 1e-12))) return false;
      out.resize(k);
    }
    return true;
  }

 private:
  bgi::rtree<Entry, bgi::rstar<16>> tree_;
  mutable std::vector<Entry> found_;
};

bool finite_layout(const NetworkLayout& layout) {
  auto ok = [](const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  return std::all_of(layout.tx.begin(), layout.tx.end(), ok) && std::all_of(layout.rx.begin(), layout.rx.end(), ok);
}

}  // namespace

void QuantizerSpec::validate() const {
  if (bits < 1 || bits > 16) throw ConfigError("quantization bits must lie in [1, 16], got " + std::to_string(bits));
  if (!(node_range.hi > node_range.lo)) throw ConfigError("node quantizer range is empty");
  if (!(edge_range.hi > edge_range.lo)) throw ConfigError("edge quantizer range is empty");
}

QuantizerSpec QuantizerSpec::for_layout(const LayoutConfig& config, int bits) {
  QuantizerSpec spec;
  spec.bits = bits;
  spec.node_range = config.d_max > config.d_min ? DistanceRange{config.d_min, config.d_max}
                                                : DistanceRange{0.0, config.d_max};
  spec.edge_range = {0.0, config.area_edge};
  spec.validate();
  return spec;
}

std::size_t quantize_index(double d, const DistanceRange& range, int bits) {
  if (bits < 1) throw ConfigError("quantization bits must be >= 1");
  if (!(range.hi > range.lo)) throw ConfigError("quantizer range must satisfy hi > lo");
  const auto cells = std::size_t{1} << bits;
  const double width = (range.hi - range.lo) / static_cast<double>(cells);
  const double pos = std::floor((d - range.lo) / width);
  if (!(pos > 0.0)) return 0;  // also catches NaN
  return std::min(cells - 1, static_cast<std::size_t>(pos));
}

std::vector<double> quantize(double d, const DistanceRange& range, int bits) {
  std::vector<double> v(std::size_t{1} << bits, 0.0);
  v[quantize_index(d, range, bits)] = 1.0;
  return v;
}

Topology Topology::parse(const std::string& text) {
  if (text == "full") return full();
  if (text.rfind("knn:", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(text.substr(4));
    } catch (const std::exception&) {
      throw ConfigError("bad topology '" + text + "'");
    }
    if (k < 1) throw ConfigError("knn topology needs K >= 1");
    return knn(k);
  }
  throw ConfigError("unknown topology '" + text + "' (expected full or knn:K)");
}

std::string Topology::name() const { return kind == Kind::kFullyConnected ? "full" : "knn:" + std::to_string(k); }

std::size_t Topology::in_degree(std::size_t num_nodes) const {
  const std::size_t others = num_nodes == 0 ? 0 : num_nodes - 1;
  return kind == Kind::kFullyConnected ? others : std::min<std::size_t>(static_cast<std::size_t>(k), others);
}

std::vector<double> SchedGraph::node_one_hot(std::size_t v) const {
  std::vector<double> x(feat_dim, 0.0);
  x[node_feat[v]] = 1.0;
  return x;
}

std::vector<double> SchedGraph::edge_histogram(std::size_t v) const {
  std::vector<double> h(feat_dim, 0.0);
  for (auto f : in_edge_features(v)) h[f] += 1.0;
  return h;
}

SchedGraph build_graph(const NetworkLayout& layout, const QuantizerSpec& spec, const Topology& topology) {
  spec.validate();
  if (topology.kind == Topology::Kind::kKnn && topology.k < 1) throw ConfigError("knn topology needs K >= 1");
  const std::size_t n = layout.size();
  const std::size_t degree = topology.in_degree(n);

  SchedGraph g;
  g.num_nodes = n;
  g.feat_dim = spec.dim();
  g.topology = topology;
  g.node_feat.resize(n);
  g.in_offsets.resize(n + 1);
  g.in_src.reserve(n * degree);
  g.in_feat.reserve(n * degree);

  std::vector<std::uint32_t> candidates(n);
  std::vector<double> dist(n);
  std::optional<TxIndex> index;
  if (degree + 1 < n && finite_layout(layout)) index.emplace(layout);
  for (std::size_t v = 0; v < n; ++v) {
    g.node_feat[v] = static_cast<std::uint32_t>(quantize_index(layout.direct_distance(v), spec.node_range, spec.bits));
    g.in_offsets[v] = static_cast<std::uint32_t>(g.in_src.size());

    if (index && index->nearest(layout, v, degree, candidates, dist)) {
      std::sort(candidates.begin(), candidates.end());
      for (auto u : candidates) {
        g.in_src.push_back(u);
        g.in_feat.push_back(static_cast<std::uint32_t>(quantize_index(dist[u], spec.edge_range, spec.bits)));
      }
      continue;
    }
    candidates.clear();
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      dist[u] = layout.cross_distance(u, v);
      candidates.push_back(static_cast<std::uint32_t>(u));
    }
    if (degree < candidates.size()) {
      auto nearer = [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
      std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(degree), candidates.end(),
                       nearer);
      candidates.resize(degree);
      std::sort(candidates.begin(), candidates.end());
    }
    for (auto u : candidates) {
      g.in_src.push_back(u);
      g.in_feat.push_back(static_cast<std::uint32_t>(quantize_index(dist[u], spec.edge_range, spec.bits)));
    }
  }
  g.in_offsets[n] = static_cast<std::uint32_t>(g.in_src.size());
  return g;
}

void write_edge_list(std::ostream& os, const SchedGraph& g) {
  os << "# nodes=" << g.num_nodes << " feat_dim=" << g.feat_dim << " topology=" << g.topology.name() << '\n';
  for (std::size_t v = 0; v < g.num_nodes; ++v) os << "node " << v << ' ' << g.node_feat[v] << '\n';
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    const auto src = g.in_neighbors(v);
    const auto feat = g.in_edge_features(v);
    for (std::size_t i = 0; i < src.size(); ++i) os << "edge " << src[i] << ' ' << v << ' ' << feat[i] << '\n';
  }
}

}  // namespace linksched
