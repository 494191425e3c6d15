#pragma once

// Independent oracles shared by the unit and acceptance suites. Nothing here
// calls into the code paths it is used to check.

#include "gvdb/gvdb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <span>
#include <unistd.h>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace gvdb::testing {

inline Graph graph_from_pairs(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  GraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.intern("n" + std::to_string(i));
  for (auto [u, v] : pairs) b.add_edge(u, v);
  return std::move(b).build();
}

inline Graph complete_graph(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  return graph_from_pairs(n, pairs);
}

// Minimum cut over every balanced bisection (part sizes floor/ceil of n/2),
// by enumerating subsets. n <= 20.
inline std::size_t brute_force_min_bisection(const Graph& g) {
  const std::size_t n = g.node_count();
  std::size_t best = SIZE_MAX;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto ones = static_cast<std::size_t>(__builtin_popcount(mask));
    if (ones != n / 2 && ones != (n + 1) / 2) continue;
    std::size_t cut = 0;
    for (const Edge& e : g.edges()) cut += ((mask >> e.src) & 1u) != ((mask >> e.dst) & 1u);
    best = std::min(best, cut);
  }
  return best;
}

// Uniform-random balanced assignment: a shuffled sequence of part labels.
inline std::size_t random_balanced_cut(const Graph& g, std::size_t k, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint32_t>(i % k);
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::size_t cut = 0;
  for (const Edge& e : g.edges()) cut += labels[e.src] != labels[e.dst];
  return cut;
}

// Liang-Barsky clipping of a segment against a closed rectangle.
inline bool clip_segment(Point a, Point b, const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double t = q[i] / p[i];
      if (p[i] < 0.0)
        t0 = std::max(t0, t);
      else
        t1 = std::min(t1, t);
      if (t0 > t1) return false;
    }
  }
  return true;
}

// Linear scan over every item with the geometry tests of the public API.
inline std::set<std::pair<int, std::uint64_t>> scan_window(const std::vector<SpatialItem>& items, const Rect& w) {
  std::set<std::pair<int, std::uint64_t>> out;
  for (const SpatialItem& it : items) {
    const bool hit = it.kind == ItemKind::node ? w.contains(it.geometry.a)
                                               : segment_intersects_rect(it.geometry, w);
    if (hit) out.emplace(static_cast<int>(it.kind), it.id);
  }
  return out;
}

inline std::vector<SpatialItem> random_items(std::size_t n, std::uint64_t seed, double extent = 1000.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, extent);
  std::uniform_real_distribution<double> len(-extent / 20, extent / 20);
  std::vector<SpatialItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a{coord(rng), coord(rng)};
    if (i % 2 == 0) {
      items.push_back(SpatialItem::node(i, a));
    } else {
      const Point b{a.x + len(rng), a.y + len(rng)};
      items.push_back(SpatialItem::edge(i, a, b));
    }
  }
  return items;
}

inline Rect random_window(std::mt19937_64& rng, const Rect& bounds, double max_frac = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double w = bounds.width() * max_frac * u(rng);
  const double h = bounds.height() * max_frac * u(rng);
  const double x = bounds.x_min - 0.05 * bounds.width() + u(rng) * 1.1 * bounds.width();
  const double y = bounds.y_min - 0.05 * bounds.height() + u(rng) * 1.1 * bounds.height();
  return {x, y, x + w, y + h};
}

// Expected level-0 view by linear scan over the node and edge tables, order hits
// by (id, node before edge), keep max_items, then add endpoints of kept edges.
struct ExpectedView {
  std::set<std::uint64_t> nodes;
  std::set<std::uint64_t> edges;
  bool truncated = false;
};

inline ExpectedView expected_detail_view(const StoreData& s, const Rect& w, std::size_t max_items) {
  std::vector<std::tuple<std::uint64_t, int>> hits;
  for (std::uint64_t v = 0; v < s.nodes.size(); ++v)
    if (w.contains(s.nodes[v].pos)) hits.emplace_back(v, 0);
  for (std::uint64_t e = 0; e < s.edges.size(); ++e) {
    const Point a = s.nodes[s.edges[e].src].pos, b = s.nodes[s.edges[e].dst].pos;
    if (segment_intersects_rect({a, b}, w)) hits.emplace_back(e, 1);
  }
  std::sort(hits.begin(), hits.end());
  ExpectedView out;
  out.truncated = hits.size() > max_items;
  if (out.truncated) hits.resize(max_items);
  for (auto [id, kind] : hits) {
    if (kind == 0) {
      out.nodes.insert(id);
    } else {
      out.edges.insert(id);
      out.nodes.insert(s.edges[id].src);
      out.nodes.insert(s.edges[id].dst);
    }
  }
  return out;
}

// Total crossing length when partitions sit in one row in id order, bboxes
// `gap` apart and vertically centered on y = 0.
inline double single_row_crossing_length(std::span<const LaidOutPartition> layouts,
                                         std::span<const CrossingEdge> crossing, double gap) {
  std::vector<const LaidOutPartition*> by_id;
  for (const auto& l : layouts) by_id.push_back(&l);
  std::sort(by_id.begin(), by_id.end(), [](auto a, auto b) { return a->partition_id < b->partition_id; });
  std::vector<Point> pos;
  double cursor = 0;
  for (const LaidOutPartition* l : by_id) {
    const Point off{cursor - l->bbox.x_min, -l->bbox.center().y};
    for (std::size_t i = 0; i < l->members.size(); ++i) {
      if (pos.size() <= l->members[i]) pos.resize(l->members[i] + 1);
      pos[l->members[i]] = l->positions[i] + off;
    }
    cursor += l->bbox.width() + gap;
  }
  double total = 0;
  for (const auto& c : crossing) total += distance(pos[c.u], pos[c.v]);
  return total;
}

inline PipelineOutput run_small_pipeline(const Graph& g, std::size_t k, std::uint64_t seed = 1,
                                         std::size_t iterations = 300) {
  PipelineParams p;
  p.partitioner.k = k;
  p.partitioner.seed = seed;
  p.layout.seed = seed;
  p.layout.iterations = iterations;
  return run_pipeline(g, p);
}

inline StoreData store_from_edgelist(std::string_view text, std::size_t k, std::uint64_t seed = 1) {
  return run_small_pipeline(ingest_edgelist(text).graph, k, seed).store;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gvdb_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace gvdb::testing
