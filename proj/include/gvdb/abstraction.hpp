#pragma once

#include "gvdb/geometry.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/partitioner.hpp"
#include "gvdb/placer.hpp"
#include "gvdb/rtree.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace gvdb {

// One per non-empty partition, at the mean of its members' global positions.
struct SuperNode {
  PartitionId partition = 0;
  Point centroid;
  std::uint64_t member_count = 0;

  friend bool operator==(const SuperNode&, const SuperNode&) = default;
};

// a < b; weight counts the crossing edges between the two partitions.
struct SuperEdge {
  PartitionId a = 0;
  PartitionId b = 0;
  std::uint64_t weight = 0;

  friend bool operator==(const SuperEdge&, const SuperEdge&) = default;
};

struct Abstraction {
  std::vector<SuperNode> supernodes;  // ascending partition id
  std::vector<SuperEdge> superedges;  // ascending (a, b); the index is the superedge id
  RTree tree;
};

inline Abstraction build_abstraction(const Graph& g, const PartitionAssignment& pa, const GlobalLayout& gl,
                                     std::size_t fanout = RTree::kDefaultFanout) {
  std::vector<double> sx(pa.k, 0.0), sy(pa.k, 0.0);
  std::vector<std::uint64_t> count(pa.k, 0);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const PartitionId p = pa.part_of[v];
    sx[p] += gl.global_positions[v].x;
    sy[p] += gl.global_positions[v].y;
    ++count[p];
  }
  Abstraction abs;
  std::vector<Point> centroid(pa.k);
  for (PartitionId p = 0; p < pa.k; ++p) {
    if (count[p] == 0) continue;
    const double c = static_cast<double>(count[p]);
    centroid[p] = {sx[p] / c, sy[p] / c};
    abs.supernodes.push_back({p, centroid[p], count[p]});
  }
  std::map<std::pair<PartitionId, PartitionId>, std::uint64_t> weights;
  for (const Edge& e : g.edges()) {
    const PartitionId a = pa.part_of[e.src], b = pa.part_of[e.dst];
    if (a != b) ++weights[{std::min(a, b), std::max(a, b)}];
  }
  for (const auto& [pair, w] : weights) abs.superedges.push_back({pair.first, pair.second, w});

  std::vector<SpatialItem> items;
  items.reserve(abs.supernodes.size() + abs.superedges.size());
  for (const SuperNode& s : abs.supernodes) items.push_back(SpatialItem::node(s.partition, s.centroid));
  for (std::size_t i = 0; i < abs.superedges.size(); ++i)
    items.push_back(SpatialItem::edge(i, centroid[abs.superedges[i].a], centroid[abs.superedges[i].b]));
  abs.tree = RTree::bulk_load(std::move(items), fanout);
  return abs;
}

}  // namespace gvdb
