#pragma once

#include "gvdb/abstraction.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/layout.hpp"
#include "gvdb/partitioner.hpp"
#include "gvdb/placer.hpp"
#include "gvdb/rtree.hpp"
#include "gvdb/store_data.hpp"

#include <chrono>
#include <vector>

namespace gvdb {

struct PipelineParams {
  PartitionerParams partitioner;
  LayoutParams layout;
  PlacerParams placer;
  std::size_t rtree_fanout = RTree::kDefaultFanout;
  // Layout worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
};

struct PipelineTimings {
  double partition_ms = 0;
  double layout_ms = 0;
  double place_ms = 0;
  double index_ms = 0;
};

struct PipelineOutput {
  PartitionAssignment partition;
  std::vector<LaidOutPartition> layouts;
  GlobalLayout global;
  Abstraction abstraction;
  StoreData store;
  PipelineTimings timings;
};

// Level-0 items: every node as a point, every edge as a segment.
inline RTree build_detail_index(const Graph& g, const std::vector<Point>& pos, std::size_t fanout) {
  std::vector<SpatialItem> items;
  items.reserve(g.node_count() + g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) items.push_back(SpatialItem::node(v, pos[v]));
  for (const Edge& e : g.edges()) items.push_back(SpatialItem::edge(e.id, pos[e.src], pos[e.dst]));
  return RTree::bulk_load(std::move(items), fanout);
}

inline PipelineOutput run_pipeline(const Graph& g, const PipelineParams& params) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t) {
    return std::chrono::duration<double, std::milli>(clock::now() - t).count();
  };
  PipelineOutput out;

  auto t = clock::now();
  out.partition = partition(g, params.partitioner);
  out.timings.partition_ms = ms_since(t);

  t = clock::now();
  out.layouts = layout_partitions(g, out.partition, params.layout, params.threads);
  out.timings.layout_ms = ms_since(t);

  t = clock::now();
  const auto crossing = crossing_edge_list(g, out.partition);
  out.global = place_partitions(out.layouts, crossing, params.placer);
  out.timings.place_ms = ms_since(t);

  t = clock::now();
  out.abstraction = build_abstraction(g, out.partition, out.global, params.rtree_fanout);

  StoreData& s = out.store;
  s.nodes.resize(g.node_count());
  s.node_labels.reserve(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    s.nodes[v] = {out.global.global_positions[v], out.partition.part_of[v]};
    s.node_labels.push_back(g.node(v).label);
  }
  s.edges.reserve(g.edge_count());
  s.edge_labels.reserve(g.edge_count());
  for (const Edge& e : g.edges()) {
    s.edges.push_back({e.src, e.dst, out.partition.part_of[e.src] != out.partition.part_of[e.dst]});
    s.edge_labels.push_back(e.label);
  }
  s.level0 = build_detail_index(g, out.global.global_positions, params.rtree_fanout);
  s.supernodes = out.abstraction.supernodes;
  s.superedges = out.abstraction.superedges;
  s.level1 = out.abstraction.tree;

  Manifest& m = s.manifest;
  m.node_count = g.node_count();
  m.edge_count = g.edge_count();
  m.partition_count = out.partition.k;
  m.crossing_count = out.partition.cut_size;
  m.global_bbox = out.global.global_bbox();
  m.params.k = out.partition.k;
  m.params.balance_eps = params.partitioner.balance_eps;
  m.params.edge_length = params.layout.ideal_edge_length;
  m.params.layout_iterations = params.layout.iterations;
  m.params.margin = params.layout.margin;
  m.params.gap = params.placer.gap;
  m.params.partition_seed = params.partitioner.seed;
  m.params.layout_seed = params.layout.seed;
  m.params.rtree_fanout = params.rtree_fanout;
  out.timings.index_ms = ms_since(t);
  return out;
}

}  // namespace gvdb
