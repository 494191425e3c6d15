#pragma once

#include "gvdb/abstraction.hpp"
#include "gvdb/geometry.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/partitioner.hpp"
#include "gvdb/rtree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gvdb {

inline constexpr int kFormatVersion = 1;

struct NodeRecord {
  Point pos;
  PartitionId partition = 0;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct EdgeRecord {
  NodeId src = 0;
  NodeId dst = 0;
  bool crossing = false;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

// Echo of the preprocessing parameters, recorded in the manifest.
struct BuildParams {
  std::uint64_t k = 0;
  double balance_eps = 0.0;
  double edge_length = 0.0;
  std::uint64_t layout_iterations = 0;
  double margin = 0.0;
  double gap = 0.0;
  std::uint64_t partition_seed = 0;
  std::uint64_t layout_seed = 0;
  std::uint64_t rtree_fanout = 0;

  friend bool operator==(const BuildParams&, const BuildParams&) = default;
};

struct SectionInfo {
  std::string file;
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;

  friend bool operator==(const SectionInfo&, const SectionInfo&) = default;
};

struct Manifest {
  int format_version = kFormatVersion;
  std::uint64_t node_count = 0;
  std::uint64_t edge_count = 0;
  std::uint64_t partition_count = 0;
  std::uint64_t crossing_count = 0;
  Rect global_bbox;
  BuildParams params;
  // Keyed by section name ("node table", ...). Filled by persist/load.
  std::map<std::string, SectionInfo> sections;
};

// Everything the query side needs: node and edge tables, labels, and both
// R-tree levels.
struct StoreData {
  Manifest manifest;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  std::vector<std::string> node_labels;
  std::vector<std::optional<std::string>> edge_labels;
  RTree level0;
  std::vector<SuperNode> supernodes;
  std::vector<SuperEdge> superedges;
  RTree level1;
};

}  // namespace gvdb
