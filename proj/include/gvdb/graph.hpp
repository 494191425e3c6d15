#pragma once

#include "gvdb/error.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gvdb {

using NodeId = std::uint64_t;
using EdgeId = std::uint64_t;

struct Node {
  NodeId id = 0;
  std::string label;
};

// Edges keep their ingest direction (src -> dst) for display; every algorithm
// in the pipeline treats them as undirected.
struct Edge {
  EdgeId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::optional<std::string> label;

  NodeId other(NodeId v) const { return v == src ? dst : src; }
};

// Immutable once built. Adjacency is stored CSR-style: incident(v) lists the ids
// of every edge touching v, each edge appearing once at each endpoint.
class Graph {
public:
  Graph() = default;

  Graph(std::vector<Node> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0; i < n; ++i)
      if (nodes_[i].id != i) throw ContractViolation("node ids must be dense and ordered");
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      if (e.id != i) throw ContractViolation("edge ids must be dense and ordered");
      if (e.src >= n || e.dst >= n) throw ContractViolation("edge endpoint out of range");
      if (e.src == e.dst) throw ContractViolation("self-loop in graph");
      ++offsets_[e.src + 1];
      ++offsets_[e.dst + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    incident_.resize(offsets_[n]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges_) {
      incident_[fill[e.src]++] = e.id;
      incident_[fill[e.dst]++] = e.id;
    }
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeId v) const { return nodes_[v]; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  std::span<const EdgeId> incident(NodeId v) const {
    return {incident_.data() + offsets_[v], incident_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t adjacency_size() const { return incident_.size(); }

private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> incident_;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Accumulates nodes keyed by label and edges deduplicated on
// (min endpoint, max endpoint, label).
class GraphBuilder {
public:
  NodeId intern(std::string_view label) {
    auto it = index_.find(std::string(label));
    if (it != index_.end()) return it->second;
    const NodeId id = nodes_.size();
    nodes_.push_back({id, std::string(label)});
    index_.emplace(nodes_.back().label, id);
    return id;
  }

  // Returns false when the edge was dropped as a self-loop or duplicate.
  bool add_edge(NodeId a, NodeId b, std::optional<std::string> label = std::nullopt) {
    if (a == b) {
      ++report_.self_loops_dropped;
      return false;
    }
    std::uint64_t label_key = 0;
    if (label) {
      auto [it, inserted] = edge_labels_.emplace(*label, edge_labels_.size() + 1);
      label_key = it->second;
    }
    const Key key{std::min(a, b), std::max(a, b), label_key};
    if (!seen_.insert(key).second) {
      ++report_.duplicates_dropped;
      return false;
    }
    edges_.push_back({edges_.size(), a, b, std::move(label)});
    return true;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  IngestReport& report() { return report_; }

  Graph build() && { return Graph(std::move(nodes_), std::move(edges_)); }

private:
  struct Key {
    std::uint64_t lo, hi, label;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.lo * 0x9e3779b97f4a7c15ULL;
      h ^= k.hi + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
      h ^= k.label + 0x85ebca6b + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, NodeId> index_;
  std::unordered_map<std::string, std::uint64_t> edge_labels_;
  std::unordered_set<Key, KeyHash> seen_;
  IngestReport report_;
};

}  // namespace gvdb
