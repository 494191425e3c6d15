#pragma once

#include "gvdb/error.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/rng.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

namespace gvdb::synthetic {

inline std::string node_label(std::size_t i) { return "v" + std::to_string(i); }

// Barabasi-Albert preferential attachment: each new node links to m distinct
// existing nodes chosen with probability proportional to degree. The first new
// node links to all m seed nodes.
inline Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0 || n <= m) throw InvalidParameter("m", "need 0 < m < n");
  Rng rng(seed);
  GraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.intern(node_label(i));
  std::vector<NodeId> endpoints;  // each node repeated once per incident edge
  std::vector<NodeId> targets;
  for (NodeId v = m; v < n; ++v) {
    targets.clear();
    if (v == m) {
      for (NodeId u = 0; u < m; ++u) targets.push_back(u);
    } else {
      while (targets.size() < m) {
        const NodeId u = endpoints[rng.below(endpoints.size())];
        if (std::find(targets.begin(), targets.end(), u) == targets.end()) targets.push_back(u);
      }
    }
    for (NodeId u : targets) {
      b.add_edge(v, u);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  return std::move(b).build();
}

// Planted communities: nodes are split into `communities` contiguous blocks;
// each edge is intra-block with probability 1 - inter_fraction. Exactly m
// distinct edges. When m >= n every node gets at least one edge, so the graph
// survives a round trip through an edge list.
inline Graph community_graph(std::size_t n, std::size_t m, std::size_t communities, double inter_fraction,
                             std::uint64_t seed) {
  if (communities == 0 || communities > n) throw InvalidParameter("communities", "need 1 <= communities <= n");
  const std::size_t block = (n + communities - 1) / communities;
  if (block < 2) throw InvalidParameter("communities", "blocks need at least two nodes");
  if (m > n * (n - 1) / 4) throw InvalidParameter("m", "too dense for rejection sampling");
  Rng rng(seed);
  GraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.intern(node_label(i));
  auto block_partner = [&](NodeId u) {
    const NodeId start = (u / block) * block;
    const NodeId size = std::min<NodeId>(block, n - start);
    if (size < 2) return u;
    NodeId v = u;
    while (v == u) v = start + rng.below(size);
    return v;
  };
  if (m >= n) {
    std::vector<bool> touched(n, false);
    for (NodeId u = 0; u < n; ++u) {
      if (touched[u]) continue;
      NodeId v = block_partner(u);
      if (v == u) v = (u + 1) % n;
      b.add_edge(u, v);
      touched[u] = touched[v] = true;
    }
  }
  while (b.edge_count() < m) {
    const NodeId u = rng.below(n);
    NodeId v;
    if (communities > 1 && rng.uniform() < inter_fraction) {
      v = rng.below(n);
    } else {
      const NodeId start = (u / block) * block;
      const NodeId size = std::min<NodeId>(block, n - start);
      if (size < 2) continue;
      v = start + rng.below(size);
    }
    b.add_edge(u, v);
  }
  return std::move(b).build();
}

inline void write_edgelist(const Graph& g, std::ostream& out) {
  for (const Edge& e : g.edges()) out << g.node(e.src).label << '\t' << g.node(e.dst).label << '\n';
}

}  // namespace gvdb::synthetic
