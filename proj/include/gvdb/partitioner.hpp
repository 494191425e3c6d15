#pragma once

#include "gvdb/error.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <vector>

namespace gvdb {

using PartitionId = std::uint32_t;

inline constexpr std::size_t kDefaultNodesPerPartition = 2000;

struct PartitionerParams {
  // Unset means ceil(n / 2000).
  std::optional<std::size_t> k;
  double balance_eps = 0.05;
  std::size_t max_fm_passes = 10;
  std::uint64_t seed = 1;
};

struct PartitionAssignment {
  std::vector<PartitionId> part_of;
  std::size_t k = 0;
  double balance_eps = 0.0;
  std::size_t cut_size = 0;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(k, 0);
    for (PartitionId p : part_of) ++s[p];
    return s;
  }
};

// Instrumentation hook; lets tests observe the refinement without
// re-implementing it.
struct PartitionTrace {
  std::size_t initial_cut = 0;
  std::vector<std::size_t> cut_after_pass;
};

inline std::size_t default_partition_count(std::size_t n) {
  return std::max<std::size_t>(1, (n + kDefaultNodesPerPartition - 1) / kDefaultNodesPerPartition);
}

// Largest admissible partition: floor((1 + eps) * ceil(n / k)).
inline std::size_t balance_limit(std::size_t n, std::size_t k, double eps) {
  const std::size_t base = (n + k - 1) / k;
  return static_cast<std::size_t>(std::floor((1.0 + eps) * static_cast<double>(base) + 1e-9));
}

inline std::size_t count_cut(const Graph& g, const std::vector<PartitionId>& part_of) {
  std::size_t cut = 0;
  for (const Edge& e : g.edges()) cut += part_of[e.src] != part_of[e.dst];
  return cut;
}

// Edges whose endpoints lie in different partitions, ascending id.
inline std::vector<EdgeId> crossing_edges(const Graph& g, const PartitionAssignment& pa) {
  std::vector<EdgeId> out;
  for (const Edge& e : g.edges())
    if (pa.part_of[e.src] != pa.part_of[e.dst]) out.push_back(e.id);
  return out;
}

namespace detail {

inline constexpr PartitionId kUnassigned = UINT32_MAX;

// Connected components, largest first (ties: smallest member id first).
inline std::vector<std::vector<NodeId>> components_by_size(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<NodeId>> comps;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> comp{s};
    seen[s] = true;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (EdgeId e : g.incident(comp[i])) {
        const NodeId w = g.edge(e).other(comp[i]);
        if (!seen[w]) {
          seen[w] = true;
          comp.push_back(w);
        }
      }
    }
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

// Two BFS sweeps from a random member; returns the last node reached.
inline NodeId pseudo_peripheral(const Graph& g, const std::vector<NodeId>& comp, Rng& rng,
                                std::vector<std::uint32_t>& stamp, std::uint32_t& epoch) {
  NodeId start = comp[rng.below(comp.size())];
  for (int sweep = 0; sweep < 2; ++sweep) {
    ++epoch;
    std::vector<NodeId> order{start};
    stamp[start] = epoch;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (EdgeId e : g.incident(order[i])) {
        const NodeId w = g.edge(e).other(order[i]);
        if (stamp[w] != epoch) {
          stamp[w] = epoch;
          order.push_back(w);
        }
      }
    }
    start = order.back();
  }
  return start;
}

inline std::vector<PartitionId> region_growing(const Graph& g, std::size_t k, Rng& rng) {
  const std::size_t n = g.node_count();
  std::vector<PartitionId> part(n, kUnassigned);
  std::vector<std::size_t> target(k, n / k);
  for (std::size_t p = 0; p < n % k; ++p) ++target[p];

  std::vector<std::uint32_t> stamp(n, 0);
  std::uint32_t epoch = 0;
  PartitionId current = 0;
  std::size_t fill = 0;
  auto advance = [&] {
    if (fill == target[current] && current + 1 < k) {
      ++current;
      fill = 0;
    }
  };

  for (const auto& comp : components_by_size(g)) {
    if (comp.size() <= target[current] - fill) {
      for (NodeId v : comp) part[v] = current;
      fill += comp.size();
      advance();
      continue;
    }
    // Grow one BFS region per partition. Nodes discovered but not taken by a
    // full region seed the next one, so consecutive regions stay adjacent.
    std::deque<NodeId> frontier{pseudo_peripheral(g, comp, rng, stamp, epoch)};
    std::size_t remaining = comp.size();
    std::size_t scan = 0;  // fallback cursor into comp
    while (remaining > 0) {
      NodeId seed = n;
      while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop_front();
        if (part[v] == kUnassigned) {
          seed = v;
          break;
        }
      }
      if (seed == n) {
        while (part[comp[scan]] != kUnassigned) ++scan;
        seed = comp[scan];
      }
      ++epoch;
      std::deque<NodeId> queue{seed};
      stamp[seed] = epoch;
      while (!queue.empty() && fill < target[current]) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (part[v] != kUnassigned) continue;
        part[v] = current;
        ++fill;
        --remaining;
        for (EdgeId e : g.incident(v)) {
          const NodeId w = g.edge(e).other(v);
          if (part[w] == kUnassigned && stamp[w] != epoch) {
            stamp[w] = epoch;
            queue.push_back(w);
          }
        }
      }
      frontier.insert(frontier.end(), queue.begin(), queue.end());
      advance();
    }
  }
  return part;
}

// k-way boundary Fiduccia-Mattheyses. Each pass moves unlocked nodes greedily
// (highest gain first, ties by ascending node id), allows temporarily
// negative moves, and rolls back to the best prefix. Returns the new cut.
class FmRefiner {
public:
  FmRefiner(const Graph& g, std::vector<PartitionId>& part, std::size_t k, std::size_t limit)
      : g_(g), part_(part), k_(k), limit_(limit), sizes_(k, 0), conn_(k, 0), locked_(g.node_count()) {
    for (PartitionId p : part_) ++sizes_[p];
  }

  std::size_t run_pass(std::size_t cut) {
    const std::size_t n = g_.node_count();
    std::fill(locked_.begin(), locked_.end(), false);
    Heap heap;
    for (NodeId v = 0; v < n; ++v) {
      if (auto m = best_move(v)) heap.push({m->gain, v});
    }
    struct Move {
      NodeId v;
      PartitionId from;
    };
    std::vector<Move> moves;
    std::size_t best_cut = cut;
    std::size_t best_len = 0;
    long long current = static_cast<long long>(cut);
    const std::size_t patience = std::max<std::size_t>(50, n / 50);

    while (!heap.empty()) {
      const Entry top = heap.top();
      heap.pop();
      if (locked_[top.v]) continue;
      const auto m = best_move(top.v);
      if (!m) continue;
      if (m->gain != top.gain) {
        heap.push({m->gain, top.v});
        continue;
      }
      const PartitionId from = part_[top.v];
      part_[top.v] = m->to;
      --sizes_[from];
      ++sizes_[m->to];
      locked_[top.v] = true;
      moves.push_back({top.v, from});
      current -= m->gain;
      if (current < static_cast<long long>(best_cut)) {
        best_cut = static_cast<std::size_t>(current);
        best_len = moves.size();
      } else if (moves.size() - best_len > patience) {
        break;
      }
      for (EdgeId e : g_.incident(top.v)) {
        const NodeId w = g_.edge(e).other(top.v);
        if (locked_[w]) continue;
        if (auto mw = best_move(w)) heap.push({mw->gain, w});
      }
    }
    for (std::size_t i = moves.size(); i > best_len; --i) {
      const Move& mv = moves[i - 1];
      --sizes_[part_[mv.v]];
      ++sizes_[mv.from];
      part_[mv.v] = mv.from;
    }
    return best_cut;
  }

private:
  struct Entry {
    long long gain;
    NodeId v;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.gain != b.gain ? a.gain < b.gain : a.v > b.v;
    }
  };
  using Heap = std::priority_queue<Entry, std::vector<Entry>, Worse>;

  struct Candidate {
    PartitionId to;
    long long gain;
  };

  std::optional<Candidate> best_move(NodeId v) {
    const PartitionId own = part_[v];
    if (sizes_[own] <= 1) return std::nullopt;
    touched_.clear();
    for (EdgeId e : g_.incident(v)) {
      const PartitionId q = part_[g_.edge(e).other(v)];
      if (conn_[q]++ == 0) touched_.push_back(q);
    }
    std::optional<Candidate> best;
    const long long internal = conn_[own];
    for (PartitionId q : touched_) {
      if (q == own || sizes_[q] >= limit_) continue;
      const long long gain = conn_[q] - internal;
      if (!best || gain > best->gain || (gain == best->gain && q < best->to)) best = Candidate{q, gain};
    }
    for (PartitionId q : touched_) conn_[q] = 0;
    return best;
  }

  const Graph& g_;
  std::vector<PartitionId>& part_;
  std::size_t k_;
  std::size_t limit_;
  std::vector<std::size_t> sizes_;
  std::vector<long long> conn_;
  std::vector<PartitionId> touched_;
  std::vector<bool> locked_;
};

}  // namespace detail

// BFS region growing per connected component, then FM refinement under the
// (1 + eps) * ceil(n / k) balance bound. Deterministic for a fixed seed.
inline PartitionAssignment partition(const Graph& g, const PartitionerParams& params,
                                     PartitionTrace* trace = nullptr) {
  const std::size_t n = g.node_count();
  if (n == 0) throw InvalidParameter("graph", "cannot partition an empty graph");
  const std::size_t k = params.k.value_or(default_partition_count(n));
  if (k == 0) throw InvalidParameter("k", "must be at least 1");
  if (k > n) throw InvalidParameter("k", "exceeds node count " + std::to_string(n));
  if (!(params.balance_eps >= 0.0)) throw InvalidParameter("balance_eps", "must be non-negative");

  Rng rng(params.seed);
  PartitionAssignment pa;
  pa.k = k;
  pa.balance_eps = params.balance_eps;
  pa.part_of = detail::region_growing(g, k, rng);
  std::size_t cut = count_cut(g, pa.part_of);
  if (trace) trace->initial_cut = cut;

  if (k > 1) {
    detail::FmRefiner fm(g, pa.part_of, k, balance_limit(n, k, params.balance_eps));
    for (std::size_t pass = 0; pass < params.max_fm_passes; ++pass) {
      const std::size_t next = fm.run_pass(cut);
      if (trace) trace->cut_after_pass.push_back(next);
      const bool improved = next < cut;
      cut = next;
      if (!improved) break;
    }
  }
  pa.cut_size = cut;
  return pa;
}

}  // namespace gvdb
