#pragma once

#include "gvdb/error.hpp"
#include "gvdb/store_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace gvdb {

inline constexpr std::size_t kDefaultMaxItems = 5000;

enum class Level : int { detail = 0, abstraction = 1 };

inline Level level_from_int(long long level) {
  if (level == 0) return Level::detail;
  if (level == 1) return Level::abstraction;
  throw InvalidParameter("level", "unknown level " + std::to_string(level) + " (expected 0 or 1)");
}

// At level 1 a node is a supernode: id is the partition id, label is empty.
struct ViewNode {
  std::uint64_t id = 0;
  Point pos;
  bool in_window = false;
  PartitionId partition = 0;
  std::uint64_t member_count = 1;
  std::string_view label;
};

// At level 1 an edge is a superedge; weight is its crossing-edge count.
struct ViewEdge {
  std::uint64_t id = 0;
  std::uint64_t src = 0;
  std::uint64_t dst = 0;
  std::uint64_t weight = 1;
};

// Nodes and edges are sorted by id. Every edge's endpoints are among the nodes.
struct ViewResult {
  Level level = Level::detail;
  Rect window;
  std::vector<ViewNode> nodes;
  std::vector<ViewEdge> edges;
  bool truncated = false;
};

struct SearchHit {
  NodeId node = 0;
  std::string_view label;
  Point pos;
  PartitionId partition = 0;
  std::size_t match_pos = 0;
};

inline std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Read-only query front end over a StoreData. Safe for concurrent callers.
namespace detail {

// LSD radix sort on 11-bit digits, enough passes for the largest key.
inline void radix_sort(std::vector<std::uint64_t>& keys) {
  if (keys.size() < 256) {
    std::sort(keys.begin(), keys.end());
    return;
  }
  const std::uint64_t max_key = *std::max_element(keys.begin(), keys.end());
  std::vector<std::uint64_t> tmp(keys.size());
  constexpr unsigned kBits = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kBits;
  for (unsigned shift = 0; shift < 64 && (max_key >> shift) != 0; shift += kBits) {
    std::size_t count[kBuckets + 1] = {};
    for (std::uint64_t k : keys) ++count[((k >> shift) & (kBuckets - 1)) + 1];
    for (std::size_t b = 1; b <= kBuckets; ++b) count[b] += count[b - 1];
    for (std::uint64_t k : keys) tmp[count[(k >> shift) & (kBuckets - 1)]++] = k;
    keys.swap(tmp);
  }
}

}  // namespace detail

class QueryEngine {
public:
  explicit QueryEngine(std::shared_ptr<const StoreData> data) : data_(std::move(data)) {
    const StoreData& d = *data_;
    levels_[0] = index(d.level0);
    levels_[1] = index(d.level1);
    folded_.reserve(d.node_labels.size());
    for (const auto& l : d.node_labels) folded_.push_back(ascii_fold(l));
    PartitionId max_p = 0;
    for (const SuperNode& s : d.supernodes) max_p = std::max(max_p, s.partition);
    supernode_of_.assign(d.supernodes.empty() ? 0 : max_p + 1, UINT32_MAX);
    for (std::size_t i = 0; i < d.supernodes.size(); ++i)
      supernode_of_[d.supernodes[i].partition] = static_cast<std::uint32_t>(i);
  }

  const StoreData& data() const { return *data_; }
  std::shared_ptr<const StoreData> shared_data() const { return data_; }

  ViewResult view(const Rect& window, Level level, std::size_t max_items = kDefaultMaxItems) const {
    if (max_items == 0) throw InvalidParameter("max_items", "must be at least 1");
    const StoreData& d = *data_;
    const LevelIndex& li = levels_[static_cast<int>(level)];
    ViewResult out;
    out.level = level;
    out.window = window;
    const std::vector<std::uint64_t> keys = collect(li, window, max_items, out.truncated);

    std::vector<std::uint64_t> node_ids;
    node_ids.reserve(keys.size() * 2);
    for (std::uint64_t key : keys) {
      const std::uint64_t id = key >> 1;
      if ((key & 1) == static_cast<std::uint64_t>(ItemKind::node)) {
        node_ids.push_back(id);
        continue;
      }
      ViewEdge e;
      e.id = id;
      if (level == Level::detail) {
        e.src = d.edges[id].src;
        e.dst = d.edges[id].dst;
      } else {
        const SuperEdge& se = d.superedges[id];
        e.src = se.a;
        e.dst = se.b;
        e.weight = se.weight;
      }
      node_ids.push_back(e.src);
      node_ids.push_back(e.dst);
      out.edges.push_back(e);
    }
    detail::radix_sort(node_ids);
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
    out.nodes.reserve(node_ids.size());
    for (std::uint64_t id : node_ids) {
      ViewNode n;
      n.id = id;
      if (level == Level::detail) {
        n.pos = d.nodes[id].pos;
        n.partition = d.nodes[id].partition;
        n.label = d.node_labels[id];
      } else {
        const SuperNode& s = d.supernodes[supernode_of_[id]];
        n.pos = s.centroid;
        n.partition = s.partition;
        n.member_count = s.member_count;
      }
      n.in_window = window.contains(n.pos);
      out.nodes.push_back(n);
    }
    return out;
  }

  // Case-insensitive (ASCII) substring match, ranked by match position, then
  // label length, then node id.
  std::vector<SearchHit> keyword_search(std::string_view term, std::size_t limit) const {
    const std::string needle = ascii_fold(trim(term));
    if (needle.empty()) throw InvalidParameter("q", "search term is empty");
    if (limit == 0) throw InvalidParameter("limit", "must be at least 1");
    const StoreData& d = *data_;
    struct Ranked {
      std::size_t pos, len;
      NodeId id;
      bool operator<(const Ranked& o) const {
        return pos != o.pos ? pos < o.pos : (len != o.len ? len < o.len : id < o.id);
      }
    };
    std::vector<Ranked> matches;
    for (NodeId v = 0; v < folded_.size(); ++v) {
      const auto p = folded_[v].find(needle);
      if (p != std::string::npos) matches.push_back({p, folded_[v].size(), v});
    }
    const std::size_t keep = std::min(limit, matches.size());
    std::partial_sort(matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(keep), matches.end());
    std::vector<SearchHit> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const NodeId v = matches[i].id;
      out.push_back({v, d.node_labels[v], d.nodes[v].pos, d.nodes[v].partition, matches[i].pos});
    }
    return out;
  }

private:
  struct LevelIndex {
    const RTree* tree = nullptr;
    std::vector<std::uint32_t> by_key;  // item indices in ascending order_key
    std::vector<std::uint64_t> keys;    // order_key of each item, by item index
  };

  static LevelIndex index(const RTree& tree) {
    LevelIndex li;
    li.tree = &tree;
    li.by_key.resize(tree.size());
    std::iota(li.by_key.begin(), li.by_key.end(), 0u);
    const auto& items = tree.items();
    li.keys.reserve(items.size());
    for (const SpatialItem& it : items) li.keys.push_back(it.order_key());
    std::sort(li.by_key.begin(), li.by_key.end(), [&](auto a, auto b) { return li.keys[a] < li.keys[b]; });
    return li;
  }

  // Order keys of the max_items hits with the smallest keys, ascending. Small
  // result sets come from an R-tree traversal. When the leaves under the window
  // hold more items than a scan in key order would likely touch before finding
  // max_items + 1 hits, that scan is used instead. Both paths return the same set.
  static std::vector<std::uint64_t> collect(const LevelIndex& li, const Rect& window, std::size_t max_items,
                                            bool& truncated) {
    const auto& items = li.tree->items();
    const double n = static_cast<double>(items.size());
    const auto limit = static_cast<std::size_t>(
        std::max({4.0 * static_cast<double>(max_items), 4096.0, 2.0 * std::sqrt(static_cast<double>(max_items) * n)}));
    std::vector<std::uint64_t> keys;
    if (const std::size_t bound = li.tree->leaf_count(window, limit); bound <= limit) {
      keys.reserve(bound);
      li.tree->query_covered(
          window, [&](const SpatialItem& it) { return it.intersects(window); },
          [&](std::uint32_t i, const SpatialItem&) {
            keys.push_back(li.keys[i]);
            return true;
          });
      detail::radix_sort(keys);
      truncated = keys.size() > max_items;
      if (truncated) keys.resize(max_items);
      return keys;
    }
    for (std::uint32_t i : li.by_key) {
      const SpatialItem& it = items[i];
      if (it.bbox.intersects(window) && it.intersects(window)) {
        keys.push_back(it.order_key());
        if (keys.size() > max_items) break;
      }
    }
    truncated = keys.size() > max_items;
    if (truncated) keys.resize(max_items);
    return keys;
  }

  std::shared_ptr<const StoreData> data_;
  LevelIndex levels_[2];
  std::vector<std::string> folded_;
  std::vector<std::uint32_t> supernode_of_;
};

}  // namespace gvdb
