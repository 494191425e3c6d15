#pragma once

#include "gvdb/error.hpp"
#include "gvdb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace gvdb {

enum class ItemKind : std::uint8_t { node = 0, edge = 1 };

// A node (point) or an edge (straight segment) on the global plane.
struct SpatialItem {
  ItemKind kind = ItemKind::node;
  std::uint64_t id = 0;
  Segment geometry;
  Rect bbox;

  static SpatialItem node(std::uint64_t id, Point p) {
    return {ItemKind::node, id, {p, p}, Rect::of_point(p)};
  }
  static SpatialItem edge(std::uint64_t id, Point a, Point b) {
    if (a == b) throw ContractViolation("edge " + std::to_string(id) + " has coincident endpoints");
    return {ItemKind::edge, id, {a, b}, Rect::of_points(a, b)};
  }

  // Total order used for tie-breaking and truncation: by id, nodes before edges.
  std::uint64_t order_key() const { return id * 2 + static_cast<std::uint64_t>(kind); }

  bool intersects(const Rect& window) const {
    return kind == ItemKind::node ? window.contains(geometry.a) : segment_intersects_rect(geometry, window);
  }

  friend bool operator==(const SpatialItem&, const SpatialItem&) = default;
};

template <class T>
concept Boxed = requires(const T& t) {
  { t.bbox } -> std::convertible_to<Rect>;
  { t.order_key() } -> std::convertible_to<std::uint64_t>;
};

// For leaves, [first, first + count) indexes items; for inner nodes it indexes
// nodes (children are contiguous).
struct RTreeNode {
  Rect box;
  std::uint32_t first = 0;
  std::uint32_t count = 0;
  bool leaf = false;

  friend bool operator==(const RTreeNode&, const RTreeNode&) = default;
};

namespace detail {

// Sort-Tile-Recursive ordering of `boxes`: by center x into ceil(sqrt(N/M))
// slabs, each slab by center y. Ties fall back to `key`.
inline std::vector<std::uint32_t> str_order(const std::vector<Rect>& boxes,
                                            const std::vector<std::uint64_t>& key, std::size_t fanout) {
  const std::size_t n = boxes.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto by = [&](auto coord) {
    return [&, coord](std::uint32_t a, std::uint32_t b) {
      const double ca = coord(boxes[a]), cb = coord(boxes[b]);
      return ca != cb ? ca < cb : key[a] < key[b];
    };
  };
  auto cx = [](const Rect& r) { return r.x_min + r.x_max; };
  auto cy = [](const Rect& r) { return r.y_min + r.y_max; };
  std::sort(order.begin(), order.end(), by(cx));
  const std::size_t leaves = (n + fanout - 1) / fanout;
  const auto slabs = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(leaves))));
  const std::size_t per_slab = slabs * fanout;
  for (std::size_t begin = 0; begin < n; begin += per_slab) {
    const std::size_t end = std::min(n, begin + per_slab);
    std::sort(order.begin() + begin, order.begin() + end, by(cy));
  }
  return order;
}

}  // namespace detail

// Write-once R-tree packed with STR. Nodes are stored level by level, root first.
template <Boxed T>
class StaticRTree {
public:
  static constexpr std::size_t kDefaultFanout = 16;

  StaticRTree() = default;

  static StaticRTree bulk_load(std::vector<T> items, std::size_t fanout = kDefaultFanout) {
    if (fanout < 2) throw InvalidParameter("fanout", "must be at least 2");
    StaticRTree t;
    t.fanout_ = fanout;
    if (items.empty()) return t;

    std::vector<Rect> boxes(items.size());
    std::vector<std::uint64_t> keys(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      boxes[i] = items[i].bbox;
      keys[i] = items[i].order_key();
    }
    const auto order = detail::str_order(boxes, keys, fanout);
    t.items_.reserve(items.size());
    for (auto i : order) t.items_.push_back(std::move(items[i]));

    std::vector<std::vector<RTreeNode>> levels;
    std::vector<RTreeNode> level;
    for (std::size_t b = 0; b < t.items_.size(); b += fanout) {
      RTreeNode node{{}, static_cast<std::uint32_t>(b),
                     static_cast<std::uint32_t>(std::min(fanout, t.items_.size() - b)), true};
      for (std::uint32_t k = 0; k < node.count; ++k) node.box.expand(t.items_[b + k].bbox);
      level.push_back(node);
    }
    while (level.size() > 1) {
      std::vector<Rect> lb(level.size());
      std::vector<std::uint64_t> lk(level.size());
      for (std::size_t i = 0; i < level.size(); ++i) {
        lb[i] = level[i].box;
        lk[i] = i;
      }
      const auto lo = detail::str_order(lb, lk, fanout);
      std::vector<RTreeNode> sorted;
      sorted.reserve(level.size());
      for (auto i : lo) sorted.push_back(level[i]);
      std::vector<RTreeNode> parents;
      for (std::size_t b = 0; b < sorted.size(); b += fanout) {
        RTreeNode node{{}, static_cast<std::uint32_t>(b),
                       static_cast<std::uint32_t>(std::min(fanout, sorted.size() - b)), false};
        for (std::uint32_t k = 0; k < node.count; ++k) node.box.expand(sorted[b + k].box);
        parents.push_back(node);
      }
      levels.push_back(std::move(sorted));
      level = std::move(parents);
    }
    levels.push_back(std::move(level));

    // Root level first; rebase child offsets onto the flat array.
    std::reverse(levels.begin(), levels.end());
    std::size_t offset = 0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const std::size_t child_offset = offset + levels[l].size();
      for (RTreeNode& node : levels[l]) {
        if (!node.leaf) node.first += static_cast<std::uint32_t>(child_offset);
        t.nodes_.push_back(node);
      }
      offset = child_offset;
    }
    t.height_ = levels.size();
    return t;
  }

  // Reassembles a tree from its persisted arrays; validates structure.
  static StaticRTree from_parts(std::vector<T> items, std::vector<RTreeNode> nodes, std::size_t fanout,
                                std::size_t height) {
    StaticRTree t;
    t.items_ = std::move(items);
    t.nodes_ = std::move(nodes);
    t.fanout_ = fanout;
    t.height_ = height;
    t.check_invariants();
    return t;
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t height() const { return height_; }
  std::size_t fanout() const { return fanout_; }
  const std::vector<T>& items() const { return items_; }
  const std::vector<RTreeNode>& nodes() const { return nodes_; }
  Rect bounds() const { return nodes_.empty() ? Rect{} : nodes_.front().box; }

  // Calls visit(index, item) for every item whose bbox meets `window` and for
  // which exact(item) holds. visit returns false to stop early; the return
  // value reports whether the traversal ran to completion.
  template <class Exact, class Visit>
  bool query(const Rect& window, Exact&& exact, Visit&& visit) const {
    if (nodes_.empty()) return true;
    std::vector<std::uint32_t> stack;
    stack.reserve(height_ * fanout_);
    stack.push_back(0);
    while (!stack.empty()) {
      const RTreeNode& node = nodes_[stack.back()];
      stack.pop_back();
      if (!node.box.intersects(window)) continue;
      if (node.leaf) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const T& item = items_[i];
          if (item.bbox.intersects(window) && exact(item)) {
            if (!visit(i, item)) return false;
          }
        }
      } else {
        for (std::uint32_t c = node.first + node.count; c-- > node.first;) stack.push_back(c);
      }
    }
    return true;
  }

  // Same visits as query(), for an `exact` that holds for every item whose bbox
  // lies inside the window. Subtrees inside the window are visited without tests.
  template <class Exact, class Visit>
  bool query_covered(const Rect& window, Exact&& exact, Visit&& visit) const {
    if (nodes_.empty()) return true;
    // Low bit marks a subtree already known to lie inside the window.
    std::vector<std::uint32_t> stack;
    stack.reserve(height_ * fanout_);
    stack.push_back(0);
    while (!stack.empty()) {
      const std::uint32_t top = stack.back();
      stack.pop_back();
      const RTreeNode& node = nodes_[top >> 1];
      bool inside = top & 1u;
      if (!inside) {
        if (!node.box.intersects(window)) continue;
        inside = window.contains(node.box);
      }
      if (node.leaf) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const T& item = items_[i];
          if (inside || (item.bbox.intersects(window) && (window.contains(item.bbox) || exact(item)))) {
            if (!visit(i, item)) return false;
          }
        }
      } else {
        for (std::uint32_t c = node.first + node.count; c-- > node.first;) stack.push_back(c << 1 | inside);
      }
    }
    return true;
  }

  // Number of items in leaves whose box meets `window`, an upper bound on the
  // hits. Stops counting once the total exceeds `limit`.
  std::size_t leaf_count(const Rect& window, std::size_t limit) const {
    if (nodes_.empty()) return 0;
    std::size_t total = 0;
    std::vector<std::uint32_t> stack;
    stack.reserve(height_ * fanout_);
    stack.push_back(0);
    while (!stack.empty()) {
      const RTreeNode& node = nodes_[stack.back()];
      stack.pop_back();
      if (!node.box.intersects(window)) continue;
      if (node.leaf) {
        total += node.count;
        if (total > limit) return total;
      } else {
        for (std::uint32_t c = node.first + node.count; c-- > node.first;) stack.push_back(c);
      }
    }
    return total;
  }

  // Items intersecting `window` under T::intersects.
  std::vector<T> window_query(const Rect& window) const {
    std::vector<T> out;
    query(window, [&](const T& item) { return item.intersects(window); },
          [&](std::uint32_t, const T& item) {
            out.push_back(item);
            return true;
          });
    return out;
  }

  // Parent containment, uniform leaf depth, every item reachable exactly once.
  void check_invariants() const {
    if (items_.empty()) {
      if (!nodes_.empty() || height_ != 0) throw ContractViolation("empty tree with nodes");
      return;
    }
    if (nodes_.empty()) throw ContractViolation("items without nodes");
    std::vector<std::uint8_t> hit(items_.size(), 0);
    std::vector<std::uint8_t> node_seen(nodes_.size(), 0);
    struct Frame {
      std::uint32_t node;
      std::size_t depth;
    };
    std::vector<Frame> stack{{0, 1}};
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      if (f.node >= nodes_.size() || node_seen[f.node]++) throw ContractViolation("node referenced twice");
      const RTreeNode& n = nodes_[f.node];
      if (n.count == 0 || n.count > fanout_) throw ContractViolation("node fanout out of range");
      if (n.leaf) {
        if (f.depth != height_) throw ContractViolation("leaves at unequal depth");
        if (std::size_t{n.first} + n.count > items_.size()) throw ContractViolation("leaf range out of bounds");
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
          if (hit[i]++) throw ContractViolation("item referenced twice");
          if (!n.box.contains(items_[i].bbox)) throw ContractViolation("item outside leaf box");
        }
      } else {
        if (std::size_t{n.first} + n.count > nodes_.size()) throw ContractViolation("child range out of bounds");
        for (std::uint32_t c = n.first; c < n.first + n.count; ++c) {
          if (c >= nodes_.size() || !n.box.contains(nodes_[c].box))
            throw ContractViolation("child outside parent box");
          stack.push_back({c, f.depth + 1});
        }
      }
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) throw ContractViolation("unreachable item");
    if (std::find(node_seen.begin(), node_seen.end(), 0) != node_seen.end())
      throw ContractViolation("unreachable node");
  }

private:
  std::vector<T> items_;
  std::vector<RTreeNode> nodes_;
  std::size_t fanout_ = kDefaultFanout;
  std::size_t height_ = 0;
};

using RTree = StaticRTree<SpatialItem>;

}  // namespace gvdb
