#pragma once

#include "gvdb/error.hpp"
#include "gvdb/geometry.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/partitioner.hpp"
#include "gvdb/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

namespace gvdb {

struct LayoutParams {
  double ideal_edge_length = 60.0;
  std::size_t iterations = 300;
  // Unset means 0.1 * sqrt(area of the initial square).
  std::optional<double> initial_temperature;
  std::uint64_t seed = 1;
  double margin = 30.0;
};

// members is ascending; positions[i] belongs to members[i] (local frame).
struct LaidOutPartition {
  PartitionId partition_id = 0;
  std::vector<NodeId> members;
  std::vector<Point> positions;
  Rect bbox;
};

inline Rect local_bbox(std::span<const Point> positions, double margin) {
  if (positions.empty()) throw InvalidParameter("positions", "bounding box of an empty point set");
  Rect r;
  for (Point p : positions) r.expand(p);
  return r.padded(margin);
}

inline constexpr double kMinLayoutDistance = 1e-9;

namespace detail {

// Fruchterman-Reingold on one connected piece: repulsion L^2/d between every
// pair, attraction d^2/L along springs, displacement capped by a temperature
// that cools linearly to zero. Writes into x, y (size n).
inline void force_directed(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& springs,
                           const LayoutParams& params, Rng& rng, std::vector<double>& x, std::vector<double>& y) {
  const double L = params.ideal_edge_length;
  x.assign(n, 0.0);
  y.assign(n, 0.0);
  if (n < 2) return;
  const double side = std::sqrt(static_cast<double>(n)) * L;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(0.0, side);
    y[i] = rng.uniform(0.0, side);
  }
  // Separate coincident starting points.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return x[a] != x[b] ? x[a] < x[b] : (y[a] != y[b] ? y[a] < y[b] : a < b);
  });
  for (std::size_t i = 1; i < n; ++i) {
    const auto a = order[i - 1], b = order[i];
    if (x[a] == x[b] && y[a] == y[b]) {
      x[b] += 1e-3 * L * rng.uniform(-1.0, 1.0);
      y[b] += 1e-3 * L * rng.uniform(-1.0, 1.0);
    }
  }

  const double t0 = params.initial_temperature.value_or(0.1 * side);
  const double L2 = L * L;
  const double min_d2 = kMinLayoutDistance * kMinLayoutDistance;
  std::vector<double> dx(n), dy(n);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dy.begin(), dy.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i], yi = y[i];
      double fx = 0.0, fy = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double ddx = xi - x[j];
        const double ddy = yi - y[j];
        if (ddx == 0.0 && ddy == 0.0) ddx = kMinLayoutDistance;  // push coincident pairs apart along x
        const double f = L2 / std::max(ddx * ddx + ddy * ddy, min_d2);
        fx += ddx * f;
        fy += ddy * f;
        dx[j] -= ddx * f;
        dy[j] -= ddy * f;
      }
      dx[i] += fx;
      dy[i] += fy;
    }
    for (auto [a, b] : springs) {
      const double ddx = x[a] - x[b];
      const double ddy = y[a] - y[b];
      const double f = std::max(std::sqrt(ddx * ddx + ddy * ddy), kMinLayoutDistance) / L;
      dx[a] -= ddx * f;
      dy[a] -= ddy * f;
      dx[b] += ddx * f;
      dy[b] += ddy * f;
    }
    const double t = t0 * (1.0 - static_cast<double>(it) / static_cast<double>(params.iterations));
    for (std::size_t i = 0; i < n; ++i) {
      const double len = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
      if (len > 0.0) {
        const double step = std::min(len, t) / len;
        x[i] += dx[i] * step;
        y[i] += dy[i] * step;
      }
    }
  }
}

}  // namespace detail

// Each connected piece of the partition is laid out on its own, then the
// pieces are packed in rows (largest first) with L between their boxes.
// Without this, pieces with no springs to the rest drift apart indefinitely.
inline LaidOutPartition layout_partition(const Graph& g, std::span<const NodeId> members,
                                         std::span<const EdgeId> intra_edges,
                                         const LayoutParams& params, PartitionId partition_id = 0) {
  const double L = params.ideal_edge_length;
  if (!(L > 0.0)) throw InvalidParameter("ideal_edge_length", "must be positive");
  if (!(params.margin >= 0.0)) throw InvalidParameter("margin", "must be non-negative");
  if (members.empty()) throw InvalidParameter("members", "partition has no members");

  LaidOutPartition out;
  out.partition_id = partition_id;
  out.members.assign(members.begin(), members.end());
  std::sort(out.members.begin(), out.members.end());
  const std::size_t n = out.members.size();

  std::unordered_map<NodeId, std::uint32_t> local;
  local.reserve(n * 2);
  for (std::uint32_t i = 0; i < n; ++i) local.emplace(out.members[i], i);
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (EdgeId e : intra_edges) {
    const Edge& edge = g.edge(e);
    auto a = local.find(edge.src), b = local.find(edge.dst);
    if (a == local.end() || b == local.end())
      throw ContractViolation("edge " + std::to_string(e) + " has an endpoint outside the partition");
    adj[a->second].push_back(b->second);
    adj[b->second].push_back(a->second);
  }

  // Pieces in order of their smallest member; members ascending within each.
  constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<std::uint32_t> piece_of(n, kNone), index_in_piece(n);
  std::vector<std::vector<std::uint32_t>> pieces;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (piece_of[s] != kNone) continue;
    const auto id = static_cast<std::uint32_t>(pieces.size());
    std::vector<std::uint32_t> piece{s};
    piece_of[s] = id;
    for (std::size_t h = 0; h < piece.size(); ++h)
      for (std::uint32_t w : adj[piece[h]])
        if (piece_of[w] == kNone) {
          piece_of[w] = id;
          piece.push_back(w);
        }
    std::sort(piece.begin(), piece.end());
    for (std::uint32_t i = 0; i < piece.size(); ++i) index_in_piece[piece[i]] = i;
    pieces.push_back(std::move(piece));
  }

  Rng rng(params.seed);
  std::vector<std::vector<double>> px(pieces.size()), py(pieces.size());
  std::vector<Rect> boxes(pieces.size());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> springs;
  for (std::size_t c = 0; c < pieces.size(); ++c) {
    springs.clear();
    for (std::uint32_t v : pieces[c])
      for (std::uint32_t w : adj[v])
        if (v < w) springs.emplace_back(index_in_piece[v], index_in_piece[w]);
    detail::force_directed(pieces[c].size(), springs, params, rng, px[c], py[c]);
    for (std::size_t i = 0; i < pieces[c].size(); ++i) boxes[c].expand(Point{px[c][i], py[c][i]});
  }

  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pieces[a].size() > pieces[b].size(); });
  double area = 0.0, widest = 0.0;
  for (const Rect& r : boxes) {
    area += (r.width() + L) * (r.height() + L);
    widest = std::max(widest, r.width());
  }
  const double row_limit = std::max(widest, std::sqrt(area));
  out.positions.resize(n);
  double cursor_x = 0.0, cursor_y = 0.0, row_height = 0.0;
  for (std::size_t c : order) {
    const Rect& r = boxes[c];
    if (cursor_x > 0.0 && cursor_x + r.width() > row_limit) {
      cursor_x = 0.0;
      cursor_y += row_height + L;
      row_height = 0.0;
    }
    for (std::size_t i = 0; i < pieces[c].size(); ++i)
      out.positions[pieces[c][i]] = {px[c][i] - r.x_min + cursor_x, py[c][i] - r.y_min + cursor_y};
    cursor_x += r.width() + L;
    row_height = std::max(row_height, r.height());
  }

  for (const Point& p : out.positions)
    if (!is_finite(p)) throw ContractViolation("layout produced a non-finite coordinate");
  out.bbox = local_bbox(out.positions, params.margin);
  return out;
}

// Lays out every partition of `pa` independently. Partition p uses the seed
// mix_seed(params.seed, p); results are ordered by partition id regardless of
// how many worker threads run.
inline std::vector<LaidOutPartition> layout_partitions(const Graph& g, const PartitionAssignment& pa,
                                                       const LayoutParams& params,
                                                       unsigned threads = 0) {
  std::vector<std::vector<NodeId>> members(pa.k);
  for (NodeId v = 0; v < g.node_count(); ++v) members[pa.part_of[v]].push_back(v);
  std::vector<std::vector<EdgeId>> intra(pa.k);
  for (const Edge& e : g.edges())
    if (pa.part_of[e.src] == pa.part_of[e.dst]) intra[pa.part_of[e.src]].push_back(e.id);

  std::vector<LaidOutPartition> out(pa.k);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
      for (std::size_t p; (p = next.fetch_add(1)) < pa.k;) {
        if (members[p].empty()) continue;
        LayoutParams local = params;
        local.seed = mix_seed(params.seed, p);
        out[p] = layout_partition(g, members[p], intra[p], local, static_cast<PartitionId>(p));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = pa.k;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, pa.k));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  // Empty partitions (only possible with hand-built assignments) are dropped.
  std::erase_if(out, [](const LaidOutPartition& l) { return l.members.empty(); });
  return out;
}

}  // namespace gvdb
