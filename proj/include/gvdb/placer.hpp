#pragma once

#include "gvdb/error.hpp"
#include "gvdb/geometry.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/layout.hpp"
#include "gvdb/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace gvdb {

struct CrossingEdge {
  EdgeId id = 0;
  NodeId u = 0;
  NodeId v = 0;
  PartitionId pu = 0;
  PartitionId pv = 0;
};

struct PlacerParams {
  double gap = 50.0;
  // Unset means equal to gap (or 1 when gap is 0).
  std::optional<double> grid_step;
  std::size_t candidate_ring_limit = 3;
  // Keep every enumerated candidate in the trace (tests only; costly).
  bool record_candidates = false;

  double step() const {
    const double s = grid_step.value_or(gap > 0.0 ? gap : 1.0);
    return s;
  }
};

struct PlacementCandidate {
  Point offset;
  bool feasible = false;
  double cost = 0.0;
};

struct PlacementRound {
  PartitionId partition = 0;
  Point offset;
  double cost = 0.0;
  std::size_t rings = 0;
  std::vector<PlacementCandidate> candidates;
};

// Indexed by partition id (offsets, bboxes) and node id (global_positions).
struct GlobalLayout {
  std::vector<Point> offsets;
  std::vector<Rect> bboxes;
  std::vector<bool> placed;
  std::vector<Point> global_positions;
  std::vector<EdgeId> crossing;
  double total_crossing_length = 0.0;
  double gap = 0.0;
  std::vector<PlacementRound> rounds;
  std::size_t ring_expansions = 0;

  // Union of the placed bboxes, each grown by gap/2.
  Rect global_bbox() const {
    Rect r;
    for (std::size_t p = 0; p < bboxes.size(); ++p)
      if (placed[p]) r.expand(bboxes[p].padded(gap / 2));
    return r;
  }
};

inline std::vector<CrossingEdge> crossing_edge_list(const Graph& g, const PartitionAssignment& pa) {
  std::vector<CrossingEdge> out;
  for (const Edge& e : g.edges()) {
    const PartitionId a = pa.part_of[e.src], b = pa.part_of[e.dst];
    if (a != b) out.push_back({e.id, e.src, e.dst, a, b});
  }
  return out;
}

namespace detail {

inline double offsets_cost(std::span<const Point> deltas, Point t) {
  double c = 0.0;
  for (Point d : deltas) {
    const double ex = d.x - t.x, ey = d.y - t.y;
    c += std::sqrt(ex * ex + ey * ey);
  }
  return c;
}

}  // namespace detail

// Greedy placement: heaviest-connected partition first at the origin, then each
// following partition at the grid candidate (around the union of placed boxes)
// that keeps every gap-padded box disjoint and minimizes the length of its
// crossing edges to already placed partitions. Cost ties go to lower y, then x.
inline GlobalLayout place_partitions(std::span<const LaidOutPartition> layouts,
                                     std::span<const CrossingEdge> crossing,
                                     const PlacerParams& params) {
  if (layouts.empty()) throw InvalidParameter("layouts", "nothing to place");
  if (!(params.gap >= 0.0)) throw InvalidParameter("gap", "must be non-negative");
  const double s = params.step();
  if (!(s > 0.0)) throw InvalidParameter("grid_step", "must be positive");
  const double g = params.gap;

  PartitionId max_pid = 0;
  NodeId max_node = 0;
  for (const auto& l : layouts) {
    max_pid = std::max(max_pid, l.partition_id);
    for (NodeId v : l.members) max_node = std::max(max_node, v);
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index_of(max_pid + 1, kNone);
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    if (index_of[layouts[i].partition_id] != kNone)
      throw InvalidParameter("layouts", "duplicate partition id");
    index_of[layouts[i].partition_id] = i;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Point> local_pos(max_node + 1, Point{nan, nan});
  for (const auto& l : layouts)
    for (std::size_t i = 0; i < l.members.size(); ++i) local_pos[l.members[i]] = l.positions[i];

  // Per-partition incident crossing edges: (mine, theirs, their partition index).
  struct Incident {
    NodeId mine, theirs;
    std::size_t other;
  };
  const std::size_t P = layouts.size();
  std::vector<std::vector<Incident>> incident(P);
  for (const CrossingEdge& c : crossing) {
    if (c.pu > max_pid || c.pv > max_pid || index_of[c.pu] == kNone || index_of[c.pv] == kNone)
      throw InvalidParameter("crossing", "edge " + std::to_string(c.id) + " references an unplaced partition");
    const std::size_t a = index_of[c.pu], b = index_of[c.pv];
    incident[a].push_back({c.u, c.v, b});
    incident[b].push_back({c.v, c.u, a});
  }

  std::vector<std::size_t> order(P);
  for (std::size_t i = 0; i < P; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (incident[a].size() != incident[b].size()) return incident[a].size() > incident[b].size();
    return layouts[a].partition_id < layouts[b].partition_id;
  });

  GlobalLayout out;
  out.gap = g;
  out.offsets.assign(max_pid + 1, Point{});
  out.bboxes.assign(max_pid + 1, Rect{});
  out.placed.assign(max_pid + 1, false);
  std::vector<bool> is_placed(P, false);
  std::vector<Rect> placed_boxes;
  Rect placed_union;

  auto commit = [&](std::size_t idx, Point offset) {
    const PartitionId pid = layouts[idx].partition_id;
    out.offsets[pid] = offset;
    out.bboxes[pid] = layouts[idx].bbox.translated(offset);
    out.placed[pid] = true;
    is_placed[idx] = true;
    placed_boxes.push_back(out.bboxes[pid]);
    placed_union.expand(out.bboxes[pid]);
  };

  {
    const std::size_t first = order[0];
    const Point c = layouts[first].bbox.center();
    commit(first, Point{-c.x, -c.y});
    out.rounds.push_back({layouts[first].partition_id, out.offsets[layouts[first].partition_id], 0.0, 0, {}});
  }

  std::vector<Point> deltas;
  for (std::size_t r = 1; r < P; ++r) {
    const std::size_t idx = order[r];
    const Rect box = layouts[idx].bbox;
    deltas.clear();
    for (const Incident& inc : incident[idx]) {
      if (!is_placed[inc.other]) continue;
      const Point theirs = local_pos[inc.theirs] + out.offsets[layouts[inc.other].partition_id];
      deltas.push_back(theirs - local_pos[inc.mine]);
    }

    const Rect U = placed_union;
    const long long i_lo = -static_cast<long long>(std::ceil((box.width() + g) / s)) - 1;
    const long long i_hi = static_cast<long long>(std::ceil((U.width() + g) / s)) + 1;
    const long long j_lo = -static_cast<long long>(std::ceil((box.height() + g) / s)) - 1;
    const long long j_hi = static_cast<long long>(std::ceil((U.height() + g) / s)) + 1;

    PlacementRound round;
    round.partition = layouts[idx].partition_id;
    bool found = false;
    std::size_t first_feasible_ring = 0;
    Point best_offset{};
    double best_cost = 0.0;

    auto consider = [&](long long i, long long j) {
      const Point offset{U.x_min + static_cast<double>(i) * s - box.x_min,
                         U.y_min + static_cast<double>(j) * s - box.y_min};
      const Rect moved = box.translated(offset);
      bool feasible = rects_disjoint(moved, U, g);
      if (!feasible) {
        feasible = true;
        for (const Rect& other : placed_boxes) {
          if (!rects_disjoint(moved, other, g)) {
            feasible = false;
            break;
          }
        }
      }
      double cost = nan;
      if (feasible) {
        cost = detail::offsets_cost(deltas, offset);
        const bool better = !found || cost < best_cost ||
                            (cost == best_cost && (offset.y < best_offset.y ||
                                                   (offset.y == best_offset.y && offset.x < best_offset.x)));
        if (better) {
          found = true;
          best_cost = cost;
          best_offset = offset;
        }
      }
      if (params.record_candidates) round.candidates.push_back({offset, feasible, cost});
    };

    for (std::size_t ring = 0;; ++ring) {
      const bool had = found;
      const long long R = static_cast<long long>(ring);
      for (long long j = j_lo - R; j <= j_hi + R; ++j) {
        const bool edge_row = ring == 0 || j == j_lo - R || j == j_hi + R;
        if (edge_row) {
          for (long long i = i_lo - R; i <= i_hi + R; ++i) consider(i, j);
        } else {
          consider(i_lo - R, j);
          consider(i_hi + R, j);
        }
      }
      if (!had && found) first_feasible_ring = ring;
      if (!found && ring >= params.candidate_ring_limit) ++out.ring_expansions;
      if (found && ring >= first_feasible_ring + params.candidate_ring_limit) {
        round.rings = ring + 1;
        break;
      }
    }
    round.offset = best_offset;
    round.cost = best_cost;
    commit(idx, best_offset);
    out.rounds.push_back(std::move(round));
  }

  out.global_positions.assign(max_node + 1, Point{nan, nan});
  for (const auto& l : layouts) {
    const Point off = out.offsets[l.partition_id];
    for (std::size_t i = 0; i < l.members.size(); ++i) out.global_positions[l.members[i]] = l.positions[i] + off;
  }
  out.crossing.reserve(crossing.size());
  for (const CrossingEdge& c : crossing) {
    out.crossing.push_back(c.id);
    out.total_crossing_length += distance(out.global_positions[c.u], out.global_positions[c.v]);
  }
  std::sort(out.crossing.begin(), out.crossing.end());
  return out;
}

}  // namespace gvdb
