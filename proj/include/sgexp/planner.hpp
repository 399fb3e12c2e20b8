#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/world.hpp"

// Navigation: grid A* for the global route, a room-level planner over door
// adjacency, local refinement toward the farthest reachable waypoint, and
// frontier detection for the geometric exploration baseline.

namespace sgexp {

struct Path {
  std::vector<Pose> waypoints;
  double length = 0;
};

using GridCell = std::pair<int, int>;  // (ix, iy)

namespace detail {

// Neighbor table: 4 cardinals then 4 diagonals. A diagonal step is allowed
// only when both flanking cardinals are free, so paths cannot slip between
// two touching obstacle corners.
inline const int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
inline const int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

inline bool step_free(const OccupancyGrid& g, int ix, int iy, int dir) {
  const int nx = ix + kDx[dir], ny = iy + kDy[dir];
  if (g.at(nx, ny) != Cell::Free) return false;
  if (dir >= 4)
    return g.at(ix + kDx[dir], iy) == Cell::Free && g.at(ix, iy + kDy[dir]) == Cell::Free;
  return true;
}

inline double heading(const Vec2& from, const Vec2& to) {
  return std::atan2(to.y - from.y, to.x - from.x);
}

}  // namespace detail

// Cost-optimal A* over free cells; unknown space is as impassable as walls.
// Straight steps cost one cell, diagonal steps sqrt(2) cells.
inline Path plan_grid(const OccupancyGrid& grid, GridCell start, GridCell goal) {
  if (grid.at(start.first, start.second) != Cell::Free)
    throw Error(Errc::StartOccupied, "start cell is not free");
  const double res = grid.resolution();
  const int w = grid.width(), h = grid.height();
  auto idx = [&](int ix, int iy) { return static_cast<size_t>(iy) * w + ix; };

  if (start == goal) {
    Path p;
    p.waypoints.push_back({grid.center_of(start.first, start.second), 0});
    return p;
  }
  if (grid.at(goal.first, goal.second) != Cell::Free)
    throw Error(Errc::NoPath, "goal cell is not free");

  const double kDiag = std::sqrt(2.0);
  auto heuristic = [&](int ix, int iy) {
    // Octile distance: admissible and consistent for this move set.
    const double dx = std::abs(ix - goal.first), dy = std::abs(iy - goal.second);
    return std::max(dx, dy) + (kDiag - 1) * std::min(dx, dy);
  };

  std::vector<double> dist(static_cast<size_t>(w) * h, std::numeric_limits<double>::infinity());
  std::vector<int> came(static_cast<size_t>(w) * h, -1);
  // (f, h, cell) keeps expansion order deterministic under cost ties.
  using QEntry = std::tuple<double, double, int, int>;
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> open;
  dist[idx(start.first, start.second)] = 0;
  open.emplace(heuristic(start.first, start.second), heuristic(start.first, start.second),
               start.first, start.second);

  while (!open.empty()) {
    const auto [f, hh, ix, iy] = open.top();
    open.pop();
    const double g = dist[idx(ix, iy)];
    if (f > g + heuristic(ix, iy) + 1e-12) continue;  // stale entry
    if (ix == goal.first && iy == goal.second) break;
    for (int d = 0; d < 8; ++d) {
      if (!detail::step_free(grid, ix, iy, d)) continue;
      const int nx = ix + detail::kDx[d], ny = iy + detail::kDy[d];
      const double ng = g + (d >= 4 ? kDiag : 1.0);
      if (ng < dist[idx(nx, ny)] - 1e-12) {
        dist[idx(nx, ny)] = ng;
        came[idx(nx, ny)] = static_cast<int>(idx(ix, iy));
        open.emplace(ng + heuristic(nx, ny), heuristic(nx, ny), nx, ny);
      }
    }
  }

  if (!std::isfinite(dist[idx(goal.first, goal.second)]))
    throw Error(Errc::NoPath, "goal unreachable");

  std::vector<GridCell> cells;
  for (int c = static_cast<int>(idx(goal.first, goal.second)); c != -1; c = came[c])
    cells.emplace_back(c % w, c / w);
  std::reverse(cells.begin(), cells.end());

  Path p;
  p.length = dist[idx(goal.first, goal.second)] * res;
  p.waypoints.reserve(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    const Vec2 c = grid.center_of(cells[i].first, cells[i].second);
    const Vec2 nxt = i + 1 < cells.size()
                         ? grid.center_of(cells[i + 1].first, cells[i + 1].second)
                         : c;
    const double yaw = i + 1 < cells.size() ? detail::heading(c, nxt)
                                            : (p.waypoints.empty() ? 0 : p.waypoints.back().yaw);
    p.waypoints.push_back({c, yaw});
  }
  return p;
}

inline std::optional<GridCell> nearest_free_cell(const OccupancyGrid& grid, const Vec2& p,
                                                 double radius);
inline std::optional<GridCell> adjacent_free_cell(const OccupancyGrid& grid, const Vec2& p,
                                                  double radius);

// Pose-level convenience: endpoints snap to a free cell within 0.3 m, because
// a legally standable pose can share its 5 cm cell with a wall surface. The
// start snap must be walkable in a straight hop (not across a thin wall); the
// exact endpoints are stitched back onto the cell path where that is safe.
inline Path plan_grid(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal) {
  const auto s = adjacent_free_cell(grid, start, 0.3);
  if (!s) throw Error(Errc::StartOccupied, "no free cell near start");
  const auto g = nearest_free_cell(grid, goal, 0.3);
  if (!g) throw Error(Errc::NoPath, "no free cell near goal");
  Path p = plan_grid(grid, *s, *g);
  const Vec2 head = p.waypoints.front().position;
  if ((head - start).norm() > 1e-9) {
    p.length += (head - start).norm();
    p.waypoints.insert(p.waypoints.begin(), {start, detail::heading(start, head)});
  }
  const Vec2 tail = p.waypoints.back().position;
  if ((tail - goal).norm() > 1e-9) {
    // Walk the last stretch to the exact goal only when that line stays in
    // free cells; otherwise stop at the snapped cell center.
    bool clean = true;
    walk_cells(grid, tail, goal, [&](int ix, int iy) {
      clean = grid.at(ix, iy) == Cell::Free;
      return clean;
    });
    if (clean) {
      p.length += (tail - goal).norm();
      p.waypoints.push_back({goal, detail::heading(tail, goal)});
    }
  }
  return p;
}

// Room-level route: A* over door adjacency, costs measured centroid to door
// to centroid. Returns door midpoints and intermediate room centroids, ending
// at the goal pose itself.
inline std::vector<Pose> plan_scene_graph(const SceneGraph& graph, NodeId start_room,
                                          const Vec2& goal) {
  if (!graph.rooms.count(start_room))
    throw Error(Errc::UnknownNode, "start room " + std::to_string(start_room) + " missing");

  // Rebuild adjacency from door geometry: a door joins the two rooms whose
  // footprints its two side probes land in.
  struct Edge {
    NodeId to;
    Vec2 door_mid;
    double cost;
  };
  std::map<NodeId, std::vector<Edge>> edges;
  auto room_at = [&](const Vec2& p) -> NodeId {
    for (const auto& [id, r] : graph.rooms)
      if (!r.footprint.empty() && point_in_polygon(p, r.footprint)) return id;
    return kNoNode;
  };
  for (const auto& [sid, s] : graph.structures) {
    if (s.kind != StructureKind::Door) continue;
    Vec2 n = s.plane_normal.xy();
    if (n.norm() < 1e-9) n = {-std::sin(s.box.yaw), std::cos(s.box.yaw)};
    n = n * (1.0 / n.norm());
    const double c_ = std::cos(s.box.yaw), s_ = std::sin(s.box.yaw);
    const double across = std::abs(n.dot({c_, s_})) * s.box.half.x +
                          std::abs(n.dot({-s_, c_})) * s.box.half.y;
    const Vec2 mid = s.box.center.xy();
    const NodeId a = room_at(mid + n * (across + 0.6));
    const NodeId b = room_at(mid - n * (across + 0.6));
    if (a == kNoNode || b == kNoNode || a == b) continue;
    const double ca = (graph.rooms.at(a).centroid - mid).norm();
    const double cb = (graph.rooms.at(b).centroid - mid).norm();
    edges[a].push_back({b, mid, ca + cb});
    edges[b].push_back({a, mid, ca + cb});
  }

  NodeId goal_room = room_at(goal);
  if (goal_room == kNoNode) {
    // Goal outside every footprint: head for the room whose centroid is
    // nearest, which is the best the room layer can say.
    double best = std::numeric_limits<double>::max();
    for (const auto& [id, r] : graph.rooms) {
      const double d = (r.centroid - goal).norm();
      if (d < best) {
        best = d;
        goal_room = id;
      }
    }
  }
  if (goal_room == start_room) return {Pose{goal, 0}};

  std::map<NodeId, double> dist;
  std::map<NodeId, std::pair<NodeId, Vec2>> came;  // room -> (previous room, door used)
  using QEntry = std::pair<double, NodeId>;
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> open;
  dist[start_room] = 0;
  open.emplace(0.0, start_room);
  while (!open.empty()) {
    const auto [d, room] = open.top();
    open.pop();
    if (d > dist.at(room) + 1e-12) continue;
    if (room == goal_room) break;
    auto it = edges.find(room);
    if (it == edges.end()) continue;
    for (const auto& e : it->second) {
      const double nd = d + e.cost;
      auto dit = dist.find(e.to);
      if (dit == dist.end() || nd < dit->second - 1e-12) {
        dist[e.to] = nd;
        came[e.to] = {room, e.door_mid};
        open.emplace(nd, e.to);
      }
    }
  }
  if (!dist.count(goal_room))
    throw Error(Errc::NoRoomPath, "no door chain reaches the goal room");

  // Walk back door by door, then emit centroids of the rooms in between.
  std::vector<std::pair<NodeId, Vec2>> hops;  // (room entered, door crossed)
  for (NodeId room = goal_room; room != start_room;) {
    const auto& [prev, door] = came.at(room);
    hops.emplace_back(room, door);
    room = prev;
  }
  std::reverse(hops.begin(), hops.end());
  std::vector<Pose> out;
  for (size_t i = 0; i < hops.size(); ++i) {
    const auto& [room, door] = hops[i];
    out.push_back({door, 0});
    if (i + 1 < hops.size()) out.push_back({graph.rooms.at(room).centroid, 0});
  }
  out.push_back({goal, 0});
  return out;
}

// Local goal choice: the farthest global waypoint that is currently in known
// free space inside the window. Straight-line visibility is the first filter;
// when the path bends out of sight behind a corner, fall back to any free
// waypoint grid A* can still reach.
inline Path refine_local(const Path& global_path, const OccupancyGrid& grid, const Pose& pose,
                         double window = 8.0) {
  if (global_path.waypoints.empty())
    throw Error(Errc::NoProgress, "global path is empty");

  auto los_free = [&](const Vec2& b) {
    bool ok = true;
    walk_cells(grid, pose.position, b, [&](int ix, int iy) {
      ok = grid.at(ix, iy) == Cell::Free;
      return ok;
    });
    return ok;
  };

  const double half = window / 2;
  auto in_window = [&](const Vec2& wp) {
    return std::abs(wp.x - pose.position.x) <= half && std::abs(wp.y - pose.position.y) <= half;
  };

  for (size_t i = global_path.waypoints.size(); i-- > 0;) {
    const Vec2 wp = global_path.waypoints[i].position;
    if (!in_window(wp) || grid.at_world(wp) != Cell::Free) continue;
    // An all-free sight line is itself an edge-connected free corridor, so
    // the A* below cannot fail on it.
    if (los_free(wp)) return plan_grid(grid, pose.position, wp);
  }
  for (size_t i = global_path.waypoints.size(); i-- > 0;) {
    const Vec2 wp = global_path.waypoints[i].position;
    if (!in_window(wp) || grid.at_world(wp) != Cell::Free) continue;
    try {
      return plan_grid(grid, pose.position, wp);
    } catch (const Error& e) {
      if (e.code() != Errc::NoPath) throw;  // keep trying nearer waypoints
    }
  }
  throw Error(Errc::NoProgress, "no global waypoint lies in known free space");
}

// Occupancy quantization can leave the robot's own cell marked occupied: a
// wall-surface hit claims the whole 5 cm cell even though half of it is free
// and legally standable. Floods and plans recover by starting from the
// nearest genuinely free cell instead.
inline std::optional<GridCell> nearest_free_cell(const OccupancyGrid& grid, const Vec2& p,
                                                 double radius) {
  int cx, cy;
  grid.cell_of(p, cx, cy);
  if (grid.at(cx, cy) == Cell::Free) return GridCell{cx, cy};
  const int r = static_cast<int>(std::ceil(radius / grid.resolution()));
  std::optional<GridCell> best;
  double best_d = radius + 1e-9;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (grid.at(cx + dx, cy + dy) != Cell::Free) continue;
      const double d = (grid.center_of(cx + dx, cy + dy) - p).norm();
      if (d < best_d - 1e-12) {
        best_d = d;
        best = GridCell{cx + dx, cy + dy};
      }
    }
  return best;
}

// Like nearest_free_cell, but the straight hop from p to the candidate center
// must stay in free cells (the robot's own quantized cell excepted). Without
// this the nearest free cell can sit on the far side of a thin wall, and
// every plan starting with that hop collides immediately.
inline std::optional<GridCell> adjacent_free_cell(const OccupancyGrid& grid, const Vec2& p,
                                                  double radius) {
  int cx, cy;
  grid.cell_of(p, cx, cy);
  if (grid.at(cx, cy) == Cell::Free) return GridCell{cx, cy};
  const int r = static_cast<int>(std::ceil(radius / grid.resolution()));
  std::vector<std::tuple<double, int, int>> cands;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (grid.at(cx + dx, cy + dy) != Cell::Free) continue;
      const double d = (grid.center_of(cx + dx, cy + dy) - p).norm();
      if (d <= radius + 1e-9) cands.emplace_back(d, cy + dy, cx + dx);
    }
  std::sort(cands.begin(), cands.end());
  for (const auto& [d, iy, ix] : cands) {
    bool clean = true;
    walk_cells(grid, p, grid.center_of(ix, iy), [&](int wx, int wy) {
      if (wx == cx && wy == cy) return true;
      clean = grid.at(wx, wy) == Cell::Free;
      return clean;
    });
    if (clean) return GridCell{ix, iy};
  }
  return std::nullopt;
}

struct FrontierCluster {
  std::vector<GridCell> cells;
  Vec2 centroid;
};

// Free cells bordering unknown space, grouped into 8-connected components.
// Clusters come back sorted by centroid so downstream tie-breaks are stable.
inline std::vector<FrontierCluster> detect_frontiers(const OccupancyGrid& grid) {
  const int w = grid.width(), h = grid.height();
  auto is_frontier = [&](int ix, int iy) {
    if (grid.at(ix, iy) != Cell::Free) return false;
    return grid.at(ix + 1, iy) == Cell::Unknown || grid.at(ix - 1, iy) == Cell::Unknown ||
           grid.at(ix, iy + 1) == Cell::Unknown || grid.at(ix, iy - 1) == Cell::Unknown;
  };
  std::vector<bool> seen(static_cast<size_t>(w) * h, false);
  std::vector<FrontierCluster> out;
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      if (seen[static_cast<size_t>(iy) * w + ix] || !is_frontier(ix, iy)) continue;
      FrontierCluster cl;
      std::vector<GridCell> stack{{ix, iy}};
      seen[static_cast<size_t>(iy) * w + ix] = true;
      Vec2 sum{0, 0};
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        cl.cells.emplace_back(cx, cy);
        const Vec2 c = grid.center_of(cx, cy);
        sum = sum + c;
        for (int d = 0; d < 8; ++d) {
          const int nx = cx + detail::kDx[d], ny = cy + detail::kDy[d];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (seen[static_cast<size_t>(ny) * w + nx] || !is_frontier(nx, ny)) continue;
          seen[static_cast<size_t>(ny) * w + nx] = true;
          stack.emplace_back(nx, ny);
        }
      }
      cl.centroid = sum * (1.0 / cl.cells.size());
      std::sort(cl.cells.begin(), cl.cells.end());
      out.push_back(std::move(cl));
    }
  }
  std::sort(out.begin(), out.end(), [](const FrontierCluster& a, const FrontierCluster& b) {
    return std::tie(a.centroid.x, a.centroid.y) < std::tie(b.centroid.x, b.centroid.y);
  });
  return out;
}

struct FrontierGoal {
  Pose pose;
  double grid_dist = 0;  // flood distance in cells
  int cluster_size = 0;
};

// All reachable frontier clusters priced by one Dijkstra flood from the pose,
// nearest first; ties keep the clusters' lexicographic centroid order. Each
// goal steers at the cluster's free cell nearest its centroid, because the
// centroid itself may fall outside the cluster on bent frontiers.
inline std::vector<FrontierGoal> rank_frontier_goals(const OccupancyGrid& grid,
                                                     const Pose& pose) {
  const auto clusters = detect_frontiers(grid);
  if (clusters.empty()) return {};

  const int w = grid.width(), h = grid.height();
  const auto seed = adjacent_free_cell(grid, pose.position, 0.3);
  std::vector<double> dist(static_cast<size_t>(w) * h, std::numeric_limits<double>::infinity());
  if (seed) {
    const auto [sx, sy] = *seed;
    using QEntry = std::tuple<double, int, int>;
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> open;
    dist[static_cast<size_t>(sy) * w + sx] = 0;
    open.emplace(0.0, sx, sy);
    while (!open.empty()) {
      const auto [d, ix, iy] = open.top();
      open.pop();
      if (d > dist[static_cast<size_t>(iy) * w + ix] + 1e-12) continue;
      for (int k = 0; k < 8; ++k) {
        if (!detail::step_free(grid, ix, iy, k)) continue;
        const int nx = ix + detail::kDx[k], ny = iy + detail::kDy[k];
        const double nd = d + (k >= 4 ? std::sqrt(2.0) : 1.0);
        if (nd < dist[static_cast<size_t>(ny) * w + nx] - 1e-12) {
          dist[static_cast<size_t>(ny) * w + nx] = nd;
          open.emplace(nd, nx, ny);
        }
      }
    }
  }

  std::vector<std::pair<double, size_t>> order;
  for (size_t c = 0; c < clusters.size(); ++c) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [ix, iy] : clusters[c].cells)
      d = std::min(d, dist[static_cast<size_t>(iy) * w + ix]);
    if (std::isfinite(d)) order.emplace_back(d, c);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<FrontierGoal> out;
  out.reserve(order.size());
  for (const auto& [d, c] : order) {
    const auto& cl = clusters[c];
    GridCell target = cl.cells.front();
    double td = std::numeric_limits<double>::max();
    for (const auto& [ix, iy] : cl.cells) {
      const double dd = (grid.center_of(ix, iy) - cl.centroid).norm();
      if (dd < td - 1e-12) {
        td = dd;
        target = {ix, iy};
      }
    }
    const Vec2 goal = grid.center_of(target.first, target.second);
    out.push_back({{goal, detail::heading(pose.position, goal)},
                   d,
                   static_cast<int>(cl.cells.size())});
  }
  return out;
}

// Nearest frontier cluster by grid-path distance; empty when exploration is
// geometrically finished (no reachable frontier remains).
inline std::optional<Pose> frontier_policy(const OccupancyGrid& grid, const Pose& pose) {
  auto goals = rank_frontier_goals(grid, pose);
  if (goals.empty()) return std::nullopt;
  return goals.front().pose;
}

}  // namespace sgexp
