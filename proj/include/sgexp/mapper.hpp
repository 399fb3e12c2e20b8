#pragma once

#include <algorithm>
#include <climits>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sgexp/catalog.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/maxrect.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/tracks.hpp"
#include "sgexp/voxel.hpp"
#include "sgexp/walls.hpp"
#include "sgexp/world.hpp"

namespace sgexp {

struct MapperConfig {
  double tau = 5.0;      // seconds a track may stay unseen before termination
  double iou_min = 0.3;  // association acceptance threshold
  int min_hits = 1;      // detections needed before a track emits an object
  double merge_containment = 0.8;  // voxel containment that collapses two tracks

  int wall_confirm_count = 2;
  WallFitConfig wall_fit;
  double wall_merge_offset = 0.12;  // plane gap treated as faces of one wall
  double wall_merge_angle = 0.2;    // radians between mergeable normals
  double wall_merge_reach = 0.15;   // footprint pad when checking wall overlap

  double door_min = 0.4;  // traversable opening widths between collinear walls
  double door_max = 2.0;

  double cuboid_min_volume = 1.0;    // m^3 before a free box becomes a node
  double nothing_window = 8.0;       // edge of the local search window
  double nothing_containment = 0.9;  // overlap/min-volume ratio that merges boxes

  double room_seal = 0.55;   // wall dilation that pinches off door openings
  double carve_margin = 0.25;  // ray-endpoint pullback for volumetric carving

  double grid_res = kGridRes;
  double voxel_res = kMapRes;
  double voxel_z_span = 3.0;
  Catalog catalog = default_catalog();
};

namespace detail {

// Running consensus for one wall: per-scan RANSAC fits that share a plane and
// touch footprints get folded in, and the wall is trusted (promoted into the
// graph) once enough distinct scans agree.
struct WallCandidate {
  Vec3 normal{1, 0, 0};
  double offset = 0;
  ObbXY box;
  int count = 0;
  int last_obs = -1;  // guards against double-counting within one scan
  NodeId node = kNoNode;
};

}  // namespace detail

struct Mapper {
  SceneGraph graph;
  std::vector<Track> tracks;    // active
  std::vector<Track> finished;  // terminated; their objects stay in the graph
  OccupancyGrid grid;
  VoxelGrid3 voxel_occ;
  MapperConfig config;

  std::vector<detail::WallCandidate> wall_candidates;
  std::vector<std::string> warnings;  // non-fatal issues from the last integrate
  uint64_t seed = 0;
  int obs_count = 0;
  int64_t next_track_id = 0;

  explicit Mapper(MapperConfig cfg = {}, uint64_t rng_seed = 0)
      : grid({{0, 0}, {cfg.grid_res, cfg.grid_res}}, cfg.grid_res),
        voxel_occ({{0, 0, 0}, {cfg.voxel_res, cfg.voxel_res, cfg.voxel_z_span}}, cfg.voxel_res),
        config(std::move(cfg)),
        seed(rng_seed) {}
};

namespace detail {

inline double dist_point_obb_xy(const Vec2& p, const ObbXY& box) {
  Vec3 l = box.to_local({p.x, p.y, box.center.z});
  double dx = std::max(std::abs(l.x) - box.half.x, 0.0);
  double dy = std::max(std::abs(l.y) - box.half.y, 0.0);
  return std::hypot(dx, dy);
}

inline bool segment_crosses_footprint(const Vec2& a, const Vec2& b, const ObbXY& box) {
  Vec3 a3{a.x, a.y, box.center.z}, b3{b.x, b.y, box.center.z};
  return segment_intersects_obb(a3, b3, box);
}

inline double overlap_volume(const Aabb3& a, const Aabb3& b) {
  double x = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
  double y = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
  double z = std::min(a.hi.z, b.hi.z) - std::max(a.lo.z, b.lo.z);
  return std::max(0.0, x) * std::max(0.0, y) * std::max(0.0, z);
}

}  // namespace detail

// Folds one observation's evidence into the 2D navigation grid and the 3D
// free-space store. The 2D grid takes every cell along each free ray; the 3D
// store is stricter, carving a column only when the cell center sits between
// two adjacent rays that both extend past it with margin. That gap keeps the
// cuboid search out of space no scan actually vouched for: anything between
// two clear adjacent rays and short of their endpoints would have produced a
// detection if it were occupied.
inline void update_occupancy(Mapper& m, const Observation& obs) {
  const Vec2 eye = obs.pose.position;

  Aabb2 span;
  span.expand(eye);
  for (const auto& r : obs.free_rays) span.expand(r.endpoint.xy());
  for (const auto& p : obs.wall_points) span.expand(p.xy());
  for (const auto& d : obs.detections)
    for (const auto& c : d.voxels.cells) span.expand(d.voxels.center_of(c).xy());
  m.grid.ensure(span.padded(0.3).lo, 0.2);
  m.grid.ensure(span.padded(0.3).hi, 0.2);
  m.voxel_occ.ensure(span.padded(0.3).lo, 0.2);
  m.voxel_occ.ensure(span.padded(0.3).hi, 0.2);

  for (const auto& d : obs.detections)
    for (const auto& c : d.voxels.cells) {
      Vec3 p = d.voxels.center_of(c);
      m.voxel_occ.mark_world(p, Cell::Occupied);
      // A voxel is solid across its whole footprint. Stamping only its
      // center cell leaves ray-carved "free" slivers inside furniture, and
      // those slivers later host waypoints nothing can actually reach.
      const double vr = d.voxels.resolution / 2;
      int x0, y0, x1, y1;
      m.grid.cell_of({p.x - vr + 1e-9, p.y - vr + 1e-9}, x0, y0);
      m.grid.cell_of({p.x + vr - 1e-9, p.y + vr - 1e-9}, x1, y1);
      for (int iy = y0; iy <= y1; ++iy)
        for (int ix = x0; ix <= x1; ++ix) m.grid.mark(ix, iy, Cell::Occupied);
    }
  for (const auto& p : obs.wall_points) {
    m.voxel_occ.mark_world(p, Cell::Occupied);
    m.grid.mark_world(p.xy(), Cell::Occupied);
  }

  for (const auto& r : obs.free_rays) {
    Vec2 end = r.endpoint.xy();
    if (r.hit) {
      // Stay off the obstacle cell itself; its own evidence marks it.
      Vec2 d = end - eye;
      double len = d.norm();
      if (len > m.config.grid_res) end = eye + d * ((len - m.config.grid_res) / len);
    }
    walk_cells(m.grid, eye, end, [&](int ix, int iy) {
      m.grid.mark(ix, iy, Cell::Free);
      return true;
    });
  }

  // The sensor pose itself is collision-free at every height.
  m.grid.mark_world(eye, Cell::Free);
  for (int iz = 0; iz < m.voxel_occ.nz(); ++iz) {
    int ix, iy, dummy;
    m.voxel_occ.cell_of({eye.x, eye.y, 0}, ix, iy, dummy);
    m.voxel_occ.mark(ix, iy, iz, Cell::Free);
  }

  // Volumetric carve: order rays by bearing, find angular neighbors, and carve
  // each ray's corridor up to the shortest of the three rays minus margin.
  const size_t n = obs.free_rays.size();
  if (n < 3) return;
  std::vector<double> theta(n), len(n);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 d = obs.free_rays[i].endpoint.xy() - eye;
    theta[i] = std::atan2(d.y, d.x);
    if (theta[i] < 0) theta[i] += kTwoPi;
    len[i] = d.norm();
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return theta[a] < theta[b]; });

  std::vector<double> gaps(n);
  for (size_t k = 0; k < n; ++k) {
    double g = theta[order[(k + 1) % n]] - theta[order[k]];
    if (g < 0) g += kTwoPi;
    gaps[k] = g;
  }
  std::vector<double> sorted_gaps = gaps;
  std::sort(sorted_gaps.begin(), sorted_gaps.end());
  const double step = sorted_gaps[n / 2];  // nominal angular spacing

  const double res = m.voxel_occ.resolution();
  const double z0 = m.voxel_occ.origin().z;
  for (size_t k = 0; k < n; ++k) {
    double gap_prev = gaps[(k + n - 1) % n], gap_next = gaps[k];
    if (gap_prev > 1.5 * step || gap_next > 1.5 * step) continue;  // wedge edge ray
    size_t i = order[k];
    size_t prev = order[(k + n - 1) % n], next = order[(k + 1) % n];
    double limit = std::min({len[prev], len[i], len[next]}) - m.config.carve_margin;
    if (limit <= 0) continue;
    Vec2 dir{std::cos(theta[i]), std::sin(theta[i])};
    int last_ix = INT_MIN, last_iy = INT_MIN;
    for (double s = res / 2; s <= limit; s += res / 2) {
      Vec2 u = eye + dir * s;
      int ix, iy, iz0;
      m.voxel_occ.cell_of({u.x, u.y, 0}, ix, iy, iz0);
      if (ix == last_ix && iy == last_iy) continue;
      last_ix = ix;
      last_iy = iy;
      Vec2 c = {m.voxel_occ.origin().x + (ix + 0.5) * res,
                m.voxel_occ.origin().y + (iy + 0.5) * res};
      double d2 = (c - eye).norm();
      if (d2 < 1e-9) continue;
      double bearing = std::atan2(c.y - eye.y, c.x - eye.x);
      if (std::abs(wrap_angle(bearing - theta[i])) > 1.5 * step) continue;
      for (int iz = 0; iz < m.voxel_occ.nz(); ++iz) {
        double zc = z0 + (iz + 0.5) * res;
        double reach = std::hypot(d2, zc - kSensorZ);
        if (reach <= limit) m.voxel_occ.mark(ix, iy, iz, Cell::Free);
      }
    }
  }
}

namespace detail {

inline Aabb2 padded_footprint(const ObbXY& box, double pad) {
  return box.aabb_xy().padded(pad);
}

// Merge one scan's wall fits into the rolling candidate list.
inline void accumulate_walls(Mapper& m, const std::vector<StructureNode>& fits) {
  const double cos_tol = std::cos(m.config.wall_merge_angle);
  for (const auto& fit : fits) {
    WallCandidate* best = nullptr;
    for (auto& cand : m.wall_candidates) {
      if (std::abs(fit.plane_normal.dot(cand.normal)) < cos_tol) continue;
      double off = fit.plane_normal.dot(cand.normal) >= 0 ? cand.offset : -cand.offset;
      if (std::abs(fit.plane_offset - off) > m.config.wall_merge_offset) continue;
      if (!padded_footprint(fit.box, m.config.wall_merge_reach)
               .overlaps(padded_footprint(cand.box, m.config.wall_merge_reach)))
        continue;
      best = &cand;
      break;
    }
    if (!best) {
      WallCandidate c;
      c.normal = fit.plane_normal;
      c.offset = fit.plane_offset;
      c.box = fit.box;
      c.count = 1;
      c.last_obs = m.obs_count;
      m.wall_candidates.push_back(c);
      continue;
    }
    // Geometry merge: refit over both boxes' corners so the candidate grows
    // along the wall and thickens to the centerline as both faces come in.
    std::vector<Vec3> corners;
    for (const ObbXY* b : {const_cast<const ObbXY*>(&best->box), &fit.box}) {
      for (const Vec2& p : b->footprint()) {
        corners.push_back({p.x, p.y, b->z_lo()});
        corners.push_back({p.x, p.y, b->z_hi()});
      }
    }
    best->box = fit_point_box(corners, 0.0);
    double w = static_cast<double>(best->count);
    double off = fit.plane_normal.dot(best->normal) >= 0 ? fit.plane_offset : -fit.plane_offset;
    best->offset = (best->offset * w + off) / (w + 1);
    if (best->last_obs != m.obs_count) {
      best->count += 1;
      best->last_obs = m.obs_count;
    }
  }

  for (auto& cand : m.wall_candidates) {
    if (cand.count < m.config.wall_confirm_count) continue;
    StructureNode sn;
    sn.id = cand.node;
    sn.kind = StructureKind::Wall;
    sn.plane_normal = cand.normal;
    sn.plane_offset = cand.offset;
    sn.box = cand.box;
    sn.observation_count = cand.count;
    try {
      cand.node = m.graph.upsert(sn);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("wall rejected: ") + e.what());
    }
  }
}

// Openings between confirmed collinear walls become door structures once the
// grid shows the gap was actually seen open (no occupied evidence inside it,
// a fair share of it carved free).
inline void infer_doors(Mapper& m) {
  std::vector<const StructureNode*> walls;
  for (const auto& [id, s] : m.graph.structures)
    if (s.kind == StructureKind::Wall && s.observation_count >= m.config.wall_confirm_count)
      walls.push_back(&s);

  struct DoorSpot {
    Vec2 center;
    double along_half, across_half, z_lo, z_hi, yaw;
    Vec3 normal;
    double offset;
    int count;
  };
  std::vector<DoorSpot> spots;
  const double cos_tol = std::cos(m.config.wall_merge_angle);
  for (size_t i = 0; i < walls.size(); ++i) {
    for (size_t j = i + 1; j < walls.size(); ++j) {
      const StructureNode &a = *walls[i], &b = *walls[j];
      if (std::abs(a.plane_normal.dot(b.plane_normal)) < cos_tol) continue;
      double ob = a.plane_normal.dot(b.plane_normal) >= 0 ? b.plane_offset : -b.plane_offset;
      if (std::abs(a.plane_offset - ob) > 0.15) continue;
      Vec2 nrm{a.plane_normal.x, a.plane_normal.y};
      double nl = nrm.norm();
      if (nl < 1e-9) continue;  // walls are vertical; a flat-plane fit is junk
      nrm = nrm * (1.0 / nl);
      Vec2 tang{-nrm.y, nrm.x};
      auto span_of = [&](const StructureNode& s) {
        double lo = 1e300, hi = -1e300;
        for (const Vec2& p : s.box.footprint()) {
          double t = tang.dot(p);
          lo = std::min(lo, t);
          hi = std::max(hi, t);
        }
        return std::pair<double, double>{lo, hi};
      };
      auto [alo, ahi] = span_of(a);
      auto [blo, bhi] = span_of(b);
      double g0, g1;
      if (ahi < blo) {
        g0 = ahi;
        g1 = blo;
      } else if (bhi < alo) {
        g0 = bhi;
        g1 = alo;
      } else {
        continue;
      }
      double width = g1 - g0;
      if (width < m.config.door_min || width > m.config.door_max) continue;

      double line = (a.plane_offset + ob) / 2;
      int free_hits = 0, occ_hits = 0;
      const int samples = 9;
      for (int s = 0; s < samples; ++s) {
        double t = g0 + (s + 1) * width / (samples + 1);
        Vec2 q = nrm * line + tang * t;
        Cell c = m.grid.at_world(q);
        free_hits += c == Cell::Free;
        occ_hits += c == Cell::Occupied;
      }
      if (occ_hits > 0 || free_hits < samples / 2) continue;

      DoorSpot d;
      d.center = nrm * line + tang * ((g0 + g1) / 2);
      d.along_half = width / 2;
      d.across_half = std::max(std::min(a.box.half.x, a.box.half.y),
                               std::min(b.box.half.x, b.box.half.y));
      d.z_lo = std::min(a.box.z_lo(), b.box.z_lo());
      d.z_hi = std::max(a.box.z_hi(), b.box.z_hi());
      d.yaw = std::atan2(tang.y, tang.x);
      d.normal = a.plane_normal;
      d.offset = line;
      d.count = std::min(a.observation_count, b.observation_count);
      spots.push_back(d);
    }
  }

  // Refresh door nodes: nearby spot keeps the node, spotless nodes go away.
  std::vector<NodeId> existing;
  for (const auto& [id, s] : m.graph.structures)
    if (s.kind == StructureKind::Door) existing.push_back(id);
  std::vector<bool> spot_used(spots.size(), false);
  std::vector<NodeId> stale;
  for (NodeId id : existing) {
    const StructureNode& s = m.graph.structures.at(id);
    int best = -1;
    double best_d = 0.3;
    for (size_t k = 0; k < spots.size(); ++k) {
      if (spot_used[k]) continue;
      double d = (spots[k].center - s.box.center.xy()).norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) {
      stale.push_back(id);
      continue;
    }
    spot_used[best] = true;
    StructureNode sn = s;
    const DoorSpot& d = spots[best];
    sn.box = ObbXY{{d.center.x, d.center.y, (d.z_lo + d.z_hi) / 2},
                   {d.along_half, d.across_half, (d.z_hi - d.z_lo) / 2},
                   d.yaw};
    sn.plane_normal = d.normal;
    sn.plane_offset = d.offset;
    sn.observation_count = d.count;
    try {
      m.graph.upsert(sn);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("door rejected: ") + e.what());
    }
  }
  for (NodeId id : stale) m.graph.erase(id);
  for (size_t k = 0; k < spots.size(); ++k) {
    if (spot_used[k]) continue;
    const DoorSpot& d = spots[k];
    StructureNode sn;
    sn.kind = StructureKind::Door;
    sn.box = ObbXY{{d.center.x, d.center.y, (d.z_lo + d.z_hi) / 2},
                   {d.along_half, d.across_half, (d.z_hi - d.z_lo) / 2},
                   d.yaw};
    sn.plane_normal = d.normal;
    sn.plane_offset = d.offset;
    sn.observation_count = d.count;
    try {
      m.graph.upsert(sn);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("door rejected: ") + e.what());
    }
  }
}

// Local free-space audit around the sensor: the largest confirmed-free cuboid
// in an 8 m window becomes (or refreshes) a nothing node when it is big
// enough to matter.
inline void extract_nothing(Mapper& m, const Vec2& around) {
  const double res = m.voxel_occ.resolution();
  const Vec3& org = m.voxel_occ.origin();
  double half = m.config.nothing_window / 2;
  int x0 = std::max(0, static_cast<int>(std::floor((around.x - half - org.x) / res)));
  int y0 = std::max(0, static_cast<int>(std::floor((around.y - half - org.y) / res)));
  int x1 = std::min(m.voxel_occ.nx() - 1,
                    static_cast<int>(std::floor((around.x + half - org.x) / res)));
  int y1 = std::min(m.voxel_occ.ny() - 1,
                    static_cast<int>(std::floor((around.y + half - org.y) / res)));
  if (x1 < x0 || y1 < y0) return;

  Vec3 lo{org.x + x0 * res, org.y + y0 * res, org.z};
  int wx = x1 - x0 + 1, wy = y1 - y0 + 1, wz = m.voxel_occ.nz();
  // Half-cell shrink keeps ceil() from inventing an extra row of cells.
  VoxelGrid3 window({lo, {lo.x + (wx - 0.5) * res, lo.y + (wy - 0.5) * res,
                          lo.z + (wz - 0.5) * res}},
                    res);
  for (int z = 0; z < wz; ++z)
    for (int y = 0; y < wy; ++y)
      for (int x = 0; x < wx; ++x) window.mark(x, y, z, m.voxel_occ.at(x0 + x, y0 + y, z));

  CellBox3 best = largest_empty_cuboid(window);
  double volume = best.volume * res * res * res;
  if (volume < m.config.cuboid_min_volume) return;
  Aabb3 box = cell_box_bounds(window, best);

  // Heavy mutual overlap folds into one node; the bigger box wins.
  std::vector<NodeId> swallowed;
  for (const auto& [id, nn] : m.graph.nothings) {
    double ratio = overlap_volume(box, nn.box) / std::min(box.volume(), nn.box.volume());
    if (ratio >= m.config.nothing_containment) swallowed.push_back(id);
  }
  if (swallowed.empty()) {
    NothingNode nn;
    nn.box = box;
    try {
      m.graph.upsert(nn);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("nothing rejected: ") + e.what());
    }
    return;
  }
  Aabb3 winner = box;
  for (NodeId id : swallowed)
    if (m.graph.nothings.at(id).box.volume() > winner.volume())
      winner = m.graph.nothings.at(id).box;
  NothingNode keep = m.graph.nothings.at(swallowed.front());
  keep.box = winner;
  keep.parent_room = kNoNode;
  for (size_t i = 1; i < swallowed.size(); ++i) m.graph.erase(swallowed[i]);
  m.graph.upsert(keep);
}

}  // namespace detail

// Splits the grid's free space into rooms: free cells within reach of a
// confirmed wall are pinched off, the remaining cells form connected
// components, and components whose closest free-space contact is not a door
// get merged back (dilation blobs split more than walls actually do). Every
// free cell is then attributed to its nearest surviving component, and each
// component becomes a room labeled by its member objects.
inline void segment_rooms(Mapper& m) {
  const OccupancyGrid& g = m.grid;
  const int w = g.width(), h = g.height();
  const double res = g.resolution();
  if (g.count(Cell::Free) == 0)
    throw Error(Errc::NoFreeSpace, "no free cells to segment");

  std::vector<const StructureNode*> walls, doors;
  for (const auto& [id, s] : m.graph.structures) {
    if (s.kind == StructureKind::Wall && s.observation_count >= m.config.wall_confirm_count)
      walls.push_back(&s);
    if (s.kind == StructureKind::Door) doors.push_back(&s);
  }

  std::vector<uint8_t> sealed(static_cast<size_t>(w) * h, 0);
  for (const StructureNode* s : walls) {
    Aabb2 reach = s->box.aabb_xy().padded(m.config.room_seal);
    int ix0, iy0, ix1, iy1;
    g.cell_of(reach.lo, ix0, iy0);
    g.cell_of(reach.hi, ix1, iy1);
    for (int iy = std::max(0, iy0); iy <= std::min(h - 1, iy1); ++iy)
      for (int ix = std::max(0, ix0); ix <= std::min(w - 1, ix1); ++ix)
        if (detail::dist_point_obb_xy(g.center_of(ix, iy), s->box) <= m.config.room_seal)
          sealed[static_cast<size_t>(iy) * w + ix] = 1;
  }

  // Connected components over free, unsealed cells.
  std::vector<int> comp(static_cast<size_t>(w) * h, -1);
  int n_comp = 0;
  std::vector<std::pair<int, int>> stack;
  const int dx4[4] = {1, -1, 0, 0}, dy4[4] = {0, 0, 1, -1};
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      size_t idx = static_cast<size_t>(iy) * w + ix;
      if (comp[idx] >= 0 || sealed[idx] || g.at(ix, iy) != Cell::Free) continue;
      int id = n_comp++;
      comp[idx] = id;
      stack.push_back({ix, iy});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
          int nx = cx + dx4[k], ny = cy + dy4[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          size_t ni = static_cast<size_t>(ny) * w + nx;
          if (comp[ni] >= 0 || sealed[ni] || g.at(nx, ny) != Cell::Free) continue;
          comp[ni] = id;
          stack.push_back({nx, ny});
        }
      }
    }

  // Multi-source BFS over all free cells: attributes sealed free cells to the
  // nearest component and finds where two components' frontiers meet.
  std::vector<int> owner = comp;
  std::deque<std::pair<int, int>> q;
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      if (owner[static_cast<size_t>(iy) * w + ix] >= 0) q.push_back({ix, iy});
  std::map<std::pair<int, int>, std::pair<Vec2, Vec2>> meetings;
  while (!q.empty()) {
    auto [cx, cy] = q.front();
    q.pop_front();
    int o = owner[static_cast<size_t>(cy) * w + cx];
    for (int k = 0; k < 4; ++k) {
      int nx = cx + dx4[k], ny = cy + dy4[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (g.at(nx, ny) != Cell::Free) continue;
      size_t ni = static_cast<size_t>(ny) * w + nx;
      if (owner[ni] < 0) {
        owner[ni] = o;
        q.push_back({nx, ny});
      } else if (owner[ni] != o) {
        auto key = std::minmax(o, owner[ni]);
        if (!meetings.count({key.first, key.second}))
          meetings[{key.first, key.second}] = {g.center_of(cx, cy), g.center_of(nx, ny)};
      }
    }
  }

  // Components that meet somewhere other than a door opening belong together.
  std::vector<int> dsu(n_comp);
  std::iota(dsu.begin(), dsu.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  for (const auto& [pair, cells] : meetings) {
    Vec2 mid = (cells.first + cells.second) * 0.5;
    bool at_door = false;
    for (const StructureNode* d : doors) {
      ObbXY padded = d->box;
      padded.half.x += 0.3;
      padded.half.y += 0.3;
      if (padded.contains_xy(mid)) {
        at_door = true;
        break;
      }
    }
    if (!at_door) {
      int a = find(pair.first), b = find(pair.second);
      if (a != b) dsu[std::max(a, b)] = std::min(a, b);
    }
  }

  struct RoomAccum {
    Aabb2 bounds;
    Vec2 sum{0, 0};
    size_t cells = 0;
  };
  std::map<int, RoomAccum> accum;
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      size_t idx = static_cast<size_t>(iy) * w + ix;
      if (owner[idx] < 0) continue;
      RoomAccum& ra = accum[find(owner[idx])];
      Vec2 c = g.center_of(ix, iy);
      ra.bounds.expand(c);
      ra.sum = ra.sum + c;
      ra.cells += 1;
    }
  if (accum.empty()) throw Error(Errc::NoFreeSpace, "no room components");

  // Stable ids: a new footprint takes over the old room it overlaps most.
  struct NewRoom {
    Aabb2 bounds;
    Vec2 centroid;
    NodeId id = kNoNode;
  };
  std::vector<NewRoom> fresh;
  for (const auto& [root, ra] : accum) {
    NewRoom nr;
    nr.bounds = ra.bounds.padded(res / 2);
    nr.centroid = ra.sum * (1.0 / static_cast<double>(ra.cells));
    fresh.push_back(nr);
  }
  std::vector<NodeId> prior;
  for (const auto& [id, r] : m.graph.rooms)
    if (r.provenance == Provenance::Observed) prior.push_back(id);
  std::vector<bool> prior_used(prior.size(), false);
  for (auto& nr : fresh) {
    double best_iou = 0.3;
    int best = -1;
    for (size_t k = 0; k < prior.size(); ++k) {
      if (prior_used[k]) continue;
      Aabb2 fb;
      for (const Vec2& p : m.graph.rooms.at(prior[k]).footprint) fb.expand(p);
      double ow = std::min(nr.bounds.hi.x, fb.hi.x) - std::max(nr.bounds.lo.x, fb.lo.x);
      double oh = std::min(nr.bounds.hi.y, fb.hi.y) - std::max(nr.bounds.lo.y, fb.lo.y);
      double inter = std::max(0.0, ow) * std::max(0.0, oh);
      double uni = nr.bounds.width() * nr.bounds.height() + fb.width() * fb.height() - inter;
      double iou = uni > 0 ? inter / uni : 0;
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) {
      nr.id = prior[best];
      prior_used[best] = true;
    }
  }

  for (auto& nr : fresh) {
    RoomNode r;
    r.id = nr.id;
    r.centroid = nr.centroid;
    r.footprint = rect_polygon(nr.bounds);
    std::map<std::string, double> hist;
    double total = 0;
    for (const auto& [oid, o] : m.graph.objects) {
      if (o.provenance != Provenance::Observed) continue;
      if (!nr.bounds.contains(o.center.xy())) continue;
      hist[o.label] += 1;
      total += 1;
    }
    if (total > 0)
      for (auto& [k, v] : hist) v /= total;
    r.feature = hist;
    r.label = m.config.catalog.classify(hist);
    r.provenance = Provenance::Observed;
    nr.id = m.graph.upsert(r);
  }
  for (size_t k = 0; k < prior.size(); ++k)
    if (!prior_used[k]) m.graph.erase(prior[k]);

  // Re-attribute children now that the room set changed.
  for (auto& [oid, o] : m.graph.objects) {
    if (o.provenance != Provenance::Observed) continue;
    NodeId home = kNoNode;
    for (const auto& nr : fresh)
      if (nr.bounds.contains(o.center.xy())) {
        home = nr.id;
        break;
      }
    o.parent_room = home;
  }
  for (auto& [nid, nn] : m.graph.nothings) {
    NodeId home = kNoNode;
    for (const auto& nr : fresh)
      if (nr.bounds.contains(nn.box.center().xy())) {
        home = nr.id;
        break;
      }
    nn.parent_room = home;
  }
  ++m.graph.revision;
}

// One observation in, one graph revision out. Failures of individual stages
// are downgraded to warnings so a bad scan cannot wedge the whole map.
inline int64_t integrate(Mapper& m, const Observation& obs, bool extract_nothing = true) {
  m.warnings.clear();
  ++m.obs_count;

  Association assoc =
      associate_tracks(m.tracks, obs.detections, obs.timestamp, m.config.iou_min, m.config.tau);
  for (auto [ti, di] : assoc.matches) {
    m.tracks[ti].voxels.merge(obs.detections[di].voxels);
    m.tracks[ti].last_seen = obs.timestamp;
    m.tracks[ti].hit_count += 1;
  }
  std::vector<size_t> born;
  for (size_t di : assoc.unmatched_detections) {
    if (obs.detections[di].voxels.empty()) continue;
    Track t;
    t.id = m.next_track_id++;
    t.label = obs.detections[di].label;
    t.voxels = obs.detections[di].voxels;
    t.last_seen = obs.timestamp;
    t.hit_count = 1;
    born.push_back(m.tracks.size());
    m.tracks.push_back(std::move(t));
  }

  // A brand-new track that lands on a known object of the same label is that
  // object seen again, not a second object; fold it back in. This also
  // revives tracks that timed out while the sensor was elsewhere.
  std::vector<size_t> drop;
  for (size_t bi : born) {
    Track& nt = m.tracks[bi];
    Track* host = nullptr;
    for (auto& t : m.tracks)
      if (t.id != nt.id && t.label == nt.label && !t.voxels.empty() &&
          voxel_containment(t.voxels, nt.voxels) >= m.config.merge_containment) {
        host = &t;
        break;
      }
    if (!host)
      for (auto& t : m.finished)
        if (t.label == nt.label && !t.voxels.empty() &&
            voxel_containment(t.voxels, nt.voxels) >= m.config.merge_containment) {
          host = &t;
          break;
        }
    if (!host) continue;
    host->voxels.merge(nt.voxels);
    host->last_seen = obs.timestamp;
    host->hit_count += 1;
    drop.push_back(bi);
  }
  std::sort(drop.rbegin(), drop.rend());
  for (size_t bi : drop) m.tracks.erase(m.tracks.begin() + static_cast<long>(bi));

  // Revived tracks move back to active; expired ones move out.
  for (auto it = m.finished.begin(); it != m.finished.end();) {
    if (it->last_seen == obs.timestamp) {
      m.tracks.push_back(std::move(*it));
      it = m.finished.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = m.tracks.begin(); it != m.tracks.end();) {
    if (obs.timestamp - it->last_seen > m.config.tau) {
      m.finished.push_back(std::move(*it));
      it = m.tracks.erase(it);
    } else {
      ++it;
    }
  }

  update_occupancy(m, obs);

  if (obs.wall_points.size() >= 3) {
    try {
      auto fits = fit_wall_planes(obs.wall_points, m.config.wall_fit,
                                  derive_seed(m.seed, 0x77a11u, m.obs_count));
      detail::accumulate_walls(m, fits);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("wall fit: ") + e.what());
    }
  }
  detail::infer_doors(m);

  if (extract_nothing) detail::extract_nothing(m, obs.pose.position);

  for (Track& t : m.tracks) {
    if (t.hit_count < m.config.min_hits || t.voxels.empty()) continue;
    try {
      ObbXY box = fit_box(t.voxels);
      ObjectNode o;
      o.id = t.node;
      o.label = t.label;
      o.center = box.center;
      o.half_extents = box.half;
      o.yaw = box.yaw;
      o.parent_room = kNoNode;
      o.provenance = Provenance::Observed;
      t.node = m.graph.upsert(o);
    } catch (const Error& e) {
      m.warnings.push_back(std::string("object fit: ") + e.what());
    }
  }

  try {
    segment_rooms(m);
  } catch (const Error& e) {
    m.warnings.push_back(std::string("segmentation: ") + e.what());
  }

  return m.graph.revision;
}

}  // namespace sgexp
