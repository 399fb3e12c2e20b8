#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgexp/catalog.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/voxel.hpp"

namespace sgexp {

constexpr double kSensorZ = 1.0;   // eye height of the simulated camera
constexpr double kMapRes = 0.1;    // detection voxel lattice
constexpr double kGridRes = 0.05;  // navigation grid resolution

struct Pose {
  Vec2 position;
  double yaw = 0;
};

struct NoiseSpec {
  double sigma = 0.02;      // gaussian jitter on detection voxel centers
  double label_flip = 0.0;  // probability a detection reports a wrong label
  uint64_t seed = 0;
};

struct Detection {
  std::string label;
  VoxelSet voxels;
  NodeId truth_ref = kNoNode;  // simulator bookkeeping for oracles; mapping must not read it
};

struct FreeRay {
  Vec3 origin;
  Vec3 endpoint;
  bool hit = false;  // endpoint sits on an obstacle rather than at max range
};

struct Observation {
  Pose pose;
  std::vector<Detection> detections;
  std::vector<Vec3> wall_points;
  std::vector<FreeRay> free_rays;
  double timestamp = 0;
};

struct WorldSpec {
  uint64_t seed = 0;
  int room_min = 3;
  int room_max = 5;
  Vec2 extent{12, 10};
  Catalog catalog = default_catalog();
  double door_width = 0.9;
  double wall_thickness = 0.1;
  double wall_height = 2.5;
  double door_height = 2.1;
  double extra_door_prob = 0.2;
};

struct WorldRoom {
  std::string label;
  Aabb2 interior;
  NodeId node = kNoNode;
};

struct WorldObject {
  std::string label;
  ObbXY box;
  int room = -1;
  NodeId node = kNoNode;
};

struct WallSeg {
  ObbXY box;
  Vec3 normal;
  double offset = 0;
};

struct DoorGap {
  ObbXY box;
  int room_a = -1;
  int room_b = -1;
  Vec3 normal;
  double offset = 0;
};

struct World {
  WorldSpec spec;
  std::vector<WorldRoom> rooms;
  std::vector<WorldObject> objects;
  std::vector<WallSeg> walls;
  std::vector<DoorGap> doors;
  SceneGraph truth_graph;
  OccupancyGrid free_mask;  // fully known: Free where a robot can stand
  Aabb2 bounds;
  Pose start;

  bool point_free(const Vec2& p) const {
    for (const auto& w : walls)
      if (w.box.contains_xy(p)) return false;
    for (const auto& o : objects)
      if (o.box.contains_xy(p)) return false;
    for (const auto& r : rooms)
      if (r.interior.contains(p)) return true;
    for (const auto& d : doors)
      if (d.box.contains_xy(p)) return true;
    return false;
  }
};

namespace detail {

struct BoundaryLine {
  int axis;      // 0: wall line x = coord, 1: wall line y = coord
  double coord;
  std::vector<std::pair<double, double>> intervals;
};

inline void merge_intervals(std::vector<std::pair<double, double>>& iv) {
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& [a, b] : iv) {
    if (!out.empty() && a <= out.back().second + 1e-9)
      out.back().second = std::max(out.back().second, b);
    else
      out.push_back({a, b});
  }
  iv = std::move(out);
}

inline void subtract_interval(std::vector<std::pair<double, double>>& iv, double a, double b) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [lo, hi] : iv) {
    if (b <= lo || a >= hi) {
      out.push_back({lo, hi});
      continue;
    }
    if (a > lo) out.push_back({lo, a});
    if (b < hi) out.push_back({b, hi});
  }
  iv = std::move(out);
}

struct AdjEdge {
  int a, b;
  int axis;      // axis of the separating wall line
  double coord;  // wall line coordinate
  double lo, hi;  // shared span along the wall line
};

inline std::optional<World> try_generate(const WorldSpec& spec, Rng& rng) {
  const double t = spec.wall_thickness;
  const double min_side = 2.3;
  World w;
  w.spec = spec;
  w.bounds = Aabb2{{0, 0}, {spec.extent.x, spec.extent.y}};

  int want = spec.room_min + static_cast<int>(rng.uniform_int(
                                 static_cast<uint64_t>(spec.room_max - spec.room_min + 1)));

  // Axis-aligned BSP: repeatedly split the largest splittable leaf.
  std::vector<Aabb2> leaves{w.bounds};
  while (static_cast<int>(leaves.size()) < want) {
    int pick = -1;
    double best_area = -1;
    for (size_t i = 0; i < leaves.size(); ++i) {
      double side = std::max(leaves[i].width(), leaves[i].height());
      if (side >= 2 * min_side && leaves[i].width() * leaves[i].height() > best_area) {
        best_area = leaves[i].width() * leaves[i].height();
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) return std::nullopt;
    Aabb2 r = leaves[pick];
    bool vertical = r.width() >= r.height();
    double lo = (vertical ? r.lo.x : r.lo.y) + min_side;
    double hi = (vertical ? r.hi.x : r.hi.y) - min_side;
    double cut = rng.uniform(lo, hi);
    Aabb2 left = r, right = r;
    if (vertical) {
      left.hi.x = cut;
      right.lo.x = cut;
    } else {
      left.hi.y = cut;
      right.lo.y = cut;
    }
    leaves[pick] = left;
    leaves.push_back(right);
  }

  for (const auto& leaf : leaves) {
    WorldRoom r;
    r.interior = Aabb2{{leaf.lo.x + t / 2, leaf.lo.y + t / 2},
                       {leaf.hi.x - t / 2, leaf.hi.y - t / 2}};
    w.rooms.push_back(r);
  }

  // Adjacency through shared leaf edges wide enough for a door.
  std::vector<AdjEdge> adj;
  const double need = spec.door_width + 0.7;
  for (size_t i = 0; i < leaves.size(); ++i)
    for (size_t j = i + 1; j < leaves.size(); ++j) {
      const Aabb2 &a = leaves[i], &b = leaves[j];
      auto overlap = [](double a0, double a1, double b0, double b1, double& lo, double& hi) {
        lo = std::max(a0, b0);
        hi = std::min(a1, b1);
        return hi - lo;
      };
      double lo, hi;
      if (std::abs(a.hi.x - b.lo.x) < 1e-9 && overlap(a.lo.y, a.hi.y, b.lo.y, b.hi.y, lo, hi) >= need)
        adj.push_back({(int)i, (int)j, 0, a.hi.x, lo, hi});
      else if (std::abs(b.hi.x - a.lo.x) < 1e-9 &&
               overlap(a.lo.y, a.hi.y, b.lo.y, b.hi.y, lo, hi) >= need)
        adj.push_back({(int)i, (int)j, 0, b.hi.x, lo, hi});
      else if (std::abs(a.hi.y - b.lo.y) < 1e-9 &&
               overlap(a.lo.x, a.hi.x, b.lo.x, b.hi.x, lo, hi) >= need)
        adj.push_back({(int)i, (int)j, 1, a.hi.y, lo, hi});
      else if (std::abs(b.hi.y - a.lo.y) < 1e-9 &&
               overlap(a.lo.x, a.hi.x, b.lo.x, b.hi.x, lo, hi) >= need)
        adj.push_back({(int)i, (int)j, 1, b.hi.y, lo, hi});
    }

  // Randomized spanning tree picks which shared edges get doors.
  std::vector<bool> in_tree(leaves.size(), false);
  std::vector<bool> door_edge(adj.size(), false);
  in_tree[0] = true;
  for (size_t added = 1; added < leaves.size(); ++added) {
    std::vector<size_t> frontier;
    for (size_t e = 0; e < adj.size(); ++e)
      if (!door_edge[e] && (in_tree[adj[e].a] ^ in_tree[adj[e].b])) frontier.push_back(e);
    if (frontier.empty()) return std::nullopt;
    size_t e = frontier[rng.uniform_int(frontier.size())];
    door_edge[e] = true;
    in_tree[adj[e].a] = in_tree[adj[e].b] = true;
  }
  for (size_t e = 0; e < adj.size(); ++e)
    if (!door_edge[e] && rng.uniform() < spec.extra_door_prob) door_edge[e] = true;

  for (size_t e = 0; e < adj.size(); ++e) {
    if (!door_edge[e]) continue;
    const AdjEdge& ed = adj[e];
    double lo = ed.lo + 0.35 + spec.door_width / 2;
    double hi = ed.hi - 0.35 - spec.door_width / 2;
    if (lo > hi) return std::nullopt;
    double c = rng.uniform(lo, hi);
    DoorGap d;
    d.room_a = ed.a;
    d.room_b = ed.b;
    if (ed.axis == 0) {
      d.box = ObbXY{{ed.coord, c, spec.door_height / 2},
                    {t / 2, spec.door_width / 2, spec.door_height / 2},
                    0};
      d.normal = {1, 0, 0};
    } else {
      d.box = ObbXY{{c, ed.coord, spec.door_height / 2},
                    {spec.door_width / 2, t / 2, spec.door_height / 2},
                    0};
      d.normal = {0, 1, 0};
    }
    d.offset = ed.coord;
    w.doors.push_back(d);
  }

  // Wall segments: union of all leaf edges per boundary line, minus door gaps.
  std::map<std::pair<int, long long>, BoundaryLine> lines;
  auto add_edge = [&](int axis, double coord, double lo, double hi) {
    auto key = std::make_pair(axis, static_cast<long long>(std::llround(coord * 1e6)));
    auto& line = lines[key];
    line.axis = axis;
    line.coord = coord;
    line.intervals.push_back({lo, hi});
  };
  for (const auto& leaf : leaves) {
    add_edge(0, leaf.lo.x, leaf.lo.y, leaf.hi.y);
    add_edge(0, leaf.hi.x, leaf.lo.y, leaf.hi.y);
    add_edge(1, leaf.lo.y, leaf.lo.x, leaf.hi.x);
    add_edge(1, leaf.hi.y, leaf.lo.x, leaf.hi.x);
  }
  for (auto& [key, line] : lines) {
    merge_intervals(line.intervals);
    for (const auto& d : w.doors) {
      bool same_line = (line.axis == 0 && d.normal.x > 0.5) || (line.axis == 1 && d.normal.y > 0.5);
      if (!same_line || std::abs(d.offset - line.coord) > 1e-9) continue;
      double c = line.axis == 0 ? d.box.center.y : d.box.center.x;
      subtract_interval(line.intervals, c - spec.door_width / 2, c + spec.door_width / 2);
    }
    for (const auto& [lo, hi] : line.intervals) {
      // Slivers between near-touching door gaps become part of the opening;
      // keeping them would leave wall pieces thinner than a grid cell.
      if (hi - lo < 0.12) continue;
      WallSeg ws;
      if (line.axis == 0) {
        ws.box = ObbXY{{line.coord, (lo + hi) / 2, spec.wall_height / 2},
                       {t / 2, (hi - lo) / 2, spec.wall_height / 2},
                       0};
        ws.normal = {1, 0, 0};
      } else {
        ws.box = ObbXY{{(lo + hi) / 2, line.coord, spec.wall_height / 2},
                       {(hi - lo) / 2, t / 2, spec.wall_height / 2},
                       0};
        ws.normal = {0, 1, 0};
      }
      ws.offset = line.coord;
      w.walls.push_back(ws);
    }
  }

  // Room labels: catalog weight, biased by adjacency to already labeled rooms,
  // restricted to profiles whose size prior roughly fits the interior.
  for (size_t i = 0; i < w.rooms.size(); ++i) {
    std::vector<std::string> labels;
    std::vector<double> weights;
    double iw = w.rooms[i].interior.width(), ih = w.rooms[i].interior.height();
    for (const auto& [label, p] : spec.catalog.rooms) {
      bool fits = (iw >= p.size_min.x * 0.75 && ih >= p.size_min.y * 0.75 &&
                   iw <= p.size_max.x * 1.4 && ih <= p.size_max.y * 1.4) ||
                  (ih >= p.size_min.x * 0.75 && iw >= p.size_min.y * 0.75 &&
                   ih <= p.size_max.x * 1.4 && iw <= p.size_max.y * 1.4);
      if (!fits) continue;
      double wt = p.weight;
      for (const auto& ed : adj) {
        if (!door_edge[&ed - adj.data()]) continue;
        int other = ed.a == static_cast<int>(i) ? ed.b : ed.b == static_cast<int>(i) ? ed.a : -1;
        if (other >= 0 && other < static_cast<int>(i) && !w.rooms[other].label.empty())
          wt *= spec.catalog.adjacency_weight(w.rooms[other].label, label);
      }
      labels.push_back(label);
      weights.push_back(wt);
    }
    if (labels.empty())
      for (const auto& [label, p] : spec.catalog.rooms) {
        labels.push_back(label);
        weights.push_back(p.weight);
      }
    w.rooms[i].label = labels[rng.weighted(weights)];
  }

  // Furnish rooms from the catalog, keeping clearance to doors and each other.
  for (size_t ri = 0; ri < w.rooms.size(); ++ri) {
    const RoomProfile& prof = spec.catalog.rooms.at(w.rooms[ri].label);
    const Aabb2& in = w.rooms[ri].interior;
    for (const auto& f : prof.furniture) {
      int count = f.count_min + static_cast<int>(rng.uniform_int(
                                    static_cast<uint64_t>(f.count_max - f.count_min + 1)));
      for (int n = 0; n < count; ++n) {
        bool placed = false;
        for (int tries = 0; tries < 60 && !placed; ++tries) {
          Vec3 half{f.half_mean.x + f.half_spread.x * rng.uniform(-1, 1),
                    f.half_mean.y + f.half_spread.y * rng.uniform(-1, 1),
                    f.half_mean.z + f.half_spread.z * rng.uniform(-1, 1)};
          double yaw = static_cast<double>(rng.uniform_int(4)) * (kPi / 2);
          double c = std::abs(std::cos(yaw)), s = std::abs(std::sin(yaw));
          double rhx = c * half.x + s * half.y, rhy = s * half.x + c * half.y;
          double inset_x = rhx + 0.2, inset_y = rhy + 0.2;
          if (in.lo.x + inset_x >= in.hi.x - inset_x || in.lo.y + inset_y >= in.hi.y - inset_y)
            break;
          Vec2 ctr{rng.uniform(in.lo.x + inset_x, in.hi.x - inset_x),
                   rng.uniform(in.lo.y + inset_y, in.hi.y - inset_y)};
          ObbXY box{{ctr.x, ctr.y, half.z}, half, yaw};
          Aabb2 fp = box.aabb_xy().padded(0.15);
          bool ok = true;
          for (const auto& other : w.objects)
            if (other.room == static_cast<int>(ri) && fp.overlaps(other.box.aabb_xy())) {
              ok = false;
              break;
            }
          for (const auto& d : w.doors)
            if (ok && box.aabb_xy().padded(0.45).overlaps(d.box.aabb_xy())) ok = false;
          if (!ok) continue;
          w.objects.push_back({f.label, box, static_cast<int>(ri), kNoNode});
          placed = true;
        }
        if (!placed && n < f.count_min) return std::nullopt;
        if (!placed) break;
      }
    }
  }

  // Known free-space mask plus connectivity checks (raw and robot-inflated).
  w.free_mask = OccupancyGrid(w.bounds.padded(0.3), kGridRes);
  for (int iy = 0; iy < w.free_mask.height(); ++iy)
    for (int ix = 0; ix < w.free_mask.width(); ++ix)
      w.free_mask.set(ix, iy, w.point_free(w.free_mask.center_of(ix, iy)) ? Cell::Free
                                                                          : Cell::Occupied);
  auto flood = [](const OccupancyGrid& g, int sx, int sy) {
    std::vector<uint8_t> seen(static_cast<size_t>(g.width()) * g.height(), 0);
    std::vector<std::pair<int, int>> stack{{sx, sy}};
    seen[static_cast<size_t>(sy) * g.width() + sx] = 1;
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (!g.in_bounds(nx, ny) || g.at(nx, ny) != Cell::Free) continue;
        auto& s = seen[static_cast<size_t>(ny) * g.width() + nx];
        if (!s) {
          s = 1;
          stack.push_back({nx, ny});
        }
      }
    }
    return seen;
  };
  int fx = -1, fy = -1;
  for (int iy = 0; iy < w.free_mask.height() && fx < 0; ++iy)
    for (int ix = 0; ix < w.free_mask.width() && fx < 0; ++ix)
      if (w.free_mask.at(ix, iy) == Cell::Free) {
        fx = ix;
        fy = iy;
      }
  if (fx < 0) return std::nullopt;
  auto seen = flood(w.free_mask, fx, fy);
  for (int iy = 0; iy < w.free_mask.height(); ++iy)
    for (int ix = 0; ix < w.free_mask.width(); ++ix)
      if (w.free_mask.at(ix, iy) == Cell::Free &&
          !seen[static_cast<size_t>(iy) * w.free_mask.width() + ix])
        return std::nullopt;

  OccupancyGrid eroded = w.free_mask.inflated(0.28);
  auto anchor_in = [&](const Aabb2& interior, int& ax, int& ay) {
    int cx, cy;
    eroded.cell_of(interior.center(), cx, cy);
    int best = -1;
    for (int iy = 0; iy < eroded.height(); ++iy)
      for (int ix = 0; ix < eroded.width(); ++ix) {
        if (eroded.at(ix, iy) != Cell::Free) continue;
        if (!interior.contains(eroded.center_of(ix, iy))) continue;
        int d = (ix - cx) * (ix - cx) + (iy - cy) * (iy - cy);
        if (best < 0 || d < best) {
          best = d;
          ax = ix;
          ay = iy;
        }
      }
    return best >= 0;
  };
  int ax0, ay0;
  if (!anchor_in(w.rooms[0].interior, ax0, ay0)) return std::nullopt;
  auto reach = flood(eroded, ax0, ay0);
  for (const auto& room : w.rooms) {
    int ax, ay;
    if (!anchor_in(room.interior, ax, ay)) return std::nullopt;
    if (!reach[static_cast<size_t>(ay) * eroded.width() + ax]) return std::nullopt;
  }
  w.start = Pose{eroded.center_of(ax0, ay0), 0};

  // Ground-truth graph: rooms, objects with parents, wall and door structures.
  for (auto& room : w.rooms) {
    RoomNode rn;
    rn.label = room.label;
    rn.centroid = room.interior.center();
    rn.footprint = rect_polygon(room.interior);
    rn.provenance = Provenance::Observed;
    room.node = w.truth_graph.upsert(std::move(rn));
  }
  std::map<int, std::map<std::string, int>> room_hist;
  for (auto& obj : w.objects) {
    ObjectNode on;
    on.label = obj.label;
    on.center = obj.box.center;
    on.half_extents = obj.box.half;
    on.yaw = obj.box.yaw;
    on.parent_room = w.rooms[obj.room].node;
    on.provenance = Provenance::Observed;
    obj.node = w.truth_graph.upsert(std::move(on));
    room_hist[obj.room][obj.label] += 1;
  }
  for (const auto& [ri, hist] : room_hist) {
    RoomNode rn = w.truth_graph.rooms.at(w.rooms[ri].node);
    double total = 0;
    for (const auto& [label, n] : hist) total += n;
    for (const auto& [label, n] : hist) rn.feature[label] = n / total;
    w.truth_graph.upsert(std::move(rn));
  }
  for (const auto& ws : w.walls) {
    StructureNode sn;
    sn.kind = StructureKind::Wall;
    sn.plane_normal = ws.normal;
    sn.plane_offset = ws.offset;
    sn.box = ws.box;
    sn.observation_count = 1;
    w.truth_graph.upsert(std::move(sn));
  }
  for (const auto& d : w.doors) {
    StructureNode sn;
    sn.kind = StructureKind::Door;
    sn.plane_normal = d.normal;
    sn.plane_offset = d.offset;
    sn.box = d.box;
    sn.observation_count = 1;
    w.truth_graph.upsert(std::move(sn));
  }
  w.truth_graph.validate();
  return w;
}

}  // namespace detail

inline World generate_world(const WorldSpec& spec) {
  if (spec.room_min < 1 || spec.room_max < spec.room_min)
    throw Error(Errc::ConfigError, "room count range invalid");
  spec.catalog.validate();
  for (int attempt = 0; attempt < 40; ++attempt) {
    Rng rng(derive_seed(spec.seed, 0x9e1du, static_cast<uint64_t>(attempt)));
    auto w = detail::try_generate(spec, rng);
    if (w) return std::move(*w);
  }
  throw Error(Errc::GenerationFailure, "world packing failed after 40 attempts");
}

namespace detail {

inline bool segment_blocked_by_walls(const World& w, const Vec3& eye, const Vec3& target,
                                     int skip_wall = -1) {
  for (size_t i = 0; i < w.walls.size(); ++i) {
    if (static_cast<int>(i) == skip_wall) continue;
    double te, tx;
    if (segment_intersects_obb(eye, target, w.walls[i].box, &te, &tx) && te < 1 - 1e-6 &&
        tx > 1e-9)
      return true;
  }
  return false;
}

}  // namespace detail

inline Observation sense(const World& w, const Pose& pose, double fov, double range,
                         const NoiseSpec& noise = {}, double timestamp = 0) {
  if (!(fov > 0) || fov > kTwoPi + 1e-9)
    throw Error(Errc::ConfigError, "fov must lie in (0, 2pi]");
  if (!w.point_free(pose.position))
    throw Error(Errc::PoseInCollision, "sensor pose inside an obstacle or outside the world");

  const bool full = fov >= kTwoPi - 1e-9;
  const Vec3 eye{pose.position.x, pose.position.y, kSensorZ};
  Rng rng(derive_seed(noise.seed, std::bit_cast<uint64_t>(pose.position.x),
                      std::bit_cast<uint64_t>(pose.position.y),
                      std::bit_cast<uint64_t>(timestamp)));
  auto in_fov = [&](double angle) {
    return full || ang_dist(angle, pose.yaw) <= fov / 2 + 1e-12;
  };

  Observation obs;
  obs.pose = pose;
  obs.timestamp = timestamp;

  std::vector<std::string> label_pool;
  if (noise.label_flip > 0) {
    for (const auto& o : w.objects)
      if (std::find(label_pool.begin(), label_pool.end(), o.label) == label_pool.end())
        label_pool.push_back(o.label);
  }

  for (const auto& obj : w.objects) {
    double reach = (obj.box.center.xy() - pose.position).norm() -
                   std::sqrt(obj.box.half.x * obj.box.half.x + obj.box.half.y * obj.box.half.y);
    if (reach > range) continue;
    VoxelSet vs;
    vs.resolution = kMapRes;
    Aabb3 bb = obj.box.aabb();
    int ix0 = static_cast<int>(std::floor(bb.lo.x / kMapRes));
    int iy0 = static_cast<int>(std::floor(bb.lo.y / kMapRes));
    int iz0 = static_cast<int>(std::floor(bb.lo.z / kMapRes));
    int ix1 = static_cast<int>(std::floor(bb.hi.x / kMapRes));
    int iy1 = static_cast<int>(std::floor(bb.hi.y / kMapRes));
    int iz1 = static_cast<int>(std::floor(bb.hi.z / kMapRes));
    for (int iz = iz0; iz <= iz1; ++iz)
      for (int iy = iy0; iy <= iy1; ++iy)
        for (int ix = ix0; ix <= ix1; ++ix) {
          Vec3 c{(ix + 0.5) * kMapRes, (iy + 0.5) * kMapRes, (iz + 0.5) * kMapRes};
          if (!obj.box.contains(c)) continue;
          if ((c - eye).norm() > range) continue;
          Vec2 d = c.xy() - pose.position;
          if (d.norm() > 1e-9 && !in_fov(std::atan2(d.y, d.x))) continue;
          if (detail::segment_blocked_by_walls(w, eye, c)) continue;
          Vec3 p = c;
          if (noise.sigma > 0)
            p = p + Vec3{rng.gaussian(0, noise.sigma), rng.gaussian(0, noise.sigma),
                         rng.gaussian(0, noise.sigma)};
          vs.insert_point(p);
        }
    if (vs.empty()) continue;
    std::string label = obj.label;
    if (noise.label_flip > 0 && rng.uniform() < noise.label_flip && label_pool.size() > 1) {
      std::string other;
      do {
        other = label_pool[rng.uniform_int(label_pool.size())];
      } while (other == label);
      label = other;
    }
    obs.detections.push_back({label, std::move(vs), obj.node});
  }

  // Row spacing stays under typical plane-cluster link distances so one face
  // comes back as one connected patch of points.
  const double z_rows[] = {0.2, 0.45, 0.7, 0.95, 1.2, 1.45, 1.7, 1.95, 2.2};
  for (size_t wi = 0; wi < w.walls.size(); ++wi) {
    const WallSeg& ws = w.walls[wi];
    for (int sign : {-1, 1}) {
      double face = ws.offset + sign * w.spec.wall_thickness / 2;
      bool vertical = ws.normal.x > 0.5;
      double eye_side = vertical ? eye.x - face : eye.y - face;
      if (eye_side * sign <= 0) continue;  // back face
      double lo = vertical ? ws.box.center.y - ws.box.half.y : ws.box.center.x - ws.box.half.x;
      double hi = vertical ? ws.box.center.y + ws.box.half.y : ws.box.center.x + ws.box.half.x;
      int k0 = static_cast<int>(std::ceil(lo / kMapRes - 0.5));
      for (int k = k0; (k + 0.5) * kMapRes <= hi; ++k) {
        double along = (k + 0.5) * kMapRes;
        if (along < lo) continue;
        for (double z : z_rows) {
          if (z > w.spec.wall_height) continue;
          Vec3 p = vertical ? Vec3{face, along, z} : Vec3{along, face, z};
          if ((p - eye).norm() > range) continue;
          Vec2 d = p.xy() - pose.position;
          if (d.norm() > 1e-9 && !in_fov(std::atan2(d.y, d.x))) continue;
          if (detail::segment_blocked_by_walls(w, eye, p, static_cast<int>(wi))) continue;
          obs.wall_points.push_back(p);
        }
      }
    }
  }

  constexpr int kRays = 720;
  const double step = kTwoPi / kRays;
  for (int k = 0; k < kRays; ++k) {
    double a = (k + 0.5) * step;
    if (!in_fov(a)) continue;
    Vec2 dir{std::cos(a), std::sin(a)};
    double t_hit = std::numeric_limits<double>::max();
    for (const auto& ws : w.walls)
      t_hit = std::min(t_hit, ray_hit_obb_xy(pose.position, dir, ws.box));
    for (const auto& obj : w.objects) {
      if (obj.box.z_hi() < kSensorZ - 1e-9) continue;  // sensor sees over it
      t_hit = std::min(t_hit, ray_hit_obb_xy(pose.position, dir, obj.box));
    }
    bool hit = t_hit <= range;
    double t_end = std::min(t_hit, range);
    obs.free_rays.push_back(
        {eye, {pose.position.x + dir.x * t_end, pose.position.y + dir.y * t_end, kSensorZ}, hit});
  }
  return obs;
}

inline Observation panoramic_scan(const World& w, const Pose& pose, double range,
                                  const NoiseSpec& noise = {}, double timestamp = 0) {
  return sense(w, pose, kTwoPi, range, noise, timestamp);
}

struct FollowConfig {
  double speed = 1.0;
  double obs_interval = 0.5;
  double obs_fov = kPi / 2;
  double range = 5.0;
  NoiseSpec noise;
  double start_time = 0;
  double max_travel = std::numeric_limits<double>::infinity();
};

struct FollowResult {
  Pose final_pose;
  double traveled = 0;
  double elapsed = 0;
  std::vector<Observation> observations;
  bool blocked = false;
};

// Walks the waypoints, sensing forward every obs_interval meters. Stops at
// the first colliding sample (progress kept) or once max_travel is consumed,
// always completing the segment in flight.
inline FollowResult follow_path(const World& w, const std::vector<Pose>& path,
                                const FollowConfig& cfg = {}) {
  FollowResult res;
  if (path.empty()) return res;
  res.final_pose = path.front();
  double next_obs = cfg.obs_interval;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    Vec2 a = path[i].position, b = path[i + 1].position;
    double len = (b - a).norm();
    if (len < 1e-12) continue;
    double seg_yaw = std::atan2(b.y - a.y, b.x - a.x);
    int samples = std::max(1, static_cast<int>(std::ceil(len / 0.05)));
    double reached = len;
    for (int s = 1; s <= samples; ++s) {
      double d = len * s / samples;
      Vec2 p = a + (b - a) * (d / len);
      if (!w.point_free(p)) {
        // Back off a little rather than parking flush against the surface;
        // a robot pressed into a corner has no clean departure line left.
        reached = std::max(0.0, len * (s - 1) / samples - 0.10);
        res.blocked = true;
        break;
      }
    }
    while (next_obs <= res.traveled + reached + 1e-12) {
      double d = next_obs - res.traveled;
      Vec2 p = a + (b - a) * (d / len);
      // Collision sampling runs at 0.05 m; a corner can still clip the line
      // between two clean samples, and the sensor cannot fire from inside it.
      if (w.point_free(p))
        res.observations.push_back(sense(w, Pose{p, seg_yaw}, cfg.obs_fov, cfg.range, cfg.noise,
                                         cfg.start_time + next_obs / cfg.speed));
      next_obs += cfg.obs_interval;
    }
    res.traveled += reached;
    res.final_pose = Pose{a + (b - a) * (len > 0 ? reached / len : 0), seg_yaw};
    if (res.blocked) break;
    if (res.traveled >= cfg.max_travel) break;
  }
  res.elapsed = res.traveled / cfg.speed;
  return res;
}

}  // namespace sgexp
