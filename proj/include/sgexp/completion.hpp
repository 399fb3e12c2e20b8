#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sgexp/catalog.hpp"
#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"
#include "sgexp/scene_graph.hpp"

// Completion: proposing what the unobserved part of a scene could contain.
// A sampler takes the current graph and returns full graphs that keep every
// observed node untouched and add Predicted content; the consistency check
// rejects proposals that contradict gathered evidence; perturb jitters the
// hypothesized content to express placement uncertainty.

namespace sgexp {

enum class ViolationKind { NothingOverlap, OutsideRooms, RoomOverlap, DoorlessRoom };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::NothingOverlap: return "NothingOverlap";
    case ViolationKind::OutsideRooms: return "OutsideRooms";
    case ViolationKind::RoomOverlap: return "RoomOverlap";
    default: return "DoorlessRoom";
  }
}

struct Violation {
  ViolationKind kind;
  NodeId node = kNoNode;
  std::string detail;
};

namespace detail {

// Strict-overlap test between a yaw-oriented box and an axis box: separating
// axis in the plane plus a z-interval check. Touching faces do not count.
inline bool obb_aabb_overlap(const ObbXY& obb, const Aabb3& box) {
  if (obb.z_hi() <= box.lo.z + 1e-9 || obb.z_lo() >= box.hi.z - 1e-9) return false;
  const Polygon a = to_polygon(obb.footprint());
  const Polygon b = rect_polygon({{box.lo.x, box.lo.y}, {box.hi.x, box.hi.y}});
  return convex_overlap_area(a, b) > 1e-9;
}

inline Aabb2 explored_extent(const SceneGraph& g) {
  Aabb2 b;
  for (const auto& [id, r] : g.rooms)
    for (const auto& p : r.footprint) b.expand(p);
  for (const auto& [id, o] : g.objects)
    for (const auto& p : o.box().footprint()) b.expand(p);
  for (const auto& [id, n] : g.nothings) {
    b.expand(n.box.lo.xy());
    b.expand(n.box.hi.xy());
  }
  for (const auto& [id, s] : g.structures)
    for (const auto& p : s.box.footprint()) b.expand(p);
  return b;
}

}  // namespace detail

// How close a predicted room must come to a door to count as reachable
// through it, and how deep inside the explored extent a room may sit before
// "at the edge of the map" stops being an excuse for having no door.
inline constexpr double kDoorReach = 0.75;
inline constexpr double kBoundaryMargin = 0.25;

// Evidence screen for completions. Everything Observed is taken as ground;
// Predicted content must not contradict it: no objects in confirmed-empty
// boxes, no floating objects outside every room, no rooms on top of mapped
// rooms, and every interior room proposal must be justified by a door.
inline std::vector<Violation> consistency_check(const SceneGraph& current,
                                                const SceneGraph& completed) {
  std::vector<Violation> out;

  for (const auto& [id, o] : completed.objects) {
    if (o.provenance != Provenance::Predicted) continue;
    const ObbXY box = o.box();
    for (const auto& [nid, n] : completed.nothings) {
      if (detail::obb_aabb_overlap(box, n.box)) {
        out.push_back({ViolationKind::NothingOverlap, id,
                       "object " + std::to_string(id) + " inside free-space box " +
                           std::to_string(nid)});
        break;
      }
    }
    bool housed = false;
    for (const auto& [rid, r] : completed.rooms) {
      if (!r.footprint.empty() && point_in_polygon(o.center.xy(), r.footprint)) {
        housed = true;
        break;
      }
    }
    if (!housed)
      out.push_back({ViolationKind::OutsideRooms, id,
                     "object " + std::to_string(id) + " outside every room footprint"});
  }

  const Aabb2 explored = detail::explored_extent(current);
  for (const auto& [id, r] : completed.rooms) {
    if (r.provenance != Provenance::Predicted || r.footprint.empty()) continue;

    const double area = std::abs(polygon_area(r.footprint));
    for (const auto& [oid, other] : completed.rooms) {
      if (other.provenance != Provenance::Observed || other.footprint.empty()) continue;
      // Grid-resolution footprints overhang walls by a cell or so; only
      // overlap well beyond that slack contradicts the map.
      const double smaller = std::min(area, std::abs(polygon_area(other.footprint)));
      const double ov = convex_overlap_area(r.footprint, other.footprint);
      if (ov > 0.1 && ov > 0.05 * smaller) {
        out.push_back({ViolationKind::RoomOverlap, id,
                       "room " + std::to_string(id) + " overlaps observed room " +
                           std::to_string(oid)});
        break;
      }
    }

    bool doored = false;
    for (const auto& [sid, s] : completed.structures) {
      if (s.kind != StructureKind::Door) continue;
      if (dist_point_polygon(s.box.center.xy(), r.footprint) <= kDoorReach) {
        doored = true;
        break;
      }
    }
    if (!doored && !explored.empty()) {
      // At the rim of what has been mapped, a room may exist without any
      // observed door; fully interior proposals may not.
      const Aabb2 fp = polygon_aabb(r.footprint);
      const Aabb2 interior = explored.padded(-kBoundaryMargin);
      doored = !(fp.lo.x >= interior.lo.x && fp.lo.y >= interior.lo.y &&
                 fp.hi.x <= interior.hi.x && fp.hi.y <= interior.hi.y);
    }
    if (!doored)
      out.push_back({ViolationKind::DoorlessRoom, id,
                     "room " + std::to_string(id) + " has no door and is not at the map edge"});
  }
  return out;
}

inline bool is_consistent(const SceneGraph& current, const SceneGraph& completed) {
  return consistency_check(current, completed).empty();
}

// Catalog-driven completion prior. Works from the graph alone: a door is
// "open" when one of its sides lies in no room footprint, which is exactly
// where mapping has not yet carved a room. Behind every open door it proposes
// a room whose kind follows the catalog adjacency weights and fills it with
// that kind's furniture, avoiding confirmed-empty boxes.
struct PriorSampler {
  Catalog catalog = default_catalog();
  int footprint_tries = 20;
  int object_tries = 30;
  double room_clearance = 0.15;   // gap between door center and room edge
  double min_room_depth = 1.2;    // smallest room the fitter may shrink to

  struct OpenDoor {
    NodeId id = kNoNode;
    Vec2 center;
    Vec2 normal;  // unit, pointing into the unexplored side
    double yaw = 0;                       // of the gap direction
    std::string adjacent_label;  // room on the explored side, "" when none
  };

  std::vector<OpenDoor> open_doors(const SceneGraph& g) const {
    std::vector<OpenDoor> out;
    auto in_some_room = [&](const Vec2& p) {
      for (const auto& [id, r] : g.rooms)
        if (!r.footprint.empty() && point_in_polygon(p, r.footprint)) return &r;
      return static_cast<const RoomNode*>(nullptr);
    };
    for (const auto& [id, s] : g.structures) {
      if (s.kind != StructureKind::Door) continue;
      // Probe both sides along the door plane normal; a side no room claims
      // has not been mapped yet. The normal is projected to the plan view.
      Vec2 n = s.plane_normal.xy();
      if (n.norm() < 1e-9) n = {-std::sin(s.box.yaw), std::cos(s.box.yaw)};
      n = n * (1.0 / n.norm());
      const double c_ = std::cos(s.box.yaw), s_ = std::sin(s.box.yaw);
      const double across = std::abs(n.dot({c_, s_})) * s.box.half.x +
                            std::abs(n.dot({-s_, c_})) * s.box.half.y;
      const double probe = across + 0.6;
      const Vec2 c = s.box.center.xy();
      const RoomNode* plus = in_some_room(c + n * probe);
      const RoomNode* minus = in_some_room(c - n * probe);
      if (plus && minus) continue;  // both sides mapped, nothing to propose
      OpenDoor d;
      d.id = id;
      d.center = c;
      d.normal = plus ? n * -1.0 : n;
      d.yaw = std::atan2(-d.normal.x, d.normal.y);
      d.adjacent_label = plus ? plus->label : (minus ? minus->label : "");
      out.push_back(d);
    }
    return out;
  }

  std::vector<SceneGraph> sample(const SceneGraph& current, int m, uint64_t seed) const {
    if (m <= 0) throw Error(Errc::ConfigError, "sample count must be positive");
    const auto doors = open_doors(current);
    std::vector<SceneGraph> out;
    out.reserve(static_cast<size_t>(m));
    if (doors.empty()) {
      // Fully observed as far as the graph can tell: the only completion is
      // the scene itself.
      out.assign(static_cast<size_t>(m), current);
      return out;
    }

    std::vector<std::string> labels;
    for (const auto& [label, profile] : catalog.rooms) labels.push_back(label);

    for (int i = 0; i < m; ++i) {
      Rng rng(derive_seed(seed, 0x900du, static_cast<uint64_t>(i)));
      SceneGraph g = current;
      for (const auto& door : doors) {
        std::vector<double> weights;
        for (const auto& label : labels)
          weights.push_back(catalog.rooms.at(label).weight *
                            catalog.adjacency_weight(door.adjacent_label, label));
        const auto& profile = catalog.rooms.at(labels[rng.weighted(weights)]);

        NodeId rid = kNoNode;
        ObbXY room_box;
        const Vec2 tang{std::cos(door.yaw), std::sin(door.yaw)};
        auto box_at = [&](double w, double depth, double slide, double clear) {
          const Vec2 c = door.center + door.normal * (clear + depth / 2) + tang * slide;
          return ObbXY{{c.x, c.y, 1.25}, {w / 2, depth / 2, 1.25}, door.yaw};
        };
        auto blocked = [&](const ObbXY& bx) {
          const double area = 4 * bx.half.x * bx.half.y;
          const Polygon fp = to_polygon(bx.footprint());
          for (const auto& [oid, other] : g.rooms) {
            if (other.footprint.empty()) continue;
            const double smaller =
                std::min(area, std::abs(polygon_area(other.footprint)));
            const double ov = convex_overlap_area(fp, other.footprint);
            if (ov > 0.1 && ov > 0.05 * smaller) return true;
          }
          return false;
        };
        for (int t = 0; t < footprint_tries && rid == kNoNode; ++t) {
          const double w = rng.uniform(profile.size_min.x, profile.size_max.x);
          double d = rng.uniform(profile.size_min.y, profile.size_max.y);
          const double slide = rng.uniform(-0.25, 0.25) * w;
          // Mapped footprints overhang their walls by up to the grid cell and
          // sealing slack, so back the proposal away from the door until the
          // smallest viable room clears them, then grow it back as far as the
          // drawn depth allows. Past the door-adjacency reach we give up.
          double clear = room_clearance;
          while (clear < kDoorReach - 1e-9 &&
                 blocked(box_at(w, min_room_depth, slide, clear)))
            clear += 0.2;
          if (blocked(box_at(w, min_room_depth, slide, clear))) continue;
          if (blocked(box_at(w, d, slide, clear))) {
            double lo = min_room_depth, hi = d;
            for (int it = 0; it < 12; ++it) {
              const double mid = (lo + hi) / 2;
              (blocked(box_at(w, mid, slide, clear)) ? hi : lo) = mid;
            }
            d = lo;
          }
          room_box = box_at(w, d, slide, clear);
          RoomNode room;
          room.label = profile.label;
          room.centroid = room_box.center.xy();
          room.footprint = to_polygon(room_box.footprint());
          room.provenance = Provenance::Predicted;
          auto counts = profile.expected_counts();
          double total = 0;
          for (const auto& [k, v] : counts) total += v;
          if (total > 0)
            for (const auto& [k, v] : counts) room.feature[k] = v / total;
          rid = g.upsert(room);
        }
        if (rid == kNoNode) continue;  // door stays unexplained this sample

        for (const auto& spec : profile.furniture) {
          const int count = rng.uniform_int(spec.count_min, spec.count_max);
          for (int k = 0; k < count; ++k) {
            ObjectNode obj;
            obj.label = spec.label;
            obj.half_extents = {
                rng.uniform(spec.half_mean.x - spec.half_spread.x,
                            spec.half_mean.x + spec.half_spread.x),
                rng.uniform(spec.half_mean.y - spec.half_spread.y,
                            spec.half_mean.y + spec.half_spread.y),
                rng.uniform(spec.half_mean.z - spec.half_spread.z,
                            spec.half_mean.z + spec.half_spread.z)};
            obj.yaw = wrap_angle(door.yaw + rng.uniform(0, kPi / 2));
            obj.provenance = Provenance::Predicted;
            const double radius =
                std::hypot(obj.half_extents.x, obj.half_extents.y);
            const double mu = std::max(room_box.half.x - radius, 0.0);
            const double mv = std::max(room_box.half.y - radius, 0.0);
            const Vec2 tang{std::cos(door.yaw), std::sin(door.yaw)};
            const Vec2 norm{-std::sin(door.yaw), std::cos(door.yaw)};
            bool placed = false;
            for (int t = 0; t < object_tries && !placed; ++t) {
              const double u = rng.uniform(-mu, mu);
              const double v = rng.uniform(-mv, mv);
              const Vec2 c = room_box.center.xy() + tang * u + norm * v;
              obj.center = {c.x, c.y, obj.half_extents.z};
              placed = true;
              for (const auto& [nid, n] : g.nothings)
                if (detail::obb_aabb_overlap(obj.box(), n.box)) {
                  placed = false;
                  break;
                }
            }
            if (!placed) continue;
            obj.parent_room = rid;
            g.upsert(obj);
          }
        }
      }
      out.push_back(std::move(g));
    }
    return out;
  }
};

struct PerturbConfig {
  double object_extent_fraction = 0.25;  // of the parent room's footprint size
  double room_shift = 0.5;               // meters, per axis
  int tries = 50;
  bool perturb_observed = false;  // jitter mapped nodes too, not just proposals
};

// Jitters hypothesized content to express placement uncertainty: rooms slide
// a little, objects move within their room while respecting free-space
// evidence. Node counts never change; on exhausted retries an object simply
// keeps its place relative to its room.
inline SceneGraph perturb(const SceneGraph& g, uint64_t seed, const PerturbConfig& cfg = {}) {
  SceneGraph out = g;
  Rng rng(derive_seed(seed, 0x9e27u));

  std::map<NodeId, Vec2> room_shift;
  for (auto& [id, r] : out.rooms) {
    if (r.provenance != Provenance::Predicted && !cfg.perturb_observed) continue;
    const Vec2 d{rng.uniform(-cfg.room_shift, cfg.room_shift),
                 rng.uniform(-cfg.room_shift, cfg.room_shift)};
    r.centroid = r.centroid + d;
    r.footprint = translated(r.footprint, d);
    room_shift[id] = d;
  }

  for (auto& [id, o] : out.objects) {
    const bool eligible = o.provenance == Provenance::Predicted || cfg.perturb_observed;
    if (!eligible) continue;
    // Ride along with a displaced parent first so the relative layout (and
    // with it graph validity) survives even when every retry below fails.
    auto sit = room_shift.find(o.parent_room);
    if (sit != room_shift.end()) {
      o.center.x += sit->second.x;
      o.center.y += sit->second.y;
    }
    auto rit = out.rooms.find(o.parent_room);
    if (rit == out.rooms.end() || rit->second.footprint.empty()) continue;
    const Polygon& fp = rit->second.footprint;
    const Aabb2 bounds = polygon_aabb(fp);
    const double rx = cfg.object_extent_fraction * bounds.width();
    const double ry = cfg.object_extent_fraction * bounds.height();
    for (int t = 0; t < cfg.tries; ++t) {
      const Vec2 c = o.center.xy() + Vec2{rng.uniform(-rx, rx), rng.uniform(-ry, ry)};
      if (!point_in_polygon(c, fp)) continue;
      const ObbXY box{{c.x, c.y, o.center.z}, o.half_extents, o.yaw};
      bool clear = true;
      for (const auto& [nid, n] : out.nothings)
        if (detail::obb_aabb_overlap(box, n.box)) {
          clear = false;
          break;
        }
      if (!clear) continue;
      o.center.x = c.x;
      o.center.y = c.y;
      break;
    }
  }
  out.revision = g.revision;
  return out;
}

}  // namespace sgexp
