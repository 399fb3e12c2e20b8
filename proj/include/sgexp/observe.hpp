#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/world.hpp"

// Deterministic rendering of what a camera at a pose would register from a
// scene graph, plus the id-free canonical form used to compare observations
// across graphs whose node numbering differs.

namespace sgexp {

enum class Layer { Object, Nothing, Structure };

inline const char* to_string(Layer l) {
  switch (l) {
    case Layer::Object: return "object";
    case Layer::Nothing: return "nothing";
    default: return "structure";
  }
}

struct VisibleNode {
  Layer layer = Layer::Object;
  std::string label;
  NodeId id = kNoNode;
};

struct RenderedObservation {
  std::vector<VisibleNode> visible;
  std::set<std::string> room_labels;  // labels of parents of visible nodes
  std::string dominant_room;          // empty when no visible object has a room
};

namespace detail {

inline Polygon aabb3_footprint(const Aabb3& b) {
  return rect_polygon({{b.lo.x, b.lo.y}, {b.hi.x, b.hi.y}});
}

// Line of sight from the sensor to a target point. Walls block; doors and
// windows are see-through openings. `skip` exempts the target node itself so
// a wall does not shadow its own centroid.
inline bool sight_clear(const SceneGraph& g, const Vec3& eye, const Vec3& target, NodeId skip) {
  for (const auto& [id, s] : g.structures) {
    if (s.kind != StructureKind::Wall || id == skip) continue;
    if (segment_intersects_obb(eye, target, s.box)) return false;
  }
  return true;
}

}  // namespace detail

// Visibility rule: the node's footprint must reach into the sensing wedge
// (disc when fov covers the full circle) and the straight segment from the
// sensor to the node centroid must clear every wall. Only walls occlude.
inline RenderedObservation render_observation(const SceneGraph& g, const Pose& pose, double fov,
                                              double range) {
  RenderedObservation out;
  const Vec2 origin = pose.position;
  const Vec3 eye{origin.x, origin.y, kSensorZ};

  auto in_wedge = [&](const Polygon& fp) {
    return polygon_in_wedge(fp, origin, pose.yaw, fov, range);
  };

  // Objects first; they also drive the dominant-room vote.
  std::map<NodeId, int> room_votes;
  for (const auto& [id, o] : g.objects) {
    if (!in_wedge(to_polygon(o.box().footprint()))) continue;
    if (!detail::sight_clear(g, eye, o.center, id)) continue;
    out.visible.push_back({Layer::Object, o.label, id});
    if (o.parent_room != kNoNode) {
      auto rit = g.rooms.find(o.parent_room);
      if (rit != g.rooms.end()) {
        out.room_labels.insert(rit->second.label);
        ++room_votes[o.parent_room];
      }
    }
  }

  for (const auto& [id, n] : g.nothings) {
    if (!in_wedge(detail::aabb3_footprint(n.box))) continue;
    if (!detail::sight_clear(g, eye, n.box.center(), id)) continue;
    out.visible.push_back({Layer::Nothing, "nothing", id});
    if (n.parent_room != kNoNode) {
      auto rit = g.rooms.find(n.parent_room);
      if (rit != g.rooms.end()) out.room_labels.insert(rit->second.label);
    }
  }

  for (const auto& [id, s] : g.structures) {
    if (!in_wedge(to_polygon(s.box.footprint()))) continue;
    if (!detail::sight_clear(g, eye, s.box.center, id)) continue;
    out.visible.push_back({Layer::Structure, to_string(s.kind), id});
  }

  // Dominant room: the one whose objects dominate the view. Equal counts fall
  // to the lexicographically smallest label.
  int best_votes = 0;
  for (const auto& [room, votes] : room_votes) {
    const std::string& label = g.rooms.at(room).label;
    if (votes > best_votes || (votes == best_votes && !out.dominant_room.empty() &&
                               label < out.dominant_room)) {
      best_votes = votes;
      out.dominant_room = label;
    }
  }
  return out;
}

// Order-free, id-free summary: what kinds of things are in view and which
// room dominates. Two graphs that disagree only in node numbering or exact
// positions canonicalize identically.
struct CanonicalObservation {
  std::map<std::pair<Layer, std::string>, int> tokens;
  std::string dominant_room = "none";

  friend bool operator==(const CanonicalObservation& a, const CanonicalObservation& b) {
    return a.dominant_room == b.dominant_room && a.tokens == b.tokens;
  }
  friend bool operator<(const CanonicalObservation& a, const CanonicalObservation& b) {
    if (a.dominant_room != b.dominant_room) return a.dominant_room < b.dominant_room;
    return a.tokens < b.tokens;
  }
};

inline CanonicalObservation canonicalize(const RenderedObservation& obs) {
  CanonicalObservation c;
  for (const auto& v : obs.visible) ++c.tokens[{v.layer, v.label}];
  if (!obs.dominant_room.empty()) c.dominant_room = obs.dominant_room;
  return c;
}

// Position-aware variant for sensitivity studies: labels gain the node's
// centroid snapped to a `quantum`-sized lattice, so displacements larger than
// the quantum count as different observations.
inline CanonicalObservation canonicalize_quantized(const SceneGraph& g,
                                                   const RenderedObservation& obs,
                                                   double quantum) {
  if (!(quantum > 0)) return canonicalize(obs);
  CanonicalObservation c;
  auto cell_tag = [&](const Vec3& p) {
    auto q = [&](double v) { return std::to_string(static_cast<long long>(std::floor(v / quantum))); };
    return "@" + q(p.x) + "," + q(p.y) + "," + q(p.z);
  };
  for (const auto& v : obs.visible) {
    Vec3 center{0, 0, 0};
    switch (v.layer) {
      case Layer::Object: center = g.objects.at(v.id).center; break;
      case Layer::Nothing: center = g.nothings.at(v.id).box.center(); break;
      case Layer::Structure: center = g.structures.at(v.id).box.center; break;
    }
    ++c.tokens[{v.layer, v.label + cell_tag(center)}];
  }
  if (!obs.dominant_room.empty()) c.dominant_room = obs.dominant_room;
  return c;
}

}  // namespace sgexp
