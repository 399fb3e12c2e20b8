#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"

namespace sgexp {

using NodeId = int64_t;
inline constexpr NodeId kNoNode = -1;

enum class Provenance { Observed, Predicted };
enum class StructureKind { Wall, Door, Window };

inline const char* to_string(Provenance p) {
  return p == Provenance::Observed ? "observed" : "predicted";
}
inline const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Wall: return "wall";
    case StructureKind::Door: return "door";
    default: return "window";
  }
}

struct ObjectNode {
  NodeId id = kNoNode;
  std::string label;
  Vec3 center;
  Vec3 half_extents{0.1, 0.1, 0.1};
  double yaw = 0;
  NodeId parent_room = kNoNode;
  Provenance provenance = Provenance::Observed;

  ObbXY box() const { return {center, half_extents, yaw}; }
};

struct RoomNode {
  NodeId id = kNoNode;
  std::string label;
  Vec2 centroid;
  Polygon footprint;
  // Normalized label histogram over the object vocabulary; empty means no
  // feature evidence yet.
  std::map<std::string, double> feature;
  Provenance provenance = Provenance::Observed;
};

struct NothingNode {
  NodeId id = kNoNode;
  Aabb3 box;
  NodeId parent_room = kNoNode;
};

struct StructureNode {
  NodeId id = kNoNode;
  StructureKind kind = StructureKind::Wall;
  Vec3 plane_normal{1, 0, 0};
  double plane_offset = 0;  // plane is {p : normal.dot(p) == offset}
  ObbXY box;
  // 0 marks a hypothesized structure (completion output); mapping inserts
  // structures only once their count reaches the confirmation threshold.
  int observation_count = 1;
};

struct GraphLimits {
  double min_nothing_volume = 1.0;      // m^3
  double max_structure_thickness = 0.4; // m
  double parent_margin = 0.25;          // footprint expansion for containment
};

// Layered scene graph: rooms, objects, free-space boxes and structural
// elements, with parent links stored on the child nodes. Mutations go through
// upsert/connect/erase and bump `revision`; reads are pure.
class SceneGraph {
 public:
  std::map<NodeId, ObjectNode> objects;
  std::map<NodeId, RoomNode> rooms;
  std::map<NodeId, NothingNode> nothings;
  std::map<NodeId, StructureNode> structures;

  int64_t revision = 0;
  GraphLimits limits;

  NodeId upsert(ObjectNode node) {
    check_object(node);
    assign_id(node.id, objects);
    const NodeId id = node.id;
    objects[id] = std::move(node);
    ++revision;
    return id;
  }

  NodeId upsert(RoomNode node) {
    check_room(node);
    assign_id(node.id, rooms);
    const NodeId id = node.id;
    rooms[id] = std::move(node);
    ++revision;
    return id;
  }

  NodeId upsert(NothingNode node) {
    check_nothing(node);
    assign_id(node.id, nothings);
    const NodeId id = node.id;
    nothings[id] = std::move(node);
    ++revision;
    return id;
  }

  NodeId upsert(StructureNode node) {
    check_structure(node);
    assign_id(node.id, structures);
    const NodeId id = node.id;
    structures[id] = std::move(node);
    ++revision;
    return id;
  }

  // Sets (or replaces) the parent room edge of an object or nothing node.
  void connect_parent(NodeId child, NodeId room) {
    if (!rooms.count(room)) {
      if (exists(room)) throw Error(Errc::KindMismatch, "parent is not a room node");
      throw Error(Errc::UnknownNode, "unknown room id " + std::to_string(room));
    }
    if (auto it = objects.find(child); it != objects.end()) {
      const Polygon& fp = rooms.at(room).footprint;
      if (!fp.empty() &&
          dist_point_polygon(it->second.center.xy(), fp) > limits.parent_margin + 1e-9)
        throw Error(Errc::InvariantViolation, "center outside parent_room footprint");
      it->second.parent_room = room;
    } else if (auto nt = nothings.find(child); nt != nothings.end()) {
      nt->second.parent_room = room;
    } else if (exists(child)) {
      throw Error(Errc::KindMismatch, "child must be an object or nothing node");
    } else {
      throw Error(Errc::UnknownNode, "unknown child id " + std::to_string(child));
    }
    ++revision;
  }

  void erase(NodeId id) {
    bool hit = objects.erase(id) || nothings.erase(id) || structures.erase(id);
    if (!hit && rooms.erase(id)) {
      hit = true;
      for (auto& [oid, o] : objects)
        if (o.parent_room == id) o.parent_room = kNoNode;
      for (auto& [nid, n] : nothings)
        if (n.parent_room == id) n.parent_room = kNoNode;
    }
    if (hit) ++revision;
  }

  bool exists(NodeId id) const {
    return objects.count(id) || rooms.count(id) || nothings.count(id) || structures.count(id);
  }

  size_t node_count() const {
    return objects.size() + rooms.size() + nothings.size() + structures.size();
  }

  // Parent edges (child, room), sorted by child id.
  std::vector<std::pair<NodeId, NodeId>> parent_edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& [id, o] : objects)
      if (o.parent_room != kNoNode) out.emplace_back(id, o.parent_room);
    for (const auto& [id, n] : nothings)
      if (n.parent_room != kNoNode) out.emplace_back(id, n.parent_room);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Full invariant sweep; throws InvariantViolation on the first failure.
  void validate() const {
    for (const auto& [id, o] : objects) {
      if (id != o.id) throw Error(Errc::InvariantViolation, "object id mismatch");
      check_object(o);
    }
    for (const auto& [id, r] : rooms) {
      if (id != r.id) throw Error(Errc::InvariantViolation, "room id mismatch");
      check_room(r);
    }
    for (const auto& [id, n] : nothings) {
      if (id != n.id) throw Error(Errc::InvariantViolation, "nothing id mismatch");
      check_nothing(n);
    }
    for (const auto& [id, s] : structures) {
      if (id != s.id) throw Error(Errc::InvariantViolation, "structure id mismatch");
      check_structure(s);
    }
  }

  bool is_valid() const {
    try {
      validate();
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  // Copy stripped of hypothesized content (Predicted rooms/objects and
  // unconfirmed structures). Parent links into removed rooms are cleared.
  SceneGraph observed_only() const {
    SceneGraph g = *this;
    std::vector<NodeId> drop;
    for (const auto& [id, r] : g.rooms)
      if (r.provenance == Provenance::Predicted) drop.push_back(id);
    for (const auto& [id, o] : g.objects)
      if (o.provenance == Provenance::Predicted) drop.push_back(id);
    for (const auto& [id, s] : g.structures)
      if (s.observation_count == 0) drop.push_back(id);
    for (NodeId id : drop) g.erase(id);
    g.revision = revision;
    return g;
  }

  NodeId peek_next_id() const { return next_id_; }

 private:
  template <typename Map>
  void assign_id(NodeId& id, const Map& own_kind) {
    if (id == kNoNode) {
      id = next_id_++;
    } else if (id < 0) {
      throw Error(Errc::InvariantViolation, "id must be non-negative");
    } else {
      if (exists(id) && !own_kind.count(id))
        throw Error(Errc::InvariantViolation, "id already used by another node kind");
      next_id_ = std::max(next_id_, id + 1);
    }
  }

  void check_object(const ObjectNode& o) const {
    if (o.label.empty()) throw Error(Errc::InvariantViolation, "object label empty");
    if (o.half_extents.x <= 0 || o.half_extents.y <= 0 || o.half_extents.z <= 0)
      throw Error(Errc::InvariantViolation, "half_extents must be positive");
    if (o.parent_room != kNoNode) {
      auto it = rooms.find(o.parent_room);
      if (it == rooms.end())
        throw Error(Errc::InvariantViolation,
                    "parent_room " + std::to_string(o.parent_room) + " missing");
      const Polygon& fp = it->second.footprint;
      if (!fp.empty() && dist_point_polygon(o.center.xy(), fp) > limits.parent_margin + 1e-9)
        throw Error(Errc::InvariantViolation, "center outside parent_room footprint");
    }
  }

  void check_room(const RoomNode& r) const {
    if (r.label.empty()) throw Error(Errc::InvariantViolation, "room label empty");
    if (!r.footprint.empty() && !polygon_is_simple(r.footprint))
      throw Error(Errc::InvariantViolation, "footprint not a simple polygon");
    double sum = 0;
    for (const auto& [k, w] : r.feature) {
      if (w < 0) throw Error(Errc::InvariantViolation, "feature weight negative");
      sum += w;
    }
    if (sum != 0 && std::abs(sum - 1.0) > 1e-6)
      throw Error(Errc::InvariantViolation, "feature must sum to 1 or be all-zero");
  }

  void check_nothing(const NothingNode& n) const {
    if (n.box.volume() < limits.min_nothing_volume - 1e-9)
      throw Error(Errc::InvariantViolation, "box volume below minimum");
    if (n.parent_room != kNoNode && !rooms.count(n.parent_room))
      throw Error(Errc::InvariantViolation, "parent_room missing");
  }

  void check_structure(const StructureNode& s) const {
    if (std::abs(s.plane_normal.norm() - 1.0) > 1e-9)
      throw Error(Errc::InvariantViolation, "plane normal must be unit length");
    const double thickness = 2.0 * std::min(s.box.half.x, s.box.half.y);
    if (thickness > limits.max_structure_thickness + 1e-9)
      throw Error(Errc::InvariantViolation, "structure box too thick");
    if (s.observation_count < 0)
      throw Error(Errc::InvariantViolation, "observation_count negative");
  }

  NodeId next_id_ = 0;
};

}  // namespace sgexp
