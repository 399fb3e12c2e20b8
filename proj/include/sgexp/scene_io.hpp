#pragma once

#include <yaml-cpp/yaml.h>

#include <sstream>
#include <string>

#include "sgexp/scene_graph.hpp"

namespace sgexp {

namespace detail {

inline std::string yaml_str(const std::string& s) {
  bool plain = !s.empty();
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      plain = false;
  if (plain && !std::isdigit(static_cast<unsigned char>(s[0]))) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string vec2_str(const Vec2& v) {
  return "[" + format_double(v.x) + ", " + format_double(v.y) + "]";
}
inline std::string vec3_str(const Vec3& v) {
  return "[" + format_double(v.x) + ", " + format_double(v.y) + ", " + format_double(v.z) + "]";
}

inline Vec2 node_vec2(const YAML::Node& n) {
  if (!n.IsSequence() || n.size() != 2) throw Error(Errc::ParseError, "expected [x, y]");
  return {n[0].as<double>(), n[1].as<double>()};
}
inline Vec3 node_vec3(const YAML::Node& n) {
  if (!n.IsSequence() || n.size() != 3) throw Error(Errc::ParseError, "expected [x, y, z]");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

inline ObbXY node_obb(const YAML::Node& n) {
  if (!n.IsMap()) throw Error(Errc::ParseError, "expected box map");
  ObbXY b;
  b.center = node_vec3(n["center"]);
  b.half = node_vec3(n["half_extents"]);
  b.yaw = n["yaw"].as<double>();
  return b;
}

inline std::string obb_str(const ObbXY& b) {
  return "{center: " + vec3_str(b.center) + ", half_extents: " + vec3_str(b.half) +
         ", yaw: " + format_double(b.yaw) + "}";
}

}  // namespace detail

// Deterministic text form of a graph: fixed key order, nodes sorted by id,
// shortest round-trip float formatting. serialize/deserialize compose to the
// identity in both directions.
inline std::string serialize_yaml(const SceneGraph& g) {
  using namespace detail;
  std::ostringstream out;

  out << "rooms:";
  if (g.rooms.empty()) out << " []";
  out << "\n";
  for (const auto& [id, r] : g.rooms) {
    out << "  - id: " << id << "\n";
    out << "    label: " << yaml_str(r.label) << "\n";
    out << "    centroid: " << vec2_str(r.centroid) << "\n";
    out << "    footprint: [";
    for (size_t i = 0; i < r.footprint.size(); ++i)
      out << (i ? ", " : "") << vec2_str(r.footprint[i]);
    out << "]\n";
    out << "    feature: {";
    bool first = true;
    for (const auto& [label, w] : r.feature) {
      out << (first ? "" : ", ") << yaml_str(label) << ": " << format_double(w);
      first = false;
    }
    out << "}\n";
    out << "    provenance: " << to_string(r.provenance) << "\n";
  }

  out << "objects:";
  if (g.objects.empty()) out << " []";
  out << "\n";
  for (const auto& [id, o] : g.objects) {
    out << "  - id: " << id << "\n";
    out << "    label: " << yaml_str(o.label) << "\n";
    out << "    center: " << vec3_str(o.center) << "\n";
    out << "    half_extents: " << vec3_str(o.half_extents) << "\n";
    out << "    yaw: " << format_double(o.yaw) << "\n";
    if (o.parent_room != kNoNode) out << "    parent_room: " << o.parent_room << "\n";
    out << "    provenance: " << to_string(o.provenance) << "\n";
  }

  out << "nothings:";
  if (g.nothings.empty()) out << " []";
  out << "\n";
  for (const auto& [id, n] : g.nothings) {
    out << "  - id: " << id << "\n";
    out << "    box: {min: " << vec3_str(n.box.lo) << ", max: " << vec3_str(n.box.hi) << "}\n";
    if (n.parent_room != kNoNode) out << "    parent_room: " << n.parent_room << "\n";
  }

  out << "structures:";
  if (g.structures.empty()) out << " []";
  out << "\n";
  for (const auto& [id, s] : g.structures) {
    out << "  - id: " << id << "\n";
    out << "    kind: " << to_string(s.kind) << "\n";
    out << "    plane: {normal: " << vec3_str(s.plane_normal)
        << ", offset: " << format_double(s.plane_offset) << "}\n";
    out << "    box: " << obb_str(s.box) << "\n";
    out << "    observation_count: " << s.observation_count << "\n";
  }
  return out.str();
}

inline SceneGraph deserialize_yaml(const std::string& text) {
  using namespace detail;
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ParseError, std::string("yaml: ") + e.what());
  }
  if (!doc.IsMap()) throw Error(Errc::ParseError, "document is not a map");
  for (const char* key : {"rooms", "objects", "nothings", "structures"}) {
    if (!doc[key] || !(doc[key].IsSequence() || doc[key].IsNull()))
      throw Error(Errc::ParseError, std::string("missing or invalid key: ") + key);
  }

  SceneGraph g;
  try {
    for (const auto& n : doc["rooms"]) {
      RoomNode r;
      r.id = n["id"].as<NodeId>();
      r.label = n["label"].as<std::string>();
      r.centroid = node_vec2(n["centroid"]);
      for (const auto& p : n["footprint"]) r.footprint.push_back(node_vec2(p));
      if (n["feature"] && !n["feature"].IsNull())
        for (const auto& kv : n["feature"])
          r.feature[kv.first.as<std::string>()] = kv.second.as<double>();
      const auto prov = n["provenance"].as<std::string>();
      if (prov == "observed")
        r.provenance = Provenance::Observed;
      else if (prov == "predicted")
        r.provenance = Provenance::Predicted;
      else
        throw Error(Errc::ParseError, "unknown provenance: " + prov);
      g.upsert(std::move(r));
    }
    for (const auto& n : doc["objects"]) {
      ObjectNode o;
      o.id = n["id"].as<NodeId>();
      o.label = n["label"].as<std::string>();
      o.center = node_vec3(n["center"]);
      o.half_extents = node_vec3(n["half_extents"]);
      o.yaw = n["yaw"].as<double>();
      if (n["parent_room"]) o.parent_room = n["parent_room"].as<NodeId>();
      const auto prov = n["provenance"].as<std::string>();
      if (prov == "observed")
        o.provenance = Provenance::Observed;
      else if (prov == "predicted")
        o.provenance = Provenance::Predicted;
      else
        throw Error(Errc::ParseError, "unknown provenance: " + prov);
      if (o.parent_room != kNoNode && !g.rooms.count(o.parent_room))
        throw Error(Errc::InvariantViolation,
                    "object parent_room " + std::to_string(o.parent_room) + " missing");
      g.upsert(std::move(o));
    }
    for (const auto& n : doc["nothings"]) {
      NothingNode nn;
      nn.id = n["id"].as<NodeId>();
      if (!n["box"] || !n["box"]["min"] || !n["box"]["max"])
        throw Error(Errc::ParseError, "nothing box needs min/max");
      nn.box.lo = node_vec3(n["box"]["min"]);
      nn.box.hi = node_vec3(n["box"]["max"]);
      if (n["parent_room"]) nn.parent_room = n["parent_room"].as<NodeId>();
      if (nn.parent_room != kNoNode && !g.rooms.count(nn.parent_room))
        throw Error(Errc::InvariantViolation,
                    "nothing parent_room " + std::to_string(nn.parent_room) + " missing");
      g.upsert(std::move(nn));
    }
    for (const auto& n : doc["structures"]) {
      StructureNode s;
      s.id = n["id"].as<NodeId>();
      const auto kind = n["kind"].as<std::string>();
      if (kind == "wall")
        s.kind = StructureKind::Wall;
      else if (kind == "door")
        s.kind = StructureKind::Door;
      else if (kind == "window")
        s.kind = StructureKind::Window;
      else
        throw Error(Errc::ParseError, "unknown structure kind: " + kind);
      if (!n["plane"]) throw Error(Errc::ParseError, "structure needs plane");
      s.plane_normal = node_vec3(n["plane"]["normal"]);
      s.plane_offset = n["plane"]["offset"].as<double>();
      s.box = node_obb(n["box"]);
      s.observation_count = n["observation_count"].as<int>();
      g.upsert(std::move(s));
    }
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ParseError, std::string("yaml: ") + e.what());
  }
  g.validate();
  return g;
}

}  // namespace sgexp
