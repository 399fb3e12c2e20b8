// Text round trips: serialize then parse must reproduce the graph node for
// node, and re-serializing the parse must reproduce the text byte for byte.
#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "sgexp/core.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/scene_io.hpp"

using namespace sgexp;

namespace {

SceneGraph build_sample() {
  SceneGraph g;
  RoomNode kitchen;
  kitchen.label = "kitchen";
  kitchen.centroid = {1.5, 2.25};
  kitchen.footprint = {{0, 0}, {3, 0}, {3, 4.5}, {0, 4.5}};
  kitchen.feature = {{"fridge", 0.25}, {"table", 0.75}};
  const NodeId rk = g.upsert(kitchen);

  RoomNode guess;
  guess.label = "bedroom";
  guess.centroid = {7.125, 2};
  guess.footprint = {{5, 0}, {9.25, 0}, {9.25, 4}, {5, 4}};
  guess.provenance = Provenance::Predicted;
  g.upsert(guess);

  ObjectNode fridge;
  fridge.label = "fridge";
  fridge.center = {0.4, 3.9, 0.9};
  fridge.half_extents = {0.35, 0.4, 0.9};
  fridge.yaw = 0.125;
  fridge.parent_room = rk;
  g.upsert(fridge);

  NothingNode nn;
  nn.box = {{0.5, 0.5, 0}, {2.5, 1.6, 1.2}};
  nn.parent_room = rk;
  g.upsert(nn);

  StructureNode wall;
  wall.kind = StructureKind::Wall;
  wall.plane_normal = {0, 1, 0};
  wall.plane_offset = 4.5;
  wall.box = {{1.5, 4.5, 1.25}, {1.6, 0.06, 1.25}, 0};
  wall.observation_count = 3;
  g.upsert(wall);

  StructureNode door;
  door.kind = StructureKind::Door;
  door.plane_normal = {1, 0, 0};
  door.plane_offset = 3.0;
  door.box = {{3.0, 2.0, 1.05}, {0.08, 0.45, 1.05}, 0};
  door.observation_count = 0;
  g.upsert(door);
  return g;
}

}  // namespace

TEST_CASE("serialize and parse compose to the identity") {
  const SceneGraph g = build_sample();
  const std::string text = serialize_yaml(g);
  const SceneGraph back = deserialize_yaml(text);

  REQUIRE(back.rooms.size() == g.rooms.size());
  REQUIRE(back.objects.size() == g.objects.size());
  REQUIRE(back.nothings.size() == g.nothings.size());
  REQUIRE(back.structures.size() == g.structures.size());

  for (const auto& [id, r] : g.rooms) {
    const RoomNode& b = back.rooms.at(id);
    REQUIRE(b.label == r.label);
    REQUIRE(b.centroid.x == r.centroid.x);
    REQUIRE(b.centroid.y == r.centroid.y);
    REQUIRE(b.footprint.size() == r.footprint.size());
    REQUIRE(b.feature == r.feature);
    REQUIRE(b.provenance == r.provenance);
  }
  for (const auto& [id, o] : g.objects) {
    const ObjectNode& b = back.objects.at(id);
    REQUIRE(b.label == o.label);
    REQUIRE(b.center.x == o.center.x);
    REQUIRE(b.center.z == o.center.z);
    REQUIRE(b.half_extents.y == o.half_extents.y);
    REQUIRE(b.yaw == o.yaw);
    REQUIRE(b.parent_room == o.parent_room);
  }
  for (const auto& [id, s] : g.structures) {
    const StructureNode& b = back.structures.at(id);
    REQUIRE(b.kind == s.kind);
    REQUIRE(b.plane_offset == s.plane_offset);
    REQUIRE(b.observation_count == s.observation_count);
  }

  // Byte-exact second pass: parsing loses nothing the writer needs.
  REQUIRE(serialize_yaml(back) == text);
}

TEST_CASE("empty graph serializes to empty sections") {
  const SceneGraph g;
  const std::string text = serialize_yaml(g);
  REQUIRE(text.find("rooms: []") != std::string::npos);
  REQUIRE(text.find("structures: []") != std::string::npos);
  const SceneGraph back = deserialize_yaml(text);
  REQUIRE(back.node_count() == 0);
  REQUIRE(serialize_yaml(back) == text);
}

TEST_CASE("labels with spaces and quotes survive the trip") {
  SceneGraph g;
  RoomNode r;
  r.label = "guest \"suite\" #2, west";
  r.centroid = {0, 0};
  r.footprint = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  g.upsert(r);
  const SceneGraph back = deserialize_yaml(serialize_yaml(g));
  REQUIRE(back.rooms.begin()->second.label == "guest \"suite\" #2, west");
}

TEST_CASE("parse failures carry the parse error code") {
  auto code_of = [](const std::string& text) {
    try {
      deserialize_yaml(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::ConfigError;  // sentinel for "did not throw"
  };
  REQUIRE(code_of("rooms: [17]") == Errc::ParseError);
  REQUIRE(code_of(": : :") == Errc::ParseError);
  // Malformed vector shape.
  REQUIRE(code_of("rooms:\n  - id: 0\n    label: a\n    centroid: [1]\n") == Errc::ParseError);
  // Content that breaks graph invariants is rejected at load time too.
  REQUIRE(code_of("objects:\n  - id: 0\n    label: chair\n    center: [0, 0, 0]\n"
                  "    half_extents: [0, 0.1, 0.1]\n    yaw: 0\n") == Errc::InvariantViolation);
}

TEST_CASE("float formatting is shortest-round-trip stable") {
  SceneGraph g;
  ObjectNode o;
  o.label = "probe";
  // Values chosen to exercise non-terminating binary fractions.
  o.center = {0.1, 1.0 / 3.0, 2.675};
  o.half_extents = {0.05, 0.07, 0.11};
  g.upsert(o);
  const std::string once = serialize_yaml(g);
  const std::string twice = serialize_yaml(deserialize_yaml(once));
  REQUIRE(once == twice);
  const SceneGraph back = deserialize_yaml(once);
  REQUIRE(back.objects.begin()->second.center.y == 1.0 / 3.0);
}
