// Scene graph invariants: id assignment, parent containment, validation
// errors carrying the right codes, revision bookkeeping, and the
// observed-only projection.
#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "sgexp/core.hpp"
#include "sgexp/scene_graph.hpp"

using namespace sgexp;

namespace {

RoomNode make_room(const std::string& label, Vec2 at, double half = 2.0) {
  RoomNode r;
  r.label = label;
  r.centroid = at;
  r.footprint = {{at.x - half, at.y - half},
                 {at.x + half, at.y - half},
                 {at.x + half, at.y + half},
                 {at.x - half, at.y + half}};
  return r;
}

ObjectNode make_object(const std::string& label, Vec3 at) {
  ObjectNode o;
  o.label = label;
  o.center = at;
  o.half_extents = {0.3, 0.3, 0.3};
  return o;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an Error");
}

}  // namespace

TEST_CASE("upsert assigns fresh ids and bumps revision") {
  SceneGraph g;
  REQUIRE(g.revision == 0);
  const NodeId r = g.upsert(make_room("kitchen", {0, 0}));
  const NodeId o = g.upsert(make_object("chair", {0.5, 0.5, 0.3}));
  REQUIRE(r != o);
  REQUIRE(g.revision == 2);
  REQUIRE(g.node_count() == 2);
  REQUIRE(g.exists(r));
  REQUIRE(g.exists(o));

  // Re-upserting with a fixed id replaces in place.
  ObjectNode repl = make_object("table", {0.4, 0.4, 0.4});
  repl.id = o;
  g.upsert(repl);
  REQUIRE(g.objects.at(o).label == "table");
  REQUIRE(g.node_count() == 2);

  // Reusing an id across node kinds is rejected.
  RoomNode bad = make_room("bedroom", {5, 5});
  bad.id = o;
  REQUIRE(code_of([&] { g.upsert(bad); }) == Errc::InvariantViolation);
}

TEST_CASE("object validation rejects bad shapes and labels") {
  SceneGraph g;
  ObjectNode o = make_object("", {0, 0, 0});
  REQUIRE(code_of([&] { g.upsert(o); }) == Errc::InvariantViolation);
  o.label = "chair";
  o.half_extents = {0.3, -0.1, 0.3};
  REQUIRE(code_of([&] { g.upsert(o); }) == Errc::InvariantViolation);
  o.half_extents = {0.3, 0.3, 0.3};
  o.parent_room = 99;  // nonexistent parent
  REQUIRE(code_of([&] { g.upsert(o); }) == Errc::InvariantViolation);
}

TEST_CASE("room validation checks footprint and feature histogram") {
  SceneGraph g;
  RoomNode r = make_room("kitchen", {0, 0});
  r.footprint = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};  // bowtie
  REQUIRE(code_of([&] { g.upsert(r); }) == Errc::InvariantViolation);

  r = make_room("kitchen", {0, 0});
  r.feature = {{"chair", 0.5}, {"table", 0.2}};  // sums to 0.7
  REQUIRE(code_of([&] { g.upsert(r); }) == Errc::InvariantViolation);

  r.feature = {{"chair", 0.5}, {"table", 0.5}};
  REQUIRE_NOTHROW(g.upsert(r));

  // All-zero histogram means "no evidence yet" and is allowed.
  RoomNode z = make_room("hall", {10, 0});
  z.feature = {{"chair", 0.0}};
  REQUIRE_NOTHROW(g.upsert(z));
}

TEST_CASE("connect_parent enforces footprint containment with margin") {
  SceneGraph g;
  const NodeId room = g.upsert(make_room("kitchen", {0, 0}, 2.0));
  // Inside: fine.
  const NodeId in = g.upsert(make_object("chair", {1.0, 1.0, 0.3}));
  REQUIRE_NOTHROW(g.connect_parent(in, room));
  REQUIRE(g.objects.at(in).parent_room == room);

  // Just outside the footprint but within the margin: accepted.
  const NodeId near = g.upsert(make_object("lamp", {2.2, 0, 0.3}));
  REQUIRE_NOTHROW(g.connect_parent(near, room));

  // Beyond the margin: rejected.
  const NodeId far = g.upsert(make_object("sofa", {2.9, 0, 0.3}));
  REQUIRE(code_of([&] { g.connect_parent(far, room); }) == Errc::InvariantViolation);

  // Wrong-kind and unknown ids carry distinct codes.
  REQUIRE(code_of([&] { g.connect_parent(in, in); }) == Errc::KindMismatch);
  REQUIRE(code_of([&] { g.connect_parent(777, room); }) == Errc::UnknownNode);
  REQUIRE(code_of([&] { g.connect_parent(room, room); }) == Errc::KindMismatch);
}

TEST_CASE("nothing nodes require a minimum volume") {
  SceneGraph g;
  NothingNode n;
  n.box = {{0, 0, 0}, {0.5, 0.5, 0.5}};  // 0.125 cubic meters
  REQUIRE(code_of([&] { g.upsert(n); }) == Errc::InvariantViolation);
  n.box = {{0, 0, 0}, {2, 1, 1}};  // exactly 2
  REQUIRE_NOTHROW(g.upsert(n));
}

TEST_CASE("structure nodes require unit normals and bounded thickness") {
  SceneGraph g;
  StructureNode s;
  s.box = {{0, 0, 1.25}, {1.5, 0.05, 1.25}, 0};
  s.plane_normal = {0, 2, 0};  // not unit
  REQUIRE(code_of([&] { g.upsert(s); }) == Errc::InvariantViolation);
  s.plane_normal = {0, 1, 0};
  REQUIRE_NOTHROW(g.upsert(s));

  // A slab thicker than the cap in both axes is not wall-like.
  StructureNode fat;
  fat.box = {{0, 0, 1}, {0.5, 0.5, 1}, 0};
  fat.plane_normal = {1, 0, 0};
  REQUIRE(code_of([&] { g.upsert(fat); }) == Errc::InvariantViolation);
}

TEST_CASE("erase clears dangling parent links") {
  SceneGraph g;
  const NodeId room = g.upsert(make_room("kitchen", {0, 0}));
  const NodeId obj = g.upsert(make_object("chair", {0.5, 0.5, 0.3}));
  g.connect_parent(obj, room);
  REQUIRE(g.parent_edges().size() == 1);
  g.erase(room);
  REQUIRE(g.objects.at(obj).parent_room == kNoNode);
  REQUIRE(g.parent_edges().empty());
  REQUIRE(g.is_valid());
}

TEST_CASE("observed_only strips predictions and unconfirmed structures") {
  SceneGraph g;
  const NodeId seen = g.upsert(make_room("kitchen", {0, 0}));
  RoomNode guess = make_room("bedroom", {10, 0});
  guess.provenance = Provenance::Predicted;
  const NodeId pred_room = g.upsert(guess);

  ObjectNode po = make_object("bed", {10, 0, 0.3});
  po.provenance = Provenance::Predicted;
  po.parent_room = pred_room;
  const NodeId pred_obj = g.upsert(po);

  StructureNode hyp;
  hyp.box = {{5, 0, 1.25}, {1.5, 0.05, 1.25}, 0};
  hyp.plane_normal = {0, 1, 0};
  hyp.observation_count = 0;  // hypothesis, not yet confirmed
  const NodeId pred_wall = g.upsert(hyp);

  const SceneGraph obs = g.observed_only();
  REQUIRE(obs.rooms.count(seen) == 1);
  REQUIRE(obs.rooms.count(pred_room) == 0);
  REQUIRE(obs.objects.count(pred_obj) == 0);
  REQUIRE(obs.structures.count(pred_wall) == 0);
  REQUIRE(obs.is_valid());
  // The projection reports the same revision as its source.
  REQUIRE(obs.revision == g.revision);

  // An observed object parented to a predicted room survives with the link
  // cleared rather than dangling.
  SceneGraph g2;
  RoomNode pr = make_room("study", {0, 0});
  pr.provenance = Provenance::Predicted;
  const NodeId prid = g2.upsert(pr);
  const NodeId oid = g2.upsert(make_object("desk", {0.5, 0, 0.3}));
  g2.connect_parent(oid, prid);
  const SceneGraph obs2 = g2.observed_only();
  REQUIRE(obs2.objects.at(oid).parent_room == kNoNode);
  REQUIRE(obs2.is_valid());
}
