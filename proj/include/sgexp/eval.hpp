#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgexp/core.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/scene_io.hpp"

// Scene-graph quality metrics: object F1 with greedy distance matching, a
// graph edit distance over rooms, objects, and their parent edges, room
// prediction consensus scoring, and metric curves along an episode log.

namespace sgexp {

struct MatchSpec {
  double object_dist = 0.5;    // center distance for an object match
  double room_dist = 4.0;      // centroid distance for a room substitution
  double room_pred_dist = 2.5; // room-finding success radius and cluster size
  double consensus = 0.5;      // support fraction a prediction must exceed
};

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  int matched = 0;
  int pred_count = 0;
  int truth_count = 0;
};

// One-to-one matching among same-label object pairs within object_dist,
// greedy by ascending center distance. Empty sides score 1 by convention.
inline F1Score object_f1(const SceneGraph& pred, const SceneGraph& truth,
                         const MatchSpec& ms = {}) {
  F1Score out;
  out.pred_count = static_cast<int>(pred.objects.size());
  out.truth_count = static_cast<int>(truth.objects.size());

  std::vector<std::tuple<double, NodeId, NodeId>> pairs;
  for (const auto& [pid, po] : pred.objects)
    for (const auto& [tid, to] : truth.objects) {
      if (po.label != to.label) continue;
      const double d = (po.center.xy() - to.center.xy()).norm();
      if (d <= ms.object_dist + 1e-12) pairs.emplace_back(d, pid, tid);
    }
  std::sort(pairs.begin(), pairs.end());

  std::map<NodeId, bool> used_p, used_t;
  for (const auto& [d, pid, tid] : pairs) {
    if (used_p[pid] || used_t[tid]) continue;
    used_p[pid] = used_t[tid] = true;
    ++out.matched;
  }

  out.precision = out.pred_count ? static_cast<double>(out.matched) / out.pred_count : 1.0;
  out.recall = out.truth_count ? static_cast<double>(out.matched) / out.truth_count : 1.0;
  out.f1 = (out.precision + out.recall) > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

struct GedResult {
  double cost = 0;
  bool approximate = false; // beam upper bound, not a certified minimum
};

namespace detail {

struct GedNode {
  std::string label;
  Vec2 pos;
  int parent = -1; // index into the room list (objects only)
};

struct GedView {
  std::vector<GedNode> rooms;
  std::vector<GedNode> objects;
  int edges = 0; // objects that carry a parent edge
};

inline GedView ged_view(const SceneGraph& g) {
  GedView v;
  std::map<NodeId, int> room_idx;
  for (const auto& [id, r] : g.rooms) {
    room_idx[id] = static_cast<int>(v.rooms.size());
    v.rooms.push_back({r.label, r.centroid, -1});
  }
  for (const auto& [id, o] : g.objects) {
    int parent = -1;
    if (o.parent_room != kNoNode) {
      auto it = room_idx.find(o.parent_room);
      if (it != room_idx.end()) parent = it->second;
    }
    v.objects.push_back({o.label, o.center.xy(), parent});
    if (parent >= 0) ++v.edges;
  }
  return v;
}

// One in-progress node mapping: rooms first, then objects, so the object
// parent test can consult the finished room assignment.
struct GedState {
  std::vector<int> map;   // per a-node: b index, or -1 for delete
  uint32_t used_rooms = 0;
  uint32_t used_objs = 0;
  double cost = 0;
};

inline double ged_lower_bound(const GedState& s, const GedView& a, const GedView& b,
                              size_t next) {
  const size_t nr = a.rooms.size();
  double lb = 0;
  if (next < nr) {
    const int ra = static_cast<int>(nr - next);
    const int rb = static_cast<int>(b.rooms.size()) - std::popcount(s.used_rooms);
    lb += std::abs(ra - rb);
    lb += std::abs(static_cast<int>(a.objects.size()) - static_cast<int>(b.objects.size()));
  } else {
    const int oa = static_cast<int>(nr + a.objects.size() - next);
    const int ob = static_cast<int>(b.objects.size()) - std::popcount(s.used_objs);
    lb += std::abs(oa - ob);
  }
  return lb;
}

// Children of one state: delete the next a-node, or map it onto any unused
// b-node the substitution rules permit.
inline void ged_expand(const GedState& s, const GedView& a, const GedView& b, size_t next,
                       const MatchSpec& ms, std::vector<GedState>& out) {
  const size_t nr = a.rooms.size();
  const bool is_room = next < nr;
  const GedNode& node = is_room ? a.rooms[next] : a.objects[next - nr];

  GedState del = s;
  del.map.push_back(-1);
  del.cost += is_room ? 1.0 : (node.parent >= 0 ? 2.0 : 1.0);
  out.push_back(std::move(del));

  const auto& pool = is_room ? b.rooms : b.objects;
  const uint32_t used = is_room ? s.used_rooms : s.used_objs;
  for (size_t j = 0; j < pool.size(); ++j) {
    if (used & (1u << j)) continue;
    const GedNode& cand = pool[j];
    if (cand.label != node.label) continue;
    const double lim = is_room ? ms.room_dist : ms.object_dist;
    if ((cand.pos - node.pos).norm() > lim + 1e-12) continue;
    if (!is_room) {
      // Parent rooms must be mapped onto each other, or both be absent; a
      // deleted parent is not the same thing as no parent.
      if ((node.parent >= 0) != (cand.parent >= 0)) continue;
      if (node.parent >= 0 && s.map[static_cast<size_t>(node.parent)] != cand.parent) continue;
    }
    GedState sub = s;
    sub.map.push_back(static_cast<int>(j));
    if (is_room)
      sub.used_rooms |= (1u << j);
    else
      sub.used_objs |= (1u << j);
    out.push_back(std::move(sub));
  }
}

inline double ged_finish(const GedState& s, const GedView& b) {
  double cost = s.cost;
  for (size_t j = 0; j < b.rooms.size(); ++j)
    if (!(s.used_rooms & (1u << j))) cost += 1.0;
  for (size_t j = 0; j < b.objects.size(); ++j)
    if (!(s.used_objs & (1u << j))) cost += b.objects[j].parent >= 0 ? 2.0 : 1.0;
  return cost;
}

}  // namespace detail

// Minimum edit cost between the room/object layers of two graphs: node
// insert/delete cost 1, parent-edge insert/delete cost 1, substitution free
// only for same-label nodes within range (objects also need matching
// parents). Exact branch-and-bound up to exact_limit combined nodes; larger
// inputs get a beam-search upper bound marked approximate.
inline GedResult graph_edit_distance(const SceneGraph& ga, const SceneGraph& gb,
                                     const MatchSpec& ms = {}, size_t exact_limit = 14) {
  const detail::GedView a = detail::ged_view(ga);
  const detail::GedView b = detail::ged_view(gb);
  if (b.rooms.size() > 31 || b.objects.size() > 31)
    throw Error(Errc::ConfigError, "edit distance supports at most 31 nodes per layer");
  const size_t n = a.rooms.size() + a.objects.size();
  const size_t combined = n + b.rooms.size() + b.objects.size();

  GedResult res;
  if (combined <= exact_limit) {
    double best = std::numeric_limits<double>::infinity();
    // Depth-first over assignment prefixes, cheapest children first.
    std::vector<std::pair<detail::GedState, size_t>> stack;
    stack.push_back({detail::GedState{}, 0});
    while (!stack.empty()) {
      auto [s, next] = std::move(stack.back());
      stack.pop_back();
      if (s.cost + detail::ged_lower_bound(s, a, b, next) >= best) continue;
      if (next == n) {
        best = std::min(best, detail::ged_finish(s, b));
        continue;
      }
      std::vector<detail::GedState> children;
      detail::ged_expand(s, a, b, next, ms, children);
      std::sort(children.begin(), children.end(),
                [](const detail::GedState& x, const detail::GedState& y) {
                  return x.cost > y.cost; // stack pops the cheapest last
                });
      for (auto& c : children) stack.push_back({std::move(c), next + 1});
    }
    res.cost = best;
    return res;
  }

  // Beam search: keep the most promising prefixes per depth. Upper bound
  // only, so the flag travels with the number.
  constexpr size_t kBeam = 128;
  std::vector<detail::GedState> beam{detail::GedState{}};
  for (size_t next = 0; next < n; ++next) {
    std::vector<detail::GedState> grown;
    for (const auto& s : beam) detail::ged_expand(s, a, b, next, ms, grown);
    std::stable_sort(grown.begin(), grown.end(),
                     [&](const detail::GedState& x, const detail::GedState& y) {
                       return x.cost + detail::ged_lower_bound(x, a, b, next + 1) <
                              y.cost + detail::ged_lower_bound(y, a, b, next + 1);
                     });
    if (grown.size() > kBeam) grown.resize(kBeam);
    beam = std::move(grown);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : beam) best = std::min(best, detail::ged_finish(s, b));
  res.cost = best;
  res.approximate = true;
  return res;
}

struct RoomPrediction {
  std::string label;
  Vec2 centroid;
  int support = 0;    // ensemble members containing the cluster
  bool confident = false;
  bool success = false;
};

// Clusters Predicted rooms across ensemble members by label and proximity;
// a cluster seen in more than the consensus fraction of members counts as a
// prediction, successful when a same-label truth room lies within range.
inline std::vector<RoomPrediction> room_prediction_success(
    const std::vector<SceneGraph>& ensemble, const SceneGraph& truth, const MatchSpec& ms = {}) {
  if (ensemble.empty()) throw Error(Errc::EmptySamples, "ensemble is empty");

  struct Cluster {
    std::string label;
    Vec2 sum{0, 0};
    int count = 0;
    std::vector<int> members;
    Vec2 mean() const { return sum * (1.0 / count); }
  };
  std::vector<Cluster> clusters;
  for (size_t mi = 0; mi < ensemble.size(); ++mi)
    for (const auto& [id, r] : ensemble[mi].rooms) {
      if (r.provenance != Provenance::Predicted) continue;
      Cluster* home = nullptr;
      for (auto& c : clusters)
        if (c.label == r.label && (c.mean() - r.centroid).norm() <= ms.room_pred_dist + 1e-12) {
          home = &c;
          break;
        }
      if (!home) {
        clusters.push_back({r.label, {0, 0}, 0, {}});
        home = &clusters.back();
      }
      home->sum = home->sum + r.centroid;
      home->count += 1;
      if (home->members.empty() || home->members.back() != static_cast<int>(mi))
        home->members.push_back(static_cast<int>(mi));
    }

  std::vector<RoomPrediction> out;
  for (const auto& c : clusters) {
    RoomPrediction rp;
    rp.label = c.label;
    rp.centroid = c.mean();
    rp.support = static_cast<int>(c.members.size());
    rp.confident = rp.support > ms.consensus * static_cast<double>(ensemble.size()) + 1e-12;
    for (const auto& [id, r] : truth.rooms)
      if (r.label == c.label && (r.centroid - rp.centroid).norm() <= ms.room_pred_dist + 1e-12) {
        rp.success = true;
        break;
      }
    out.push_back(std::move(rp));
  }
  std::sort(out.begin(), out.end(), [](const RoomPrediction& x, const RoomPrediction& y) {
    return std::tie(x.label, x.centroid.x, x.centroid.y) <
           std::tie(y.label, y.centroid.x, y.centroid.y);
  });
  return out;
}

struct MetricPoint {
  int step = 0;
  double traveled = 0;
  double elapsed = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double ged = 0;
  bool ged_exact = true;
};

// Replays an episode directory's graph snapshots against the ground truth,
// one metric point per logged step.
inline std::vector<MetricPoint> metrics_curve(const std::string& log_dir,
                                              const SceneGraph& truth,
                                              const MatchSpec& ms = {}) {
  std::ifstream jl(log_dir + "/log.jsonl");
  if (!jl) throw Error(Errc::IoError, "cannot read " + log_dir + "/log.jsonl");

  std::vector<MetricPoint> out;
  std::string line;
  while (std::getline(jl, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, std::string("bad log line: ") + e.what());
    }
    const std::string ref = j.value("graph", "");
    if (ref.empty()) throw Error(Errc::MissingSnapshot, "log step has no graph snapshot");
    std::ifstream gf(log_dir + "/" + ref, std::ios::binary);
    if (!gf) throw Error(Errc::MissingSnapshot, "missing snapshot " + ref);
    std::ostringstream ss;
    ss << gf.rdbuf();
    const SceneGraph g = deserialize_yaml(ss.str());

    MetricPoint p;
    p.step = j.value("step", 0);
    p.traveled = j.value("traveled", 0.0);
    p.elapsed = j.value("elapsed", 0.0);
    const F1Score f = object_f1(g, truth, ms);
    p.precision = f.precision;
    p.recall = f.recall;
    p.f1 = f.f1;
    const GedResult ged = graph_edit_distance(g, truth, ms);
    p.ged = ged.cost;
    p.ged_exact = !ged.approximate;
    out.push_back(p);
  }
  if (out.empty()) throw Error(Errc::MissingSnapshot, "log has no steps");
  return out;
}

// The metric state in effect after spending the given fraction of the
// episode's path budget: the last step at or before the travel cut.
inline MetricPoint curve_at_fraction(const std::vector<MetricPoint>& curve, double fraction) {
  if (curve.empty()) throw Error(Errc::EmptySamples, "empty metric curve");
  const double target = fraction * curve.back().traveled;
  MetricPoint best = curve.front();
  for (const auto& p : curve)
    if (p.traveled <= target + 1e-9) best = p;
  return best;
}

}  // namespace sgexp
