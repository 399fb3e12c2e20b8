#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"

namespace sgexp {

struct FurnitureSpec {
  std::string label;
  Vec3 half_mean;    // typical half extents, meters
  Vec3 half_spread;  // uniform +- spread per axis
  int count_min = 0;
  int count_max = 1;
};

struct RoomProfile {
  std::string label;
  double weight = 1.0;  // relative frequency when picking room kinds
  Vec2 size_min{2.4, 2.4};
  Vec2 size_max{4.4, 3.8};
  std::vector<FurnitureSpec> furniture;

  // Expected object counts, the reference vector for room labeling.
  std::map<std::string, double> expected_counts() const {
    std::map<std::string, double> out;
    for (const auto& f : furniture) out[f.label] += (f.count_min + f.count_max) / 2.0;
    return out;
  }
};

struct Catalog {
  std::map<std::string, RoomProfile> rooms;
  // adjacency[a][b] boosts proposing a room of kind b next to a room of kind a.
  std::map<std::string, std::map<std::string, double>> adjacency;

  double adjacency_weight(const std::string& a, const std::string& b) const {
    auto it = adjacency.find(a);
    if (it == adjacency.end()) return 1.0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 1.0 : jt->second;
  }

  // Cosine similarity against each profile's expected-count vector; ties fall
  // to the lexicographically smallest label, zero features to "unknown".
  std::string classify(const std::map<std::string, double>& feature) const {
    double fn = 0;
    for (const auto& [k, v] : feature) fn += v * v;
    if (fn <= 0) return "unknown";
    std::string best = "unknown";
    double best_cos = 0;
    for (const auto& [label, profile] : rooms) {
      auto counts = profile.expected_counts();
      double dot = 0, pn = 0;
      for (const auto& [k, v] : counts) {
        pn += v * v;
        auto it = feature.find(k);
        if (it != feature.end()) dot += v * it->second;
      }
      if (pn <= 0) continue;
      double c = dot / std::sqrt(fn * pn);
      if (c > best_cos + 1e-12) {
        best_cos = c;
        best = label;
      }
    }
    return best_cos > 0 ? best : "unknown";
  }

  void validate() const {
    if (rooms.empty()) throw Error(Errc::ConfigError, "catalog has no room kinds");
    for (const auto& [label, p] : rooms) {
      if (p.furniture.empty())
        throw Error(Errc::ConfigError, "catalog room '" + label + "' lists no furniture");
      if (p.weight <= 0) throw Error(Errc::ConfigError, "catalog weight must be positive");
      for (const auto& f : p.furniture) {
        if (f.label.empty() || f.count_min < 0 || f.count_max < f.count_min)
          throw Error(Errc::ConfigError, "bad furniture entry in '" + label + "'");
        if (f.half_mean.x - f.half_spread.x <= 0 || f.half_mean.y - f.half_spread.y <= 0 ||
            f.half_mean.z - f.half_spread.z <= 0)
          throw Error(Errc::ConfigError, "non-positive size range for '" + f.label + "'");
      }
    }
  }
};

inline Catalog default_catalog() {
  Catalog c;
  auto add = [&](const std::string& label, double weight, Vec2 smin, Vec2 smax,
                 std::vector<FurnitureSpec> furniture) {
    RoomProfile p;
    p.label = label;
    p.weight = weight;
    p.size_min = smin;
    p.size_max = smax;
    p.furniture = std::move(furniture);
    c.rooms[label] = std::move(p);
  };
  add("bathroom", 0.8, {2.2, 2.2}, {3.0, 2.8},
      {{"toilet", {0.2, 0.3, 0.4}, {0.03, 0.05, 0.05}, 1, 1},
       {"bathtub", {0.8, 0.4, 0.3}, {0.1, 0.05, 0.05}, 0, 1},
       {"washbasin", {0.25, 0.2, 0.4}, {0.05, 0.03, 0.05}, 1, 1}});
  add("bedroom", 1.0, {2.8, 2.6}, {4.2, 3.8},
      {{"bed", {0.9, 1.0, 0.25}, {0.1, 0.1, 0.05}, 1, 1},
       {"wardrobe", {0.6, 0.35, 1.0}, {0.1, 0.05, 0.1}, 1, 2},
       {"nightstand", {0.25, 0.25, 0.3}, {0.05, 0.05, 0.05}, 1, 2}});
  add("kitchen", 1.0, {2.6, 2.4}, {4.0, 3.6},
      {{"fridge", {0.35, 0.35, 0.9}, {0.05, 0.05, 0.1}, 1, 1},
       {"stove", {0.3, 0.35, 0.45}, {0.05, 0.05, 0.05}, 1, 1},
       {"counter", {0.9, 0.3, 0.45}, {0.2, 0.05, 0.05}, 1, 2}});
  add("living_room", 1.2, {3.0, 2.8}, {4.6, 4.0},
      {{"sofa", {1.0, 0.45, 0.4}, {0.15, 0.05, 0.05}, 1, 1},
       {"coffee_table", {0.55, 0.35, 0.25}, {0.1, 0.05, 0.05}, 1, 1},
       {"bookshelf", {0.45, 0.2, 0.9}, {0.1, 0.05, 0.1}, 0, 2}});
  add("office", 0.7, {2.4, 2.4}, {3.6, 3.2},
      {{"desk", {0.7, 0.4, 0.38}, {0.1, 0.05, 0.03}, 1, 1},
       {"office_chair", {0.25, 0.25, 0.45}, {0.05, 0.05, 0.05}, 1, 1},
       {"cabinet", {0.4, 0.25, 0.7}, {0.1, 0.05, 0.1}, 0, 2}});
  c.adjacency["bedroom"]["bathroom"] = 2.0;
  c.adjacency["bathroom"]["bedroom"] = 2.0;
  c.adjacency["kitchen"]["living_room"] = 2.0;
  c.adjacency["living_room"]["kitchen"] = 2.0;
  return c;
}

inline Catalog parse_catalog_yaml(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ParseError, std::string("catalog yaml: ") + e.what());
  }
  Catalog c;
  try {
    if (!doc["rooms"] || !doc["rooms"].IsMap())
      throw Error(Errc::ParseError, "catalog needs a rooms map");
    for (const auto& kv : doc["rooms"]) {
      RoomProfile p;
      p.label = kv.first.as<std::string>();
      const auto& n = kv.second;
      if (n["weight"]) p.weight = n["weight"].as<double>();
      auto vec2 = [](const YAML::Node& v) { return Vec2{v[0].as<double>(), v[1].as<double>()}; };
      auto vec3 = [](const YAML::Node& v) {
        return Vec3{v[0].as<double>(), v[1].as<double>(), v[2].as<double>()};
      };
      if (n["size_min"]) p.size_min = vec2(n["size_min"]);
      if (n["size_max"]) p.size_max = vec2(n["size_max"]);
      for (const auto& f : n["furniture"]) {
        FurnitureSpec fs;
        fs.label = f["label"].as<std::string>();
        fs.half_mean = vec3(f["half_extents"]);
        if (f["spread"]) fs.half_spread = vec3(f["spread"]);
        if (f["count"]) {
          fs.count_min = f["count"][0].as<int>();
          fs.count_max = f["count"][1].as<int>();
        }
        p.furniture.push_back(std::move(fs));
      }
      c.rooms[p.label] = std::move(p);
    }
    if (doc["adjacency"])
      for (const auto& kv : doc["adjacency"])
        for (const auto& inner : kv.second)
          c.adjacency[kv.first.as<std::string>()][inner.first.as<std::string>()] =
              inner.second.as<double>();
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ParseError, std::string("catalog yaml: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace sgexp
