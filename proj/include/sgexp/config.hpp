#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "sgexp/adapter.hpp"
#include "sgexp/episode.hpp"
#include "sgexp/world.hpp"

// Run configuration for the command-line tools: which world to generate,
// how to explore it, where artifacts go, and which completion sampler to
// use. The YAML schema mirrors the field names below.

namespace sgexp {

enum class SamplerChoice { Prior, Adapter };

struct RunConfig {
  WorldSpec world;
  EpisodeConfig episode;
  std::string out = "run";
  SamplerChoice sampler = SamplerChoice::Prior;
  AdapterConfig adapter;
};

namespace detail {

inline std::string read_file_or_throw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <typename T>
void opt(const YAML::Node& n, const char* key, T& into) {
  if (const auto v = n[key]) into = v.as<T>();
}

inline void parse_world(const YAML::Node& n, WorldSpec& w) {
  opt(n, "seed", w.seed);
  opt(n, "room_min", w.room_min);
  opt(n, "room_max", w.room_max);
  if (const auto e = n["extent"]) {
    if (!e.IsSequence() || e.size() != 2)
      throw Error(Errc::ConfigError, "world.extent must be [width, height]");
    w.extent = {e[0].as<double>(), e[1].as<double>()};
  }
  opt(n, "door_width", w.door_width);
  opt(n, "wall_thickness", w.wall_thickness);
  opt(n, "wall_height", w.wall_height);
  opt(n, "door_height", w.door_height);
  opt(n, "extra_door_prob", w.extra_door_prob);
  if (const auto c = n["catalog"]) w.catalog = parse_catalog_yaml(read_file_or_throw(c.as<std::string>()));
}

inline void parse_episode(const YAML::Node& n, EpisodeConfig& e) {
  if (const auto p = n["policy"]) {
    const std::string s = p.as<std::string>();
    if (s == "semantic")
      e.policy = Policy::Semantic;
    else if (s == "frontier")
      e.policy = Policy::Frontier;
    else
      throw Error(Errc::ConfigError, "episode.policy must be semantic or frontier, got " + s);
  }
  opt(n, "budget", e.budget);
  opt(n, "speed", e.speed);
  opt(n, "scan_time", e.scan_time);
  opt(n, "range", e.range);
  opt(n, "seed", e.seed);
  opt(n, "inflation", e.inflation);
  opt(n, "local_window", e.local_window);
  opt(n, "fallback_candidates", e.fallback_candidates);
  if (const auto g = n["gain"]) {
    opt(g, "lambda", e.gain.lambda);
    opt(g, "viewpoints", e.gain.viewpoints);
    opt(g, "perturbations", e.gain.perturbations);
    opt(g, "range", e.gain.range);
    opt(g, "position_quantum", e.gain.position_quantum);
  }
  if (const auto s = n["ensemble"]) {
    opt(s, "current_graphs", e.ensemble.current_graphs);
    opt(s, "samples_per_graph", e.ensemble.samples_per_graph);
  }
  if (const auto s = n["noise"]) {
    opt(s, "sigma", e.noise.sigma);
    opt(s, "label_flip", e.noise.label_flip);
    opt(s, "seed", e.noise.seed);
  }
  // The gain evaluator should see as far as the sensor does.
  e.gain.range = n["gain"] && n["gain"]["range"] ? e.gain.range : e.range;
}

inline void parse_adapter(const YAML::Node& n, AdapterConfig& a) {
  opt(n, "endpoint", a.endpoint);
  opt(n, "path", a.path);
  opt(n, "timeout_s", a.timeout_s);
  opt(n, "generate_template", a.generate_template);
  opt(n, "refine_template", a.refine_template);
  opt(n, "max_rejections", a.max_rejections);
  opt(n, "raster_resolution", a.raster_resolution);
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ConfigError, std::string("config parse: ") + e.what());
  }
  if (!root.IsMap()) throw Error(Errc::ConfigError, "config root must be a mapping");

  RunConfig cfg;
  if (const auto w = root["world"]) {
    // Either an inline mapping or a path to a YAML file holding one.
    if (w.IsScalar()) {
      YAML::Node inner = YAML::Load(detail::read_file_or_throw(w.as<std::string>()));
      detail::parse_world(inner, cfg.world);
    } else {
      detail::parse_world(w, cfg.world);
    }
  }
  if (const auto e = root["episode"]) detail::parse_episode(e, cfg.episode);
  detail::opt(root, "out", cfg.out);
  if (const auto s = root["sampler"]) {
    const std::string v = s.as<std::string>();
    if (v == "prior")
      cfg.sampler = SamplerChoice::Prior;
    else if (v == "adapter")
      cfg.sampler = SamplerChoice::Adapter;
    else
      throw Error(Errc::ConfigError, "sampler must be prior or adapter, got " + v);
  }
  if (const auto a = root["adapter"]) detail::parse_adapter(a, cfg.adapter);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(detail::read_file_or_throw(path));
}

}  // namespace sgexp
