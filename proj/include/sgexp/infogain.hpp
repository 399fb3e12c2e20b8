#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sgexp/completion.hpp"
#include "sgexp/core.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/observe.hpp"

// Viewpoint scoring by ensemble disagreement: when independently built scene
// hypotheses predict different observations from a pose, looking from there
// settles which hypothesis is right. Scores are mutual-information estimates
// over rendered observations, split into an object term and a room term.

namespace sgexp {

struct GainConfig {
  double lambda = 1.0;   // weight of the room term in the combined score
  int viewpoints = 300;  // candidate poses sampled per selection
  int perturbations = 4; // placement jitters per completed graph
  double range = 5.0;
  bool panoramic = true;
  double fov = kPi / 2;  // used only when panoramic is off
  // Treat every completed graph as its own ensemble component instead of
  // pooling completions under the current graph they extend.
  bool per_completion_components = false;
  double position_quantum = 0;  // >0: observation equality keys on snapped positions
  PerturbConfig perturb;
};

// Shannon entropy of the empirical distribution, in nats.
template <typename T>
double empirical_entropy(const std::vector<T>& samples) {
  if (samples.empty()) throw Error(Errc::EmptySamples, "entropy needs at least one sample");
  std::map<T, int> counts;
  for (const auto& s : samples) ++counts[s];
  const double n = static_cast<double>(samples.size());
  double h = 0;
  for (const auto& [key, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

struct GainBreakdown {
  double i_object = 0;
  double i_room = 0;
  double i_total = 0;
};

// The jittered hypothesis set, built once per step and shared by every
// candidate pose so that scoring stays a pure function of it.
struct PreparedEnsemble {
  std::vector<std::vector<SceneGraph>> components;
};

inline PreparedEnsemble prepare_ensemble(const std::vector<std::vector<SceneGraph>>& ensemble,
                                         const GainConfig& cfg, uint64_t seed) {
  if (ensemble.empty()) throw Error(Errc::EmptyEnsemble, "no ensemble components");
  const int n_perturb = std::max(1, cfg.perturbations);
  PreparedEnsemble prep;
  for (size_t j = 0; j < ensemble.size(); ++j) {
    if (ensemble[j].empty())
      throw Error(Errc::EmptyEnsemble,
                  "ensemble component " + std::to_string(j) + " has no completions");
    if (!cfg.per_completion_components) prep.components.emplace_back();
    for (size_t i = 0; i < ensemble[j].size(); ++i) {
      if (cfg.per_completion_components) prep.components.emplace_back();
      auto& bucket = prep.components.back();
      for (int n = 0; n < n_perturb; ++n)
        bucket.push_back(
            perturb(ensemble[j][i], derive_seed(seed, j, i, static_cast<uint64_t>(n)),
                    cfg.perturb));
    }
  }
  return prep;
}

// Marginal-minus-conditional entropy, evaluated separately for the visible
// object tokens and for the dominant room: disagreement between components
// raises the marginal above the mean within-component entropy.
inline GainBreakdown gain_at(const PreparedEnsemble& prep, const Pose& pose,
                             const GainConfig& cfg) {
  if (prep.components.empty()) throw Error(Errc::EmptyEnsemble, "no ensemble components");
  using Tokens = std::map<std::pair<Layer, std::string>, int>;
  const double fov = cfg.panoramic ? kTwoPi : cfg.fov;

  double h_obj_cond = 0, h_room_cond = 0;
  std::vector<Tokens> all_tokens;
  std::vector<std::string> all_rooms;
  for (const auto& comp : prep.components) {
    std::vector<Tokens> tokens;
    std::vector<std::string> rooms;
    tokens.reserve(comp.size());
    rooms.reserve(comp.size());
    for (const auto& g : comp) {
      const RenderedObservation obs = render_observation(g, pose, fov, cfg.range);
      const CanonicalObservation c = cfg.position_quantum > 0
                                         ? canonicalize_quantized(g, obs, cfg.position_quantum)
                                         : canonicalize(obs);
      tokens.push_back(c.tokens);
      rooms.push_back(c.dominant_room);
    }
    h_obj_cond += empirical_entropy(tokens);
    h_room_cond += empirical_entropy(rooms);
    all_tokens.insert(all_tokens.end(), tokens.begin(), tokens.end());
    all_rooms.insert(all_rooms.end(), rooms.begin(), rooms.end());
  }
  const double n_comp = static_cast<double>(prep.components.size());
  GainBreakdown g;
  g.i_object = empirical_entropy(all_tokens) - h_obj_cond / n_comp;
  g.i_room = empirical_entropy(all_rooms) - h_room_cond / n_comp;
  g.i_total = g.i_object + cfg.lambda * g.i_room;
  return g;
}

inline GainBreakdown information_gain(const std::vector<std::vector<SceneGraph>>& ensemble,
                                      const Pose& pose, const GainConfig& cfg,
                                      uint64_t seed = 0) {
  return gain_at(prepare_ensemble(ensemble, cfg, seed), pose, cfg);
}

// Uniform scatter of candidate poses over known-free cells, jittered inside
// each cell so repeated picks of one cell still differ.
inline std::vector<Pose> sample_viewpoints(const OccupancyGrid& grid, int count, uint64_t seed) {
  if (count <= 0) throw Error(Errc::ConfigError, "viewpoint count must be positive");
  std::vector<std::pair<int, int>> free_cells;
  for (int iy = 0; iy < grid.height(); ++iy)
    for (int ix = 0; ix < grid.width(); ++ix)
      if (grid.at(ix, iy) == Cell::Free) free_cells.emplace_back(ix, iy);
  if (free_cells.empty()) throw Error(Errc::NoFreeSpace, "grid has no free cells");

  Rng rng(derive_seed(seed, 0x5ca7u));
  const double res = grid.resolution();
  std::vector<Pose> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    const auto [ix, iy] = free_cells[rng.uniform_int(free_cells.size())];
    const Vec2 c = grid.center_of(ix, iy);
    Pose p;
    p.position = {c.x + rng.uniform(-0.5, 0.5) * res, c.y + rng.uniform(-0.5, 0.5) * res};
    p.yaw = 0;
    out.push_back(p);
  }
  return out;
}

struct CandidateGain {
  int index = 0;
  Pose pose;
  GainBreakdown gain;
};

struct ViewpointChoice {
  int index = 0;
  Pose pose;
  GainBreakdown gain;
  std::vector<CandidateGain> table;
};

// Argmax of the combined score over scattered candidates. Equal scores fall
// to the candidate closest to the current pose, then to the lowest index, so
// a flat gain landscape degrades into staying put rather than wandering.
inline ViewpointChoice select_best_viewpoint(const std::vector<std::vector<SceneGraph>>& ensemble,
                                             const OccupancyGrid& grid, const Pose& current,
                                             const GainConfig& cfg, uint64_t seed) {
  const PreparedEnsemble prep = prepare_ensemble(ensemble, cfg, derive_seed(seed, 0x9a13u));
  const std::vector<Pose> poses = sample_viewpoints(grid, cfg.viewpoints, seed);

  ViewpointChoice choice;
  double best_dist = 0;
  for (size_t i = 0; i < poses.size(); ++i) {
    CandidateGain cand;
    cand.index = static_cast<int>(i);
    cand.pose = poses[i];
    cand.gain = gain_at(prep, poses[i], cfg);
    const double dist = (poses[i].position - current.position).norm();
    const bool first = choice.table.empty();
    const double diff = cand.gain.i_total - choice.gain.i_total;
    if (first || diff > 1e-12 || (diff > -1e-12 && dist < best_dist - 1e-12)) {
      choice.index = cand.index;
      choice.pose = cand.pose;
      choice.gain = cand.gain;
      best_dist = dist;
    }
    choice.table.push_back(cand);
  }
  return choice;
}

inline void write_gain_csv(std::ostream& os, const std::vector<CandidateGain>& table) {
  os << "candidate_idx,x,y,I_object,I_room,I_total\n";
  for (const auto& c : table)
    os << c.index << ',' << format_double(c.pose.position.x) << ','
       << format_double(c.pose.position.y) << ',' << format_double(c.gain.i_object) << ','
       << format_double(c.gain.i_room) << ',' << format_double(c.gain.i_total) << '\n';
}

}  // namespace sgexp
