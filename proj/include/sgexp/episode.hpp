#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgexp/completion.hpp"
#include "sgexp/core.hpp"
#include "sgexp/infogain.hpp"
#include "sgexp/mapper.hpp"
#include "sgexp/planner.hpp"
#include "sgexp/scene_io.hpp"
#include "sgexp/world.hpp"

// Closed-loop exploration: scan, map, choose the next viewpoint (semantic
// gain or nearest frontier), navigate, repeat until the budget runs out or
// no frontier remains.

namespace sgexp {

enum class Policy { Semantic, Frontier };

inline std::string to_string(Policy p) {
  return p == Policy::Semantic ? "semantic" : "frontier";
}

struct EnsembleSpec {
  int current_graphs = 2;    // parallel partial maps, one per ensemble slot
  int samples_per_graph = 4; // completions drawn from each partial map
};

struct EpisodeConfig {
  Policy policy = Policy::Semantic;
  double budget = 60;     // path-length allowance, meters
  double speed = 1.0;     // m/s, also used by follow_path
  double scan_time = 5.0; // seconds charged per panoramic scan
  double range = 5.0;     // sensor range for scans and en-route sensing
  GainConfig gain;
  EnsembleSpec ensemble;
  uint64_t seed = 0;
  MapperConfig mapper;
  double inflation = 0.25;   // robot radius for planning
  double local_window = 8.0; // refine_local window, meters
  int fallback_candidates = 10; // gain-ranked poses to try before frontiers
  NoiseSpec noise;
};

struct StepLog {
  int step = 0;
  Pose pose;                 // where the scan happened
  double traveled = 0;       // cumulative after this step's motion
  double elapsed = 0;        // cumulative, scans + motion
  std::string policy;        // "semantic", "frontier", or "frontier_fallback"
  double gain = 0;           // chosen candidate's combined information gain
  Pose goal;                 // navigation target (meaningless on final step)
  bool moved = false;
  bool blocked = false;      // follow_path stopped at an undetected obstacle
  std::string graph_ref, grid_ref, gains_ref, ensemble_ref;
};

struct EpisodeLog {
  std::vector<StepLog> steps;
  std::string termination; // "NoFrontiers" or "BudgetReached"
  double traveled = 0;
  double elapsed = 0;
  SceneGraph final_graph;
};

// Drop-in completion source: (partial graph, sample count, seed) -> samples.
using SamplerFn =
    std::function<std::vector<SceneGraph>(const SceneGraph&, int, uint64_t)>;

namespace detail {

inline std::string step_tag(int step) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "step_%03d", step);
  return buf;
}

// Planning view of the map: obstacles fattened by the robot radius. Around
// the robot the inflation is undone (it already stands there, so the nearby
// surfaces cannot actually pin it), but only on cells the raw map carved
// free; unknown cells stay unknown rather than becoming phantom corridors.
inline OccupancyGrid planning_grid(const OccupancyGrid& raw, const Vec2& pos, double inflation) {
  OccupancyGrid inf = raw.inflated(inflation);
  int cx, cy;
  inf.cell_of(pos, cx, cy);
  const int r = static_cast<int>(std::ceil(inflation / inf.resolution()));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (!inf.in_bounds(cx + dx, cy + dy)) continue;
      if (raw.at(cx + dx, cy + dy) != Cell::Free) continue;
      const Vec2 c = inf.center_of(cx + dx, cy + dy);
      if ((c - pos).norm() <= inflation + 1e-9) inf.set(cx + dx, cy + dy, Cell::Free);
    }
  return inf;
}

// Nudges a goal onto free planning space: the goal cell itself, else the
// nearest free cell within half a meter.
inline std::optional<Vec2> free_goal_near(const OccupancyGrid& grid, const Vec2& goal,
                                          double radius = 0.5) {
  const auto cell = nearest_free_cell(grid, goal, radius);
  if (!cell) return std::nullopt;
  return grid.center_of(cell->first, cell->second);
}

inline std::optional<Path> try_plan(const OccupancyGrid& planning, const Pose& pose,
                                    const Vec2& goal, double window) {
  const auto adj = free_goal_near(planning, goal);
  if (!adj) return std::nullopt;
  try {
    const Path global = plan_grid(planning, pose.position, *adj);
    return refine_local(global, planning, pose, window);
  } catch (const Error& e) {
    if (e.code() == Errc::NoPath || e.code() == Errc::StartOccupied ||
        e.code() == Errc::NoProgress)
      return std::nullopt;
    throw;
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + p.string());
  f << s;
}

}  // namespace detail

// Runs one exploration episode. Artifacts (graph/grid snapshots, gain tables,
// ensembles, the step log) land under out_dir when given; sampler defaults to
// the prior completion model.
inline EpisodeLog run_episode(const World& w, const EpisodeConfig& cfg,
                              const std::string& out_dir = "", SamplerFn sampler = {}) {
  namespace fs = std::filesystem;
  if (cfg.budget <= 0) throw Error(Errc::ConfigError, "budget must be positive");
  const int J = std::max(1, cfg.ensemble.current_graphs);
  if (!sampler) {
    sampler = [ps = PriorSampler{}](const SceneGraph& g, int m, uint64_t s) {
      return ps.sample(g, m, s);
    };
  }
  const bool save = !out_dir.empty();
  if (save) {
    fs::create_directories(fs::path(out_dir) / "graphs");
    fs::create_directories(fs::path(out_dir) / "grid");
    if (cfg.policy == Policy::Semantic) {
      fs::create_directories(fs::path(out_dir) / "gains");
      fs::create_directories(fs::path(out_dir) / "ensembles");
    }
  }

  // One mapper sees everything. Each of the J ensemble mappers is blind to
  // every J-th panorama (a jackknife over scans), so their graphs disagree
  // exactly where evidence is thin and re-agree once coverage overlaps.
  // En-route wedge observations feed only the full map.
  Mapper full(cfg.mapper, derive_seed(cfg.seed, 0xe915u, 0));
  std::vector<Mapper> comps;
  comps.reserve(J);
  for (int j = 0; j < J; ++j) comps.emplace_back(cfg.mapper, derive_seed(cfg.seed, 0xe915u, j + 1));

  EpisodeLog log;
  Pose pose = w.start;
  double sampler_seconds = 0;
  std::vector<Vec2> spent;    // goals visited without resolving their frontier
  std::vector<Vec2> scanned;  // panorama poses; rescanning them adds nothing
  std::optional<Vec2> prev_goal;

  for (int step = 0;; ++step) {
    const Observation obs = panoramic_scan(w, pose, cfg.range, cfg.noise, log.elapsed);
    scanned.push_back(pose.position);
    integrate(full, obs, true);
    segment_rooms(full);
    for (int j = 0; j < J; ++j) {
      // Everyone gets the very first look; nobody should start from nothing.
      if (step > 0 && step % J == j) continue;
      integrate(comps[static_cast<size_t>(j)], obs, true);
      segment_rooms(comps[static_cast<size_t>(j)]);
    }
    log.elapsed += cfg.scan_time;

    StepLog sl;
    sl.step = step;
    sl.pose = pose;
    const std::string tag = detail::step_tag(step);
    if (save) {
      sl.graph_ref = "graphs/" + tag + ".yaml";
      sl.grid_ref = "grid/" + tag + ".pgm";
      detail::write_text(fs::path(out_dir) / sl.graph_ref, serialize_yaml(full.graph));
      write_pgm(full.grid.to_raster(), (fs::path(out_dir) / sl.grid_ref).string());
    }

    if (log.traveled >= cfg.budget - 1e-9) {
      sl.traveled = log.traveled;
      sl.elapsed = log.elapsed;
      log.steps.push_back(std::move(sl));
      log.termination = "BudgetReached";
      break;
    }

    auto goals = rank_frontier_goals(full.grid, pose);
    std::erase_if(goals, [&](const FrontierGoal& g) {
      for (const Vec2& s : spent)
        if ((g.pose.position - s).norm() <= 1.5 * full.grid.resolution()) return true;
      return false;
    });
    // Single-speck clusters are usually quantization noise along walls; chase
    // them only after every larger frontier is gone.
    std::stable_partition(goals.begin(), goals.end(),
                          [](const FrontierGoal& g) { return g.cluster_size >= 3; });
    if (goals.empty()) {
      sl.traveled = log.traveled;
      sl.elapsed = log.elapsed;
      log.steps.push_back(std::move(sl));
      log.termination = "NoFrontiers";
      break;
    }

    const OccupancyGrid planning = detail::planning_grid(full.grid, pose.position, cfg.inflation);

    std::optional<Path> plan;
    if (cfg.policy == Policy::Semantic) {
      std::vector<std::vector<SceneGraph>> ensemble;
      ensemble.reserve(J);
      const auto t0 = std::chrono::steady_clock::now();
      for (int j = 0; j < J; ++j)
        ensemble.push_back(sampler(comps[static_cast<size_t>(j)].graph,
                                   cfg.ensemble.samples_per_graph,
                                   derive_seed(cfg.seed, static_cast<uint64_t>(step), j)));
      sampler_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (save) {
        const fs::path dir = fs::path(out_dir) / "ensembles" / tag;
        fs::create_directories(dir);
        sl.ensemble_ref = "ensembles/" + tag;
        for (int j = 0; j < J; ++j)
          for (size_t i = 0; i < ensemble[static_cast<size_t>(j)].size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "g%d_s%02zu.yaml", j, i);
            detail::write_text(dir / name,
                               serialize_yaml(ensemble[static_cast<size_t>(j)][i]));
          }
      }

      try {
        const ViewpointChoice choice = select_best_viewpoint(
            ensemble, planning, pose, cfg.gain, derive_seed(cfg.seed, 0x51e9u, step));
        if (save) {
          sl.gains_ref = "gains/" + tag + ".csv";
          std::ofstream csv(fs::path(out_dir) / sl.gains_ref, std::ios::binary);
          write_gain_csv(csv, choice.table);
        }
        if (choice.gain.i_total > 1e-12) {
          // Walk the candidates best-first until one is actually reachable.
          std::vector<CandidateGain> ranked = choice.table;
          std::sort(ranked.begin(), ranked.end(), [](const CandidateGain& a, const CandidateGain& b) {
            if (a.gain.i_total != b.gain.i_total) return a.gain.i_total > b.gain.i_total;
            return a.index < b.index;
          });
          int tried = 0;
          for (size_t k = 0; k < ranked.size() && !plan && tried < cfg.fallback_candidates;
               ++k) {
            if (ranked[k].gain.i_total <= 1e-12) break;
            // A pose we already scanned from yields the same panorama again;
            // spend the budget somewhere it can still buy information.
            const bool stale = std::any_of(scanned.begin(), scanned.end(), [&](const Vec2& s) {
              return (ranked[k].pose.position - s).norm() < 0.5;
            });
            if (stale) continue;
            ++tried;
            plan = detail::try_plan(planning, pose, ranked[k].pose.position, cfg.local_window);
            if (plan) {
              sl.policy = "semantic";
              sl.gain = ranked[k].gain.i_total;
              sl.goal = ranked[k].pose;
            }
          }
        }
      } catch (const Error& e) {
        if (e.code() != Errc::NoFreeSpace && e.code() != Errc::EmptyEnsemble &&
            e.code() != Errc::EmptySamples)
          throw;  // anything else is a real bug, not a degenerate step
      }
    }

    if (!plan) {
      // Geometric fallback (and the whole policy, in Frontier mode).
      sl.policy = cfg.policy == Policy::Semantic ? "frontier_fallback" : "frontier";
      for (const FrontierGoal& g : goals) {
        plan = detail::try_plan(planning, pose, g.pose.position, cfg.local_window);
        if (plan) {
          sl.goal = g.pose;
          break;
        }
      }
    }
    if (!plan) {
      // Frontiers remain but none is reachable at this robot radius.
      sl.traveled = log.traveled;
      sl.elapsed = log.elapsed;
      log.steps.push_back(std::move(sl));
      log.termination = "NoFrontiers";
      break;
    }

    FollowConfig fc;
    fc.speed = cfg.speed;
    fc.range = cfg.range;
    fc.noise = cfg.noise;
    fc.start_time = log.elapsed;
    fc.max_travel = cfg.budget - log.traveled;
    const FollowResult moved = follow_path(w, plan->waypoints, fc);
    for (const auto& o : moved.observations) integrate(full, o, true);
    if (!moved.observations.empty()) segment_rooms(full);

    log.traveled += moved.traveled;
    log.elapsed += moved.elapsed;
    sl.moved = moved.traveled > 1.5 * full.grid.resolution();
    sl.blocked = moved.blocked;

    // A goal we reached (or cannot approach at all) and that still leaves a
    // frontier is beyond sensing resolution; never chase it again.
    const double res = full.grid.resolution();
    if ((moved.final_pose.position - sl.goal.position).norm() <= 2 * res)
      spent.push_back(sl.goal.position);
    else if (!sl.moved &&
             (moved.blocked ||
              (prev_goal && (*prev_goal - sl.goal.position).norm() <= 1.5 * res)))
      spent.push_back(sl.goal.position);
    prev_goal = sl.goal.position;

    pose = moved.final_pose;
    sl.traveled = log.traveled;
    sl.elapsed = log.elapsed;
    log.steps.push_back(std::move(sl));
  }

  log.final_graph = full.graph;

  if (save) {
    std::ofstream jl(fs::path(out_dir) / "log.jsonl", std::ios::binary);
    for (const auto& s : log.steps) {
      nlohmann::json j{{"step", s.step},
                       {"x", s.pose.position.x},
                       {"y", s.pose.position.y},
                       {"yaw", s.pose.yaw},
                       {"traveled", s.traveled},
                       {"elapsed", s.elapsed},
                       {"policy", s.policy},
                       {"gain", s.gain},
                       {"goal_x", s.goal.position.x},
                       {"goal_y", s.goal.position.y},
                       {"moved", s.moved},
                       {"blocked", s.blocked},
                       {"graph", s.graph_ref},
                       {"grid", s.grid_ref},
                       {"gains", s.gains_ref},
                       {"ensemble", s.ensemble_ref}};
      jl << j.dump() << "\n";
    }
    jl.close();
    // Wall-clock numbers live apart from the replayable log on purpose.
    nlohmann::json timing{{"sampler_seconds", sampler_seconds}};
    detail::write_text(fs::path(out_dir) / "timings.json", timing.dump(2) + "\n");
  }
  return log;
}

}  // namespace sgexp
