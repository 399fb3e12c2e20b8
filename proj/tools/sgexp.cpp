// Command-line front end: generate a world and explore it, evaluate a run
// against ground truth, sample completions of a partial graph, or render
// height-band cross sections. Everything lands as files for later inspection.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgexp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sgexp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f << text;
}

SamplerFn make_sampler(const RunConfig& cfg) {
  if (cfg.sampler == SamplerChoice::Adapter) {
    auto adapter = std::make_shared<LlmAdapter>(cfg.adapter);
    return [adapter](const SceneGraph& g, int m, uint64_t seed) {
      return adapter->sample(g, m, seed);
    };
  }
  return [ps = PriorSampler{}](const SceneGraph& g, int m, uint64_t seed) {
    return ps.sample(g, m, seed);
  };
}

int cmd_explore(const RunConfig& cfg) {
  const World world = generate_world(cfg.world);
  fs::create_directories(cfg.out);
  const EpisodeLog log = run_episode(world, cfg.episode, cfg.out, make_sampler(cfg));

  MatchSpec ms;
  const F1Score f1 = object_f1(log.final_graph, world.truth_graph, ms);
  const GedResult ged = graph_edit_distance(log.final_graph, world.truth_graph, ms);

  json summary{{"traveled", log.traveled},
               {"elapsed", log.elapsed},
               {"termination", log.termination},
               {"final_f1", f1.f1},
               {"final_ged", ged.cost}};
  spill(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
  std::printf("%s\n", summary.dump().c_str());
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& log_dir, const std::string& out_dir) {
  const World world = generate_world(cfg.world);
  const MatchSpec ms;
  const auto curve = metrics_curve(log_dir, world.truth_graph, ms);
  if (curve.empty()) throw Error(Errc::EmptySamples, "episode log has no steps");

  const fs::path out = out_dir.empty() ? fs::path(log_dir) : fs::path(out_dir);
  fs::create_directories(out);

  std::ostringstream csv;
  csv << "step,traveled,elapsed,precision,recall,f1,ged,ged_exact\n";
  auto row = [&](const std::string& tag, const MetricPoint& p) {
    csv << tag << ',' << format_double(p.traveled) << ',' << format_double(p.elapsed) << ','
        << format_double(p.precision) << ',' << format_double(p.recall) << ','
        << format_double(p.f1) << ',' << format_double(p.ged) << ',' << (p.ged_exact ? 1 : 0)
        << '\n';
  };
  for (const auto& p : curve) row(std::to_string(p.step), p);
  // Cuts at fractions of the total path length, same columns.
  for (const int pct : {10, 50, 100})
    row(std::to_string(pct) + "%", curve_at_fraction(curve, pct / 100.0));
  spill(out / "metrics.csv", csv.str());

  // Room predictions per step, wherever the episode saved an ensemble.
  json rooms = json::array();
  std::ifstream jl(fs::path(log_dir) / "log.jsonl");
  if (!jl) throw Error(Errc::IoError, "cannot read " + (fs::path(log_dir) / "log.jsonl").string());
  std::string line;
  while (std::getline(jl, line)) {
    if (line.empty()) continue;
    json step;
    try {
      step = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, std::string("log.jsonl: ") + e.what());
    }
    const std::string ens_ref = step.value("ensemble", "");
    if (ens_ref.empty()) continue;
    std::vector<SceneGraph> samples;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(fs::path(log_dir) / ens_ref))
      if (entry.path().extension() == ".yaml") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) samples.push_back(deserialize_yaml(slurp(f.string())));
    if (samples.empty()) continue;
    json preds = json::array();
    for (const auto& rp : room_prediction_success(samples, world.truth_graph, ms))
      preds.push_back(json{{"label", rp.label},
                           {"x", rp.centroid.x},
                           {"y", rp.centroid.y},
                           {"support", rp.support},
                           {"confident", rp.confident},
                           {"success", rp.success}});
    rooms.push_back(json{{"step", step.value("step", -1)}, {"predictions", preds}});
  }
  spill(out / "rooms.json", rooms.dump(2) + "\n");
  std::printf("wrote %s and %s\n", (out / "metrics.csv").string().c_str(),
              (out / "rooms.json").string().c_str());
  return kExitOk;
}

int cmd_complete(const RunConfig& cfg, const std::string& graph_path, int samples) {
  const SceneGraph current = deserialize_yaml(slurp(graph_path));
  fs::create_directories(cfg.out);
  const auto completions = make_sampler(cfg)(current, samples, cfg.episode.seed);

  json report = json::array();
  for (size_t i = 0; i < completions.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%02zu.yaml", i);
    spill(fs::path(cfg.out) / name, serialize_yaml(completions[i]));
    json viols = json::array();
    for (const auto& v : consistency_check(current, completions[i]))
      viols.push_back(json{{"kind", to_string(v.kind)}, {"node", v.node}, {"detail", v.detail}});
    report.push_back(json{{"sample", i}, {"violations", viols}});
  }
  spill(fs::path(cfg.out) / "consistency.json", report.dump(2) + "\n");
  std::printf("wrote %zu completions to %s\n", completions.size(), cfg.out.c_str());
  return kExitOk;
}

int cmd_render(const RunConfig& cfg, const std::string& graph_path, const std::string& bands_arg) {
  const SceneGraph g = deserialize_yaml(slurp(graph_path));

  std::vector<std::pair<double, double>> bands;
  std::stringstream ss(bands_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw Error(Errc::ConfigError, "band must be lo:hi, got " + tok);
    try {
      bands.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "band must be numeric lo:hi, got " + tok);
    }
    if (bands.back().first >= bands.back().second)
      throw Error(Errc::ConfigError, "band lo must be below hi: " + tok);
  }
  if (bands.empty()) throw Error(Errc::ConfigError, "no bands given");

  fs::create_directories(cfg.out);
  for (size_t i = 0; i < bands.size(); ++i) {
    const Raster r = cross_section_raster(g, bands[i].first, bands[i].second,
                                          cfg.adapter.raster_resolution);
    char name[32];
    std::snprintf(name, sizeof name, "band%zu.pgm", i);
    write_pgm(r, (fs::path(cfg.out) / name).string());
  }
  std::printf("wrote %zu rasters to %s\n", bands.size(), cfg.out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene-graph exploration toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override, policy, sampler_name;
  int64_t seed = -1;
  app.add_option("--config", config_path, "YAML run configuration");
  app.add_option("--seed", seed, "override world and episode seed");
  app.add_option("--out", out_override, "override output directory");

  auto* explore = app.add_subcommand("explore", "generate a world and run one episode");
  double budget = -1;
  explore->add_option("--policy", policy, "semantic or frontier");
  explore->add_option("--budget", budget, "path length budget in meters");
  explore->add_option("--sampler", sampler_name, "prior or adapter");

  auto* evaluate = app.add_subcommand("evaluate", "score an episode log against ground truth");
  std::string log_dir;
  evaluate->add_option("--log", log_dir, "episode output directory")->required();

  auto* complete = app.add_subcommand("complete", "sample completions of a partial graph");
  std::string graph_path;
  int samples = 4;
  complete->add_option("--graph", graph_path, "scene graph YAML")->required();
  complete->add_option("--samples", samples, "completions to draw");
  complete->add_option("--sampler", sampler_name, "prior or adapter");

  auto* render = app.add_subcommand("render", "rasterize height-band cross sections");
  std::string render_graph, bands = "0:0.3,0.3:0.5";
  render->add_option("--graph", render_graph, "scene graph YAML")->required();
  render->add_option("--bands", bands, "comma-separated lo:hi height bands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (seed >= 0) {
      cfg.world.seed = static_cast<uint64_t>(seed);
      cfg.episode.seed = static_cast<uint64_t>(seed);
    }
    if (!out_override.empty()) cfg.out = out_override;
    if (!policy.empty()) {
      if (policy == "semantic")
        cfg.episode.policy = Policy::Semantic;
      else if (policy == "frontier")
        cfg.episode.policy = Policy::Frontier;
      else
        throw Error(Errc::ConfigError, "policy must be semantic or frontier, got " + policy);
    }
    if (!sampler_name.empty()) {
      if (sampler_name == "prior")
        cfg.sampler = SamplerChoice::Prior;
      else if (sampler_name == "adapter")
        cfg.sampler = SamplerChoice::Adapter;
      else
        throw Error(Errc::ConfigError, "sampler must be prior or adapter, got " + sampler_name);
    }
    if (budget > 0) cfg.episode.budget = budget;

    if (explore->parsed()) return cmd_explore(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg, log_dir, out_override);
    if (complete->parsed()) return cmd_complete(cfg, graph_path, samples);
    if (render->parsed()) return cmd_render(cfg, render_graph, bands);
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Errc::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
