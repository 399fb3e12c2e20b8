#pragma once

#include <httplib.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sgexp/completion.hpp"
#include "sgexp/raster.hpp"
#include "sgexp/scene_io.hpp"

// Bridge to an external completion service. The service receives the scene
// as YAML plus cross-section images and answers with a completed YAML scene;
// everything it returns is screened against the evidence before use, and the
// catalog prior stands in whenever the service is down or keeps producing
// rejected output.

namespace sgexp {
namespace detail {

inline std::string base64_encode(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const uint32_t v = (static_cast<uint8_t>(bytes[i]) << 16) |
                       (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                       static_cast<uint8_t>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  const size_t rest = bytes.size() - i;
  if (rest == 1) {
    const uint32_t v = static_cast<uint8_t>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const uint32_t v =
        (static_cast<uint8_t>(bytes[i]) << 16) | (static_cast<uint8_t>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

// Observed content must come through a completion untouched; comparing the
// stripped serializations catches deletions, edits, and nodes smuggled in
// with observed provenance alike.
inline bool preserves_observed(const SceneGraph& current, const SceneGraph& completed) {
  return serialize_yaml(current.observed_only()) == serialize_yaml(completed.observed_only());
}

}  // namespace detail

struct AdapterConfig {
  std::string endpoint = "http://127.0.0.1:8750";
  std::string path = "/complete";
  double timeout_s = 120;
  std::string generate_template = "share/prompts/generate.txt";
  std::string refine_template = "share/prompts/refine.txt";
  int max_rejections = 2;  // re-queries after a rejected response
  // Height bands for the cross-section images sent along with the YAML.
  std::vector<std::pair<double, double>> bands{{0.0, 0.3}, {0.3, 0.5}};
  double raster_resolution = 0.05;
};

class LlmAdapter {
 public:
  explicit LlmAdapter(AdapterConfig cfg, PriorSampler fallback = {})
      : cfg_(std::move(cfg)), fallback_(std::move(fallback)) {}

  const std::vector<std::string>& warnings() const { return warnings_; }

  std::vector<SceneGraph> sample(const SceneGraph& current, int m, uint64_t seed) {
    warnings_.clear();
    if (m <= 0) throw Error(Errc::ConfigError, "sample count must be positive");

    std::string gen_prompt, ref_prompt;
    if (!read_file(cfg_.generate_template, gen_prompt) ||
        !read_file(cfg_.refine_template, ref_prompt)) {
      warnings_.push_back("prompt templates unreadable; using catalog prior");
      return fallback_.sample(current, m, seed);
    }

    const std::string graph_yaml = serialize_yaml(current);
    nlohmann::json rasters = nlohmann::json::array();
    for (const auto& [lo, hi] : cfg_.bands)
      rasters.push_back(
          detail::base64_encode(pgm_bytes(cross_section_raster(current, lo, hi,
                                                               cfg_.raster_resolution))));

    std::vector<SceneGraph> out;
    out.reserve(static_cast<size_t>(m));
    bool service_down = false;
    for (int i = 0; i < m; ++i) {
      SceneGraph g;
      bool accepted = false;
      for (int attempt = 0; attempt <= cfg_.max_rejections && !accepted && !service_down;
           ++attempt) {
        std::string proposed;
        if (!exchange(graph_yaml, rasters, gen_prompt, proposed) ||
            !exchange(proposed, rasters, ref_prompt, proposed)) {
          service_down = true;
          break;
        }
        try {
          g = deserialize_yaml(proposed);
          g.validate();
        } catch (const Error& e) {
          warnings_.push_back("sample " + std::to_string(i) + " attempt " +
                              std::to_string(attempt) + " rejected: " + e.what());
          continue;
        }
        if (!detail::preserves_observed(current, g)) {
          warnings_.push_back("sample " + std::to_string(i) + " attempt " +
                              std::to_string(attempt) + " rejected: observed content altered");
          continue;
        }
        const auto violations = consistency_check(current, g);
        if (!violations.empty()) {
          warnings_.push_back("sample " + std::to_string(i) + " attempt " +
                              std::to_string(attempt) + " rejected: " + violations.front().detail);
          continue;
        }
        accepted = true;
      }
      if (service_down) break;
      if (accepted) {
        out.push_back(std::move(g));
      } else {
        warnings_.push_back("sample " + std::to_string(i) +
                            " exhausted re-queries; using catalog prior");
        out.push_back(fallback_.sample(current, 1, derive_seed(seed, 0xfa11u, i)).front());
      }
    }

    if (service_down && static_cast<int>(out.size()) < m) {
      warnings_.push_back("completion service unavailable; using catalog prior");
      const auto rest =
          fallback_.sample(current, m - static_cast<int>(out.size()), derive_seed(seed, 0xfa11u));
      out.insert(out.end(), rest.begin(), rest.end());
    }
    return out;
  }

 private:
  static bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
  }

  // One request/response round trip. False means the service could not be
  // reached or answered with something other than a completion.
  bool exchange(const std::string& graph_yaml, const nlohmann::json& rasters,
                const std::string& prompt, std::string& reply) {
    httplib::Client client(cfg_.endpoint);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    const auto usecs = static_cast<time_t>((cfg_.timeout_s - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    nlohmann::json req;
    req["graph_yaml"] = graph_yaml;
    req["rasters"] = rasters;
    req["prompt"] = prompt;
    auto res = client.Post(cfg_.path, req.dump(), "application/json");
    if (!res || res->status != 200) return false;
    try {
      const auto body = nlohmann::json::parse(res->body);
      if (!body.contains("graph_yaml") || !body["graph_yaml"].is_string()) return false;
      reply = body["graph_yaml"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return false;
    }
    return true;
  }

  AdapterConfig cfg_;
  PriorSampler fallback_;
  std::vector<std::string> warnings_;
};

}  // namespace sgexp
