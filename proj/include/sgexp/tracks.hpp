#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "sgexp/voxel.hpp"
#include "sgexp/world.hpp"

namespace sgexp {

struct Track {
  int64_t id = 0;
  std::string label;
  VoxelSet voxels;  // running union over associated detections
  double last_seen = 0;
  int hit_count = 0;
  NodeId node = kNoNode;  // object this track maintains in the graph
};

struct Association {
  std::vector<std::pair<size_t, size_t>> matches;  // (track index, detection index)
  std::vector<size_t> unmatched_detections;
  std::vector<size_t> terminated_tracks;
};

// Greedy one-to-one matching, best IoU first, restricted to same-label pairs
// at or above iou_min. IoU ties prefer the older track, then the earlier
// detection. Tracks silent for more than tau seconds come back as terminated.
inline Association associate_tracks(const std::vector<Track>& tracks,
                                    const std::vector<Detection>& detections, double now,
                                    double iou_min, double tau) {
  struct Cand {
    double iou;
    size_t track, det;
  };
  std::vector<Cand> cands;
  for (size_t ti = 0; ti < tracks.size(); ++ti)
    for (size_t di = 0; di < detections.size(); ++di) {
      if (tracks[ti].label != detections[di].label) continue;
      if (tracks[ti].voxels.empty() || detections[di].voxels.empty()) continue;
      double iou = voxel_iou(tracks[ti].voxels, detections[di].voxels);
      if (iou >= iou_min) cands.push_back({iou, ti, di});
    }
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (tracks[a.track].id != tracks[b.track].id) return tracks[a.track].id < tracks[b.track].id;
    return a.det < b.det;
  });

  Association out;
  std::vector<bool> track_used(tracks.size(), false), det_used(detections.size(), false);
  for (const auto& c : cands) {
    if (track_used[c.track] || det_used[c.det]) continue;
    track_used[c.track] = true;
    det_used[c.det] = true;
    out.matches.push_back({c.track, c.det});
  }
  for (size_t di = 0; di < detections.size(); ++di)
    if (!det_used[di]) out.unmatched_detections.push_back(di);
  for (size_t ti = 0; ti < tracks.size(); ++ti)
    if (!track_used[ti] && now - tracks[ti].last_seen > tau) out.terminated_tracks.push_back(ti);
  return out;
}

}  // namespace sgexp
