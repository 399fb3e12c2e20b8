#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "sgexp/scene_graph.hpp"
#include "sgexp/voxel.hpp"

namespace sgexp {

struct WallFitConfig {
  double inlier_dist = 0.05;
  int min_inliers = 25;
  double cluster_link = 0.3;
  int min_cluster_points = 15;
  int iterations = 200;
  int max_planes = 12;
};

namespace detail {

// Flip so the leading nonzero component is positive; keeps plane identity
// stable across runs.
inline void canonicalize_plane(Vec3& n, double& offset) {
  bool flip = n.x < -1e-9 || (std::abs(n.x) <= 1e-9 && n.y < -1e-9) ||
              (std::abs(n.x) <= 1e-9 && std::abs(n.y) <= 1e-9 && n.z < 0);
  if (flip) {
    n = n * -1.0;
    offset = -offset;
  }
}

// Single-linkage clusters via a spatial hash at the link radius.
inline std::vector<std::vector<size_t>> euclidean_clusters(const std::vector<Vec3>& pts,
                                                           double link) {
  std::vector<size_t> parent(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) parent[i] = i;
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::tuple<int, int, int>, std::vector<size_t>> buckets;
  auto key = [&](const Vec3& p) {
    return std::make_tuple(static_cast<int>(std::floor(p.x / link)),
                           static_cast<int>(std::floor(p.y / link)),
                           static_cast<int>(std::floor(p.z / link)));
  };
  for (size_t i = 0; i < pts.size(); ++i) buckets[key(pts[i])].push_back(i);
  const double link2 = link * link;
  for (size_t i = 0; i < pts.size(); ++i) {
    auto [kx, ky, kz] = key(pts[i]);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find({kx + dx, ky + dy, kz + dz});
          if (it == buckets.end()) continue;
          for (size_t j : it->second) {
            if (j <= i) continue;
            Vec3 d = pts[j] - pts[i];
            if (d.dot(d) <= link2) {
              size_t ri = find(i), rj = find(j);
              if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
          }
        }
  }
  std::map<size_t, std::vector<size_t>> groups;
  for (size_t i = 0; i < pts.size(); ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace detail

// Iterative RANSAC plane extraction: best plane by inlier count, Euclidean
// clustering of its inliers so two wall pieces on one infinite plane stay
// separate boxes, then repeat on the residual points.
inline std::vector<StructureNode> fit_wall_planes(const std::vector<Vec3>& points,
                                                  const WallFitConfig& cfg, uint64_t seed) {
  if (points.size() < 3) throw Error(Errc::TooFewPoints, "plane fitting needs at least 3 points");
  Rng rng(derive_seed(seed, 0x3a11u));
  std::vector<size_t> residual(points.size());
  for (size_t i = 0; i < residual.size(); ++i) residual[i] = i;

  std::vector<StructureNode> out;
  int planes = 0;
  while (static_cast<int>(residual.size()) >= cfg.min_inliers && planes < cfg.max_planes) {
    Vec3 best_n;
    double best_off = 0;
    size_t best_count = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
      size_t ia = residual[rng.uniform_int(residual.size())];
      size_t ib = residual[rng.uniform_int(residual.size())];
      size_t ic = residual[rng.uniform_int(residual.size())];
      if (ia == ib || ib == ic || ia == ic) continue;
      Vec3 n = (points[ib] - points[ia]).cross(points[ic] - points[ia]);
      double len = n.norm();
      if (len < 1e-9) continue;
      n = n * (1.0 / len);
      double off = n.dot(points[ia]);
      size_t count = 0;
      for (size_t idx : residual)
        if (std::abs(n.dot(points[idx]) - off) <= cfg.inlier_dist) ++count;
      if (count > best_count) {
        best_count = count;
        best_n = n;
        best_off = off;
      }
    }
    if (best_count < static_cast<size_t>(cfg.min_inliers)) break;
    ++planes;

    std::vector<size_t> inliers, rest;
    for (size_t idx : residual) {
      if (std::abs(best_n.dot(points[idx]) - best_off) <= cfg.inlier_dist)
        inliers.push_back(idx);
      else
        rest.push_back(idx);
    }
    detail::canonicalize_plane(best_n, best_off);

    std::vector<Vec3> inlier_pts;
    inlier_pts.reserve(inliers.size());
    for (size_t idx : inliers) inlier_pts.push_back(points[idx]);
    for (const auto& cluster : detail::euclidean_clusters(inlier_pts, cfg.cluster_link)) {
      if (static_cast<int>(cluster.size()) < cfg.min_cluster_points) continue;
      std::vector<Vec3> cpts;
      cpts.reserve(cluster.size());
      for (size_t k : cluster) cpts.push_back(inlier_pts[k]);
      StructureNode sn;
      sn.kind = StructureKind::Wall;
      sn.plane_normal = best_n;
      sn.plane_offset = best_off;
      sn.box = fit_point_box(cpts, 0.02);
      sn.observation_count = 1;
      out.push_back(std::move(sn));
    }
    residual = std::move(rest);
  }
  return out;
}

}  // namespace sgexp
