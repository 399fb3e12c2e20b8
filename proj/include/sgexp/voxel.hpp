#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"

namespace sgexp {

// Sparse voxel occupancy on a world-aligned lattice: cell (i, j, k) spans
// [i*r, (i+1)*r) per axis.
struct VoxelSet {
  double resolution = 0.1;
  std::set<std::array<int, 3>> cells;

  void insert_point(const Vec3& p) {
    cells.insert({static_cast<int>(std::floor(p.x / resolution)),
                  static_cast<int>(std::floor(p.y / resolution)),
                  static_cast<int>(std::floor(p.z / resolution))});
  }
  Vec3 center_of(const std::array<int, 3>& c) const {
    return {(c[0] + 0.5) * resolution, (c[1] + 0.5) * resolution, (c[2] + 0.5) * resolution};
  }
  bool empty() const { return cells.empty(); }
  size_t size() const { return cells.size(); }

  void merge(const VoxelSet& other) { cells.insert(other.cells.begin(), other.cells.end()); }
};

namespace detail {

inline size_t intersection_size(const VoxelSet& a, const VoxelSet& b) {
  const VoxelSet& small = a.size() <= b.size() ? a : b;
  const VoxelSet& big = a.size() <= b.size() ? b : a;
  size_t n = 0;
  for (const auto& c : small.cells) n += big.cells.count(c);
  return n;
}

}  // namespace detail

inline double voxel_iou(const VoxelSet& a, const VoxelSet& b) {
  if (a.resolution != b.resolution)
    throw Error(Errc::ResolutionMismatch, "voxel resolutions differ");
  if (a.empty() && b.empty()) throw Error(Errc::BothEmpty, "both voxel sets empty");
  size_t inter = detail::intersection_size(a, b);
  size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Fraction of the smaller set shared with the other; 0 when either is empty.
inline double voxel_containment(const VoxelSet& a, const VoxelSet& b) {
  if (a.resolution != b.resolution)
    throw Error(Errc::ResolutionMismatch, "voxel resolutions differ");
  size_t small = std::min(a.size(), b.size());
  if (small == 0) return 0.0;
  return static_cast<double>(detail::intersection_size(a, b)) / static_cast<double>(small);
}

namespace detail {

// Monotone-chain convex hull; returns CCW without the closing point.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

// Minimum-volume box with yaw-only rotation covering every point, expanded by
// `pad` on all sides. The optimal orientation puts one side flush with a
// convex-hull edge of the points, so only hull-edge angles (mod π/2) are
// tried. Yaw is normalized into [0, π/2) and ties go to the smallest yaw.
inline ObbXY fit_point_box(const std::vector<Vec3>& points, double pad) {
  if (points.empty()) throw Error(Errc::BothEmpty, "cannot fit a box to no points");
  std::vector<Vec2> pts;
  double z_lo = 1e300, z_hi = -1e300;
  pts.reserve(points.size());
  for (const auto& p : points) {
    pts.push_back(p.xy());
    z_lo = std::min(z_lo, p.z);
    z_hi = std::max(z_hi, p.z);
  }
  std::vector<Vec2> hull = detail::convex_hull(pts);

  std::vector<double> yaws;
  if (hull.size() < 2) {
    yaws.push_back(0.0);
  } else {
    for (size_t i = 0; i < hull.size(); ++i) {
      Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
      if (hull.size() == 2 && i == 1) break;
      double a = std::fmod(std::atan2(e.y, e.x), kPi / 2);
      if (a < 0) a += kPi / 2;
      yaws.push_back(a);
    }
    std::sort(yaws.begin(), yaws.end());
  }

  double best_area = 1e300, best_yaw = 0;
  Vec2 best_lo, best_hi;
  for (double yaw : yaws) {
    double c = std::cos(yaw), s = std::sin(yaw);
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& p : hull.empty() ? pts : hull) {
      Vec2 q{c * p.x + s * p.y, -s * p.x + c * p.y};
      lo.x = std::min(lo.x, q.x);
      lo.y = std::min(lo.y, q.y);
      hi.x = std::max(hi.x, q.x);
      hi.y = std::max(hi.y, q.y);
    }
    double area = (hi.x - lo.x + 2 * pad) * (hi.y - lo.y + 2 * pad);
    if (area < best_area - 1e-12) {
      best_area = area;
      best_yaw = yaw;
      best_lo = lo;
      best_hi = hi;
    }
  }

  double c = std::cos(best_yaw), s = std::sin(best_yaw);
  Vec2 mid{(best_lo.x + best_hi.x) / 2, (best_lo.y + best_hi.y) / 2};
  ObbXY box;
  box.center = {c * mid.x - s * mid.y, s * mid.x + c * mid.y, (z_lo + z_hi) / 2};
  box.half = {(best_hi.x - best_lo.x) / 2 + pad, (best_hi.y - best_lo.y) / 2 + pad,
              (z_hi - z_lo) / 2 + pad};
  box.yaw = best_yaw;
  return box;
}

// Tightest yaw-only box covering the voxel cubes of a set.
inline ObbXY fit_box(const VoxelSet& vs) {
  if (vs.empty()) throw Error(Errc::BothEmpty, "cannot fit a box to an empty voxel set");
  std::vector<Vec3> centers;
  centers.reserve(vs.size());
  for (const auto& c : vs.cells) centers.push_back(vs.center_of(c));
  return fit_point_box(centers, vs.resolution / 2);
}

}  // namespace sgexp
