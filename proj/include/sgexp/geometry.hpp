#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "sgexp/core.hpp"

namespace sgexp {

struct Vec2 {
  double x = 0, y = 0;
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
  Vec2 xy() const { return {x, y}; }
};

struct Aabb2 {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  bool empty() const { return lo.x > hi.x || lo.y > hi.y; }
  void expand(const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  void expand(const Aabb2& b) {
    if (b.empty()) return;
    expand(b.lo);
    expand(b.hi);
  }
  Aabb2 padded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  bool overlaps(const Aabb2& o) const {
    return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y;
  }
  Vec2 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2}; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
};

struct Aabb3 {
  Vec3 lo, hi;
  double volume() const {
    return std::max(0.0, hi.x - lo.x) * std::max(0.0, hi.y - lo.y) * std::max(0.0, hi.z - lo.z);
  }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
  bool overlaps(const Aabb3& o) const {
    return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y && lo.z < o.hi.z &&
           o.lo.z < hi.z;
  }
  Vec3 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2, (lo.z + hi.z) / 2}; }
};

// Box with yaw rotation about the z axis only.
struct ObbXY {
  Vec3 center;
  Vec3 half{1, 1, 1};
  double yaw = 0;

  std::array<Vec2, 4> footprint() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec2 ax{c * half.x, s * half.x};
    const Vec2 ay{-s * half.y, c * half.y};
    const Vec2 ctr{center.x, center.y};
    return {ctr + ax + ay, ctr - ax + ay, ctr - ax - ay, ctr + ax - ay};
  }

  double z_lo() const { return center.z - half.z; }
  double z_hi() const { return center.z + half.z; }

  // Point expressed in the box frame (yaw removed).
  Vec3 to_local(const Vec3& p) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec3 d = p - center;
    return {c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
  }

  bool contains(const Vec3& p) const {
    const Vec3 l = to_local(p);
    return std::abs(l.x) <= half.x && std::abs(l.y) <= half.y && std::abs(l.z) <= half.z;
  }

  bool contains_xy(const Vec2& p) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double dx = p.x - center.x, dy = p.y - center.y;
    return std::abs(c * dx + s * dy) <= half.x && std::abs(-s * dx + c * dy) <= half.y;
  }

  Aabb2 aabb_xy() const {
    Aabb2 b;
    for (const auto& p : footprint()) b.expand(p);
    return b;
  }

  Aabb3 aabb() const {
    Aabb2 f = aabb_xy();
    return {{f.lo.x, f.lo.y, z_lo()}, {f.hi.x, f.hi.y, z_hi()}};
  }
};

using Polygon = std::vector<Vec2>;

inline double polygon_area(const Polygon& poly) {
  double a = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.cross(q);
  }
  return a / 2;
}

inline Vec2 polygon_centroid(const Polygon& poly) {
  double a = 0, cx = 0, cy = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double w = p.cross(q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  if (std::abs(a) < 1e-12) {  // degenerate: mean of vertices
    Vec2 m{};
    for (const auto& p : poly) m = m + p;
    return poly.empty() ? m : m * (1.0 / poly.size());
  }
  return {cx / (3 * a), cy / (3 * a)};
}

inline Aabb2 polygon_aabb(const Polygon& poly) {
  Aabb2 b;
  for (const auto& p : poly) b.expand(p);
  return b;
}

// Crossing-number test; boundary points count as inside.
inline bool point_in_polygon(const Vec2& p, const Polygon& poly) {
  if (poly.size() < 3) return false;
  bool inside = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    // on-segment check
    const Vec2 ab = b - a;
    const Vec2 ap = p - a;
    const double cr = ab.cross(ap);
    if (std::abs(cr) < 1e-12 && ap.dot(ab) >= -1e-12 && (p - b).dot(a - b) >= -1e-12) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q - p).cross(r - p);
    return v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
  };
  auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) - 1e-12 <= r.x && r.x <= std::max(p.x, q.x) + 1e-12 &&
           std::min(p.y, q.y) - 1e-12 <= r.y && r.y <= std::max(p.y, q.y) + 1e-12;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(a, b, c)) return true;
  if (o2 == 0 && on_seg(a, b, d)) return true;
  if (o3 == 0 && on_seg(c, d, a)) return true;
  if (o4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

// Non-adjacent edge pairs must not intersect.
inline bool polygon_is_simple(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

// Keeps the side where normal.dot(p) >= offset.
inline Polygon clip_halfplane(const Polygon& poly, const Vec2& normal, double offset) {
  Polygon out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double da = normal.dot(a) - offset;
    const double db = normal.dot(b) - offset;
    if (da >= 0) out.push_back(a);
    if ((da > 0 && db < 0) || (da < 0 && db > 0)) {
      const double t = da / (da - db);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

// Sutherland-Hodgman; clip polygon must be convex and CCW.
inline Polygon clip_convex(const Polygon& subject, const Polygon& convex_clip) {
  Polygon out = subject;
  const size_t n = convex_clip.size();
  for (size_t i = 0; i < n && !out.empty(); ++i) {
    const Vec2 a = convex_clip[i];
    const Vec2 b = convex_clip[(i + 1) % n];
    const Vec2 edge = b - a;
    const Vec2 inward{-edge.y, edge.x};
    out = clip_halfplane(out, inward, inward.dot(a));
  }
  return out;
}

inline double convex_overlap_area(const Polygon& a, const Polygon& b) {
  const Polygon c = clip_convex(a, b);
  return c.size() < 3 ? 0.0 : std::abs(polygon_area(c));
}

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

inline double dist_point_polygon(const Vec2& p, const Polygon& poly) {
  if (poly.size() >= 3 && point_in_polygon(p, poly)) return 0;
  double d = std::numeric_limits<double>::max();
  for (size_t i = 0; i < poly.size(); ++i)
    d = std::min(d, dist_point_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

inline Polygon rect_polygon(const Aabb2& b) {
  return {{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}};
}

inline Polygon to_polygon(const std::array<Vec2, 4>& corners) {
  return Polygon(corners.begin(), corners.end());
}

inline Polygon translated(const Polygon& poly, const Vec2& d) {
  Polygon out = poly;
  for (auto& p : out) p = p + d;
  return out;
}

// Slab test for a 3D segment against a yaw-oriented box. Returns entry/exit
// parameters in [0,1] through hit_t when intersecting.
inline bool segment_intersects_obb(const Vec3& a, const Vec3& b, const ObbXY& box,
                                   double* t_enter = nullptr, double* t_exit = nullptr) {
  const Vec3 la = box.to_local(a);
  const Vec3 lb = box.to_local(b);
  const Vec3 d = lb - la;
  double t0 = 0.0, t1 = 1.0;
  const double lo[3] = {-box.half.x, -box.half.y, -box.half.z};
  const double hi[3] = {box.half.x, box.half.y, box.half.z};
  const double p[3] = {la.x, la.y, la.z};
  const double dir[3] = {d.x, d.y, d.z};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dir[i]) < 1e-15) {
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    } else {
      double ta = (lo[i] - p[i]) / dir[i];
      double tb = (hi[i] - p[i]) / dir[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
  }
  if (t_enter) *t_enter = t0;
  if (t_exit) *t_exit = t1;
  return true;
}

// 2D ray vs oriented box footprint; returns nearest hit parameter (>= 0) or
// infinity when the ray misses.
inline double ray_hit_obb_xy(const Vec2& origin, const Vec2& dir, const ObbXY& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double ox = origin.x - box.center.x, oy = origin.y - box.center.y;
  const double lox = c * ox + s * oy, loy = -s * ox + c * oy;
  const double ldx = c * dir.x + s * dir.y, ldy = -s * dir.x + c * dir.y;
  double t0 = 0.0, t1 = std::numeric_limits<double>::max();
  const double p[2] = {lox, loy};
  const double d[2] = {ldx, ldy};
  const double h[2] = {box.half.x, box.half.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (p[i] < -h[i] || p[i] > h[i]) return std::numeric_limits<double>::max();
    } else {
      double ta = (-h[i] - p[i]) / d[i];
      double tb = (h[i] - p[i]) / d[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return std::numeric_limits<double>::max();
    }
  }
  return t0;
}

// True when some point of `poly` lies within the sensing wedge: distance to
// `origin` at most `range` and bearing within fov/2 of `yaw`. Handles any fov
// in (0, 2pi] by splitting into two half-wedges, each at most pi wide.
inline bool polygon_in_wedge(const Polygon& poly, const Vec2& origin, double yaw, double fov,
                             double range) {
  if (poly.empty()) return false;
  if (fov >= kTwoPi - 1e-9) return dist_point_polygon(origin, poly) <= range;
  auto half_wedge_hit = [&](double a_lo, double a_hi) {
    // clip by the two bounding rays of [a_lo, a_hi] (width <= pi)
    const Vec2 n_lo{-std::sin(a_lo), std::cos(a_lo)};   // keeps angle >= a_lo
    const Vec2 n_hi{std::sin(a_hi), -std::cos(a_hi)};   // keeps angle <= a_hi
    Polygon c = clip_halfplane(poly, n_lo, n_lo.dot(origin));
    if (c.empty()) return false;
    c = clip_halfplane(c, n_hi, n_hi.dot(origin));
    if (c.empty()) return false;
    if (c.size() < 3) {
      double d = std::numeric_limits<double>::max();
      for (const auto& p : c) d = std::min(d, (p - origin).norm());
      if (c.size() == 2) d = std::min(d, dist_point_segment(origin, c[0], c[1]));
      return d <= range;
    }
    return dist_point_polygon(origin, c) <= range;
  };
  const double h = std::min(fov / 2, kPi - 1e-12);
  return half_wedge_hit(yaw - h, yaw) || half_wedge_hit(yaw, yaw + h);
}

}  // namespace sgexp
