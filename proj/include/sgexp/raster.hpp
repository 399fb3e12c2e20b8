#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sgexp/scene_graph.hpp"

namespace sgexp {

// Grayscale top-down image. Row 0 is the bottom of the scene (lowest y);
// write_pgm flips so files render the usual way up.
struct Raster {
  int width = 0;
  int height = 0;
  Vec2 origin;  // world position of the outer corner of pixel (0, 0)
  double resolution = 0.05;
  std::vector<uint8_t> px;

  uint8_t& at(int ix, int iy) { return px[static_cast<size_t>(iy) * width + ix]; }
  uint8_t at(int ix, int iy) const { return px[static_cast<size_t>(iy) * width + ix]; }
  Vec2 cell_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }
};

constexpr uint8_t kShadeStructure = 40;
constexpr uint8_t kShadeObject = 128;
constexpr uint8_t kShadeNothing = 220;
constexpr uint8_t kShadeEmpty = 255;

namespace detail {

inline bool band_overlaps(double z0, double z1, double lo, double hi) {
  return z0 < hi && z1 > lo;
}

inline Aabb2 graph_bounds_xy(const SceneGraph& g) {
  Aabb2 b;
  for (const auto& [id, r] : g.rooms)
    for (const auto& p : r.footprint) b.expand(p);
  for (const auto& [id, o] : g.objects)
    for (const auto& c : o.box().footprint()) b.expand(c);
  for (const auto& [id, n] : g.nothings) {
    b.expand(n.box.lo.xy());
    b.expand(n.box.hi.xy());
  }
  for (const auto& [id, s] : g.structures)
    for (const auto& c : s.box.footprint()) b.expand(c);
  return b;
}

}  // namespace detail

// Horizontal slice of the graph through [z_lo, z_hi). Structures paint darkest
// and win overlaps, then objects, then free-space evidence; everything else
// stays white. An empty graph yields a single white pixel.
inline Raster cross_section_raster(const SceneGraph& g, double z_lo, double z_hi,
                                   double resolution = 0.05) {
  Raster r;
  r.resolution = resolution;
  Aabb2 b = detail::graph_bounds_xy(g);
  if (b.lo.x > b.hi.x) {
    r.width = r.height = 1;
    r.origin = {0, 0};
    r.px.assign(1, kShadeEmpty);
    return r;
  }
  b = b.padded(0.5);
  r.origin = b.lo;
  r.width = std::max(1, static_cast<int>(std::ceil(b.width() / resolution)));
  r.height = std::max(1, static_cast<int>(std::ceil(b.height() / resolution)));
  r.px.assign(static_cast<size_t>(r.width) * r.height, kShadeEmpty);

  auto paint = [&](const Aabb2& area, uint8_t shade, auto&& inside) {
    int x0 = std::max(0, static_cast<int>(std::floor((area.lo.x - r.origin.x) / resolution)));
    int y0 = std::max(0, static_cast<int>(std::floor((area.lo.y - r.origin.y) / resolution)));
    int x1 = std::min(r.width - 1,
                      static_cast<int>(std::floor((area.hi.x - r.origin.x) / resolution)));
    int y1 = std::min(r.height - 1,
                      static_cast<int>(std::floor((area.hi.y - r.origin.y) / resolution)));
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) {
        if (r.at(ix, iy) <= shade) continue;  // darker shade already there
        if (inside(r.cell_center(ix, iy))) r.at(ix, iy) = shade;
      }
  };

  for (const auto& [id, n] : g.nothings) {
    if (!detail::band_overlaps(n.box.lo.z, n.box.hi.z, z_lo, z_hi)) continue;
    Aabb2 a{n.box.lo.xy(), n.box.hi.xy()};
    paint(a, kShadeNothing, [&](const Vec2& p) { return a.contains(p); });
  }
  for (const auto& [id, o] : g.objects) {
    ObbXY box = o.box();
    if (!detail::band_overlaps(box.z_lo(), box.z_hi(), z_lo, z_hi)) continue;
    paint(box.aabb_xy(), kShadeObject, [&](const Vec2& p) { return box.contains_xy(p); });
  }
  for (const auto& [id, s] : g.structures) {
    if (!detail::band_overlaps(s.box.z_lo(), s.box.z_hi(), z_lo, z_hi)) continue;
    const ObbXY& box = s.box;
    paint(box.aabb_xy(), kShadeStructure, [&](const Vec2& p) { return box.contains_xy(p); });
  }
  return r;
}

inline void write_pgm(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path);
  out << "P5\n" << r.width << " " << r.height << "\n255\n";
  for (int iy = r.height - 1; iy >= 0; --iy)
    out.write(reinterpret_cast<const char*>(&r.px[static_cast<size_t>(iy) * r.width]), r.width);
  if (!out) throw Error(Errc::IoError, "short write: " + path);
}

inline std::string pgm_bytes(const Raster& r) {
  std::string out = "P5\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
  for (int iy = r.height - 1; iy >= 0; --iy)
    out.append(reinterpret_cast<const char*>(&r.px[static_cast<size_t>(iy) * r.width]), r.width);
  return out;
}

inline Raster read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(Errc::ParseError, "not a P5 pgm: " + path);
  int w, h, maxval;
  in >> w >> h >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval != 255)
    throw Error(Errc::ParseError, "bad pgm header: " + path);
  in.get();  // single whitespace byte before the raster
  Raster r;
  r.width = w;
  r.height = h;
  r.px.assign(static_cast<size_t>(w) * h, 0);
  for (int iy = h - 1; iy >= 0; --iy)
    in.read(reinterpret_cast<char*>(&r.px[static_cast<size_t>(iy) * w]), w);
  if (!in) throw Error(Errc::ParseError, "truncated pgm: " + path);
  return r;
}

}  // namespace sgexp
