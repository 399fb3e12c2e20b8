// Geometry primitives checked against brute-force counterparts: polygon
// predicates vs an independent ray-parity oracle, clipping vs closed-form
// overlap areas, and the maximal-rectangle/cuboid search vs exhaustive
// enumeration of every candidate box.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sgexp/core.hpp"
#include "sgexp/geometry.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/maxrect.hpp"

using namespace sgexp;

namespace {

// Every rectangle in the mask, checked cell by cell. Quadratic in area but
// honest; the production code answers with a histogram sweep. Bounds are
// inclusive to match CellRect.
CellRect brute_largest_rectangle(const std::vector<uint8_t>& mask, int w, int h) {
  CellRect best;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0)
      for (int y1 = y0; y1 < h; ++y1)
        for (int x1 = x0; x1 < w; ++x1) {
          bool full = true;
          for (int y = y0; y <= y1 && full; ++y)
            for (int x = x0; x <= x1 && full; ++x) full = mask[static_cast<size_t>(y) * w + x];
          if (!full) continue;
          CellRect r{x0, y0, x1, y1,
                     static_cast<long long>(x1 - x0 + 1) * (y1 - y0 + 1)};
          if (detail::rect_better(r, best)) best = r;
        }
  return best;
}

CellBox3 brute_largest_cuboid(const VoxelGrid3& g) {
  CellBox3 best;
  for (int z0 = 0; z0 < g.nz(); ++z0)
    for (int y0 = 0; y0 < g.ny(); ++y0)
      for (int x0 = 0; x0 < g.nx(); ++x0)
        for (int z1 = z0; z1 < g.nz(); ++z1)
          for (int y1 = y0; y1 < g.ny(); ++y1)
            for (int x1 = x0; x1 < g.nx(); ++x1) {
              bool full = true;
              for (int z = z0; z <= z1 && full; ++z)
                for (int y = y0; y <= y1 && full; ++y)
                  for (int x = x0; x <= x1 && full; ++x) full = g.at(x, y, z) == Cell::Free;
              if (!full) continue;
              CellBox3 b{x0,
                         y0,
                         z0,
                         x1,
                         y1,
                         z1,
                         static_cast<long long>(x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1)};
              if (detail::box_better(b, best)) best = b;
            }
  return best;
}

}  // namespace

TEST_CASE("angle wrapping stays in the principal range") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50, 50);
    const double w = wrap_angle(a);
    REQUIRE(w >= -kPi);
    REQUIRE(w < kPi + 1e-12);
    // Same angle modulo a full turn.
    REQUIRE(std::abs(std::sin(w) - std::sin(a)) < 1e-9);
    REQUIRE(std::abs(std::cos(w) - std::cos(a)) < 1e-9);
  }
  REQUIRE(ang_dist(0.1, -0.1) == Catch::Approx(0.2));
  REQUIRE(ang_dist(kPi - 0.05, -kPi + 0.05) == Catch::Approx(0.1));
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-8, 8));
    REQUIRE(std::stod(format_double(v)) == v);
  }
  REQUIRE(format_double(0.0) == "0");
  REQUIRE(format_double(-0.0) == "0");
}

TEST_CASE("polygon area and centroid on hand shapes") {
  // Unit square at the origin: area 1, centroid at its middle.
  const Polygon square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  REQUIRE(polygon_area(square) == Catch::Approx(1.0));
  REQUIRE(polygon_centroid(square).x == Catch::Approx(0.5));
  REQUIRE(polygon_centroid(square).y == Catch::Approx(0.5));

  // 3-4-5 right triangle: shoelace area is signed, so the reversed winding
  // flips the sign while the magnitude stays 6.
  const Polygon tri{{0, 0}, {4, 0}, {0, 3}};
  REQUIRE(polygon_area(tri) == Catch::Approx(6.0));
  Polygon rev(tri.rbegin(), tri.rend());
  REQUIRE(polygon_area(rev) == Catch::Approx(-6.0));

  // L of three unit squares: centroid by decomposition is (5/6, 5/6) for
  // squares at (0,0), (1,0), (0,1).
  const Polygon ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  REQUIRE(polygon_area(ell) == Catch::Approx(3.0));
  const Vec2 c = polygon_centroid(ell);
  REQUIRE(c.x == Catch::Approx(5.0 / 6.0));
  REQUIRE(c.y == Catch::Approx(5.0 / 6.0));
}

TEST_CASE("point_in_polygon agrees with a ray-parity oracle") {
  // Non-convex test shape; probe points on a grid that avoids the edges.
  const Polygon ell{{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 3}, {0, 3}};
  auto oracle = [&](const Vec2& p) {
    // Cast with a slightly tilted direction so no vertex is hit head-on.
    int hits = 0;
    const Vec2 dir{1.0, 0.0001};
    for (size_t i = 0; i < ell.size(); ++i) {
      const Vec2& a = ell[i];
      const Vec2& b = ell[(i + 1) % ell.size()];
      const double denom = dir.x * (b.y - a.y) - dir.y * (b.x - a.x);
      if (std::abs(denom) < 1e-15) continue;
      const double t = ((a.x - p.x) * (b.y - a.y) - (a.y - p.y) * (b.x - a.x)) / denom;
      const double u = (dir.x * (a.y - p.y) - dir.y * (a.x - p.x)) / -denom;
      if (t > 0 && u >= 0 && u < 1) ++hits;
    }
    return hits % 2 == 1;
  };
  for (double y = -0.55; y < 3.6; y += 0.1)
    for (double x = -0.55; x < 3.6; x += 0.1) {
      const Vec2 p{x, y};
      REQUIRE(point_in_polygon(p, ell) == oracle(p));
    }
}

TEST_CASE("segment intersection on hand cases") {
  REQUIRE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  REQUIRE_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  // Shared endpoint counts as touching.
  REQUIRE(segments_intersect({0, 0}, {1, 1}, {1, 1}, {2, 0}));
  // Collinear overlap.
  REQUIRE(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));
  // Collinear but disjoint.
  REQUIRE_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}

TEST_CASE("polygon simplicity check") {
  REQUIRE(polygon_is_simple({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  // Bowtie crosses itself.
  REQUIRE_FALSE(polygon_is_simple({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
  REQUIRE_FALSE(polygon_is_simple({{0, 0}, {1, 0}}));
}

TEST_CASE("convex clipping matches the closed form for axis boxes") {
  // For axis-aligned rectangles the overlap area has a closed form; the
  // clipping pipeline must reproduce it.
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const double ax = rng.uniform(-5, 5), ay = rng.uniform(-5, 5);
    const double bx = rng.uniform(-5, 5), by = rng.uniform(-5, 5);
    const Aabb2 a{{ax, ay}, {ax + rng.uniform(0.2, 4), ay + rng.uniform(0.2, 4)}};
    const Aabb2 b{{bx, by}, {bx + rng.uniform(0.2, 4), by + rng.uniform(0.2, 4)}};
    const double ox = std::max(0.0, std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x));
    const double oy = std::max(0.0, std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y));
    REQUIRE(convex_overlap_area(rect_polygon(a), rect_polygon(b)) ==
            Catch::Approx(ox * oy).margin(1e-9));
  }
}

TEST_CASE("distance to segment and polygon") {
  REQUIRE(dist_point_segment({0, 1}, {-1, 0}, {1, 0}) == Catch::Approx(1.0));
  // Beyond the endpoint the answer is the endpoint distance.
  REQUIRE(dist_point_segment({3, 4}, {-1, 0}, {0, 0}) == Catch::Approx(5.0));
  const Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  REQUIRE(dist_point_polygon({3, 1}, square) == Catch::Approx(1.0));
  REQUIRE(dist_point_polygon({1, 1}, square) == Catch::Approx(0.0));  // inside
}

TEST_CASE("oriented box containment and ray casting") {
  // Square of half-extent 1 rotated 45 degrees around the origin.
  const ObbXY box{{0, 0, 0.5}, {1, 1, 0.5}, kPi / 4};
  REQUIRE(box.contains_xy({0, 0}));
  // Its corner sits at sqrt(2) along the world x axis.
  REQUIRE(box.contains_xy({std::sqrt(2.0) - 1e-6, 0}));
  REQUIRE_FALSE(box.contains_xy({std::sqrt(2.0) + 1e-6, 0}));
  REQUIRE_FALSE(box.contains_xy({1.01, 1.01}));

  // A ray from (-3, 0) along +x enters at x = -sqrt(2).
  const double t = ray_hit_obb_xy({-3, 0}, {1, 0}, box);
  REQUIRE(t == Catch::Approx(3 - std::sqrt(2.0)).margin(1e-9));
  // Miss: parallel ray offset far above reports no finite hit.
  REQUIRE(ray_hit_obb_xy({-3, 5}, {1, 0}, box) > 1e9);
}

TEST_CASE("histogram rectangle matches exhaustive interval pricing") {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(10));
    std::vector<int> h(static_cast<size_t>(n));
    for (auto& v : h) v = static_cast<int>(rng.uniform_int(6));
    const HistRect got = largest_rectangle_histogram(h);
    // Exhaustive: every column interval priced by its minimum height.
    long long best = 0;
    for (int l = 0; l < n; ++l) {
      int mh = h[static_cast<size_t>(l)];
      for (int r = l; r < n; ++r) {
        mh = std::min(mh, h[static_cast<size_t>(r)]);
        best = std::max(best, static_cast<long long>(mh) * (r - l + 1));
      }
    }
    REQUIRE(got.area == best);
    if (got.area > 0) {
      // The reported interval must actually support the reported area.
      int mh = h[static_cast<size_t>(got.lo)];
      for (int x = got.lo; x <= got.hi; ++x) mh = std::min(mh, h[static_cast<size_t>(x)]);
      REQUIRE(static_cast<long long>(mh) * (got.hi - got.lo + 1) >= got.area);
    }
  }
}

TEST_CASE("largest rectangle in random masks matches brute force") {
  Rng rng(15);
  for (int trial = 0; trial < 150; ++trial) {
    const int w = 1 + static_cast<int>(rng.uniform_int(8));
    const int h = 1 + static_cast<int>(rng.uniform_int(8));
    std::vector<uint8_t> mask(static_cast<size_t>(w) * h);
    for (auto& m : mask) m = rng.uniform() < 0.6 ? 1 : 0;
    const CellRect got = largest_rectangle(mask, w, h);
    const CellRect want = brute_largest_rectangle(mask, w, h);
    REQUIRE(got.area == want.area);
    if (want.area > 0) {
      REQUIRE(got.x0 == want.x0);
      REQUIRE(got.y0 == want.y0);
      REQUIRE(got.x1 == want.x1);
      REQUIRE(got.y1 == want.y1);
    }
  }
}

TEST_CASE("largest empty cuboid matches exhaustive search on random grids") {
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const int nx = 1 + static_cast<int>(rng.uniform_int(6));
    const int ny = 1 + static_cast<int>(rng.uniform_int(6));
    const int nz = 1 + static_cast<int>(rng.uniform_int(6));
    VoxelGrid3 g({{0, 0, 0}, {nx * 0.1, ny * 0.1, nz * 0.1}}, 0.1);
    // Each cell is written once, so the write-once transition out of
    // Unknown gives exactly the sampled pattern.
    for (int z = 0; z < g.nz(); ++z)
      for (int y = 0; y < g.ny(); ++y)
        for (int x = 0; x < g.nx(); ++x)
          g.mark(x, y, z, rng.uniform() < 0.65 ? Cell::Free : Cell::Occupied);
    const CellBox3 got = largest_empty_cuboid(g);
    const CellBox3 want = brute_largest_cuboid(g);
    REQUIRE(got.volume == want.volume);
    if (want.volume > 0) {
      REQUIRE(got.x0 == want.x0);
      REQUIRE(got.y0 == want.y0);
      REQUIRE(got.z0 == want.z0);
      REQUIRE(got.x1 == want.x1);
      REQUIRE(got.y1 == want.y1);
      REQUIRE(got.z1 == want.z1);
    }
  }
}

TEST_CASE("cuboid search on a handmade cavity") {
  // 5x5x4 solid block with a 3x3x1 slab carved at z=1 and a 3x1x2 notch at
  // the far wall. The slab wins: volume 9 over 6.
  VoxelGrid3 g({{0, 0, 0}, {0.5, 0.5, 0.4}}, 0.1);
  auto carved = [](int x, int y, int z) {
    if (z == 1 && x >= 1 && x <= 3 && y >= 1 && y <= 3) return true;
    return (z == 2 || z == 3) && y == 4 && x <= 2;
  };
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x)
        g.mark(x, y, z, carved(x, y, z) ? Cell::Free : Cell::Occupied);

  const CellBox3 got = largest_empty_cuboid(g);
  REQUIRE(got.volume == 9);
  REQUIRE(got.x0 == 1);
  REQUIRE(got.y0 == 1);
  REQUIRE(got.z0 == 1);
  REQUIRE(got.x1 == 3);
  REQUIRE(got.y1 == 3);
  REQUIRE(got.z1 == 1);

  // World-coordinate bounds follow from origin and resolution; the upper
  // bound is the far face of the inclusive end cell.
  const Aabb3 b = cell_box_bounds(g, got);
  REQUIRE(b.lo.x == Catch::Approx(0.1));
  REQUIRE(b.hi.x == Catch::Approx(0.4));
  REQUIRE(b.lo.z == Catch::Approx(0.1));
  REQUIRE(b.hi.z == Catch::Approx(0.2));
}

TEST_CASE("wedge visibility test") {
  const Polygon sq{{2, -0.5}, {3, -0.5}, {3, 0.5}, {2, 0.5}};
  // Facing +x with a 90 degree cone: in view.
  REQUIRE(polygon_in_wedge(sq, {0, 0}, 0, kPi / 2, 5));
  // Facing -x: behind.
  REQUIRE_FALSE(polygon_in_wedge(sq, {0, 0}, kPi, kPi / 2, 5));
  // Out of range.
  REQUIRE_FALSE(polygon_in_wedge(sq, {0, 0}, 0, kPi / 2, 1.5));
}
