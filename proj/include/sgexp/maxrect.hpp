#pragma once

#include <vector>

#include "sgexp/grid.hpp"

namespace sgexp {

struct CellRect {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; x1 < x0 means empty
  long long area = 0;
};

struct CellBox3 {
  int x0 = 0, y0 = 0, z0 = 0, x1 = -1, y1 = -1, z1 = -1;
  long long volume = 0;
};

namespace detail {

// Ties go to the lower-left corner, then to the wider rectangle.
inline bool rect_better(const CellRect& a, const CellRect& b) {
  if (a.area != b.area) return a.area > b.area;
  if (a.y0 != b.y0) return a.y0 < b.y0;
  if (a.x0 != b.x0) return a.x0 < b.x0;
  return (a.x1 - a.x0) > (b.x1 - b.x0);
}

inline bool box_better(const CellBox3& a, const CellBox3& b) {
  if (a.volume != b.volume) return a.volume > b.volume;
  if (a.z0 != b.z0) return a.z0 < b.z0;
  if (a.y0 != b.y0) return a.y0 < b.y0;
  if (a.x0 != b.x0) return a.x0 < b.x0;
  if ((a.x1 - a.x0) != (b.x1 - b.x0)) return (a.x1 - a.x0) > (b.x1 - b.x0);
  return (a.y1 - a.y0) > (b.y1 - b.y0);
}

}  // namespace detail

struct HistRect {
  long long area = 0;
  int lo = 0, hi = -1;  // inclusive column interval; hi < lo means empty
};

// Max area = width × min-height over a column interval. Ties prefer the
// leftmost interval, then the widest.
inline HistRect largest_rectangle_histogram(const std::vector<int>& heights) {
  HistRect best;
  const int n = static_cast<int>(heights.size());
  std::vector<int> stack;
  auto height_at = [&](int i) { return i < n ? heights[i] : 0; };
  for (int i = 0; i <= n; ++i) {
    while (!stack.empty() && height_at(stack.back()) > height_at(i)) {
      long long h = height_at(stack.back());
      stack.pop_back();
      int left = stack.empty() ? 0 : stack.back() + 1;
      HistRect cand{h * (i - left), left, i - 1};
      if (cand.area > best.area ||
          (cand.area == best.area &&
           (cand.lo < best.lo || (cand.lo == best.lo && cand.hi > best.hi))))
        best = cand;
    }
    stack.push_back(i);
  }
  return best;
}

// Largest all-true axis-aligned rectangle in a row-major mask, via the
// per-row histogram-of-heights sweep.
inline CellRect largest_rectangle(const std::vector<uint8_t>& mask, int w, int h) {
  CellRect best;
  std::vector<int> heights(static_cast<size_t>(w) + 1, 0);
  std::vector<int> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      heights[x] = mask[static_cast<size_t>(y) * w + x] ? heights[x] + 1 : 0;
    heights[w] = 0;  // sentinel flushes the stack
    stack.clear();
    for (int x = 0; x <= w; ++x) {
      while (!stack.empty() && heights[stack.back()] > heights[x]) {
        int hh = heights[stack.back()];
        stack.pop_back();
        int left = stack.empty() ? 0 : stack.back() + 1;
        CellRect cand{left, y - hh + 1, x - 1, y, static_cast<long long>(hh) * (x - left)};
        if (detail::rect_better(cand, best)) best = cand;
      }
      stack.push_back(x);
    }
  }
  return best;
}

// Largest cuboid of cells satisfying pred. Every z-interval [z0, z1] is
// reduced to a 2D AND-mask (incrementally as z1 grows) and solved with the
// rectangle sweep; volume 0 comes back when nothing qualifies.
template <typename Pred>
inline CellBox3 largest_cell_box(const VoxelGrid3& g, Pred&& pred) {
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  std::vector<std::vector<uint8_t>> layers(nz);
  for (int z = 0; z < nz; ++z) {
    layers[z].assign(static_cast<size_t>(nx) * ny, 0);
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        layers[z][static_cast<size_t>(y) * nx + x] = pred(g.at(x, y, z)) ? 1 : 0;
  }
  CellBox3 best;
  std::vector<uint8_t> mask;
  for (int z0 = 0; z0 < nz; ++z0) {
    mask.assign(static_cast<size_t>(nx) * ny, 1);
    for (int z1 = z0; z1 < nz; ++z1) {
      bool any = false;
      for (size_t i = 0; i < mask.size(); ++i) {
        mask[i] &= layers[z1][i];
        any |= mask[i] != 0;
      }
      if (!any) break;
      if (best.volume >= static_cast<long long>(nx) * ny * (nz - z0)) break;
      CellRect r = largest_rectangle(mask, nx, ny);
      if (r.area <= 0) break;
      CellBox3 cand{r.x0, r.y0, z0, r.x1, r.y1, z1, r.area * (z1 - z0 + 1)};
      if (detail::box_better(cand, best)) best = cand;
    }
  }
  return best;
}

// Unknown cells do not count as empty; only confirmed-Free space qualifies.
inline CellBox3 largest_empty_cuboid(const VoxelGrid3& g) {
  return largest_cell_box(g, [](Cell c) { return c == Cell::Free; });
}

// World-coordinate box spanned by a cell box.
inline Aabb3 cell_box_bounds(const VoxelGrid3& g, const CellBox3& b) {
  double r = g.resolution();
  const Vec3& o = g.origin();
  return {{o.x + b.x0 * r, o.y + b.y0 * r, o.z + b.z0 * r},
          {o.x + (b.x1 + 1) * r, o.y + (b.y1 + 1) * r, o.z + (b.z1 + 1) * r}};
}

}  // namespace sgexp
