#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sgexp/raster.hpp"

namespace sgexp {

enum class Cell : uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Tri-state 2D grid. Occupied evidence dominates Free, which dominates
// Unknown. The grid grows by reallocation when marks land outside it; cells
// stay on one world lattice, so growth only shifts the origin by whole cells.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Aabb2& bounds, double resolution)
      : origin_(bounds.lo), res_(resolution) {
    width_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / resolution)));
    height_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / resolution)));
    cells_.assign(static_cast<size_t>(width_) * height_, Cell::Unknown);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return res_; }
  const Vec2& origin() const { return origin_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  Cell at(int ix, int iy) const {
    return in_bounds(ix, iy) ? cells_[index(ix, iy)] : Cell::Unknown;
  }
  void set(int ix, int iy, Cell c) {
    if (in_bounds(ix, iy)) cells_[index(ix, iy)] = c;
  }
  // Occupied sticks; Free only overwrites Unknown.
  void mark(int ix, int iy, Cell c) {
    if (!in_bounds(ix, iy)) return;
    Cell& cur = cells_[index(ix, iy)];
    if (c == Cell::Occupied)
      cur = Cell::Occupied;
    else if (c == Cell::Free && cur == Cell::Unknown)
      cur = Cell::Free;
  }

  void cell_of(const Vec2& p, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor((p.x - origin_.x) / res_));
    iy = static_cast<int>(std::floor((p.y - origin_.y) / res_));
  }
  Vec2 center_of(int ix, int iy) const {
    return {origin_.x + (ix + 0.5) * res_, origin_.y + (iy + 0.5) * res_};
  }
  Cell at_world(const Vec2& p) const {
    int ix, iy;
    cell_of(p, ix, iy);
    return at(ix, iy);
  }
  void mark_world(const Vec2& p, Cell c) {
    int ix, iy;
    cell_of(p, ix, iy);
    mark(ix, iy, c);
  }

  // Reallocates so that p (padded) is inside; existing cells keep their world
  // positions. Growth is chunked to whole cells, so the lattice never shifts.
  void ensure(const Vec2& p, double pad = 1.0) {
    int grow_lo_x = 0, grow_lo_y = 0, grow_hi_x = 0, grow_hi_y = 0;
    auto cells_needed = [&](double d) { return static_cast<int>(std::ceil(d / res_)); };
    if (p.x - pad < origin_.x) grow_lo_x = cells_needed(origin_.x - (p.x - pad));
    if (p.y - pad < origin_.y) grow_lo_y = cells_needed(origin_.y - (p.y - pad));
    if (p.x + pad > origin_.x + width_ * res_)
      grow_hi_x = cells_needed(p.x + pad - (origin_.x + width_ * res_));
    if (p.y + pad > origin_.y + height_ * res_)
      grow_hi_y = cells_needed(p.y + pad - (origin_.y + height_ * res_));
    if (!grow_lo_x && !grow_lo_y && !grow_hi_x && !grow_hi_y) return;
    int nw = width_ + grow_lo_x + grow_hi_x;
    int nh = height_ + grow_lo_y + grow_hi_y;
    std::vector<Cell> nc(static_cast<size_t>(nw) * nh, Cell::Unknown);
    for (int iy = 0; iy < height_; ++iy)
      for (int ix = 0; ix < width_; ++ix)
        nc[static_cast<size_t>(iy + grow_lo_y) * nw + ix + grow_lo_x] = cells_[index(ix, iy)];
    origin_.x -= grow_lo_x * res_;
    origin_.y -= grow_lo_y * res_;
    width_ = nw;
    height_ = nh;
    cells_ = std::move(nc);
  }

  size_t count(Cell c) const {
    size_t n = 0;
    for (Cell x : cells_)
      if (x == c) ++n;
    return n;
  }

  // Every occupied cell grows into a disc of the given radius. Unknown stays
  // unknown so planners keep treating it as impassable for its own reason.
  OccupancyGrid inflated(double radius) const {
    OccupancyGrid out = *this;
    int r = static_cast<int>(std::ceil(radius / res_));
    double r2 = (radius / res_) * (radius / res_) + 1e-9;
    for (int iy = 0; iy < height_; ++iy)
      for (int ix = 0; ix < width_; ++ix) {
        if (cells_[index(ix, iy)] != Cell::Occupied) continue;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy > r2) continue;
            if (out.in_bounds(ix + dx, iy + dy) &&
                out.cells_[out.index(ix + dx, iy + dy)] == Cell::Free)
              out.cells_[out.index(ix + dx, iy + dy)] = Cell::Occupied;
          }
      }
    return out;
  }

  Raster to_raster() const {
    Raster r;
    r.width = width_;
    r.height = height_;
    r.origin = origin_;
    r.resolution = res_;
    r.px.resize(cells_.size());
    for (size_t i = 0; i < cells_.size(); ++i)
      r.px[i] = cells_[i] == Cell::Occupied ? 0 : cells_[i] == Cell::Free ? 255 : 127;
    return r;
  }

  bool operator==(const OccupancyGrid& o) const {
    return width_ == o.width_ && height_ == o.height_ && origin_.x == o.origin_.x &&
           origin_.y == o.origin_.y && res_ == o.res_ && cells_ == o.cells_;
  }

 private:
  size_t index(int ix, int iy) const { return static_cast<size_t>(iy) * width_ + ix; }

  Vec2 origin_;
  double res_ = 0.05;
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
};

// Visits every cell the segment passes through, in order from a to b
// (Amanatides-Woo traversal). Stops early if fn returns false.
template <typename Fn>
inline void walk_cells(const OccupancyGrid& g, const Vec2& a, const Vec2& b, Fn&& fn) {
  double res = g.resolution();
  double ax = (a.x - g.origin().x) / res, ay = (a.y - g.origin().y) / res;
  double bx = (b.x - g.origin().x) / res, by = (b.y - g.origin().y) / res;
  int ix = static_cast<int>(std::floor(ax)), iy = static_cast<int>(std::floor(ay));
  int ix_end = static_cast<int>(std::floor(bx)), iy_end = static_cast<int>(std::floor(by));
  double dx = bx - ax, dy = by - ay;
  int step_x = dx > 0 ? 1 : dx < 0 ? -1 : 0;
  int step_y = dy > 0 ? 1 : dy < 0 ? -1 : 0;
  double t_dx = step_x ? std::abs(1.0 / dx) : std::numeric_limits<double>::infinity();
  double t_dy = step_y ? std::abs(1.0 / dy) : std::numeric_limits<double>::infinity();
  double next_x = step_x > 0 ? (std::floor(ax) + 1 - ax) * t_dx
                 : step_x < 0 ? (ax - std::floor(ax)) * t_dx
                              : std::numeric_limits<double>::infinity();
  double next_y = step_y > 0 ? (std::floor(ay) + 1 - ay) * t_dy
                 : step_y < 0 ? (ay - std::floor(ay)) * t_dy
                              : std::numeric_limits<double>::infinity();
  long long guard = 4LL * (g.width() + g.height() + 2);
  for (long long i = 0; i < guard; ++i) {
    if (!fn(ix, iy)) return;
    if (ix == ix_end && iy == iy_end) return;
    if (next_x < next_y) {
      ix += step_x;
      next_x += t_dx;
    } else {
      iy += step_y;
      next_y += t_dy;
    }
  }
}

// 3D tri-state array for the free-space cuboid search; grows in x/y like the
// 2D grid while the z span stays fixed at construction.
class VoxelGrid3 {
 public:
  VoxelGrid3() = default;
  VoxelGrid3(const Aabb3& bounds, double resolution) : origin_(bounds.lo), res_(resolution) {
    nx_ = std::max(1, static_cast<int>(std::ceil((bounds.hi.x - bounds.lo.x) / resolution)));
    ny_ = std::max(1, static_cast<int>(std::ceil((bounds.hi.y - bounds.lo.y) / resolution)));
    nz_ = std::max(1, static_cast<int>(std::ceil((bounds.hi.z - bounds.lo.z) / resolution)));
    cells_.assign(static_cast<size_t>(nx_) * ny_ * nz_, Cell::Unknown);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double resolution() const { return res_; }
  const Vec3& origin() const { return origin_; }

  bool in_bounds(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < nx_ && iy < ny_ && iz < nz_;
  }
  Cell at(int ix, int iy, int iz) const {
    return in_bounds(ix, iy, iz) ? cells_[index(ix, iy, iz)] : Cell::Unknown;
  }
  void mark(int ix, int iy, int iz, Cell c) {
    if (!in_bounds(ix, iy, iz)) return;
    Cell& cur = cells_[index(ix, iy, iz)];
    if (c == Cell::Occupied)
      cur = Cell::Occupied;
    else if (c == Cell::Free && cur == Cell::Unknown)
      cur = Cell::Free;
  }
  void cell_of(const Vec3& p, int& ix, int& iy, int& iz) const {
    ix = static_cast<int>(std::floor((p.x - origin_.x) / res_));
    iy = static_cast<int>(std::floor((p.y - origin_.y) / res_));
    iz = static_cast<int>(std::floor((p.z - origin_.z) / res_));
  }
  Vec3 center_of(int ix, int iy, int iz) const {
    return {origin_.x + (ix + 0.5) * res_, origin_.y + (iy + 0.5) * res_,
            origin_.z + (iz + 0.5) * res_};
  }

  void ensure(const Vec2& p, double pad = 1.0) {
    int lo_x = 0, lo_y = 0, hi_x = 0, hi_y = 0;
    auto cells_needed = [&](double d) { return static_cast<int>(std::ceil(d / res_)); };
    if (p.x - pad < origin_.x) lo_x = cells_needed(origin_.x - (p.x - pad));
    if (p.y - pad < origin_.y) lo_y = cells_needed(origin_.y - (p.y - pad));
    if (p.x + pad > origin_.x + nx_ * res_)
      hi_x = cells_needed(p.x + pad - (origin_.x + nx_ * res_));
    if (p.y + pad > origin_.y + ny_ * res_)
      hi_y = cells_needed(p.y + pad - (origin_.y + ny_ * res_));
    if (!lo_x && !lo_y && !hi_x && !hi_y) return;
    int nnx = nx_ + lo_x + hi_x, nny = ny_ + lo_y + hi_y;
    std::vector<Cell> nc(static_cast<size_t>(nnx) * nny * nz_, Cell::Unknown);
    for (int iz = 0; iz < nz_; ++iz)
      for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix)
          nc[(static_cast<size_t>(iz) * nny + iy + lo_y) * nnx + ix + lo_x] =
              cells_[index(ix, iy, iz)];
    origin_.x -= lo_x * res_;
    origin_.y -= lo_y * res_;
    nx_ = nnx;
    ny_ = nny;
    cells_ = std::move(nc);
  }

  void mark_world(const Vec3& p, Cell c) {
    int ix, iy, iz;
    cell_of(p, ix, iy, iz);
    mark(ix, iy, iz, c);
  }
  Cell at_world(const Vec3& p) const {
    int ix, iy, iz;
    cell_of(p, ix, iy, iz);
    return at(ix, iy, iz);
  }

 private:
  size_t index(int ix, int iy, int iz) const {
    return (static_cast<size_t>(iz) * ny_ + iy) * nx_ + ix;
  }

  Vec3 origin_;
  double res_ = 0.1;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<Cell> cells_;
};

}  // namespace sgexp
