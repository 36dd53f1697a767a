#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>

namespace cutwave {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Uniform Cartesian background grid on [x0,x1] x [y0,y1].
struct BackgroundGrid {
  double x0 = -1.0, x1 = 1.0;
  double y0 = -1.0, y1 = 1.0;
  int nx = 1, ny = 1;

  double dx() const { return (x1 - x0) / nx; }
  double dy() const { return (y1 - y0) / ny; }
  double cell_area() const { return dx() * dy(); }

  double line_x(int i) const { return i == nx ? x1 : x0 + i * dx(); }
  double line_y(int j) const { return j == ny ? y1 : y0 + j * dy(); }

  // Continuous cell coordinates; floor() gives the cell index.
  double fx(double x) const { return (x - x0) / dx(); }
  double fy(double y) const { return (y - y0) / dy(); }
  int ix(double x) const { return static_cast<int>(std::floor(fx(x))); }
  int iy(double y) const { return static_cast<int>(std::floor(fy(y))); }

  int cell_id(int i, int j) const { return j * nx + i; }
  int cell_count() const { return nx * ny; }
  bool contains_cell(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  Vec2 cell_lo(int i, int j) const { return {line_x(i), line_y(j)}; }
  Vec2 cell_hi(int i, int j) const { return {line_x(i + 1), line_y(j + 1)}; }
  Vec2 cell_center(int i, int j) const { return 0.5 * (cell_lo(i, j) + cell_hi(i, j)); }
};

// Axis-aligned bounding box.
struct Box2 {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max()};

  void extend(const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Vec2 center() const { return 0.5 * (lo + hi); }
  Vec2 half_widths() const { return 0.5 * (hi - lo); }
};

} // namespace cutwave
