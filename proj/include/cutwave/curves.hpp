#pragma once

#include "cutwave/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cutwave {

// Side of the curve (relative to increasing s) on which the fluid lies.
enum class FluidSide { Left, Right };

// A closed boundary piece c(s), s in [0,1], with explicit derivative and
// stop points. Stop points mark corners and junctions; faces never straddle them.
struct ParametricCurve {
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> derivative;
  std::vector<double> stop_points;
  FluidSide fluid_side = FluidSide::Right;
  std::string name;

  Vec2 operator()(double s) const { return position(s); }
};

// Curve from a position map alone; derivative by central differences (h = 1e-7 in s).
ParametricCurve make_curve(std::function<Vec2(double)> position,
                           std::vector<double> stop_points,
                           FluidSide side,
                           std::string name = "custom");

// Built-in constructors. `fluid_outside` selects which side is the PDE domain.
// All closed constructors are traversed counterclockwise.
ParametricCurve circle(const Vec2& center, double radius, bool fluid_outside = true);
ParametricCurve ellipse(const Vec2& center, double ax, double ay, bool fluid_outside = true);

// Circle with the sector |theta| < half_angle removed, mouth facing +x.
// Stop points at the two mouth corners and the apex.
ParametricCurve pacman(const Vec2& center, double radius, double half_angle, bool fluid_outside = true);

struct LineSegment {
  Vec2 a, b;
};
struct ArcSegment {
  Vec2 center;
  double radius;
  double theta0, theta1; // traversed from theta0 to theta1 (sign gives direction)
};
struct CurvePiece {
  enum class Kind { Line, Arc } kind;
  LineSegment line{};
  ArcSegment arc{};
};

// Closed piecewise curve of lines and arcs. Each junction becomes a stop point;
// s is proportional to arclength.
ParametricCurve piecewise_curve(const std::vector<CurvePiece>& pieces, bool fluid_outside = true,
                                std::string name = "piecewise");

// Periodic cubic spline through tabulated samples (s_i, x_i, y_i). The samples need
// not repeat the first point; s is rescaled to [0,1]. Optional corner s-values are stop points.
ParametricCurve spline_curve(std::vector<double> s, std::vector<double> x, std::vector<double> y,
                             bool fluid_outside = true, std::vector<double> stop_points = {},
                             std::string name = "spline");

// Reads a CSV with header `s,x,y`.
ParametricCurve spline_curve_from_csv(const std::string& path, bool fluid_outside = true);

// Returns the same geometric curve re-parameterized as s -> (s + shift) mod 1.
ParametricCurve shifted_parameter(const ParametricCurve& curve, double shift);

// Affine translation of a curve.
ParametricCurve translated(const ParametricCurve& curve, const Vec2& offset);

// Unit normal pointing out of the fluid domain. Throws ZeroTangent at cusps.
Vec2 eval_normal(const ParametricCurve& curve, double s);
Vec2 eval_tangent(const ParametricCurve& curve, double s);

// Signed area enclosed (positive for counterclockwise traversal); sampled.
double signed_area(const ParametricCurve& curve, int samples = 4096);

// Winding number of the closed curve about p (sampled polygon, plus stop points).
int winding_number(const ParametricCurve& curve, const Vec2& p, int samples = 2048);

// True when p lies on the excluded (non-fluid) side of a closed curve.
bool is_excluded_by(const ParametricCurve& curve, const Vec2& p);

enum class CrossingKind { VerticalLine, HorizontalLine, StopPoint };

struct BoundaryPoint {
  double s;
  Vec2 point;
  CrossingKind kind;
  int line; // mesh line index for crossings, -1 for stop points
};

struct TangentialContact {
  double s;
  Vec2 point;
  CrossingKind kind;
  int line;
};

struct CurveMeshIntersections {
  std::vector<BoundaryPoint> points; // sorted by s, crossings and stop points merged
  std::vector<TangentialContact> tangential;

  std::size_t crossing_count() const;
};

struct IntersectionOptions {
  double step = 0.0;       // initial step; 0 selects 1/(20 max(nx,ny))
  double min_step = 1e-9;  // halving floor
  double tolerance = 1e-12;
};

// Step along the curve and locate every crossing with a mesh line by bisection.
CurveMeshIntersections find_intersections(const ParametricCurve& curve, const BackgroundGrid& grid,
                                          const IntersectionOptions& options = {});

} // namespace cutwave
