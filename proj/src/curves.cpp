#include "cutwave/curves.hpp"

#include "cutwave/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace cutwave {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap01(double s) {
  s = std::fmod(s, 1.0);
  return s < 0.0 ? s + 1.0 : s;
}

FluidSide side_for(double area, bool fluid_outside) {
  // Interior of a counterclockwise curve is on its left.
  const bool ccw = area > 0.0;
  return (ccw == fluid_outside) ? FluidSide::Right : FluidSide::Left;
}

// Central difference that never straddles a stop point.
Vec2 difference_derivative(const std::function<Vec2(double)>& pos, const std::vector<double>& stops, double s) {
  constexpr double h = 1e-7;
  bool left_blocked = false, right_blocked = false;
  for (double sp : stops) {
    double d = s - sp;
    if (d > 0.0 && d < h) left_blocked = true;
    if (d <= 0.0 && d > -h) right_blocked = true;
    if (std::abs(d) < 1e-15) left_blocked = true; // at a stop point take the right-sided derivative
  }
  if (left_blocked && !right_blocked) return (pos(wrap01(s + h)) - pos(s)) / h;
  if (right_blocked && !left_blocked) return (pos(s) - pos(wrap01(s - h))) / h;
  return (pos(wrap01(s + h)) - pos(wrap01(s - h))) / (2.0 * h);
}

} // namespace

ParametricCurve make_curve(std::function<Vec2(double)> position, std::vector<double> stop_points, FluidSide side,
                           std::string name) {
  std::sort(stop_points.begin(), stop_points.end());
  ParametricCurve c;
  c.position = std::move(position);
  c.stop_points = stop_points;
  c.fluid_side = side;
  c.name = std::move(name);
  c.derivative = [pos = c.position, stops = std::move(stop_points)](double s) {
    return difference_derivative(pos, stops, s);
  };
  return c;
}

ParametricCurve circle(const Vec2& center, double radius, bool fluid_outside) {
  return ellipse(center, radius, radius, fluid_outside);
}

ParametricCurve ellipse(const Vec2& center, double ax, double ay, bool fluid_outside) {
  if (!(ax > 0.0 && ay > 0.0)) throw Error(ErrorCode::InvalidInput, "ellipse radii must be positive");
  ParametricCurve c;
  c.position = [=](double s) { return Vec2(center.x() + ax * std::cos(two_pi * s), center.y() + ay * std::sin(two_pi * s)); };
  c.derivative = [=](double s) {
    return Vec2(-two_pi * ax * std::sin(two_pi * s), two_pi * ay * std::cos(two_pi * s));
  };
  c.fluid_side = fluid_outside ? FluidSide::Right : FluidSide::Left;
  c.name = ax == ay ? "circle" : "ellipse";
  return c;
}

ParametricCurve pacman(const Vec2& center, double radius, double half_angle, bool fluid_outside) {
  if (!(half_angle > 0.0 && half_angle < std::numbers::pi))
    throw Error(ErrorCode::InvalidInput, "pacman half angle must lie in (0, pi)");
  const Vec2 upper = center + radius * Vec2(std::cos(half_angle), std::sin(half_angle));
  const Vec2 lower = center + radius * Vec2(std::cos(half_angle), -std::sin(half_angle));
  std::vector<CurvePiece> pieces;
  CurvePiece arc{CurvePiece::Kind::Arc};
  arc.arc = {center, radius, half_angle, two_pi - half_angle};
  pieces.push_back(arc);
  CurvePiece l1{CurvePiece::Kind::Line};
  l1.line = {lower, center};
  pieces.push_back(l1);
  CurvePiece l2{CurvePiece::Kind::Line};
  l2.line = {center, upper};
  pieces.push_back(l2);
  return piecewise_curve(pieces, fluid_outside, "pacman");
}

ParametricCurve piecewise_curve(const std::vector<CurvePiece>& pieces, bool fluid_outside, std::string name) {
  if (pieces.empty()) throw Error(ErrorCode::InvalidInput, "piecewise curve needs at least one piece");
  std::vector<double> lengths;
  for (const auto& p : pieces) {
    double len = p.kind == CurvePiece::Kind::Line ? (p.line.b - p.line.a).norm()
                                                   : std::abs(p.arc.radius * (p.arc.theta1 - p.arc.theta0));
    if (!(len > 0.0)) throw Error(ErrorCode::InvalidInput, "piecewise curve has a zero-length piece");
    lengths.push_back(len);
  }
  std::vector<double> breaks{0.0};
  double total = 0.0;
  for (double l : lengths) total += l;
  for (double l : lengths) breaks.push_back(breaks.back() + l / total);
  breaks.back() = 1.0;

  auto start_of = [&](const CurvePiece& p) {
    return p.kind == CurvePiece::Kind::Line ? p.line.a
                                            : Vec2(p.arc.center + p.arc.radius * Vec2(std::cos(p.arc.theta0), std::sin(p.arc.theta0)));
  };
  auto end_of = [&](const CurvePiece& p) {
    return p.kind == CurvePiece::Kind::Line ? p.line.b
                                            : Vec2(p.arc.center + p.arc.radius * Vec2(std::cos(p.arc.theta1), std::sin(p.arc.theta1)));
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& next = pieces[(i + 1) % pieces.size()];
    if ((end_of(pieces[i]) - start_of(next)).norm() > 1e-10)
      throw Error(ErrorCode::InvalidInput, "piecewise curve is not closed at piece " + std::to_string(i));
  }

  auto locate = [breaks](double s) {
    s = std::clamp(s, 0.0, 1.0);
    auto it = std::upper_bound(breaks.begin(), breaks.end(), s);
    std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - breaks.begin() - 1, 0), breaks.size() - 2);
    double t = (s - breaks[k]) / (breaks[k + 1] - breaks[k]);
    return std::pair{k, t};
  };

  ParametricCurve c;
  c.position = [pieces, locate](double s) {
    auto [k, t] = locate(s);
    const auto& p = pieces[k];
    if (p.kind == CurvePiece::Kind::Line) return Vec2(p.line.a + t * (p.line.b - p.line.a));
    double th = p.arc.theta0 + t * (p.arc.theta1 - p.arc.theta0);
    return Vec2(p.arc.center + p.arc.radius * Vec2(std::cos(th), std::sin(th)));
  };
  c.derivative = [pieces, locate, breaks](double s) {
    auto [k, t] = locate(s);
    const auto& p = pieces[k];
    double span = breaks[k + 1] - breaks[k];
    if (p.kind == CurvePiece::Kind::Line) return Vec2((p.line.b - p.line.a) / span);
    double dth = p.arc.theta1 - p.arc.theta0;
    double th = p.arc.theta0 + t * dth;
    return Vec2(p.arc.radius * dth / span * Vec2(-std::sin(th), std::cos(th)));
  };
  c.stop_points.assign(breaks.begin(), breaks.end() - 1);
  c.name = std::move(name);
  c.fluid_side = FluidSide::Right;
  c.fluid_side = side_for(signed_area(c), fluid_outside);
  return c;
}

ParametricCurve spline_curve(std::vector<double> s, std::vector<double> x, std::vector<double> y, bool fluid_outside,
                             std::vector<double> stop_points, std::string name) {
  if (s.size() != x.size() || s.size() != y.size() || s.size() < 4)
    throw Error(ErrorCode::InvalidInput, "spline curve needs at least 4 samples with matching columns");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw Error(ErrorCode::InvalidInput, "spline samples must have increasing s");

  const std::size_t last = s.size() - 1;
  double period_end;
  if (std::hypot(x[last] - x[0], y[last] - y[0]) < 1e-12) {
    period_end = s[last];
    s.pop_back();
    x.pop_back();
    y.pop_back();
  } else {
    period_end = s[last] + (s[last] - s[0]) / static_cast<double>(last);
  }
  const double s0 = s[0];
  const double period = period_end - s0;
  for (double& v : s) v = (v - s0) / period;
  for (double& v : stop_points) v = wrap01((v - s0) / period);

  const int n = static_cast<int>(s.size());
  auto knot = [&](int i) { return i < n ? s[i] : 1.0; };
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) h[i] = knot(i + 1) - s[i];

  auto second_derivatives = [&](const std::vector<double>& v) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      int im = (i + n - 1) % n, ip = (i + 1) % n;
      A(i, im) += h[im];
      A(i, i) += 2.0 * (h[im] + h[i]);
      A(i, ip) += h[i];
      rhs(i) = 6.0 * ((v[ip] - v[i]) / h[i] - (v[i] - v[im]) / h[im]);
    }
    Eigen::VectorXd m = A.partialPivLu().solve(rhs);
    return std::vector<double>(m.data(), m.data() + n);
  };
  auto mx = second_derivatives(x);
  auto my = second_derivatives(y);

  struct Table {
    std::vector<double> s, h, x, y, mx, my;
  };
  auto tab = std::make_shared<Table>(Table{s, h, x, y, mx, my});

  auto segment = [tab](double t) {
    t = wrap01(t);
    auto it = std::upper_bound(tab->s.begin(), tab->s.end(), t);
    int i = static_cast<int>(it - tab->s.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(tab->s.size()) - 1);
    return std::pair{i, t};
  };
  auto eval = [tab](const std::vector<double>& v, const std::vector<double>& m, int i, double t, bool deriv) {
    const int n = static_cast<int>(tab->s.size());
    int ip = (i + 1) % n;
    double hi = tab->h[i];
    double a = tab->s[i] + hi - t; // distance to right knot
    double b = t - tab->s[i];
    double ci = v[i] / hi - m[i] * hi / 6.0;
    double cp = v[ip] / hi - m[ip] * hi / 6.0;
    if (!deriv) return m[i] * a * a * a / (6.0 * hi) + m[ip] * b * b * b / (6.0 * hi) + ci * a + cp * b;
    return -m[i] * a * a / (2.0 * hi) + m[ip] * b * b / (2.0 * hi) - ci + cp;
  };

  ParametricCurve c;
  c.position = [tab, segment, eval](double t) {
    auto [i, tt] = segment(t);
    return Vec2(eval(tab->x, tab->mx, i, tt, false), eval(tab->y, tab->my, i, tt, false));
  };
  c.derivative = [tab, segment, eval](double t) {
    auto [i, tt] = segment(t);
    return Vec2(eval(tab->x, tab->mx, i, tt, true), eval(tab->y, tab->my, i, tt, true));
  };
  std::sort(stop_points.begin(), stop_points.end());
  c.stop_points = stop_points;
  c.name = std::move(name);
  c.fluid_side = FluidSide::Right;
  c.fluid_side = side_for(signed_area(c), fluid_outside);
  return c;
}

ParametricCurve spline_curve_from_csv(const std::string& path, bool fluid_outside) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open curve file " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> s, x, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c;
    if (!(row >> a >> b >> c)) throw Error(ErrorCode::InvalidInput, "malformed row in " + path + ": " + line);
    s.push_back(a);
    x.push_back(b);
    y.push_back(c);
  }
  return spline_curve(std::move(s), std::move(x), std::move(y), fluid_outside, {}, path);
}

ParametricCurve shifted_parameter(const ParametricCurve& curve, double shift) {
  ParametricCurve c = curve;
  c.position = [pos = curve.position, shift](double s) { return pos(wrap01(s + shift)); };
  c.derivative = [der = curve.derivative, shift](double s) { return der(wrap01(s + shift)); };
  c.stop_points.clear();
  for (double sp : curve.stop_points) c.stop_points.push_back(wrap01(sp - shift));
  // The original seam is a stop point of the shifted curve when the original had one there.
  std::sort(c.stop_points.begin(), c.stop_points.end());
  return c;
}

ParametricCurve translated(const ParametricCurve& curve, const Vec2& offset) {
  ParametricCurve c = curve;
  c.position = [pos = curve.position, offset](double s) { return Vec2(pos(s) + offset); };
  return c;
}

Vec2 eval_tangent(const ParametricCurve& curve, double s) {
  Vec2 d = curve.derivative(s);
  double n = d.norm();
  if (n < 1e-13) throw Error(ErrorCode::ZeroTangent, "curve '" + curve.name + "' at s=" + std::to_string(s));
  return d / n;
}

Vec2 eval_normal(const ParametricCurve& curve, double s) {
  Vec2 t = eval_tangent(curve, s);
  // Pointing away from the fluid: opposite to the fluid side.
  return curve.fluid_side == FluidSide::Right ? Vec2(-t.y(), t.x()) : Vec2(t.y(), -t.x());
}

namespace {

std::vector<Vec2> sample_polygon(const ParametricCurve& curve, int samples) {
  std::vector<double> ss;
  ss.reserve(samples + curve.stop_points.size());
  for (int i = 0; i < samples; ++i) ss.push_back(static_cast<double>(i) / samples);
  for (double sp : curve.stop_points) ss.push_back(sp);
  std::sort(ss.begin(), ss.end());
  std::vector<Vec2> pts;
  pts.reserve(ss.size());
  for (double s : ss) pts.push_back(curve.position(s));
  return pts;
}

} // namespace

double signed_area(const ParametricCurve& curve, int samples) {
  auto pts = sample_polygon(curve, samples);
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

int winding_number(const ParametricCurve& curve, const Vec2& p, int samples) {
  auto pts = sample_polygon(curve, samples);
  int wn = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % pts.size()];
    double side = cross(b - a, p - a);
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0.0) ++wn;
    } else {
      if (b.y() <= p.y() && side < 0.0) --wn;
    }
  }
  return wn;
}

bool is_excluded_by(const ParametricCurve& curve, const Vec2& p) {
  const bool ccw = signed_area(curve, 512) > 0.0;
  const bool excluded_is_interior = (curve.fluid_side == FluidSide::Right) == ccw;
  const bool inside = winding_number(curve, p) != 0;
  return excluded_is_interior ? inside : !inside;
}

std::size_t CurveMeshIntersections::crossing_count() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                [](const BoundaryPoint& b) { return b.kind != CrossingKind::StopPoint; }));
}

namespace {

// Bisection for g(s) = coord(s) - value on [a, b] with a sign change.
double bisect(const std::function<double(double)>& g, double a, double b, double tol) {
  double ga = g(a);
  if (ga == 0.0) return a;
  double gb = g(b);
  if (gb == 0.0) return b;
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    double gm = g(m);
    if (std::abs(gm) <= tol * 1e-2 || b - a <= 4e-16) return m;
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

struct StepSample {
  double fa, fm, fb; // continuous cell coordinate at start, middle, end
};

// Extremum of the parabola through three equally spaced samples, if interior.
bool parabola_extremum(const StepSample& v, double& fext, double slack = 0.0) {
  double a = 2.0 * v.fa - 4.0 * v.fm + 2.0 * v.fb;
  double b = -3.0 * v.fa + 4.0 * v.fm - v.fb;
  if (std::abs(a) < 1e-300) return false;
  double t = -b / (2.0 * a);
  if (!(t > -slack && t < 1.0 + slack)) return false;
  fext = v.fa + b * t + a * t * t;
  return true;
}

// Golden-section search for the extremum of g on [a,b]; sign > 0 finds a minimum.
double golden_extremum(const std::function<double(double)>& g, double a, double b, double sign, double& at) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = sign * g(c), gd = sign * g(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = sign * g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = sign * g(d);
    }
  }
  at = 0.5 * (a + b);
  double best = std::min({sign * g(a), sign * g(b), sign * g(at)});
  if (sign * g(a) == best) at = a;
  else if (sign * g(b) == best) at = b;
  return sign * best;
}

} // namespace

CurveMeshIntersections find_intersections(const ParametricCurve& curve, const BackgroundGrid& grid,
                                          const IntersectionOptions& options) {
  const double ds0 = options.step > 0.0 ? options.step : 1.0 / (20.0 * std::max(grid.nx, grid.ny));
  CurveMeshIntersections out;

  auto inside_domain = [&](const Vec2& p) {
    return p.x() > grid.x0 && p.x() < grid.x1 && p.y() > grid.y0 && p.y() < grid.y1;
  };

  double s = 0.0;
  const Vec2 p0 = curve.position(0.0);
  Vec2 pa = p0;
  if (!inside_domain(pa)) throw Error(ErrorCode::CurveOutsideDomain, "curve '" + curve.name + "' leaves the domain");
  double step = ds0;

  while (s < 1.0) {
    step = std::min(step, 1.0 - s);
    double s2 = 0.0;
    Vec2 pb, pm;
    StepSample sx{}, sy{};
    bool contact_x = false, contact_y = false;
    double contact_sx = -1.0, contact_sy = -1.0;
    for (;;) {
      s2 = s + step;
      if (s2 > 1.0 - 1e-15) s2 = 1.0;
      // Closing point taken from s = 0 so a start exactly on a line is seen once.
      pb = s2 == 1.0 ? p0 : curve.position(s2);
      pm = curve.position(0.5 * (s + s2));
      if (!inside_domain(pb) || !inside_domain(pm))
        throw Error(ErrorCode::CurveOutsideDomain, "curve '" + curve.name + "' leaves the domain");
      sx = {grid.fx(pa.x()), grid.fx(pm.x()), grid.fx(pb.x())};
      sy = {grid.fy(pa.y()), grid.fy(pm.y()), grid.fy(pb.y())};
      bool ok = true;
      contact_x = contact_y = false;
      contact_sx = contact_sy = -1.0;
      for (int dim = 0; dim < 2; ++dim) {
        const StepSample& v = dim == 0 ? sx : sy;
        int ia = static_cast<int>(std::floor(v.fa)), ib = static_cast<int>(std::floor(v.fb));
        int im = static_cast<int>(std::floor(v.fm));
        if (std::abs(ib - ia) > 1) ok = false;
        if (ia == ib && im != ia) ok = false;
        if (ia != ib && im != ia && im != ib) ok = false;
        double fext;
        // Slack admits extrema sitting on a step end; those are only ever refined.
        if (ok && ia == ib && parabola_extremum(v, fext, 0.1)) {
          double strict;
          if (static_cast<int>(std::floor(fext)) != ia && parabola_extremum(v, strict)) {
            // A dip across a line within one step: refine, or call it a touch at the floor.
            if (step > options.min_step) ok = false;
            else (dim == 0 ? contact_x : contact_y) = true;
          } else {
            double h = dim == 0 ? grid.dx() : grid.dy();
            double dist = std::min(fext - std::floor(fext), std::ceil(fext) - fext) * h;
            if (dist < 1e-5 * h) {
              // The parabola is only good to O(step^3); settle near-touches on the curve itself.
              double sgn = (2.0 * v.fa - 4.0 * v.fm + 2.0 * v.fb) > 0.0 ? 1.0 : -1.0;
              auto g = [&](double t) {
                Vec2 q = curve.position(t);
                return dim == 0 ? grid.fx(q.x()) : grid.fy(q.y());
              };
              double at = 0.0;
              double fe = golden_extremum(g, s, s2, sgn, at);
              double line = std::round(fe);
              // A dip of under 1e-10 past the line still counts as a touch.
              if (std::abs(fe - line) * h < 1e-10) {
                (dim == 0 ? contact_x : contact_y) = true;
                (dim == 0 ? contact_sx : contact_sy) = at;
              }
            }
          }
        }
      }
      if (ok) break;
      step *= 0.5;
      if (step < options.min_step)
        throw Error(ErrorCode::StepTooCoarse, "curve '" + curve.name + "' near s=" + std::to_string(s));
    }

    std::vector<BoundaryPoint> found;
    const int ixa = static_cast<int>(std::floor(sx.fa)), ixb = static_cast<int>(std::floor(sx.fb));
    const int iya = static_cast<int>(std::floor(sy.fa)), iyb = static_cast<int>(std::floor(sy.fb));
    if (ixa != ixb) {
      int line = std::max(ixa, ixb);
      if (line <= 0 || line >= grid.nx) throw Error(ErrorCode::CurveOutsideDomain, "curve crosses the domain boundary");
      double xl = grid.line_x(line);
      double sc = bisect([&](double t) { return curve.position(t).x() - xl; }, s, s2, options.tolerance);
      Vec2 p = curve.position(sc);
      p.x() = xl;
      found.push_back({sc, p, CrossingKind::VerticalLine, line});
    }
    if (iya != iyb) {
      int line = std::max(iya, iyb);
      if (line <= 0 || line >= grid.ny) throw Error(ErrorCode::CurveOutsideDomain, "curve crosses the domain boundary");
      double yl = grid.line_y(line);
      double sc = bisect([&](double t) { return curve.position(t).y() - yl; }, s, s2, options.tolerance);
      Vec2 p = curve.position(sc);
      p.y() = yl;
      if (!found.empty() && (found.front().point - p).norm() < 1e-10) {
        // Passing through a mesh vertex: keep a single crossing, classified as vertical.
        spdlog::debug("curve '{}' passes through a mesh vertex at s={}", curve.name, sc);
        found.front().point.y() = yl;
      } else {
        found.push_back({sc, p, CrossingKind::HorizontalLine, line});
      }
    }
    for (auto& f : found) {
      if (f.s > 1.0 - 1e-12) f.s = 0.0;
      out.points.push_back(f);
    }
    if ((contact_x && ixa == ixb) || (contact_y && iya == iyb)) {
      bool vertical = contact_x && ixa == ixb;
      const StepSample& v = vertical ? sx : sy;
      double sc = vertical ? contact_sx : contact_sy;
      if (sc < 0.0) sc = 0.5 * (s + s2);
      Vec2 pc = curve.position(sc);
      double fext = vertical ? grid.fx(pc.x()) : grid.fy(pc.y());
      if (contact_sx < 0.0 && contact_sy < 0.0) parabola_extremum(v, fext);
      int line = static_cast<int>(std::lround(fext));
      const CrossingKind kind = vertical ? CrossingKind::VerticalLine : CrossingKind::HorizontalLine;
      // An extremum on a step boundary is seen from both sides.
      bool dup = !out.tangential.empty() && out.tangential.back().kind == kind && out.tangential.back().line == line &&
                 std::abs(out.tangential.back().s - sc) < 2.0 * ds0;
      if (!dup) {
        out.tangential.push_back({sc, pc, kind, line});
        spdlog::info("curve '{}' touches mesh line {} tangentially near s={}", curve.name, line, sc);
      }
    }

    s = s2;
    pa = pb;
    step = std::min(step * 2.0, ds0);
  }

  for (double sp : curve.stop_points) out.points.push_back({sp, curve.position(sp), CrossingKind::StopPoint, -1});
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.s < b.s; });
  return out;
}

} // namespace cutwave
