#include "cutwave/cutmesh.hpp"

#include "cutwave/error.hpp"
#include "cutwave/legendre.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>

namespace cutwave {

const char* to_string(ElementKind kind) {
  switch (kind) {
  case ElementKind::Cartesian: return "cartesian";
  case ElementKind::Cut: return "cut";
  case ElementKind::Excluded: return "excluded";
  }
  return "?";
}

Vec2 face_position(const std::vector<ParametricCurve>& curves, const Face& f, double t) {
  if (!f.curved) return f.a + t * (f.b - f.a);
  double s = f.forward ? f.s0 + t * (f.s1 - f.s0) : f.s1 - t * (f.s1 - f.s0);
  return curves[f.curve].position(s);
}

Vec2 face_derivative(const std::vector<ParametricCurve>& curves, const Face& f, double t) {
  if (!f.curved) return f.b - f.a;
  double span = f.s1 - f.s0;
  double s = f.forward ? f.s0 + t * span : f.s1 - t * span;
  return (f.forward ? span : -span) * curves[f.curve].derivative(s);
}

double face_length(const CutMesh& mesh, const Face& f) {
  if (!f.curved) return (f.b - f.a).norm();
  const auto& g = gauss_legendre(24);
  double len = 0.0;
  for (std::size_t q = 0; q < g.x.size(); ++q)
    len += 0.5 * g.w[q] * face_derivative(mesh.curves, f, 0.5 * (g.x[q] + 1.0)).norm();
  return len;
}

bool point_excluded(const std::vector<ParametricCurve>& curves, const Vec2& p) {
  for (const auto& c : curves)
    if (is_excluded_by(c, p)) return true;
  return false;
}

bool element_contains(const Element& e, const Vec2& p) {
  if (p.x() < e.bbox.lo.x() || p.x() > e.bbox.hi.x() || p.y() < e.bbox.lo.y() || p.y() > e.bbox.hi.y()) return false;
  int wn = 0;
  for (const auto& loop : e.outline) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec2& a = loop[i];
      const Vec2& b = loop[(i + 1) % loop.size()];
      double side = cross(b - a, p - a);
      if (a.y() <= p.y()) {
        if (b.y() > p.y() && side > 0.0) ++wn;
      } else if (b.y() <= p.y() && side < 0.0) {
        --wn;
      }
    }
  }
  return wn != 0;
}

namespace {

constexpr double min_face_length = 1e-12;

struct Arc {
  int curve;
  double s_in_param, s_out_param; // for ordering diagnostics only
  double sigma_in, sigma_out;
  Vec2 p_in, p_out;
  std::vector<Face> faces;
};

// Perimeter coordinate in [0,4), counterclockwise from the lower-left corner.
double perimeter_coordinate(const BackgroundGrid& grid, int i, int j, const BoundaryPoint& bp) {
  const Vec2 lo = grid.cell_lo(i, j), hi = grid.cell_hi(i, j);
  double sigma;
  if (bp.kind == CrossingKind::VerticalLine) {
    sigma = bp.line == i ? 3.0 + (hi.y() - bp.point.y()) / grid.dy() : 1.0 + (bp.point.y() - lo.y()) / grid.dy();
  } else {
    sigma = bp.line == j ? (bp.point.x() - lo.x()) / grid.dx() : 2.0 + (hi.x() - bp.point.x()) / grid.dx();
  }
  if (sigma >= 4.0 || sigma < 0.0) sigma = std::fmod(sigma + 4.0, 4.0);
  return sigma;
}

Vec2 perimeter_point(const BackgroundGrid& grid, int i, int j, double sigma) {
  const Vec2 lo = grid.cell_lo(i, j), hi = grid.cell_hi(i, j);
  sigma = std::fmod(sigma, 4.0);
  int k = static_cast<int>(std::floor(sigma));
  double t = sigma - k;
  switch (k) {
  case 0: return {lo.x() + t * grid.dx(), lo.y()};
  case 1: return {hi.x(), lo.y() + t * grid.dy()};
  case 2: return {hi.x() - t * grid.dx(), hi.y()};
  default: return {lo.x(), hi.y() - t * grid.dy()};
  }
}

Vec2 corner(const BackgroundGrid& grid, int i, int j, int k) {
  const Vec2 lo = grid.cell_lo(i, j), hi = grid.cell_hi(i, j);
  switch (((k % 4) + 4) % 4) {
  case 0: return lo;
  case 1: return {hi.x(), lo.y()};
  case 2: return hi;
  default: return {lo.x(), hi.y()};
  }
}

Face straight_face(const Vec2& a, const Vec2& b, int side) {
  Face f;
  f.curved = false;
  f.a = a;
  f.b = b;
  f.side = static_cast<Side>(side);
  return f;
}

void push_face(std::vector<Face>& loop, Face f, double length) {
  if (length < min_face_length) {
    spdlog::warn("dropping degenerate face of length {:.3e} from ({}, {})", length, f.a.x(), f.a.y());
    return;
  }
  loop.push_back(std::move(f));
}

// Straight faces along the cell boundary from sigma_a to sigma_b, counterclockwise.
void walk_boundary(const BackgroundGrid& grid, int i, int j, double sigma_a, const Vec2& pa, double sigma_b,
                   const Vec2& pb, std::vector<Face>& loop) {
  double d = sigma_b - sigma_a;
  if (d < 0.0) d += 4.0;
  double s = sigma_a;
  Vec2 p = pa;
  const double end = sigma_a + d;
  while (true) {
    int k = static_cast<int>(std::floor(s + 1e-15));
    double next_corner = k + 1.0;
    if (end <= next_corner + 1e-14) {
      push_face(loop, straight_face(p, pb, k % 4), (pb - p).norm());
      return;
    }
    Vec2 c = corner(grid, i, j, k + 1);
    push_face(loop, straight_face(p, c, k % 4), (c - p).norm());
    p = c;
    s = next_corner;
  }
}

// Curved faces for the curve interval [sa, sb] (sb may exceed 1 for wrap-around),
// split at stop points and at the seam s = 0.
std::vector<Face> curved_faces(const ParametricCurve& curve, int cid, double sa, double sb, const Vec2* pa,
                               const Vec2* pb) {
  std::vector<double> cuts{sa};
  for (double shift : {0.0, 1.0}) {
    for (double sp : curve.stop_points) {
      double v = sp + shift;
      if (v > sa + 1e-14 && v < sb - 1e-14) cuts.push_back(v);
    }
    if (shift > sa + 1e-14 && shift < sb - 1e-14) cuts.push_back(shift);
  }
  cuts.push_back(sb);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             cuts.end());

  std::vector<Face> faces;
  const bool forward = curve.fluid_side == FluidSide::Left;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double u0 = cuts[k], u1 = cuts[k + 1];
    double shift = u0 >= 1.0 - 1e-14 ? 1.0 : 0.0;
    Face f;
    f.curved = true;
    f.curve = cid;
    f.s0 = u0 - shift;
    f.s1 = std::min(u1 - shift, 1.0);
    f.forward = forward;
    Vec2 q0 = curve.position(f.s0), q1 = curve.position(f.s1);
    if (k == 0 && pa) q0 = *pa;
    if (k + 2 == cuts.size() && pb) q1 = *pb;
    f.a = forward ? q0 : q1;
    f.b = forward ? q1 : q0;
    faces.push_back(f);
  }
  if (!forward) std::reverse(faces.begin(), faces.end());
  return faces;
}

double chord_estimate(const std::vector<ParametricCurve>& curves, const Face& f) {
  if (!f.curved) return (f.b - f.a).norm();
  double len = 0.0;
  Vec2 prev = face_position(curves, f, 0.0);
  for (int k = 1; k <= 8; ++k) {
    Vec2 p = face_position(curves, f, k / 8.0);
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

struct CellArcs {
  std::vector<Arc> arcs;
  std::vector<int> hole_curves;
};

std::map<int, CellArcs> collect_arcs(const BackgroundGrid& grid, const std::vector<ParametricCurve>& curves,
                                     const std::vector<CurveMeshIntersections>& inter) {
  std::map<int, CellArcs> cells;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c];
    std::vector<BoundaryPoint> cr;
    for (const auto& bp : inter[c].points)
      if (bp.kind != CrossingKind::StopPoint) cr.push_back(bp);
    if (cr.empty()) {
      Vec2 p0 = curve.position(0.0);
      cells[grid.cell_id(grid.ix(p0.x()), grid.iy(p0.y()))].hole_curves.push_back(static_cast<int>(c));
      continue;
    }
    const std::size_t n = cr.size();
    for (std::size_t k = 0; k < n; ++k) {
      const BoundaryPoint& A = cr[k];
      const BoundaryPoint& B = cr[(k + 1) % n];
      double sa = A.s, sb = B.s;
      if (k + 1 == n) sb += 1.0;
      double sm = 0.5 * (sa + sb);
      Vec2 pm = curve.position(sm >= 1.0 ? sm - 1.0 : sm);
      int i = grid.ix(pm.x()), j = grid.iy(pm.y());
      Arc arc;
      arc.curve = static_cast<int>(c);
      auto faces = curved_faces(curve, static_cast<int>(c), sa, sb, &A.point, &B.point);
      const bool forward = curve.fluid_side == FluidSide::Left;
      const BoundaryPoint& in = forward ? A : B;
      const BoundaryPoint& out = forward ? B : A;
      arc.s_in_param = in.s;
      arc.s_out_param = out.s;
      arc.sigma_in = perimeter_coordinate(grid, i, j, in);
      arc.sigma_out = perimeter_coordinate(grid, i, j, out);
      arc.p_in = in.point;
      arc.p_out = out.point;
      for (auto& f : faces) push_face(arc.faces, f, chord_estimate(curves, f));
      cells[grid.cell_id(i, j)].arcs.push_back(std::move(arc));
    }
  }
  return cells;
}

std::vector<std::vector<Face>> assemble_loops(const BackgroundGrid& grid, int i, int j,
                                              const std::vector<ParametricCurve>& curves, CellArcs& ca) {
  std::vector<std::vector<Face>> loops;
  const std::size_t na = ca.arcs.size();
  std::vector<bool> used(na, false);
  for (std::size_t start = 0; start < na; ++start) {
    if (used[start]) continue;
    std::vector<Face> loop;
    std::size_t cur = start;
    for (std::size_t guard = 0; guard <= na; ++guard) {
      used[cur] = true;
      const Arc& a = ca.arcs[cur];
      loop.insert(loop.end(), a.faces.begin(), a.faces.end());
      std::size_t next = na;
      double best = 5.0;
      for (std::size_t k = 0; k < na; ++k) {
        if (used[k] && k != start) continue;
        double d = ca.arcs[k].sigma_in - a.sigma_out;
        if (d < -1e-14) d += 4.0;
        d = std::max(d, 0.0);
        if (d < best) {
          best = d;
          next = k;
        }
      }
      if (next == na) throw Error(ErrorCode::SplitCellDetected, "open face loop in cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
      const Arc& b = ca.arcs[next];
      walk_boundary(grid, i, j, a.sigma_out, a.p_out, b.sigma_in, b.p_in, loop);
      if (next == start) break;
      cur = next;
    }
    loops.push_back(std::move(loop));
  }

  for (int c : ca.hole_curves) {
    const auto& curve = curves[c];
    std::vector<Face> loop;
    for (auto& f : curved_faces(curve, c, 0.0, 1.0, nullptr, nullptr)) push_face(loop, f, chord_estimate(curves, f));
    loops.push_back(std::move(loop));
  }
  return loops;
}

std::vector<Vec2> outline_of(const std::vector<ParametricCurve>& curves, const std::vector<Face>& loop) {
  std::vector<Vec2> pts;
  for (const auto& f : loop) {
    if (!f.curved) {
      pts.push_back(f.a);
      continue;
    }
    for (int k = 0; k < 32; ++k) pts.push_back(k == 0 ? f.a : face_position(curves, f, k / 32.0));
  }
  return pts;
}

double polygon_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) a += cross(pts[k], pts[(k + 1) % pts.size()]);
  return 0.5 * a;
}

std::vector<Face> square_loop(const BackgroundGrid& grid, int i, int j) {
  std::vector<Face> loop;
  for (int k = 0; k < 4; ++k) loop.push_back(straight_face(corner(grid, i, j, k), corner(grid, i, j, k + 1), k));
  return loop;
}

std::vector<std::vector<Face>> cell_loops(const BackgroundGrid& grid, int i, int j,
                                          const std::vector<ParametricCurve>& curves, CellArcs& ca) {
  auto loops = assemble_loops(grid, i, j, curves, ca);
  if (ca.arcs.empty() && !loops.empty() && !point_excluded(curves, grid.cell_lo(i, j)))
    loops.insert(loops.begin(), square_loop(grid, i, j));

  int positive = 0;
  double total = 0.0;
  for (const auto& loop : loops) {
    double a = polygon_area(outline_of(curves, loop));
    total += a;
    if (a > 1e-14 * grid.cell_area()) ++positive;
  }
  if (positive > 1)
    throw Error(ErrorCode::SplitCellDetected,
                "cell (" + std::to_string(i) + "," + std::to_string(j) + ") splits into " + std::to_string(positive) + " pieces");
  if (total <= 1e-14 * grid.cell_area()) {
    spdlog::warn("cell ({}, {}) has no fluid area after cutting; excluded", i, j);
    loops.clear();
  }
  return loops;
}

// Green's theorem moments of a closed face set: area, int x, int y.
void boundary_moments(const std::vector<ParametricCurve>& curves, const std::vector<Face>& faces, double& area,
                      Vec2& first) {
  const auto& g = gauss_legendre(16);
  area = 0.0;
  first.setZero();
  for (const auto& f : faces) {
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      double t = 0.5 * (g.x[q] + 1.0);
      Vec2 p = face_position(curves, f, t);
      Vec2 d = face_derivative(curves, f, t);
      double w = 0.5 * g.w[q];
      area += w * 0.5 * (p.x() * d.y() - p.y() * d.x());
      first.x() += w * 0.5 * p.x() * p.x() * d.y();
      first.y() -= w * 0.5 * p.y() * p.y() * d.x();
    }
  }
}

void finish_element(const std::vector<ParametricCurve>& curves, Element& e,
                    const std::vector<std::vector<Face>>& loops) {
  e.faces.clear();
  e.outline.clear();
  e.bbox = Box2{};
  for (const auto& loop : loops) {
    e.faces.insert(e.faces.end(), loop.begin(), loop.end());
    e.outline.push_back(outline_of(curves, loop));
    for (const auto& p : e.outline.back()) e.bbox.extend(p);
  }
  Vec2 first;
  boundary_moments(curves, e.faces, e.volume, first);
  e.centroid = first / e.volume;
}

} // namespace

std::vector<std::vector<Face>> build_cut_faces(const BackgroundGrid& grid, int i, int j,
                                               const std::vector<ParametricCurve>& curves,
                                               const std::vector<CurveMeshIntersections>& intersections) {
  auto cells = collect_arcs(grid, curves, intersections);
  auto it = cells.find(grid.cell_id(i, j));
  if (it == cells.end()) return {};
  return cell_loops(grid, i, j, curves, it->second);
}

std::vector<ElementKind> classify_cells(const BackgroundGrid& grid, const std::vector<CurveMeshIntersections>& intersections,
                                        const std::vector<ParametricCurve>& curves) {
  auto cells = collect_arcs(grid, curves, intersections);
  std::vector<ElementKind> kind(grid.cell_count());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      int id = grid.cell_id(i, j);
      if (cells.count(id)) kind[id] = ElementKind::Cut;
      else kind[id] = point_excluded(curves, grid.cell_center(i, j)) ? ElementKind::Excluded : ElementKind::Cartesian;
    }
  }
  return kind;
}

void connect(CutMesh& mesh) {
  const auto& grid = mesh.grid;
  const double tol = 1e-10 * std::max(1.0, std::max(grid.x1 - grid.x0, grid.y1 - grid.y0));
  const int di[4] = {0, 1, 0, -1};
  const int dj[4] = {-1, 0, 1, 0};
  for (auto& e : mesh.elements) {
    for (auto& f : e.faces) {
      f.neighbor = -1;
      f.twin = -1;
      if (f.curved) {
        f.tag = {FaceTag::Kind::Curve, f.curve};
        continue;
      }
      const int k = static_cast<int>(f.side);
      int ni = e.cell_i + di[k], nj = e.cell_j + dj[k];
      Vec2 shift = Vec2::Zero();
      if (ni < 0 || ni >= grid.nx) {
        if (!mesh.options.periodic_x) {
          f.tag = {FaceTag::Kind::Domain, k};
          continue;
        }
        shift.x() = ni < 0 ? grid.x1 - grid.x0 : grid.x0 - grid.x1;
        ni = (ni + grid.nx) % grid.nx;
      }
      if (nj < 0 || nj >= grid.ny) {
        if (!mesh.options.periodic_y) {
          f.tag = {FaceTag::Kind::Domain, k};
          continue;
        }
        shift.y() = nj < 0 ? grid.y1 - grid.y0 : grid.y0 - grid.y1;
        nj = (nj + grid.ny) % grid.ny;
      }
      f.tag = {FaceTag::Kind::Interior, -1};
      const int nb = mesh.cell_to_element[grid.cell_id(ni, nj)];
      const int opposite = (k + 2) % 4;
      if (nb >= 0) {
        const auto& ne = mesh.elements[nb];
        for (std::size_t t = 0; t < ne.faces.size(); ++t) {
          const Face& g = ne.faces[t];
          if (g.curved || static_cast<int>(g.side) != opposite) continue;
          if ((g.a - (f.b + shift)).norm() < tol && (g.b - (f.a + shift)).norm() < tol) {
            f.neighbor = nb;
            f.twin = static_cast<int>(t);
            break;
          }
        }
      }
      if (f.neighbor < 0)
        throw Error(ErrorCode::UnmatchedFace, "element " + std::to_string(e.id) + " face from (" + std::to_string(f.a.x()) +
                                                  ", " + std::to_string(f.a.y()) + ") has no twin");
    }
  }
}

CutMesh build_cut_mesh(const BackgroundGrid& grid, std::vector<ParametricCurve> curves, const MeshOptions& options) {
  if (grid.nx < 1 || grid.ny < 1 || !(grid.x1 > grid.x0) || !(grid.y1 > grid.y0))
    throw Error(ErrorCode::InvalidInput, "background grid needs at least one cell and a positive extent");
  CutMesh mesh;
  mesh.grid = grid;
  mesh.options = options;
  mesh.curves = std::move(curves);
  for (const auto& c : mesh.curves) mesh.intersections.push_back(find_intersections(c, grid, options.intersection));

  auto cells = collect_arcs(grid, mesh.curves, mesh.intersections);
  mesh.cell_kind.assign(grid.cell_count(), ElementKind::Cartesian);
  mesh.cell_to_element.assign(grid.cell_count(), -1);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int cid = grid.cell_id(i, j);
      Element e;
      e.cell_i = i;
      e.cell_j = j;
      auto it = cells.find(cid);
      if (it != cells.end()) {
        auto loops = cell_loops(grid, i, j, mesh.curves, it->second);
        if (loops.empty()) {
          mesh.cell_kind[cid] = ElementKind::Excluded;
          continue;
        }
        e.kind = ElementKind::Cut;
        finish_element(mesh.curves, e, loops);
      } else if (point_excluded(mesh.curves, grid.cell_center(i, j))) {
        mesh.cell_kind[cid] = ElementKind::Excluded;
        continue;
      } else {
        e.kind = ElementKind::Cartesian;
        finish_element(mesh.curves, e, {square_loop(grid, i, j)});
      }
      mesh.cell_kind[cid] = e.kind;
      e.id = static_cast<int>(mesh.elements.size());
      mesh.cell_to_element[cid] = e.id;
      mesh.elements.push_back(std::move(e));
    }
  }
  connect(mesh);
  spdlog::debug("cut mesh: {} elements on {}x{} cells", mesh.elements.size(), grid.nx, grid.ny);
  return mesh;
}

void write_mesh_csv(const CutMesh& mesh, const std::string& element_path, const std::string& face_path) {
  std::ofstream ef(element_path);
  if (!ef) throw Error(ErrorCode::InvalidInput, "cannot write " + element_path);
  ef.precision(17);
  ef << "id,kind,volume,centroid_x,centroid_y\n";
  for (const auto& e : mesh.elements)
    ef << e.id << ',' << to_string(e.kind) << ',' << e.volume << ',' << e.centroid.x() << ',' << e.centroid.y() << '\n';

  std::ofstream ff(face_path);
  if (!ff) throw Error(ErrorCode::InvalidInput, "cannot write " + face_path);
  ff.precision(17);
  ff << "elem,neighbor,tag,ax,ay,bx,by\n";
  static const char* sides[] = {"bottom", "right", "top", "left"};
  for (const auto& e : mesh.elements) {
    for (const auto& f : e.faces) {
      std::string tag = "interior";
      if (f.tag.kind == FaceTag::Kind::Domain) tag = std::string("domain_") + sides[f.tag.index];
      if (f.tag.kind == FaceTag::Kind::Curve) tag = "curve_" + std::to_string(f.tag.index);
      ff << e.id << ',' << f.neighbor << ',' << tag << ',' << f.a.x() << ',' << f.a.y() << ',' << f.b.x() << ','
         << f.b.y() << '\n';
    }
  }
}

} // namespace cutwave
