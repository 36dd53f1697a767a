#include "cutwave/wave_dg.hpp"

#include "cutwave/error.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>

namespace cutwave {

BcKind parse_bc(const std::string& name) {
  if (name == "wall") return BcKind::Wall;
  if (name == "zero_pressure") return BcKind::ZeroPressure;
  if (name == "extrapolation") return BcKind::Extrapolation;
  if (name == "analytic") return BcKind::Analytic;
  if (name == "inflow_pressure") return BcKind::InflowPressure;
  throw Error(ErrorCode::UnknownBoundaryTag, "boundary condition '" + name + "'");
}

const char* to_string(BcKind kind) {
  switch (kind) {
  case BcKind::Wall: return "wall";
  case BcKind::ZeroPressure: return "zero_pressure";
  case BcKind::Extrapolation: return "extrapolation";
  case BcKind::Analytic: return "analytic";
  case BcKind::InflowPressure: return "inflow_pressure";
  }
  return "?";
}

Fields boundary_trace(BcKind kind, const Fields& in, const Vec2& n, const Vec2& x, double t, const WaveProblem& pb) {
  switch (kind) {
  case BcKind::Wall: {
    double un = in.ux * n.x() + in.uy * n.y();
    return {in.p, in.ux - 2.0 * un * n.x(), in.uy - 2.0 * un * n.y()};
  }
  case BcKind::ZeroPressure: return {-in.p, in.ux, in.uy};
  case BcKind::Extrapolation: return in;
  case BcKind::Analytic:
    if (!pb.exact) throw Error(ErrorCode::UnknownBoundaryTag, "analytic boundary without an exact solution");
    return pb.exact(x, t);
  case BcKind::InflowPressure: {
    double ps = pb.inflow_pressure ? pb.inflow_pressure(t) : 0.0;
    return {2.0 * ps - in.p, in.ux, in.uy};
  }
  }
  throw Error(ErrorCode::UnknownBoundaryTag, "unhandled boundary kind");
}

namespace {

BcKind face_bc(const Face& f, const WaveProblem& pb) {
  if (f.tag.kind == FaceTag::Kind::Domain) return pb.domain_bc[f.tag.index];
  if (f.tag.kind == FaceTag::Kind::Curve) {
    if (f.tag.index < 0 || f.tag.index >= static_cast<int>(pb.curve_bc.size()))
      throw Error(ErrorCode::UnknownBoundaryTag, "no boundary condition for curve " + std::to_string(f.tag.index));
    return pb.curve_bc[f.tag.index];
  }
  throw Error(ErrorCode::MissingNeighborTrace, "interior face without a neighbor");
}

} // namespace

void rhs(const Discretization& d, const WaveProblem& pb, const Eigen::VectorXd& U, double t, Eigen::VectorXd& dU,
         Form form) {
  const int ne = d.element_count();
  const auto& mesh = *d.mesh;
  dU.resize(d.size);

  // Face traces of every element, columns p, ux, uy.
  std::vector<std::vector<Eigen::MatrixXd>> trace(ne);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto& op = *d.ops[e];
    const int np = op.np;
    Eigen::Map<const Eigen::MatrixXd> u(U.data() + d.offset[e], np, 3);
    trace[e].resize(op.Vf.size());
    for (std::size_t f = 0; f < op.Vf.size(); ++f) trace[e][f].noalias() = op.Vf[f] * u;
  }

  std::vector<std::exception_ptr> failure(ne);
  const double c2 = pb.c * pb.c;
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    try {
      const auto& op = *d.ops[e];
      const int np = op.np;
      const auto& el = mesh.elements[e];
      Eigen::Map<const Eigen::VectorXd> p(U.data() + d.offset[e], np);
      Eigen::Map<const Eigen::VectorXd> ux(U.data() + d.offset[e] + np, np);
      Eigen::Map<const Eigen::VectorXd> uy(U.data() + d.offset[e] + 2 * np, np);
      Eigen::Map<Eigen::VectorXd> dp(dU.data() + d.offset[e], np);
      Eigen::Map<Eigen::VectorXd> dux(dU.data() + d.offset[e] + np, np);
      Eigen::Map<Eigen::VectorXd> duy(dU.data() + d.offset[e] + 2 * np, np);
      if (form == Form::Skew) {
        dp.noalias() = -(op.MinvSx * ux + op.MinvSy * uy);
        dux.noalias() = -op.MinvSx * p;
        duy.noalias() = -op.MinvSy * p;
      } else {
        dp.noalias() = -(op.MinvQx * ux + op.MinvQy * uy);
        dux.noalias() = -op.MinvQx * p;
        duy.noalias() = -op.MinvQy * p;
      }

      for (std::size_t f = 0; f < el.faces.size(); ++f) {
        const Face& face = el.faces[f];
        const FaceRule& fr = d.faces[e][f];
        const Eigen::MatrixXd& in = trace[e][f];
        const int nq = static_cast<int>(in.rows());
        Eigen::MatrixXd flux(nq, 3);
        for (int q = 0; q < nq; ++q) {
          Fields mine{in(q, 0), in(q, 1), in(q, 2)};
          Fields ext;
          if (face.neighbor >= 0) {
            const auto& other = trace[face.neighbor][face.twin];
            int r = d.twin_perm[e][f][q];
            ext = {other(r, 0), other(r, 1), other(r, 2)};
          } else {
            ext = boundary_trace(face_bc(face, pb), mine, fr.normals[q], fr.points[q], t, pb);
          }
          const Vec2& n = fr.normals[q];
          double jp = ext.p - mine.p, jux = ext.ux - mine.ux, juy = ext.uy - mine.uy;
          if (form == Form::Skew) {
            flux(q, 0) = -0.5 * (ext.ux * n.x() + ext.uy * n.y()) + 0.5 * pb.tau_p * jp;
            flux(q, 1) = -0.5 * ext.p * n.x() + 0.5 * pb.tau_u * jux;
            flux(q, 2) = -0.5 * ext.p * n.y() + 0.5 * pb.tau_u * juy;
          } else {
            flux(q, 0) = -0.5 * (jux * n.x() + juy * n.y()) + 0.5 * pb.tau_p * jp;
            flux(q, 1) = -0.5 * jp * n.x() + 0.5 * pb.tau_u * jux;
            flux(q, 2) = -0.5 * jp * n.y() + 0.5 * pb.tau_u * juy;
          }
        }
        dp.noalias() += op.Lift[f] * flux.col(0);
        dux.noalias() += op.Lift[f] * flux.col(1);
        duy.noalias() += op.Lift[f] * flux.col(2);
      }
      dp *= c2;

      if (pb.forcing) {
        const auto& rule = d.rules[e];
        Eigen::VectorXd fq(rule.points.size());
        for (std::size_t q = 0; q < rule.points.size(); ++q) fq(q) = pb.forcing(rule.points[q], t);
        dp.noalias() += op.Project * fq;
      }
    } catch (...) {
      failure[e] = std::current_exception();
    }
  }
  for (const auto& f : failure)
    if (f) std::rethrow_exception(f);
}

double energy_inner(const Discretization& d, const Eigen::VectorXd& U, const Eigen::VectorXd& W, double c) {
  double E = 0.0;
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& op = *d.ops[e];
    const int np = op.np;
    for (int comp = 0; comp < 3; ++comp) {
      Eigen::VectorXd a = op.Vinv * U.segment(d.offset[e] + comp * np, np);
      Eigen::VectorXd b = op.Vinv * W.segment(d.offset[e] + comp * np, np);
      E += (comp == 0 ? 1.0 / (c * c) : 1.0) * a.dot(b);
    }
  }
  return E;
}

double discrete_energy(const Discretization& d, const Eigen::VectorXd& U, double c) { return energy_inner(d, U, U, c); }

Eigen::VectorXd interpolate(const Discretization& d, const ExactSolution& f, double t) {
  Eigen::VectorXd U(d.size);
  for (int e = 0; e < d.element_count(); ++e) {
    const int np = d.np(e);
    for (int k = 0; k < np; ++k) {
      Fields v = f(d.nodes[e][k], t);
      U(d.offset[e] + k) = v.p;
      U(d.offset[e] + np + k) = v.ux;
      U(d.offset[e] + 2 * np + k) = v.uy;
    }
  }
  return U;
}

double l2_error(const Discretization& d, const Eigen::VectorXd& U, const ExactSolution& f, double t) {
  double err = 0.0;
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& op = *d.ops[e];
    const int np = op.np;
    Eigen::Map<const Eigen::MatrixXd> u(U.data() + d.offset[e], np, 3);
    Eigen::MatrixXd uq = op.Vq * u;
    const auto& rule = d.rules[e];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Fields v = f(rule.points[q], t);
      double dp = uq(q, 0) - v.p, dx = uq(q, 1) - v.ux, dy = uq(q, 2) - v.uy;
      err += rule.weights[q] * (dp * dp + dx * dx + dy * dy);
    }
  }
  return std::sqrt(std::max(err, 0.0));
}

double linf_pressure_error(const Discretization& d, const Eigen::VectorXd& U, const ExactSolution& f, double t) {
  double err = 0.0;
  for (int e = 0; e < d.element_count(); ++e)
    for (int k = 0; k < d.np(e); ++k)
      err = std::max(err, std::abs(U(d.offset[e] + k) - f(d.nodes[e][k], t).p));
  return err;
}

Fields mms_solution(const Vec2& x, double t) {
  constexpr double pi = std::numbers::pi;
  const double sx = std::sin(pi * x.x()), sy = std::sin(pi * x.y());
  const double cx = std::cos(pi * x.x()), cy = std::cos(pi * x.y());
  const double s2t = std::sin(2.0 * pi * t);
  return {std::cos(2.0 * pi * t) * sx * sy, -0.5 * s2t * cx * sy, -0.5 * s2t * sx * cy};
}

double mms_forcing(const Vec2& x, double t) {
  constexpr double pi = std::numbers::pi;
  return -pi * std::sin(2.0 * pi * t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
}

Fields evaluate(const Discretization& d, const Eigen::VectorXd& U, int e, const Vec2& x) {
  const auto& op = *d.ops[e];
  const int np = op.np;
  Eigen::RowVectorXd row = op.interpolation_matrix({x - d.origin[e]});
  Eigen::Map<const Eigen::MatrixXd> u(U.data() + d.offset[e], np, 3);
  Eigen::RowVector3d v = row * u;
  return {v(0), v(1), v(2)};
}

void write_field_csv(const std::string& path, const Discretization& d, const Eigen::VectorXd& U, int density,
                     const ExactSolution& reference, double t) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(10);
  out << "elem,x,y,p,ux,uy";
  if (reference) out << ",p_exact,p_error";
  out << '\n';
  const auto& mesh = *d.mesh;
  const auto& g = mesh.grid;
  density = std::max(density, 2);
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    const Vec2 lo = g.cell_lo(el.cell_i, el.cell_j);
    std::vector<Vec2> pts;
    for (int j = 0; j < density; ++j)
      for (int i = 0; i < density; ++i) {
        Vec2 p(lo.x() + (i + 0.5) * g.dx() / density, lo.y() + (j + 0.5) * g.dy() / density);
        if (el.kind == ElementKind::Cartesian || element_contains(el, p)) pts.push_back(p);
      }
    if (pts.empty()) continue;
    std::vector<Vec2> local;
    for (const auto& p : pts) local.push_back(p - d.origin[e]);
    const auto& op = *d.ops[e];
    Eigen::Map<const Eigen::MatrixXd> u(U.data() + d.offset[e], op.np, 3);
    Eigen::MatrixXd vals = op.interpolation_matrix(local) * u;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      out << e << ',' << pts[k].x() << ',' << pts[k].y() << ',' << vals(k, 0) << ',' << vals(k, 1) << ',' << vals(k, 2);
      if (reference) {
        double pe = reference(pts[k], t).p;
        out << ',' << pe << ',' << vals(k, 0) - pe;
      }
      out << '\n';
    }
  }
}

} // namespace cutwave
