#include "cutwave/basis_ops.hpp"

#include "cutwave/error.hpp"
#include "cutwave/legendre.hpp"

#include <spdlog/spdlog.h>

#include <exception>

namespace cutwave {

std::shared_ptr<ElementOperators> build_operators(const std::vector<std::pair<int, int>>& basis, const Vec2& c, double hx,
                                                  double hy, const std::vector<Vec2>& nodes, const VolumeRule& volume,
                                                  const std::vector<FaceRule>& faces) {
  const int nb = static_cast<int>(basis.size());
  if (static_cast<int>(nodes.size()) != nb)
    throw Error(ErrorCode::InvalidInput, "node count does not match the polynomial space");
  auto op = std::make_shared<ElementOperators>();
  op->np = nb;
  op->basis = basis;
  op->center = c;
  op->hx = hx;
  op->hy = hy;

  Eigen::MatrixXd Phiq = legendre_vandermonde(volume.points, c, hx, hy, basis);
  op->wq = Eigen::Map<const Eigen::VectorXd>(volume.weights.data(), volume.weights.size());
  Eigen::MatrixXd G = Phiq.transpose() * op->wq.asDiagonal() * Phiq;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::IllConditionedMass, "modal Gram matrix is not positive definite");
  // psi = phi * T with T = L^{-T} is orthonormal under the volume rule.
  Eigen::MatrixXd T = llt.matrixU().solve(Eigen::MatrixXd::Identity(nb, nb));

  op->T = T;
  op->V = legendre_vandermonde(nodes, c, hx, hy, basis) * T;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op->V);
  const auto& sv = svd.singularValues();
  double condV = sv(0) / sv(sv.size() - 1);
  op->mass_condition = condV * condV;
  if (!(op->mass_condition < 1e12))
    throw Error(ErrorCode::IllConditionedMass, "mass matrix condition " + std::to_string(op->mass_condition));
  op->Vinv = op->V.partialPivLu().inverse();
  op->M = op->Vinv.transpose() * op->Vinv;
  op->Minv = op->V * op->V.transpose();

  op->Vq = Phiq * T * op->Vinv;
  Eigen::MatrixXd gx, gy;
  legendre_gradients(nodes, c, hx, hy, basis, gx, gy);
  op->Dx = gx * T * op->Vinv;
  op->Dy = gy * T * op->Vinv;
  Eigen::MatrixXd VqW = op->Vq.transpose() * op->wq.asDiagonal();
  op->Qx = VqW * op->Vq * op->Dx;
  op->Qy = VqW * op->Vq * op->Dy;
  op->MinvQx = op->Minv * op->Qx;
  op->MinvQy = op->Minv * op->Qy;
  op->MinvSx = op->Minv * (0.5 * (op->Qx - op->Qx.transpose()));
  op->MinvSy = op->Minv * (0.5 * (op->Qy - op->Qy.transpose()));
  op->Project = op->Minv * VqW;

  for (const auto& f : faces) {
    Eigen::MatrixXd Vf = legendre_vandermonde(f.points, c, hx, hy, basis) * T * op->Vinv;
    Eigen::Map<const Eigen::VectorXd> wf(f.weights.data(), f.weights.size());
    op->Lift.push_back(op->Minv * Vf.transpose() * wf.asDiagonal());
    op->Vf.push_back(std::move(Vf));
  }
  return op;
}

Eigen::MatrixXd ElementOperators::interpolation_matrix(const std::vector<Vec2>& points) const {
  return legendre_vandermonde(points, center, hx, hy, basis) * T * Vinv;
}

std::vector<Vec2> cartesian_nodes(int N, double dx, double dy) {
  auto r = cartesian_rules(N);
  std::vector<Vec2> pts;
  for (const auto& p : r.nodes) pts.emplace_back(0.5 * dx * p.x(), 0.5 * dy * p.y());
  return pts;
}

VolumeRule cartesian_volume_rule(int N, double dx, double dy) {
  auto r = cartesian_rules(N).volume;
  for (auto& p : r.points) p = Vec2(0.5 * dx * p.x(), 0.5 * dy * p.y());
  for (auto& w : r.weights) w *= 0.25 * dx * dy;
  return r;
}

std::vector<FaceRule> cartesian_face_rules(int N, double dx, double dy) {
  const double hx = 0.5 * dx, hy = 0.5 * dy;
  const Vec2 corners[4] = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
  std::vector<Face> faces;
  for (int k = 0; k < 4; ++k) {
    Face f;
    f.a = corners[k];
    f.b = corners[(k + 1) % 4];
    f.side = static_cast<Side>(k);
    faces.push_back(f);
  }
  std::vector<FaceRule> rules;
  const std::vector<ParametricCurve> none;
  for (const auto& f : faces) rules.push_back(face_rule(none, f, N));
  return rules;
}

std::shared_ptr<ElementOperators> cartesian_operators(int N, double dx, double dy) {
  return build_operators(tensor_indices(N), Vec2::Zero(), 0.5 * dx, 0.5 * dy, cartesian_nodes(N, dx, dy),
                         cartesian_volume_rule(N, dx, dy), cartesian_face_rules(N, dx, dy));
}

std::shared_ptr<ElementOperators> cut_operators(int N, const std::vector<Vec2>& nodes, const VolumeRule& volume,
                                                const std::vector<FaceRule>& faces, bool box_frame) {
  auto frame = box_frame ? MappedElementFrame::box_from_faces(faces) : MappedElementFrame::from_faces(faces);
  return build_operators(total_degree_indices(N), frame.center, frame.hx, frame.hy, nodes, volume, faces);
}

namespace {

Vec2 periodic_delta(const BackgroundGrid& g, const MeshOptions& o, Vec2 d) {
  const double Lx = g.x1 - g.x0, Ly = g.y1 - g.y0;
  if (o.periodic_x) d.x() -= Lx * std::round(d.x() / Lx);
  if (o.periodic_y) d.y() -= Ly * std::round(d.y() / Ly);
  return d;
}

} // namespace

Discretization discretize(std::shared_ptr<const CutMesh> mesh, int N, const FeketeOptions& opt) {
  if (N < 1) throw Error(ErrorCode::InvalidInput, "polynomial degree must be at least 1");
  Discretization d;
  d.mesh = mesh;
  d.N = N;
  const auto& g = mesh->grid;
  const int ne = mesh->element_count();
  d.ops.resize(ne);
  d.nodes.resize(ne);
  d.rules.resize(ne);
  d.faces.resize(ne);
  d.volume.resize(ne);
  d.origin.assign(ne, Vec2::Zero());

  auto cart = cartesian_operators(N, g.dx(), g.dy());
  const auto cart_nodes = cartesian_nodes(N, g.dx(), g.dy());
  const auto cart_rule = cartesian_volume_rule(N, g.dx(), g.dy());

  std::vector<std::exception_ptr> failures(ne);
#pragma omp parallel for schedule(dynamic)
  for (int e = 0; e < ne; ++e) {
    try {
      const Element& el = mesh->elements[e];
      d.faces[e] = face_rules(*mesh, el, N);
      if (el.kind == ElementKind::Cartesian) {
        const Vec2 c = g.cell_center(el.cell_i, el.cell_j);
        d.ops[e] = cart;
        d.origin[e] = c;
        for (const auto& p : cart_nodes) d.nodes[e].push_back(c + p);
        d.rules[e] = cart_rule;
        for (auto& p : d.rules[e].points) p += c;
      } else {
        auto build = [&](const FeketeOptions& o) {
          d.rules[e] = fekete_volume_rule(*mesh, el, d.faces[e], N, o);
          d.nodes[e] = interpolation_nodes(*mesh, el, d.faces[e], N, o);
          d.ops[e] = cut_operators(N, d.nodes[e], d.rules[e], d.faces[e], o.box_frame);
        };
        try {
          build(opt);
        } catch (const Error& err) {
          if (opt.box_frame || (err.code() != ErrorCode::RankDeficient && err.code() != ErrorCode::IllConditionedMass))
            throw;
          // Thin slivers: the same spaces in a frame scaled per axis.
          FeketeOptions box = opt;
          box.box_frame = true;
          build(box);
          spdlog::warn("element {} ({}, {}): {}; rebuilt in a bounding-box frame", e, el.cell_i, el.cell_j, err.what());
        }
      }
      d.volume[e] = d.rules[e].sum();
    } catch (...) {
      failures[e] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  d.offset.resize(ne);
  Eigen::Index off = 0;
  for (int e = 0; e < ne; ++e) {
    d.offset[e] = off;
    off += 3 * d.ops[e]->np;
  }
  d.size = off;

  // Node correspondence on twin faces.
  const double tol = 1e-9 * std::max(g.dx(), g.dy());
  d.twin_perm.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& el = mesh->elements[e];
    d.twin_perm[e].resize(el.faces.size());
    for (std::size_t f = 0; f < el.faces.size(); ++f) {
      const Face& face = el.faces[f];
      if (face.neighbor < 0) continue;
      const auto& mine = d.faces[e][f].points;
      const auto& theirs = d.faces[face.neighbor][face.twin].points;
      auto& perm = d.twin_perm[e][f];
      perm.assign(mine.size(), -1);
      for (std::size_t q = 0; q < mine.size(); ++q) {
        std::size_t guess = theirs.size() - 1 - q;
        if (periodic_delta(g, mesh->options, theirs[guess] - mine[q]).norm() < tol) {
          perm[q] = static_cast<int>(guess);
          continue;
        }
        for (std::size_t r = 0; r < theirs.size(); ++r)
          if (periodic_delta(g, mesh->options, theirs[r] - mine[q]).norm() < tol) perm[q] = static_cast<int>(r);
        if (perm[q] < 0)
          throw Error(ErrorCode::MissingNeighborTrace,
                      "face node of element " + std::to_string(e) + " has no partner on element " + std::to_string(face.neighbor));
      }
    }
  }
  return d;
}

} // namespace cutwave
