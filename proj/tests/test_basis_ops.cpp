#include "cutwave/basis_ops.hpp"
#include "cutwave/error.hpp"
#include "cutwave/legendre.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace cutwave;

namespace {

// sum c_ij ((x-ox)/s)^i ((y-oy)/s)^j over the given index set, with derivatives.
struct Poly {
  std::vector<std::pair<int, int>> idx;
  std::vector<double> c;
  Vec2 o = Vec2::Zero();
  double s = 1.0;

  double operator()(const Vec2& p) const {
    double x = (p.x() - o.x()) / s, y = (p.y() - o.y()) / s, v = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) v += c[k] * std::pow(x, idx[k].first) * std::pow(y, idx[k].second);
    return v;
  }
  double dx(const Vec2& p) const {
    double x = (p.x() - o.x()) / s, y = (p.y() - o.y()) / s, v = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto [i, j] = idx[k];
      if (i > 0) v += c[k] * i * std::pow(x, i - 1) * std::pow(y, j) / s;
    }
    return v;
  }
  double dy(const Vec2& p) const {
    double x = (p.x() - o.x()) / s, y = (p.y() - o.y()) / s, v = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto [i, j] = idx[k];
      if (j > 0) v += c[k] * j * std::pow(x, i) * std::pow(y, j - 1) / s;
    }
    return v;
  }
};

Poly random_poly(std::vector<std::pair<int, int>> idx, std::mt19937& rng, Vec2 o, double s) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Poly p{std::move(idx), {}, o, s};
  for (std::size_t k = 0; k < p.idx.size(); ++k) p.c.push_back(U(rng));
  return p;
}

Eigen::VectorXd sample(const Poly& p, const std::vector<Vec2>& pts) {
  Eigen::VectorXd v(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) v(k) = p(pts[k]);
  return v;
}

// Principal lattice of a triangle stretched over the box; unisolvent for P^N.
std::vector<Vec2> lattice_nodes(int N, double x0, double x1, double y0, double y1) {
  std::vector<Vec2> pts;
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i + j <= N; ++i)
      pts.emplace_back(x0 + (x1 - x0) * (0.1 + 0.8 * i / N), y0 + (y1 - y0) * (0.1 + 0.8 * j / N));
  return pts;
}

// Tensor Gauss rule on a box, built from the 1D rule only.
VolumeRule box_rule(int n, double x0, double x1, double y0, double y1) {
  const auto& g = gauss_legendre(n);
  VolumeRule r;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      r.points.emplace_back(0.5 * (x0 + x1) + 0.5 * (x1 - x0) * g.x[i], 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * g.x[j]);
      r.weights.push_back(0.25 * (x1 - x0) * (y1 - y0) * g.w[i] * g.w[j]);
    }
  return r;
}

std::vector<FaceRule> box_faces(int n, double x0, double x1, double y0, double y1) {
  const auto& g = gauss_legendre(n);
  const Vec2 c[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  const Vec2 nrm[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  std::vector<FaceRule> faces(4);
  for (int k = 0; k < 4; ++k) {
    Vec2 a = c[k], b = c[(k + 1) % 4];
    for (int q = 0; q < n; ++q) {
      faces[k].points.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.x[q]);
      faces[k].weights.push_back(0.5 * (b - a).norm() * g.w[q]);
      faces[k].normals.push_back(nrm[k]);
    }
  }
  return faces;
}

std::shared_ptr<const CutMesh> circle_mesh() {
  BackgroundGrid g;
  g.nx = g.ny = 8;
  return std::make_shared<const CutMesh>(build_cut_mesh(g, {circle(Vec2(0, 0), 0.699)}));
}

} // namespace

TEST_CASE("Cartesian operators: constants, x*y and the mass of x^2") {
  const double dx = 0.5, dy = 0.25;
  for (int N = 1; N <= 5; ++N) {
    auto op = cartesian_operators(N, dx, dy);
    auto nodes = cartesian_nodes(N, dx, dy);
    REQUIRE(op->np == (N + 1) * (N + 1));
    Eigen::VectorXd one = Eigen::VectorXd::Ones(op->np);
    CHECK((op->Dx * one).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((op->Dy * one).lpNorm<Eigen::Infinity>() < 1e-10);
    // x^ y^ with x^ = 2x/dx: d/dx = (2/dx) y^.
    Eigen::VectorXd xy(op->np), yhat(op->np), x2(op->np);
    for (int k = 0; k < op->np; ++k) {
      double xh = 2 * nodes[k].x() / dx, yh = 2 * nodes[k].y() / dy;
      xy(k) = xh * yh;
      yhat(k) = yh;
      x2(k) = xh * xh;
    }
    CHECK((op->Dx * xy - (2 / dx) * yhat).lpNorm<Eigen::Infinity>() < 1e-10);
    // int x^2 over the reference square is 4/3, times the Jacobian dx dy / 4; x^2 needs N >= 2.
    if (N >= 2) CHECK(one.dot(op->M * x2) == doctest::Approx(4.0 / 3 * dx * dy / 4).epsilon(1e-13));
  }
}

TEST_CASE("Cartesian mass matrices are symmetric positive definite") {
  for (int N = 1; N <= 6; ++N) {
    auto op = cartesian_operators(N, 0.25, 0.25);
    CHECK((op->M - op->M.transpose()).norm() < 1e-14 * op->M.norm());
    Eigen::LLT<Eigen::MatrixXd> llt(op->M);
    CHECK(llt.info() == Eigen::Success);
    CHECK((op->M * op->Minv - Eigen::MatrixXd::Identity(op->np, op->np)).norm() < 1e-10);
    CHECK(op->mass_condition < 1e4);
  }
}

TEST_CASE("interpolate-then-differentiate is exact on Q^N") {
  std::mt19937 rng(5);
  const double dx = 0.3, dy = 0.2;
  for (int N = 1; N <= 5; ++N) {
    auto op = cartesian_operators(N, dx, dy);
    auto nodes = cartesian_nodes(N, dx, dy);
    auto p = random_poly(tensor_indices(N), rng, Vec2::Zero(), 0.15);
    Eigen::VectorXd u = sample(p, nodes), ex(op->np), ey(op->np);
    for (int k = 0; k < op->np; ++k) {
      ex(k) = p.dx(nodes[k]);
      ey(k) = p.dy(nodes[k]);
    }
    double scale = std::max(1.0, ex.lpNorm<Eigen::Infinity>());
    CHECK((op->Dx * u - ex).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
    CHECK((op->Dy * u - ey).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
  }
}

TEST_CASE("Cartesian summation by parts against the face quadrature") {
  std::mt19937 rng(9);
  std::normal_distribution<double> G;
  const double dx = 0.4, dy = 0.3;
  for (int N = 1; N <= 5; ++N) {
    auto op = cartesian_operators(N, dx, dy);
    auto faces = cartesian_face_rules(N, dx, dy);
    REQUIRE(op->Vf.size() == 4);
    Eigen::VectorXd u(op->np), v(op->np);
    for (int k = 0; k < op->np; ++k) {
      u(k) = G(rng);
      v(k) = G(rng);
    }
    double bx = 0.0, by = 0.0;
    for (int f = 0; f < 4; ++f) {
      Eigen::VectorXd uf = op->Vf[f] * u, vf = op->Vf[f] * v;
      for (std::size_t q = 0; q < faces[f].points.size(); ++q) {
        bx += faces[f].weights[q] * vf(q) * faces[f].normals[q].x() * uf(q);
        by += faces[f].weights[q] * vf(q) * faces[f].normals[q].y() * uf(q);
      }
    }
    CHECK(std::abs(v.dot(op->Qx * u) + u.dot(op->Qx * v) - bx) < 1e-8);
    CHECK(std::abs(v.dot(op->Qy * u) + u.dot(op->Qy * v) - by) < 1e-8);
  }
}

TEST_CASE("a cut element that is the whole square behaves like an affine P^N element") {
  std::mt19937 rng(13);
  for (int N = 1; N <= 4; ++N) {
    auto nodes = lattice_nodes(N, -1, 1, -1, 1);
    auto op = cut_operators(N, nodes, box_rule(N + 2, -1, 1, -1, 1), box_faces(N + 2, -1, 1, -1, 1));
    REQUIRE(op->np == dim_total(N));
    Eigen::VectorXd x(op->np), one = Eigen::VectorXd::Ones(op->np);
    for (int k = 0; k < op->np; ++k) x(k) = nodes[k].x();
    CHECK((op->Dx * x - one).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK((op->Dy * x).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK(one.dot(op->M * one) == doctest::Approx(4.0).epsilon(1e-12));
    // (p, q)_M equals the exact integral for p, q in P^N.
    auto p = random_poly(total_degree_indices(N), rng, Vec2::Zero(), 1.0);
    auto q = random_poly(total_degree_indices(N), rng, Vec2::Zero(), 1.0);
    auto fine = box_rule(N + 3, -1, 1, -1, 1);
    double exact = 0.0;
    for (std::size_t k = 0; k < fine.points.size(); ++k) exact += fine.weights[k] * p(fine.points[k]) * q(fine.points[k]);
    CHECK(sample(p, nodes).dot(op->M * sample(q, nodes)) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("half-square element has area 2") {
  for (int N = 1; N <= 3; ++N) {
    auto nodes = lattice_nodes(N, -1, 1, -1, 0);
    auto op = cut_operators(N, nodes, box_rule(N + 2, -1, 1, -1, 0), box_faces(N + 2, -1, 1, -1, 0));
    Eigen::VectorXd one = Eigen::VectorXd::Ones(op->np);
    CHECK(one.dot(op->M * one) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("nearly coincident nodes give an ill-conditioned mass matrix") {
  auto nodes = lattice_nodes(2, -1, 1, -1, 1);
  nodes[1] = nodes[0] + Vec2(1e-9, 0);
  bool thrown = false;
  try {
    cut_operators(2, nodes, box_rule(4, -1, 1, -1, 1), box_faces(4, -1, 1, -1, 1));
  } catch (const Error& e) {
    thrown = e.code() == ErrorCode::IllConditionedMass;
  }
  CHECK(thrown);
}

TEST_CASE("cut elements: derivatives of random P^N polynomials are exact at the nodes") {
  auto mesh = circle_mesh();
  std::mt19937 rng(17);
  for (int N = 1; N <= 4; ++N) {
    auto d = discretize(mesh, N);
    int cut = 0;
    for (int e = 0; e < d.element_count(); ++e) {
      if (mesh->elements[e].kind != ElementKind::Cut) continue;
      ++cut;
      const auto& op = *d.ops[e];
      REQUIRE(op.np == dim_total(N));
      // Operators for cut elements act on physical coordinates (origin zero).
      CHECK(d.origin[e].norm() == 0.0);
      Vec2 c = 0.5 * (mesh->grid.cell_lo(mesh->elements[e].cell_i, mesh->elements[e].cell_j) +
                      mesh->grid.cell_hi(mesh->elements[e].cell_i, mesh->elements[e].cell_j));
      auto p = random_poly(total_degree_indices(N), rng, c, 0.125);
      Eigen::VectorXd u = sample(p, d.nodes[e]), ex(op.np), ey(op.np);
      for (int k = 0; k < op.np; ++k) {
        ex(k) = p.dx(d.nodes[e][k]);
        ey(k) = p.dy(d.nodes[e][k]);
      }
      double scale = std::max(ex.lpNorm<Eigen::Infinity>(), ey.lpNorm<Eigen::Infinity>());
      CHECK((op.Dx * u - ex).lpNorm<Eigen::Infinity>() < 1e-9 * scale);
      CHECK((op.Dy * u - ey).lpNorm<Eigen::Infinity>() < 1e-9 * scale);
    }
    CHECK(cut > 0);
  }
}

TEST_CASE("mass matrices reproduce the volume-rule inner product") {
  auto mesh = circle_mesh();
  auto d = discretize(mesh, 3);
  std::mt19937 rng(19);
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& op = *d.ops[e];
    Vec2 c = mesh->grid.cell_center(mesh->elements[e].cell_i, mesh->elements[e].cell_j);
    auto idx = mesh->elements[e].kind == ElementKind::Cut ? total_degree_indices(3) : tensor_indices(3);
    auto p = random_poly(idx, rng, c, 0.125), q = random_poly(idx, rng, c, 0.125);
    double quad = 0.0;
    for (std::size_t k = 0; k < d.rules[e].points.size(); ++k)
      quad += d.rules[e].weights[k] * p(d.rules[e].points[k]) * q(d.rules[e].points[k]);
    double m = sample(p, d.nodes[e]).dot(op.M * sample(q, d.nodes[e]));
    CHECK(std::abs(m - quad) <= 1e-12 * std::max(1.0, std::abs(quad)));
    CHECK((op.M - op.M.transpose()).norm() <= 1e-12 * op.M.norm());
  }
}

TEST_CASE("interpolation matrix at the nodes is the identity") {
  auto mesh = circle_mesh();
  auto d = discretize(mesh, 2);
  for (int e = 0; e < d.element_count(); ++e) {
    std::vector<Vec2> local;
    for (const auto& x : d.nodes[e]) local.push_back(x - d.origin[e]);
    Eigen::MatrixXd I = d.ops[e]->interpolation_matrix(local);
    CHECK((I - Eigen::MatrixXd::Identity(d.np(e), d.np(e))).norm() < 1e-9);
  }
}

TEST_CASE("discretization layout and twin face permutations") {
  auto mesh = circle_mesh();
  auto d = discretize(mesh, 2);
  Eigen::Index expect = 0;
  for (int e = 0; e < d.element_count(); ++e) {
    CHECK(d.offset[e] == expect);
    expect += 3 * d.np(e);
    CHECK(d.np(e) == (mesh->elements[e].kind == ElementKind::Cut ? 6 : 9));
    CHECK(d.volume[e] == doctest::Approx(mesh->elements[e].volume).epsilon(1e-10));
    const auto& el = mesh->elements[e];
    for (std::size_t f = 0; f < el.faces.size(); ++f) {
      if (el.faces[f].neighbor < 0) continue;
      const auto& mine = d.faces[e][f].points;
      const auto& theirs = d.faces[el.faces[f].neighbor][el.faces[f].twin].points;
      for (std::size_t q = 0; q < mine.size(); ++q) CHECK((theirs[d.twin_perm[e][f][q]] - mine[q]).norm() < 1e-12);
    }
  }
  CHECK(d.size == expect);
}
