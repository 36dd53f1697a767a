#include "cutwave/error.hpp"
#include "cutwave/timeint.hpp"
#include "cutwave/wave_dg.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>

using namespace cutwave;
using std::numbers::pi;

namespace {

std::shared_ptr<const CutMesh> make_mesh(int n, std::vector<ParametricCurve> curves = {}, bool periodic = false) {
  BackgroundGrid g;
  g.nx = g.ny = n;
  MeshOptions opt;
  opt.periodic_x = opt.periodic_y = periodic;
  return std::make_shared<const CutMesh>(build_cut_mesh(g, std::move(curves), opt));
}

Eigen::VectorXd random_state(const Discretization& d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> G;
  Eigen::VectorXd U(d.size);
  for (Eigen::Index k = 0; k < U.size(); ++k) U(k) = G(rng);
  return U;
}

Fields pulse(const Vec2& x, double) {
  double r2 = (x - Vec2(0.2, 0.3)).squaredNorm();
  return {std::exp(-20.0 * r2), 0.0, 0.0};
}

// Analytic time derivative of the manufactured fields.
Fields mms_dt(const Vec2& x, double t) {
  const double sx = std::sin(pi * x.x()), sy = std::sin(pi * x.y());
  const double cx = std::cos(pi * x.x()), cy = std::cos(pi * x.y());
  return {-2 * pi * std::sin(2 * pi * t) * sx * sy, -pi * std::cos(2 * pi * t) * cx * sy,
          -pi * std::cos(2 * pi * t) * sx * cy};
}

WaveProblem mms_problem() {
  WaveProblem pb;
  pb.domain_bc.fill(BcKind::Analytic);
  pb.curve_bc = {BcKind::Analytic};
  pb.exact = mms_solution;
  pb.forcing = mms_forcing;
  return pb;
}

} // namespace

TEST_CASE("boundary traces") {
  WaveProblem pb;
  const Vec2 n(0.6, 0.8);
  Fields in{1.0, n.x(), n.y()};
  Fields w = boundary_trace(BcKind::Wall, in, n, Vec2::Zero(), 0.0, pb);
  CHECK(w.p == 1.0);
  CHECK(w.ux == doctest::Approx(-n.x()).epsilon(1e-15));
  CHECK(w.uy == doctest::Approx(-n.y()).epsilon(1e-15));
  // Tangential velocity passes through a wall.
  Fields tang = boundary_trace(BcKind::Wall, {0.0, -n.y(), n.x()}, n, Vec2::Zero(), 0.0, pb);
  CHECK(tang.ux == doctest::Approx(-n.y()));
  CHECK(tang.uy == doctest::Approx(n.x()));
  CHECK(boundary_trace(BcKind::ZeroPressure, in, n, Vec2::Zero(), 0.0, pb).p == -1.0);
  Fields ex = boundary_trace(BcKind::Extrapolation, in, n, Vec2::Zero(), 0.0, pb);
  CHECK((ex.p == in.p && ex.ux == in.ux && ex.uy == in.uy));

  pb.exact = mms_solution;
  const Vec2 x(0.3, -0.7);
  Fields a = boundary_trace(BcKind::Analytic, in, n, x, 0.0, pb);
  CHECK(a.p == doctest::Approx(std::sin(pi * 0.3) * std::sin(-pi * 0.7)).epsilon(1e-15));
  CHECK(a.ux == 0.0);

  pb.inflow_pressure = [](double t) { return t < 0.05 ? 2.0 : 0.0; };
  CHECK(boundary_trace(BcKind::InflowPressure, in, n, x, 0.01, pb).p == 3.0);
  CHECK(boundary_trace(BcKind::InflowPressure, in, n, x, 0.10, pb).p == -1.0);

  WaveProblem bare;
  bool thrown = false;
  try {
    boundary_trace(BcKind::Analytic, in, n, x, 0.0, bare);
  } catch (const Error& e) {
    thrown = e.code() == ErrorCode::UnknownBoundaryTag;
  }
  CHECK(thrown);
}

TEST_CASE("boundary names round-trip and unknown names are rejected") {
  for (auto k : {BcKind::Wall, BcKind::ZeroPressure, BcKind::Extrapolation, BcKind::Analytic, BcKind::InflowPressure})
    CHECK(parse_bc(to_string(k)) == k);
  bool thrown = false;
  try {
    parse_bc("slip");
  } catch (const Error& e) {
    thrown = e.code() == ErrorCode::UnknownBoundaryTag;
  }
  CHECK(thrown);
}

TEST_CASE("manufactured solution values") {
  CHECK(mms_forcing(Vec2(0.3, 0.1), 0.0) == 0.0);
  CHECK(mms_forcing(Vec2(0.5, 0.5), 0.25) == doctest::Approx(-pi).epsilon(1e-15));
  Fields f0 = mms_solution(Vec2(0.2, -0.4), 0.0);
  CHECK(f0.ux == 0.0);
  CHECK(f0.uy == 0.0);
  CHECK(f0.p == doctest::Approx(std::sin(0.2 * pi) * std::sin(-0.4 * pi)));
  // The fields satisfy the PDE: p_t = -div u + f, u_t = -grad p (central differences).
  const Vec2 x(0.37, -0.21);
  const double t = 0.43, h = 1e-5;
  Fields dt = mms_dt(x, t);
  double div = (mms_solution(x + Vec2(h, 0), t).ux - mms_solution(x - Vec2(h, 0), t).ux) / (2 * h) +
               (mms_solution(x + Vec2(0, h), t).uy - mms_solution(x - Vec2(0, h), t).uy) / (2 * h);
  CHECK(dt.p == doctest::Approx(-div + mms_forcing(x, t)).epsilon(1e-8));
  double px = (mms_solution(x + Vec2(h, 0), t).p - mms_solution(x - Vec2(h, 0), t).p) / (2 * h);
  CHECK(dt.ux == doctest::Approx(-px).epsilon(1e-8));
  CHECK((mms_solution(x, t + h).p - mms_solution(x, t - h).p) / (2 * h) == doctest::Approx(dt.p).epsilon(1e-8));
}

TEST_CASE("zero state with no forcing has zero right-hand side") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 2);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  Eigen::VectorXd U = Eigen::VectorXd::Zero(d.size), dU;
  rhs(d, pb, U, 0.0, dU);
  CHECK(dU.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("skew and standard forms agree on a periodic Cartesian mesh") {
  auto d = discretize(make_mesh(5, {}, true), 3);
  WaveProblem pb;
  Eigen::VectorXd U = random_state(d, 1), a, b;
  rhs(d, pb, U, 0.0, a, Form::Skew);
  rhs(d, pb, U, 0.0, b, Form::Standard);
  CHECK((a - b).lpNorm<Eigen::Infinity>() < 1e-10 * a.lpNorm<Eigen::Infinity>());
}

TEST_CASE("the right-hand side is linear") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 2);
  WaveProblem pb;
  pb.curve_bc = {BcKind::ZeroPressure};
  pb.domain_bc = {BcKind::Wall, BcKind::Extrapolation, BcKind::ZeroPressure, BcKind::Wall};
  Eigen::VectorXd u = random_state(d, 2), v = random_state(d, 3), fu, fv, fw;
  const double alpha = 0.7, beta = -1.3;
  rhs(d, pb, u, 0.4, fu);
  rhs(d, pb, v, 0.4, fv);
  rhs(d, pb, alpha * u + beta * v, 0.4, fw);
  CHECK((fw - alpha * fu - beta * fv).lpNorm<Eigen::Infinity>() < 1e-12 * fw.lpNorm<Eigen::Infinity>());
}

TEST_CASE("discrete energy: zero, a constant and the quadrature oracle") {
  auto one = discretize(make_mesh(1), 3);
  CHECK(discrete_energy(one, Eigen::VectorXd::Zero(one.size)) == 0.0);
  Eigen::VectorXd U = Eigen::VectorXd::Zero(one.size);
  U.head(one.np(0)).setOnes();
  CHECK(discrete_energy(one, U, 1.0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(discrete_energy(one, U, 2.0) == doctest::Approx(1.0).epsilon(1e-13));

  auto d = discretize(make_mesh(6, {circle(Vec2(-0.31, 0.12), 0.4)}), 3);
  Eigen::VectorXd R = random_state(d, 4);
  double oracle = 0.0;
  const double c = 1.5;
  for (int e = 0; e < d.element_count(); ++e) {
    const int np = d.np(e);
    for (int comp = 0; comp < 3; ++comp) {
      Eigen::VectorXd uq = d.ops[e]->Vq * R.segment(d.block(e, comp), np);
      for (Eigen::Index q = 0; q < uq.size(); ++q)
        oracle += (comp == 0 ? 1 / (c * c) : 1.0) * d.rules[e].weights[q] * uq(q) * uq(q);
    }
  }
  CHECK(discrete_energy(d, R, c) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("without penalties the skew form is energy neutral on a cut mesh") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 3);
  WaveProblem pb;
  pb.tau_p = pb.tau_u = 0.0;
  pb.curve_bc = {BcKind::Wall};
  for (unsigned seed : {5u, 6u, 7u}) {
    Eigen::VectorXd U = random_state(d, seed), dU;
    rhs(d, pb, U, 0.0, dU);
    double rate = energy_inner(d, U, dU);
    CHECK(std::abs(rate) < 1e-10 * std::sqrt(discrete_energy(d, U) * discrete_energy(d, dU)));
  }
}

TEST_CASE("energy conservation and dissipation in time") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 3);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  cfg.abs_tol = cfg.rel_tol = 1e-12;

  SUBCASE("tau = 0") {
    pb.tau_p = pb.tau_u = 0.0;
    Eigen::VectorXd U = interpolate(d, pulse, 0.0);
    const double E0 = discrete_energy(d, U);
    integrate([&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { rhs(d, pb, y, t, dy); }, U, cfg);
    CHECK(std::abs(discrete_energy(d, U) - E0) <= 1e-8 * E0);
  }
  SUBCASE("tau = 1/2") {
    Eigen::VectorXd U = interpolate(d, pulse, 0.0);
    double prev = discrete_energy(d, U);
    const double E0 = prev;
    int violations = 0;
    integrate([&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { rhs(d, pb, y, t, dy); }, U, cfg,
              [&](double, double, const Eigen::VectorXd& y) {
                double E = discrete_energy(d, y);
                violations += E > prev * (1 + 1e-10);
                prev = E;
              });
    CHECK(violations == 0);
    CHECK(prev < E0);
  }
}

TEST_CASE("manufactured fields: rhs plus forcing matches the time derivative") {
  // Interpolation error in the derivative is O(h^N); halving h should cut it by about 2^N.
  const int N = 4;
  const double t = 0.3;
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const int n = 16 << level;
    auto d = discretize(make_mesh(n, {circle(Vec2(-0.5, 0), 0.3)}), N);
    WaveProblem pb = mms_problem();
    Eigen::VectorXd U = interpolate(d, mms_solution, t), dU;
    rhs(d, pb, U, t, dU);
    Eigen::VectorXd exact = interpolate(d, mms_dt, t);
    err[level] = std::sqrt(discrete_energy(d, dU - exact));
    const double h = 2.0 / n;
    CHECK(err[level] <= std::pow(h, N) * 10.0);
  }
  CHECK(std::log2(err[0] / err[1]) > N - 0.5);
}

TEST_CASE("point evaluation reproduces nodal values") {
  auto d = discretize(make_mesh(6, {circle(Vec2(-0.31, 0.12), 0.4)}), 2);
  Eigen::VectorXd U = random_state(d, 8);
  for (int e = 0; e < d.element_count(); e += 3) {
    Fields f = evaluate(d, U, e, d.nodes[e][1]);
    CHECK(f.p == doctest::Approx(U(d.block(e, 0) + 1)).epsilon(1e-9));
    CHECK(f.uy == doctest::Approx(U(d.block(e, 2) + 1)).epsilon(1e-9));
  }
}

TEST_CASE("field dump has the expected columns") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 2);
  Eigen::VectorXd U = interpolate(d, mms_solution, 0.0);
  write_field_csv("field_test.csv", d, U, 3, mms_solution, 0.0);
  std::ifstream in("field_test.csv");
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "elem,x,y,p,ux,uy,p_exact,p_error");
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  CHECK(rows > 9 * 12);
}
