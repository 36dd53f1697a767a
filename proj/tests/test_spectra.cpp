#include "cutwave/error.hpp"
#include "cutwave/spectra.hpp"
#include "cutwave/srd.hpp"
#include "cutwave/wave_dg.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <fstream>
#include <memory>
#include <vector>

using namespace cutwave;

namespace {

std::shared_ptr<const CutMesh> make_mesh(int n, std::vector<ParametricCurve> curves) {
  BackgroundGrid g;
  g.nx = g.ny = n;
  return std::make_shared<const CutMesh>(build_cut_mesh(g, std::move(curves)));
}

Eigen::MatrixXd global_mass(const Discretization& d) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d.size, d.size);
  for (int e = 0; e < d.element_count(); ++e)
    for (int comp = 0; comp < 3; ++comp) M.block(d.block(e, comp), d.block(e, comp), d.np(e), d.np(e)) = d.ops[e]->M;
  return M;
}

LinearMap rhs_map(const Discretization& d, const WaveProblem& pb, const SrdOperator* S = nullptr) {
  return [&d, &pb, S](const Eigen::VectorXd& x, Eigen::VectorXd& y) { rhs(d, pb, S ? S->apply(x) : x, 0.0, y); };
}

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
  std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real(); });
  return v;
}

// Largest distance from a value in a to its nearest value in b.
double mismatch(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  double worst = 0.0;
  for (auto z : a) {
    double best = 1e300;
    for (auto w : b) best = std::min(best, std::abs(z - w));
    worst = std::max(worst, best);
  }
  return worst;
}

} // namespace

TEST_CASE("eigenvalues of small known matrices") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A(0, 0) = 1.0;
  A(1, 1) = -2.0;
  A(2, 3) = -3.0;
  A(3, 2) = 3.0;
  auto s = eigenvalues(A);
  REQUIRE(s.values.size() == 4);
  auto v = sorted(s.values);
  CHECK(std::abs(v[0] - std::complex<double>(0, -3)) < 1e-14);
  CHECK(std::abs(v[1] - std::complex<double>(-2, 0)) < 1e-14);
  CHECK(std::abs(v[2] - std::complex<double>(1, 0)) < 1e-14);
  CHECK(std::abs(v[3] - std::complex<double>(0, 3)) < 1e-14);
  CHECK(s.max_abs == doctest::Approx(3.0));
  CHECK(s.max_re == doctest::Approx(1.0));
  CHECK(s.max_abs_re == doctest::Approx(2.0));
}

TEST_CASE("LAPACK values agree with Eigen's solver on a random matrix") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(60, 60);
  auto s = eigenvalues(A);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<std::complex<double>> ref(es.eigenvalues().data(), es.eigenvalues().data() + 60);
  CHECK(mismatch(s.values, ref) < 1e-10 * s.max_abs);
  CHECK(mismatch(ref, s.values) < 1e-10 * s.max_abs);
}

TEST_CASE("probing rejects an affine map") {
  bool thrown = false;
  try {
    assemble_operator([](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x.array() + 1.0; }, 3);
  } catch (const Error& e) {
    thrown = e.code() == ErrorCode::NonLinearRHS;
  }
  CHECK(thrown);
}

TEST_CASE("one element with walls and no penalty: A is M-antisymmetric and kills constant pressure") {
  auto d = discretize(make_mesh(1, {}), 3);
  WaveProblem pb;
  pb.tau_p = pb.tau_u = 0.0;
  Eigen::MatrixXd A = assemble_operator(rhs_map(d, pb), d.size);
  Eigen::MatrixXd M = global_mass(d);
  CHECK((A.transpose() * M + M * A).norm() < 1e-10 * (M * A).norm());
  Eigen::VectorXd p1 = Eigen::VectorXd::Zero(d.size);
  p1.head(d.np(0)).setOnes();
  CHECK((A * p1).norm() < 1e-12);
  // The energy-coordinate operator is antisymmetric.
  Eigen::MatrixXd B = to_energy_coordinates(d, A);
  CHECK((B + B.transpose()).norm() < 1e-10 * B.norm());
}

TEST_CASE("columns equal the right-hand side on basis vectors, and S fixes constants") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 2);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  auto S = SrdOperator::build(d, 0.8); // a high threshold so that something merges
  REQUIRE(S.touched_count() > 0);
  Eigen::MatrixXd A = assemble_operator(rhs_map(d, pb), d.size);
  Eigen::MatrixXd AS = assemble_operator(rhs_map(d, pb, &S), d.size);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d.size), y;
  e(17) = 1.0;
  rhs(d, pb, e, 0.0, y);
  CHECK((A.col(17) - y).norm() == 0.0);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(d.size, 1.7);
  CHECK((AS * c - A * c).norm() < 1e-10 * (A * c).norm() + 1e-12);
}

TEST_CASE("penalised spectra lie in the closed left half plane, with and without SRD") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 2);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  auto S = SrdOperator::build(d, 0.8);
  for (const SrdOperator* s : std::vector<const SrdOperator*>{nullptr, &S}) {
    auto spec = eigenvalues(assemble_operator(rhs_map(d, pb, s), d.size));
    CHECK(spec.max_re <= 1e-8 * spec.max_abs);
  }
  pb.tau_p = pb.tau_u = 0.0;
  auto spec = eigenvalues(assemble_operator(rhs_map(d, pb), d.size));
  CHECK(spec.max_abs_re <= 1e-8 * spec.max_abs);
}

TEST_CASE("A S and S A share their nonzero spectrum") {
  auto d = discretize(make_mesh(4, {circle(Vec2(-0.5, 0), 0.3)}), 1);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  auto S = SrdOperator::build(d, 0.8);
  Eigen::MatrixXd A = assemble_operator(rhs_map(d, pb), d.size);
  Eigen::MatrixXd Sm = assemble_operator([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = S.apply(x); }, d.size);
  auto nonzero = [](const Spectrum& s) {
    std::vector<std::complex<double>> v;
    for (auto z : s.values)
      if (std::abs(z) > 1e-8 * s.max_abs) v.push_back(z);
    return v;
  };
  auto sa = eigenvalues(A * Sm);
  auto a = nonzero(sa), b = nonzero(eigenvalues(Sm * A));
  CHECK(a.size() == b.size());
  CHECK(mismatch(a, b) < 1e-8 * sa.max_abs);
  CHECK(mismatch(b, a) < 1e-8 * sa.max_abs);
}

TEST_CASE("spectrum CSV") {
  Spectrum s;
  s.values = {{1.0, 2.0}, {-0.5, 0.0}};
  write_spectrum_csv("spectrum_test.csv", s);
  std::ifstream in("spectrum_test.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "re,im");
  std::getline(in, line);
  CHECK(line == "1,2");
}
