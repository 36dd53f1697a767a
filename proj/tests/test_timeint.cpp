#include "cutwave/error.hpp"
#include "cutwave/srd.hpp"
#include "cutwave/timeint.hpp"
#include "cutwave/wave_dg.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <random>

using namespace cutwave;

namespace {

IntegratorConfig fixed_steps(const std::string& method, double h, double t_end) {
  IntegratorConfig cfg;
  cfg.method = method;
  cfg.dt0 = h;
  cfg.t_end = t_end;
  // Loose tolerances accept every step; dt_max pins the size.
  cfg.abs_tol = cfg.rel_tol = 1e6;
  cfg.dt_max = h;
  return cfg;
}

// y' = y cos t, y(0) = 1: y = exp(sin t).
double growth_error(const std::string& method, double h) {
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  auto st = integrate([](double t, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = v * std::cos(t); }, y,
                      fixed_steps(method, h, 2.0));
  CHECK(st.t == 2.0);
  return std::abs(y(0) - std::exp(std::sin(2.0)));
}

bool throws_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

} // namespace

TEST_CASE("zero right-hand side leaves the state alone") {
  for (std::string m : {"erk54", "rk4"}) {
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -1, 1), y0 = y;
    IntegratorConfig cfg;
    cfg.method = m;
    cfg.dt0 = 0.01;
    integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = Eigen::VectorXd::Zero(v.size()); }, y, cfg);
    CHECK((y.array() == y0.array()).all());
  }
}

TEST_CASE("exponential decay to tight tolerance") {
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-10;
  auto st = integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = -v; }, y, cfg);
  CHECK(std::abs(y(0) - std::exp(-1.0)) < 1e-9);
  CHECK(st.accepted > 0);
  CHECK(st.t == 1.0);
}

TEST_CASE("oscillator energy drift stays below tolerance times t_end") {
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-9;
  cfg.t_end = 10.0;
  integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = Eigen::Vector2d(v(1), -v(0)); }, y, cfg);
  CHECK(std::abs(y.squaredNorm() - 1.0) <= cfg.rel_tol * cfg.t_end);
  CHECK(std::abs(y(0) - std::cos(10.0)) < 1e-7);
}

TEST_CASE("observed orders") {
  std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  for (auto [method, order] : {std::pair<std::string, double>{"erk54", 5.0}, {"rk4", 4.0}}) {
    std::vector<double> err;
    for (double h : hs) err.push_back(growth_error(method, h));
    for (std::size_t k = 1; k < err.size(); ++k) {
      double slope = std::log2(err[k - 1] / err[k]);
      CHECK(slope > order - 0.2);
      CHECK(slope < order + 0.2);
    }
  }
}

TEST_CASE("output times are hit exactly and the step hook sees every accepted step") {
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  cfg.output_times = {0.7, 0.12, 0.33, 1.0};
  std::vector<double> seen;
  long steps = 0;
  double last = 0.0;
  auto st = integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = -v; }, y, cfg,
                      [&](double t, double dt, const Eigen::VectorXd&) {
                        ++steps;
                        CHECK(t == doctest::Approx(last + dt).epsilon(1e-12));
                        last = t;
                      },
                      [&](double t, const Eigen::VectorXd& v) {
                        seen.push_back(t);
                        CHECK(v(0) == doctest::Approx(std::exp(-t)).epsilon(1e-6));
                      });
  CHECK(seen == std::vector<double>{0.12, 0.33, 0.7, 1.0});
  CHECK(steps == st.accepted);
}

TEST_CASE("a stiff problem with a step floor underflows") {
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  IntegratorConfig cfg;
  cfg.dt_min = 1e-6;
  cfg.dt0 = 1e-3;
  CHECK(throws_code(ErrorCode::DtUnderflow, [&] {
    integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) { dv = -1e8 * v; }, y, cfg);
  }));
}

TEST_CASE("configuration validation") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.method = "tsit5";
  CHECK(throws_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); }));
  cfg = {};
  cfg.dt0 = 0.0;
  CHECK(throws_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); }));
  cfg = {};
  cfg.abs_tol = -1.0;
  CHECK(throws_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); }));
  cfg = {};
  cfg.t_end = 0.0;
  CHECK(throws_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); }));
}

TEST_CASE("energy log") {
  write_energy_csv("energy_test.csv", {{0.0, 1e-4, 1.0}, {1e-4, 2e-4, 0.99}});
  std::ifstream in("energy_test.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,dt,E");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("state redistribution raises the stable RK4 step on the small-cell circle mesh") {
  BackgroundGrid g;
  g.nx = g.ny = 8;
  auto mesh = std::make_shared<const CutMesh>(build_cut_mesh(g, {circle(Vec2(0, 0), 0.699)}));
  auto d = discretize(mesh, 3);
  WaveProblem pb;
  pb.curve_bc = {BcKind::Wall};
  auto S = SrdOperator::build(d);

  std::mt19937 rng(3);
  std::normal_distribution<double> G;
  Eigen::VectorXd U0(d.size);
  for (Eigen::Index k = 0; k < U0.size(); ++k) U0(k) = G(rng);

  auto stable = [&](bool srd, double dt) {
    OdeRhs f = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      if (srd) rhs(d, pb, S.apply(y), t, dy);
      else rhs(d, pb, y, t, dy);
    };
    Eigen::VectorXd y = srd ? S.apply(U0) : U0;
    const double n0 = y.norm();
    for (int k = 0; k < 300; ++k) {
      rk4_step(f, 0.0, dt, y);
      if (!(y.norm() < 1e3 * n0)) return false;
    }
    return true;
  };
  auto largest_stable = [&](bool srd) {
    double lo = 1e-6, hi = 1.0;
    while (!stable(srd, lo)) lo *= 0.5;
    while (hi / lo > 1.02) {
      double mid = std::sqrt(lo * hi);
      (stable(srd, mid) ? lo : hi) = mid;
    }
    return lo;
  };
  const double with = largest_stable(true), without = largest_stable(false);
  MESSAGE("stable dt with SRD " << with << ", without " << without);
  CHECK(with / without >= 10.0);
}
