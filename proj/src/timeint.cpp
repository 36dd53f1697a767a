#include "cutwave/timeint.hpp"

#include "cutwave/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cutwave {

void IntegratorConfig::validate() const {
  if (method != "rk4" && method != "erk54") throw Error(ErrorCode::InvalidConfig, "unknown integrator '" + method + "'");
  if (!(dt0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "dt0 must be positive");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
  if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidConfig, "t_end must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw Error(ErrorCode::InvalidConfig, "safety must lie in (0, 1]");
  if (!(dt_max > 0.0) || !(dt_min >= 0.0)) throw Error(ErrorCode::InvalidConfig, "bad dt bounds");
}

void rk4_step(const OdeRhs& f, double t, double dt, Eigen::VectorXd& y) {
  Eigen::VectorXd k1, k2, k3, k4;
  f(t, y, k1);
  f(t + 0.5 * dt, y + 0.5 * dt * k1, k2);
  f(t + 0.5 * dt, y + 0.5 * dt * k2, k3);
  f(t + dt, y + dt * k3, k4);
  y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Dormand-Prince 5(4).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

std::vector<double> sorted_outputs(const IntegratorConfig& cfg, double t0) {
  std::vector<double> out;
  for (double t : cfg.output_times)
    if (t > t0 && t <= cfg.t_end) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IntegrationStats run_rk4(const OdeRhs& f, Eigen::VectorXd& y, const IntegratorConfig& cfg, const StepHook& on_step,
                         const OutputHook& on_output, double t0) {
  IntegrationStats st;
  auto outputs = sorted_outputs(cfg, t0);
  std::size_t next_out = 0;
  double t = t0;
  while (t < cfg.t_end) {
    double dt = std::min(cfg.dt0, cfg.t_end - t);
    if (next_out < outputs.size()) dt = std::min(dt, outputs[next_out] - t);
    if (cfg.t_end - (t + dt) < 1e-12 * cfg.t_end) dt = cfg.t_end - t;
    rk4_step(f, t, dt, y);
    st.rhs_evals += 4;
    ++st.accepted;
    t = (cfg.t_end - (t + dt) < 1e-14 * cfg.t_end) ? cfg.t_end : t + dt;
    if (!y.allFinite()) throw Error(ErrorCode::DtUnderflow, "state became non-finite at t=" + std::to_string(t));
    if (on_step) on_step(t, dt, y);
    while (next_out < outputs.size() && std::abs(outputs[next_out] - t) <= 1e-12 * std::max(1.0, t)) {
      if (on_output) on_output(outputs[next_out], y);
      ++next_out;
    }
    if (st.accepted > cfg.max_steps) throw Error(ErrorCode::DtUnderflow, "step limit reached");
  }
  st.t = t;
  return st;
}

IntegrationStats run_dopri(const OdeRhs& f, Eigen::VectorXd& y, const IntegratorConfig& cfg, const StepHook& on_step,
                           const OutputHook& on_output, double t0) {
  IntegrationStats st;
  auto outputs = sorted_outputs(cfg, t0);
  std::size_t next_out = 0;
  const Eigen::Index n = y.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  // Hairer's PI controller constants for order 5.
  const double beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  const double facmin = 0.2, facmax = 10.0;
  double facold = 1e-4;

  double t = t0;
  double h = std::min(cfg.dt0, cfg.dt_max);
  f(t, y, k1);
  ++st.rhs_evals;
  bool last_rejected = false;
  while (t < cfg.t_end) {
    double target = cfg.t_end;
    if (next_out < outputs.size()) target = std::min(target, outputs[next_out]);
    bool clipped = false;
    if (t + h >= target - 1e-14 * std::max(1.0, std::abs(target))) {
      h = target - t;
      clipped = true;
    }
    if (h < cfg.dt_min) throw Error(ErrorCode::DtUnderflow, "step " + std::to_string(h) + " at t=" + std::to_string(t));

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);
    st.rhs_evals += 6;
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      double r = err(i) / sk;
      sum += r * r;
    }
    double e = n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
    if (!std::isfinite(e)) e = 1e10;

    double fac11 = std::pow(std::max(e, 1e-300), expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::clamp(fac / cfg.safety, 1.0 / facmax, 1.0 / facmin);
    double hnew = h / fac;

    if (e <= 1.0) {
      facold = std::max(e, 1e-4);
      const double t_new = clipped ? target : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++st.accepted;
      if (on_step) on_step(t_new, h, y);
      t = t_new;
      while (next_out < outputs.size() && outputs[next_out] <= t + 1e-14 * std::max(1.0, t)) {
        if (on_output) on_output(outputs[next_out], y);
        ++next_out;
      }
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = std::min(hnew, cfg.dt_max);
    } else {
      hnew = h / std::min(1.0 / facmin, fac11 / cfg.safety);
      ++st.rejected;
      last_rejected = true;
      h = hnew;
    }
    if (st.accepted + st.rejected > cfg.max_steps) throw Error(ErrorCode::DtUnderflow, "step limit reached");
  }
  st.t = t;
  return st;
}

} // namespace

IntegrationStats integrate(const OdeRhs& f, Eigen::VectorXd& y, const IntegratorConfig& cfg, const StepHook& on_step,
                           const OutputHook& on_output, double t0) {
  cfg.validate();
  if (cfg.method == "rk4") return run_rk4(f, y, cfg, on_step, on_output, t0);
  return run_dopri(f, y, cfg, on_step, on_output, t0);
}

void write_energy_csv(const std::string& path, const std::vector<EnergySample>& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(17);
  out << "t,dt,E\n";
  for (const auto& s : log) out << s.t << ',' << s.dt << ',' << s.energy << '\n';
}

} // namespace cutwave
