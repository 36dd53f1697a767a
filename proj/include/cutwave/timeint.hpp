#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cutwave {

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

struct IntegratorConfig {
  std::string method = "erk54"; // or "rk4"
  double dt0 = 1e-4;            // first trial step (erk54) or fixed step (rk4)
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double t_end = 1.0;
  double safety = 0.9;
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
  std::vector<double> output_times;
  long max_steps = 50'000'000;

  void validate() const;
};

struct IntegrationStats {
  long accepted = 0, rejected = 0, rhs_evals = 0;
  double t = 0.0;
};

// Called after each accepted step with the new time, the step taken and the state.
using StepHook = std::function<void(double t, double dt, const Eigen::VectorXd& y)>;
// Called when the integration reaches a requested output time.
using OutputHook = std::function<void(double t, const Eigen::VectorXd& y)>;

// Advances y from t0 = 0 to t_end in place.
IntegrationStats integrate(const OdeRhs& f, Eigen::VectorXd& y, const IntegratorConfig& cfg, const StepHook& on_step = {},
                           const OutputHook& on_output = {}, double t0 = 0.0);

// One classical RK4 step.
void rk4_step(const OdeRhs& f, double t, double dt, Eigen::VectorXd& y);

struct EnergySample {
  double t, dt, energy;
};
void write_energy_csv(const std::string& path, const std::vector<EnergySample>& log);

} // namespace cutwave
