#pragma once

#include "cutwave/basis_ops.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>

namespace cutwave {

struct Fields {
  double p = 0.0, ux = 0.0, uy = 0.0;
};

enum class BcKind { Wall, ZeroPressure, Extrapolation, Analytic, InflowPressure };

BcKind parse_bc(const std::string& name); // throws UnknownBoundaryTag
const char* to_string(BcKind kind);

using ExactSolution = std::function<Fields(const Vec2& x, double t)>;
using Forcing = std::function<double(const Vec2& x, double t)>;

struct WaveProblem {
  double c = 1.0;
  double tau_p = 0.5, tau_u = 0.5;
  std::array<BcKind, 4> domain_bc{BcKind::Wall, BcKind::Wall, BcKind::Wall, BcKind::Wall}; // bottom, right, top, left
  std::vector<BcKind> curve_bc;                                                           // per curve id
  ExactSolution exact;                       // used by Analytic
  Forcing forcing;                           // added to the pressure equation when set
  std::function<double(double)> inflow_pressure; // prescribed p(t) for InflowPressure
};

// Exterior state for a boundary node with outward normal n.
Fields boundary_trace(BcKind kind, const Fields& interior, const Vec2& n, const Vec2& x, double t, const WaveProblem& pb);

enum class Form { Skew, Standard };

// dU/dt for the acoustic system p_t = -c^2 div u + f, u_t = -grad p.
void rhs(const Discretization& d, const WaveProblem& pb, const Eigen::VectorXd& U, double t, Eigen::VectorXd& dU,
         Form form = Form::Skew);

// sum_e (1/c^2) p^T M p + ux^T M ux + uy^T M uy
double discrete_energy(const Discretization& d, const Eigen::VectorXd& U, double c = 1.0);

// M-weighted inner product with the same component scaling as the energy.
double energy_inner(const Discretization& d, const Eigen::VectorXd& U, const Eigen::VectorXd& W, double c = 1.0);

// Nodal interpolant of a field.
Eigen::VectorXd interpolate(const Discretization& d, const ExactSolution& f, double t);

// L2 error of (p, u) against an exact field, by element quadrature.
double l2_error(const Discretization& d, const Eigen::VectorXd& U, const ExactSolution& f, double t);

// Largest nodal error in p.
double linf_pressure_error(const Discretization& d, const Eigen::VectorXd& U, const ExactSolution& f, double t);

// Manufactured solution on the unit-speed system.
Fields mms_solution(const Vec2& x, double t);
double mms_forcing(const Vec2& x, double t);

// CSV columns x,y,p,ux,uy on an equispaced grid of `density` points per direction
// inside each element (cut elements keep only points inside the element).
void write_field_csv(const std::string& path, const Discretization& d, const Eigen::VectorXd& U, int density,
                     const ExactSolution& reference = {}, double t = 0.0);

// Point evaluation of the discrete solution on element e.
Fields evaluate(const Discretization& d, const Eigen::VectorXd& U, int e, const Vec2& x);

} // namespace cutwave
