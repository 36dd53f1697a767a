#pragma once

#include "cutwave/basis_ops.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace cutwave {

using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

// Dense matrix whose column j is map(e_j). Throws NonLinearRHS when map(0) != 0.
Eigen::MatrixXd assemble_operator(const LinearMap& map, Eigen::Index n);

struct Spectrum {
  std::vector<std::complex<double>> values;
  double max_abs = 0.0;
  double max_re = 0.0;     // largest real part (signed)
  double max_abs_re = 0.0; // largest |Re|
};

Spectrum eigenvalues(const Eigen::MatrixXd& A);

// T A T^-1 with T = blockdiag(Vinv / c, Vinv, Vinv): the operator in orthonormal
// modal coordinates, where the discrete energy is the Euclidean norm.
Eigen::MatrixXd to_energy_coordinates(const Discretization& d, const Eigen::MatrixXd& A, double c = 1.0);

void write_spectrum_csv(const std::string& path, const Spectrum& s);

} // namespace cutwave
