#pragma once

#include <vector>

namespace cutwave {

struct Rule1D {
  std::vector<double> x, w;
};

// n-point Gauss-Legendre rule on [-1,1].
const Rule1D& gauss_legendre(int n);

// n-point Gauss-Lobatto-Legendre rule on [-1,1] (n >= 2).
const Rule1D& gauss_lobatto(int n);

// Orthonormal Legendre polynomials on [-1,1]: p_k = sqrt((2k+1)/2) P_k.
// Fills p[0..n], optionally dp[0..n] and the antiderivatives a[k] = int_{-1}^x p_k.
void legendre_all(int n, double x, double* p, double* dp = nullptr, double* a = nullptr);

// Index pairs (i, j) of the total-degree space P^d, graded by i + j.
std::vector<std::pair<int, int>> total_degree_indices(int d);

// Index pairs of the tensor space Q^d.
std::vector<std::pair<int, int>> tensor_indices(int d);

inline int dim_total(int d) { return (d + 1) * (d + 2) / 2; }

} // namespace cutwave
