#pragma once

#include <complex>
#include <vector>

namespace cutwave {

// J_0..J_nmax at x >= 0 by Miller's downward recurrence.
std::vector<double> bessel_j_array(int nmax, double x);

// Y_0..Y_nmax at x > 0: Neumann series for Y_0, Y_1, then forward recurrence.
// Orders that overflow come back as -inf.
std::vector<double> bessel_y_array(int nmax, double x);

double bessel_j(int n, double x);
double bessel_j_prime(int n, double x);
double bessel_y(int n, double x);

// H^(2)_n = J_n - i Y_n, x > 0.
std::complex<double> hankel2(int n, double x);
std::complex<double> hankel2_prime(int n, double x);

// H_0..H_nmax and derivatives in one pass.
void hankel2_array(int nmax, double x, std::vector<std::complex<double>>& H, std::vector<std::complex<double>>& dH);

// J_0..J_nmax and derivatives in one pass.
void bessel_j_with_derivative(int nmax, double x, std::vector<double>& J, std::vector<double>& dJ);

} // namespace cutwave
