#include "cutwave/specfun.hpp"

#include "cutwave/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cutwave {

namespace {

constexpr double euler_gamma = 0.57721566490153286061;

void check_order(int n) {
  if (n < 0) throw Error(ErrorCode::DomainError, "negative Bessel order " + std::to_string(n));
}

// Starting order for the downward recurrence: far enough above both n and x
// that the start values have decayed below double precision.
int miller_start(int nmax, double x) {
  int top = std::max(nmax, static_cast<int>(std::ceil(x)));
  int m = top + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * std::max(top, 1))));
  return m + (m % 2);
}

} // namespace

std::vector<double> bessel_j_array(int nmax, double x) {
  check_order(nmax);
  if (x < 0.0 || !std::isfinite(x)) throw Error(ErrorCode::DomainError, "Bessel J needs x >= 0");
  std::vector<double> J(nmax + 1, 0.0);
  if (x == 0.0) {
    J[0] = 1.0;
    return J;
  }
  const int m = miller_start(nmax, x);
  const double big = 1e250;
  double jp1 = 0.0, j = 1e-300; // J_{k+1}, J_k at k = m
  double norm = 0.0;            // J_0 + 2 sum J_{2k}, unnormalized
  for (int k = m; k >= 1; --k) {
    double jm1 = (2.0 * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    // j now holds J_{k-1}
    if (k - 1 <= nmax) J[k - 1] = j;
    if (k - 1 > 0 && (k - 1) % 2 == 0) norm += 2.0 * j;
    if (std::abs(j) > big) {
      j /= big;
      jp1 /= big;
      norm /= big;
      for (int i = k - 1; i <= nmax; ++i) J[i] /= big;
    }
  }
  norm += j; // J_0
  for (double& v : J) v /= norm;
  return J;
}

std::vector<double> bessel_y_array(int nmax, double x) {
  check_order(nmax);
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::DomainError, "Bessel Y needs x > 0");
  constexpr double pi = std::numbers::pi;
  const int m = miller_start(std::max(nmax, 1), x);
  auto J = bessel_j_array(m, x);
  const double lg = std::log(0.5 * x) + euler_gamma;

  double s0 = 0.0;
  for (int k = 1; 2 * k <= m; ++k) s0 += ((k % 2) ? -1.0 : 1.0) * J[2 * k] / k;
  double s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= m; ++k) s1 += ((k % 2) ? -1.0 : 1.0) * (2.0 * k + 1.0) * J[2 * k + 1] / (k * (k + 1.0));

  std::vector<double> Y(nmax + 1);
  Y[0] = (2.0 / pi) * (lg * J[0] - 2.0 * s0);
  if (nmax == 0) return Y;
  Y[1] = (2.0 / pi) * (-J[0] / x + (lg - 1.0) * J[1] - s1);
  for (int n = 1; n < nmax; ++n) {
    Y[n + 1] = (2.0 * n / x) * Y[n] - Y[n - 1];
    if (!std::isfinite(Y[n + 1])) {
      for (int k = n + 1; k <= nmax; ++k) Y[k] = -std::numeric_limits<double>::infinity();
      break;
    }
  }
  return Y;
}

double bessel_j(int n, double x) { return bessel_j_array(n, x)[n]; }

double bessel_j_prime(int n, double x) {
  auto J = bessel_j_array(n + 1, x);
  if (n == 0) return -J[1];
  return 0.5 * (J[n - 1] - J[n + 1]);
}

double bessel_y(int n, double x) { return bessel_y_array(n, x)[n]; }

void bessel_j_with_derivative(int nmax, double x, std::vector<double>& J, std::vector<double>& dJ) {
  auto all = bessel_j_array(nmax + 1, x);
  J.assign(all.begin(), all.begin() + nmax + 1);
  dJ.resize(nmax + 1);
  dJ[0] = -all[1];
  for (int n = 1; n <= nmax; ++n) dJ[n] = 0.5 * (all[n - 1] - all[n + 1]);
}

void hankel2_array(int nmax, double x, std::vector<std::complex<double>>& H, std::vector<std::complex<double>>& dH) {
  check_order(nmax);
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "Hankel function needs x > 0");
  auto J = bessel_j_array(nmax + 1, x);
  auto Y = bessel_y_array(nmax + 1, x);
  std::vector<std::complex<double>> h(nmax + 2);
  for (int n = 0; n <= nmax + 1; ++n) h[n] = {J[n], -Y[n]};
  H.assign(h.begin(), h.begin() + nmax + 1);
  dH.resize(nmax + 1);
  dH[0] = -h[1];
  for (int n = 1; n <= nmax; ++n) dH[n] = 0.5 * (h[n - 1] - h[n + 1]);
}

std::complex<double> hankel2(int n, double x) {
  check_order(n);
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "Hankel function needs x > 0");
  return {bessel_j(n, x), -bessel_y(n, x)};
}

std::complex<double> hankel2_prime(int n, double x) {
  std::vector<std::complex<double>> H, dH;
  hankel2_array(n, x, H, dH);
  return dH[n];
}

} // namespace cutwave
