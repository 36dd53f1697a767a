#include "cutwave/legendre.hpp"

#include "cutwave/error.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace cutwave {

namespace {

// Legendre P_n and P_n' by the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

Rule1D compute_gauss(int n) {
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_pair(n, x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule1D compute_lobatto(int n) {
  // Interior nodes are the roots of P'_{n-1}.
  const int N = n - 1;
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  r.x[0] = -1.0;
  r.x[N] = 1.0;
  for (int i = 1; i <= (N) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / N);
    for (int it = 0; it < 100; ++it) {
      // Newton on (1-x^2) P'_N = 0 using P_N, P'_N, P''_N.
      double p, dp;
      legendre_pair(N, x, p, dp);
      double d2p = (2.0 * x * dp - N * (N + 1.0) * p) / (1.0 - x * x);
      double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.x[N - i] = -x;
  }
  if (N % 2 == 0 && N > 0) r.x[N / 2] = 0.0;
  for (int i = 0; i <= N; ++i) {
    double p, dp;
    if (std::abs(r.x[i]) == 1.0) {
      p = 1.0;
    } else {
      legendre_pair(N, r.x[i], p, dp);
    }
    if (r.x[i] == -1.0 && N % 2 == 1) p = -1.0;
    r.w[i] = 2.0 / (N * (N + 1.0) * p * p);
  }
  return r;
}

template <class F>
const Rule1D& cached(std::map<int, Rule1D>& cache, std::mutex& m, int n, F make) {
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

} // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "Gauss rule needs at least one point");
  static std::map<int, Rule1D> cache;
  static std::mutex m;
  return cached(cache, m, n, compute_gauss);
}

const Rule1D& gauss_lobatto(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidInput, "Lobatto rule needs at least two points");
  static std::map<int, Rule1D> cache;
  static std::mutex m;
  return cached(cache, m, n, compute_lobatto);
}

void legendre_all(int n, double x, double* p, double* dp, double* a) {
  // Unnormalized P_k first, scaled at the end.
  double pkm1 = 1.0, pk = x;
  double dkm1 = 0.0, dk = 1.0;
  if (n + 2 > 64) throw Error(ErrorCode::InvalidInput, "Legendre degree too high");
  std::array<double, 64> P, D;
  P[0] = 1.0;
  D[0] = 0.0;
  P[1] = x;
  D[1] = 1.0;
  for (int k = 1; k <= n; ++k) {
    double pkp1 = ((2.0 * k + 1.0) * x * pk - k * pkm1) / (k + 1.0);
    double dkp1 = dkm1 + (2.0 * k + 1.0) * pk;
    pkm1 = pk;
    pk = pkp1;
    dkm1 = dk;
    dk = dkp1;
    P[k + 1] = pk;
    D[k + 1] = dk;
  }
  for (int k = 0; k <= n; ++k) {
    double s = std::sqrt((2.0 * k + 1.0) / 2.0);
    p[k] = s * P[k];
    if (dp) dp[k] = s * D[k];
    if (a) {
      // int_{-1}^x P_0 = x + 1; int_{-1}^x P_k = (P_{k+1} - P_{k-1}) / (2k+1).
      double A = k == 0 ? x + 1.0 : (P[k + 1] - P[k - 1]) / (2.0 * k + 1.0);
      a[k] = s * A;
    }
  }
}

std::vector<std::pair<int, int>> total_degree_indices(int d) {
  std::vector<std::pair<int, int>> idx;
  for (int t = 0; t <= d; ++t)
    for (int i = t; i >= 0; --i) idx.emplace_back(i, t - i);
  return idx;
}

std::vector<std::pair<int, int>> tensor_indices(int d) {
  std::vector<std::pair<int, int>> idx;
  for (int j = 0; j <= d; ++j)
    for (int i = 0; i <= d; ++i) idx.emplace_back(i, j);
  return idx;
}

} // namespace cutwave
