#pragma once

// Reference integrals computed without any of the library's quadrature code.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Disk {
  double cx, cy, R;
};

// Integral of ((x - ox)/h)^i ((y - oy)/h)^j over the part of the box
// [x0,x1] x [y0,y1] outside the disk. Exact in y, tanh-sinh in x on pieces
// split where the integrand loses smoothness.
inline double box_minus_disk_monomial(double x0, double x1, double y0, double y1, const Disk& d, int i, int j, double ox,
                                      double oy, double h) {
  auto Fy = [&](double y) { return std::pow((y - oy) / h, j + 1) * h / (j + 1); };
  auto inner = [&](double x) {
    double full = Fy(y1) - Fy(y0);
    double dx = x - d.cx;
    if (std::abs(dx) < d.R) {
      double s = std::sqrt(d.R * d.R - dx * dx);
      double a = std::clamp(d.cy - s, y0, y1), b = std::clamp(d.cy + s, y0, y1);
      if (b > a) full -= Fy(b) - Fy(a);
    }
    return std::pow((x - ox) / h, i) * full;
  };
  std::vector<double> cuts{x0, x1};
  for (double x : {d.cx - d.R, d.cx + d.R}) cuts.push_back(x);
  for (double y : {y0, y1}) {
    double t = d.R * d.R - (y - d.cy) * (y - d.cy);
    if (t > 0) {
      cuts.push_back(d.cx - std::sqrt(t));
      cuts.push_back(d.cx + std::sqrt(t));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = std::max(cuts[k], x0), b = std::min(cuts[k + 1], x1);
    if (b - a <= 0.0) continue;
    total += ts.integrate(inner, a, b, 1e-15);
  }
  return total;
}

} // namespace oracle
