#include "cutwave/pacman.hpp"

#include "cutwave/error.hpp"
#include "cutwave/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cutwave {

PacmanCoefficients read_pacman_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open coefficient file " + path);
  std::string line;
  std::getline(in, line);
  PacmanCoefficients c;
  int expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int n;
    double v[8];
    if (!(row >> n >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6] >> v[7]))
      throw Error(ErrorCode::InvalidInput, "malformed coefficient row: " + line);
    if (n != expected) throw Error(ErrorCode::InvalidInput, "coefficient rows must be n = 0, 1, 2, ...");
    ++expected;
    c.aA.emplace_back(v[0], v[1]);
    c.aS.emplace_back(v[2], v[3]);
    c.bA.emplace_back(v[4], v[5]);
    c.bS.emplace_back(v[6], v[7]);
  }
  return c;
}

void write_pacman_coefficients(const std::string& path, const PacmanCoefficients& c) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(17);
  out << "n,aA_re,aA_im,aS_re,aS_im,bA_re,bA_im,bS_re,bS_im\n";
  for (std::size_t n = 0; n < c.size(); ++n)
    out << n << ',' << c.aA[n].real() << ',' << c.aA[n].imag() << ',' << c.aS[n].real() << ',' << c.aS[n].imag() << ','
        << c.bA[n].real() << ',' << c.bA[n].imag() << ',' << c.bS[n].real() << ',' << c.bS[n].imag() << '\n';
}

double PacmanConfig::mouth_half_angle() const { return half_angle > 0.0 ? half_angle : std::numbers::pi / wedge; }

void PacmanConfig::validate() const {
  if (terms < 1) throw Error(ErrorCode::InvalidConfig, "pacman series needs at least one term");
  if (coef.size() < static_cast<std::size_t>(terms))
    throw Error(ErrorCode::InvalidConfig, "coefficient file has " + std::to_string(coef.size()) + " rows, need " +
                                              std::to_string(terms));
  if (!(k > 0.0) || !(Z0 > 0.0) || !(radius > 0.0) || wedge < 1)
    throw Error(ErrorCode::InvalidConfig, "pacman k, Z0, radius and wedge must be positive");
}

PacmanRegion pacman_region(const PacmanConfig& cfg, double r, double theta) {
  return (r <= cfg.radius && std::abs(theta) < cfg.mouth_half_angle()) ? PacmanRegion::Mouth : PacmanRegion::Outside;
}

ComplexFields eval_field(const PacmanConfig& cfg, double r, double theta, PacmanRegion region) {
  if (pacman_region(cfg, r, theta) != region)
    throw Error(ErrorCode::RegionMismatch, "point (r=" + std::to_string(r) + ", theta=" + std::to_string(theta) +
                                               ") is not in the requested region");
  using cd = std::complex<double>;
  const cd I(0.0, 1.0);
  const int M = cfg.terms;
  const double kr = cfg.k * r;
  ComplexFields out{};
  if (region == PacmanRegion::Outside) {
    if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "outer series at r = 0");
    std::vector<cd> H, dH;
    hankel2_array(M - 1, kr, H, dH);
    cd sp = 0.0, sr = 0.0, st = 0.0;
    for (int n = 0; n < M; ++n) {
      const double sn = std::sin(n * theta), cn = std::cos(n * theta);
      const cd ang = cfg.coef.aA[n] * sn + cfg.coef.aS[n] * cn;
      sp += ang * H[n];
      sr += ang * dH[n];
      st += static_cast<double>(n) * (cfg.coef.aA[n] * cn - cfg.coef.aS[n] * sn) * H[n];
    }
    out.p = sp;
    out.vr = I / cfg.Z0 * sr;
    out.vt = I / (kr * cfg.Z0) * st;
    return out;
  }

  const int N = cfg.wedge;
  // Orders (n + 1/2) N and n N; integers for even wedge numbers.
  if (N % 2 != 0) throw Error(ErrorCode::InvalidConfig, "mouth series needs an even wedge number");
  const int top = (M - 1) * N + N / 2;
  std::vector<double> J, dJ;
  bessel_j_with_derivative(top, kr, J, dJ);
  cd sp = 0.0, sr = 0.0, st = 0.0;
  for (int n = 0; n < M; ++n) {
    const int na = n * N + N / 2, ns = n * N;
    const double half = n + 0.5;
    const double sa = std::sin(na * theta), ca = std::cos(na * theta);
    const double ss = std::sin(ns * theta), cs = std::cos(ns * theta);
    sp += cfg.coef.bA[n] * J[na] * sa + cfg.coef.bS[n] * J[ns] * cs;
    sr += cfg.coef.bA[n] * dJ[na] * sa + cfg.coef.bS[n] * dJ[ns] * cs;
    st += half * cfg.coef.bA[n] * J[na] * ca - static_cast<double>(n) * cfg.coef.bS[n] * J[ns] * ss;
  }
  out.p = sp;
  out.vr = I / cfg.Z0 * sr;
  out.vt = kr > 0.0 ? I * static_cast<double>(N) / (kr * cfg.Z0) * st : cd(0.0);
  return out;
}

ComplexCartesian pacman_amplitude(const PacmanConfig& cfg, const Vec2& x) {
  const Vec2 d = x - cfg.center;
  const double r = d.norm();
  const double th = std::atan2(d.y(), d.x());
  ComplexFields f = eval_field(cfg, r, th, pacman_region(cfg, r, th));
  const double c = std::cos(th), s = std::sin(th);
  return {f.p, f.vr * c - f.vt * s, f.vr * s + f.vt * c};
}

Fields pacman_solution(const PacmanConfig& cfg, const Vec2& x, double t) {
  ComplexCartesian a = pacman_amplitude(cfg, x);
  const std::complex<double> ph = std::exp(std::complex<double>(0.0, cfg.omega * t));
  return {(a.p * ph).real(), (a.ux * ph).real(), (a.uy * ph).real()};
}

std::size_t HarmonicCache::Hash::operator()(const Key& k) const {
  std::uint64_t a, b;
  std::memcpy(&a, &k.x, sizeof a);
  std::memcpy(&b, &k.y, sizeof b);
  return std::hash<std::uint64_t>()(a * 0x9E3779B97F4A7C15ull ^ b);
}

void HarmonicCache::prefill(const std::vector<Vec2>& pts) {
  for (const auto& p : pts) {
    Key k{p.x(), p.y()};
    if (!map_.count(k)) map_.emplace(k, pacman_amplitude(cfg_, p));
  }
}

Fields HarmonicCache::at(const Vec2& x, double t) const {
  auto it = map_.find(Key{x.x(), x.y()});
  ComplexCartesian a = it != map_.end() ? it->second : pacman_amplitude(cfg_, x);
  const std::complex<double> ph = std::exp(std::complex<double>(0.0, cfg_.omega * t));
  return {(a.p * ph).real(), (a.ux * ph).real(), (a.uy * ph).real()};
}

} // namespace cutwave
