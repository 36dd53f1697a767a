#pragma once

#include "cutwave/geometry.hpp"
#include "cutwave/wave_dg.hpp"

#include <complex>
#include <string>
#include <unordered_map>
#include <vector>

namespace cutwave {

struct PacmanCoefficients {
  std::vector<std::complex<double>> aA, aS, bA, bS;
  std::size_t size() const { return aA.size(); }
};

// CSV header n,aA_re,aA_im,aS_re,aS_im,bA_re,bA_im,bS_re,bS_im; rows in order of n.
PacmanCoefficients read_pacman_coefficients(const std::string& path);
void write_pacman_coefficients(const std::string& path, const PacmanCoefficients& c);

struct PacmanConfig {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double half_angle = 0.0; // mouth |theta| < half_angle; set from the wedge number when zero
  int wedge = 6;
  double k = 9.0;
  double Z0 = 1.0;
  double omega = 9.0;
  int terms = 100;
  PacmanCoefficients coef;

  double mouth_half_angle() const;
  void validate() const;
};

enum class PacmanRegion { Outside = 1, Mouth = 2 };

PacmanRegion pacman_region(const PacmanConfig& cfg, double r, double theta);

struct ComplexFields {
  std::complex<double> p, vr, vt;
};

// Truncated series in polar coordinates. Throws RegionMismatch if (r, theta) is
// not in `region`, DomainError at r = 0 in the outer region.
ComplexFields eval_field(const PacmanConfig& cfg, double r, double theta, PacmanRegion region);

// Physical field Re(F e^{i omega t}) at a Cartesian point, velocity in x/y components.
Fields pacman_solution(const PacmanConfig& cfg, const Vec2& x, double t);

// Complex amplitudes (p, ux, uy) at a Cartesian point.
struct ComplexCartesian {
  std::complex<double> p, ux, uy;
};
ComplexCartesian pacman_amplitude(const PacmanConfig& cfg, const Vec2& x);

// Memoized amplitudes at fixed points (boundary nodes, error points).
class HarmonicCache {
public:
  explicit HarmonicCache(const PacmanConfig& cfg) : cfg_(cfg) {}
  void prefill(const std::vector<Vec2>& pts);
  Fields at(const Vec2& x, double t) const;

private:
  struct Key {
    double x, y;
    bool operator==(const Key& o) const { return x == o.x && y == o.y; }
  };
  struct Hash {
    std::size_t operator()(const Key& k) const;
  };
  PacmanConfig cfg_;
  std::unordered_map<Key, ComplexCartesian, Hash> map_;
};

} // namespace cutwave
