#pragma once

#include "cutwave/pacman.hpp"
#include "cutwave/quadrature.hpp"
#include "cutwave/spectra.hpp"
#include "cutwave/srd.hpp"
#include "cutwave/timeint.hpp"
#include "cutwave/wave_dg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cutwave {

struct CurveSpec {
  std::string type = "circle"; // circle, ellipse, pacman, spline
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double ax = 1.0, ay = 1.0;
  double half_angle = 0.0; // pacman; 0 means pi / wedge
  std::string file;        // spline samples (s,x,y)
  Vec2 offset = Vec2::Zero();
  double scale = 1.0;
  bool fluid_outside = true;
  BcKind bc = BcKind::Wall;
};

struct ScenarioConfig {
  std::string scenario = "custom"; // mms, eig, pacman, fish, custom
  BackgroundGrid grid;
  std::vector<CurveSpec> curves;
  int degree = 4;
  double tau_p = 0.5, tau_u = 0.5;
  bool srd = true;
  double srd_threshold = 0.5;
  std::array<BcKind, 4> domain_bc{BcKind::Wall, BcKind::Wall, BcKind::Wall, BcKind::Wall};
  IntegratorConfig integrator;
  int fekete_grid = 40;
  double rank_tol = 1e-10; // slivers from tangential contacts may need a smaller value

  // mms
  std::vector<int> mms_cells{4, 8, 16, 32};
  std::vector<int> mms_degrees{1, 2, 3, 4};

  // pacman
  std::string pacman_coefficients; // empty: all-zero coefficients
  PacmanConfig pacman;
  double error_interval = 0.01;

  // fish and custom: pressure held on InflowPressure boundaries until inflow_until
  double inflow_pressure = 2.0;
  double inflow_until = 0.05;
  std::string initial = "zero"; // custom: zero, mms, gaussian
  Vec2 pulse_center = Vec2::Zero();
  double pulse_width = 0.1;

  std::vector<double> snapshots;
  int field_density = 3;
  int energy_stride = 1; // log every k-th accepted step

  std::string base_dir = "."; // relative file paths resolve against this
  std::string source;         // canonical JSON of the effective config, set by load/parse
};

// Throws InvalidConfig on unknown keys, wrong types or bad values.
ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

struct Overrides {
  bool no_srd = false;
  std::optional<double> tau;
  std::optional<int> degree;
};
void apply_overrides(ScenarioConfig& cfg, const Overrides& o);

// Canonical JSON text of a config (sorted keys); hashing this identifies a run.
std::string canonical_json(const ScenarioConfig& cfg);
std::uint64_t fnv1a(const std::string& text);

std::vector<ParametricCurve> build_curves(const ScenarioConfig& cfg);
WaveProblem build_problem(const ScenarioConfig& cfg);

// Smallest cut cell relative to a full cell: area ratio and side over largest bounding-box side.
struct SmallCellStats {
  int element = -1;
  double volume_ratio = 0.0, length_ratio = 0.0;
};
SmallCellStats smallest_cut_cell(const CutMesh& mesh);

struct MmsRow {
  int N, cells;
  double h;
  long dofs;
  double error;
  double rate; // against the previous (coarser) row of the same N; NaN for the first
};
struct MmsResult {
  std::vector<MmsRow> rows;
  double finest_rate(int N) const;
};
MmsResult run_mms(const ScenarioConfig& cfg, const std::string& out_dir);

struct EigRun {
  bool penalty, srd;
  Spectrum spectrum;
};
struct EigResult {
  std::vector<EigRun> runs; // (penalty, srd): (1,0) (1,1) (0,0) (0,1)
  SmallCellStats small;
  long dofs = 0;
  const EigRun& get(bool penalty, bool srd) const;
  double ratio(bool penalty) const; // max|lambda| without SRD over with
};
EigResult run_eig(const ScenarioConfig& cfg, const std::string& out_dir);

struct ErrorSample {
  double t, l2, linf;
};
struct PacmanResult {
  std::vector<ErrorSample> errors;
  long dofs = 0;
  double max_abs_state = 0.0;
};
PacmanResult run_pacman(const ScenarioConfig& cfg, const std::string& out_dir);

struct TransientResult {
  std::vector<EnergySample> energy;
  std::vector<std::string> snapshots;
  long dofs = 0;
  IntegrationStats stats;
};
TransientResult run_fish(const ScenarioConfig& cfg, const std::string& out_dir);
TransientResult run_custom(const ScenarioConfig& cfg, const std::string& out_dir);

// Runs cfg.scenario, writes its CSVs and summary.json into out_dir; returns the process exit code.
int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

} // namespace cutwave
