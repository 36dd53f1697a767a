#include "cutwave/scenario.hpp"

#include "cutwave/error.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace cutwave {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("wrong type for '") + key + "' in " + where);
  }
}

Vec2 get_vec2(const json& j, const char* key, const std::string& where, Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  auto v = get<std::vector<double>>(j, key, where, {});
  if (v.size() != 2) bad(std::string("'") + key + "' in " + where + " needs two numbers");
  return {v[0], v[1]};
}

BcKind get_bc(const json& j, const char* key, const std::string& where, BcKind fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return parse_bc(get<std::string>(j, key, where, ""));
  } catch (const Error& e) {
    bad(std::string(e.what()) + " in " + where);
  }
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

void check(const ScenarioConfig& c) {
  static const std::set<std::string> kinds{"mms", "eig", "pacman", "fish", "custom"};
  if (!kinds.count(c.scenario)) bad("unknown scenario '" + c.scenario + "'");
  if (c.grid.nx < 1 || c.grid.ny < 1) bad("domain needs at least one cell per direction");
  if (!(c.grid.x1 > c.grid.x0) || !(c.grid.y1 > c.grid.y0)) bad("empty domain box");
  if (c.degree < 1 || c.degree > 10) bad("degree must be in 1..10");
  if (c.tau_p < 0 || c.tau_u < 0) bad("penalties must be nonnegative");
  if (!(c.srd_threshold > 0.0 && c.srd_threshold < 1.0)) bad("srd threshold must be in (0,1)");
  if (c.fekete_grid < 4) bad("fekete_grid too small");
  if (!(c.rank_tol > 0 && c.rank_tol < 1)) bad("rank_tol must be in (0,1)");
  if (c.field_density < 2) bad("field_density must be at least 2");
  if (c.energy_stride < 1) bad("energy_stride must be positive");
  if (!(c.error_interval > 0)) bad("error_interval must be positive");
  if (!(c.pulse_width > 0)) bad("pulse width must be positive");
  static const std::set<std::string> ics{"zero", "mms", "gaussian"};
  if (!ics.count(c.initial)) bad("unknown initial condition '" + c.initial + "'");
  for (int n : c.mms_cells)
    if (n < 1) bad("mms cells must be positive");
  for (int N : c.mms_degrees)
    if (N < 1 || N > 10) bad("mms degrees must be in 1..10");
  for (const auto& cs : c.curves) {
    static const std::set<std::string> types{"circle", "ellipse", "pacman", "spline"};
    if (!types.count(cs.type)) bad("unknown curve type '" + cs.type + "'");
    if (cs.type == "spline" && cs.file.empty()) bad("spline curve needs a file");
    if (!(cs.radius > 0 && cs.ax > 0 && cs.ay > 0 && cs.scale > 0)) bad("curve sizes must be positive");
  }
  try {
    c.integrator.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
}

} // namespace

ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"scenario", "domain", "curves", "degree", "penalty", "srd", "boundary", "integrator", "quadrature", "mms",
             "pacman", "inflow", "initial", "output"});
  ScenarioConfig c;
  c.base_dir = base_dir;
  c.scenario = get<std::string>(j, "scenario", "config", c.scenario);
  c.degree = get<int>(j, "degree", "config", c.degree);

  if (j.contains("domain")) {
    const json& d = j["domain"];
    only_keys(d, "domain", {"x", "y", "cells"});
    Vec2 x = get_vec2(d, "x", "domain", {c.grid.x0, c.grid.x1});
    Vec2 y = get_vec2(d, "y", "domain", {c.grid.y0, c.grid.y1});
    auto cells = get<std::vector<int>>(d, "cells", "domain", {c.grid.nx, c.grid.ny});
    if (cells.size() != 2) bad("domain cells needs [nx, ny]");
    c.grid.x0 = x.x(), c.grid.x1 = x.y(), c.grid.y0 = y.x(), c.grid.y1 = y.y();
    c.grid.nx = cells[0], c.grid.ny = cells[1];
  }

  if (j.contains("curves")) {
    if (!j["curves"].is_array()) bad("curves must be an array");
    for (const json& cj : j["curves"]) {
      const std::string w = "curve";
      only_keys(cj, w,
                {"type", "center", "radius", "axes", "half_angle", "file", "offset", "scale", "fluid", "bc"});
      CurveSpec s;
      s.type = get<std::string>(cj, "type", w, s.type);
      s.center = get_vec2(cj, "center", w, s.center);
      s.radius = get<double>(cj, "radius", w, s.radius);
      Vec2 axes = get_vec2(cj, "axes", w, {s.ax, s.ay});
      s.ax = axes.x(), s.ay = axes.y();
      s.half_angle = get<double>(cj, "half_angle", w, s.half_angle);
      s.file = resolve(base_dir, get<std::string>(cj, "file", w, ""));
      s.offset = get_vec2(cj, "offset", w, s.offset);
      s.scale = get<double>(cj, "scale", w, s.scale);
      std::string fluid = get<std::string>(cj, "fluid", w, "outside");
      if (fluid != "outside" && fluid != "inside") bad("curve fluid must be 'outside' or 'inside'");
      s.fluid_outside = fluid == "outside";
      s.bc = get_bc(cj, "bc", w, s.bc);
      c.curves.push_back(s);
    }
  }

  if (j.contains("penalty")) {
    const json& p = j["penalty"];
    only_keys(p, "penalty", {"tau_p", "tau_u"});
    c.tau_p = get<double>(p, "tau_p", "penalty", c.tau_p);
    c.tau_u = get<double>(p, "tau_u", "penalty", c.tau_u);
  }
  if (j.contains("srd")) {
    const json& s = j["srd"];
    only_keys(s, "srd", {"enabled", "threshold"});
    c.srd = get<bool>(s, "enabled", "srd", c.srd);
    c.srd_threshold = get<double>(s, "threshold", "srd", c.srd_threshold);
  }
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    only_keys(b, "boundary", {"bottom", "right", "top", "left"});
    const char* names[4] = {"bottom", "right", "top", "left"};
    for (int k = 0; k < 4; ++k) c.domain_bc[k] = get_bc(b, names[k], "boundary", c.domain_bc[k]);
  }
  if (j.contains("integrator")) {
    const json& ij = j["integrator"];
    const std::string w = "integrator";
    only_keys(ij, w, {"method", "dt0", "abs_tol", "rel_tol", "t_end", "dt_min", "dt_max", "safety"});
    auto& I = c.integrator;
    I.method = get<std::string>(ij, "method", w, I.method);
    I.dt0 = get<double>(ij, "dt0", w, I.dt0);
    I.abs_tol = get<double>(ij, "abs_tol", w, I.abs_tol);
    I.rel_tol = get<double>(ij, "rel_tol", w, I.rel_tol);
    I.t_end = get<double>(ij, "t_end", w, I.t_end);
    I.dt_min = get<double>(ij, "dt_min", w, I.dt_min);
    I.dt_max = get<double>(ij, "dt_max", w, I.dt_max);
    I.safety = get<double>(ij, "safety", w, I.safety);
  }
  if (j.contains("quadrature")) {
    only_keys(j["quadrature"], "quadrature", {"fekete_grid", "rank_tol"});
    c.fekete_grid = get<int>(j["quadrature"], "fekete_grid", "quadrature", c.fekete_grid);
    c.rank_tol = get<double>(j["quadrature"], "rank_tol", "quadrature", c.rank_tol);
  }
  if (j.contains("mms")) {
    only_keys(j["mms"], "mms", {"cells", "degrees"});
    c.mms_cells = get<std::vector<int>>(j["mms"], "cells", "mms", c.mms_cells);
    c.mms_degrees = get<std::vector<int>>(j["mms"], "degrees", "mms", c.mms_degrees);
  }
  if (j.contains("pacman")) {
    const json& pj = j["pacman"];
    const std::string w = "pacman";
    only_keys(pj, w,
              {"coefficients", "center", "radius", "half_angle", "wedge", "k", "Z0", "omega", "terms", "error_interval"});
    auto& P = c.pacman;
    c.pacman_coefficients = resolve(base_dir, get<std::string>(pj, "coefficients", w, ""));
    P.center = get_vec2(pj, "center", w, P.center);
    P.radius = get<double>(pj, "radius", w, P.radius);
    P.half_angle = get<double>(pj, "half_angle", w, P.half_angle);
    P.wedge = get<int>(pj, "wedge", w, P.wedge);
    P.k = get<double>(pj, "k", w, P.k);
    P.Z0 = get<double>(pj, "Z0", w, P.Z0);
    P.omega = get<double>(pj, "omega", w, P.omega);
    P.terms = get<int>(pj, "terms", w, P.terms);
    c.error_interval = get<double>(pj, "error_interval", w, c.error_interval);
  }
  if (j.contains("inflow")) {
    only_keys(j["inflow"], "inflow", {"pressure", "until"});
    c.inflow_pressure = get<double>(j["inflow"], "pressure", "inflow", c.inflow_pressure);
    c.inflow_until = get<double>(j["inflow"], "until", "inflow", c.inflow_until);
  }
  if (j.contains("initial")) {
    const json& ic = j["initial"];
    only_keys(ic, "initial", {"kind", "center", "width"});
    c.initial = get<std::string>(ic, "kind", "initial", c.initial);
    c.pulse_center = get_vec2(ic, "center", "initial", c.pulse_center);
    c.pulse_width = get<double>(ic, "width", "initial", c.pulse_width);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, "output", {"snapshots", "field_density", "energy_stride"});
    c.snapshots = get<std::vector<double>>(o, "snapshots", "output", c.snapshots);
    c.field_density = get<int>(o, "field_density", "output", c.field_density);
    c.energy_stride = get<int>(o, "energy_stride", "output", c.energy_stride);
  }
  check(c);
  c.source = canonical_json(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string base = fs::path(path).parent_path().string();
  return parse_config(ss.str(), base.empty() ? "." : base);
}

void apply_overrides(ScenarioConfig& cfg, const Overrides& o) {
  if (o.no_srd) cfg.srd = false;
  if (o.tau) cfg.tau_p = cfg.tau_u = *o.tau;
  if (o.degree) cfg.degree = *o.degree;
  check(cfg);
  cfg.source = canonical_json(cfg);
}

std::string canonical_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["domain"] = {{"x", {c.grid.x0, c.grid.x1}}, {"y", {c.grid.y0, c.grid.y1}}, {"cells", {c.grid.nx, c.grid.ny}}};
  j["curves"] = json::array();
  for (const auto& s : c.curves) {
    json cj = {{"type", s.type},     {"center", vec_json(s.center)}, {"radius", s.radius},
               {"axes", {s.ax, s.ay}}, {"half_angle", s.half_angle},     {"offset", vec_json(s.offset)},
               {"scale", s.scale},     {"fluid", s.fluid_outside ? "outside" : "inside"}, {"bc", to_string(s.bc)}};
    // The file content matters, not where it sits.
    if (!s.file.empty()) cj["file"] = fs::path(s.file).filename().string();
    j["curves"].push_back(cj);
  }
  j["degree"] = c.degree;
  j["penalty"] = {{"tau_p", c.tau_p}, {"tau_u", c.tau_u}};
  j["srd"] = {{"enabled", c.srd}, {"threshold", c.srd_threshold}};
  j["boundary"] = {{"bottom", to_string(c.domain_bc[0])},
                   {"right", to_string(c.domain_bc[1])},
                   {"top", to_string(c.domain_bc[2])},
                   {"left", to_string(c.domain_bc[3])}};
  const auto& I = c.integrator;
  j["integrator"] = {{"method", I.method},   {"dt0", I.dt0},       {"abs_tol", I.abs_tol}, {"rel_tol", I.rel_tol},
                     {"t_end", I.t_end},     {"dt_min", I.dt_min}, {"safety", I.safety}};
  if (std::isfinite(I.dt_max)) j["integrator"]["dt_max"] = I.dt_max;
  j["quadrature"] = {{"fekete_grid", c.fekete_grid}, {"rank_tol", c.rank_tol}};
  if (c.scenario == "mms") j["mms"] = {{"cells", c.mms_cells}, {"degrees", c.mms_degrees}};
  if (c.scenario == "pacman") {
    const auto& P = c.pacman;
    j["pacman"] = {{"coefficients", fs::path(c.pacman_coefficients).filename().string()},
                   {"center", vec_json(P.center)},
                   {"radius", P.radius},
                   {"half_angle", P.half_angle},
                   {"wedge", P.wedge},
                   {"k", P.k},
                   {"Z0", P.Z0},
                   {"omega", P.omega},
                   {"terms", P.terms},
                   {"error_interval", c.error_interval}};
  }
  j["inflow"] = {{"pressure", c.inflow_pressure}, {"until", c.inflow_until}};
  j["initial"] = {{"kind", c.initial}, {"center", vec_json(c.pulse_center)}, {"width", c.pulse_width}};
  j["output"] = {{"snapshots", c.snapshots}, {"field_density", c.field_density}, {"energy_stride", c.energy_stride}};
  return j.dump();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<ParametricCurve> build_curves(const ScenarioConfig& cfg) {
  std::vector<ParametricCurve> out;
  for (const auto& s : cfg.curves) {
    ParametricCurve c;
    if (s.type == "circle") {
      c = circle(s.center, s.radius * s.scale, s.fluid_outside);
    } else if (s.type == "ellipse") {
      c = ellipse(s.center, s.ax * s.scale, s.ay * s.scale, s.fluid_outside);
    } else if (s.type == "pacman") {
      double ha = s.half_angle > 0 ? s.half_angle : std::numbers::pi / cfg.pacman.wedge;
      c = pacman(s.center, s.radius * s.scale, ha, s.fluid_outside);
    } else {
      ParametricCurve base = spline_curve_from_csv(s.file, s.fluid_outside);
      if (s.scale != 1.0) {
        c = base;
        c.position = [pos = base.position, k = s.scale](double t) { return Vec2(k * pos(t)); };
        c.derivative = [der = base.derivative, k = s.scale](double t) { return Vec2(k * der(t)); };
      } else {
        c = base;
      }
      c.name = fs::path(s.file).stem().string();
    }
    if (s.offset != Vec2::Zero()) c = translated(c, s.offset);
    out.push_back(std::move(c));
  }
  return out;
}

WaveProblem build_problem(const ScenarioConfig& cfg) {
  WaveProblem pb;
  pb.tau_p = cfg.tau_p;
  pb.tau_u = cfg.tau_u;
  pb.domain_bc = cfg.domain_bc;
  for (const auto& s : cfg.curves) pb.curve_bc.push_back(s.bc);
  pb.inflow_pressure = [p = cfg.inflow_pressure, until = cfg.inflow_until](double t) { return t <= until ? p : 0.0; };
  return pb;
}

SmallCellStats smallest_cut_cell(const CutMesh& mesh) {
  SmallCellStats s;
  for (const auto& e : mesh.elements)
    if (e.kind == ElementKind::Cut && (s.element < 0 || e.volume < mesh.elements[s.element].volume)) s.element = e.id;
  if (s.element < 0) return s;
  const auto& e = mesh.elements[s.element];
  const Vec2 w = 2.0 * e.bbox.half_widths();
  s.volume_ratio = mesh.grid.cell_area() / e.volume;
  s.length_ratio = std::max(mesh.grid.dx(), mesh.grid.dy()) / w.maxCoeff();
  return s;
}

namespace {

// Mesh, operators, problem and the redistributed right-hand side dU/dt = A(S U).
struct Solver {
  std::shared_ptr<const CutMesh> mesh;
  Discretization d;
  WaveProblem pb;
  std::optional<SrdOperator> S;

  Solver(const ScenarioConfig& cfg, const BackgroundGrid& grid, int N, bool srd) {
    mesh = std::make_shared<const CutMesh>(build_cut_mesh(grid, build_curves(cfg)));
    FeketeOptions fo;
    fo.grid = cfg.fekete_grid;
    fo.rank_tol = cfg.rank_tol;
    d = discretize(mesh, N, fo);
    pb = build_problem(cfg);
    if (srd) S = SrdOperator::build(d, cfg.srd_threshold);
  }

  Eigen::VectorXd redistributed(const Eigen::VectorXd& U) const { return S ? S->apply(U) : U; }

  OdeRhs ode() const {
    return [this](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      if (S) rhs(d, pb, S->apply(y), t, dy);
      else rhs(d, pb, y, t, dy);
    };
  }

  // (U, S U)_M: the quantity the redistributed scheme keeps from growing.
  double energy(const Eigen::VectorXd& U) const { return S ? energy_inner(d, U, S->apply(U), pb.c) : discrete_energy(d, U, pb.c); }
};

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(12);
  return out;
}

// Also creates dir, so every run_* can be called on a fresh directory.
std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::string time_tag(double t) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << t;
  return s.str();
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

TransientResult run_transient(const ScenarioConfig& cfg, const std::string& out_dir, const std::string& tag,
                              std::function<Eigen::VectorXd(const Solver&)> initial) {
  Solver sv(cfg, cfg.grid, cfg.degree, cfg.srd);
  TransientResult res;
  res.dofs = static_cast<long>(sv.d.size);
  spdlog::info("{}: {} elements, {} dofs, srd {}", tag, sv.d.element_count(), res.dofs,
               sv.S ? std::to_string(sv.S->touched_count()) + " touched" : "off");

  Eigen::VectorXd U = initial(sv);
  IntegratorConfig ic = cfg.integrator;
  std::vector<double> snaps;
  for (double t : cfg.snapshots)
    if (t > 0 && t <= ic.t_end) snaps.push_back(t);
  snaps = sorted_unique(snaps);
  ic.output_times = snaps;
  // Land on the switch-off of the inflow pulse.
  if (cfg.inflow_until > 0 && cfg.inflow_until < ic.t_end) ic.output_times.push_back(cfg.inflow_until);
  ic.output_times = sorted_unique(ic.output_times);

  for (double t : cfg.snapshots)
    if (t == 0.0) {
      res.snapshots.push_back(out_path(out_dir, tag + "_t" + time_tag(0.0) + ".csv"));
      write_field_csv(res.snapshots.back(), sv.d, sv.redistributed(U), cfg.field_density);
    }
  res.energy.push_back({0.0, 0.0, sv.energy(U)});
  long step = 0;
  res.stats = integrate(
      sv.ode(), U, ic,
      [&](double t, double dt, const Eigen::VectorXd& y) {
        if (++step % cfg.energy_stride == 0) res.energy.push_back({t, dt, sv.energy(y)});
      },
      [&](double t, const Eigen::VectorXd& y) {
        if (!std::binary_search(snaps.begin(), snaps.end(), t)) return;
        res.snapshots.push_back(out_path(out_dir, tag + "_t" + time_tag(t) + ".csv"));
        write_field_csv(res.snapshots.back(), sv.d, sv.redistributed(y), cfg.field_density);
      });
  write_energy_csv(out_path(out_dir, tag + "_energy.csv"), res.energy);
  return res;
}

} // namespace

double MmsResult::finest_rate(int N) const {
  double r = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows)
    if (row.N == N) r = row.rate;
  return r;
}

MmsResult run_mms(const ScenarioConfig& cfg, const std::string& out_dir) {
  MmsResult res;
  std::vector<int> cells = cfg.mms_cells;
  std::sort(cells.begin(), cells.end());
  for (int N : cfg.mms_degrees) {
    double prev_err = 0.0, prev_h = 0.0;
    for (int n : cells) {
      BackgroundGrid g = cfg.grid;
      g.nx = g.ny = n;
      Solver sv(cfg, g, N, cfg.srd);
      sv.pb.exact = mms_solution;
      sv.pb.forcing = mms_forcing;
      Eigen::VectorXd U = interpolate(sv.d, mms_solution, 0.0);
      IntegratorConfig ic = cfg.integrator;
      auto st = integrate(sv.ode(), U, ic);
      const double err = l2_error(sv.d, sv.redistributed(U), mms_solution, ic.t_end);
      const double h = g.dx();
      MmsRow row{N, n, h, static_cast<long>(sv.d.size), err, std::numeric_limits<double>::quiet_NaN()};
      if (prev_h > 0) row.rate = std::log(prev_err / err) / std::log(prev_h / h);
      spdlog::info("mms N={} n={} dofs={} steps={} error={:.3e} rate={:.2f}", N, n, row.dofs, st.accepted, err, row.rate);
      res.rows.push_back(row);
      prev_err = err, prev_h = h;
    }
  }
  auto out = open_csv(out_path(out_dir, "mms_errors.csv"));
  out << "N,cells,h,dofs,l2_error,rate\n";
  for (const auto& r : res.rows) {
    out << r.N << ',' << r.cells << ',' << r.h << ',' << r.dofs << ',' << r.error << ',';
    if (std::isfinite(r.rate)) out << r.rate;
    out << '\n';
  }
  return res;
}

const EigRun& EigResult::get(bool penalty, bool srd) const {
  for (const auto& r : runs)
    if (r.penalty == penalty && r.srd == srd) return r;
  throw Error(ErrorCode::InvalidInput, "eigenvalue run not present");
}

double EigResult::ratio(bool penalty) const {
  return get(penalty, false).spectrum.max_abs / get(penalty, true).spectrum.max_abs;
}

EigResult run_eig(const ScenarioConfig& cfg, const std::string& out_dir) {
  Solver sv(cfg, cfg.grid, cfg.degree, true);
  EigResult res;
  res.small = smallest_cut_cell(*sv.mesh);
  res.dofs = static_cast<long>(sv.d.size);
  spdlog::info("eig: {} dofs, smallest cut cell volume ratio {:.1f}, length ratio {:.2f}", res.dofs,
               res.small.volume_ratio, res.small.length_ratio);
  for (bool penalty : {true, false}) {
    WaveProblem pb = sv.pb;
    if (!penalty) pb.tau_p = pb.tau_u = 0.0;
    for (bool srd : {false, true}) {
      const SrdOperator* S = srd ? &*sv.S : nullptr;
      LinearMap map = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { rhs(sv.d, pb, S ? S->apply(x) : x, 0.0, y); };
      EigRun run{penalty, srd, eigenvalues(assemble_operator(map, sv.d.size))};
      spdlog::info("eig penalty={} srd={}: max|l|={:.4g} max Re={:.3e} max|Re|={:.3e}", penalty, srd,
                   run.spectrum.max_abs, run.spectrum.max_re, run.spectrum.max_abs_re);
      write_spectrum_csv(out_path(out_dir, std::string("spectrum_") + (penalty ? "penalty" : "nopenalty") + "_" +
                                               (srd ? "srd" : "nosrd") + ".csv"),
                         run.spectrum);
      res.runs.push_back(std::move(run));
    }
  }
  auto out = open_csv(out_path(out_dir, "eig_table.csv"));
  out << "penalty,srd,max_abs,max_re,max_abs_re\n";
  for (const auto& r : res.runs)
    out << r.penalty << ',' << r.srd << ',' << r.spectrum.max_abs << ',' << r.spectrum.max_re << ','
        << r.spectrum.max_abs_re << '\n';
  return res;
}

PacmanResult run_pacman(const ScenarioConfig& cfg, const std::string& out_dir) {
  PacmanConfig pc = cfg.pacman;
  if (!cfg.pacman_coefficients.empty()) {
    pc.coef = read_pacman_coefficients(cfg.pacman_coefficients);
  } else {
    pc.coef.aA.assign(pc.terms, 0.0);
    pc.coef.aS = pc.coef.bA = pc.coef.bS = pc.coef.aA;
  }
  pc.validate();

  Solver sv(cfg, cfg.grid, cfg.degree, cfg.srd);
  PacmanResult res;
  res.dofs = static_cast<long>(sv.d.size);

  // Every point the run evaluates the series at: boundary nodes, error nodes and quadrature points.
  auto cache = std::make_shared<HarmonicCache>(pc);
  std::vector<Vec2> pts;
  for (int e = 0; e < sv.d.element_count(); ++e) {
    pts.insert(pts.end(), sv.d.nodes[e].begin(), sv.d.nodes[e].end());
    pts.insert(pts.end(), sv.d.rules[e].points.begin(), sv.d.rules[e].points.end());
    const auto& el = sv.mesh->elements[e];
    for (std::size_t f = 0; f < el.faces.size(); ++f)
      if (el.faces[f].tag.kind == FaceTag::Kind::Domain)
        pts.insert(pts.end(), sv.d.faces[e][f].points.begin(), sv.d.faces[e][f].points.end());
  }
  cache->prefill(pts);
  ExactSolution exact = [cache](const Vec2& x, double t) { return cache->at(x, t); };
  sv.pb.exact = exact;
  spdlog::info("pacman: {} dofs, {} cached series points", res.dofs, pts.size());

  Eigen::VectorXd U = interpolate(sv.d, exact, 0.0);
  IntegratorConfig ic = cfg.integrator;
  std::vector<double> snaps;
  for (double t : cfg.snapshots)
    if (t > 0 && t <= ic.t_end) snaps.push_back(t);
  snaps = sorted_unique(snaps);
  const int samples = static_cast<int>(std::floor(ic.t_end / cfg.error_interval + 1e-9));
  for (int k = 1; k <= samples; ++k) ic.output_times.push_back(k * cfg.error_interval);
  ic.output_times.insert(ic.output_times.end(), snaps.begin(), snaps.end());
  ic.output_times.push_back(ic.t_end);
  ic.output_times = sorted_unique(ic.output_times);

  auto record = [&](double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd SU = sv.redistributed(y);
    res.errors.push_back({t, l2_error(sv.d, SU, exact, t), linf_pressure_error(sv.d, SU, exact, t)});
    res.max_abs_state = std::max(res.max_abs_state, SU.cwiseAbs().maxCoeff());
    if (std::binary_search(snaps.begin(), snaps.end(), t))
      write_field_csv(out_path(out_dir, "pacman_field_t" + time_tag(t) + ".csv"), sv.d, SU, cfg.field_density, exact, t);
  };
  record(0.0, U);
  integrate(sv.ode(), U, ic, {}, [&](double t, const Eigen::VectorXd& y) {
    if (t > res.errors.back().t) record(t, y);
  });

  auto out = open_csv(out_path(out_dir, "pacman_errors.csv"));
  out << "t,l2_error,linf_error\n";
  for (const auto& s : res.errors) out << s.t << ',' << s.l2 << ',' << s.linf << '\n';
  return res;
}

TransientResult run_fish(const ScenarioConfig& cfg, const std::string& out_dir) {
  return run_transient(cfg, out_dir, "fish", [](const Solver& sv) { return Eigen::VectorXd::Zero(sv.d.size).eval(); });
}

TransientResult run_custom(const ScenarioConfig& cfg, const std::string& out_dir) {
  return run_transient(cfg, out_dir, "custom", [&cfg](const Solver& sv) {
    if (cfg.initial == "mms") return interpolate(sv.d, mms_solution, 0.0);
    if (cfg.initial == "gaussian") {
      const Vec2 c = cfg.pulse_center;
      const double w2 = cfg.pulse_width * cfg.pulse_width;
      return interpolate(
          sv.d, [c, w2](const Vec2& x, double) { return Fields{std::exp(-(x - c).squaredNorm() / w2), 0.0, 0.0}; }, 0.0);
    }
    return Eigen::VectorXd::Zero(sv.d.size).eval();
  });
}

int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  json summary;
  summary["scenario"] = cfg.scenario;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(cfg.source);
  summary["config_hash"] = hash.str();
  summary["config"] = json::parse(cfg.source);

  if (cfg.scenario == "mms") {
    auto r = run_mms(cfg, out_dir);
    long dofs = 0;
    json rates = json::object();
    for (const auto& row : r.rows) dofs = std::max(dofs, row.dofs);
    for (int N : cfg.mms_degrees) rates[std::to_string(N)] = r.finest_rate(N);
    summary["dofs"] = dofs;
    summary["finest_rates"] = rates;
  } else if (cfg.scenario == "eig") {
    auto r = run_eig(cfg, out_dir);
    summary["dofs"] = r.dofs;
    json runs = json::array();
    for (const auto& run : r.runs)
      runs.push_back({{"penalty", run.penalty},
                      {"srd", run.srd},
                      {"max_abs", run.spectrum.max_abs},
                      {"max_re", run.spectrum.max_re},
                      {"max_abs_re", run.spectrum.max_abs_re}});
    summary["runs"] = runs;
    summary["ratio_penalty"] = r.ratio(true);
    summary["ratio_no_penalty"] = r.ratio(false);
    summary["volume_ratio"] = r.small.volume_ratio;
    summary["length_ratio"] = r.small.length_ratio;
  } else if (cfg.scenario == "pacman") {
    auto r = run_pacman(cfg, out_dir);
    summary["dofs"] = r.dofs;
    double l2 = 0, linf = 0;
    for (const auto& s : r.errors) l2 = std::max(l2, s.l2), linf = std::max(linf, s.linf);
    summary["max_l2_error"] = l2;
    summary["max_linf_error"] = linf;
    summary["final_l2_error"] = r.errors.back().l2;
    summary["final_linf_error"] = r.errors.back().linf;
  } else {
    auto r = cfg.scenario == "fish" ? run_fish(cfg, out_dir) : run_custom(cfg, out_dir);
    summary["dofs"] = r.dofs;
    summary["accepted_steps"] = r.stats.accepted;
    summary["rejected_steps"] = r.stats.rejected;
    double emax = 0;
    for (const auto& e : r.energy) emax = std::max(emax, e.energy);
    summary["initial_energy"] = r.energy.front().energy;
    summary["final_energy"] = r.energy.back().energy;
    summary["max_energy"] = emax;
    json snaps = json::array();
    for (const auto& s : r.snapshots) snaps.push_back(fs::path(s).filename().string());
    summary["snapshots"] = snaps;
  }
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(out_path(out_dir, "summary.json")) << summary.dump(2) << '\n';
  return 0;
}

} // namespace cutwave
