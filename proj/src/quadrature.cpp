#include "cutwave/quadrature.hpp"

#include "cutwave/error.hpp"
#include "cutwave/legendre.hpp"

#include <spdlog/spdlog.h>

#include <fstream>

namespace cutwave {

double VolumeRule::sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

MappedElementFrame MappedElementFrame::from_faces(const std::vector<FaceRule>& faces) {
  MappedElementFrame fr;
  std::size_t n = 0;
  Vec2 c = Vec2::Zero();
  for (const auto& f : faces)
    for (const auto& p : f.points) {
      c += p;
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::InvalidInput, "element without face nodes");
  fr.center = c / static_cast<double>(n);
  double r = 0.0;
  for (const auto& f : faces)
    for (const auto& p : f.points) r = std::max(r, (p - fr.center).norm());
  fr.scale = fr.hx = fr.hy = r;
  return fr;
}

MappedElementFrame MappedElementFrame::box_from_faces(const std::vector<FaceRule>& faces) {
  MappedElementFrame fr = from_faces(faces);
  double ax = 0.0, ay = 0.0;
  for (const auto& f : faces)
    for (const auto& p : f.points) {
      ax = std::max(ax, std::abs(p.x() - fr.center.x()));
      ay = std::max(ay, std::abs(p.y() - fr.center.y()));
    }
  fr.hx = std::max(ax, 1e-3 * fr.scale);
  fr.hy = std::max(ay, 1e-3 * fr.scale);
  return fr;
}

namespace {

// Gauss rule on the piece t in [ta, tb] of a face.
FaceRule face_panel(const std::vector<ParametricCurve>& curves, const Face& f, int N, double ta, double tb) {
  const auto& g = gauss_legendre(face_points(N));
  FaceRule r;
  static const Vec2 side_normal[4] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
  for (std::size_t q = 0; q < g.x.size(); ++q) {
    double t = ta + 0.5 * (tb - ta) * (g.x[q] + 1.0);
    r.points.push_back(face_position(curves, f, t));
    double speed = face_derivative(curves, f, t).norm();
    r.weights.push_back(0.5 * (tb - ta) * g.w[q] * speed);
    if (f.curved) {
      double span = f.s1 - f.s0;
      double s = f.forward ? f.s0 + t * span : f.s1 - t * span;
      r.normals.push_back(eval_normal(curves[f.curve], s));
    } else {
      r.normals.push_back(side_normal[static_cast<int>(f.side)]);
    }
  }
  return r;
}

// Total tangent turning of a curved face, sampled.
double turning(const std::vector<ParametricCurve>& curves, const Face& f) {
  const int n = 32;
  double total = 0.0;
  Vec2 prev = face_derivative(curves, f, 0.0);
  for (int k = 1; k <= n; ++k) {
    Vec2 d = face_derivative(curves, f, static_cast<double>(k) / n);
    total += std::abs(std::atan2(prev.x() * d.y() - prev.y() * d.x(), prev.dot(d)));
    prev = d;
  }
  return total;
}

} // namespace

FaceRule face_rule(const std::vector<ParametricCurve>& curves, const Face& f, int N) {
  const double chord = (f.b - f.a).norm();
  if (!f.curved && chord < 1e-12) throw Error(ErrorCode::ZeroLengthFace, "straight face of zero length");
  FaceRule r = face_panel(curves, f, N, 0.0, 1.0);
  double len = 0.0;
  for (double w : r.weights) len += w;
  if (len < 1e-12) throw Error(ErrorCode::ZeroLengthFace, "face of length " + std::to_string(len));
  return r;
}

std::vector<FaceRule> target_face_rules(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N) {
  if (faces.size() != e.faces.size()) return faces;
  std::vector<FaceRule> out = faces;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const Face& f = e.faces[k];
    if (!f.curved) continue;
    int panels = static_cast<int>(std::ceil(turning(mesh.curves, f) / kMaxPanelTurn));
    if (panels <= 1) continue;
    FaceRule r;
    for (int p = 0; p < panels; ++p) {
      FaceRule q = face_panel(mesh.curves, f, N, static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
      r.points.insert(r.points.end(), q.points.begin(), q.points.end());
      r.normals.insert(r.normals.end(), q.normals.begin(), q.normals.end());
      r.weights.insert(r.weights.end(), q.weights.begin(), q.weights.end());
    }
    out[k] = std::move(r);
  }
  return out;
}

std::vector<FaceRule> face_rules(const CutMesh& mesh, const Element& e, int N) {
  std::vector<FaceRule> rules;
  rules.reserve(e.faces.size());
  for (const auto& f : e.faces) rules.push_back(face_rule(mesh.curves, f, N));
  return rules;
}

Eigen::MatrixXd legendre_vandermonde(const std::vector<Vec2>& points, const Vec2& c, double hx, double hy,
                                     const std::vector<std::pair<int, int>>& indices) {
  int deg = 0;
  for (auto [i, j] : indices) deg = std::max({deg, i, j});
  Eigen::MatrixXd V(points.size(), indices.size());
  std::vector<double> px(deg + 1), py(deg + 1);
  for (std::size_t r = 0; r < points.size(); ++r) {
    legendre_all(deg, (points[r].x() - c.x()) / hx, px.data());
    legendre_all(deg, (points[r].y() - c.y()) / hy, py.data());
    for (std::size_t k = 0; k < indices.size(); ++k) V(r, k) = px[indices[k].first] * py[indices[k].second];
  }
  return V;
}

void legendre_gradients(const std::vector<Vec2>& points, const Vec2& c, double hx, double hy,
                        const std::vector<std::pair<int, int>>& indices, Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) {
  int deg = 0;
  for (auto [i, j] : indices) deg = std::max({deg, i, j});
  gx.resize(points.size(), indices.size());
  gy.resize(points.size(), indices.size());
  std::vector<double> px(deg + 1), py(deg + 1), dx(deg + 1), dy(deg + 1);
  for (std::size_t r = 0; r < points.size(); ++r) {
    legendre_all(deg, (points[r].x() - c.x()) / hx, px.data(), dx.data());
    legendre_all(deg, (points[r].y() - c.y()) / hy, py.data(), dy.data());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      auto [i, j] = indices[k];
      gx(r, k) = dx[i] * py[j] / hx;
      gy(r, k) = px[i] * dy[j] / hy;
    }
  }
}

Eigen::VectorXd target_integrals(const std::vector<FaceRule>& faces, const MappedElementFrame& frame, int degree) {
  const auto idx = total_degree_indices(degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(idx.size());
  std::vector<double> px(degree + 1), py(degree + 1), ax(degree + 1), ay(degree + 1);
  for (const auto& f : faces) {
    for (std::size_t q = 0; q < f.points.size(); ++q) {
      Vec2 xh = frame.to_ref(f.points[q]);
      legendre_all(degree, xh.x(), px.data(), nullptr, ax.data());
      legendre_all(degree, xh.y(), py.data(), nullptr, ay.data());
      // Physical field (hx Fx, hy Fy) has the same divergence; divide by the Jacobian hx hy.
      const double w = f.weights[q];
      const double nx = f.normals[q].x() / frame.hy, ny = f.normals[q].y() / frame.hx;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        auto [i, j] = idx[k];
        double Fx = 0.5 * ax[i] * py[j];
        double Fy = 0.5 * px[i] * ay[j];
        b(k) += (Fx * nx + Fy * ny) * w;
      }
    }
  }
  return b;
}

namespace {

std::vector<Vec2> sample_candidates(const CutMesh& mesh, const Element& e, int per_cell) {
  const auto& g = mesh.grid;
  const Vec2 lo = g.cell_lo(e.cell_i, e.cell_j);
  const double hx = g.dx() / per_cell, hy = g.dy() / per_cell;
  auto first = [](double a, double h) { return std::max(0, static_cast<int>(std::floor(a / h - 0.5))); };
  auto last = [per_cell](double b, double h) { return std::min(per_cell - 1, static_cast<int>(std::ceil(b / h - 0.5))); };
  int i0 = first(e.bbox.lo.x() - lo.x(), hx), i1 = last(e.bbox.hi.x() - lo.x(), hx);
  int j0 = first(e.bbox.lo.y() - lo.y(), hy), j1 = last(e.bbox.hi.y() - lo.y(), hy);
  std::vector<Vec2> pts;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      Vec2 p(lo.x() + (i + 0.5) * hx, lo.y() + (j + 0.5) * hy);
      if (element_contains(e, p)) pts.push_back(p);
    }
  return pts;
}

} // namespace

std::vector<Vec2> approximate_fekete(const CutMesh& mesh, const Element& e, const MappedElementFrame& frame,
                                     int degree, const FeketeOptions& opt, int* refinements) {
  const auto idx = total_degree_indices(degree);
  const std::size_t m = idx.size();
  for (int r = 0; r <= opt.max_refinements; ++r) {
    auto cand = sample_candidates(mesh, e, opt.grid << r);
    if (static_cast<double>(cand.size()) < opt.oversample * m) continue;
    Eigen::MatrixXd Vt = legendre_vandermonde(cand, frame.center, frame.hx, frame.hy, idx).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Vt);
    const auto& R = qr.matrixQR();
    double r0 = std::abs(R(0, 0));
    double rl = std::abs(R(m - 1, m - 1));
    if (!(rl > opt.rank_tol * r0)) {
      spdlog::debug("element {}: rank test failed at refinement {} ({:.2e})", e.id, r, rl / r0);
      continue;
    }
    std::vector<Vec2> nodes;
    for (std::size_t k = 0; k < m; ++k) nodes.push_back(cand[qr.colsPermutation().indices()(k)]);
    if (refinements) *refinements = r;
    return nodes;
  }
  throw Error(ErrorCode::RankDeficient, "no unisolvent sample set for element " + std::to_string(e.id) + " at degree " +
                                            std::to_string(degree));
}

VolumeRule fekete_volume_rule(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N,
                              const FeketeOptions& opt) {
  const int d = 2 * N;
  auto frame = opt.box_frame ? MappedElementFrame::box_from_faces(faces) : MappedElementFrame::from_faces(faces);
  Eigen::VectorXd b = target_integrals(target_face_rules(mesh, e, faces, N), frame, d);
  VolumeRule rule;
  rule.points = approximate_fekete(mesh, e, frame, d, opt, &rule.refinements);
  const auto idx = total_degree_indices(d);
  Eigen::MatrixXd V = legendre_vandermonde(rule.points, frame.center, frame.hx, frame.hy, idx);
  Eigen::VectorXd w = V.transpose().colPivHouseholderQr().solve(b);
  const double s2 = frame.hx * frame.hy;
  double sum = 0.0, abs_sum = 0.0;
  for (int k = 0; k < w.size(); ++k) {
    rule.weights.push_back(w(k) * s2);
    sum += rule.weights.back();
    abs_sum += std::abs(rule.weights.back());
  }
  rule.kappa = abs_sum / sum;
  return rule;
}

std::vector<Vec2> interpolation_nodes(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N,
                                      const FeketeOptions& opt) {
  auto frame = opt.box_frame ? MappedElementFrame::box_from_faces(faces) : MappedElementFrame::from_faces(faces);
  return approximate_fekete(mesh, e, frame, N, opt);
}

CartesianRules cartesian_rules(int N) {
  CartesianRules r;
  const auto& g = gauss_legendre(N + 1);
  const auto& l = gauss_lobatto(N + 1 >= 2 ? N + 1 : 2);
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      r.volume.points.emplace_back(g.x[i], g.x[j]);
      r.volume.weights.push_back(g.w[i] * g.w[j]);
    }
  for (std::size_t j = 0; j < l.x.size(); ++j)
    for (std::size_t i = 0; i < l.x.size(); ++i) r.nodes.emplace_back(l.x[i], l.x[j]);
  return r;
}

void write_quadrature_csv(const std::string& path, const std::vector<VolumeRule>& rules) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(17);
  out << "elem,node,x,y,w\n";
  for (std::size_t e = 0; e < rules.size(); ++e)
    for (std::size_t k = 0; k < rules[e].points.size(); ++k)
      out << e << ',' << k << ',' << rules[e].points[k].x() << ',' << rules[e].points[k].y() << ','
          << rules[e].weights[k] << '\n';
}

void write_conditioning_csv(const std::string& path, const std::vector<VolumeRule>& rules,
                            const std::vector<ElementKind>& kinds, int N) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(12);
  out << "elem,kind,N,m_N,kappa\n";
  for (std::size_t e = 0; e < rules.size(); ++e)
    out << e << ',' << to_string(kinds[e]) << ',' << N << ',' << rules[e].points.size() << ',' << rules[e].kappa << '\n';
}

} // namespace cutwave
