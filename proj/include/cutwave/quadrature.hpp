#pragma once

#include "cutwave/cutmesh.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cutwave {

struct FaceRule {
  std::vector<Vec2> points;
  std::vector<Vec2> normals; // out of the element
  std::vector<double> weights;
};

struct VolumeRule {
  std::vector<Vec2> points;
  std::vector<double> weights; // may be negative on cut elements
  double kappa = 1.0;          // sum|w| / sum w
  int refinements = 0;         // sampling grid doublings needed

  double sum() const;
};

// Centroid of the face nodes and the largest distance to them. The box variant
// scales each axis by the largest offset along it instead; used for slivers.
struct MappedElementFrame {
  Vec2 center = Vec2::Zero();
  double scale = 1.0;
  double hx = 1.0, hy = 1.0; // per-axis scales; both equal scale unless built as a box
  static MappedElementFrame from_faces(const std::vector<FaceRule>& faces);
  static MappedElementFrame box_from_faces(const std::vector<FaceRule>& faces);
  Vec2 to_ref(const Vec2& p) const { return {(p.x() - center.x()) / hx, (p.y() - center.y()) / hy}; }
  Vec2 to_phys(const Vec2& q) const { return {center.x() + hx * q.x(), center.y() + hy * q.y()}; }
};

// Number of face nodes used for degree N.
inline int face_points(int N) { return 4 * (N + 1); }

FaceRule face_rule(const std::vector<ParametricCurve>& curves, const Face& f, int N);
std::vector<FaceRule> face_rules(const CutMesh& mesh, const Element& e, int N);

// Curved faces turning more than this are split into Gauss panels for the moment targets.
inline constexpr double kMaxPanelTurn = 0.7853981633974483; // pi/4
// Face rules for target integrals: `faces`, with strongly turning curved faces replaced by composite rules.
std::vector<FaceRule> target_face_rules(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N);

// Legendre products p_i(x^) p_j(y^) with x^ = (x - c.x)/hx, y^ = (y - c.y)/hy.
// Rows are points, columns follow `indices`.
Eigen::MatrixXd legendre_vandermonde(const std::vector<Vec2>& points, const Vec2& c, double hx, double hy,
                                     const std::vector<std::pair<int, int>>& indices);
// Matching x and y derivatives with respect to physical coordinates.
void legendre_gradients(const std::vector<Vec2>& points, const Vec2& c, double hx, double hy,
                        const std::vector<std::pair<int, int>>& indices, Eigen::MatrixXd& gx, Eigen::MatrixXd& gy);

// Integrals over the mapped element of the total-degree-d Legendre basis,
// through the divergence theorem on the face rules.
Eigen::VectorXd target_integrals(const std::vector<FaceRule>& faces, const MappedElementFrame& frame, int degree);

struct FeketeOptions {
  int grid = 40;             // samples per direction on the background cell
  int max_refinements = 6;   // density doublings before giving up
  double rank_tol = 1e-10;   // relative size of the last pivot
  double oversample = 1.0;   // candidates needed per basis function
  bool box_frame = false;    // anisotropic mapped frame
};

// Pivot points of a column-pivoted QR of the transposed Vandermonde on samples inside the element.
std::vector<Vec2> approximate_fekete(const CutMesh& mesh, const Element& e, const MappedElementFrame& frame,
                                     int degree, const FeketeOptions& opt, int* refinements = nullptr);

VolumeRule fekete_volume_rule(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N,
                              const FeketeOptions& opt = {});

// dim(P^N) unisolvent nodes on a cut element.
std::vector<Vec2> interpolation_nodes(const CutMesh& mesh, const Element& e, const std::vector<FaceRule>& faces, int N,
                                      const FeketeOptions& opt = {});

// Reference-square rules: (N+1)^2 Gauss volume rule and (N+1)^2 Lobatto nodes, x fastest.
struct CartesianRules {
  VolumeRule volume;
  std::vector<Vec2> nodes;
};
CartesianRules cartesian_rules(int N);

void write_quadrature_csv(const std::string& path, const std::vector<VolumeRule>& rules);
void write_conditioning_csv(const std::string& path, const std::vector<VolumeRule>& rules,
                            const std::vector<ElementKind>& kinds, int N);

} // namespace cutwave
