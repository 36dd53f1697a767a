#pragma once

#include "cutwave/quadrature.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace cutwave {

// Nodal operators of one element. All matrices act on nodal values and use
// physical coordinates; Cartesian elements of one mesh share a single instance.
struct ElementOperators {
  int np = 0;
  Eigen::MatrixXd V, Vinv;  // orthonormal modal basis at the nodes, and its inverse
  Eigen::MatrixXd M, Minv;  // M = Vinv^T Vinv
  Eigen::MatrixXd Vq;       // nodes -> volume quadrature points
  Eigen::VectorXd wq;
  Eigen::MatrixXd Dx, Dy;   // strong derivatives
  Eigen::MatrixXd Qx, Qy;   // Vq^T W Vq D
  Eigen::MatrixXd MinvQx, MinvQy;
  Eigen::MatrixXd MinvSx, MinvSy;     // M^-1 times the skew parts (Q - Q^T)/2
  Eigen::MatrixXd Project;            // M^-1 Vq^T W: quadrature samples -> nodal L2 projection
  std::vector<Eigen::MatrixXd> Vf;    // nodes -> face quadrature points
  std::vector<Eigen::MatrixXd> Lift;  // M^-1 Vf^T W_f
  double mass_condition = 1.0;

  // Modal basis data, for evaluation away from the nodes.
  std::vector<std::pair<int, int>> basis;
  Vec2 center = Vec2::Zero();
  double hx = 1.0, hy = 1.0;
  Eigen::MatrixXd T; // Legendre products -> orthonormal modes

  // Rows mapping nodal values to point values at `points`.
  Eigen::MatrixXd interpolation_matrix(const std::vector<Vec2>& points) const;
};

// Generic construction from a polynomial index set in a frame (center c, half widths hx, hy).
std::shared_ptr<ElementOperators> build_operators(const std::vector<std::pair<int, int>>& basis, const Vec2& c, double hx,
                                                  double hy, const std::vector<Vec2>& nodes, const VolumeRule& volume,
                                                  const std::vector<FaceRule>& faces);

// Tensor Q^N on a dx-by-dy cell centered at the origin, Lobatto nodes, faces bottom/right/top/left.
std::shared_ptr<ElementOperators> cartesian_operators(int N, double dx, double dy);

// Reference node and face layouts matching cartesian_operators (relative to the cell center).
std::vector<Vec2> cartesian_nodes(int N, double dx, double dy);
std::vector<FaceRule> cartesian_face_rules(int N, double dx, double dy);
VolumeRule cartesian_volume_rule(int N, double dx, double dy);

// Total-degree P^N on a cut element from its nodes and rules, in the mapped frame.
std::shared_ptr<ElementOperators> cut_operators(int N, const std::vector<Vec2>& nodes, const VolumeRule& volume,
                                                const std::vector<FaceRule>& faces, bool box_frame = false);

// Everything the solver needs per element, plus the global state layout:
// element e owns [p; ux; uy] at offset[e], each block np(e) long.
struct Discretization {
  std::shared_ptr<const CutMesh> mesh;
  int N = 1;
  std::vector<std::shared_ptr<const ElementOperators>> ops;
  std::vector<std::vector<Vec2>> nodes;
  std::vector<VolumeRule> rules;
  std::vector<std::vector<FaceRule>> faces;
  std::vector<std::vector<std::vector<int>>> twin_perm; // face node q -> node index on the twin face
  std::vector<double> volume;                            // sum of volume weights
  std::vector<Vec2> origin; // operator coordinates are x - origin[e]
  std::vector<Eigen::Index> offset;
  Eigen::Index size = 0;

  int element_count() const { return static_cast<int>(ops.size()); }
  int np(int e) const { return ops[e]->np; }
  Eigen::Index block(int e, int comp) const { return offset[e] + comp * ops[e]->np; }
};

Discretization discretize(std::shared_ptr<const CutMesh> mesh, int N, const FeketeOptions& opt = {});

} // namespace cutwave
