#pragma once

#include "cutwave/basis_ops.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cutwave {

struct MergeNeighborhood {
  int owner = -1;
  std::vector<int> members; // owner first, then in the order they were added
  double volume = 0.0;
};

// Cut elements with volume below threshold * dx * dy.
std::vector<int> detect_small(const Discretization& d, double threshold = 0.5);

// Greedy growth by the face neighbor with the largest volume (smallest id on ties).
MergeNeighborhood build_neighborhood(int elem, const Discretization& d, double threshold = 0.5);

// Weighted projection onto one P^N polynomial over a merged neighborhood.
struct Projection {
  Vec2 center = Vec2::Zero();
  double hx = 1.0, hy = 1.0;
  std::vector<std::pair<int, int>> basis;
  Eigen::LLT<Eigen::MatrixXd> gram;          // sum_j (1/|C_j|) int_j phi phi^T
  std::vector<Eigen::MatrixXd> moments;      // per member: (1/|C_m|) Phi(q_m)^T W_m Vq_m
  std::vector<Eigen::MatrixXd> eval;         // per member: Phi(nodes_m)
};

class SrdOperator {
public:
  static SrdOperator build(const Discretization& d, double threshold = 0.5);

  // Su, applied to p, ux and uy separately.
  void apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  const std::vector<MergeNeighborhood>& neighborhoods() const { return neigh_; }
  const std::vector<int>& overlap() const { return overlap_; } // |C_k|
  bool touched(int e) const { return !rows_[e].empty(); }
  int touched_count() const;

  // Nodal values on member `slot` of neighborhood k of the projection of one
  // scalar component (comp in 0..2); identity for singleton neighborhoods.
  Eigen::VectorXd project_on_member(int k, std::size_t slot, const Eigen::VectorXd& u, int comp) const;

  void write_csv(const std::string& path) const;

private:
  struct Block {
    int source;
    Eigen::MatrixXd matrix; // target np x source np
  };
  const Discretization* disc_ = nullptr;
  std::vector<MergeNeighborhood> neigh_;
  std::vector<int> overlap_;
  std::vector<Projection> proj_;          // per element; empty basis for singletons
  std::vector<std::vector<Block>> rows_;  // nonempty only for touched elements
};

} // namespace cutwave
