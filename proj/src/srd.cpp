#include "cutwave/srd.hpp"

#include "cutwave/error.hpp"
#include "cutwave/legendre.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>

namespace cutwave {

std::vector<int> detect_small(const Discretization& d, double threshold) {
  std::vector<int> small;
  const double full = d.mesh->grid.cell_area();
  for (int e = 0; e < d.element_count(); ++e)
    if (d.mesh->elements[e].kind == ElementKind::Cut && d.volume[e] < threshold * full) small.push_back(e);
  return small;
}

MergeNeighborhood build_neighborhood(int elem, const Discretization& d, double threshold) {
  const auto& mesh = *d.mesh;
  MergeNeighborhood nb;
  nb.owner = elem;
  nb.members = {elem};
  nb.volume = d.volume[elem];
  const double target = threshold * mesh.grid.cell_area();
  while (nb.volume < target) {
    std::vector<int> cand;
    for (int m : nb.members)
      for (const auto& f : mesh.elements[m].faces)
        if (f.neighbor >= 0 && std::find(nb.members.begin(), nb.members.end(), f.neighbor) == nb.members.end())
          cand.push_back(f.neighbor);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (cand.empty())
      throw Error(ErrorCode::IsolatedSmallCell, "element " + std::to_string(elem) + " has no neighbor to merge with");
    int best = cand.front();
    for (int c : cand)
      if (d.volume[c] > d.volume[best] * (1.0 + 1e-12)) best = c;
    nb.members.push_back(best);
    nb.volume += d.volume[best];
  }
  return nb;
}

SrdOperator SrdOperator::build(const Discretization& d, double threshold) {
  SrdOperator S;
  S.disc_ = &d;
  const int ne = d.element_count();
  S.neigh_.resize(ne);
  for (int e = 0; e < ne; ++e) S.neigh_[e] = MergeNeighborhood{e, {e}, d.volume[e]};
  for (int e : detect_small(d, threshold)) S.neigh_[e] = build_neighborhood(e, d, threshold);

  // Second pass: overlap counts are final before any projection is formed.
  S.overlap_.assign(ne, 0);
  std::vector<std::vector<int>> contributes(ne); // C_k
  for (int j = 0; j < ne; ++j)
    for (int m : S.neigh_[j].members) {
      ++S.overlap_[m];
      contributes[m].push_back(j);
    }

  const auto basis = total_degree_indices(d.N);
  S.proj_.resize(ne);
  for (int j = 0; j < ne; ++j) {
    const auto& members = S.neigh_[j].members;
    if (members.size() == 1) continue;
    Box2 box;
    for (int m : members) {
      box.extend(d.mesh->elements[m].bbox.lo);
      box.extend(d.mesh->elements[m].bbox.hi);
    }
    Projection& P = S.proj_[j];
    P.center = box.center();
    P.hx = box.half_widths().x();
    P.hy = box.half_widths().y();
    P.basis = basis;
    const int nb = static_cast<int>(basis.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb, nb);
    for (int m : members) {
      const auto& op = *d.ops[m];
      const double wgt = 1.0 / S.overlap_[m];
      Eigen::MatrixXd Phiq = legendre_vandermonde(d.rules[m].points, P.center, P.hx, P.hy, basis);
      Eigen::MatrixXd PhiW = Phiq.transpose() * op.wq.asDiagonal();
      G += wgt * PhiW * Phiq;
      P.moments.push_back(wgt * PhiW * op.Vq);
      P.eval.push_back(legendre_vandermonde(d.nodes[m], P.center, P.hx, P.hy, basis));
    }
    P.gram.compute(G);
    if (P.gram.info() != Eigen::Success)
      throw Error(ErrorCode::SingularGram, "neighborhood of element " + std::to_string(j));
  }

  S.rows_.resize(ne);
  for (int k = 0; k < ne; ++k) {
    if (S.overlap_[k] == 1 && S.neigh_[k].members.size() == 1) continue;
    std::map<int, Eigen::MatrixXd> acc;
    const double inv = 1.0 / S.overlap_[k];
    const int npk = d.np(k);
    for (int j : contributes[k]) {
      const auto& members = S.neigh_[j].members;
      if (members.size() == 1) {
        auto& blk = acc[k];
        if (blk.size() == 0) blk = Eigen::MatrixXd::Zero(npk, npk);
        blk += inv * Eigen::MatrixXd::Identity(npk, npk);
        continue;
      }
      const Projection& P = S.proj_[j];
      const std::size_t slot = std::find(members.begin(), members.end(), k) - members.begin();
      Eigen::MatrixXd left = inv * P.gram.solve(P.eval[slot].transpose()).transpose(); // eval G^-1
      for (std::size_t s = 0; s < members.size(); ++s) {
        const int m = members[s];
        auto& blk = acc[m];
        if (blk.size() == 0) blk = Eigen::MatrixXd::Zero(npk, d.np(m));
        blk += left * P.moments[s];
      }
    }
    for (auto& [m, mat] : acc) S.rows_[k].push_back({m, std::move(mat)});
  }
  spdlog::debug("state redistribution: {} neighborhoods merged, {} elements touched",
                std::count_if(S.neigh_.begin(), S.neigh_.end(), [](const auto& n) { return n.members.size() > 1; }),
                S.touched_count());
  return S;
}

int SrdOperator::touched_count() const {
  return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return !r.empty(); }));
}

void SrdOperator::apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
  const auto& d = *disc_;
  out = u;
  const int ne = d.element_count();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < ne; ++k) {
    if (rows_[k].empty()) continue;
    const int npk = d.np(k);
    for (int comp = 0; comp < 3; ++comp) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(npk);
      for (const auto& b : rows_[k]) v.noalias() += b.matrix * u.segment(d.block(b.source, comp), d.np(b.source));
      out.segment(d.block(k, comp), npk) = v;
    }
  }
}

Eigen::VectorXd SrdOperator::apply(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out;
  apply(u, out);
  return out;
}

Eigen::VectorXd SrdOperator::project_on_member(int k, std::size_t slot, const Eigen::VectorXd& u, int comp) const {
  const auto& d = *disc_;
  const auto& members = neigh_[k].members;
  if (members.size() == 1) return u.segment(d.block(k, comp), d.np(k));
  const Projection& P = proj_[k];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(P.basis.size());
  for (std::size_t s = 0; s < members.size(); ++s)
    rhs += P.moments[s] * u.segment(d.block(members[s], comp), d.np(members[s]));
  return P.eval[slot] * P.gram.solve(rhs);
}

void SrdOperator::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(12);
  out << "elem,members,overlap,volume,neighborhood_volume\n";
  for (std::size_t k = 0; k < neigh_.size(); ++k) {
    out << k << ',';
    for (std::size_t s = 0; s < neigh_[k].members.size(); ++s) out << (s ? " " : "") << neigh_[k].members[s];
    out << ',' << overlap_[k] << ',' << disc_->volume[k] << ',' << neigh_[k].volume << '\n';
  }
}

} // namespace cutwave
