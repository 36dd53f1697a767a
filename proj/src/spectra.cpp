#include "cutwave/spectra.hpp"

#include "cutwave/error.hpp"

#include <fstream>
#include <vector>

extern "C" void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a, const int* lda, double* wr,
                       double* wi, double* vl, const int* ldvl, double* vr, const int* ldvr, double* work,
                       const int* lwork, int* info);

namespace cutwave {

Eigen::MatrixXd assemble_operator(const LinearMap& map, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y;
  map(x, y);
  if (y.size() != n) throw Error(ErrorCode::InvalidInput, "operator output has the wrong size");
  if (y.lpNorm<Eigen::Infinity>() != 0.0)
    throw Error(ErrorCode::NonLinearRHS, "operator maps zero to a nonzero vector (norm " + std::to_string(y.norm()) + ")");
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x.setZero();
    x(j) = 1.0;
    map(x, y);
    A.col(j) = y;
  }
  return A;
}

Spectrum eigenvalues(const Eigen::MatrixXd& A) {
  // LAPACK's blocked Hessenberg QR; Eigen's unblocked one is far too slow at n ~ 5000.
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd a = A;
  std::vector<double> wr(n), wi(n);
  int info = 0, lwork = -1, one = 1;
  double query = 0.0, dummy = 0.0;
  dgeev_("N", "N", &n, a.data(), &n, wr.data(), wi.data(), &dummy, &one, &dummy, &one, &query, &lwork, &info);
  lwork = static_cast<int>(query);
  std::vector<double> work(std::max(lwork, 1));
  dgeev_("N", "N", &n, a.data(), &n, wr.data(), wi.data(), &dummy, &one, &dummy, &one, work.data(), &lwork, &info);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "dense eigenvalue iteration did not converge (info " + std::to_string(info) + ")");
  Spectrum s;
  Eigen::VectorXcd ev(n);
  for (int i = 0; i < n; ++i) ev(i) = {wr[i], wi[i]};
  s.max_re = ev.size() ? -std::numeric_limits<double>::infinity() : 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    s.values.push_back(ev(i));
    s.max_abs = std::max(s.max_abs, std::abs(ev(i)));
    s.max_re = std::max(s.max_re, ev(i).real());
    s.max_abs_re = std::max(s.max_abs_re, std::abs(ev(i).real()));
  }
  return s;
}

Eigen::MatrixXd to_energy_coordinates(const Discretization& d, const Eigen::MatrixXd& A, double c) {
  Eigen::MatrixXd B = A;
  // Left multiply by T, right multiply by T^-1 = blockdiag(c V, V, V).
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& op = *d.ops[e];
    for (int comp = 0; comp < 3; ++comp) {
      const Eigen::Index r = d.block(e, comp);
      const double s = comp == 0 ? 1.0 / c : 1.0;
      Eigen::MatrixXd rows = s * op.Vinv * B.middleRows(r, op.np);
      B.middleRows(r, op.np) = rows;
    }
  }
  for (int e = 0; e < d.element_count(); ++e) {
    const auto& op = *d.ops[e];
    for (int comp = 0; comp < 3; ++comp) {
      const Eigen::Index r = d.block(e, comp);
      const double s = comp == 0 ? c : 1.0;
      Eigen::MatrixXd cols = s * B.middleCols(r, op.np) * op.V;
      B.middleCols(r, op.np) = cols;
    }
  }
  return B;
}

void write_spectrum_csv(const std::string& path, const Spectrum& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.precision(17);
  out << "re,im\n";
  for (const auto& v : s.values) out << v.real() << ',' << v.imag() << '\n';
}

} // namespace cutwave
