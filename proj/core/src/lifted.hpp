#pragma once

// Internal helper shared by the design modules: a Hermitian matrix decision
// variable parametrized by real diagonal entries and re/im off-diagonal pairs.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swipt/conic.hpp"

namespace swipt::detail {

class HermitianVar {
 public:
  static HermitianVar create(conic::Program& p, int n, const std::string& name) {
    HermitianVar v;
    v.n_ = n;
    v.diag_.resize(n);
    v.re_.setZero(n, n);
    v.im_.setZero(n, n);
    for (int i = 0; i < n; ++i) {
      v.diag_[i] = p.add_var(name + "_d" + std::to_string(i));
      for (int j = i + 1; j < n; ++j) {
        v.re_(i, j) = p.add_var(name + "_re" + std::to_string(i) + "_" + std::to_string(j));
        v.im_(i, j) = p.add_var(name + "_im" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
    return v;
  }

  int side() const { return n_; }

  conic::CplxAffine entry(int i, int j) const {
    using conic::LinExpr;
    if (i == j) return conic::CplxAffine(LinExpr::variable(diag_[i]));
    if (i < j)
      return {LinExpr::variable(re_(i, j)), LinExpr::variable(im_(i, j))};
    return {LinExpr::variable(re_(j, i)), -1.0 * LinExpr::variable(im_(j, i))};
  }

  /// Tr(A X) for Hermitian constant A (a real quantity).
  conic::LinExpr inner(const Eigen::MatrixXcd& a) const {
    conic::LinExpr e;
    for (int i = 0; i < n_; ++i) {
      e += a(i, i).real() * conic::LinExpr::variable(diag_[i]);
      for (int j = i + 1; j < n_; ++j) {
        e += 2.0 * a(i, j).real() * conic::LinExpr::variable(re_(i, j));
        e += 2.0 * a(i, j).imag() * conic::LinExpr::variable(im_(i, j));
      }
    }
    return e;
  }

  /// u^H X v as a complex affine scalar.
  conic::CplxAffine form(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    conic::CplxAffine e;
    for (int s = 0; s < n_; ++s)
      for (int t = 0; t < n_; ++t) {
        std::complex<double> c = std::conj(u[s]) * v[t];
        if (c != std::complex<double>(0.0, 0.0)) e += c * entry(s, t);
      }
    return e;
  }

  conic::LinExpr trace() const {
    conic::LinExpr e;
    for (int i = 0; i < n_; ++i) e += conic::LinExpr::variable(diag_[i]);
    return e;
  }

  void add_psd(conic::Program& p) const {
    std::vector<std::vector<conic::CplxAffine>> m(n_, std::vector<conic::CplxAffine>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m[i][j] = entry(i, j);
    p.add_psd_hermitian(m);
  }

  Eigen::MatrixXcd value(const conic::Solution& s) const {
    Eigen::MatrixXcd m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = s.value(entry(i, j));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<int> diag_;
  Eigen::MatrixXi re_, im_;
};

/// Spectral ratio lambda_2 / lambda_1 of a Hermitian PSD matrix (0 for side 1).
inline double rank_one_ratio(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const int n = static_cast<int>(ev.size());
  if (n < 2 || ev[n - 1] <= 0.0) return 0.0;
  return std::max(ev[n - 2], 0.0) / ev[n - 1];
}

/// Principal factor sqrt(lambda_1) u_1 of a Hermitian PSD matrix.
inline Eigen::VectorXcd principal_factor(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const int n = static_cast<int>(es.eigenvalues().size());
  return std::sqrt(std::max(es.eigenvalues()[n - 1], 0.0)) * es.eigenvectors().col(n - 1);
}

}  // namespace swipt::detail
