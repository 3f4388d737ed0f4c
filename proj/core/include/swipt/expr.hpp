#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace swipt::conic {

/// Sparse affine expression over real scalar decision variables:
/// constant + sum_i coef_i * x[idx_i].
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)

  static LinExpr variable(int idx, double coef = 1.0) {
    LinExpr e;
    e.terms_.emplace_back(idx, coef);
    return e;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }

  LinExpr& operator+=(const LinExpr& o) {
    constant_ += o.constant_;
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) { return *this += (-1.0) * o; }
  LinExpr& operator*=(double a) {
    constant_ *= a;
    for (auto& t : terms_) t.second *= a;
    return *this;
  }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }

  /// Merges duplicate variable indices and drops zero coefficients.
  void compress() {
    std::sort(terms_.begin(), terms_.end());
    std::vector<std::pair<int, double>> out;
    for (const auto& [i, c] : terms_) {
      if (!out.empty() && out.back().first == i)
        out.back().second += c;
      else
        out.emplace_back(i, c);
    }
    std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
    terms_ = std::move(out);
  }

  double eval(const Eigen::VectorXd& x) const {
    double v = constant_;
    for (const auto& [i, c] : terms_) v += c * x[i];
    return v;
  }

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

/// Complex affine scalar, realified as a (re, im) pair of LinExpr.
class CplxAffine {
 public:
  CplxAffine() = default;
  CplxAffine(LinExpr re, LinExpr im = LinExpr{}) : re_(std::move(re)), im_(std::move(im)) {}
  CplxAffine(std::complex<double> c) : re_(c.real()), im_(c.imag()) {}  // NOLINT
  CplxAffine(double c) : re_(c) {}                                      // NOLINT

  const LinExpr& re() const { return re_; }
  const LinExpr& im() const { return im_; }

  CplxAffine conj() const { return {re_, -im_}; }

  CplxAffine& operator+=(const CplxAffine& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  CplxAffine& operator-=(const CplxAffine& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  friend CplxAffine operator+(CplxAffine a, const CplxAffine& b) { return a += b; }
  friend CplxAffine operator-(CplxAffine a, const CplxAffine& b) { return a -= b; }
  friend CplxAffine operator-(CplxAffine a) { return {-a.re_, -a.im_}; }
  friend CplxAffine operator*(std::complex<double> s, const CplxAffine& a) {
    return {s.real() * a.re_ - s.imag() * a.im_, s.real() * a.im_ + s.imag() * a.re_};
  }
  friend CplxAffine operator*(const CplxAffine& a, std::complex<double> s) { return s * a; }
  friend CplxAffine operator*(double s, const CplxAffine& a) { return {s * a.re_, s * a.im_}; }

  std::complex<double> eval(const Eigen::VectorXd& x) const {
    return {re_.eval(x), im_.eval(x)};
  }

 private:
  LinExpr re_, im_;
};

}  // namespace swipt::conic
