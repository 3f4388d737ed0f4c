#include "swipt/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace swipt::conic {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// svec layout for symmetric side-n matrices: upper triangle column by column,
// off-diagonal entries scaled by sqrt(2) so dot products match Frobenius.
int svec_len(int n) { return n * (n + 1) / 2; }

Eigen::MatrixXd svec_to_mat(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd m(n, n);
  int idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i, ++idx) {
      double x = (i == j) ? v[idx] : v[idx] / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
    }
  return m;
}

Eigen::VectorXd mat_to_svec(const Eigen::MatrixXd& m) {
  int n = static_cast<int>(m.rows());
  Eigen::VectorXd v(svec_len(n));
  int idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i, ++idx) v[idx] = (i == j) ? m(i, j) : kSqrt2 * m(i, j);
  return v;
}

struct BlockInfo {
  ConeKind kind;
  int offset, dim, side, herm_side;
};

struct NumericProgram {
  int nvars;
  Eigen::VectorXd c;
  Eigen::VectorXd h;                                        // row constants
  std::vector<std::vector<std::pair<int, double>>> rows;    // sparse row coeffs
  std::vector<BlockInfo> blocks;
  double barrier_degree = 0.0;

  Eigen::VectorXd affine(const Eigen::VectorXd& x) const {
    Eigen::VectorXd s = h;
    for (size_t r = 0; r < rows.size(); ++r)
      for (const auto& [j, a] : rows[r]) s[r] += a * x[j];
    return s;
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& dx) const {
    Eigen::VectorXd ds = Eigen::VectorXd::Zero(h.size());
    for (size_t r = 0; r < rows.size(); ++r)
      for (const auto& [j, a] : rows[r]) ds[r] += a * dx[j];
    return ds;
  }
};

bool strictly_feasible(const NumericProgram& p, const Eigen::VectorXd& s) {
  for (const auto& b : p.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int r = 0; r < b.dim; ++r)
          if (s[b.offset + r] <= 0.0) return false;
        break;
      case ConeKind::second_order: {
        double t = s[b.offset];
        double un = s.segment(b.offset + 1, b.dim - 1).norm();
        if (t <= 0.0 || t - un <= 0.0) return false;
        break;
      }
      case ConeKind::psd: {
        Eigen::MatrixXd m = svec_to_mat(s.segment(b.offset, b.dim), b.side);
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success) return false;
        break;
      }
    }
  }
  return true;
}

// Smallest t such that s + t*e lies on the cone boundary, i.e. the amount of
// slack missing (negative when s is strictly interior).
double cone_deficit(const NumericProgram& p, const Eigen::VectorXd& s) {
  double need = -std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int r = 0; r < b.dim; ++r) need = std::max(need, -s[b.offset + r]);
        break;
      case ConeKind::second_order: {
        double t = s[b.offset];
        double un = s.segment(b.offset + 1, b.dim - 1).norm();
        need = std::max(need, un - t);
        break;
      }
      case ConeKind::psd: {
        Eigen::MatrixXd m = svec_to_mat(s.segment(b.offset, b.dim), b.side);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        need = std::max(need, -es.eigenvalues().minCoeff());
        break;
      }
    }
  }
  return need;
}

double barrier_value(const NumericProgram& p, const Eigen::VectorXd& s) {
  double phi = 0.0;
  for (const auto& b : p.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int r = 0; r < b.dim; ++r) phi -= std::log(s[b.offset + r]);
        break;
      case ConeKind::second_order: {
        // Factored form avoids catastrophic cancellation at large slacks.
        double t = s[b.offset];
        double un = s.segment(b.offset + 1, b.dim - 1).norm();
        phi -= std::log(t - un) + std::log(t + un);
        break;
      }
      case ConeKind::psd: {
        Eigen::MatrixXd m = svec_to_mat(s.segment(b.offset, b.dim), b.side);
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        phi -= 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        break;
      }
    }
  }
  return phi;
}

// Gradient of the barrier in stacked cone coordinates.
Eigen::VectorXd barrier_gradient(const NumericProgram& p, const Eigen::VectorXd& s) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(s.size());
  for (const auto& b : p.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int r = 0; r < b.dim; ++r) g[b.offset + r] = -1.0 / s[b.offset + r];
        break;
      case ConeKind::second_order: {
        double t = s[b.offset];
        Eigen::VectorXd u = s.segment(b.offset + 1, b.dim - 1);
        double r2 = (t - u.norm()) * (t + u.norm());
        g[b.offset] = -2.0 * t / r2;
        g.segment(b.offset + 1, b.dim - 1) = 2.0 * u / r2;
        break;
      }
      case ConeKind::psd: {
        Eigen::MatrixXd m = svec_to_mat(s.segment(b.offset, b.dim), b.side);
        Eigen::MatrixXd inv = m.llt().solve(Eigen::MatrixXd::Identity(b.side, b.side));
        g.segment(b.offset, b.dim) = -mat_to_svec(inv);
        break;
      }
    }
  }
  return g;
}

// Newton system for psi_t(x) = t c'x + phi(h + Ax): fills grad and hess.
void newton_system(const NumericProgram& p, double t, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& s, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const int n = p.nvars;
  grad = t * p.c;
  hess.setZero(n, n);

  Eigen::VectorXd gs = barrier_gradient(p, s);
  for (size_t r = 0; r < p.rows.size(); ++r)
    for (const auto& [j, a] : p.rows[r]) grad[j] += a * gs[r];

  for (const auto& b : p.blocks) {
    // Active variable set of the block.
    std::vector<int> cols;
    for (int r = 0; r < b.dim; ++r)
      for (const auto& [j, a] : p.rows[b.offset + r]) cols.push_back(j);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    if (cols.empty()) continue;
    const int m = static_cast<int>(cols.size());
    std::vector<int> pos(n, -1);
    for (int k = 0; k < m; ++k) pos[cols[k]] = k;

    Eigen::MatrixXd local(b.dim, m);
    local.setZero();
    for (int r = 0; r < b.dim; ++r)
      for (const auto& [j, a] : p.rows[b.offset + r]) local(r, pos[j]) += a;

    Eigen::MatrixXd hl;
    switch (b.kind) {
      case ConeKind::nonnegative: {
        Eigen::VectorXd w = s.segment(b.offset, b.dim).array().square().inverse();
        hl = local.transpose() * w.asDiagonal() * local;
        break;
      }
      case ConeKind::second_order: {
        double tt = s[b.offset];
        Eigen::VectorXd u = s.segment(b.offset + 1, b.dim - 1);
        double r2 = (tt - u.norm()) * (tt + u.norm());
        Eigen::VectorXd gr(b.dim);
        gr[0] = 2.0 * tt;
        gr.tail(b.dim - 1) = -2.0 * u;
        Eigen::MatrixXd hb = (gr * gr.transpose()) / (r2 * r2);
        hb(0, 0) -= 2.0 / r2;
        for (int i = 1; i < b.dim; ++i) hb(i, i) += 2.0 / r2;
        hl = local.transpose() * hb * local;
        break;
      }
      case ConeKind::psd: {
        Eigen::MatrixXd mS = svec_to_mat(s.segment(b.offset, b.dim), b.side);
        Eigen::LLT<Eigen::MatrixXd> llt(mS);
        Eigen::MatrixXd L = llt.matrixL();
        // Columns of L^-1 A_j L^-T in svec form; Gram matrix gives the
        // quadratic form tr(A_i S^-1 A_j S^-1).
        Eigen::MatrixXd bb(b.dim, m);
        for (int k = 0; k < m; ++k) {
          Eigen::MatrixXd aj = svec_to_mat(local.col(k), b.side);
          Eigen::MatrixXd tmp = L.triangularView<Eigen::Lower>().solve(aj);
          Eigen::MatrixXd bj =
              L.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
          bb.col(k) = mat_to_svec(0.5 * (bj + bj.transpose()));
        }
        hl = bb.transpose() * bb;
        break;
      }
    }
    for (int a = 0; a < m; ++a)
      for (int bcol = 0; bcol < m; ++bcol) hess(cols[a], cols[bcol]) += hl(a, bcol);
  }
}

struct CenterResult {
  bool ok = false;
  int iters = 0;
};

// Damped Newton centering of psi_t from a strictly feasible x (updated in
// place). early_stop, when set, allows leaving as soon as a predicate on x
// holds (used by phase I).
template <typename Pred>
CenterResult center(const NumericProgram& p, double t, Eigen::VectorXd& x, int max_iters,
                    Pred early_stop) {
  CenterResult res;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double best_dec2 = std::numeric_limits<double>::infinity();
  int since_progress = 0;
  for (int it = 0; it < max_iters; ++it) {
    if (early_stop(x)) {
      res.ok = true;
      return res;
    }
    Eigen::VectorXd s = p.affine(x);
    newton_system(p, t, x, s, grad, hess);

    if (!grad.allFinite() || !hess.allFinite()) return res;

    Eigen::VectorXd dx;
    double reg = 0.0;
    for (;;) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          reg == 0.0 ? hess : Eigen::MatrixXd(hess + reg * Eigen::MatrixXd::Identity(
                                                         p.nvars, p.nvars)));
      dx = ldlt.solve(-grad);
      if (ldlt.info() == Eigen::Success && dx.allFinite() && grad.dot(dx) <= 0.0) break;
      reg = (reg == 0.0) ? 1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff()) : reg * 100;
      if (reg > 1e30) return res;
    }

    double decrement2 = -grad.dot(dx);
    res.iters = it + 1;
    if (decrement2 * 0.5 < 1e-10) {
      res.ok = true;
      return res;
    }
    // Once t * c'x is large the gradient carries an absolute floating-point
    // error that keeps the measured decrement from reaching the tight target.
    // The decrement is affine-invariant, so a stalled but small value still
    // certifies a well-centered point.
    if (decrement2 < 0.5 * best_dec2) {
      best_dec2 = decrement2;
      since_progress = 0;
    } else if (++since_progress >= 10 && decrement2 * 0.5 < 1e-4) {
      res.ok = true;
      return res;
    }

    Eigen::VectorXd ds = p.direction(dx);
    // The decrease test works on the psi difference directly: the linear part
    // t c'(alpha dx) is computed exactly, which keeps the line search usable
    // when t c'x itself is many orders larger than the required decrease.
    const double cdx = p.c.dot(dx);
    const double phi0 = barrier_value(p, s);
    double alpha = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      Eigen::VectorXd snew = s + alpha * ds;
      if (!strictly_feasible(p, snew)) continue;
      double dpsi = t * alpha * cdx + (barrier_value(p, snew) - phi0);
      if (dpsi <= -0.01 * alpha * decrement2) {
        x += alpha * dx;
        stepped = true;
        break;
      }
    }
    if (!stepped) {
      // No further progress is possible at this scale; accept current center.
      res.ok = decrement2 * 0.5 < 1e-4;
      return res;
    }
  }
  res.ok = false;
  return res;
}

auto no_early_stop = [](const Eigen::VectorXd&) { return false; };

std::vector<Eigen::VectorXd> extract_duals(const NumericProgram& p, double t,
                                           const Eigen::VectorXd& s) {
  Eigen::VectorXd gs = barrier_gradient(p, s);
  std::vector<Eigen::VectorXd> duals;
  duals.reserve(p.blocks.size());
  for (const auto& b : p.blocks) duals.push_back(-gs.segment(b.offset, b.dim) / t);
  return duals;
}

}  // namespace

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("embed_hermitian: non-square input");
  double dev = (h - h.adjoint()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (dev > 1e-10 * scale) throw std::invalid_argument("embed_hermitian: input not Hermitian");
  const int n = static_cast<int>(h.rows());
  Eigen::MatrixXd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.bottomRightCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  return 0.5 * (e + e.transpose());
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "?";
}

Eigen::MatrixXd Solution::psd_dual(int block) const {
  return svec_to_mat(block_duals.at(block), block_sides_.at(block));
}

Eigen::MatrixXcd Solution::hermitian_dual(int block) const {
  const int n = block_herm_sides_.at(block);
  if (n == 0) throw std::invalid_argument("block is not hermitian-embedded");
  Eigen::MatrixXd z = psd_dual(block);
  Eigen::MatrixXcd x =
      (z.topLeftCorner(n, n) + z.bottomRightCorner(n, n)).cast<std::complex<double>>() +
      std::complex<double>(0, 1) *
          (z.bottomLeftCorner(n, n) - z.topRightCorner(n, n)).cast<std::complex<double>>();
  return 0.5 * (x + x.adjoint());
}

int Program::add_var(std::string name) {
  var_names_.push_back(name.empty() ? "x" + std::to_string(num_vars_) : std::move(name));
  return num_vars_++;
}

std::vector<int> Program::add_vars(int n, const std::string& prefix) {
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i)
    ids[i] = add_var(prefix.empty() ? "" : prefix + std::to_string(i));
  return ids;
}

void Program::set_objective(const LinExpr& obj) {
  objective_ = obj;
  objective_.compress();
}

void Program::add_to_objective(const LinExpr& obj) {
  objective_ += obj;
  objective_.compress();
}

int Program::add_rows(ConeKind kind, const std::vector<LinExpr>& rows, int side,
                      int herm_side) {
  Block b;
  b.kind = kind;
  b.offset = static_cast<int>(rows_.size());
  b.dim = static_cast<int>(rows.size());
  b.side = side;
  b.herm_side = herm_side;
  for (const auto& r : rows) {
    rows_.push_back(r);
    rows_.back().compress();
  }
  blocks_.push_back(b);
  return static_cast<int>(blocks_.size()) - 1;
}

int Program::add_nonneg(const LinExpr& e) {
  return add_rows(ConeKind::nonnegative, {e}, 0, 0);
}

int Program::add_soc(const std::vector<LinExpr>& e) {
  if (e.size() < 2) throw std::invalid_argument("add_soc: need at least two rows");
  return add_rows(ConeKind::second_order, e, 0, 0);
}

int Program::add_soc_complex(const LinExpr& t, const std::vector<CplxAffine>& u) {
  std::vector<LinExpr> rows;
  rows.reserve(1 + 2 * u.size());
  rows.push_back(t);
  for (const auto& z : u) rows.push_back(z.re());
  for (const auto& z : u) rows.push_back(z.im());
  return add_rows(ConeKind::second_order, rows, 0, 0);
}

int Program::add_psd(const std::vector<std::vector<LinExpr>>& m) {
  const int n = static_cast<int>(m.size());
  std::vector<LinExpr> rows;
  rows.reserve(svec_len(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      rows.push_back(i == j ? m[i][j] : kSqrt2 * m[i][j]);
  return add_rows(ConeKind::psd, rows, n, 0);
}

int Program::add_psd_hermitian(const std::vector<std::vector<CplxAffine>>& m) {
  const int n = static_cast<int>(m.size());
  // entry (i, j) of the complex matrix for i <= j; mirror by conjugation.
  auto re = [&](int i, int j) -> LinExpr {
    return i <= j ? m[i][j].re() : m[j][i].re();
  };
  auto im = [&](int i, int j) -> LinExpr {
    if (i == j) return LinExpr{};
    return i < j ? m[i][j].im() : -m[j][i].im();
  };
  const int ne = 2 * n;
  std::vector<LinExpr> rows;
  rows.reserve(svec_len(ne));
  auto entry = [&](int a, int b) -> LinExpr {
    // embedding [[Re, -Im], [Im, Re]]
    bool atop = a < n, btop = b < n;
    int i = atop ? a : a - n, j = btop ? b : b - n;
    if (atop == btop) return re(i, j);
    return atop ? -im(i, j) : im(i, j);
  };
  for (int j = 0; j < ne; ++j)
    for (int i = 0; i <= j; ++i)
      rows.push_back(i == j ? entry(i, j) : kSqrt2 * entry(i, j));
  return add_rows(ConeKind::psd, rows, ne, n);
}

int Program::hyperbolic_constraint(const LinExpr& a, const LinExpr& b, double s) {
  if (s <= 0.0) throw std::invalid_argument("hyperbolic_constraint: s must be positive");
  return add_soc({a + b, LinExpr{2.0 * std::sqrt(s)}, a - b});
}

void Program::dump_triplets(std::ostream& os) const {
  for (const auto& [j, v] : objective_.terms()) os << -1 << ' ' << 0 << ' ' << j << ' ' << v << '\n';
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& b = blocks_[bi];
    for (int r = 0; r < b.dim; ++r) {
      const LinExpr& e = rows_[b.offset + r];
      if (e.constant() != 0.0) os << bi << ' ' << r << ' ' << -1 << ' ' << e.constant() << '\n';
      for (const auto& [j, v] : e.terms()) os << bi << ' ' << r << ' ' << j << ' ' << v << '\n';
    }
  }
}

Solution Program::solve(const SolverOptions& opts) const {
  NumericProgram p;
  p.nvars = num_vars_;
  p.c = Eigen::VectorXd::Zero(num_vars_);
  for (const auto& [j, v] : objective_.terms()) p.c[j] += v;
  p.h.resize(static_cast<int>(rows_.size()));
  p.rows.resize(rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    p.h[r] = rows_[r].constant();
    p.rows[r] = rows_[r].terms();
  }
  for (const auto& b : blocks_) {
    p.blocks.push_back({b.kind, b.offset, b.dim, b.side, b.herm_side});
    switch (b.kind) {
      case ConeKind::nonnegative: p.barrier_degree += b.dim; break;
      case ConeKind::second_order: p.barrier_degree += 2; break;
      case ConeKind::psd: p.barrier_degree += b.side; break;
    }
  }

  Solution sol;
  for (const auto& b : blocks_) {
    sol.block_sides_.push_back(b.side);
    sol.block_herm_sides_.push_back(b.herm_side);
  }
  const double obj_const = objective_.constant();

  // ---- Phase I: min tau s.t. s(x) + tau*e in K, e the cone identity.
  NumericProgram p1 = p;
  const int tau = p1.nvars++;
  p1.c = Eigen::VectorXd::Zero(p1.nvars);
  p1.c[tau] = 1.0;
  for (const auto& b : p.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int r = 0; r < b.dim; ++r) p1.rows[b.offset + r].emplace_back(tau, 1.0);
        break;
      case ConeKind::second_order:
        p1.rows[b.offset].emplace_back(tau, 1.0);
        break;
      case ConeKind::psd: {
        int idx = 0;
        for (int j = 0; j < b.side; ++j)
          for (int i = 0; i <= j; ++i, ++idx)
            if (i == j) p1.rows[b.offset + idx].emplace_back(tau, 1.0);
        break;
      }
    }
  }

  const bool warm =
      opts.warm_start.size() == num_vars_ && opts.warm_start.allFinite();

  // Safeguard ball keeps the phase-I centering objective bounded below along
  // directions that grow the barrier without moving tau. With a warm start the
  // ball is centered there and kept much tighter, so the feasibility search
  // cannot drift far from the seeded region.
  {
    double ball_radius = 1e8 * (1.0 + p.h.cwiseAbs().maxCoeff());
    Eigen::VectorXd center = Eigen::VectorXd::Zero(p1.nvars);
    if (warm) {
      center.head(num_vars_) = opts.warm_start;
      ball_radius = 1e4 * (1.0 + p.h.cwiseAbs().maxCoeff() +
                           opts.warm_start.cwiseAbs().maxCoeff());
    }
    BlockInfo ball{ConeKind::second_order, static_cast<int>(p1.rows.size()),
                   p1.nvars + 1, 0, 0};
    p1.rows.emplace_back();  // radius row (constant)
    Eigen::VectorXd hext(p1.h.size() + p1.nvars + 1);
    hext.head(p1.h.size()) = p1.h;
    hext.tail(p1.nvars + 1).setZero();
    hext[p1.h.size()] = ball_radius;
    for (int j = 0; j < p1.nvars; ++j) {
      p1.rows.push_back({{j, 1.0}});
      hext[p1.h.size() + 1 + j] = -center[j];
    }
    p1.h = hext;
    p1.blocks.push_back(ball);
    p1.barrier_degree += 2;
  }

  Eigen::VectorXd x1 = Eigen::VectorXd::Zero(p1.nvars);
  if (warm) x1.head(num_vars_) = opts.warm_start;
  const double need0 = std::max(0.0, cone_deficit(p, p.affine(x1.head(num_vars_))));
  x1[tau] = need0 + 1.0 + 0.1 * need0;

  const double strict_margin = 1e-9 * (1.0 + x1[tau]);
  auto phase1_done = [&](const Eigen::VectorXd& x) {
    return cone_deficit(p, p.affine(x.head(p.nvars))) < -strict_margin;
  };

  int total_iters = 0;
  double t = std::max(1.0, p1.barrier_degree / (std::abs(x1[tau]) + 1.0));
  bool found_feasible = phase1_done(x1);
  while (!found_feasible) {
    auto cr = center(p1, t, x1, opts.max_iters - total_iters, phase1_done);
    total_iters += cr.iters;
    if (phase1_done(x1)) {
      found_feasible = true;
      break;
    }
    if (!cr.ok || total_iters >= opts.max_iters) {
      sol.status = Status::numerical_failure;
      sol.iterations = total_iters;
      return sol;
    }
    double gap = p1.barrier_degree / t;
    if (gap <= opts.tol * (1.0 + std::abs(x1[tau])) || gap <= 0.1 * std::abs(strict_margin)) {
      // tau* >= tau - gap; a positive lower bound certifies infeasibility.
      if (x1[tau] - gap > 0.0) {
        sol.status = Status::infeasible;
        sol.iterations = total_iters;
        Eigen::VectorXd s1 = p1.affine(x1);
        sol.block_duals = extract_duals(p1, t, s1);  // improving ray: A'z ~ 0, h'z < 0
        sol.block_duals.pop_back();  // drop the internal safeguard-ball block
        return sol;
      }
      sol.status = Status::numerical_failure;
      sol.iterations = total_iters;
      return sol;
    }
    t *= opts.barrier_mu;
  }

  // ---- Phase II from the strictly feasible point.
  Eigen::VectorXd x = x1.head(num_vars_);
  // Phase I may have drifted along slack directions. When a warm start is
  // available, the strictly feasible blends theta*x + (1-theta)*warm form an
  // interval containing theta = 1; bisect for the smallest one and step back
  // inside by doubling it to keep a safety margin.
  if (warm) {
    auto blend_ok = [&](double theta) {
      Eigen::VectorXd cand = theta * x + (1.0 - theta) * opts.warm_start;
      return strictly_feasible(p, p.affine(cand));
    };
    double lo = 0.0, hi = 1.0;
    if (blend_ok(0.0)) {
      hi = 0.0;
    } else {
      for (int i = 0; i < 40 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (blend_ok(mid) ? hi : lo) = mid;
      }
    }
    const double theta = std::min(1.0, std::max(2.0 * hi, 1e-10));
    if (blend_ok(theta)) x = theta * x + (1.0 - theta) * opts.warm_start;
  }
  if (!strictly_feasible(p, p.affine(x))) {
    sol.status = Status::numerical_failure;
    sol.iterations = total_iters;
    return sol;
  }

  total_iters = 0;
  t = std::max(1.0, p.barrier_degree / (std::abs(p.c.dot(x)) + 1.0));
  double obj_floor = -1e12 * (1.0 + std::abs(p.c.dot(x)) + std::abs(obj_const));
  for (;;) {
    auto cr = center(p, t, x, opts.max_iters - total_iters, no_early_stop);
    total_iters += cr.iters;
    double obj = p.c.dot(x);
    if (obj < obj_floor) {
      sol.status = Status::unbounded;
      sol.iterations = total_iters;
      sol.x = x;
      return sol;
    }
    if (!cr.ok || total_iters >= opts.max_iters) {
      sol.status = Status::numerical_failure;
      sol.iterations = total_iters;
      sol.x = x;
      sol.objective = obj + obj_const;
      return sol;
    }
    double gap = p.barrier_degree / t;
    if (gap <= opts.tol * (1.0 + std::abs(obj))) break;
    t *= opts.barrier_mu;
  }

  Eigen::VectorXd s = p.affine(x);
  sol.status = Status::optimal;
  sol.x = x;
  sol.objective = p.c.dot(x) + obj_const;
  sol.iterations = total_iters;
  sol.block_duals = extract_duals(p, t, s);
  double dual_obj = 0.0;
  for (size_t bi = 0; bi < p.blocks.size(); ++bi)
    dual_obj -= sol.block_duals[bi].dot(p.h.segment(p.blocks[bi].offset, p.blocks[bi].dim));
  sol.dual_objective = dual_obj + obj_const;
  return sol;
}

}  // namespace swipt::conic
