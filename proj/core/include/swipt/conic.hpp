#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swipt/expr.hpp"

namespace swipt::conic {

/// Hermitian-to-real embedding: H -> [[Re H, -Im H], [Im H, Re H]].
/// The embedding is PSD iff H is, and its spectrum is that of H with every
/// eigenvalue doubled. Throws std::invalid_argument if H deviates from
/// Hermitian symmetry by more than 1e-10.
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h);

enum class Status { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(Status s);

struct SolverOptions {
  double tol = 1e-7;   // feasibility residual and relative duality gap
  int max_iters = 200; // Newton iteration cap per phase
  double barrier_mu = 20.0;
  /// Optional phase-I seed (size must equal the program's variable count;
  /// ignored otherwise). Need not be feasible: it biases the feasibility
  /// search toward a known-good region, which matters for programs whose
  /// barrier otherwise drags the search to very large slack values.
  Eigen::VectorXd warm_start;
};

enum class ConeKind { nonnegative, second_order, psd };

struct Solution {
  Status status = Status::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  /// Per-block dual values in block coordinates (svec layout for PSD blocks).
  /// For status == infeasible this holds a dual improving ray instead.
  std::vector<Eigen::VectorXd> block_duals;

  double value(const LinExpr& e) const { return e.eval(x); }
  std::complex<double> value(const CplxAffine& e) const { return e.eval(x); }

  /// Dual of a real PSD block in matrix form.
  Eigen::MatrixXd psd_dual(int block) const;
  /// Complex dual of a Hermitian-embedded PSD block, scaled so that the
  /// sensitivity of the Lagrangian to a Hermitian data perturbation dM of the
  /// block is Re tr(X dM).
  Eigen::MatrixXcd hermitian_dual(int block) const;

 private:
  friend class Program;
  std::vector<int> block_sides_;       // embedded side per block (0 if not psd)
  std::vector<int> block_herm_sides_;  // complex side (0 if not hermitian-embedded)
};

/// A cone program  min c'x  s.t.  every registered block value lies in its
/// cone, where each block value is an affine function of x. Immutable once
/// handed to solve(); building is not thread-safe, concurrent solves of
/// distinct programs are.
class Program {
 public:
  int add_var(std::string name = "");
  std::vector<int> add_vars(int n, const std::string& prefix = "");

  void set_objective(const LinExpr& obj);
  void add_to_objective(const LinExpr& obj);

  /// e >= 0. Returns the block id.
  int add_nonneg(const LinExpr& e);
  /// e[0] >= || (e[1], ..., e[n-1]) ||.
  int add_soc(const std::vector<LinExpr>& e);
  /// Realified SOC: t >= || stack(re(u), im(u)) ||; norm is preserved exactly.
  int add_soc_complex(const LinExpr& t, const std::vector<CplxAffine>& u);
  /// Symmetric real affine matrix constrained PSD (upper triangle read).
  int add_psd(const std::vector<std::vector<LinExpr>>& m);
  /// Hermitian affine matrix constrained PSD via the real embedding.
  /// Upper triangle is read; the diagonal's imaginary part must be zero.
  int add_psd_hermitian(const std::vector<std::vector<CplxAffine>>& m);
  /// a*b >= s with a, b >= 0, emitted as || [2 sqrt(s), a - b] || <= a + b.
  /// Throws std::invalid_argument for s <= 0.
  int hyperbolic_constraint(const LinExpr& a, const LinExpr& b, double s);

  int num_vars() const { return num_vars_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::string& var_name(int i) const { return var_names_[i]; }

  Solution solve(const SolverOptions& opts = {}) const;

  /// Sparse triplet dump, one row per nonzero: block, row, col, value.
  /// Column -1 carries the constant term of the row; block -1 the objective.
  void dump_triplets(std::ostream& os) const;

 private:
  struct Block {
    ConeKind kind;
    int offset = 0;  // first row in the stacked cone vector
    int dim = 0;     // rows (svec length for psd)
    int side = 0;    // embedded matrix side for psd
    int herm_side = 0;
  };

  int add_rows(ConeKind kind, const std::vector<LinExpr>& rows, int side, int herm_side);

  int num_vars_ = 0;
  std::vector<std::string> var_names_;
  LinExpr objective_;
  std::vector<Block> blocks_;
  std::vector<LinExpr> rows_;  // stacked cone rows
};

}  // namespace swipt::conic
