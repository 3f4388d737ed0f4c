#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swipt/model.hpp"

namespace swipt::sr {

enum class CodebookMethod { sum_max, max_min, random, exhaustive };
const char* to_string(CodebookMethod m);
CodebookMethod codebook_method_from_string(const std::string& s);

/// Finite set of relay permutation matrices, scored by the singular values of
/// the permuted end-to-end channel. The identity permutation is always kept.
struct Codebook {
  std::vector<std::vector<int>> permutations;  // one-line notation
  CodebookMethod method = CodebookMethod::sum_max;
  std::vector<double> scores;  // sum or min of singular values (0 for random)
};

/// Ranks permutations by the singular values of [h_hat_1 .. h_hat_K]^H T G:
/// sum_max keeps the B largest sums, max_min the B largest minima (ties broken
/// lexicographically on one-line notation), random samples B distinct
/// permutations, exhaustive returns all Nr!. Enumeration is capped at Nr <= 8;
/// beyond that only the random method is allowed (throws std::invalid_argument).
Codebook build_codebook(const Eigen::MatrixXcd& g,
                        const std::vector<Eigen::VectorXcd>& h_hat, int b,
                        CodebookMethod method, std::mt19937_64* rng = nullptr);

/// Iterate of the difference-of-convex latent design: reciprocal splitting
/// ratios p_k = 1/rho_k, q_k = 1/(1-rho_k), reciprocal power scale
/// phi = 1/beta, stacked beamformers.
struct CccpPoint {
  Eigen::VectorXd p, q;
  double phi = 1.0;
  std::vector<Eigen::VectorXcd> f;
};

/// Affine function of a CccpPoint:
/// c0 + dp'p + dq'q + dphi*phi + sum_j 2 Re(df_j^H f_j).
struct AffineForm {
  double c0 = 0.0;
  Eigen::VectorXd dp, dq;
  double dphi = 0.0;
  std::vector<Eigen::VectorXcd> df;

  double value_at(const CccpPoint& r) const;
};

/// Exact convex pieces of user k's SINR (x) and EH (z) constraints.
double eval_x(const CccpPoint& r, int k, const std::vector<int>& perm,
              const model::ChannelSet& ch, const model::SystemConfig& cfg);
double eval_z(const CccpPoint& r, int k, const std::vector<int>& perm,
              const model::ChannelSet& ch, const model::SystemConfig& cfg);

/// First-order expansions of the convex pieces around r0; exact at r0.
AffineForm linearize_x(const CccpPoint& r0, int k, const std::vector<int>& perm,
                       const model::ChannelSet& ch, const model::SystemConfig& cfg);
AffineForm linearize_z(const CccpPoint& r0, int k, const std::vector<int>& perm,
                       const model::ChannelSet& ch, const model::SystemConfig& cfg);

struct CccpStepResult {
  bool feasible = false;
  CccpPoint r;
  double objective = 0.0;  // exact latent power at r
};

/// One majorize-minimize step: solves the second-order-cone reformulation of
/// the linearized problem around r0.
CccpStepResult cccp_step(const CccpPoint& r0, const std::vector<int>& perm,
                         const model::ChannelSet& ch, const model::SystemConfig& cfg);

struct SrOptions {
  double delta = 2e-3;        // power tolerance between iterations, mW
  int max_iters = 50;         // latent iteration cap
  double theta = 6.0;         // subgradient step size
  double epsilon = 1e-6;      // power-scale floor
  double beta0 = 1.0;         // initial power scale
  double rank_tol = 1e-6;
  int recovery_trials = 100;
};

struct LatentOutcome {
  bool feasible = false;
  model::Transceiver tx;  // ScaledPermutation relay weight
  double power = 0.0;
  std::vector<double> trace;  // objective per iteration (best-so-far when
                              // driven by the subgradient loop)
  int iterations = 0;
  std::vector<std::string> anomalies;
};

/// Latent design for one permutation: initial point from the convex (f, rho)
/// problem at beta = 1 (fallback beta in {4, 16}), then CCCP iterations.
LatentOutcome design_latent_cccp(const std::vector<int>& perm, int index,
                                 const model::ChannelSet& ch,
                                 const model::SystemConfig& cfg, const SrOptions& opts,
                                 std::mt19937_64& rng);

struct FixedBetaResult {
  bool feasible = false;
  double objective = 0.0;  // f(beta): optimum of the lifted problem
  std::vector<Eigen::MatrixXcd> lifted;
  Eigen::VectorXd rho;
  Eigen::VectorXd x_corner, y_corner;  // dual corner scalars per user
  bool rank_one = true;
  double max_rank_ratio = 0.0;
};

/// Worst-case design problem at a fixed power scale: semidefinite program over
/// the lifted beamformers with per-user robust LMIs; users with zero error
/// radius use scalar rows. Also returns the dual corner scalars used by the
/// scale subgradient.
FixedBetaResult solve_fixed_beta_robust(double beta, const std::vector<int>& perm,
                                        const model::ChannelSet& ch,
                                        const model::SystemConfig& cfg);

/// Subgradient of f(beta) at the given solution.
double subgradient_value(const FixedBetaResult& res, double beta,
                         const std::vector<int>& perm, const model::ChannelSet& ch,
                         const model::SystemConfig& cfg);

/// Latent design for one permutation via projected subgradient steps on the
/// power scale, keeping the best iterate; infeasible scales trigger step
/// halving from the last feasible point.
LatentOutcome design_latent_subgradient(const std::vector<int>& perm, int index,
                                        const model::ChannelSet& ch,
                                        const model::SystemConfig& cfg,
                                        const SrOptions& opts, std::mt19937_64& rng);

struct SrOutcome {
  bool feasible = false;
  model::Transceiver tx;
  double power = 0.0;
  int l_opt = -1;
  double beta = 0.0;
  std::vector<double> latent_powers;  // NaN for infeasible latents
  int iterations = 0;                 // iterations spent on the selected latent
  std::vector<std::string> anomalies;
};

/// Full mode designs every latent transceiver and keeps the cheapest
/// (lowest index on ties); simplified mode ranks the initial points only and
/// refines the single best one.
SrOutcome design_sr(const model::ChannelSet& ch, const model::SystemConfig& cfg,
                    const Codebook& codebook, bool robust, bool simplified,
                    const SrOptions& opts, std::mt19937_64& rng);

}  // namespace swipt::sr
