#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swipt/model.hpp"

namespace swipt::ao {

struct AoOptions {
  double delta = 2e-3;        // absolute power tolerance between iterations, mW
  int max_iters = 20;         // alternating iteration cap
  double rank_tol = 1e-6;     // lambda_2 / lambda_1 threshold for rank-one
  int recovery_trials = 100;  // randomization budget when extraction fails
};

/// Result of one convex subproblem: the lifted optimum (a lower bound on the
/// achievable power of the subproblem) plus the extracted design.
struct SubproblemResult {
  bool feasible = false;
  double sdr_objective = 0.0;  // optimum of the lifted relaxation
  double power = 0.0;          // total power of the extracted design
  model::Transceiver tx;
  bool rank_one = true;        // every lifted block passed the spectral test
  double max_rank_ratio = 0.0;
  std::vector<std::string> anomalies;
};

enum class Termination { tolerance, power_increase, iteration_cap, infeasible_subproblem };
const char* to_string(Termination t);

struct DesignOutcome {
  bool feasible = false;
  model::Transceiver tx;
  double power = 0.0;               // total power of tx, mW
  std::vector<double> power_trace;  // one entry per completed iteration
  Termination termination = Termination::iteration_cap;
  int iterations = 0;
  std::vector<std::string> anomalies;
};

/// Beamformer / power-splitting step with the relay weight fixed: semidefinite
/// program over lifted F_k and rho_k against the estimated channels.
SubproblemResult solve_bf_ps_nominal(const Eigen::MatrixXcd& w, const model::ChannelSet& ch,
                                     const model::SystemConfig& cfg, const AoOptions& opts,
                                     std::mt19937_64& rng);

/// Relay step with beamformers and splitting ratios fixed: semidefinite
/// program over the lifted relay matrix (side Nr^2).
SubproblemResult solve_relay_nominal(const std::vector<Eigen::VectorXcd>& f,
                                     const Eigen::VectorXd& rho, const model::ChannelSet& ch,
                                     const model::SystemConfig& cfg, const AoOptions& opts,
                                     std::mt19937_64& rng);

/// Robust beamformer / power-splitting step: the per-user constraints hold for
/// every channel in the error ball, enforced through linear matrix
/// inequalities; users with zero error radius fall back to scalar rows.
SubproblemResult solve_bf_ps_robust(const Eigen::MatrixXcd& w, const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg, const AoOptions& opts,
                                    std::mt19937_64& rng);

/// Robust relay step (beamformers and splitting ratios fixed).
SubproblemResult solve_relay_robust(const std::vector<Eigen::VectorXcd>& f,
                                    const Eigen::VectorXd& rho, const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg, const AoOptions& opts,
                                    std::mt19937_64& rng);

/// Alternating minimization from the given relay initializer. Keeps the best
/// design seen; stops on the power tolerance, on a power increase (the prior
/// iterate is kept), on the iteration cap, or when a subproblem is infeasible.
DesignOutcome design_ao(const model::ChannelSet& ch, const model::SystemConfig& cfg,
                        const Eigen::MatrixXcd& w_init, bool robust, const AoOptions& opts,
                        std::mt19937_64& rng);

Eigen::MatrixXcd identity_init(int nr);
Eigen::MatrixXcd random_init(int nr, std::mt19937_64& rng);

}  // namespace swipt::ao
