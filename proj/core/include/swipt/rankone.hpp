#pragma once

#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swipt/model.hpp"

namespace swipt::rankone {

/// Worst-case values over the per-user channel error balls for a fixed
/// candidate (beamformers f_j, relay weight W):
///   u(k,j): lower bound on |(h_k)^H W G f_j|^2,
///   v(k,j): upper bound on the same quantity,
///   w_bar(k): upper bound on ||(h_k)^H W||^2,
///   w_tilde(k): lower bound on the same.
struct WorstCaseBounds {
  Eigen::MatrixXd u, v;
  Eigen::VectorXd w_bar, w_tilde;
};

/// Extremes of |(h_hat + e)^H b|^2 over ||e|| <= eta (Cauchy-Schwarz):
/// returns {max(|h_hat^H b| - eta ||b||, 0)^2, (|h_hat^H b| + eta ||b||)^2}.
std::pair<double, double> worst_case_linear_bounds(const Eigen::VectorXcd& h_hat,
                                                   double eta,
                                                   const Eigen::VectorXcd& b);

/// Exact extrema of ||(h_hat + e)^H W||^2 over ||e|| <= eta, computed from the
/// eigendecomposition of W W^H and the Lagrange-multiplier secular equation
/// (hard case handled explicitly). Returns {max, min}.
std::pair<double, double> worst_case_quadratic_bounds(const Eigen::VectorXcd& h_hat,
                                                      double eta,
                                                      const Eigen::MatrixXcd& w);

/// Bounds for every (k, j) pair; eta_k = 0 entries collapse each pair.
WorstCaseBounds compute_bounds(const model::ChannelSet& ch,
                               const Eigen::VectorXd& eta,
                               const Eigen::MatrixXcd& w,
                               const std::vector<Eigen::VectorXcd>& f);

struct RescaleSolution {
  bool feasible = false;
  Eigen::VectorXd phi;   // per-user scales (beamformer mode) or one entry (relay)
  Eigen::VectorXd rho;   // power-splitting ratios
  double objective = 0.0;  // total power of the rescaled design
};

/// Scales each candidate beamformer by sqrt(phi_k) and re-picks rho so the
/// worst-case constraints hold, minimizing total power (SOCP). W stays fixed.
RescaleSolution rescale_beamformers(const std::vector<Eigen::VectorXcd>& f,
                                    const Eigen::MatrixXcd& w,
                                    const WorstCaseBounds& bounds,
                                    const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg);

/// Scales the relay weight by sqrt(phi) (common scale) and re-picks rho;
/// 1-D monotone feasibility search for the smallest feasible phi.
RescaleSolution rescale_relay(const std::vector<Eigen::VectorXcd>& f,
                              const Eigen::MatrixXcd& w,
                              const WorstCaseBounds& bounds,
                              const model::ChannelSet& ch,
                              const model::SystemConfig& cfg);

struct RecoveryResult {
  bool success = false;
  model::Transceiver tx;
  double objective = 0.0;
  int feasible_candidates = 0;
};

/// Randomized rank-one extraction for the lifted beamformers: trial 1 uses the
/// principal eigenvector of each F_k, later trials draw Q Lambda^(1/2) w with
/// w standard complex Gaussian; every candidate is rescaled and infeasible
/// ones are discarded. robust selects worst-case (eta) or nominal (eta = 0)
/// bounds.
RecoveryResult recover_beamformers(const std::vector<Eigen::MatrixXcd>& lifted_f,
                                   const Eigen::MatrixXcd& w,
                                   const model::ChannelSet& ch,
                                   const model::SystemConfig& cfg, bool robust,
                                   int trials, std::mt19937_64& rng);

/// Same scheme for the lifted relay matrix (side Nr^2); candidates are
/// reshaped to Nr x Nr and rescaled by a common scalar.
RecoveryResult recover_relay(const Eigen::MatrixXcd& lifted_w,
                             const std::vector<Eigen::VectorXcd>& f,
                             const model::ChannelSet& ch,
                             const model::SystemConfig& cfg, bool robust, int trials,
                             std::mt19937_64& rng);

}  // namespace swipt::rankone
