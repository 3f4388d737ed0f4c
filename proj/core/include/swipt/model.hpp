#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace swipt::model {

/// All scalar system parameters in linear units (powers in milliwatts,
/// ratios linear).
struct SystemConfig {
  int nt = 0;  // BS antennas
  int nr = 0;  // relay antennas
  int k = 0;   // users
  double relay_noise = 0.0;          // sigma_r^2, mW
  Eigen::VectorXd antenna_noise;     // sigma_k^2 per user, mW
  Eigen::VectorXd circuit_noise;     // omega_k^2 per user, mW
  Eigen::VectorXd eh_efficiency;     // xi_k in (0,1]
  Eigen::VectorXd sinr_target;       // gamma_k, linear
  Eigen::VectorXd eh_target;         // psi_k, mW
  double power_weight = 1.0;         // alpha, fixed to 1

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// Flat key-value configuration as ingested from JSON (dBm/dB entries).
struct RawConfig {
  int nt = 4, nr = 4, k = 3;
  double sigma_r_dbm = -30.0;
  double sigma_dbm = -30.0;
  double omega_dbm = -20.0;
  double xi = 1.0;
  double gamma_db = 10.0;
  double psi_dbm = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 1;
};

/// Parses the flat JSON document (keys nt, nr, k, sigma_r_dbm, sigma_dbm,
/// omega_dbm, xi, gamma_db, psi_dbm, eta, seed); missing keys keep defaults.
RawConfig parse_raw_config(const std::string& json_text);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);
double db_to_linear(double db);

/// Converts dBm/dB entries to the internal linear convention.
/// Throws std::invalid_argument on nonpositive dimensions or K > min(Nt,Nr).
SystemConfig to_linear_config(const RawConfig& raw);

/// True and estimated channels plus per-user error-ball radii.
struct ChannelSet {
  Eigen::MatrixXcd first_phase;                   // G, Nr x Nt
  std::vector<Eigen::VectorXcd> second_true;      // h_k, Nr
  std::vector<Eigen::VectorXcd> second_estimated; // h_hat_k, Nr
  Eigen::VectorXd error_radius;                   // eta_k
};

struct FullMatrix {
  Eigen::MatrixXcd w;  // Nr x Nr
};

struct ScaledPermutation {
  int codebook_index = 0;
  std::vector<int> permutation;  // one-line notation: row perm[i] of column i is 1
  double power_scale = 0.0;      // beta >= 0
};

/// Beamformers, relay amplify-and-forward weight, and power-splitting ratios.
struct Transceiver {
  std::vector<Eigen::VectorXcd> beamformers;  // f_k, Nt
  std::variant<FullMatrix, ScaledPermutation> relay_weight;
  Eigen::VectorXd ps_ratios;  // rho_k in [0,1]

  /// Materializes the relay weight: W or sqrt(beta) * T_l.
  Eigen::MatrixXcd relay_matrix() const;
};

Eigen::MatrixXcd permutation_matrix(const std::vector<int>& perm);

struct VerificationReport {
  Eigen::VectorXd sinr;             // worst-case over evaluated points per user
  Eigen::VectorXd harvested;        // same
  double bs_power = 0.0;
  double rs_power = 0.0;
  double total_power = 0.0;
  bool all_constraints_met = false;
  double worst_violation = 0.0;     // most negative relative slack (>= 0 if all met)
};

enum class ChannelSelect { true_channel, estimated };

/// Draws G and h_k i.i.d. circularly-symmetric complex Gaussian with unit
/// variance; h_hat_k = h_k - e_k with e_k uniform in the eta_k-ball.
ChannelSet sample_channels(const SystemConfig& cfg, const Eigen::VectorXd& eta,
                           std::mt19937_64& rng);

/// Uniform sample from the complex ball of the given radius (dim entries).
Eigen::VectorXcd sample_error_ball(int dim, double radius, std::mt19937_64& rng,
                                   bool surface = false);

double bs_power(const Transceiver& tx);
double rs_power(const Transceiver& tx, const ChannelSet& ch, const SystemConfig& cfg);
double sinr(int k, const Transceiver& tx, const ChannelSet& ch, const SystemConfig& cfg,
            ChannelSelect which);
double harvested_power(int k, const Transceiver& tx, const ChannelSet& ch,
                       const SystemConfig& cfg, ChannelSelect which);

/// Lemma-style solvability check: rank([h_1 ... h_K]^H G) == K, tested via
/// singular values with relative threshold 1e-8.
bool check_feasibility_rank(const ChannelSet& ch);

/// Evaluates the design at the estimated channels (n_samples == 0) or at the
/// worst of n_samples error draws per user ball, half of them on the surface,
/// always including e = 0. Relative constraint tolerance 1e-4.
VerificationReport verify_design(const Transceiver& tx, const ChannelSet& ch,
                                 const SystemConfig& cfg, int n_samples = 0,
                                 std::mt19937_64* rng = nullptr);

/// Stable 64-bit mix for deriving per-trial seeds from (master, index).
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

}  // namespace swipt::model
