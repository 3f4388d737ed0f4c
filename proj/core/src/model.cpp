#include "swipt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace swipt::model {

namespace {

constexpr double kConstraintTol = 1e-4;

// SINR and harvested power evaluated at an explicit second-phase channel.
double sinr_at(int k, const Transceiver& tx, const Eigen::MatrixXcd& wg,
               const Eigen::MatrixXcd& w, const Eigen::VectorXcd& h,
               const SystemConfig& cfg) {
  double rho = tx.ps_ratios[k];
  Eigen::RowVectorXcd hw = h.adjoint() * w;
  Eigen::RowVectorXcd hwg = h.adjoint() * wg;
  double signal = 0.0, interference = 0.0;
  for (int j = 0; j < cfg.k; ++j) {
    double p = std::norm(std::complex<double>((hwg * tx.beamformers[j]).value()));
    if (j == k)
      signal = p;
    else
      interference += p;
  }
  double num = rho * signal;
  double den = rho * (interference + cfg.relay_noise * hw.squaredNorm() +
                      cfg.antenna_noise[k]) +
               cfg.circuit_noise[k];
  if (den <= 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return num / den;
}

double harvested_at(int k, const Transceiver& tx, const Eigen::MatrixXcd& wg,
                    const Eigen::MatrixXcd& w, const Eigen::VectorXcd& h,
                    const SystemConfig& cfg) {
  double rho = tx.ps_ratios[k];
  Eigen::RowVectorXcd hw = h.adjoint() * w;
  Eigen::RowVectorXcd hwg = h.adjoint() * wg;
  double collected = cfg.antenna_noise[k] + cfg.relay_noise * hw.squaredNorm();
  for (int j = 0; j < cfg.k; ++j)
    collected += std::norm(std::complex<double>((hwg * tx.beamformers[j]).value()));
  return cfg.eh_efficiency[k] * (1.0 - rho) * collected;
}

}  // namespace

void SystemConfig::validate() const {
  if (nt <= 0 || nr <= 0 || k <= 0)
    throw std::invalid_argument("antenna and user counts must be positive");
  if (k > std::min(nt, nr))
    throw std::invalid_argument("K must not exceed min(Nt, Nr)");
  auto check_size = [&](const Eigen::VectorXd& v, const char* what) {
    if (v.size() != k) throw std::invalid_argument(std::string(what) + ": wrong length");
  };
  check_size(antenna_noise, "antenna_noise");
  check_size(circuit_noise, "circuit_noise");
  check_size(eh_efficiency, "eh_efficiency");
  check_size(sinr_target, "sinr_target");
  check_size(eh_target, "eh_target");
  if (relay_noise < 0 || antenna_noise.minCoeff() < 0 || circuit_noise.minCoeff() < 0 ||
      eh_target.minCoeff() < 0)
    throw std::invalid_argument("powers must be nonnegative");
  if (eh_efficiency.minCoeff() <= 0 || eh_efficiency.maxCoeff() > 1.0)
    throw std::invalid_argument("eh efficiency must lie in (0, 1]");
  if (sinr_target.minCoeff() <= 0)
    throw std::invalid_argument("SINR targets must be positive");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

RawConfig parse_raw_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  RawConfig raw;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("nt", raw.nt);
  get("nr", raw.nr);
  get("k", raw.k);
  get("sigma_r_dbm", raw.sigma_r_dbm);
  get("sigma_dbm", raw.sigma_dbm);
  get("omega_dbm", raw.omega_dbm);
  get("xi", raw.xi);
  get("gamma_db", raw.gamma_db);
  get("psi_dbm", raw.psi_dbm);
  get("eta", raw.eta);
  get("seed", raw.seed);
  return raw;
}

SystemConfig to_linear_config(const RawConfig& raw) {
  SystemConfig cfg;
  cfg.nt = raw.nt;
  cfg.nr = raw.nr;
  cfg.k = raw.k;
  cfg.relay_noise = dbm_to_mw(raw.sigma_r_dbm);
  cfg.antenna_noise = Eigen::VectorXd::Constant(raw.k, dbm_to_mw(raw.sigma_dbm));
  cfg.circuit_noise = Eigen::VectorXd::Constant(raw.k, dbm_to_mw(raw.omega_dbm));
  cfg.eh_efficiency = Eigen::VectorXd::Constant(raw.k, raw.xi);
  cfg.sinr_target = Eigen::VectorXd::Constant(raw.k, db_to_linear(raw.gamma_db));
  cfg.eh_target = Eigen::VectorXd::Constant(raw.k, dbm_to_mw(raw.psi_dbm));
  cfg.validate();
  return cfg;
}

Eigen::MatrixXcd permutation_matrix(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  std::vector<bool> seen(n, false);
  for (int i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n || seen[perm[i]])
      throw std::invalid_argument("invalid permutation");
    seen[perm[i]] = true;
    t(perm[i], i) = 1.0;
  }
  return t;
}

Eigen::MatrixXcd Transceiver::relay_matrix() const {
  if (const auto* full = std::get_if<FullMatrix>(&relay_weight)) return full->w;
  const auto& sp = std::get<ScaledPermutation>(relay_weight);
  return std::sqrt(sp.power_scale) * permutation_matrix(sp.permutation);
}

ChannelSet sample_channels(const SystemConfig& cfg, const Eigen::VectorXd& eta,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  ChannelSet ch;
  ch.first_phase.resize(cfg.nr, cfg.nt);
  for (int i = 0; i < cfg.nr; ++i)
    for (int j = 0; j < cfg.nt; ++j) ch.first_phase(i, j) = {g(rng), g(rng)};
  ch.error_radius = eta;
  for (int k = 0; k < cfg.k; ++k) {
    Eigen::VectorXcd h(cfg.nr);
    for (int i = 0; i < cfg.nr; ++i) h[i] = {g(rng), g(rng)};
    Eigen::VectorXcd e = sample_error_ball(cfg.nr, eta[k], rng);
    ch.second_true.push_back(h);
    ch.second_estimated.push_back(h - e);
  }
  return ch;
}

Eigen::VectorXcd sample_error_ball(int dim, double radius, std::mt19937_64& rng,
                                   bool surface) {
  if (radius == 0.0) return Eigen::VectorXcd::Zero(dim);
  std::normal_distribution<double> g;
  Eigen::VectorXcd dir(dim);
  for (int i = 0; i < dim; ++i) dir[i] = {g(rng), g(rng)};
  double n = dir.norm();
  if (n == 0.0) return Eigen::VectorXcd::Zero(dim);
  double r = radius;
  if (!surface) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    r *= std::pow(1.0 - u(rng), 1.0 / (2.0 * dim));  // uniform over the ball
  }
  return (r / n) * dir;
}

double bs_power(const Transceiver& tx) {
  double p = 0.0;
  for (const auto& f : tx.beamformers) p += f.squaredNorm();
  return p;
}

double rs_power(const Transceiver& tx, const ChannelSet& ch, const SystemConfig& cfg) {
  Eigen::MatrixXcd w = tx.relay_matrix();
  if (w.rows() != ch.first_phase.rows())
    throw std::invalid_argument("relay weight dimension mismatch");
  Eigen::MatrixXcd wg = w * ch.first_phase;
  double p = cfg.relay_noise * w.squaredNorm();
  for (const auto& f : tx.beamformers) p += (wg * f).squaredNorm();
  return p;
}

double sinr(int k, const Transceiver& tx, const ChannelSet& ch, const SystemConfig& cfg,
            ChannelSelect which) {
  double rho = tx.ps_ratios[k];
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho outside [0,1]");
  Eigen::MatrixXcd w = tx.relay_matrix();
  const Eigen::VectorXcd& h =
      which == ChannelSelect::true_channel ? ch.second_true[k] : ch.second_estimated[k];
  return sinr_at(k, tx, w * ch.first_phase, w, h, cfg);
}

double harvested_power(int k, const Transceiver& tx, const ChannelSet& ch,
                       const SystemConfig& cfg, ChannelSelect which) {
  double rho = tx.ps_ratios[k];
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho outside [0,1]");
  Eigen::MatrixXcd w = tx.relay_matrix();
  const Eigen::VectorXcd& h =
      which == ChannelSelect::true_channel ? ch.second_true[k] : ch.second_estimated[k];
  return harvested_at(k, tx, w * ch.first_phase, w, h, cfg);
}

bool check_feasibility_rank(const ChannelSet& ch) {
  const int k = static_cast<int>(ch.second_estimated.size());
  Eigen::MatrixXcd hh(k, ch.first_phase.rows());
  for (int i = 0; i < k; ++i) hh.row(i) = ch.second_estimated[i].adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(hh * ch.first_phase);
  const auto& sv = svd.singularValues();
  if (sv.size() < k || sv[0] == 0.0) return false;
  return sv[k - 1] / sv[0] > 1e-8;
}

VerificationReport verify_design(const Transceiver& tx, const ChannelSet& ch,
                                 const SystemConfig& cfg, int n_samples,
                                 std::mt19937_64* rng) {
  VerificationReport rep;
  rep.bs_power = bs_power(tx);
  rep.rs_power = rs_power(tx, ch, cfg);
  rep.total_power = rep.bs_power + rep.rs_power;
  rep.sinr.resize(cfg.k);
  rep.harvested.resize(cfg.k);

  Eigen::MatrixXcd w = tx.relay_matrix();
  Eigen::MatrixXcd wg = w * ch.first_phase;

  double worst = std::numeric_limits<double>::infinity();
  bool met = true;
  for (int k = 0; k < cfg.k; ++k) {
    double worst_sinr = std::numeric_limits<double>::infinity();
    double worst_eh = std::numeric_limits<double>::infinity();
    auto eval_at = [&](const Eigen::VectorXcd& h) {
      worst_sinr = std::min(worst_sinr, sinr_at(k, tx, wg, w, h, cfg));
      worst_eh = std::min(worst_eh, harvested_at(k, tx, wg, w, h, cfg));
    };
    eval_at(ch.second_estimated[k]);
    if (n_samples > 0 && rng != nullptr) {
      for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXcd e =
            sample_error_ball(cfg.nr, ch.error_radius[k], *rng, /*surface=*/s % 2 == 0);
        eval_at(ch.second_estimated[k] + e);
      }
    }
    rep.sinr[k] = worst_sinr;
    rep.harvested[k] = worst_eh;
    double sinr_slack = (worst_sinr - cfg.sinr_target[k]) / cfg.sinr_target[k];
    double eh_slack = cfg.eh_target[k] > 0
                          ? (worst_eh - cfg.eh_target[k]) / cfg.eh_target[k]
                          : 0.0;
    worst = std::min({worst, sinr_slack, eh_slack});
    if (sinr_slack < -kConstraintTol || eh_slack < -kConstraintTol) met = false;
  }
  rep.worst_violation = worst;
  rep.all_constraints_met = met;
  return rep;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace swipt::model
