#include "swipt/rankone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "swipt/conic.hpp"

namespace swipt::rankone {

namespace {

using conic::LinExpr;
using conic::Program;
using conic::Solution;
using conic::Status;

// Secular function sum_i lambda_i^2 |c_i|^2 / (nu - lambda_i)^2.
double secular(const Eigen::VectorXd& lam, const Eigen::VectorXd& c2, double nu,
               double skip_above) {
  double s = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] >= skip_above) continue;
    double d = nu - lam[i];
    s += lam[i] * lam[i] * c2[i] / (d * d);
  }
  return s;
}

double quad_value(const Eigen::VectorXd& lam, const Eigen::VectorXd& c2, double nu) {
  // (h+e) has eigen-coordinates nu c_i / (nu - lambda_i)
  double v = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    double d = nu - lam[i];
    v += lam[i] * nu * nu * c2[i] / (d * d);
  }
  return v;
}

}  // namespace

std::pair<double, double> worst_case_linear_bounds(const Eigen::VectorXcd& h_hat,
                                                   double eta,
                                                   const Eigen::VectorXcd& b) {
  double c = std::abs(h_hat.dot(b));  // |h_hat^H b|, Eigen dot conjugates lhs
  double bn = b.norm();
  double lo = std::max(c - eta * bn, 0.0);
  double hi = c + eta * bn;
  return {lo * lo, hi * hi};
}

std::pair<double, double> worst_case_quadratic_bounds(const Eigen::VectorXcd& h_hat,
                                                      double eta,
                                                      const Eigen::MatrixXcd& w) {
  Eigen::MatrixXcd m = w * w.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const int n = static_cast<int>(lam.size());
  double lmax = lam[n - 1];
  if (lmax <= 0.0) return {0.0, 0.0};
  Eigen::VectorXcd c = es.eigenvectors().adjoint() * h_hat;
  Eigen::VectorXd c2 = c.cwiseAbs2();
  double nominal = lam.dot(c2);
  if (eta == 0.0) return {nominal, nominal};

  const double eta2 = eta * eta;
  const double top_tol = lmax * (1.0 - 1e-12);

  // ---- maximum: multiplier nu > lambda_max on the ball surface.
  double top_mass = 0.0;
  for (int i = 0; i < n; ++i)
    if (lam[i] >= top_tol) top_mass += c2[i];
  double limit = secular(lam, c2, lmax, top_tol);  // value as nu -> lmax+
  double wmax;
  // Regular case: the secular function exceeds eta^2 as nu -> lmax+ (it blows
  // up when the top eigenspace carries forcing mass), so a root exists beyond
  // lmax. Hard case otherwise: the extremal eigenspace absorbs the remaining
  // radius directly.
  if (top_mass > 0.0 || limit > eta2) {
    // regular case: secular blows up at lmax, root exists in (lmax, inf)
    double hi = lmax + std::sqrt((lam.cwiseProduct(lam).dot(c2)) / eta2) + lmax + 1.0;
    double lo = lmax;
    for (int it = 0; it < 300; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lmax) {
        lo = std::nextafter(lmax, hi);
        continue;
      }
      if (secular(lam, c2, mid, std::numeric_limits<double>::infinity()) > eta2)
        lo = mid;
      else
        hi = mid;
    }
    double nu = 0.5 * (lo + hi);
    wmax = quad_value(lam, c2, nu);
  } else {
    // hard case: no forcing component in the top eigenspace
    double rest = limit;  // finite
    double tau2 = std::max(eta2 - rest, 0.0);
    double v = lmax * tau2;
    for (int i = 0; i < n; ++i) {
      if (lam[i] >= top_tol) continue;
      double d = lmax - lam[i];
      v += lam[i] * lmax * lmax * c2[i] / (d * d);
    }
    wmax = v;
  }
  wmax = std::max(wmax, nominal);

  // ---- minimum.
  double range_mass = 0.0;  // ||projection of h_hat on range(M)||^2
  for (int i = 0; i < n; ++i)
    if (lam[i] > lmax * 1e-12) range_mass += c2[i];
  double wmin;
  if (range_mass <= eta2) {
    wmin = 0.0;  // the ball reaches the null space of W^H
  } else {
    double lo = -std::sqrt(lam.cwiseProduct(lam).dot(c2) / eta2) - 1.0;
    double hi = 0.0;
    for (int it = 0; it < 300; ++it) {
      double mid = 0.5 * (lo + hi);
      if (secular(lam, c2, mid, std::numeric_limits<double>::infinity()) > eta2)
        hi = mid;  // inside the ball requirement: move away from spectrum
      else
        lo = mid;
    }
    wmin = quad_value(lam, c2, 0.5 * (lo + hi));
  }
  wmin = std::min(wmin, nominal);
  return {wmax, wmin};
}

WorstCaseBounds compute_bounds(const model::ChannelSet& ch, const Eigen::VectorXd& eta,
                               const Eigen::MatrixXcd& w,
                               const std::vector<Eigen::VectorXcd>& f) {
  const int k = static_cast<int>(f.size());
  WorstCaseBounds b;
  b.u.resize(k, k);
  b.v.resize(k, k);
  b.w_bar.resize(k);
  b.w_tilde.resize(k);
  Eigen::MatrixXcd wg = w * ch.first_phase;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      auto [lo, hi] = worst_case_linear_bounds(ch.second_estimated[i], eta[i], wg * f[j]);
      b.u(i, j) = lo;
      b.v(i, j) = hi;
    }
    auto [hi, lo] = worst_case_quadratic_bounds(ch.second_estimated[i], eta[i], w);
    b.w_bar[i] = hi;
    b.w_tilde[i] = lo;
  }
  return b;
}

RescaleSolution rescale_beamformers(const std::vector<Eigen::VectorXcd>& f,
                                    const Eigen::MatrixXcd& w,
                                    const WorstCaseBounds& bounds,
                                    const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg) {
  RescaleSolution out;
  const int k = cfg.k;
  Eigen::MatrixXcd wg = w * ch.first_phase;

  Program p;
  std::vector<int> phi(k), rho(k);
  for (int i = 0; i < k; ++i) phi[i] = p.add_var("phi" + std::to_string(i));
  for (int i = 0; i < k; ++i) rho[i] = p.add_var("rho" + std::to_string(i));

  LinExpr obj{cfg.relay_noise * w.squaredNorm()};
  for (int i = 0; i < k; ++i)
    obj += (f[i].squaredNorm() + (wg * f[i]).squaredNorm()) * LinExpr::variable(phi[i]);
  p.set_objective(obj);

  for (int i = 0; i < k; ++i) {
    p.add_nonneg(LinExpr::variable(phi[i]));
    p.add_nonneg(LinExpr::variable(rho[i]));
    p.add_nonneg(1.0 - LinExpr::variable(rho[i]));

    // worst-case SINR: phi_k u_kk / gamma >= sum_j phi_j v_kj + sr w_bar + s + z
    LinExpr lhs = (bounds.u(i, i) / cfg.sinr_target[i]) * LinExpr::variable(phi[i]);
    for (int j = 0; j < k; ++j)
      if (j != i) lhs -= bounds.v(i, j) * LinExpr::variable(phi[j]);
    lhs -= cfg.relay_noise * bounds.w_bar[i] + cfg.antenna_noise[i];
    if (cfg.circuit_noise[i] > 0.0) {
      int z = p.add_var("z" + std::to_string(i));
      lhs -= LinExpr::variable(z);
      p.hyperbolic_constraint(LinExpr::variable(z), LinExpr::variable(rho[i]),
                              cfg.circuit_noise[i]);
    }
    p.add_nonneg(lhs);

    // worst-case EH: collected lower bound >= psi / (xi (1 - rho))
    if (cfg.eh_target[i] > 0.0) {
      int zt = p.add_var("zt" + std::to_string(i));
      LinExpr collected{cfg.relay_noise * bounds.w_tilde[i] + cfg.antenna_noise[i]};
      for (int j = 0; j < k; ++j) collected += bounds.u(i, j) * LinExpr::variable(phi[j]);
      p.add_nonneg(collected - LinExpr::variable(zt));
      p.hyperbolic_constraint(LinExpr::variable(zt), 1.0 - LinExpr::variable(rho[i]),
                              cfg.eh_target[i] / cfg.eh_efficiency[i]);
    }
  }

  Solution s = p.solve();
  if (s.status != Status::optimal) return out;
  out.feasible = true;
  out.phi.resize(k);
  out.rho.resize(k);
  for (int i = 0; i < k; ++i) {
    out.phi[i] = std::max(0.0, s.x[phi[i]]);
    out.rho[i] = std::clamp(s.x[rho[i]], 0.0, 1.0);
  }
  out.objective = s.objective;
  return out;
}

RescaleSolution rescale_relay(const std::vector<Eigen::VectorXcd>& f,
                              const Eigen::MatrixXcd& w, const WorstCaseBounds& bounds,
                              const model::ChannelSet& ch,
                              const model::SystemConfig& cfg) {
  RescaleSolution out;
  const int k = cfg.k;

  // For fixed phi each user's constraints reduce to an interval on rho_k.
  auto rho_interval = [&](int i, double phi, double& lo, double& hi) -> bool {
    double a = bounds.u(i, i) / cfg.sinr_target[i];
    for (int j = 0; j < k; ++j)
      if (j != i) a -= bounds.v(i, j);
    a -= cfg.relay_noise * bounds.w_bar[i];
    double denom = phi * a - cfg.antenna_noise[i];  // rho * denom >= omega^2
    if (denom <= 0.0) return false;
    lo = cfg.circuit_noise[i] / denom;
    double collected =
        phi * (bounds.u.row(i).sum() + cfg.relay_noise * bounds.w_tilde[i]) +
        cfg.antenna_noise[i];
    double need = cfg.eh_target[i] / cfg.eh_efficiency[i];
    hi = collected > 0.0 ? 1.0 - need / collected : (need > 0.0 ? -1.0 : 1.0);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    return lo <= hi && lo < 1.0 && hi > 0.0;
  };
  auto feasible = [&](double phi) {
    double lo, hi;
    for (int i = 0; i < k; ++i)
      if (!rho_interval(i, phi, lo, hi)) return false;
    return true;
  };

  double base = 0.0;
  for (const auto& fv : f) base += fv.squaredNorm();
  double phi_max = 1e6 * std::max(1.0, base + cfg.antenna_noise.sum() + 1.0);
  if (!feasible(phi_max)) return out;  // outside the search bracket

  double lo = 0.0, hi = phi_max;
  while (hi - lo > 1e-8 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  double phi = hi;

  out.feasible = true;
  out.phi = Eigen::VectorXd::Constant(1, phi);
  out.rho.resize(k);
  for (int i = 0; i < k; ++i) {
    double rlo, rhi;
    rho_interval(i, phi, rlo, rhi);
    out.rho[i] = 0.5 * (rlo + rhi);
  }
  Eigen::MatrixXcd wg = w * ch.first_phase;
  double relay = cfg.relay_noise * w.squaredNorm();
  for (const auto& fv : f) relay += (wg * fv).squaredNorm();
  out.objective = base + phi * relay;
  return out;
}

namespace {

Eigen::VectorXcd lifted_candidate(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& es,
                                  int trial, std::mt19937_64& rng) {
  const int n = static_cast<int>(es.eigenvalues().size());
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  if (trial == 0) return std::sqrt(lam[n - 1]) * es.eigenvectors().col(n - 1);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::VectorXcd wv(n);
  for (int i = 0; i < n; ++i) wv[i] = {g(rng), g(rng)};
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * wv;
}

}  // namespace

RecoveryResult recover_beamformers(const std::vector<Eigen::MatrixXcd>& lifted_f,
                                   const Eigen::MatrixXcd& w,
                                   const model::ChannelSet& ch,
                                   const model::SystemConfig& cfg, bool robust,
                                   int trials, std::mt19937_64& rng) {
  RecoveryResult best;
  best.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd eta =
      robust ? ch.error_radius : Eigen::VectorXd::Zero(cfg.k).eval();
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> eig;
  for (const auto& m : lifted_f) eig.emplace_back(m);

  for (int t = 0; t < trials; ++t) {
    std::vector<Eigen::VectorXcd> f;
    for (int i = 0; i < cfg.k; ++i) f.push_back(lifted_candidate(eig[i], t, rng));
    WorstCaseBounds b = compute_bounds(ch, eta, w, f);
    RescaleSolution rs = rescale_beamformers(f, w, b, ch, cfg);
    if (!rs.feasible) continue;
    ++best.feasible_candidates;
    if (rs.objective < best.objective) {
      best.success = true;
      best.objective = rs.objective;
      best.tx.beamformers.clear();
      for (int i = 0; i < cfg.k; ++i)
        best.tx.beamformers.push_back(std::sqrt(rs.phi[i]) * f[i]);
      best.tx.relay_weight = model::FullMatrix{w};
      best.tx.ps_ratios = rs.rho;
    }
  }
  return best;
}

RecoveryResult recover_relay(const Eigen::MatrixXcd& lifted_w,
                             const std::vector<Eigen::VectorXcd>& f,
                             const model::ChannelSet& ch,
                             const model::SystemConfig& cfg, bool robust, int trials,
                             std::mt19937_64& rng) {
  RecoveryResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const int nr = cfg.nr;
  if (lifted_w.rows() != nr * nr)
    throw std::invalid_argument("lifted relay matrix has wrong side");
  Eigen::VectorXd eta =
      robust ? ch.error_radius : Eigen::VectorXd::Zero(cfg.k).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(lifted_w);

  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd vecw = lifted_candidate(eig, t, rng);
    Eigen::MatrixXcd w = Eigen::Map<Eigen::MatrixXcd>(vecw.data(), nr, nr);
    WorstCaseBounds b = compute_bounds(ch, eta, w, f);
    RescaleSolution rs = rescale_relay(f, w, b, ch, cfg);
    if (!rs.feasible) continue;
    ++best.feasible_candidates;
    if (rs.objective < best.objective) {
      best.success = true;
      best.objective = rs.objective;
      best.tx.beamformers = f;
      best.tx.relay_weight = model::FullMatrix{std::sqrt(rs.phi[0]) * w};
      best.tx.ps_ratios = rs.rho;
    }
  }
  return best;
}

}  // namespace swipt::rankone
