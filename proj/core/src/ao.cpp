#include "swipt/ao.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "lifted.hpp"
#include "swipt/conic.hpp"
#include "swipt/rankone.hpp"

namespace swipt::ao {
namespace {

using conic::CplxAffine;
using conic::LinExpr;
using detail::HermitianVar;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double design_power(const model::Transceiver& tx, const model::ChannelSet& ch,
                    const model::SystemConfig& cfg) {
  return model::bs_power(tx) + model::rs_power(tx, ch, cfg);
}

/// u with u^H Wt u = |h_hat_k^H W G f_j|^2 for Wt = vec(W) vec(W)^H.
VectorXcd lifted_direction(const VectorXcd& h_hat, const VectorXcd& gf, int nr) {
  VectorXcd u(nr * static_cast<int>(gf.size()));
  for (int n = 0; n < gf.size(); ++n)
    for (int m = 0; m < nr; ++m) u[n * nr + m] = h_hat[m] * std::conj(gf[n]);
  return u;
}

/// Block-diagonal h_hat h_hat^H repeated Nr times; <., Wt> = ||h_hat^H W||^2.
MatrixXcd lifted_row_norm(const VectorXcd& h_hat, int nr) {
  MatrixXcd d = MatrixXcd::Zero(nr * nr, nr * nr);
  MatrixXcd hh = h_hat * h_hat.adjoint();
  for (int j = 0; j < nr; ++j) d.block(j * nr, j * nr, nr, nr) = hh;
  return d;
}

void note_solver_issue(SubproblemResult& r, conic::Status st, const char* where) {
  if (st == conic::Status::unbounded || st == conic::Status::numerical_failure)
    r.anomalies.push_back(std::string(where) + ": solver status " + conic::to_string(st));
}

/// Shared tail of both beamformer/splitting subproblems: spectral extraction
/// with randomized recovery as fallback.
void finish_bf_ps(SubproblemResult& r, const std::vector<MatrixXcd>& lifted, VectorXd rho,
                  const MatrixXcd& w, const model::ChannelSet& ch,
                  const model::SystemConfig& cfg, bool robust, const AoOptions& opts,
                  std::mt19937_64& rng) {
  for (const auto& fk : lifted)
    r.max_rank_ratio = std::max(r.max_rank_ratio, detail::rank_one_ratio(fk));
  r.rank_one = r.max_rank_ratio <= opts.rank_tol;
  if (r.rank_one) {
    std::vector<VectorXcd> f;
    f.reserve(lifted.size());
    for (const auto& fk : lifted) f.push_back(detail::principal_factor(fk));
    for (int k = 0; k < rho.size(); ++k) rho[k] = std::clamp(rho[k], 0.0, 1.0);
    r.tx = model::Transceiver{f, model::FullMatrix{w}, rho};
    r.power = design_power(r.tx, ch, cfg);
    r.feasible = true;
    return;
  }
  r.anomalies.push_back("beamformer block not rank-one (ratio " +
                        std::to_string(r.max_rank_ratio) + "), randomized recovery used");
  auto rec = rankone::recover_beamformers(lifted, w, ch, cfg, robust, opts.recovery_trials, rng);
  if (!rec.success) {
    r.anomalies.push_back("randomized beamformer recovery found no feasible candidate");
    r.feasible = false;
    return;
  }
  r.tx = rec.tx;
  r.power = rec.objective;
  r.feasible = true;
}

void finish_relay(SubproblemResult& r, const MatrixXcd& lifted,
                  const std::vector<VectorXcd>& f, const VectorXd& rho,
                  const model::ChannelSet& ch, const model::SystemConfig& cfg, bool robust,
                  const AoOptions& opts, std::mt19937_64& rng) {
  r.max_rank_ratio = detail::rank_one_ratio(lifted);
  r.rank_one = r.max_rank_ratio <= opts.rank_tol;
  if (r.rank_one) {
    VectorXcd vec_w = detail::principal_factor(lifted);
    MatrixXcd w = Eigen::Map<const MatrixXcd>(vec_w.data(), cfg.nr, cfg.nr);
    r.tx = model::Transceiver{f, model::FullMatrix{w}, rho};
    r.power = design_power(r.tx, ch, cfg);
    r.feasible = true;
    return;
  }
  r.anomalies.push_back("relay block not rank-one (ratio " + std::to_string(r.max_rank_ratio) +
                        "), randomized recovery used");
  auto rec = rankone::recover_relay(lifted, f, ch, cfg, robust, opts.recovery_trials, rng);
  if (!rec.success) {
    r.anomalies.push_back("randomized relay recovery found no feasible candidate");
    r.feasible = false;
    return;
  }
  r.tx = rec.tx;
  r.power = rec.objective;
  r.feasible = true;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::power_increase: return "power_increase";
    case Termination::iteration_cap: return "iteration_cap";
    case Termination::infeasible_subproblem: return "infeasible_subproblem";
  }
  return "?";
}

SubproblemResult solve_bf_ps_nominal(const MatrixXcd& w, const model::ChannelSet& ch,
                                     const model::SystemConfig& cfg, const AoOptions& opts,
                                     std::mt19937_64& rng) {
  cfg.validate();
  SubproblemResult r;
  const int kk = cfg.k;
  const MatrixXcd b = w * ch.first_phase;    // W G
  const MatrixXcd m = b.adjoint() * b;       // G^H W^H W G
  conic::Program p;
  std::vector<HermitianVar> fv;
  for (int k = 0; k < kk; ++k) {
    fv.push_back(HermitianVar::create(p, cfg.nt, "F" + std::to_string(k)));
    fv.back().add_psd(p);
  }
  std::vector<int> rho = p.add_vars(kk, "rho");

  LinExpr obj{cfg.relay_noise * w.squaredNorm()};
  for (int k = 0; k < kk; ++k) obj += fv[k].trace() + fv[k].inner(m);
  p.set_objective(obj);

  for (int k = 0; k < kk; ++k) {
    const VectorXcd a = b.adjoint() * ch.second_estimated[k];
    const MatrixXcd aa = a * a.adjoint();
    const double hw2 = (w.adjoint() * ch.second_estimated[k]).squaredNorm();
    const double noise = cfg.relay_noise * hw2 + cfg.antenna_noise[k];

    LinExpr sinr_row = (1.0 / cfg.sinr_target[k]) * fv[k].inner(aa) - LinExpr{noise};
    for (int j = 0; j < kk; ++j)
      if (j != k) sinr_row -= fv[j].inner(aa);
    if (cfg.circuit_noise[k] > 0.0) {
      int z = p.add_var("z" + std::to_string(k));
      sinr_row -= LinExpr::variable(z);
      p.hyperbolic_constraint(LinExpr::variable(z), LinExpr::variable(rho[k]),
                              cfg.circuit_noise[k]);
    }
    p.add_nonneg(sinr_row);

    if (cfg.eh_target[k] > 0.0) {
      LinExpr collected{noise};
      for (int j = 0; j < kk; ++j) collected += fv[j].inner(aa);
      int zt = p.add_var("zt" + std::to_string(k));
      p.add_nonneg(collected - LinExpr::variable(zt));
      p.hyperbolic_constraint(LinExpr::variable(zt), LinExpr{1.0} - LinExpr::variable(rho[k]),
                              cfg.eh_target[k] / cfg.eh_efficiency[k]);
    }
    p.add_nonneg(LinExpr::variable(rho[k]));
    p.add_nonneg(LinExpr{1.0} - LinExpr::variable(rho[k]));
  }

  auto sol = p.solve();
  note_solver_issue(r, sol.status, "bf/ps nominal");
  if (sol.status != conic::Status::optimal) return r;
  r.sdr_objective = sol.objective;

  std::vector<MatrixXcd> lifted;
  lifted.reserve(kk);
  for (int k = 0; k < kk; ++k) lifted.push_back(fv[k].value(sol));
  VectorXd rho_val(kk);
  for (int k = 0; k < kk; ++k) rho_val[k] = sol.x[rho[k]];
  finish_bf_ps(r, lifted, rho_val, w, ch, cfg, /*robust=*/false, opts, rng);
  return r;
}

SubproblemResult solve_relay_nominal(const std::vector<VectorXcd>& f, const VectorXd& rho,
                                     const model::ChannelSet& ch,
                                     const model::SystemConfig& cfg, const AoOptions& opts,
                                     std::mt19937_64& rng) {
  cfg.validate();
  SubproblemResult r;
  const int kk = cfg.k, nr = cfg.nr, n2 = nr * nr;

  // Fixed splitting ratios must leave both constraint families definable.
  for (int k = 0; k < kk; ++k) {
    if (cfg.circuit_noise[k] > 0.0 && rho[k] <= 0.0) return r;
    if (cfg.eh_target[k] > 0.0 && rho[k] >= 1.0) return r;
  }

  conic::Program p;
  HermitianVar wv = HermitianVar::create(p, n2, "Wt");
  wv.add_psd(p);

  double fixed = 0.0;
  for (const auto& fk : f) fixed += fk.squaredNorm();
  LinExpr obj{fixed};
  obj += cfg.relay_noise * wv.trace();
  for (int k = 0; k < kk; ++k) {
    const VectorXcd gf = ch.first_phase * f[k];
    MatrixXcd amp = MatrixXcd::Zero(n2, n2);  // conj(Gf)(Gf)^T kron I
    for (int s = 0; s < nr; ++s)
      for (int t = 0; t < nr; ++t)
        for (int a = 0; a < nr; ++a)
          amp(s * nr + a, t * nr + a) = std::conj(gf[s]) * gf[t];
    obj += wv.inner(amp);
  }
  p.set_objective(obj);

  for (int k = 0; k < kk; ++k) {
    const VectorXcd& hh = ch.second_estimated[k];
    const MatrixXcd d = lifted_row_norm(hh, nr);
    std::vector<MatrixXcd> sig(kk);
    for (int j = 0; j < kk; ++j) {
      const VectorXcd u = lifted_direction(hh, ch.first_phase * f[j], nr);
      sig[j] = u * u.adjoint();
    }
    double sinr_const = cfg.antenna_noise[k];
    if (cfg.circuit_noise[k] > 0.0) sinr_const += cfg.circuit_noise[k] / rho[k];
    LinExpr sinr_row = (1.0 / cfg.sinr_target[k]) * wv.inner(sig[k]) -
                       cfg.relay_noise * wv.inner(d) - LinExpr{sinr_const};
    for (int j = 0; j < kk; ++j)
      if (j != k) sinr_row -= wv.inner(sig[j]);
    p.add_nonneg(sinr_row);

    if (cfg.eh_target[k] > 0.0) {
      LinExpr eh_row{cfg.antenna_noise[k] -
                     cfg.eh_target[k] / (cfg.eh_efficiency[k] * (1.0 - rho[k]))};
      for (int j = 0; j < kk; ++j) eh_row += wv.inner(sig[j]);
      eh_row += cfg.relay_noise * wv.inner(d);
      p.add_nonneg(eh_row);
    }
  }

  auto sol = p.solve();
  note_solver_issue(r, sol.status, "relay nominal");
  if (sol.status != conic::Status::optimal) return r;
  r.sdr_objective = sol.objective;
  finish_relay(r, wv.value(sol), f, rho, ch, cfg, /*robust=*/false, opts, rng);
  return r;
}

SubproblemResult solve_bf_ps_robust(const MatrixXcd& w, const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg, const AoOptions& opts,
                                    std::mt19937_64& rng) {
  cfg.validate();
  SubproblemResult r;
  const int kk = cfg.k, nr = cfg.nr;
  const MatrixXcd b = w * ch.first_phase;  // W G
  const MatrixXcd m = b.adjoint() * b;
  const MatrixXcd ww = w * w.adjoint();

  conic::Program p;
  std::vector<HermitianVar> fv;
  for (int k = 0; k < kk; ++k) {
    fv.push_back(HermitianVar::create(p, cfg.nt, "F" + std::to_string(k)));
    fv.back().add_psd(p);
  }
  std::vector<int> rho = p.add_vars(kk, "rho");

  LinExpr obj{cfg.relay_noise * w.squaredNorm()};
  for (int k = 0; k < kk; ++k) obj += fv[k].trace() + fv[k].inner(m);
  p.set_objective(obj);

  // Lifted signal quadratic forms as affine matrix entries: Q_j = W G F_j G^H W^H.
  std::vector<std::vector<std::vector<CplxAffine>>> q(kk);
  for (int j = 0; j < kk; ++j) {
    q[j].assign(nr, std::vector<CplxAffine>(nr));
    for (int mm = 0; mm < nr; ++mm)
      for (int nn = 0; nn < nr; ++nn)
        q[j][mm][nn] = fv[j].form(b.row(mm).adjoint(), b.row(nn).adjoint());
  }

  for (int k = 0; k < kk; ++k) {
    const VectorXcd& hh = ch.second_estimated[k];
    const double eta = ch.error_radius[k];
    const VectorXcd a = b.adjoint() * hh;
    const MatrixXcd aa = a * a.adjoint();
    const double hw2 = (w.adjoint() * hh).squaredNorm();

    // rho-coupled noise terms: omega^2 p with p rho >= 1, psi/xi q with
    // q (1 - rho) >= 1.
    LinExpr circuit{0.0};
    if (cfg.circuit_noise[k] > 0.0) {
      int pv = p.add_var("p" + std::to_string(k));
      p.hyperbolic_constraint(LinExpr::variable(pv), LinExpr::variable(rho[k]), 1.0);
      circuit = cfg.circuit_noise[k] * LinExpr::variable(pv);
    }
    LinExpr harvest_req{0.0};
    if (cfg.eh_target[k] > 0.0) {
      int qv = p.add_var("q" + std::to_string(k));
      p.hyperbolic_constraint(LinExpr::variable(qv),
                              LinExpr{1.0} - LinExpr::variable(rho[k]), 1.0);
      harvest_req = (cfg.eh_target[k] / cfg.eh_efficiency[k]) * LinExpr::variable(qv);
    }
    p.add_nonneg(LinExpr::variable(rho[k]));
    p.add_nonneg(LinExpr{1.0} - LinExpr::variable(rho[k]));

    // Scalar corner values h_hat^H U h_hat and h_hat^H V h_hat.
    LinExpr corner_u = (1.0 / cfg.sinr_target[k]) * fv[k].inner(aa) -
                       LinExpr{cfg.relay_noise * hw2};
    LinExpr corner_v{cfg.relay_noise * hw2};
    for (int j = 0; j < kk; ++j) {
      if (j != k) corner_u -= fv[j].inner(aa);
      corner_v += fv[j].inner(aa);
    }

    if (eta <= 0.0) {
      p.add_nonneg(corner_u - LinExpr{cfg.antenna_noise[k]} - circuit);
      if (cfg.eh_target[k] > 0.0)
        p.add_nonneg(corner_v + LinExpr{cfg.antenna_noise[k]} - harvest_req);
      continue;
    }

    int lam = p.add_var("lam" + std::to_string(k));
    p.add_nonneg(LinExpr::variable(lam));
    std::vector<std::vector<CplxAffine>> lmi(nr + 1, std::vector<CplxAffine>(nr + 1));
    for (int mm = 0; mm < nr; ++mm) {
      for (int nn = 0; nn < nr; ++nn) {
        CplxAffine e = (1.0 / cfg.sinr_target[k]) * q[k][mm][nn];
        for (int j = 0; j < kk; ++j)
          if (j != k) e -= q[j][mm][nn];
        e -= CplxAffine{cfg.relay_noise * ww(mm, nn)};
        if (mm == nn) e += CplxAffine{LinExpr::variable(lam)};
        lmi[mm][nn] = e;
      }
      CplxAffine edge;
      for (int nn = 0; nn < nr; ++nn) {
        CplxAffine e = (1.0 / cfg.sinr_target[k]) * q[k][mm][nn];
        for (int j = 0; j < kk; ++j)
          if (j != k) e -= q[j][mm][nn];
        e -= CplxAffine{cfg.relay_noise * ww(mm, nn)};
        edge += e * hh[nn];
      }
      lmi[mm][nr] = edge;
      lmi[nr][mm] = edge.conj();
    }
    lmi[nr][nr] = CplxAffine{corner_u - LinExpr{cfg.antenna_noise[k]} - circuit -
                             eta * eta * LinExpr::variable(lam)};
    p.add_psd_hermitian(lmi);

    if (cfg.eh_target[k] > 0.0) {
      int mu = p.add_var("mu" + std::to_string(k));
      p.add_nonneg(LinExpr::variable(mu));
      std::vector<std::vector<CplxAffine>> lmi2(nr + 1, std::vector<CplxAffine>(nr + 1));
      for (int mm = 0; mm < nr; ++mm) {
        for (int nn = 0; nn < nr; ++nn) {
          CplxAffine e{std::complex<double>(cfg.relay_noise) * ww(mm, nn)};
          for (int j = 0; j < kk; ++j) e += q[j][mm][nn];
          if (mm == nn) e += CplxAffine{LinExpr::variable(mu)};
          lmi2[mm][nn] = e;
        }
        CplxAffine edge;
        for (int nn = 0; nn < nr; ++nn) {
          CplxAffine e{std::complex<double>(cfg.relay_noise) * ww(mm, nn)};
          for (int j = 0; j < kk; ++j) e += q[j][mm][nn];
          edge += e * hh[nn];
        }
        lmi2[mm][nr] = edge;
        lmi2[nr][mm] = edge.conj();
      }
      lmi2[nr][nr] = CplxAffine{corner_v + LinExpr{cfg.antenna_noise[k]} - harvest_req -
                                eta * eta * LinExpr::variable(mu)};
      p.add_psd_hermitian(lmi2);
    }
  }

  auto sol = p.solve();
  note_solver_issue(r, sol.status, "bf/ps robust");
  if (sol.status != conic::Status::optimal) return r;
  r.sdr_objective = sol.objective;

  std::vector<MatrixXcd> lifted;
  lifted.reserve(kk);
  for (int k = 0; k < kk; ++k) lifted.push_back(fv[k].value(sol));
  VectorXd rho_val(kk);
  for (int k = 0; k < kk; ++k) rho_val[k] = sol.x[rho[k]];
  finish_bf_ps(r, lifted, rho_val, w, ch, cfg, /*robust=*/true, opts, rng);
  return r;
}

SubproblemResult solve_relay_robust(const std::vector<VectorXcd>& f, const VectorXd& rho,
                                    const model::ChannelSet& ch,
                                    const model::SystemConfig& cfg, const AoOptions& opts,
                                    std::mt19937_64& rng) {
  cfg.validate();
  SubproblemResult r;
  const int kk = cfg.k, nr = cfg.nr, n2 = nr * nr;

  for (int k = 0; k < kk; ++k) {
    if (cfg.circuit_noise[k] > 0.0 && rho[k] <= 0.0) return r;
    if (cfg.eh_target[k] > 0.0 && rho[k] >= 1.0) return r;
  }

  conic::Program p;
  HermitianVar wv = HermitianVar::create(p, n2, "Wt");
  wv.add_psd(p);

  double fixed = 0.0;
  for (const auto& fk : f) fixed += fk.squaredNorm();
  LinExpr obj{fixed};
  obj += cfg.relay_noise * wv.trace();
  for (int k = 0; k < kk; ++k) {
    const VectorXcd gf = ch.first_phase * f[k];
    MatrixXcd amp = MatrixXcd::Zero(n2, n2);
    for (int s = 0; s < nr; ++s)
      for (int t = 0; t < nr; ++t)
        for (int a = 0; a < nr; ++a)
          amp(s * nr + a, t * nr + a) = std::conj(gf[s]) * gf[t];
    obj += wv.inner(amp);
  }
  p.set_objective(obj);

  // Channel-side congruences of the lifted relay matrix: wb[j](a,b) is an
  // affine expression picking out sum_{s,t} (Gf_j)_s conj((Gf_j)_t)
  // Wt[s nr + a, t nr + b]; rn(a,b) sums the diagonal blocks.
  std::vector<std::vector<std::vector<CplxAffine>>> wb(kk);
  for (int j = 0; j < kk; ++j) {
    const VectorXcd gf = ch.first_phase * f[j];
    wb[j].assign(nr, std::vector<CplxAffine>(nr));
    for (int a = 0; a < nr; ++a)
      for (int bb = 0; bb < nr; ++bb) {
        CplxAffine e;
        for (int s = 0; s < nr; ++s)
          for (int t = 0; t < nr; ++t) {
            std::complex<double> c = gf[s] * std::conj(gf[t]);
            if (c != std::complex<double>(0.0, 0.0))
              e += c * wv.entry(s * nr + a, t * nr + bb);
          }
        wb[j][a][bb] = e;
      }
  }
  std::vector<std::vector<CplxAffine>> rn(nr, std::vector<CplxAffine>(nr));
  for (int a = 0; a < nr; ++a)
    for (int bb = 0; bb < nr; ++bb) {
      CplxAffine e;
      for (int j = 0; j < nr; ++j) e += wv.entry(j * nr + a, j * nr + bb);
      rn[a][bb] = e;
    }

  for (int k = 0; k < kk; ++k) {
    const VectorXcd& hh = ch.second_estimated[k];
    const double eta = ch.error_radius[k];
    const MatrixXcd d = lifted_row_norm(hh, nr);
    std::vector<MatrixXcd> sig(kk);
    for (int j = 0; j < kk; ++j) {
      const VectorXcd u = lifted_direction(hh, ch.first_phase * f[j], nr);
      sig[j] = u * u.adjoint();
    }
    double sinr_const = cfg.antenna_noise[k];
    if (cfg.circuit_noise[k] > 0.0) sinr_const += cfg.circuit_noise[k] / rho[k];
    LinExpr corner_u = (1.0 / cfg.sinr_target[k]) * wv.inner(sig[k]) -
                       cfg.relay_noise * wv.inner(d);
    LinExpr corner_v = cfg.relay_noise * wv.inner(d);
    for (int j = 0; j < kk; ++j) {
      if (j != k) corner_u -= wv.inner(sig[j]);
      corner_v += wv.inner(sig[j]);
    }
    const double eh_req =
        cfg.eh_target[k] > 0.0
            ? cfg.eh_target[k] / (cfg.eh_efficiency[k] * (1.0 - rho[k]))
            : 0.0;

    if (eta <= 0.0) {
      p.add_nonneg(corner_u - LinExpr{sinr_const});
      if (cfg.eh_target[k] > 0.0)
        p.add_nonneg(corner_v + LinExpr{cfg.antenna_noise[k] - eh_req});
      continue;
    }

    int lam = p.add_var("lam" + std::to_string(k));
    p.add_nonneg(LinExpr::variable(lam));
    std::vector<std::vector<CplxAffine>> lmi(nr + 1, std::vector<CplxAffine>(nr + 1));
    auto u_entry = [&](int a, int bb) {
      CplxAffine e = (1.0 / cfg.sinr_target[k]) * wb[k][a][bb];
      for (int j = 0; j < kk; ++j)
        if (j != k) e -= wb[j][a][bb];
      e -= std::complex<double>(cfg.relay_noise) * rn[a][bb];
      return e;
    };
    for (int a = 0; a < nr; ++a) {
      for (int bb = 0; bb < nr; ++bb) {
        lmi[a][bb] = u_entry(a, bb);
        if (a == bb) lmi[a][bb] += CplxAffine{LinExpr::variable(lam)};
      }
      CplxAffine edge;
      for (int bb = 0; bb < nr; ++bb) edge += u_entry(a, bb) * hh[bb];
      lmi[a][nr] = edge;
      lmi[nr][a] = edge.conj();
    }
    lmi[nr][nr] =
        CplxAffine{corner_u - LinExpr{sinr_const} - eta * eta * LinExpr::variable(lam)};
    p.add_psd_hermitian(lmi);

    if (cfg.eh_target[k] > 0.0) {
      int mu = p.add_var("mu" + std::to_string(k));
      p.add_nonneg(LinExpr::variable(mu));
      auto v_entry = [&](int a, int bb) {
        CplxAffine e = std::complex<double>(cfg.relay_noise) * rn[a][bb];
        for (int j = 0; j < kk; ++j) e += wb[j][a][bb];
        return e;
      };
      std::vector<std::vector<CplxAffine>> lmi2(nr + 1, std::vector<CplxAffine>(nr + 1));
      for (int a = 0; a < nr; ++a) {
        for (int bb = 0; bb < nr; ++bb) {
          lmi2[a][bb] = v_entry(a, bb);
          if (a == bb) lmi2[a][bb] += CplxAffine{LinExpr::variable(mu)};
        }
        CplxAffine edge;
        for (int bb = 0; bb < nr; ++bb) edge += v_entry(a, bb) * hh[bb];
        lmi2[a][nr] = edge;
        lmi2[nr][a] = edge.conj();
      }
      lmi2[nr][nr] = CplxAffine{corner_v + LinExpr{cfg.antenna_noise[k] - eh_req} -
                                eta * eta * LinExpr::variable(mu)};
      p.add_psd_hermitian(lmi2);
    }
  }

  auto sol = p.solve();
  note_solver_issue(r, sol.status, "relay robust");
  if (sol.status != conic::Status::optimal) return r;
  r.sdr_objective = sol.objective;
  finish_relay(r, wv.value(sol), f, rho, ch, cfg, /*robust=*/true, opts, rng);
  return r;
}

DesignOutcome design_ao(const model::ChannelSet& ch, const model::SystemConfig& cfg,
                        const MatrixXcd& w_init, bool robust, const AoOptions& opts,
                        std::mt19937_64& rng) {
  DesignOutcome out;
  MatrixXcd w = w_init;
  double prev = std::numeric_limits<double>::infinity();

  auto absorb = [&out](const SubproblemResult& s) {
    for (const auto& a : s.anomalies) out.anomalies.push_back(a);
  };

  for (int it = 0; it < opts.max_iters; ++it) {
    out.iterations = it + 1;
    SubproblemResult bf = robust ? solve_bf_ps_robust(w, ch, cfg, opts, rng)
                                 : solve_bf_ps_nominal(w, ch, cfg, opts, rng);
    absorb(bf);
    if (!bf.feasible) {
      out.termination = Termination::infeasible_subproblem;
      return out;
    }
    if (bf.power > prev) {
      out.termination = Termination::power_increase;
      return out;
    }
    out.feasible = true;
    out.tx = bf.tx;
    out.power = bf.power;

    SubproblemResult rel =
        robust ? solve_relay_robust(bf.tx.beamformers, bf.tx.ps_ratios, ch, cfg, opts, rng)
               : solve_relay_nominal(bf.tx.beamformers, bf.tx.ps_ratios, ch, cfg, opts, rng);
    absorb(rel);
    if (!rel.feasible) {
      out.termination = Termination::infeasible_subproblem;
      out.power_trace.push_back(out.power);
      return out;
    }
    if (rel.power > bf.power) {
      out.termination = Termination::power_increase;
      out.power_trace.push_back(out.power);
      return out;
    }
    out.tx = rel.tx;
    out.power = rel.power;
    out.power_trace.push_back(out.power);
    w = rel.tx.relay_matrix();

    if (prev - out.power < opts.delta) {
      out.termination = Termination::tolerance;
      return out;
    }
    prev = out.power;
  }
  out.termination = Termination::iteration_cap;
  return out;
}

MatrixXcd identity_init(int nr) { return MatrixXcd::Identity(nr, nr); }

MatrixXcd random_init(int nr, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  MatrixXcd w(nr, nr);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nr; ++j) w(i, j) = std::complex<double>(g(rng), g(rng));
  return w;
}

}  // namespace swipt::ao
