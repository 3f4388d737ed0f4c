#include "swipt/sr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lifted.hpp"
#include "swipt/ao.hpp"
#include "swipt/conic.hpp"
#include "swipt/rankone.hpp"

namespace swipt::sr {
namespace {

using conic::CplxAffine;
using conic::LinExpr;
using detail::HermitianVar;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// G^H T^H h_hat_k: the effective downlink direction seen by user k, so that
/// h_hat_k^H T G f_j = a_k^H f_j.
VectorXcd effective_direction(int k, const std::vector<int>& perm,
                              const model::ChannelSet& ch) {
  const MatrixXcd t = model::permutation_matrix(perm);
  return (ch.second_estimated[k].adjoint() * t * ch.first_phase).adjoint();
}

/// Exact latent power sum ||f_k||^2 + (sum ||G f_k||^2 + sigma_r^2 Nr) / phi.
double latent_power(const CccpPoint& r, const model::ChannelSet& ch,
                    const model::SystemConfig& cfg) {
  double bs = 0.0, relay = 0.0;
  for (const auto& fk : r.f) {
    bs += fk.squaredNorm();
    relay += (ch.first_phase * fk).squaredNorm();
  }
  return bs + (relay + cfg.relay_noise * cfg.nr) / r.phi;
}

LinExpr affine_to_expr(const AffineForm& a, const std::vector<int>& pv,
                       const std::vector<int>& qv, int phiv,
                       const std::vector<std::vector<int>>& fre,
                       const std::vector<std::vector<int>>& fim) {
  LinExpr e{a.c0};
  for (int k = 0; k < a.dp.size(); ++k)
    if (a.dp[k] != 0.0) e += a.dp[k] * LinExpr::variable(pv[k]);
  for (int k = 0; k < a.dq.size(); ++k)
    if (a.dq[k] != 0.0 && !qv.empty()) e += a.dq[k] * LinExpr::variable(qv[k]);
  if (a.dphi != 0.0) e += a.dphi * LinExpr::variable(phiv);
  for (size_t j = 0; j < a.df.size(); ++j)
    for (int m = 0; m < a.df[j].size(); ++m) {
      e += 2.0 * a.df[j][m].real() * LinExpr::variable(fre[j][m]);
      e += 2.0 * a.df[j][m].imag() * LinExpr::variable(fim[j][m]);
    }
  return e;
}

struct InitialPoint {
  bool feasible = false;
  CccpPoint r;
  double power = 0.0;
  std::vector<std::string> anomalies;
};

/// Solves the convex (f, rho) problem with the relay fixed to sqrt(beta) T,
/// retrying beta in {beta0, 4, 16} until feasible.
InitialPoint initial_cccp_point(const std::vector<int>& perm, const model::ChannelSet& ch,
                                const model::SystemConfig& cfg, const SrOptions& opts,
                                std::mt19937_64& rng) {
  InitialPoint out;
  const MatrixXcd t = model::permutation_matrix(perm);
  ao::AoOptions aopts;
  aopts.rank_tol = opts.rank_tol;
  aopts.recovery_trials = opts.recovery_trials;
  // The preferred scale is tried first, then an escalating geometric ladder:
  // weak channels want large amplification, and starting the descent several
  // orders of magnitude below the right scale makes it crawl. The ladder stops
  // once a further increase no longer pays.
  double best_beta = 0.0;
  for (int j = 0; j <= 9; ++j) {
    const double beta = j == 0 ? opts.beta0 : opts.beta0 * std::pow(4.0, j);
    auto sub = ao::solve_bf_ps_nominal(std::sqrt(beta) * t, ch, cfg, aopts, rng);
    for (const auto& a : sub.anomalies) out.anomalies.push_back(a);
    if (!sub.feasible) {
      if (out.feasible) break;
      continue;
    }
    CccpPoint r;
    r.f = sub.tx.beamformers;
    r.phi = 1.0 / beta;
    r.p.resize(cfg.k);
    r.q.resize(cfg.k);
    for (int k = 0; k < cfg.k; ++k) {
      const double rho = std::clamp(sub.tx.ps_ratios[k], 1e-6, 1.0 - 1e-6);
      r.p[k] = 1.0 / rho;
      r.q[k] = 1.0 / (1.0 - rho);
    }
    const double power = latent_power(r, ch, cfg);
    if (out.feasible && power >= out.power) break;
    out.feasible = true;
    out.r = std::move(r);
    out.power = power;
    best_beta = beta;
  }
  if (out.feasible && best_beta != opts.beta0)
    out.anomalies.push_back("initial scale adjusted to beta = " + std::to_string(best_beta));
  return out;
}

VectorXd splitting_from_point(const CccpPoint& r, const model::SystemConfig& cfg) {
  VectorXd rho(cfg.k);
  for (int k = 0; k < cfg.k; ++k) {
    if (cfg.circuit_noise[k] > 0.0)
      rho[k] = std::clamp(1.0 / r.p[k], 0.0, 1.0);
    else if (cfg.eh_target[k] > 0.0)
      rho[k] = std::clamp(1.0 - 1.0 / r.q[k], 0.0, 1.0);
    else
      rho[k] = 1.0;
  }
  return rho;
}

}  // namespace

const char* to_string(CodebookMethod m) {
  switch (m) {
    case CodebookMethod::sum_max: return "sum_max";
    case CodebookMethod::max_min: return "max_min";
    case CodebookMethod::random: return "random";
    case CodebookMethod::exhaustive: return "exhaustive";
  }
  return "?";
}

CodebookMethod codebook_method_from_string(const std::string& s) {
  if (s == "sum_max") return CodebookMethod::sum_max;
  if (s == "max_min") return CodebookMethod::max_min;
  if (s == "random") return CodebookMethod::random;
  if (s == "exhaustive") return CodebookMethod::exhaustive;
  throw std::invalid_argument("unknown codebook method: " + s);
}

Codebook build_codebook(const MatrixXcd& g, const std::vector<VectorXcd>& h_hat, int b,
                        CodebookMethod method, std::mt19937_64* rng) {
  const int nr = static_cast<int>(g.rows());
  if (b < 1) throw std::invalid_argument("codebook size must be positive");
  Codebook cb;
  cb.method = method;

  std::vector<int> identity(nr);
  std::iota(identity.begin(), identity.end(), 0);

  if (method == CodebookMethod::random) {
    if (rng == nullptr) throw std::invalid_argument("random codebook needs an rng");
    std::set<std::vector<int>> seen;
    cb.permutations.push_back(identity);
    seen.insert(identity);
    std::vector<int> cand = identity;
    while (static_cast<int>(cb.permutations.size()) < b) {
      std::shuffle(cand.begin(), cand.end(), *rng);
      if (seen.insert(cand).second) cb.permutations.push_back(cand);
    }
    cb.scores.assign(cb.permutations.size(), 0.0);
    return cb;
  }

  if (nr > 8)
    throw std::invalid_argument("permutation enumeration capped at 8 relay antennas");

  MatrixXcd h_mat(static_cast<int>(h_hat.size()), nr);
  for (size_t k = 0; k < h_hat.size(); ++k) h_mat.row(static_cast<int>(k)) = h_hat[k].adjoint();

  std::vector<std::vector<int>> perms;
  std::vector<double> scores;
  std::vector<int> perm = identity;
  do {
    const MatrixXcd m = h_mat * model::permutation_matrix(perm) * g;
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    perms.push_back(perm);
    scores.push_back(method == CodebookMethod::max_min ? sv[sv.size() - 1] : sv.sum());
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (method == CodebookMethod::exhaustive) {
    cb.permutations = perms;
    cb.scores = scores;
    return cb;
  }

  if (b > static_cast<int>(perms.size()))
    throw std::invalid_argument("codebook size exceeds the number of permutations");

  std::vector<int> order(perms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (scores[i] != scores[j]) return scores[i] > scores[j];
    return perms[i] < perms[j];  // lexicographic tie-break
  });
  order.resize(b);
  if (std::none_of(order.begin(), order.end(),
                   [&](int i) { return perms[i] == identity; }))
    order.back() = 0;  // permutations are lexicographic; index 0 is the identity
  for (int i : order) {
    cb.permutations.push_back(perms[i]);
    cb.scores.push_back(scores[i]);
  }
  return cb;
}

double AffineForm::value_at(const CccpPoint& r) const {
  double v = c0 + dphi * r.phi;
  for (int k = 0; k < dp.size(); ++k) v += dp[k] * r.p[k];
  for (int k = 0; k < dq.size(); ++k) v += dq[k] * r.q[k];
  for (size_t j = 0; j < df.size(); ++j) v += 2.0 * df[j].dot(r.f[j]).real();
  return v;
}

double eval_x(const CccpPoint& r, int k, const std::vector<int>& perm,
              const model::ChannelSet& ch, const model::SystemConfig& cfg) {
  const VectorXcd a = effective_direction(k, perm, ch);
  const double d = r.p[k] - r.phi;
  return 0.25 * cfg.circuit_noise[k] * d * d +
         std::norm(a.dot(r.f[k])) / cfg.sinr_target[k];
}

double eval_z(const CccpPoint& r, int k, const std::vector<int>& perm,
              const model::ChannelSet& ch, const model::SystemConfig& cfg) {
  const VectorXcd a = effective_direction(k, perm, ch);
  double v = cfg.antenna_noise[k] * r.phi;
  for (const auto& fj : r.f) v += std::norm(a.dot(fj));
  const double d = r.q[k] - r.phi;
  return v + cfg.eh_target[k] / (4.0 * cfg.eh_efficiency[k]) * d * d;
}

AffineForm linearize_x(const CccpPoint& r0, int k, const std::vector<int>& perm,
                       const model::ChannelSet& ch, const model::SystemConfig& cfg) {
  const int kk = cfg.k;
  const VectorXcd a = effective_direction(k, perm, ch);
  AffineForm out;
  out.dp = VectorXd::Zero(kk);
  out.dq = VectorXd::Zero(kk);
  out.df.assign(kk, VectorXcd::Zero(r0.f[0].size()));
  const double slope = 0.5 * cfg.circuit_noise[k] * (r0.p[k] - r0.phi);
  out.dp[k] = slope;
  out.dphi = -slope;
  out.df[k] = (a.dot(r0.f[k]) / cfg.sinr_target[k]) * a;
  double at_point = out.dp[k] * r0.p[k] + out.dphi * r0.phi +
                    2.0 * out.df[k].dot(r0.f[k]).real();
  out.c0 = eval_x(r0, k, perm, ch, cfg) - at_point;
  return out;
}

AffineForm linearize_z(const CccpPoint& r0, int k, const std::vector<int>& perm,
                       const model::ChannelSet& ch, const model::SystemConfig& cfg) {
  const int kk = cfg.k;
  const VectorXcd a = effective_direction(k, perm, ch);
  AffineForm out;
  out.dp = VectorXd::Zero(kk);
  out.dq = VectorXd::Zero(kk);
  out.df.resize(kk);
  const double slope =
      cfg.eh_target[k] / (2.0 * cfg.eh_efficiency[k]) * (r0.q[k] - r0.phi);
  out.dq[k] = slope;
  out.dphi = cfg.antenna_noise[k] - slope;
  for (int j = 0; j < kk; ++j) out.df[j] = a.dot(r0.f[j]) * a;
  double at_point = out.dq[k] * r0.q[k] + out.dphi * r0.phi;
  for (int j = 0; j < kk; ++j) at_point += 2.0 * out.df[j].dot(r0.f[j]).real();
  out.c0 = eval_z(r0, k, perm, ch, cfg) - at_point;
  return out;
}

CccpStepResult cccp_step(const CccpPoint& r0, const std::vector<int>& perm,
                         const model::ChannelSet& ch, const model::SystemConfig& cfg) {
  cfg.validate();
  CccpStepResult out;
  const int kk = cfg.k, nt = cfg.nt;
  const bool has_circuit = (cfg.circuit_noise.array() > 0.0).any();
  const bool has_eh = (cfg.eh_target.array() > 0.0).any();

  conic::Program p;
  std::vector<std::vector<int>> fre(kk), fim(kk);
  for (int j = 0; j < kk; ++j) {
    fre[j] = p.add_vars(nt, "fre" + std::to_string(j));
    fim[j] = p.add_vars(nt, "fim" + std::to_string(j));
  }
  std::vector<int> pv = p.add_vars(kk, "p");
  std::vector<int> qv;
  if (has_eh) qv = p.add_vars(kk, "q");
  std::vector<int> uv(kk, -1), vv(kk, -1);
  const int phiv = p.add_var("phi");
  const int p1 = p.add_var("P1"), p2 = p.add_var("P2"), p3 = p.add_var("P3");
  p.set_objective(LinExpr::variable(p1) + LinExpr::variable(p2) + LinExpr::variable(p3));

  auto f_entry = [&](int j, int m) {
    return CplxAffine(LinExpr::variable(fre[j][m]), LinExpr::variable(fim[j][m]));
  };
  auto dir_form = [&](const VectorXcd& a, int j) {
    CplxAffine e;
    for (int m = 0; m < nt; ++m) e += std::conj(a[m]) * f_entry(j, m);
    return e;  // a^H f_j
  };

  // Objective cones: P1 >= ||f||^2, P2 phi >= sum ||G f_j||^2,
  // P3 phi >= sigma_r^2 Nr.
  {
    std::vector<CplxAffine> u;
    for (int j = 0; j < kk; ++j)
      for (int m = 0; m < nt; ++m) u.push_back(f_entry(j, m));
    u.push_back(CplxAffine{0.5 * (LinExpr::variable(p1) - LinExpr{1.0})});
    p.add_soc_complex(0.5 * (LinExpr::variable(p1) + LinExpr{1.0}), u);
  }
  {
    std::vector<CplxAffine> u;
    for (int j = 0; j < kk; ++j)
      for (int m = 0; m < static_cast<int>(ch.first_phase.rows()); ++m) {
        CplxAffine e;
        for (int n = 0; n < nt; ++n) e += ch.first_phase(m, n) * f_entry(j, n);
        u.push_back(e);
      }
    u.push_back(CplxAffine{0.5 * (LinExpr::variable(p2) - LinExpr::variable(phiv))});
    p.add_soc_complex(0.5 * (LinExpr::variable(p2) + LinExpr::variable(phiv)), u);
  }
  p.hyperbolic_constraint(LinExpr::variable(p3), LinExpr::variable(phiv),
                          cfg.relay_noise * cfg.nr);
  p.add_nonneg(LinExpr::variable(phiv));

  for (int k = 0; k < kk; ++k) {
    const VectorXcd a = effective_direction(k, perm, ch);
    const double hh2 = ch.second_estimated[k].squaredNorm();

    // SINR: || [a^H f_j (j != k), omega (p_k + phi)/2] ||^2 <=
    //        x_hat_k - sigma_k^2 phi - sigma_r^2 ||h_hat||^2.
    const AffineForm xh = linearize_x(r0, k, perm, ch, cfg);
    LinExpr rhs = affine_to_expr(xh, pv, qv, phiv, fre, fim) -
                  cfg.antenna_noise[k] * LinExpr::variable(phiv) -
                  LinExpr{cfg.relay_noise * hh2};
    std::vector<CplxAffine> u;
    for (int j = 0; j < kk; ++j)
      if (j != k) u.push_back(dir_form(a, j));
    if (cfg.circuit_noise[k] > 0.0)
      u.push_back(CplxAffine{0.5 * std::sqrt(cfg.circuit_noise[k]) *
                             (LinExpr::variable(pv[k]) + LinExpr::variable(phiv))});
    u.push_back(CplxAffine{0.5 * (rhs - LinExpr{1.0})});
    p.add_soc_complex(0.5 * (rhs + LinExpr{1.0}), u);

    if (cfg.eh_target[k] > 0.0) {
      // EH: (psi / 4 xi)(q_k + phi)^2 <= z_hat_k + sigma_r^2 ||h_hat||^2.
      const AffineForm zh = linearize_z(r0, k, perm, ch, cfg);
      LinExpr rhs2 = affine_to_expr(zh, pv, qv, phiv, fre, fim) +
                     LinExpr{cfg.relay_noise * hh2};
      std::vector<CplxAffine> u2;
      u2.push_back(
          CplxAffine{std::sqrt(cfg.eh_target[k] / (4.0 * cfg.eh_efficiency[k])) *
                     (LinExpr::variable(qv[k]) + LinExpr::variable(phiv))});
      u2.push_back(CplxAffine{0.5 * (rhs2 - LinExpr{1.0})});
      p.add_soc_complex(0.5 * (rhs2 + LinExpr{1.0}), u2);
    }

    p.add_nonneg(LinExpr::variable(pv[k]) - LinExpr{1.0});
    if (has_eh) {
      p.add_nonneg(LinExpr::variable(qv[k]) - LinExpr{1.0});
      uv[k] = p.add_var("u" + std::to_string(k));
      vv[k] = p.add_var("v" + std::to_string(k));
      p.add_nonneg(LinExpr{1.0} - LinExpr::variable(uv[k]) - LinExpr::variable(vv[k]));
      p.hyperbolic_constraint(LinExpr::variable(uv[k]), LinExpr::variable(pv[k]), 1.0);
      p.hyperbolic_constraint(LinExpr::variable(vv[k]), LinExpr::variable(qv[k]), 1.0);
    }
  }
  (void)has_circuit;

  // Seed the solver at the current iterate: it is feasible for this step's
  // constraints by construction, which keeps the feasibility search local.
  conic::SolverOptions sopts;
  sopts.max_iters = 600;  // the step SOCs center slowly near the optimum
  {
    Eigen::VectorXd ws = Eigen::VectorXd::Zero(p.num_vars());
    double bs = 0.0, relay = 0.0;
    for (int j = 0; j < kk; ++j) {
      for (int m = 0; m < nt; ++m) {
        ws[fre[j][m]] = r0.f[j][m].real();
        ws[fim[j][m]] = r0.f[j][m].imag();
      }
      bs += r0.f[j].squaredNorm();
      relay += (ch.first_phase * r0.f[j]).squaredNorm();
    }
    for (int k = 0; k < kk; ++k) {
      ws[pv[k]] = std::max(r0.p[k], 1.0);
      if (has_eh) {
        ws[qv[k]] = std::max(r0.q[k], 1.0);
        ws[uv[k]] = 1.0 / ws[pv[k]];
        ws[vv[k]] = 1.0 / ws[qv[k]];
      }
    }
    ws[phiv] = r0.phi;
    ws[p1] = bs + 1.0;
    ws[p2] = relay / r0.phi + 1.0;
    ws[p3] = cfg.relay_noise * cfg.nr / r0.phi + 1.0;
    sopts.warm_start = ws;
  }

  auto sol = p.solve(sopts);
  if (sol.status != conic::Status::optimal) return out;
  out.feasible = true;
  out.r.p.resize(kk);
  out.r.q = VectorXd::Constant(kk, 1e6);
  out.r.f.assign(kk, VectorXcd::Zero(nt));
  for (int k = 0; k < kk; ++k) {
    out.r.p[k] = sol.x[pv[k]];
    if (has_eh) out.r.q[k] = sol.x[qv[k]];
    for (int m = 0; m < nt; ++m)
      out.r.f[k][m] = std::complex<double>(sol.x[fre[k][m]], sol.x[fim[k][m]]);
  }
  out.r.phi = sol.x[phiv];
  out.objective = latent_power(out.r, ch, cfg);
  return out;
}

LatentOutcome design_latent_cccp(const std::vector<int>& perm, int index,
                                 const model::ChannelSet& ch,
                                 const model::SystemConfig& cfg, const SrOptions& opts,
                                 std::mt19937_64& rng) {
  LatentOutcome out;
  InitialPoint init = initial_cccp_point(perm, ch, cfg, opts, rng);
  out.anomalies = init.anomalies;
  if (!init.feasible) return out;

  CccpPoint r = init.r;
  double prev = init.power;
  out.trace.push_back(prev);
  for (int i = 0; i < opts.max_iters; ++i) {
    out.iterations = i + 1;
    auto step = cccp_step(r, perm, ch, cfg);
    if (!step.feasible) {
      out.anomalies.push_back("descent step infeasible from a feasible iterate");
      break;
    }
    r = step.r;
    out.trace.push_back(step.objective);
    if (std::abs(prev - step.objective) <= opts.delta) {
      prev = step.objective;
      break;
    }
    prev = step.objective;
  }

  out.tx.beamformers = r.f;
  out.tx.ps_ratios = splitting_from_point(r, cfg);
  out.tx.relay_weight = model::ScaledPermutation{index, perm, 1.0 / r.phi};
  out.power = latent_power(r, ch, cfg);
  out.feasible = true;
  return out;
}

FixedBetaResult solve_fixed_beta_robust(double beta, const std::vector<int>& perm,
                                        const model::ChannelSet& ch,
                                        const model::SystemConfig& cfg) {
  cfg.validate();
  FixedBetaResult out;
  const int kk = cfg.k, nr = cfg.nr;
  const MatrixXcd t = model::permutation_matrix(perm);
  const MatrixXcd bt = t * ch.first_phase;           // T G
  const MatrixXcd gram = ch.first_phase.adjoint() * ch.first_phase;  // G^H G

  conic::Program p;
  std::vector<HermitianVar> fv;
  for (int k = 0; k < kk; ++k) {
    fv.push_back(HermitianVar::create(p, cfg.nt, "F" + std::to_string(k)));
    fv.back().add_psd(p);
  }

  LinExpr obj{cfg.relay_noise * beta * nr};
  for (int k = 0; k < kk; ++k) {
    obj += fv[k].trace();
    obj += beta * fv[k].inner(gram);
  }
  p.set_objective(obj);

  // Lifted signal forms Qt_j = T G F_j G^H T^H as affine matrix entries.
  std::vector<std::vector<std::vector<CplxAffine>>> q(kk);
  const bool any_lmi = (ch.error_radius.array() > 0.0).any();
  if (any_lmi)
    for (int j = 0; j < kk; ++j) {
      q[j].assign(nr, std::vector<CplxAffine>(nr));
      for (int mm = 0; mm < nr; ++mm)
        for (int nn = 0; nn < nr; ++nn)
          q[j][mm][nn] = fv[j].form(bt.row(mm).adjoint(), bt.row(nn).adjoint());
    }

  std::vector<int> pv(kk, -1), qv(kk, -1);
  std::vector<int> sinr_block(kk, -1), eh_block(kk, -1);
  std::vector<bool> sinr_is_lmi(kk, false);

  for (int k = 0; k < kk; ++k) {
    const VectorXcd& hh = ch.second_estimated[k];
    const double eta = ch.error_radius[k];
    const VectorXcd a = bt.adjoint() * hh;  // (h^H T G)^H
    const MatrixXcd aa = a * a.adjoint();

    LinExpr circuit{0.0};
    if (cfg.circuit_noise[k] > 0.0) {
      pv[k] = p.add_var("p" + std::to_string(k));
      p.add_nonneg(LinExpr::variable(pv[k]) - LinExpr{1.0});
      circuit = (cfg.circuit_noise[k] / beta) * LinExpr::variable(pv[k]);
    }
    LinExpr harvest_req{0.0};
    if (cfg.eh_target[k] > 0.0) {
      qv[k] = p.add_var("q" + std::to_string(k));
      p.add_nonneg(LinExpr::variable(qv[k]) - LinExpr{1.0});
      harvest_req =
          (cfg.eh_target[k] / (cfg.eh_efficiency[k] * beta)) * LinExpr::variable(qv[k]);
    }
    if (pv[k] >= 0 && qv[k] >= 0) {
      int uvar = p.add_var("u" + std::to_string(k));
      int vvar = p.add_var("v" + std::to_string(k));
      p.add_nonneg(LinExpr{1.0} - LinExpr::variable(uvar) - LinExpr::variable(vvar));
      p.hyperbolic_constraint(LinExpr::variable(uvar), LinExpr::variable(pv[k]), 1.0);
      p.hyperbolic_constraint(LinExpr::variable(vvar), LinExpr::variable(qv[k]), 1.0);
    }

    // Corner scalars h^H U h and h^H V h with U = Qt_k / gamma - sum Qt_j -
    // sigma_r^2 I, V = sum Qt_j + sigma_r^2 I.
    const double hh2 = hh.squaredNorm();
    LinExpr corner_u =
        (1.0 / cfg.sinr_target[k]) * fv[k].inner(aa) - LinExpr{cfg.relay_noise * hh2};
    LinExpr corner_v{cfg.relay_noise * hh2};
    for (int j = 0; j < kk; ++j) {
      if (j != k) corner_u -= fv[j].inner(aa);
      corner_v += fv[j].inner(aa);
    }

    if (eta <= 0.0) {
      sinr_block[k] =
          p.add_nonneg(corner_u - LinExpr{cfg.antenna_noise[k] / beta} - circuit);
      if (cfg.eh_target[k] > 0.0)
        eh_block[k] =
            p.add_nonneg(corner_v + LinExpr{cfg.antenna_noise[k] / beta} - harvest_req);
      continue;
    }

    sinr_is_lmi[k] = true;
    int lam = p.add_var("lam" + std::to_string(k));
    p.add_nonneg(LinExpr::variable(lam));
    auto u_entry = [&](int mm, int nn) {
      CplxAffine e = (1.0 / cfg.sinr_target[k]) * q[k][mm][nn];
      for (int j = 0; j < kk; ++j)
        if (j != k) e -= q[j][mm][nn];
      if (mm == nn) e -= CplxAffine{cfg.relay_noise};
      return e;
    };
    std::vector<std::vector<CplxAffine>> lmi(nr + 1, std::vector<CplxAffine>(nr + 1));
    for (int mm = 0; mm < nr; ++mm) {
      for (int nn = 0; nn < nr; ++nn) {
        lmi[mm][nn] = u_entry(mm, nn);
        if (mm == nn) lmi[mm][nn] += CplxAffine{LinExpr::variable(lam)};
      }
      CplxAffine edge;
      for (int nn = 0; nn < nr; ++nn) edge += u_entry(mm, nn) * hh[nn];
      lmi[mm][nr] = edge;
      lmi[nr][mm] = edge.conj();
    }
    lmi[nr][nr] = CplxAffine{corner_u - LinExpr{cfg.antenna_noise[k] / beta} - circuit -
                             eta * eta * LinExpr::variable(lam)};
    sinr_block[k] = p.add_psd_hermitian(lmi);

    if (cfg.eh_target[k] > 0.0) {
      int mu = p.add_var("mu" + std::to_string(k));
      p.add_nonneg(LinExpr::variable(mu));
      auto v_entry = [&](int mm, int nn) {
        CplxAffine e;
        for (int j = 0; j < kk; ++j) e += q[j][mm][nn];
        if (mm == nn) e += CplxAffine{cfg.relay_noise};
        return e;
      };
      std::vector<std::vector<CplxAffine>> lmi2(nr + 1, std::vector<CplxAffine>(nr + 1));
      for (int mm = 0; mm < nr; ++mm) {
        for (int nn = 0; nn < nr; ++nn) {
          lmi2[mm][nn] = v_entry(mm, nn);
          if (mm == nn) lmi2[mm][nn] += CplxAffine{LinExpr::variable(mu)};
        }
        CplxAffine edge;
        for (int nn = 0; nn < nr; ++nn) edge += v_entry(mm, nn) * hh[nn];
        lmi2[mm][nr] = edge;
        lmi2[nr][mm] = edge.conj();
      }
      lmi2[nr][nr] =
          CplxAffine{corner_v + LinExpr{cfg.antenna_noise[k] / beta} - harvest_req -
                     eta * eta * LinExpr::variable(mu)};
      eh_block[k] = p.add_psd_hermitian(lmi2);
    }
  }

  auto sol = p.solve();
  if (sol.status != conic::Status::optimal) return out;
  out.feasible = true;
  out.objective = sol.objective;
  out.lifted.reserve(kk);
  out.rho.resize(kk);
  out.x_corner = VectorXd::Zero(kk);
  out.y_corner = VectorXd::Zero(kk);
  for (int k = 0; k < kk; ++k) {
    out.lifted.push_back(fv[k].value(sol));
    out.max_rank_ratio = std::max(out.max_rank_ratio, detail::rank_one_ratio(out.lifted[k]));
    if (pv[k] >= 0)
      out.rho[k] = std::clamp(1.0 / sol.x[pv[k]], 0.0, 1.0);
    else if (qv[k] >= 0)
      out.rho[k] = std::clamp(1.0 - 1.0 / sol.x[qv[k]], 0.0, 1.0);
    else
      out.rho[k] = 1.0;
    if (sinr_is_lmi[k]) {
      out.x_corner[k] = sol.hermitian_dual(sinr_block[k])(nr, nr).real();
      if (eh_block[k] >= 0)
        out.y_corner[k] = sol.hermitian_dual(eh_block[k])(nr, nr).real();
    } else {
      out.x_corner[k] = sol.block_duals[sinr_block[k]][0];
      if (eh_block[k] >= 0) out.y_corner[k] = sol.block_duals[eh_block[k]][0];
    }
  }
  out.rank_one = out.max_rank_ratio <= 1e-6;
  return out;
}

double subgradient_value(const FixedBetaResult& res, double beta,
                         const std::vector<int>& perm, const model::ChannelSet& ch,
                         const model::SystemConfig& cfg) {
  (void)perm;
  const MatrixXcd gram = ch.first_phase.adjoint() * ch.first_phase;
  double s = cfg.relay_noise * cfg.nr;
  const double b2 = beta * beta;
  for (int k = 0; k < cfg.k; ++k) {
    s += (gram * res.lifted[k]).trace().real();
    const double rho = std::clamp(res.rho[k], 1e-12, 1.0 - 1e-12);
    s -= res.x_corner[k] * (cfg.antenna_noise[k] + cfg.circuit_noise[k] / rho) / b2;
    if (cfg.eh_target[k] > 0.0)
      s += res.y_corner[k] *
           (cfg.antenna_noise[k] -
            cfg.eh_target[k] / (cfg.eh_efficiency[k] * (1.0 - rho))) /
           b2;
  }
  return s;
}

LatentOutcome design_latent_subgradient(const std::vector<int>& perm, int index,
                                        const model::ChannelSet& ch,
                                        const model::SystemConfig& cfg,
                                        const SrOptions& opts, std::mt19937_64& rng) {
  LatentOutcome out;
  const MatrixXcd t = model::permutation_matrix(perm);
  const bool robust = (ch.error_radius.array() > 0.0).any();

  double beta = opts.beta0;
  bool have_feasible = false;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_beta = beta;
  FixedBetaResult best;
  double prev_obj = std::numeric_limits<double>::quiet_NaN();
  double last_feasible_beta = beta;
  double step = 0.0;
  double bracket_lo = 0.0;  // largest scale with downhill slope
  double bracket_hi = std::numeric_limits<double>::infinity();  // smallest uphill

  for (int i = 0; i < opts.max_iters; ++i) {
    out.iterations = i + 1;
    auto res = solve_fixed_beta_robust(beta, perm, ch, cfg);
    if (!res.feasible) {
      if (!have_feasible) {
        // Initial scale infeasible; mirror the descent initializer's fallback.
        bool found = false;
        for (double b : {4.0, 16.0}) {
          beta = b;
          res = solve_fixed_beta_robust(beta, perm, ch, cfg);
          if (res.feasible) {
            out.anomalies.push_back("initial scale fallback to beta = " +
                                    std::to_string(b));
            found = true;
            break;
          }
        }
        if (!found) return out;
      } else {
        // Halve the step back toward the last feasible scale.
        step *= 0.5;
        if (std::abs(step) < 1e-12) break;
        beta = std::max(last_feasible_beta - step, opts.epsilon);
        continue;
      }
    }
    have_feasible = true;
    if (res.objective < best_obj) {
      best_obj = res.objective;
      best_beta = beta;
      best = res;
    }
    out.trace.push_back(best_obj);
    // The objective is flat near its minimizer, so the power tolerance alone
    // can stop the search with the scale still several percent off; once a
    // bracket exists, keep bisecting until it pins the scale to ~1%.
    const bool scale_pinned =
        bracket_lo > 0.0 && std::isfinite(bracket_hi) && bracket_hi <= 1.02 * bracket_lo;
    if (!std::isnan(prev_obj) && std::abs(res.objective - prev_obj) <= opts.delta &&
        (scale_pinned || bracket_lo == 0.0 || !std::isfinite(bracket_hi)))
      break;
    prev_obj = res.objective;

    const double s = subgradient_value(res, beta, perm, ch, cfg);
    if (s == 0.0) break;
    // The objective is convex in the scale, so scales with negative and
    // positive slope bracket the minimum; once both sides have been seen the
    // bracket is bisected geometrically, which avoids the fixed-step crawl
    // after an overshoot. Until then the raw step is kept, but forced to move
    // the scale by at least a constant factor so a bracket forms quickly.
    if (s < 0.0)
      bracket_lo = std::max(bracket_lo, beta);
    else
      bracket_hi = std::min(bracket_hi, beta);
    last_feasible_beta = beta;
    double next;
    if (bracket_lo > 0.0 && std::isfinite(bracket_hi)) {
      next = std::sqrt(bracket_lo * bracket_hi);
    } else if (s < 0.0) {
      next = std::max(beta - opts.theta * s, 2.0 * beta);
    } else {
      next = std::min(std::max(beta - opts.theta * s, opts.epsilon), 0.5 * beta);
    }
    if (next == beta) break;
    step = beta - next;
    beta = next;
  }
  if (!have_feasible) return out;

  // Extract the design at the best scale.
  std::vector<VectorXcd> f;
  VectorXd rho = best.rho;
  if (best.rank_one) {
    for (const auto& fk : best.lifted) f.push_back(detail::principal_factor(fk));
  } else {
    out.anomalies.push_back("beamformer block not rank-one (ratio " +
                            std::to_string(best.max_rank_ratio) +
                            "), randomized recovery used");
    auto rec = rankone::recover_beamformers(best.lifted, std::sqrt(best_beta) * t, ch,
                                            cfg, robust, opts.recovery_trials, rng);
    if (!rec.success) {
      out.anomalies.push_back("randomized beamformer recovery found no feasible candidate");
      return out;
    }
    f = rec.tx.beamformers;
    rho = rec.tx.ps_ratios;
  }
  out.tx.beamformers = f;
  out.tx.ps_ratios = rho;
  out.tx.relay_weight = model::ScaledPermutation{index, perm, best_beta};
  out.power = model::bs_power(out.tx) + model::rs_power(out.tx, ch, cfg);
  out.feasible = true;
  return out;
}

SrOutcome design_sr(const model::ChannelSet& ch, const model::SystemConfig& cfg,
                    const Codebook& codebook, bool robust, bool simplified,
                    const SrOptions& opts, std::mt19937_64& rng) {
  SrOutcome out;
  const int b = static_cast<int>(codebook.permutations.size());
  if (b == 0) throw std::invalid_argument("empty codebook");
  out.latent_powers.assign(b, std::numeric_limits<double>::quiet_NaN());

  auto design_one = [&](int l) {
    return robust
               ? design_latent_subgradient(codebook.permutations[l], l, ch, cfg, opts, rng)
               : design_latent_cccp(codebook.permutations[l], l, ch, cfg, opts, rng);
  };

  std::vector<int> candidates;
  if (simplified) {
    // Rank the initial points only, then refine the single best latent.
    int best_l = -1;
    double best_init = std::numeric_limits<double>::infinity();
    for (int l = 0; l < b; ++l) {
      double value = std::numeric_limits<double>::quiet_NaN();
      if (robust) {
        auto res = solve_fixed_beta_robust(opts.beta0, codebook.permutations[l], ch, cfg);
        if (res.feasible) value = res.objective;
      } else {
        auto init = initial_cccp_point(codebook.permutations[l], ch, cfg, opts, rng);
        if (init.feasible) value = init.power;
      }
      if (!std::isnan(value) && value < best_init) {
        best_init = value;
        best_l = l;
      }
    }
    if (best_l < 0) return out;
    candidates.push_back(best_l);
  } else {
    for (int l = 0; l < b; ++l) candidates.push_back(l);
  }

  for (int l : candidates) {
    auto latent = design_one(l);
    for (const auto& a : latent.anomalies)
      out.anomalies.push_back("latent " + std::to_string(l) + ": " + a);
    if (!latent.feasible) continue;
    out.latent_powers[l] = latent.power;
    if (!out.feasible || latent.power < out.power) {
      out.feasible = true;
      out.power = latent.power;
      out.tx = latent.tx;
      out.l_opt = l;
      out.beta = std::get<model::ScaledPermutation>(latent.tx.relay_weight).power_scale;
      out.iterations = latent.iterations;
    }
  }
  return out;
}

}  // namespace swipt::sr
