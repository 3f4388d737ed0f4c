#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "swipt/model.hpp"
#include "swipt/rankone.hpp"

using namespace swipt::rankone;
using swipt::model::ChannelSet;
using swipt::model::SystemConfig;

namespace {

Eigen::VectorXcd random_cvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

Eigen::MatrixXcd random_cmat(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

double quad_at(const Eigen::VectorXcd& h, const Eigen::VectorXcd& e,
               const Eigen::MatrixXcd& w) {
  return ((h + e).adjoint() * w).squaredNorm();
}

// Independent oracle: projected gradient ascent/descent on the sphere.
double sphere_extremum(const Eigen::VectorXcd& h, double eta, const Eigen::MatrixXcd& w,
                       bool maximize, std::mt19937_64& rng) {
  Eigen::MatrixXcd m = w * w.adjoint();
  double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .maxCoeff();
  // minimization is convex: projected gradient with step < 1/L converges to
  // the global optimum; maximization uses surface ascent from many starts.
  double step = maximize ? 0.5 / std::max(lmax, 1e-12) : 0.9 / std::max(2 * lmax, 1e-12);
  double best = maximize ? -1.0 : std::numeric_limits<double>::infinity();
  for (int start = 0; start < 12; ++start) {
    Eigen::VectorXcd e = random_cvec(static_cast<int>(h.size()), rng);
    e *= eta / e.norm();
    for (int it = 0; it < 3000; ++it) {
      Eigen::VectorXcd grad = m * (h + e);
      Eigen::VectorXcd cand = maximize ? (e + step * grad).eval() : (e - step * grad).eval();
      double n = cand.norm();
      if (n > eta || maximize) cand *= eta / n;  // max lives on the surface
      e = cand;
    }
    double v = quad_at(h, e, w);
    best = maximize ? std::max(best, v) : std::min(best, v);
  }
  if (!maximize) {
    best = std::min(best, quad_at(h, Eigen::VectorXcd::Zero(h.size()).eval(), w));
    // interior candidate reaching the null space when the ball is big enough
    Eigen::MatrixXcd mm = w * w.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mm);
    Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(h.size());
    for (int i = 0; i < h.size(); ++i)
      if (es.eigenvalues()[i] > es.eigenvalues().maxCoeff() * 1e-12)
        proj += es.eigenvectors().col(i) * (es.eigenvectors().col(i).dot(h));
    if (proj.norm() <= eta) best = 0.0;
  }
  return best;
}

}  // namespace

TEST_CASE("linear bounds closed form") {
  Eigen::VectorXcd h(2), b(2);
  h << 3.0, 0.0;
  b << 1.0, 0.0;
  auto [u, v] = worst_case_linear_bounds(h, 0.5, b);
  CHECK(u == doctest::Approx(6.25));
  CHECK(v == doctest::Approx(12.25));

  auto [u0, v0] = worst_case_linear_bounds(h, 0.0, b);
  CHECK(u0 == doctest::Approx(9.0));
  CHECK(v0 == doctest::Approx(9.0));
}

TEST_CASE("linear bounds bracket and are attained on the aligned family") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3;
    Eigen::VectorXcd h = random_cvec(n, rng), b = random_cvec(n, rng);
    double eta = 0.05 + 0.3 * trial / 20.0;
    auto [u, v] = worst_case_linear_bounds(h, eta, b);
    // random ball samples stay inside the bracket
    for (int s = 0; s < 2000; ++s) {
      Eigen::VectorXcd e = swipt::model::sample_error_ball(n, eta, rng, s % 2 == 0);
      double val = std::norm((h + e).dot(b));
      CHECK(val >= u - 1e-9 * (1 + v));
      CHECK(val <= v + 1e-9 * (1 + v));
    }
    // extremes attained along e = eta * exp(i theta) b / ||b||
    double lo = 1e300, hi = -1.0;
    for (int t = 0; t < 5000; ++t) {
      double theta = 2 * M_PI * t / 5000.0;
      Eigen::VectorXcd e = std::polar(eta / b.norm(), theta) * b;
      double val = std::norm((h + e).dot(b));
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    if (u > 0) CHECK(lo == doctest::Approx(u).epsilon(1e-3));
    CHECK(hi == doctest::Approx(v).epsilon(1e-3));
  }
}

TEST_CASE("quadratic bounds: isotropic closed form, degenerate ball, oracle") {
  std::mt19937_64 rng(11);
  const int n = 3;

  // isotropic M = beta I via W = sqrt(beta) * unitary
  Eigen::VectorXcd h = random_cvec(n, rng);
  double beta = 2.3, eta = 0.4;
  Eigen::MatrixXcd w = std::sqrt(beta) * Eigen::MatrixXcd::Identity(n, n);
  auto [wb, wt] = worst_case_quadratic_bounds(h, eta, w);
  CHECK(wb == doctest::Approx(beta * std::pow(h.norm() + eta, 2)).epsilon(1e-9));
  CHECK(wt ==
        doctest::Approx(beta * std::pow(std::max(h.norm() - eta, 0.0), 2)).epsilon(1e-9));

  // eta = 0 degenerates to the nominal value
  Eigen::MatrixXcd wr = random_cmat(n, n, rng);
  auto [b0, t0] = worst_case_quadratic_bounds(h, 0.0, wr);
  CHECK(b0 == doctest::Approx((h.adjoint() * wr).squaredNorm()));
  CHECK(t0 == doctest::Approx(b0));

  // random instances against the projected-gradient oracle
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::VectorXcd hh = random_cvec(n, rng);
    Eigen::MatrixXcd ww = random_cmat(n, n, rng);
    if (trial % 3 == 0) ww.col(0).setZero();  // make W^H rank-deficient sometimes
    double e = 0.05 + 0.2 * (trial % 5);
    auto [mx, mn] = worst_case_quadratic_bounds(hh, e, ww);
    double omax = sphere_extremum(hh, e, ww, true, rng);
    double omin = sphere_extremum(hh, e, ww, false, rng);
    CHECK(mx == doctest::Approx(omax).epsilon(1e-3));
    CHECK(mn == doctest::Approx(omin).epsilon(2e-3).scale(1.0));
    double nominal = (hh.adjoint() * ww).squaredNorm();
    CHECK(mn <= nominal + 1e-9);
    CHECK(mx >= nominal - 1e-9);
  }

  // hard case: forcing vector orthogonal to the top eigenspace
  Eigen::MatrixXcd wh = Eigen::MatrixXcd::Zero(n, n);
  wh(0, 0) = 2.0;  // top eigenvector e0 of W W^H
  wh(1, 1) = 1.0;
  Eigen::VectorXcd hph(n);
  hph << 0.0, 1.0, 0.5;  // no component on e0
  auto [hb, ht] = worst_case_quadratic_bounds(hph, 0.3, wh);
  double ob = sphere_extremum(hph, 0.3, wh, true, rng);
  CHECK(hb == doctest::Approx(ob).epsilon(1e-3));
  CHECK(ht <= hb);

  // monotonicity in eta
  double prev_max = -1.0, prev_min = 1e300;
  for (double e : {0.0, 0.1, 0.2, 0.4, 0.8}) {
    auto [a, b] = worst_case_quadratic_bounds(h, e, wr);
    CHECK(a >= prev_max - 1e-12);
    CHECK(b <= prev_min + 1e-12);
    prev_max = a;
    prev_min = b;
  }
}

namespace {

struct Instance {
  SystemConfig cfg;
  ChannelSet ch;
};

// Near-zero-forcing beams: h_k^H W G f_j ~ delta_kj, so the rescaling
// subproblems are feasible by construction.
std::vector<Eigen::VectorXcd> zf_beams(const ChannelSet& ch, const Eigen::MatrixXcd& w,
                                       int k, std::mt19937_64& rng,
                                       double perturb = 0.05) {
  Eigen::MatrixXcd a(k, ch.first_phase.cols());
  for (int i = 0; i < k; ++i)
    a.row(i) = ch.second_estimated[i].adjoint() * w * ch.first_phase;
  Eigen::MatrixXcd pinv = a.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<Eigen::VectorXcd> f;
  for (int i = 0; i < k; ++i)
    f.push_back(pinv.col(i) + perturb * random_cvec(static_cast<int>(pinv.rows()), rng));
  return f;
}

Instance make_instance(int nt, int nr, int k, double eta, std::uint64_t seed,
                       double gamma_db = 3.0, double psi_dbm = -10.0) {
  swipt::model::RawConfig raw;
  raw.nt = nt;
  raw.nr = nr;
  raw.k = k;
  raw.gamma_db = gamma_db;
  raw.psi_dbm = psi_dbm;
  raw.eta = eta;
  Instance inst;
  inst.cfg = swipt::model::to_linear_config(raw);
  std::mt19937_64 rng(seed);
  inst.ch = swipt::model::sample_channels(
      inst.cfg, Eigen::VectorXd::Constant(k, eta), rng);
  return inst;
}

}  // namespace

TEST_CASE("rescale_beamformers is idempotent and yields verified designs") {
  std::mt19937_64 rng(5);
  Instance inst = make_instance(3, 3, 2, 0.0, 77);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(3, 3);
  std::vector<Eigen::VectorXcd> f = zf_beams(inst.ch, w, 2, rng);

  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(2);
  WorstCaseBounds b = compute_bounds(inst.ch, eta0, w, f);
  RescaleSolution rs = rescale_beamformers(f, w, b, inst.ch, inst.cfg);
  REQUIRE(rs.feasible);

  // scaled design satisfies the constraints
  swipt::model::Transceiver tx;
  for (int i = 0; i < 2; ++i) tx.beamformers.push_back(std::sqrt(rs.phi[i]) * f[i]);
  tx.relay_weight = swipt::model::FullMatrix{w};
  tx.ps_ratios = rs.rho;
  auto rep = swipt::model::verify_design(tx, inst.ch, inst.cfg);
  CHECK(rep.all_constraints_met);
  CHECK(rep.total_power == doctest::Approx(rs.objective).epsilon(1e-5));

  // rescaling the already-rescaled design changes nothing: phi = 1
  WorstCaseBounds b2 = compute_bounds(inst.ch, eta0, w, tx.beamformers);
  RescaleSolution rs2 = rescale_beamformers(tx.beamformers, w, b2, inst.ch, inst.cfg);
  REQUIRE(rs2.feasible);
  for (int i = 0; i < 2; ++i) CHECK(rs2.phi[i] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rs2.objective == doctest::Approx(rs.objective).epsilon(1e-3));

  // vanishing targets drive the scales to zero
  Instance easy = make_instance(3, 3, 2, 0.0, 77, -80.0, -200.0);
  SystemConfig tiny = easy.cfg;
  tiny.circuit_noise.setZero();
  WorstCaseBounds b3 = compute_bounds(easy.ch, eta0, w, f);
  RescaleSolution rs3 = rescale_beamformers(f, w, b3, easy.ch, tiny);
  REQUIRE(rs3.feasible);
  CHECK(rs3.phi.maxCoeff() < 1e-4);
}

TEST_CASE("rescale_relay matches a dense phi grid") {
  std::mt19937_64 rng(9);
  Instance inst = make_instance(3, 3, 2, 0.0, 13);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(3, 3);
  std::vector<Eigen::VectorXcd> f = zf_beams(inst.ch, w, 2, rng);
  for (auto& v : f) v *= 2.0;
  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(2);
  WorstCaseBounds b = compute_bounds(inst.ch, eta0, w, f);
  RescaleSolution rs = rescale_relay(f, w, b, inst.ch, inst.cfg);
  REQUIRE(rs.feasible);
  double phi = rs.phi[0];

  // grid feasibility: everything below phi infeasible, above feasible; a design
  // built at the returned phi verifies
  auto feasible_at = [&](double p) {
    swipt::model::Transceiver tx;
    tx.beamformers = f;
    tx.relay_weight = swipt::model::FullMatrix{std::sqrt(p) * w};
    // pick best rho per user by 1-D sweep
    tx.ps_ratios = Eigen::VectorXd::Constant(2, 0.5);
    for (int k = 0; k < 2; ++k) {
      bool ok = false;
      for (double r = 0.005; r < 1.0; r += 0.005) {
        tx.ps_ratios[k] = r;
        if (swipt::model::sinr(k, tx, inst.ch, inst.cfg,
                               swipt::model::ChannelSelect::estimated) >=
                inst.cfg.sinr_target[k] * (1 - 1e-9) &&
            swipt::model::harvested_power(k, tx, inst.ch, inst.cfg,
                                          swipt::model::ChannelSelect::estimated) >=
                inst.cfg.eh_target[k] * (1 - 1e-9)) {
          ok = true;
          break;
        }
      }
      if (!ok) return false;
    }
    return true;
  };
  CHECK(feasible_at(phi * 1.02));
  CHECK_FALSE(feasible_at(phi * 0.80));

  swipt::model::Transceiver tx;
  tx.beamformers = f;
  tx.relay_weight = swipt::model::FullMatrix{std::sqrt(phi) * w};
  tx.ps_ratios = rs.rho;
  auto rep = swipt::model::verify_design(tx, inst.ch, inst.cfg);
  CHECK(rep.all_constraints_met);
  CHECK(rep.total_power == doctest::Approx(rs.objective).epsilon(1e-6));
}

TEST_CASE("randomized recovery on rank-one input reproduces the factor") {
  std::mt19937_64 rng(21);
  Instance inst = make_instance(3, 3, 2, 0.0, 5);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(3, 3);
  std::vector<Eigen::VectorXcd> f = zf_beams(inst.ch, w, 2, rng);
  std::vector<Eigen::MatrixXcd> lifted;
  for (const auto& v : f) lifted.push_back(v * v.adjoint());

  std::mt19937_64 rec_rng(1);
  RecoveryResult r =
      recover_beamformers(lifted, w, inst.ch, inst.cfg, false, 5, rec_rng);
  REQUIRE(r.success);
  // the winning beamformer is the rescaled principal factor: collinear with f_k
  for (int k = 0; k < 2; ++k) {
    double cosang = std::abs(f[k].dot(r.tx.beamformers[k])) /
                    (f[k].norm() * r.tx.beamformers[k].norm());
    CHECK(cosang == doctest::Approx(1.0).epsilon(1e-6));
  }
  auto rep = swipt::model::verify_design(r.tx, inst.ch, inst.cfg);
  CHECK(rep.all_constraints_met);
  CHECK(rep.total_power == doctest::Approx(r.objective).epsilon(1e-5));

  // relay mode on a rank-one lifted vec(W)
  Eigen::MatrixXcd wr = random_cmat(3, 3, rng);
  Eigen::VectorXcd vw = Eigen::Map<Eigen::VectorXcd>(wr.data(), 9);
  Eigen::MatrixXcd lifted_w = vw * vw.adjoint();
  std::mt19937_64 rr(2);
  RecoveryResult rel =
      recover_relay(lifted_w, r.tx.beamformers, inst.ch, inst.cfg, false, 5, rr);
  if (rel.success) {
    auto rep2 = swipt::model::verify_design(rel.tx, inst.ch, inst.cfg);
    CHECK(rep2.all_constraints_met);
    Eigen::MatrixXcd wrec = rel.tx.relay_matrix();
    // recovered relay weight is a scalar multiple of the factor
    std::complex<double> ratio = wrec(0, 0) / wr(0, 0);
    CHECK((wrec - ratio * wr).norm() < 1e-6 * wrec.norm());
  }
}
