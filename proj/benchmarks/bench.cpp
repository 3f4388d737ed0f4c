// Microbenchmarks for the two dominant per-trial costs: one lifted relay
// subproblem (semidefinite) and one latent descent step (second-order cone).
#include <random>

#include <benchmark/benchmark.h>

#include "swipt/ao.hpp"
#include "swipt/model.hpp"
#include "swipt/sr.hpp"

namespace {

using namespace swipt;

model::SystemConfig bench_config(int nt, int nr, int k) {
  model::RawConfig raw;
  raw.nt = nt;
  raw.nr = nr;
  raw.k = k;
  raw.gamma_db = 8.0;
  raw.psi_dbm = -3.0;
  return model::to_linear_config(raw);
}

void bm_relay_subproblem(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto cfg = bench_config(n, n, 2);
  std::mt19937_64 rng(11);
  auto ch = model::sample_channels(cfg, Eigen::VectorXd::Zero(cfg.k), rng);
  ao::AoOptions opts;
  auto bf = ao::solve_bf_ps_nominal(ao::identity_init(cfg.nr), ch, cfg, opts, rng);
  for (auto _ : state) {
    auto res = ao::solve_relay_nominal(bf.tx.beamformers, bf.tx.ps_ratios, ch, cfg,
                                       opts, rng);
    benchmark::DoNotOptimize(res.sdr_objective);
  }
}

void bm_latent_descent_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto cfg = bench_config(n, n, 2);
  std::mt19937_64 rng(13);
  auto ch = model::sample_channels(cfg, Eigen::VectorXd::Zero(cfg.k), rng);
  std::vector<int> perm(cfg.nr);
  for (int i = 0; i < cfg.nr; ++i) perm[i] = i;
  ao::AoOptions aopts;
  auto bf = ao::solve_bf_ps_nominal(ao::identity_init(cfg.nr), ch, cfg, aopts, rng);
  sr::CccpPoint r0;
  r0.f = bf.tx.beamformers;
  r0.phi = 1.0;
  r0.p.resize(cfg.k);
  r0.q.resize(cfg.k);
  for (int k = 0; k < cfg.k; ++k) {
    const double rho = std::clamp(bf.tx.ps_ratios[k], 1e-6, 1.0 - 1e-6);
    r0.p[k] = 1.0 / rho;
    r0.q[k] = 1.0 / (1.0 - rho);
  }
  for (auto _ : state) {
    auto step = sr::cccp_step(r0, perm, ch, cfg);
    benchmark::DoNotOptimize(step.objective);
  }
}

BENCHMARK(bm_relay_subproblem)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_latent_descent_step)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
