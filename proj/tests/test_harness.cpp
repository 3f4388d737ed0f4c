#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "swipt/harness.hpp"
#include "swipt/model.hpp"

using namespace swipt;

namespace {

harness::ExperimentSpec small_spec() {
  harness::ExperimentSpec spec;
  spec.base.nt = 2;
  spec.base.nr = 2;
  spec.base.k = 2;
  spec.base.gamma_db = 8.0;
  spec.base.psi_dbm = -3.0;
  spec.sweep = harness::SweepVariable::psi_dbm;
  spec.sweep_values = {-3.0};
  spec.num_trials = 2;
  spec.master_seed = 7;
  harness::AlgorithmSpec a;
  a.algorithm = harness::Algorithm::sr_cccp;
  a.options.b = 2;
  spec.algorithms = {a};
  return spec;
}

harness::TrialRecord make_record(int trial, double sweep, const std::string& alg,
                                 double mw, bool feasible) {
  harness::TrialRecord r;
  r.trial = trial;
  r.seed = model::mix_seed(1, trial);
  r.sweep_value = sweep;
  r.algorithm = alg;
  r.feasible = feasible;
  r.power_mw = feasible ? mw : 0.0;
  r.power_dbm = feasible && mw > 0.0 ? model::mw_to_dbm(mw) : 0.0;
  r.iterations = 3;
  r.wall_ms = 1.25;
  r.l_opt = 0;
  r.beta = 2.0;
  return r;
}

}  // namespace

TEST_CASE("spec parsing, validation, and unknown tags") {
  const std::string text = R"({
    "base": {"nt": 2, "nr": 2, "k": 2, "gamma_db": 8.0, "psi_dbm": -3.0},
    "sweep": "psi_dbm",
    "values": [-3.0, 0.0],
    "algorithms": [
      {"algorithm": "ao_nominal", "init": "identity", "delta": 1e-3},
      {"algorithm": "sr_subgradient", "b": 4, "method": "max_min", "theta": 2.0}
    ],
    "num_trials": 3,
    "seed": 11,
    "output": "outdir"
  })";
  auto spec = harness::parse_experiment_spec(text);
  CHECK(spec.base.nt == 2);
  CHECK(spec.sweep == harness::SweepVariable::psi_dbm);
  CHECK(spec.sweep_values == std::vector<double>{-3.0, 0.0});
  REQUIRE(spec.algorithms.size() == 2);
  CHECK(spec.algorithms[0].algorithm == harness::Algorithm::ao_nominal);
  CHECK(spec.algorithms[0].options.delta == 1e-3);
  CHECK(spec.algorithms[1].options.b == 4);
  CHECK(spec.algorithms[1].options.method == sr::CodebookMethod::max_min);
  CHECK(spec.algorithms[1].options.theta == 2.0);
  CHECK(spec.num_trials == 3);
  CHECK(spec.master_seed == 11);
  CHECK(spec.output_dir == "outdir");

  CHECK_THROWS_AS(harness::algorithm_from_string("gradient_descent"), std::invalid_argument);
  CHECK_THROWS_AS(harness::sweep_from_string("bandwidth"), std::invalid_argument);

  auto bad = spec;
  bad.sweep_values.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.num_trials = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.algorithms.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.sweep = harness::SweepVariable::codebook_size;
  bad.sweep_values = {1.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(
      harness::parse_experiment_spec(R"({"algorithms":[{"algorithm":"nope"}]})"),
      std::invalid_argument);
}

TEST_CASE("repeated runs are deterministic and workers do not change results") {
  auto spec = small_spec();
  auto r1 = harness::run_experiment(spec);
  auto r2 = harness::run_experiment(spec);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) CHECK(harness::same_outcome(r1[i], r2[i]));

  harness::RunOptions run;
  run.workers = 3;
  auto r3 = harness::run_experiment(spec, run);
  REQUIRE(r3.size() == r1.size());
  for (size_t i = 0; i < r1.size(); ++i) CHECK(harness::same_outcome(r1[i], r3[i]));
}

TEST_CASE("trials are paired: per-trial seeds shared, algorithms unaffected by the list") {
  auto spec = small_spec();
  harness::AlgorithmSpec ao;
  ao.algorithm = harness::Algorithm::ao_nominal;
  spec.algorithms.insert(spec.algorithms.begin(), ao);
  auto both = harness::run_experiment(spec);
  REQUIRE(both.size() == 4);  // 2 trials x 2 algorithms
  CHECK(both[0].seed == both[1].seed);
  CHECK(both[2].seed == both[3].seed);
  CHECK(both[0].seed != both[2].seed);

  // Running the switched-relay algorithm alone reproduces its paired records:
  // channels and algorithm randomness depend only on (master seed, trial, tag).
  auto alone_spec = small_spec();
  auto alone = harness::run_experiment(alone_spec);
  REQUIRE(alone.size() == 2);
  CHECK(harness::same_outcome(alone[0], both[1]));
  CHECK(harness::same_outcome(alone[1], both[3]));
}

TEST_CASE("summaries: constant data, counting, and record-order invariance") {
  std::vector<harness::TrialRecord> recs;
  for (int t = 0; t < 10; ++t) recs.push_back(make_record(t, 0.0, "ao_nominal", 1.0, t != 4));
  auto rows = harness::summarize(recs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 10);
  CHECK(rows[0].feasible_trials == 9);
  CHECK(rows[0].feasibility_rate == doctest::Approx(0.9));
  CHECK(rows[0].has_power);
  CHECK(rows[0].mean_power_dbm == doctest::Approx(0.0));  // 1 mW = 0 dBm
  CHECK(rows[0].mean_power_mw == doctest::Approx(1.0));
  CHECK(rows[0].ci_half_width_dbm == doctest::Approx(0.0));

  std::mt19937_64 rng(3);
  std::vector<harness::TrialRecord> shuffled = recs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto rows2 = harness::summarize(shuffled);
  REQUIRE(rows2.size() == 1);
  CHECK(rows2[0].mean_power_dbm == rows[0].mean_power_dbm);
  CHECK(rows2[0].ci_half_width_dbm == rows[0].ci_half_width_dbm);
  CHECK(rows2[0].feasibility_rate == rows[0].feasibility_rate);

  std::vector<harness::TrialRecord> none{make_record(0, 1.0, "ao_robust", 0.0, false)};
  auto rows3 = harness::summarize(none);
  REQUIRE(rows3.size() == 1);
  CHECK(!rows3[0].has_power);
  CHECK(rows3[0].feasibility_rate == 0.0);
}

TEST_CASE("CSV round trip is exact, empty list gives a header-only file") {
  CHECK(harness::records_to_csv({}) ==
        "trial,seed,sweep,algorithm,power_mw,power_dbm,feasible,iterations,wall_ms,l_opt,"
        "beta\n");

  std::vector<harness::TrialRecord> recs;
  recs.push_back(make_record(0, -3.0, "sr_cccp", 0.123456789012345678, true));
  recs.push_back(make_record(1, -3.0, "ao_robust", 17.25, false));
  recs[0].beta = 3.0000000000001;
  recs[1].wall_ms = 0.0625;
  auto parsed = harness::records_from_csv(harness::records_to_csv(recs));
  REQUIRE(parsed.size() == recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(harness::same_outcome(parsed[i], recs[i]));
    CHECK(parsed[i].wall_ms == recs[i].wall_ms);
  }
}

TEST_CASE("summary JSON carries the algorithm tags; emit writes the artifact set") {
  std::vector<harness::TrialRecord> recs;
  for (int t = 0; t < 4; ++t) {
    recs.push_back(make_record(t, 0.0, "sr_cccp", 2.0, true));
    recs.push_back(make_record(t, 0.0, "ao_nominal", 3.0, t % 2 == 0));
  }
  auto rows = harness::summarize(recs);
  auto json_text = harness::summaries_to_json(rows);
  CHECK(json_text.find("\"sr_cccp\"") != std::string::npos);
  CHECK(json_text.find("\"ao_nominal\"") != std::string::npos);
  CHECK(json_text.find("feasibility_rate") != std::string::npos);

  const std::string dir = "harness_emit_test_dir";
  harness::emit(recs, rows, dir);
  namespace fs = std::filesystem;
  CHECK(fs::exists(fs::path(dir) / "records.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  CHECK(fs::exists(fs::path(dir) / "sr_cccp_power.csv"));
  CHECK(fs::exists(fs::path(dir) / "ao_nominal_feasibility.csv"));

  std::ifstream in(fs::path(dir) / "records.csv");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto parsed = harness::records_from_csv(text);
  REQUIRE(parsed.size() == recs.size());
  for (size_t i = 0; i < recs.size(); ++i) CHECK(harness::same_outcome(parsed[i], recs[i]));
  fs::remove_all(dir);
}

TEST_CASE("harvesting-target sweep: average power grows with the target") {
  harness::ExperimentSpec spec;
  spec.base.nt = 2;
  spec.base.nr = 2;
  spec.base.k = 2;
  spec.base.gamma_db = 8.0;
  spec.sweep = harness::SweepVariable::psi_dbm;
  spec.sweep_values = {-6.0, 3.0};
  spec.num_trials = 3;
  spec.master_seed = 5;
  harness::AlgorithmSpec a;
  a.algorithm = harness::Algorithm::sr_cccp;
  a.options.b = 2;
  harness::AlgorithmSpec b;
  b.algorithm = harness::Algorithm::ao_nominal;
  spec.algorithms = {a, b};

  harness::RunOptions run;
  run.workers = 2;
  auto rows = harness::summarize(harness::run_experiment(spec, run));
  for (const std::string alg : {"sr_cccp", "ao_nominal"}) {
    double lo = 0.0, hi = 0.0;
    for (const auto& r : rows) {
      if (r.algorithm != alg) continue;
      REQUIRE(r.has_power);
      (r.sweep_value < 0.0 ? lo : hi) = r.mean_power_dbm;
    }
    CHECK(hi > lo);
  }
}
