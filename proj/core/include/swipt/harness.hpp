#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swipt/model.hpp"
#include "swipt/sr.hpp"

namespace swipt::harness {

enum class Algorithm {
  ao_nominal,
  ao_robust,
  sr_cccp,
  sr_subgradient,
  sr_simplified_nominal,
  sr_simplified_robust,
};
const char* to_string(Algorithm a);
/// Throws std::invalid_argument on an unknown tag.
Algorithm algorithm_from_string(const std::string& s);

enum class SweepVariable { psi_dbm, gamma_db, eta, codebook_size };
const char* to_string(SweepVariable v);
SweepVariable sweep_from_string(const std::string& s);

/// Per-algorithm tuning knobs; every field has the production default.
struct AlgorithmOptions {
  std::string init = "identity";  // alternation relay seed: identity | random
  int b = 8;                      // codebook size (switched-relay algorithms)
  sr::CodebookMethod method = sr::CodebookMethod::sum_max;
  double theta = 6.0;    // scale-search step size
  double epsilon = 1e-6; // scale floor
  double delta = 2e-3;   // power tolerance between iterations, mW
  double beta0 = 1.0;    // initial power scale
  int ao_max_iters = 20;
  int sr_max_iters = 50;
  int recovery_trials = 100;
};

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::ao_nominal;
  AlgorithmOptions options;
};

/// One Monte-Carlo study: a base configuration, one swept variable, and a set
/// of algorithms run on the same channels per trial (paired comparison).
struct ExperimentSpec {
  model::RawConfig base;
  SweepVariable sweep = SweepVariable::psi_dbm;
  std::vector<double> sweep_values;
  std::vector<AlgorithmSpec> algorithms;
  int num_trials = 1;
  std::uint64_t master_seed = 1;
  std::string output_dir;

  /// Throws std::invalid_argument on empty value/algorithm lists,
  /// num_trials < 1, or non-integral codebook-size sweep values.
  void validate() const;
};

/// Parses the JSON document: {"base": {...RawConfig keys...}, "sweep": "...",
/// "values": [...], "algorithms": [{"algorithm": "...", ...option keys...}],
/// "num_trials": N, "seed": S, "output": "dir"}. Missing keys keep defaults.
ExperimentSpec parse_experiment_spec(const std::string& json_text);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string algorithm;
  double power_mw = 0.0;
  double power_dbm = 0.0;
  bool feasible = false;
  int iterations = 0;
  double wall_ms = 0.0;
  int l_opt = -1;     // selected codebook index, -1 when not applicable
  double beta = 0.0;  // selected power scale, 0 when not applicable
};

/// Field-wise equality ignoring wall_ms, which is the only timing-dependent
/// entry of a record.
bool same_outcome(const TrialRecord& a, const TrialRecord& b);

struct RunOptions {
  int workers = 1;
};

/// Runs every (sweep value, trial, algorithm) combination. Channels are drawn
/// once per (sweep value, trial) from seed mix(master, trial) and shared by all
/// algorithms; trials run on a worker pool and records are merged in the
/// deterministic (sweep value, trial, algorithm) order.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec,
                                        const RunOptions& run = {});

struct SummaryRow {
  double sweep_value = 0.0;
  std::string algorithm;
  int trials = 0;
  int feasible_trials = 0;
  double feasibility_rate = 0.0;
  bool has_power = false;         // false when no trial was feasible
  double mean_power_dbm = 0.0;    // mean over feasible trials, dBm domain
  double ci_half_width_dbm = 0.0; // normal-approximation 95% interval
  double mean_power_mw = 0.0;     // linear-domain mean, for reference
};

/// Per (sweep value, algorithm) aggregation, order-invariant in the records.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

/// Header: trial,seed,sweep,algorithm,power_mw,power_dbm,feasible,iterations,
/// wall_ms,l_opt,beta. Doubles are written round-trip exact.
std::string records_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_csv(const std::string& csv);

std::string summaries_to_json(const std::vector<SummaryRow>& rows);

/// Writes records.csv, summary.json, and per-curve two-column series files
/// (<algorithm>_power.csv, <algorithm>_feasibility.csv) under dir.
/// Throws std::runtime_error when the directory cannot be written.
void emit(const std::vector<TrialRecord>& records, const std::vector<SummaryRow>& rows,
          const std::string& dir);

}  // namespace swipt::harness
