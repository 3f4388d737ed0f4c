#include "swipt/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "swipt/ao.hpp"

namespace swipt::harness {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ao_nominal: return "ao_nominal";
    case Algorithm::ao_robust: return "ao_robust";
    case Algorithm::sr_cccp: return "sr_cccp";
    case Algorithm::sr_subgradient: return "sr_subgradient";
    case Algorithm::sr_simplified_nominal: return "sr_simplified_nominal";
    case Algorithm::sr_simplified_robust: return "sr_simplified_robust";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (Algorithm a : {Algorithm::ao_nominal, Algorithm::ao_robust, Algorithm::sr_cccp,
                      Algorithm::sr_subgradient, Algorithm::sr_simplified_nominal,
                      Algorithm::sr_simplified_robust})
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm tag: " + s);
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::psi_dbm: return "psi_dbm";
    case SweepVariable::gamma_db: return "gamma_db";
    case SweepVariable::eta: return "eta";
    case SweepVariable::codebook_size: return "codebook_size";
  }
  return "?";
}

SweepVariable sweep_from_string(const std::string& s) {
  for (SweepVariable v : {SweepVariable::psi_dbm, SweepVariable::gamma_db, SweepVariable::eta,
                          SweepVariable::codebook_size})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown sweep variable: " + s);
}

void ExperimentSpec::validate() const {
  if (sweep_values.empty()) throw std::invalid_argument("sweep value list is empty");
  if (algorithms.empty()) throw std::invalid_argument("algorithm list is empty");
  if (num_trials < 1) throw std::invalid_argument("num_trials must be >= 1");
  for (const auto& a : algorithms) {
    if (a.options.b < 1) throw std::invalid_argument("codebook size must be >= 1");
    if (a.options.init != "identity" && a.options.init != "random")
      throw std::invalid_argument("unknown initializer: " + a.options.init);
  }
  if (sweep == SweepVariable::codebook_size)
    for (double v : sweep_values)
      if (v < 1.0 || v != std::floor(v))
        throw std::invalid_argument("codebook-size sweep values must be integers >= 1");
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  ExperimentSpec spec;
  if (j.contains("base")) spec.base = model::parse_raw_config(j["base"].dump());
  if (j.contains("sweep")) spec.sweep = sweep_from_string(j["sweep"].get<std::string>());
  if (j.contains("values")) spec.sweep_values = j["values"].get<std::vector<double>>();
  if (j.contains("num_trials")) spec.num_trials = j["num_trials"].get<int>();
  if (j.contains("seed")) spec.master_seed = j["seed"].get<std::uint64_t>();
  if (j.contains("output")) spec.output_dir = j["output"].get<std::string>();
  if (j.contains("algorithms")) {
    for (const auto& ja : j["algorithms"]) {
      AlgorithmSpec a;
      a.algorithm = algorithm_from_string(ja.at("algorithm").get<std::string>());
      auto& o = a.options;
      if (ja.contains("init")) o.init = ja["init"].get<std::string>();
      if (ja.contains("b")) o.b = ja["b"].get<int>();
      if (ja.contains("method"))
        o.method = sr::codebook_method_from_string(ja["method"].get<std::string>());
      if (ja.contains("theta")) o.theta = ja["theta"].get<double>();
      if (ja.contains("epsilon")) o.epsilon = ja["epsilon"].get<double>();
      if (ja.contains("delta")) o.delta = ja["delta"].get<double>();
      if (ja.contains("beta0")) o.beta0 = ja["beta0"].get<double>();
      if (ja.contains("ao_max_iters")) o.ao_max_iters = ja["ao_max_iters"].get<int>();
      if (ja.contains("sr_max_iters")) o.sr_max_iters = ja["sr_max_iters"].get<int>();
      if (ja.contains("recovery_trials")) o.recovery_trials = ja["recovery_trials"].get<int>();
      spec.algorithms.push_back(std::move(a));
    }
  }
  spec.validate();
  return spec;
}

bool same_outcome(const TrialRecord& a, const TrialRecord& b) {
  return a.trial == b.trial && a.seed == b.seed && a.sweep_value == b.sweep_value &&
         a.algorithm == b.algorithm && a.power_mw == b.power_mw &&
         a.power_dbm == b.power_dbm && a.feasible == b.feasible &&
         a.iterations == b.iterations && a.l_opt == b.l_opt && a.beta == b.beta;
}

namespace {

TrialRecord run_one(const AlgorithmSpec& alg, const model::ChannelSet& ch,
                    const model::SystemConfig& cfg, std::mt19937_64& rng) {
  TrialRecord rec;
  rec.algorithm = to_string(alg.algorithm);
  const auto& o = alg.options;
  const auto start = std::chrono::steady_clock::now();
  switch (alg.algorithm) {
    case Algorithm::ao_nominal:
    case Algorithm::ao_robust: {
      ao::AoOptions opts;
      opts.delta = o.delta;
      opts.max_iters = o.ao_max_iters;
      opts.recovery_trials = o.recovery_trials;
      const Eigen::MatrixXcd init =
          o.init == "random" ? ao::random_init(cfg.nr, rng) : ao::identity_init(cfg.nr);
      auto out = ao::design_ao(ch, cfg, init, alg.algorithm == Algorithm::ao_robust,
                               opts, rng);
      rec.feasible = out.feasible;
      rec.power_mw = out.feasible ? out.power : 0.0;
      rec.iterations = out.iterations;
      break;
    }
    default: {
      sr::SrOptions opts;
      opts.delta = o.delta;
      opts.max_iters = o.sr_max_iters;
      opts.theta = o.theta;
      opts.epsilon = o.epsilon;
      opts.beta0 = o.beta0;
      opts.recovery_trials = o.recovery_trials;
      const bool robust = alg.algorithm == Algorithm::sr_subgradient ||
                          alg.algorithm == Algorithm::sr_simplified_robust;
      const bool simplified = alg.algorithm == Algorithm::sr_simplified_nominal ||
                              alg.algorithm == Algorithm::sr_simplified_robust;
      auto cb = sr::build_codebook(ch.first_phase, ch.second_estimated, o.b, o.method, &rng);
      auto out = sr::design_sr(ch, cfg, cb, robust, simplified, opts, rng);
      rec.feasible = out.feasible;
      rec.power_mw = out.feasible ? out.power : 0.0;
      rec.iterations = out.iterations;
      rec.l_opt = out.feasible ? out.l_opt : -1;
      rec.beta = out.feasible ? out.beta : 0.0;
      break;
    }
  }
  rec.power_dbm = rec.power_mw > 0.0 ? model::mw_to_dbm(rec.power_mw) : 0.0;
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& run) {
  spec.validate();
  const int n_sweep = static_cast<int>(spec.sweep_values.size());
  const int n_tasks = n_sweep * spec.num_trials;
  std::vector<std::vector<TrialRecord>> task_records(n_tasks);

  auto do_task = [&](int task) {
    const int si = task / spec.num_trials;
    const int trial = task % spec.num_trials;
    const double value = spec.sweep_values[si];

    model::RawConfig raw = spec.base;
    switch (spec.sweep) {
      case SweepVariable::psi_dbm: raw.psi_dbm = value; break;
      case SweepVariable::gamma_db: raw.gamma_db = value; break;
      case SweepVariable::eta: raw.eta = value; break;
      case SweepVariable::codebook_size: break;  // applied per algorithm below
    }
    const auto cfg = model::to_linear_config(raw);
    const std::uint64_t seed = model::mix_seed(spec.master_seed, trial);
    std::mt19937_64 rng_ch(seed);
    const auto ch =
        model::sample_channels(cfg, Eigen::VectorXd::Constant(cfg.k, raw.eta), rng_ch);

    auto& out = task_records[task];
    for (size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      AlgorithmSpec alg = spec.algorithms[ai];
      if (spec.sweep == SweepVariable::codebook_size)
        alg.options.b = static_cast<int>(value);
      // Per-algorithm stream keyed on the tag, so adding or reordering
      // algorithms leaves the randomness of the others untouched.
      std::mt19937_64 rng(model::mix_seed(
          seed, std::hash<std::string>{}(to_string(alg.algorithm))));
      TrialRecord rec = run_one(alg, ch, cfg, rng);
      rec.trial = trial;
      rec.seed = seed;
      rec.sweep_value = value;
      out.push_back(std::move(rec));
    }
  };

  const int workers = std::max(1, run.workers);
  if (workers == 1) {
    for (int task = 0; task < n_tasks; ++task) do_task(task);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n_tasks); ++w)
      pool.emplace_back([&] {
        for (int task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1))
          do_task(task);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<TrialRecord> records;
  records.reserve(static_cast<size_t>(n_tasks) * spec.algorithms.size());
  for (auto& tr : task_records)
    for (auto& r : tr) records.push_back(std::move(r));
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::pair<double, std::string>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[{r.sweep_value, r.algorithm}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [key, recs] : groups) {
    SummaryRow row;
    row.sweep_value = key.first;
    row.algorithm = key.second;
    row.trials = static_cast<int>(recs.size());
    double sum_dbm = 0.0, sum_mw = 0.0;
    for (const auto* r : recs) {
      if (!r->feasible) continue;
      ++row.feasible_trials;
      sum_dbm += r->power_dbm;
      sum_mw += r->power_mw;
    }
    row.feasibility_rate = static_cast<double>(row.feasible_trials) / row.trials;
    if (row.feasible_trials > 0) {
      row.has_power = true;
      row.mean_power_dbm = sum_dbm / row.feasible_trials;
      row.mean_power_mw = sum_mw / row.feasible_trials;
      if (row.feasible_trials > 1) {
        double ss = 0.0;
        for (const auto* r : recs)
          if (r->feasible) {
            const double d = r->power_dbm - row.mean_power_dbm;
            ss += d * d;
          }
        const double sd = std::sqrt(ss / (row.feasible_trials - 1));
        row.ci_half_width_dbm = 1.96 * sd / std::sqrt(double(row.feasible_trials));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "trial,seed,sweep,algorithm,power_mw,power_dbm,feasible,iterations,wall_ms,l_opt,beta\n";
  for (const auto& r : records) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.sweep_value) + ',' + r.algorithm + ',' +
           format_double(r.power_mw) + ',' + format_double(r.power_dbm) + ',' +
           (r.feasible ? "1" : "0") + ',' + std::to_string(r.iterations) + ',' +
           format_double(r.wall_ms) + ',' + std::to_string(r.l_opt) + ',' +
           format_double(r.beta) + '\n';
  }
  return out;
}

std::vector<TrialRecord> records_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw std::invalid_argument("malformed CSV row: " + line);
    TrialRecord r;
    r.trial = std::stoi(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.sweep_value = std::stod(cells[2]);
    r.algorithm = cells[3];
    r.power_mw = std::stod(cells[4]);
    r.power_dbm = std::stod(cells[5]);
    r.feasible = cells[6] == "1";
    r.iterations = std::stoi(cells[7]);
    r.wall_ms = std::stod(cells[8]);
    r.l_opt = std::stoi(cells[9]);
    r.beta = std::stod(cells[10]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string summaries_to_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["sweep_value"] = r.sweep_value;
    o["algorithm"] = r.algorithm;
    o["trials"] = r.trials;
    o["feasible_trials"] = r.feasible_trials;
    o["feasibility_rate"] = r.feasibility_rate;
    if (r.has_power) {
      o["mean_power_dbm"] = r.mean_power_dbm;
      o["ci_half_width_dbm"] = r.ci_half_width_dbm;
      o["mean_power_mw"] = r.mean_power_mw;
    } else {
      o["mean_power_dbm"] = nullptr;
    }
    j.push_back(std::move(o));
  }
  return j.dump(2);
}

void emit(const std::vector<TrialRecord>& records, const std::vector<SummaryRow>& rows,
          const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto write_file = [&](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out.good()) throw std::runtime_error("write failed for " + p.string());
  };
  write_file(fs::path(dir) / "records.csv", records_to_csv(records));
  write_file(fs::path(dir) / "summary.json", summaries_to_json(rows));

  // Plot-ready two-column series, one pair of files per algorithm curve.
  std::map<std::string, std::string> power, rate;
  for (const auto& r : rows) {  // rows are already sorted by (value, algorithm)
    if (r.has_power)
      power[r.algorithm] +=
          format_double(r.sweep_value) + " " + format_double(r.mean_power_dbm) + "\n";
    rate[r.algorithm] +=
        format_double(r.sweep_value) + " " + format_double(r.feasibility_rate) + "\n";
  }
  for (const auto& [alg, text] : power)
    write_file(fs::path(dir) / (alg + "_power.csv"), text);
  for (const auto& [alg, text] : rate)
    write_file(fs::path(dir) / (alg + "_feasibility.csv"), text);
}

}  // namespace swipt::harness
