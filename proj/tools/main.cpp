// Command-line front end: runs Monte-Carlo experiments from a JSON spec,
// re-summarizes stored record files, and prints scored relay codebooks.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "swipt/harness.hpp"
#include "swipt/model.hpp"
#include "swipt/sr.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, int trials,
            std::int64_t seed, int workers) {
  auto spec = swipt::harness::parse_experiment_spec(read_file(spec_path));
  if (!out_dir.empty()) spec.output_dir = out_dir;
  if (trials > 0) spec.num_trials = trials;
  if (seed >= 0) spec.master_seed = static_cast<std::uint64_t>(seed);
  if (spec.output_dir.empty())
    throw std::invalid_argument("no output directory (spec \"output\" or --out)");
  spec.validate();

  swipt::harness::RunOptions run;
  run.workers = workers;
  auto records = swipt::harness::run_experiment(spec, run);
  auto rows = swipt::harness::summarize(records);
  swipt::harness::emit(records, rows, spec.output_dir);
  int feasible = 0;
  for (const auto& r : records) feasible += r.feasible;
  std::printf("%zu records (%d feasible) written to %s\n", records.size(), feasible,
              spec.output_dir.c_str());
  return 0;
}

int cmd_summarize(const std::string& in_dir) {
  const auto path = std::filesystem::path(in_dir) / "records.csv";
  auto records = swipt::harness::records_from_csv(read_file(path.string()));
  if (records.empty()) throw std::invalid_argument("no records in " + path.string());
  std::cout << swipt::harness::summaries_to_json(swipt::harness::summarize(records))
            << "\n";
  return 0;
}

int cmd_codebook(int nt, int nr, int k, int b, const std::string& method,
                 std::uint64_t seed) {
  swipt::model::RawConfig raw;
  raw.nt = nt;
  raw.nr = nr;
  raw.k = k;
  const auto cfg = swipt::model::to_linear_config(raw);
  std::mt19937_64 rng(seed);
  const auto ch =
      swipt::model::sample_channels(cfg, Eigen::VectorXd::Zero(cfg.k), rng);
  const auto m = swipt::sr::codebook_method_from_string(method);
  const auto cb =
      swipt::sr::build_codebook(ch.first_phase, ch.second_estimated, b, m, &rng);
  for (size_t i = 0; i < cb.permutations.size(); ++i) {
    std::string perm;
    for (int v : cb.permutations[i]) perm += (perm.empty() ? "" : " ") + std::to_string(v);
    std::printf("%zu\t[%s]\t%.8g\n", i, perm.c_str(), cb.scores[i]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiuser relay power-minimization experiments"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, in_dir, method = "sum_max";
  int trials = 0, workers = 1, nt = 4, nr = 4, k = 3, b = 8;
  std::int64_t seed_override = -1;
  std::uint64_t cb_seed = 1;

  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("--spec", spec_path, "JSON experiment spec")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the spec)");
  run->add_option("--trials", trials, "Trial count override");
  run->add_option("--seed", seed_override, "Master seed override");
  run->add_option("--workers", workers, "Worker thread count")->check(CLI::PositiveNumber);

  auto* summ = app.add_subcommand("summarize", "Summarize stored records");
  summ->add_option("--in", in_dir, "Directory holding records.csv")->required();

  auto* cb = app.add_subcommand("codebook", "Print a scored permutation codebook");
  cb->add_option("--nt", nt, "Transmit antennas");
  cb->add_option("--nr", nr, "Relay antennas");
  cb->add_option("--k", k, "Users");
  cb->add_option("--b", b, "Codebook size");
  cb->add_option("--method", method, "sum_max | max_min | random | exhaustive");
  cb->add_option("--seed", cb_seed, "Channel seed");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(spec_path, out_dir, trials, seed_override, workers);
    if (summ->parsed()) return cmd_summarize(in_dir);
    return cmd_codebook(nt, nr, k, b, method, cb_seed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  }
}
