//
// Copyright 2026 The PCQR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// pcqr: command-line harness.
//
//   pcqr run --config exp.json --out results/ [--trace] [--trace-noise]
//   pcqr sweep --grid grid.json [--out sweep.csv]
//   pcqr verify [--seed N]
//
// PCQR_THREADS sets the worker count for run and sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcqr/config.h"
#include "pcqr/errors.h"
#include "pcqr/harness.h"
#include "pcqr/verify.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitInfeasible = 3;

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pcqr::InvalidArgument("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw pcqr::InvalidArgument(path + ": " + e.what());
  }
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int Run(const std::string& config_path, const std::string& out_dir,
        bool trace, bool trace_noise) {
  const pcqr::ExperimentConfig config =
      pcqr::ExperimentConfig::FromJson(ReadJsonFile(config_path));
  const std::size_t threads = pcqr::ThreadsFromEnvironment();

  std::string traces;
  const pcqr::TraceOptions options{trace, trace_noise};
  const auto results = pcqr::RunTrials(
      config, threads, trace || trace_noise ? &traces : nullptr, options);
  const pcqr::SummaryStats stats = pcqr::Summarize(results, config.accuracy.alpha);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  if (trace || trace_noise) WriteFile(dir / "traces.jsonl", traces);
  std::ostringstream csv;
  pcqr::WriteTrialCsv(results, csv);
  WriteFile(dir / "results.csv", csv.str());
  WriteFile(dir / "summary.json", stats.ToJson().dump(2) + "\n");
  WriteFile(dir / "manifest.json",
            pcqr::RunManifest(config, results).dump(2) + "\n");

  std::cout << stats.ToJson().dump(2) << "\n";
  return 0;
}

int Sweep(const std::string& grid_path, const std::string& out_path) {
  const pcqr::SweepGrid grid = pcqr::SweepGrid::FromJson(ReadJsonFile(grid_path));
  const pcqr::SweepReport report =
      pcqr::RunSweep(grid, pcqr::ThreadsFromEnvironment());
  if (out_path.empty()) {
    pcqr::WriteSweepCsv(report.cells, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    pcqr::WriteSweepCsv(report.cells, out);
  }
  std::cerr << "monotonicity: " << report.monotonicity.ToJson().dump() << "\n";
  std::size_t failed = 0;
  for (const auto& cell : report.cells) failed += !cell.error.empty();
  if (failed > 0) std::cerr << failed << " cell(s) failed\n";
  return 0;
}

int Verify(const pcqr::VerifyOptions& options) {
  const pcqr::VerifyReport report = pcqr::RunVerifySuite(options);
  for (const auto& check : report.checks) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": "
              << check.detail << "\n";
  }
  return report.passed() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private classification-query release harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "pcqr-out";
  bool trace = false, trace_noise = false;
  CLI::App* run = app.add_subcommand("run", "Run the trials of one config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_flag("--trace", trace, "Write per-query trace lines");
  run->add_flag("--trace-noise", trace_noise, "Also log every Laplace draw");

  std::string grid_path, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("--grid", grid_path, "Grid file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

  pcqr::VerifyOptions verify_options;
  CLI::App* verify = app.add_subcommand("verify", "Run the built-in verification suite");
  verify->add_option("--seed", verify_options.seed, "Suite seed");
  verify->add_flag("--corrupt-em-sensitivity", verify_options.corrupt_em_sensitivity)
      ->group("");
  verify->add_flag("--overlapping-blocks", verify_options.overlapping_blocks)
      ->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return Run(config_path, out_dir, trace, trace_noise);
    if (*sweep) return Sweep(grid_path, sweep_out);
    return Verify(verify_options);
  } catch (const pcqr::InfeasibleParameters& e) {
    std::cerr << "infeasible: " << e.what();
    if (e.required_n() > 0) std::cerr << " (minimal feasible n = " << e.required_n() << ")";
    std::cerr << "\n";
    return kExitInfeasible;
  } catch (const pcqr::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
