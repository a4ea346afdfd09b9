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

#ifndef PCQR_HARNESS_H_
#define PCQR_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcqr/config.h"
#include "pcqr/dataset.h"
#include "pcqr/hypothesis.h"
#include "pcqr/random.h"

namespace pcqr {

// n i.i.d. draws from D: x from the marginal, label truth(x) flipped with
// probability noise_rate.
LabeledDataset GenSynthetic(const SyntheticDistribution& d, std::size_t n,
                            RandomSource& rng);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::kAgnostic;
  double avg_error = 0.0;
  double excess = 0.0;  // avg_error - gamma; relabel excess in relabel-only mode
  std::size_t unstable_count = 0;
  std::optional<std::size_t> halted_at;
  std::optional<double> tail_error;  // universal mode, queries after the switch
  nlohmann::json parameters;         // derived-parameter snapshot
  double elapsed_seconds = 0.0;      // not part of equality

  nlohmann::json ToJson() const;
  friend bool operator==(const TrialResult& a, const TrialResult& b);
};

// Appends trace lines (JSON, one per line) to `out`: one object per query
// with keys trial, j, x, y_true, y_priv, stable, post_halt, c, dist; with
// `noise` set, one {"event": "noise", ...} line per Laplace draw; and a
// closing {"event": "summary", ...} line.
struct TraceOptions {
  bool queries = true;
  bool noise = false;
};

// Runs trial `trial` of `config`. The result and trace are pure functions of
// (config, trial). Algorithms only see feature points of the query stream;
// hidden labels are used for scoring alone. Throws InfeasibleParameters
// with the minimal feasible n when the configuration cannot run.
TrialResult RunTrial(const ExperimentConfig& config, std::size_t trial,
                     std::string* trace = nullptr,
                     const TraceOptions& trace_options = {});

// Degree of parallelism from PCQR_THREADS, defaulting to the core count.
std::size_t ThreadsFromEnvironment();

// Runs config.trials trials on a pool of `threads` workers. Results and the
// concatenated trace come back in trial-index order.
std::vector<TrialResult> RunTrials(const ExperimentConfig& config,
                                   std::size_t threads,
                                   std::string* traces = nullptr,
                                   const TraceOptions& trace_options = {});

struct SummaryStats {
  std::size_t trials = 0;
  double mean_error = 0.0;
  double mean_excess = 0.0;
  double median_excess = 0.0;
  double q10_excess = 0.0;
  double q90_excess = 0.0;
  double fraction_within_alpha = 0.0;  // trials with excess <= alpha
  std::size_t min_unstable = 0;
  double median_unstable = 0.0;
  std::size_t max_unstable = 0;
  std::size_t halted_trials = 0;

  nlohmann::json ToJson() const;
  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

// Independent of the order of `results`.
SummaryStats Summarize(std::span<const TrialResult> results, double alpha);

// Run manifest: seed, schema version, config, and the canonical versus
// scaled constants of trial 0's parameter snapshot.
nlohmann::json RunManifest(const ExperimentConfig& config,
                           std::span<const TrialResult> results);

void WriteTrialCsv(std::span<const TrialResult> results, std::ostream& out);

// Grid over {n, m, alpha, gamma}; empty axes keep the base value.
struct SweepGrid {
  ExperimentConfig base;
  std::vector<std::size_t> n;
  std::vector<std::size_t> m;
  std::vector<double> alpha;
  std::vector<double> gamma;

  std::vector<ExperimentConfig> Cells() const;

  // {"base": {config}, "grid": {"n": [...], "m": [...], ...}}
  static SweepGrid FromJson(const nlohmann::json& j);
};

struct SweepCell {
  ExperimentConfig config;
  std::optional<SummaryStats> stats;
  std::string error;  // set when the cell failed
  std::size_t required_n = 0;
};

struct MonotonicityReport {
  std::size_t groups = 0;
  std::size_t inversions = 0;  // adjacent n-steps where median excess rose
  nlohmann::json ToJson() const;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  MonotonicityReport monotonicity;
};

// Runs every cell; failures are recorded per cell and the sweep continues.
SweepReport RunSweep(const SweepGrid& grid, std::size_t threads);

// Median excess against n within each group of cells sharing (m, alpha,
// gamma), counting adjacent increases.
MonotonicityReport CheckMonotonicityInN(std::span<const SweepCell> cells);

void WriteSweepCsv(std::span<const SweepCell> cells, std::ostream& out);

}  // namespace pcqr

#endif  // PCQR_HARNESS_H_
