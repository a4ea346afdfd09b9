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

#ifndef PCQR_VERIFY_H_
#define PCQR_VERIFY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcqr/engine.h"
#include "pcqr/mechanisms.h"

namespace pcqr {

// Pearson chi-square goodness of fit. Cells with expected count below 5 are
// pooled into one cell before the statistic is formed.
struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
};

ChiSquareResult ChiSquareTest(std::span<const std::size_t> observed,
                              std::span<const double> probabilities);

// The 20 fixed exponential-mechanism instances (at most 10 candidates each).
// Instance 0 is errors (0, 0.2, 0.5) with n' = 10 and epsilon 1.
std::vector<ScoredCandidateSet> EmTestInstances();

struct EmCheck {
  std::vector<double> frequencies;
  std::vector<double> exact;
  ChiSquareResult chi_square;
};

// Samples `draws` selections from `sampled` and tests them against the exact
// distribution of `reference` (the two differ only in mutation tests).
EmCheck CheckEmFrequencies(const ScoredCandidateSet& sampled,
                           const ScoredCandidateSet& reference,
                           std::size_t draws, RandomSource& rng);

// Uniform convergence of disagreement rates for thresholds under the uniform
// marginal: per trial, draw n_o points and take the largest
// |expected - empirical| disagreement over a fixed grid of threshold pairs.
struct UniformConvergenceResult {
  std::size_t sample_size = 0;  // n_o
  std::size_t trials = 0;
  std::size_t trials_within = 0;  // sup deviation <= alpha
  double worst_deviation = 0.0;
};

// n_o = ceil(50 (d ln(1/a) + ln(1/b')) / a^2).
std::size_t UniformConvergenceSampleSize(int vc_dimension, double alpha,
                                         double beta_prime);

UniformConvergenceResult CheckUniformConvergence(double alpha,
                                                 double beta_prime,
                                                 std::size_t trials,
                                                 std::size_t grid_pairs,
                                                 std::uint64_t seed);

// k blocks of 2 * floor(size / (k + 1)) records where neighbours share half
// their records. Only for mutation testing of the influence probe.
std::vector<Block> OverlappingBlocks(std::size_t size, std::size_t k);

// Coupled neighbouring runs: two training sets that differ in one record,
// identical block layout, vote counts compared on a query grid. With
// disjoint blocks the per-query L1 difference of (ct(0), ct(1)) is at most 2.
struct InfluenceProbeResult {
  std::size_t runs = 0;
  std::size_t queries_checked = 0;
  std::size_t max_l1 = 0;
  std::size_t violating_runs = 0;  // runs with some query above 2
};

InfluenceProbeResult ProbeSingleRecordInfluence(std::size_t runs,
                                                std::uint64_t seed,
                                                bool overlapping_blocks = false);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20260101;
  bool corrupt_em_sensitivity = false;  // mutation: EM run with half the sensitivity
  bool overlapping_blocks = false;      // mutation: ensemble blocks share records
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
};

// Built-in suite: EM chi-square, uniform convergence of disagreement rates,
// single-record influence, Sauer bounds and relabel realizability. Failed
// checks carry the offending instance in `detail`.
VerifyReport RunVerifySuite(const VerifyOptions& options = {});

}  // namespace pcqr

#endif  // PCQR_VERIFY_H_
