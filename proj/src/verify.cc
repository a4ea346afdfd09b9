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

#include "pcqr/verify.h"

#include <algorithm>
#include <bit>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcqr/harness.h"
#include "pcqr/hypothesis.h"
#include "pcqr/relabel.h"

namespace pcqr {
namespace {

constexpr double kMinExpectedCount = 5.0;
constexpr double kChiSquareMinP = 1e-3;

ScoredCandidateSet InstanceFromErrors(const std::vector<double>& errors,
                                      std::size_t n_prime, double epsilon) {
  ScoredCandidateSet set;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    set.candidates.push_back(
        Hypothesis::Threshold(static_cast<double>(i) /
                              static_cast<double>(errors.size())));
    set.scores.push_back(-errors[i]);
  }
  set.sensitivity = 1.0 / static_cast<double>(n_prime);
  set.epsilon = epsilon;
  return set;
}

std::string Join(std::span<const double> values) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ", ";
    out << values[i];
  }
  out << ']';
  return out.str();
}

// Largest set of tokens shattered by the tables, by brute force.
int BruteForceVcDimension(std::size_t domain_size,
                          const std::vector<std::vector<Label>>& tables) {
  int best = 0;
  for (std::uint32_t subset = 1; subset < (1u << domain_size); ++subset) {
    const int size = std::popcount(subset);
    if (size <= best) continue;
    std::vector<bool> seen(1u << size, false);
    for (const auto& t : tables) {
      std::uint32_t pattern = 0;
      int bit = 0;
      for (std::size_t x = 0; x < domain_size; ++x) {
        if (subset & (1u << x)) {
          pattern |= static_cast<std::uint32_t>(ToInt(t[x])) << bit;
          ++bit;
        }
      }
      seen[pattern] = true;
    }
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      best = size;
    }
  }
  return best;
}

CheckResult CheckEm(const VerifyOptions& options) {
  CheckResult result{"em_chi_square", true, ""};
  RandomSource rng = RandomSource(options.seed).Child("em");
  const auto instances = EmTestInstances();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    ScoredCandidateSet sampled = instances[i];
    if (options.corrupt_em_sensitivity) sampled.sensitivity /= 2.0;
    const EmCheck check = CheckEmFrequencies(sampled, instances[i], 100000, rng);
    if (check.chi_square.p_value <= kChiSquareMinP) {
      result.passed = false;
      result.detail += "instance " + std::to_string(i) + ": scores " +
                       Join(instances[i].scores) + " exact " + Join(check.exact) +
                       " observed " + Join(check.frequencies) + " p=" +
                       std::to_string(check.chi_square.p_value) + "; ";
    }
  }
  if (result.passed) {
    result.detail = std::to_string(instances.size()) + " instances, p > 0.001";
  }
  return result;
}

CheckResult CheckClaim(const VerifyOptions& options) {
  const UniformConvergenceResult r =
      CheckUniformConvergence(0.2, 0.1, 100, 200, options.seed);
  CheckResult result{"uniform_convergence", r.trials_within >= 90, ""};
  result.detail = "n_o=" + std::to_string(r.sample_size) + " within=" +
                  std::to_string(r.trials_within) + "/" +
                  std::to_string(r.trials) +
                  " worst=" + std::to_string(r.worst_deviation);
  return result;
}

CheckResult CheckInfluence(const VerifyOptions& options) {
  const InfluenceProbeResult r =
      ProbeSingleRecordInfluence(100, options.seed, options.overlapping_blocks);
  CheckResult result{"single_record_influence", r.violating_runs == 0, ""};
  result.detail = "runs=" + std::to_string(r.runs) +
                  " max_l1=" + std::to_string(r.max_l1) +
                  " violating_runs=" + std::to_string(r.violating_runs);
  return result;
}

CheckResult CheckSauer(const VerifyOptions& options) {
  CheckResult result{"sauer_bounds", true, ""};
  RandomSource rng = RandomSource(options.seed).Child("sauer");
  auto fail = [&](const std::string& what) {
    result.passed = false;
    result.detail += what + "; ";
  };
  for (std::size_t n = 1; n <= 25; ++n) {
    UnlabeledDataset u;
    for (std::size_t i = 0; i < n; ++i) u.points.push_back(rng.Uniform());
    for (const HypothesisFamily& family :
         {HypothesisFamily::Thresholds(), HypothesisFamily::Intervals()}) {
      const int d = family.vc_dimension();
      try {
        const DichotomyCover cover = EnumerateDichotomies(family, u);
        const std::size_t expected =
            d == 1 ? n + 1 : n * (n + 1) / 2 + 1;
        if (cover.size() != expected) {
          fail(std::string(FamilyKindName(family.kind())) + " n=" +
               std::to_string(n) + " count=" + std::to_string(cover.size()));
        }
        if (n >= static_cast<std::size_t>(d) &&
            static_cast<double>(cover.size()) > SauerExponentialBound(n, d)) {
          fail("exponential Sauer bound violated at n=" + std::to_string(n));
        }
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
  }
  // Random finite families, registered with their brute-force VC dimension.
  for (int f = 0; f < 20; ++f) {
    const std::size_t domain = 8;
    std::vector<std::vector<Label>> tables(16, std::vector<Label>(domain));
    for (auto& t : tables) {
      for (auto& y : t) y = LabelFromBool(rng.Bernoulli(0.5));
    }
    const int d = std::max(1, BruteForceVcDimension(domain, tables));
    try {
      const HypothesisFamily family =
          HypothesisFamily::FiniteExplicit(domain, tables, d);
      UnlabeledDataset u;
      for (std::size_t x = 0; x < domain; ++x) u.points.push_back(static_cast<double>(x));
      const DichotomyCover cover = EnumerateDichotomies(family, u);
      if (static_cast<double>(cover.size()) > SauerBound(domain, d)) {
        fail("finite family " + std::to_string(f) + " exceeds Sauer bound");
      }
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (result.passed) result.detail = "thresholds, intervals n<=25; 20 finite families";
  return result;
}

CheckResult CheckRealizability(const VerifyOptions& options) {
  CheckResult result{"relabel_realizability", true, ""};
  const double gammas[] = {0.1, 0.2, 0.3};
  for (std::size_t run = 0; run < 200; ++run) {
    RandomSource rng = RandomSource(options.seed).Child("realizable", run);
    const bool intervals = run % 4 == 3;
    SyntheticDistribution d;
    d.truth = intervals ? Hypothesis::Interval(0.3, 0.7)
                        : Hypothesis::Threshold(rng.Uniform());
    d.noise_rate = gammas[run % 3];
    const HypothesisFamily family = intervals ? HypothesisFamily::Intervals()
                                              : HypothesisFamily::Thresholds();
    const std::size_t n = 5 + rng.UniformInt(intervals ? 60 : 300);
    const LabeledDataset s = GenSynthetic(d, n, rng);
    const RelabelResult r = Relabel(s, family, rng);
    const double post = EmpiricalError(r.chosen, r.relabeled);
    if (post != 0.0) {
      result.passed = false;
      result.detail += "run " + std::to_string(run) + " chosen " +
                       r.chosen.Describe() + " error " + std::to_string(post) + "; ";
    }
  }
  if (result.passed) result.detail = "200 agnostic inputs, zero post-relabel error";
  return result;
}

}  // namespace

ChiSquareResult ChiSquareTest(std::span<const std::size_t> observed,
                              std::span<const double> probabilities) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw InvalidArgument("ChiSquareTest: observed/probabilities mismatch");
  }
  double total = 0.0;
  for (std::size_t o : observed) total += static_cast<double>(o);

  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double pooled_observed = 0.0, pooled_expected = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = probabilities[i] * total;
    if (expected < kMinExpectedCount) {
      pooled_observed += static_cast<double>(observed[i]);
      pooled_expected += expected;
    } else {
      cells.emplace_back(static_cast<double>(observed[i]), expected);
    }
  }
  if (pooled_expected > 0.0 || pooled_observed > 0.0) {
    if (pooled_expected >= kMinExpectedCount || cells.empty()) {
      cells.emplace_back(pooled_observed, pooled_expected);
    } else {
      // Too little mass to stand alone; fold into the smallest cell.
      auto smallest = std::min_element(
          cells.begin(), cells.end(),
          [](const auto& a, const auto& b) { return a.second < b.second; });
      smallest->first += pooled_observed;
      smallest->second += pooled_expected;
    }
  }

  ChiSquareResult result;
  if (cells.size() < 2) return result;
  for (const auto& [o, e] : cells) {
    if (e <= 0.0) {
      if (o > 0.0) {
        result.statistic = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        result.degrees_of_freedom = cells.size() - 1;
        return result;
      }
      continue;
    }
    result.statistic += (o - e) * (o - e) / e;
  }
  result.degrees_of_freedom = cells.size() - 1;
  const boost::math::chi_squared dist(
      static_cast<double>(result.degrees_of_freedom));
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

std::vector<ScoredCandidateSet> EmTestInstances() {
  std::vector<ScoredCandidateSet> instances;
  instances.push_back(InstanceFromErrors({0.0, 0.2, 0.5}, 10, 1.0));
  instances.push_back(InstanceFromErrors({0.3, 0.3, 0.3}, 10, 1.0));
  instances.push_back(InstanceFromErrors({0.1, 0.4}, 20, 0.5));
  instances.push_back(InstanceFromErrors({0.25}, 8, 1.0));
  RandomSource rng(0x5eed);
  const std::size_t n_primes[] = {10, 20, 40};
  const double epsilons[] = {0.5, 1.0, 2.0};
  while (instances.size() < 20) {
    const std::size_t i = instances.size();
    const std::size_t candidates = 2 + i % 9;
    const std::size_t n_prime = n_primes[i % 3];
    std::vector<double> errors;
    for (std::size_t c = 0; c < candidates; ++c) {
      errors.push_back(static_cast<double>(rng.UniformInt(7)) /
                       static_cast<double>(n_prime));
    }
    instances.push_back(InstanceFromErrors(errors, n_prime, epsilons[(i / 3) % 3]));
  }
  return instances;
}

EmCheck CheckEmFrequencies(const ScoredCandidateSet& sampled,
                           const ScoredCandidateSet& reference,
                           std::size_t draws, RandomSource& rng) {
  std::vector<std::size_t> counts(sampled.candidates.size(), 0);
  for (std::size_t i = 0; i < draws; ++i) {
    ++counts[ExponentialMechanismIndex(sampled, rng)];
  }
  EmCheck check;
  check.exact = ExactEmDistribution(reference);
  for (std::size_t c : counts) {
    check.frequencies.push_back(static_cast<double>(c) / static_cast<double>(draws));
  }
  check.chi_square = ChiSquareTest(counts, check.exact);
  return check;
}

std::size_t UniformConvergenceSampleSize(int vc_dimension, double alpha,
                                         double beta_prime) {
  return static_cast<std::size_t>(std::ceil(
      50.0 * (vc_dimension * std::log(1.0 / alpha) + std::log(1.0 / beta_prime)) /
      (alpha * alpha)));
}

UniformConvergenceResult CheckUniformConvergence(double alpha,
                                                 double beta_prime,
                                                 std::size_t trials,
                                                 std::size_t grid_pairs,
                                                 std::uint64_t seed) {
  UniformConvergenceResult result;
  result.sample_size = UniformConvergenceSampleSize(1, alpha, beta_prime);
  result.trials = trials;
  const Marginal uniform = Marginal::Uniform();
  RandomSource grid_rng = RandomSource(seed).Child("claim-grid");
  std::vector<std::pair<Hypothesis, Hypothesis>> pairs;
  std::vector<double> expected;
  for (std::size_t i = 0; i < grid_pairs; ++i) {
    pairs.emplace_back(Hypothesis::Threshold(grid_rng.Uniform()),
                       Hypothesis::Threshold(grid_rng.Uniform()));
    expected.push_back(
        ExpectedDisagreement(pairs.back().first, pairs.back().second, uniform));
  }
  for (std::size_t t = 0; t < trials; ++t) {
    RandomSource rng = RandomSource(seed).Child("claim-sample", t);
    UnlabeledDataset u;
    u.points.reserve(result.sample_size);
    for (std::size_t i = 0; i < result.sample_size; ++i) {
      u.points.push_back(uniform.Sample(rng));
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double empirical =
          EmpiricalDisagreement(pairs[i].first, pairs[i].second, u);
      sup = std::max(sup, std::fabs(empirical - expected[i]));
    }
    result.worst_deviation = std::max(result.worst_deviation, sup);
    result.trials_within += sup <= alpha;
  }
  return result;
}

std::vector<Block> OverlappingBlocks(std::size_t size, std::size_t k) {
  const std::size_t half = size / (k + 1);
  if (half == 0) throw InfeasibleParameters("OverlappingBlocks: too few records");
  std::vector<Block> blocks(k);
  for (std::size_t j = 0; j < k; ++j) blocks[j] = {j * half, (j + 2) * half};
  return blocks;
}

InfluenceProbeResult ProbeSingleRecordInfluence(std::size_t runs,
                                                std::uint64_t seed,
                                                bool overlapping_blocks) {
  InfluenceProbeResult result;
  result.runs = runs;
  const HypothesisFamily family = HypothesisFamily::Thresholds();
  const Learner learner = ErmLearner(family);
  for (std::size_t run = 0; run < runs; ++run) {
    RandomSource rng = RandomSource(seed).Child("influence", run);
    // Even runs: realizable data with sizeable blocks. Odd runs: tiny blocks
    // of noisy data, where one record decides a block's hypothesis.
    const bool tiny = run % 2 == 1;
    const std::size_t k = tiny ? 30 : 20;
    const std::size_t block = tiny ? 1 + rng.UniformInt(2) : 50;
    SyntheticDistribution d;
    d.truth = Hypothesis::Threshold(rng.Uniform());
    d.noise_rate = tiny ? 0.3 : 0.0;
    const std::size_t size = overlapping_blocks ? (k + 1) * block : k * block;
    const LabeledDataset s = GenSynthetic(d, size, rng);
    LabeledDataset neighbour = s;
    const std::size_t changed = rng.UniformInt(size);
    neighbour.items[changed] = {rng.Uniform(), Flip(s.items[changed].y)};

    const std::vector<Block> blocks = overlapping_blocks
                                          ? OverlappingBlocks(size, k)
                                          : PartitionBlocks(size, k);
    const auto first = TrainEnsemble(s, blocks, learner);
    const auto second = TrainEnsemble(neighbour, blocks, learner);

    std::vector<Feature> queries;
    for (int q = 0; q <= 200; ++q) queries.push_back(q / 200.0);
    queries.push_back(s.items[changed].x);
    queries.push_back(neighbour.items[changed].x);

    bool violated = false;
    for (Feature x : queries) {
      const VoteCount a = CountVotes(first, x);
      const VoteCount b = CountVotes(second, x);
      const std::size_t l1 =
          (a.zeros > b.zeros ? a.zeros - b.zeros : b.zeros - a.zeros) +
          (a.ones > b.ones ? a.ones - b.ones : b.ones - a.ones);
      result.max_l1 = std::max(result.max_l1, l1);
      violated = violated || l1 > 2;
      ++result.queries_checked;
    }
    result.violating_runs += violated;
  }
  return result;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

VerifyReport RunVerifySuite(const VerifyOptions& options) {
  VerifyReport report;
  report.checks.push_back(CheckEm(options));
  report.checks.push_back(CheckClaim(options));
  report.checks.push_back(CheckInfluence(options));
  report.checks.push_back(CheckSauer(options));
  report.checks.push_back(CheckRealizability(options));
  return report;
}

}  // namespace pcqr
