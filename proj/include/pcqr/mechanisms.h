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

#ifndef PCQR_MECHANISMS_H_
#define PCQR_MECHANISMS_H_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pcqr/dataset.h"
#include "pcqr/errors.h"
#include "pcqr/hypothesis.h"
#include "pcqr/random.h"

namespace pcqr {

// Inverse CDF of Lap(b) at u in (0, 1); u = 0.5 maps to exactly 0.
double LaplaceInverseCdf(double u, double scale);

// Draw from density exp(-|z|/b) / 2b. Throws InvalidArgument if b <= 0.
double SampleLaplace(RandomSource& rng, double scale);

// Candidates with their utility scores for the exponential mechanism.
// Candidate i is selected with probability proportional to
// exp(epsilon * score_i / (2 * sensitivity)).
struct ScoredCandidateSet {
  std::vector<Hypothesis> candidates;
  std::vector<double> scores;
  double sensitivity = 1.0;
  double epsilon = 1.0;

  void Validate() const;
};

// Scores each candidate by -EmpiricalError(h, s) with sensitivity 1/|s|.
ScoredCandidateSet ErrorScoredCandidates(std::vector<Hypothesis> candidates,
                                         const LabeledDataset& s,
                                         double epsilon);

// Gumbel-max sampling in log space; never exponentiates the scores.
std::size_t ExponentialMechanismIndex(const ScoredCandidateSet& set,
                                      RandomSource& rng);

Hypothesis ExponentialMechanism(const ScoredCandidateSet& set,
                                RandomSource& rng);

// Exact selection probabilities via log-sum-exp.
std::vector<double> ExactEmDistribution(const ScoredCandidateSet& set);

// Distance-to-instability test: release `value` only if the noisy distance
// dist + Lap(1 / eps_stab) strictly exceeds `threshold`.
template <typename T>
struct StabilityQuery {
  T value;
  double dist = 0.0;
  double threshold = 0.0;
  double eps_stab = 1.0;
};

// Returns nullopt for the unstable outcome.
template <typename T>
std::optional<T> StabilityTest(const StabilityQuery<T>& q, RandomSource& rng,
                               double* noisy_dist = nullptr) {
  if (!(q.eps_stab > 0.0)) {
    throw InvalidArgument("StabilityTest: eps_stab must be positive");
  }
  if (q.dist < 0.0) throw InvalidArgument("StabilityTest: negative distance");
  const double d_hat = q.dist + SampleLaplace(rng, 1.0 / q.eps_stab);
  if (noisy_dist != nullptr) *noisy_dist = d_hat;
  if (d_hat > q.threshold) return q.value;
  return std::nullopt;
}

}  // namespace pcqr

#endif  // PCQR_MECHANISMS_H_
