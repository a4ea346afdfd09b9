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

#include "pcqr/mechanisms.h"

#include <algorithm>
#include <string>

namespace pcqr {

double LaplaceInverseCdf(double u, double scale) {
  if (!(scale > 0.0)) {
    throw InvalidArgument("Laplace scale must be positive, got " +
                          FormatDouble(scale));
  }
  if (!(u > 0.0 && u < 1.0)) {
    throw InvalidArgument("Laplace inverse CDF needs u in (0, 1)");
  }
  const double centered = u - 0.5;
  if (centered == 0.0) return 0.0;
  const double magnitude = -scale * std::log1p(-2.0 * std::fabs(centered));
  return centered < 0.0 ? -magnitude : magnitude;
}

double SampleLaplace(RandomSource& rng, double scale) {
  if (!(scale > 0.0)) {
    throw InvalidArgument("Laplace scale must be positive, got " +
                          FormatDouble(scale));
  }
  return LaplaceInverseCdf(rng.OpenUniform(), scale);
}

void ScoredCandidateSet::Validate() const {
  if (candidates.empty()) {
    throw InvalidArgument("exponential mechanism: no candidates");
  }
  if (candidates.size() != scores.size()) {
    throw InvalidArgument("exponential mechanism: candidates and scores differ "
                          "in length");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw InvalidArgument("exponential mechanism: sensitivity must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("exponential mechanism: epsilon must be positive");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidArgument("exponential mechanism: non-finite score");
    }
  }
}

ScoredCandidateSet ErrorScoredCandidates(std::vector<Hypothesis> candidates,
                                         const LabeledDataset& s,
                                         double epsilon) {
  ScoredCandidateSet set;
  set.scores = EmpiricalErrors(candidates, s);
  for (double& e : set.scores) e = -e;
  set.candidates = std::move(candidates);
  set.sensitivity = 1.0 / static_cast<double>(s.size());
  set.epsilon = epsilon;
  return set;
}

std::size_t ExponentialMechanismIndex(const ScoredCandidateSet& set,
                                      RandomSource& rng) {
  set.Validate();
  const double coefficient = set.epsilon / (2.0 * set.sensitivity);
  std::size_t best = 0;
  double best_key = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const double gumbel = -std::log(-std::log(rng.OpenUniform()));
    const double key = coefficient * set.scores[i] + gumbel;
    if (key > best_key) {
      best_key = key;
      best = i;
    }
  }
  return best;
}

Hypothesis ExponentialMechanism(const ScoredCandidateSet& set,
                                RandomSource& rng) {
  return set.candidates[ExponentialMechanismIndex(set, rng)];
}

std::vector<double> ExactEmDistribution(const ScoredCandidateSet& set) {
  set.Validate();
  const double coefficient = set.epsilon / (2.0 * set.sensitivity);
  std::vector<double> logits(set.scores.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] = coefficient * set.scores[i];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - top);
  const double log_normalizer = top + std::log(total);
  std::vector<double> probabilities(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probabilities[i] = std::exp(logits[i] - log_normalizer);
  }
  return probabilities;
}

}  // namespace pcqr
