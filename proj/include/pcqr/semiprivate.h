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

#ifndef PCQR_SEMIPRIVATE_H_
#define PCQR_SEMIPRIVATE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcqr/core.h"
#include "pcqr/dataset.h"
#include "pcqr/engine.h"
#include "pcqr/hypothesis.h"
#include "pcqr/random.h"

namespace pcqr {

// Feature vectors of already-answered queries. No noise is spent on their
// account.
struct PublicUnlabeledSet {
  UnlabeledDataset points;
};

// Cover of the family built from the distinct public points: one canonical
// representative per dichotomy on them.
DichotomyCover BuildCover(const HypothesisFamily& family,
                          const PublicUnlabeledSet& t_pub);

struct CoverLearnerResult {
  Hypothesis h_priv = Hypothesis::Threshold(0.0);
  std::size_t cover_size = 0;
};

// Semi-private learner: exponential mechanism over the public cover with
// score -EmpiricalError(h, s), privacy parameter `epsilon` and sensitivity
// 1/|s|.
CoverLearnerResult SsppLearn(const LabeledDataset& s,
                             const PublicUnlabeledSet& t_pub,
                             const HypothesisFamily& family, double epsilon,
                             RandomSource& rng);

// ceil(32 (d ln(1/a) + ln(1/b)) / a): how many answered queries the
// universal wrapper collects before switching to the cover learner.
std::size_t PublicSetSize(int vc_dimension, const AccuracyTarget& accuracy);

// Smallest private sample size for RunUniversal. Only min(m_o, m) queries
// reach the agnostic pipeline, so the value is constant once m >= m_o.
std::size_t UniversalMinimalFeasibleN(const HypothesisFamily& family,
                                      const PrivacyBudget& budget,
                                      const AccuracyTarget& accuracy,
                                      std::size_t m, double scale_factor = 1.0);

struct UniversalRun {
  std::size_t m_o = 0;
  std::size_t phase_switch_index = 0;  // first index answered by h_priv
  PcqrRun first_phase;
  std::optional<CoverLearnerResult> learner;
  std::vector<AnswerRecord> answers;
};

// Answers the first min(m_o, m) queries with the agnostic pipeline. When the
// stream is longer, those query points become the public set, h_priv is
// learned once, and every later query is answered by h_priv with no further
// noise. The private sample requirement depends only on min(m_o, m).
UniversalRun RunUniversal(const LabeledDataset& s,
                          std::span<const Feature> queries,
                          const HypothesisFamily& family,
                          const Learner& learner, const PrivacyBudget& budget,
                          const AccuracyTarget& accuracy,
                          const RandomSource& rng,
                          const PcqrOptions& options = {});

}  // namespace pcqr

#endif  // PCQR_SEMIPRIVATE_H_
