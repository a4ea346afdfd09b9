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

#include "pcqr/semiprivate.h"

#include <algorithm>
#include <cmath>

#include "pcqr/errors.h"
#include "pcqr/mechanisms.h"

namespace pcqr {

DichotomyCover BuildCover(const HypothesisFamily& family,
                          const PublicUnlabeledSet& t_pub) {
  if (t_pub.points.empty()) throw InvalidArgument("BuildCover: empty public set");
  // EnumerateDichotomies already works on the distinct points.
  return EnumerateDichotomies(family, t_pub.points);
}

CoverLearnerResult SsppLearn(const LabeledDataset& s,
                             const PublicUnlabeledSet& t_pub,
                             const HypothesisFamily& family, double epsilon,
                             RandomSource& rng) {
  if (s.empty()) throw InvalidArgument("SsppLearn: empty private dataset");
  if (!(epsilon > 0.0)) throw InvalidArgument("SsppLearn: epsilon must be positive");
  DichotomyCover cover = BuildCover(family, t_pub);
  CoverLearnerResult result;
  result.cover_size = cover.size();
  const ScoredCandidateSet set =
      ErrorScoredCandidates(std::move(cover.representatives), s, epsilon);
  result.h_priv = ExponentialMechanism(set, rng);
  return result;
}

std::size_t PublicSetSize(int vc_dimension, const AccuracyTarget& accuracy) {
  accuracy.Validate();
  const double m_o = 32.0 *
                     (vc_dimension * std::log(1.0 / accuracy.alpha) +
                      std::log(1.0 / accuracy.beta)) /
                     accuracy.alpha;
  return static_cast<std::size_t>(std::ceil(m_o));
}

std::size_t UniversalMinimalFeasibleN(const HypothesisFamily& family,
                                      const PrivacyBudget& budget,
                                      const AccuracyTarget& accuracy,
                                      std::size_t m, double scale_factor) {
  const std::size_t m_o = PublicSetSize(family.vc_dimension(), accuracy);
  return MinimalFeasibleN(budget, accuracy, std::min(m_o, m), scale_factor);
}

UniversalRun RunUniversal(const LabeledDataset& s,
                          std::span<const Feature> queries,
                          const HypothesisFamily& family,
                          const Learner& learner, const PrivacyBudget& budget,
                          const AccuracyTarget& accuracy,
                          const RandomSource& rng,
                          const PcqrOptions& options) {
  if (queries.empty()) throw InvalidArgument("RunUniversal: m must be >= 1");
  UniversalRun run;
  run.m_o = PublicSetSize(family.vc_dimension(), accuracy);
  const std::size_t m_first = std::min(run.m_o, queries.size());
  run.phase_switch_index = m_first;

  run.first_phase = RunAgnosticPcqr(s, queries.first(m_first), family, learner,
                                    budget, accuracy, rng, options);
  run.answers = run.first_phase.answers;
  if (m_first < run.m_o) return run;

  PublicUnlabeledSet t_pub;
  t_pub.points.points.assign(queries.begin(), queries.begin() + run.m_o);
  RandomSource sspp_rng = rng.Child("sspp");
  run.learner = SsppLearn(s, t_pub, family, budget.epsilon, sspp_rng);

  run.answers.reserve(queries.size());
  for (std::size_t j = run.m_o; j < queries.size(); ++j) {
    AnswerRecord record;
    record.index = j;
    record.query = queries[j];
    record.label = run.learner->h_priv(queries[j]);
    record.stable = true;
    record.counter = run.first_phase.unstable_count;
    record.source = AnswerSource::kCoverLearner;
    run.answers.push_back(record);
  }
  return run;
}

}  // namespace pcqr
