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

#include "pcqr/relabel.h"

#include "pcqr/errors.h"
#include "pcqr/mechanisms.h"

namespace pcqr {

RelabelResult Relabel(const LabeledDataset& s_prime,
                      const HypothesisFamily& family, RandomSource& rng) {
  if (s_prime.empty()) throw InvalidArgument("Relabel: empty input");
  DichotomyCover cover = EnumerateDichotomies(family, s_prime.Unlabeled());
  const std::size_t cover_size = cover.size();
  const ScoredCandidateSet set = ErrorScoredCandidates(
      std::move(cover.representatives), s_prime, kRelabelEpsilon);
  const std::size_t chosen = ExponentialMechanismIndex(set, rng);

  RelabelResult result;
  result.chosen = set.candidates[chosen];
  result.cover_size = cover_size;
  result.chosen_input_error = -set.scores[chosen];
  result.relabeled.origin = Origin::kRelabeled;
  result.relabeled.items.reserve(s_prime.size());
  for (const Example& e : s_prime.items) {
    result.relabeled.items.push_back({e.x, result.chosen.PredictUnchecked(e.x)});
  }
  return result;
}

}  // namespace pcqr
