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

#ifndef PCQR_RELABEL_H_
#define PCQR_RELABEL_H_

#include <cstddef>

#include "pcqr/dataset.h"
#include "pcqr/hypothesis.h"
#include "pcqr/random.h"

namespace pcqr {

// Privacy parameter of the relabeling exponential mechanism. Fixed; the
// downstream privacy analysis depends on this exact value.
inline constexpr double kRelabelEpsilon = 1.0;

struct RelabelResult {
  LabeledDataset relabeled;  // same features as the input, labels from `chosen`
  Hypothesis chosen = Hypothesis::Threshold(0.0);
  std::size_t cover_size = 0;
  double chosen_input_error = 0.0;  // empirical error of `chosen` on the input
};

// Agnostic-to-realizable reduction: enumerate one representative per
// dichotomy on the input's distinct points, pick one with the exponential
// mechanism (score -EmpiricalError, sensitivity 1/|input|), then relabel the
// input with it. The output is realizable by construction.
RelabelResult Relabel(const LabeledDataset& s_prime,
                      const HypothesisFamily& family, RandomSource& rng);

}  // namespace pcqr

#endif  // PCQR_RELABEL_H_
