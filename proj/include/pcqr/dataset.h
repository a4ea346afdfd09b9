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

#ifndef PCQR_DATASET_H_
#define PCQR_DATASET_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pcqr/core.h"
#include "pcqr/errors.h"
#include "pcqr/random.h"

namespace pcqr {

struct Example {
  Feature x = 0.0;
  Label y = Label::kZero;

  friend bool operator==(const Example&, const Example&) = default;
};

enum class Origin { kRaw, kSubsampled, kRelabeled, kResampled };

const char* OriginName(Origin origin);

struct UnlabeledDataset {
  std::vector<Feature> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Ordered multiset of examples. Index i addresses record i; duplicates are
// allowed (resampling creates them).
struct LabeledDataset {
  std::vector<Example> items;
  Origin origin = Origin::kRaw;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const Example& operator[](std::size_t i) const { return items[i]; }

  UnlabeledDataset Unlabeled() const;
};

// Uniformly random subset of `n_prime` distinct records (partial
// Fisher-Yates over indices). Record contents are copied unchanged.
LabeledDataset SampleWithoutReplacement(const LabeledDataset& s,
                                        std::size_t n_prime,
                                        RandomSource& rng);

// `count` independent uniform draws from `s`.
LabeledDataset ResampleWithReplacement(const LabeledDataset& s,
                                       std::size_t count, RandomSource& rng);

// Fraction of records the predictor mislabels. `Predictor` is any callable
// Feature -> Label (Hypothesis qualifies).
template <typename Predictor>
double EmpiricalError(const Predictor& h, const LabeledDataset& s) {
  if (s.empty()) throw InvalidArgument("EmpiricalError: empty dataset");
  std::size_t mistakes = 0;
  for (const Example& e : s.items) mistakes += h(e.x) != e.y;
  return static_cast<double>(mistakes) / static_cast<double>(s.size());
}

template <typename Predictor1, typename Predictor2>
double EmpiricalDisagreement(const Predictor1& h1, const Predictor2& h2,
                             const UnlabeledDataset& s) {
  if (s.empty()) throw InvalidArgument("EmpiricalDisagreement: empty dataset");
  std::size_t differ = 0;
  for (Feature x : s.points) differ += h1(x) != h2(x);
  return static_cast<double>(differ) / static_cast<double>(s.size());
}

// CSV with header `x,y`. Features are written in shortest round-trip form,
// so write/read reproduces every double bit-exactly.
void WriteCsv(const LabeledDataset& s, std::ostream& out);
LabeledDataset ReadCsv(std::istream& in);

// Shortest decimal string that parses back to exactly `v`.
std::string FormatDouble(double v);

}  // namespace pcqr

#endif  // PCQR_DATASET_H_
