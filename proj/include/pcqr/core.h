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

#ifndef PCQR_CORE_H_
#define PCQR_CORE_H_

#include <cstdint>

namespace pcqr {

// Binary class label. Abstention is an engine outcome, never a label.
enum class Label : std::uint8_t { kZero = 0, kOne = 1 };

constexpr int ToInt(Label y) { return static_cast<int>(y); }
constexpr Label LabelFromBool(bool one) { return one ? Label::kOne : Label::kZero; }
constexpr Label Flip(Label y) { return y == Label::kOne ? Label::kZero : Label::kOne; }

// Feature points are 64-bit reals. The continuous families live on [0, 1];
// finite-explicit families use integer-valued tokens 0..K-1.
using Feature = double;

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-6;

  // Throws InvalidArgument unless epsilon > 0 and 0 < delta < 1.
  void Validate() const;
};

struct AccuracyTarget {
  double alpha = 0.1;
  double beta = 0.1;

  // Throws InvalidArgument unless both lie strictly inside (0, 1).
  void Validate() const;
};

}  // namespace pcqr

#endif  // PCQR_CORE_H_
