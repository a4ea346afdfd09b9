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

#ifndef PCQR_CONFIG_H_
#define PCQR_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "pcqr/core.h"
#include "pcqr/hypothesis.h"

namespace pcqr {

inline constexpr int kSchemaVersion = 1;

enum class Mode { kSubSamp, kAgnostic, kUniversal, kRelabelOnly };

const char* ModeName(Mode mode);
Mode ModeFromName(const std::string& name);

// One experiment. Serialized as a flat JSON object:
//
//   {
//     "schema_version": 1,
//     "mode": "agnostic",          // subsamp | agnostic | universal | relabel-only
//     "family": "threshold",       // threshold | interval | {finite family object}
//     "marginal": "uniform",       // uniform | {"kind": "discrete", ...}
//     "truth": {"family": "threshold", "t": 0.5},
//     "gamma": 0.2,
//     "n": 224000, "m": 2000,
//     "epsilon": 1.0, "delta": 0.01, "alpha": 0.1, "beta": 0.1,
//     "scale_factor": 1.0, "trials": 50, "seed": 1
//   }
//
// Missing keys take the defaults below; unknown keys are rejected.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Mode mode = Mode::kAgnostic;
  HypothesisFamily family = HypothesisFamily::Thresholds();
  SyntheticDistribution distribution;
  std::size_t n = 10000;
  std::size_t m = 100;
  PrivacyBudget budget{1.0, 0.01};
  AccuracyTarget accuracy{0.1, 0.1};
  double scale_factor = 1.0;
  std::size_t trials = 1;
  std::uint64_t seed = 1;

  // Throws InvalidArgument on any out-of-range component.
  void Validate() const;

  nlohmann::json ToJson() const;
  static ExperimentConfig FromJson(const nlohmann::json& j);
};

}  // namespace pcqr

#endif  // PCQR_CONFIG_H_
