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

#ifndef PCQR_RANDOM_H_
#define PCQR_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace pcqr {

// Deterministic pseudo-random stream. Outputs are a pure function of the seed
// and the call sequence: the engine is mt19937_64 (bit-exact across standard
// libraries) and all real/integer conversions are done here rather than by
// the implementation-defined <random> distributions.
//
// Child streams are derived from the seed alone, never from the current
// state, so a stage's stream does not depend on how much randomness earlier
// stages consumed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();

  // Uniform on the open interval (0, 1).
  double OpenUniform();

  // Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Independent stream keyed by (stage, index).
  RandomSource Child(std::string_view stage, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; exposed for seed derivation in the harness.
std::uint64_t MixSeed(std::uint64_t x);

}  // namespace pcqr

#endif  // PCQR_RANDOM_H_
