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

#include "pcqr/random.h"

#include "pcqr/errors.h"

namespace pcqr {
namespace {

constexpr double kTwoPowMinus53 = 0x1.0p-53;

std::uint64_t HashStage(std::string_view stage) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed)
    : seed_(seed), engine_(MixSeed(seed)) {}

double RandomSource::Uniform() {
  return static_cast<double>(engine_() >> 11) * kTwoPowMinus53;
}

double RandomSource::OpenUniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * kTwoPowMinus53;
}

std::uint64_t RandomSource::UniformInt(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("UniformInt: n must be positive");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

RandomSource RandomSource::Child(std::string_view stage,
                                 std::uint64_t index) const {
  std::uint64_t s = MixSeed(seed_ ^ HashStage(stage));
  s = MixSeed(s ^ MixSeed(index + 0x632be59bd9b4e019ULL));
  return RandomSource(s);
}

}  // namespace pcqr
