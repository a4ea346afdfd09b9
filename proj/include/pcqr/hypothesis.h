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

#ifndef PCQR_HYPOTHESIS_H_
#define PCQR_HYPOTHESIS_H_

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcqr/core.h"
#include "pcqr/dataset.h"
#include "pcqr/random.h"

namespace pcqr {

enum class FamilyKind { kThreshold, kInterval, kFiniteExplicit };

const char* FamilyKindName(FamilyKind kind);

// Continuous families are defined on [kDomainMin, kDomainMax]. Canonical
// representatives that must sit above every point use kAboveDomain as the
// upper end of their realizing gap.
inline constexpr double kDomainMin = 0.0;
inline constexpr double kDomainMax = 1.0;
inline constexpr double kAboveDomain = 1.0 + 0x1.0p-20;

// A binary predictor from one of the built-in families.
//   threshold t:      1 iff x >= t
//   interval [a, b]:  1 iff a <= x <= b
//   table #i:         explicit label per token 0..K-1
class Hypothesis {
 public:
  static Hypothesis Threshold(double t);
  static Hypothesis Interval(double a, double b);
  static Hypothesis Table(std::size_t index,
                          std::shared_ptr<const std::vector<Label>> labels);

  FamilyKind kind() const { return kind_; }

  // (t), (a, b) or (index). Compared lexicographically for ERM tie-breaks.
  std::span<const double> parameters() const {
    return {params_.data(), param_count_};
  }

  // Throws InvalidArgument when x lies outside the family's domain.
  Label operator()(Feature x) const;

  // Same as operator() but skips the domain check.
  Label PredictUnchecked(Feature x) const;

  bool InDomain(Feature x) const;

  nlohmann::json ToJson() const;
  std::string Describe() const { return ToJson().dump(); }

  friend bool operator==(const Hypothesis& a, const Hypothesis& b);

 private:
  Hypothesis(FamilyKind kind, std::size_t count, double p0, double p1)
      : kind_(kind), param_count_(count), params_{p0, p1} {}

  FamilyKind kind_;
  std::size_t param_count_;
  std::array<double, 2> params_;
  std::shared_ptr<const std::vector<Label>> table_;
};

Hypothesis HypothesisFromJson(const nlohmann::json& j);

class HypothesisFamily {
 public:
  static HypothesisFamily Thresholds();
  static HypothesisFamily Intervals();

  // Explicit family over tokens 0..domain_size-1. `vc_dimension` is trusted
  // by the Sauer checks, so registration requires
  // 1 <= vc_dimension <= log2(|tables|).
  static HypothesisFamily FiniteExplicit(
      std::size_t domain_size, const std::vector<std::vector<Label>>& tables,
      int vc_dimension);

  FamilyKind kind() const { return kind_; }
  int vc_dimension() const { return vc_dimension_; }
  bool InDomain(Feature x) const;

  // Members of a finite-explicit family; empty for the continuous kinds.
  std::span<const Hypothesis> members() const { return members_; }

  nlohmann::json ToJson() const;

 private:
  HypothesisFamily(FamilyKind kind, int d) : kind_(kind), vc_dimension_(d) {}

  FamilyKind kind_;
  int vc_dimension_;
  std::size_t domain_size_ = 0;
  std::vector<Hypothesis> members_;
};

HypothesisFamily FamilyFromJson(const nlohmann::json& j);

// One canonical representative per dichotomy the family realizes on the
// distinct points of `support`.
struct DichotomyCover {
  std::vector<Hypothesis> representatives;
  UnlabeledDataset support;
  // Sorted distinct support points; the enumeration ran over these.
  std::vector<Feature> distinct;

  std::size_t size() const { return representatives.size(); }
};

// Representatives are canonical: thresholds sit at the midpoint of their
// realizing gap, intervals at the midpoints of both gaps; the lower gap of
// the smallest point starts at kDomainMin and the upper gap of the largest
// ends at kAboveDomain. Finite families keep the lowest-index member per
// dichotomy. Throws std::logic_error if the count exceeds the Sauer bound.
DichotomyCover EnumerateDichotomies(const HypothesisFamily& family,
                                    const UnlabeledDataset& support);

// sum_{i <= d} C(n, i), the exact Sauer-Shelah bound on |Pi_H| over n points.
double SauerBound(std::size_t n, int d);

// The (e n / d)^d form; only a valid bound when n >= d.
double SauerExponentialBound(std::size_t n, int d);

// Empirical error of every hypothesis on `s`. Equal (bit-exact) to calling
// EmpiricalError on each, but thresholds and intervals are scored from a
// sorted copy of `s` in O(log n) each.
std::vector<double> EmpiricalErrors(std::span<const Hypothesis> hypotheses,
                                    const LabeledDataset& s);

// Empirical risk minimizer over the family; among minimizers the
// lexicographically smallest canonical parameter vector wins. This is the
// non-private learner used by the ensemble.
Hypothesis Erm(const HypothesisFamily& family, const LabeledDataset& s);

// Marginal D_X: uniform on [0, 1] or explicit weights on a finite point set.
class Marginal {
 public:
  enum class Kind { kUniform, kDiscrete };

  static Marginal Uniform() { return Marginal(); }
  static Marginal Discrete(std::vector<Feature> points,
                           std::vector<double> weights);

  Kind kind() const { return kind_; }
  std::span<const Feature> points() const { return points_; }
  std::span<const double> probabilities() const { return probabilities_; }

  Feature Sample(RandomSource& rng) const;

  nlohmann::json ToJson() const;

 private:
  Kind kind_ = Kind::kUniform;
  std::vector<Feature> points_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

Marginal MarginalFromJson(const nlohmann::json& j);

// D over X x {0, 1}: x ~ marginal, y = truth(x) flipped with probability
// noise_rate.
struct SyntheticDistribution {
  Marginal marginal;
  Hypothesis truth = Hypothesis::Threshold(0.5);
  double noise_rate = 0.0;

  void Validate() const;
};

// Pr_{x ~ D_X}[h1(x) != h2(x)], exact. Closed form (measure of the symmetric
// difference) for the uniform marginal with threshold/interval hypotheses;
// weighted sum for discrete marginals.
double ExpectedDisagreement(const Hypothesis& h1, const Hypothesis& h2,
                            const Marginal& marginal);
double ExpectedDisagreement(const Hypothesis& h1, const Hypothesis& h2,
                            const SyntheticDistribution& d);

// err(h; D) = (1 - g) dis(h, h*) + g (1 - dis(h, h*)) with g the noise rate.
double ExpectedError(const Hypothesis& h, const SyntheticDistribution& d);

}  // namespace pcqr

#endif  // PCQR_HYPOTHESIS_H_
