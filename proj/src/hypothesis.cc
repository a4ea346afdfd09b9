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

#include "pcqr/hypothesis.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pcqr/errors.h"

namespace pcqr {
namespace {

bool IsToken(Feature x, std::size_t domain_size) {
  return std::isfinite(x) && x >= 0.0 && x == std::floor(x) &&
         x < static_cast<double>(domain_size);
}

bool InUnitDomain(Feature x) {
  return std::isfinite(x) && x >= kDomainMin && x <= kDomainMax;
}

// Point strictly above `lo` and at most `hi`: a threshold here labels `lo`
// with 0 and `hi` with 1.
double LowerGapMidpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

// Point at least `lo` and strictly below `hi`: an interval ending here keeps
// `lo` and excludes `hi`.
double UpperGapMidpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

std::vector<Feature> SortedDistinct(const UnlabeledDataset& u) {
  std::vector<Feature> d = u.points;
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

// Region {x in [0,1] : h(x) = 1} for the continuous kinds, as [lo, hi];
// empty when lo > hi.
std::pair<double, double> UnitRegion(const Hypothesis& h) {
  const auto p = h.parameters();
  if (h.kind() == FamilyKind::kThreshold) {
    return {std::max(p[0], kDomainMin), kDomainMax};
  }
  return {std::max(p[0], kDomainMin), std::min(p[1], kDomainMax)};
}

double Length(std::pair<double, double> r) {
  return r.second > r.first ? r.second - r.first : 0.0;
}

}  // namespace

const char* FamilyKindName(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kThreshold:
      return "threshold";
    case FamilyKind::kInterval:
      return "interval";
    case FamilyKind::kFiniteExplicit:
      return "finite";
  }
  return "unknown";
}

Hypothesis Hypothesis::Threshold(double t) {
  if (std::isnan(t)) throw InvalidArgument("threshold must not be NaN");
  return Hypothesis(FamilyKind::kThreshold, 1, t, 0.0);
}

Hypothesis Hypothesis::Interval(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) {
    throw InvalidArgument("interval endpoints must not be NaN");
  }
  return Hypothesis(FamilyKind::kInterval, 2, a, b);
}

Hypothesis Hypothesis::Table(std::size_t index,
                             std::shared_ptr<const std::vector<Label>> labels) {
  if (!labels || labels->empty()) {
    throw InvalidArgument("table hypothesis needs a nonempty label table");
  }
  Hypothesis h(FamilyKind::kFiniteExplicit, 1, static_cast<double>(index), 0.0);
  h.table_ = std::move(labels);
  return h;
}

bool Hypothesis::InDomain(Feature x) const {
  if (kind_ == FamilyKind::kFiniteExplicit) return IsToken(x, table_->size());
  return InUnitDomain(x);
}

Label Hypothesis::PredictUnchecked(Feature x) const {
  switch (kind_) {
    case FamilyKind::kThreshold:
      return LabelFromBool(x >= params_[0]);
    case FamilyKind::kInterval:
      return LabelFromBool(params_[0] <= x && x <= params_[1]);
    case FamilyKind::kFiniteExplicit:
      return (*table_)[static_cast<std::size_t>(x)];
  }
  return Label::kZero;
}

Label Hypothesis::operator()(Feature x) const {
  if (!InDomain(x)) {
    throw InvalidArgument("feature " + FormatDouble(x) +
                          " outside the domain of " + Describe());
  }
  return PredictUnchecked(x);
}

nlohmann::json Hypothesis::ToJson() const {
  nlohmann::json j;
  j["family"] = FamilyKindName(kind_);
  switch (kind_) {
    case FamilyKind::kThreshold:
      j["t"] = params_[0];
      break;
    case FamilyKind::kInterval:
      j["a"] = params_[0];
      j["b"] = params_[1];
      break;
    case FamilyKind::kFiniteExplicit: {
      j["index"] = static_cast<std::size_t>(params_[0]);
      std::vector<int> labels;
      for (Label y : *table_) labels.push_back(ToInt(y));
      j["table"] = labels;
      break;
    }
  }
  return j;
}

bool operator==(const Hypothesis& a, const Hypothesis& b) {
  if (a.kind_ != b.kind_ || a.param_count_ != b.param_count_) return false;
  if (a.params_[0] != b.params_[0]) return false;
  if (a.param_count_ == 2 && a.params_[1] != b.params_[1]) return false;
  if (a.kind_ == FamilyKind::kFiniteExplicit) return *a.table_ == *b.table_;
  return true;
}

Hypothesis HypothesisFromJson(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "threshold") return Hypothesis::Threshold(j.at("t").get<double>());
  if (family == "interval") {
    return Hypothesis::Interval(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (family == "finite") {
    auto table = std::make_shared<std::vector<Label>>();
    for (int y : j.at("table").get<std::vector<int>>()) {
      if (y != 0 && y != 1) throw InvalidArgument("table labels must be 0/1");
      table->push_back(LabelFromBool(y == 1));
    }
    return Hypothesis::Table(j.at("index").get<std::size_t>(), std::move(table));
  }
  throw InvalidArgument("unknown hypothesis family '" + family + "'");
}

HypothesisFamily HypothesisFamily::Thresholds() {
  return HypothesisFamily(FamilyKind::kThreshold, 1);
}

HypothesisFamily HypothesisFamily::Intervals() {
  return HypothesisFamily(FamilyKind::kInterval, 2);
}

HypothesisFamily HypothesisFamily::FiniteExplicit(
    std::size_t domain_size, const std::vector<std::vector<Label>>& tables,
    int vc_dimension) {
  if (domain_size == 0) throw InvalidArgument("finite family: empty domain");
  if (tables.empty()) throw InvalidArgument("finite family: no hypotheses");
  if (vc_dimension < 1 ||
      static_cast<double>(vc_dimension) >
          std::log2(static_cast<double>(tables.size()))) {
    throw InvalidArgument("finite family: declared VC dimension " +
                          std::to_string(vc_dimension) +
                          " exceeds log2(|H|) for |H| = " +
                          std::to_string(tables.size()));
  }
  HypothesisFamily family(FamilyKind::kFiniteExplicit, vc_dimension);
  family.domain_size_ = domain_size;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].size() != domain_size) {
      throw InvalidArgument("finite family: table " + std::to_string(i) +
                            " does not cover the domain");
    }
    family.members_.push_back(Hypothesis::Table(
        i, std::make_shared<const std::vector<Label>>(tables[i])));
  }
  return family;
}

bool HypothesisFamily::InDomain(Feature x) const {
  if (kind_ == FamilyKind::kFiniteExplicit) return IsToken(x, domain_size_);
  return InUnitDomain(x);
}

nlohmann::json HypothesisFamily::ToJson() const {
  nlohmann::json j;
  j["family"] = FamilyKindName(kind_);
  j["vc_dimension"] = vc_dimension_;
  if (kind_ == FamilyKind::kFiniteExplicit) {
    j["domain_size"] = domain_size_;
    nlohmann::json tables = nlohmann::json::array();
    for (const Hypothesis& h : members_) tables.push_back(h.ToJson()["table"]);
    j["tables"] = tables;
  }
  return j;
}

HypothesisFamily FamilyFromJson(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "threshold") return HypothesisFamily::Thresholds();
  if (family == "interval") return HypothesisFamily::Intervals();
  if (family == "finite") {
    std::vector<std::vector<Label>> tables;
    for (const auto& row : j.at("tables")) {
      std::vector<Label> t;
      for (int y : row.get<std::vector<int>>()) t.push_back(LabelFromBool(y == 1));
      tables.push_back(std::move(t));
    }
    return HypothesisFamily::FiniteExplicit(j.at("domain_size").get<std::size_t>(),
                                            tables, j.at("vc_dimension").get<int>());
  }
  throw InvalidArgument("unknown family '" + family + "'");
}

double SauerBound(std::size_t n, int d) {
  double total = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= d && static_cast<std::size_t>(i) <= n; ++i) {
    total += binom;
    binom = binom * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return total;
}

double SauerExponentialBound(std::size_t n, int d) {
  return std::pow(std::numbers::e * static_cast<double>(n) / d, d);
}

DichotomyCover EnumerateDichotomies(const HypothesisFamily& family,
                                    const UnlabeledDataset& support) {
  if (support.empty()) {
    throw InvalidArgument("EnumerateDichotomies: empty point set");
  }
  for (Feature x : support.points) {
    if (!family.InDomain(x)) {
      throw InvalidArgument("EnumerateDichotomies: point " + FormatDouble(x) +
                            " outside the family domain");
    }
  }
  DichotomyCover cover;
  cover.support = support;
  cover.distinct = SortedDistinct(support);
  const std::vector<Feature>& p = cover.distinct;
  const std::size_t n = p.size();
  auto& reps = cover.representatives;

  switch (family.kind()) {
    case FamilyKind::kThreshold: {
      reps.reserve(n + 1);
      reps.push_back(Hypothesis::Threshold(LowerGapMidpoint(kDomainMin, p[0])));
      for (std::size_t i = 1; i < n; ++i) {
        reps.push_back(Hypothesis::Threshold(LowerGapMidpoint(p[i - 1], p[i])));
      }
      reps.push_back(
          Hypothesis::Threshold(LowerGapMidpoint(p[n - 1], kAboveDomain)));
      break;
    }
    case FamilyKind::kInterval: {
      reps.reserve(n * (n + 1) / 2 + 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = LowerGapMidpoint(i == 0 ? kDomainMin : p[i - 1], p[i]);
        for (std::size_t j = i; j < n; ++j) {
          const double b =
              UpperGapMidpoint(p[j], j + 1 < n ? p[j + 1] : kAboveDomain);
          reps.push_back(Hypothesis::Interval(a, b));
        }
      }
      const double empty = LowerGapMidpoint(p[n - 1], kAboveDomain);
      reps.push_back(Hypothesis::Interval(empty, empty));
      break;
    }
    case FamilyKind::kFiniteExplicit: {
      std::map<std::vector<Label>, std::size_t> seen;
      for (const Hypothesis& h : family.members()) {
        std::vector<Label> pattern;
        pattern.reserve(n);
        for (Feature x : p) pattern.push_back(h.PredictUnchecked(x));
        if (seen.emplace(std::move(pattern), reps.size()).second) {
          reps.push_back(h);
        }
      }
      break;
    }
  }

  if (static_cast<double>(reps.size()) > SauerBound(n, family.vc_dimension())) {
    throw std::logic_error("dichotomy count " + std::to_string(reps.size()) +
                           " exceeds the Sauer bound for n=" +
                           std::to_string(n) + ", d=" +
                           std::to_string(family.vc_dimension()));
  }
  return cover;
}

std::vector<double> EmpiricalErrors(std::span<const Hypothesis> hypotheses,
                                    const LabeledDataset& s) {
  if (s.empty()) throw InvalidArgument("EmpiricalErrors: empty dataset");
  const double n = static_cast<double>(s.size());
  std::vector<double> errors;
  errors.reserve(hypotheses.size());

  bool continuous_only = true;
  for (const Hypothesis& h : hypotheses) {
    continuous_only = continuous_only && h.kind() != FamilyKind::kFiniteExplicit;
  }
  if (!continuous_only) {
    for (const Hypothesis& h : hypotheses) errors.push_back(EmpiricalError(h, s));
    return errors;
  }

  // Sorted features with prefix counts of 1-labels.
  std::vector<Example> sorted = s.items;
  for (const Example& e : sorted) {
    if (!InUnitDomain(e.x)) {
      throw InvalidArgument("feature " + FormatDouble(e.x) +
                            " outside [0, 1]");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Example& a, const Example& b) { return a.x < b.x; });
  std::vector<Feature> xs(sorted.size());
  std::vector<std::size_t> ones_before(sorted.size() + 1, 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    xs[i] = sorted[i].x;
    ones_before[i + 1] = ones_before[i] + (sorted[i].y == Label::kOne);
  }
  const std::size_t total_ones = ones_before.back();

  for (const Hypothesis& h : hypotheses) {
    const auto p = h.parameters();
    std::size_t lo, hi;  // records predicted 1 are [lo, hi)
    if (h.kind() == FamilyKind::kThreshold) {
      lo = std::lower_bound(xs.begin(), xs.end(), p[0]) - xs.begin();
      hi = xs.size();
    } else {
      lo = std::lower_bound(xs.begin(), xs.end(), p[0]) - xs.begin();
      hi = std::upper_bound(xs.begin(), xs.end(), p[1]) - xs.begin();
      if (hi < lo) hi = lo;
    }
    const std::size_t ones_inside = ones_before[hi] - ones_before[lo];
    const std::size_t zeros_inside = (hi - lo) - ones_inside;
    const std::size_t mistakes = (total_ones - ones_inside) + zeros_inside;
    errors.push_back(static_cast<double>(mistakes) / n);
  }
  return errors;
}

Hypothesis Erm(const HypothesisFamily& family, const LabeledDataset& s) {
  if (s.empty()) throw InvalidArgument("Erm: empty dataset");
  const DichotomyCover cover = EnumerateDichotomies(family, s.Unlabeled());
  const std::vector<double> errors = EmpiricalErrors(cover.representatives, s);
  std::size_t best = 0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] < errors[best]) {
      best = i;
    } else if (errors[i] == errors[best]) {
      const auto a = cover.representatives[i].parameters();
      const auto b = cover.representatives[best].parameters();
      if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) {
        best = i;
      }
    }
  }
  return cover.representatives[best];
}

Marginal Marginal::Discrete(std::vector<Feature> points,
                            std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size()) {
    throw InvalidArgument("discrete marginal: points and weights must be "
                          "nonempty and parallel");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("discrete marginal: weights must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("discrete marginal: zero mass");
  Marginal m;
  m.kind_ = Kind::kDiscrete;
  m.points_ = std::move(points);
  double running = 0.0;
  for (double w : weights) {
    m.probabilities_.push_back(w / total);
    running += w / total;
    m.cumulative_.push_back(running);
  }
  m.cumulative_.back() = 1.0;
  return m;
}

Feature Marginal::Sample(RandomSource& rng) const {
  if (kind_ == Kind::kUniform) return rng.Uniform();
  const double u = rng.Uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return points_[std::min<std::size_t>(it - cumulative_.begin(),
                                       points_.size() - 1)];
}

nlohmann::json Marginal::ToJson() const {
  if (kind_ == Kind::kUniform) return {{"kind", "uniform"}};
  return {{"kind", "discrete"}, {"points", points_}, {"weights", probabilities_}};
}

Marginal MarginalFromJson(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return Marginal::Uniform();
  if (kind == "discrete") {
    return Marginal::Discrete(j.at("points").get<std::vector<double>>(),
                              j.at("weights").get<std::vector<double>>());
  }
  throw InvalidArgument("unknown marginal '" + kind + "'");
}

void SyntheticDistribution::Validate() const {
  if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
    throw InvalidArgument("noise rate must lie in [0, 1/2), got " +
                          FormatDouble(noise_rate));
  }
  if (marginal.kind() == Marginal::Kind::kUniform &&
      truth.kind() == FamilyKind::kFiniteExplicit) {
    throw InvalidArgument("table hypotheses need a discrete marginal");
  }
  for (Feature x : marginal.points()) {
    if (!truth.InDomain(x)) {
      throw InvalidArgument("marginal point " + FormatDouble(x) +
                            " outside the truth's domain");
    }
  }
}

double ExpectedDisagreement(const Hypothesis& h1, const Hypothesis& h2,
                            const Marginal& marginal) {
  if (marginal.kind() == Marginal::Kind::kDiscrete) {
    double mass = 0.0;
    const auto pts = marginal.points();
    const auto prob = marginal.probabilities();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (h1(pts[i]) != h2(pts[i])) mass += prob[i];
    }
    return mass;
  }
  if (h1.kind() == FamilyKind::kFiniteExplicit ||
      h2.kind() == FamilyKind::kFiniteExplicit) {
    throw UnsupportedOperation(
        "ExpectedDisagreement: table hypotheses under a uniform marginal");
  }
  const auto a = UnitRegion(h1);
  const auto b = UnitRegion(h2);
  const std::pair<double, double> both{std::max(a.first, b.first),
                                       std::min(a.second, b.second)};
  const double dis = Length(a) + Length(b) - 2.0 * Length(both);
  return std::clamp(dis, 0.0, 1.0);
}

double ExpectedDisagreement(const Hypothesis& h1, const Hypothesis& h2,
                            const SyntheticDistribution& d) {
  return ExpectedDisagreement(h1, h2, d.marginal);
}

double ExpectedError(const Hypothesis& h, const SyntheticDistribution& d) {
  const double dis = ExpectedDisagreement(h, d.truth, d.marginal);
  return (1.0 - d.noise_rate) * dis + d.noise_rate * (1.0 - dis);
}

}  // namespace pcqr
