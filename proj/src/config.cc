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

#include "pcqr/config.h"

#include <set>

#include "pcqr/errors.h"

namespace pcqr {

const char* ModeName(Mode mode) {
  switch (mode) {
    case Mode::kSubSamp:
      return "subsamp";
    case Mode::kAgnostic:
      return "agnostic";
    case Mode::kUniversal:
      return "universal";
    case Mode::kRelabelOnly:
      return "relabel-only";
  }
  return "unknown";
}

Mode ModeFromName(const std::string& name) {
  if (name == "subsamp") return Mode::kSubSamp;
  if (name == "agnostic") return Mode::kAgnostic;
  if (name == "universal") return Mode::kUniversal;
  if (name == "relabel-only") return Mode::kRelabelOnly;
  throw InvalidArgument("unknown mode '" + name + "'");
}

void ExperimentConfig::Validate() const {
  if (schema_version != kSchemaVersion) {
    throw InvalidArgument("unsupported schema_version " +
                          std::to_string(schema_version));
  }
  budget.Validate();
  accuracy.Validate();
  distribution.Validate();
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!(scale_factor > 0.0)) throw InvalidArgument("scale_factor must be positive");
  if (distribution.truth.kind() != family.kind()) {
    throw InvalidArgument("truth hypothesis must belong to the configured family");
  }
  for (Feature x : distribution.marginal.points()) {
    if (!family.InDomain(x)) {
      throw InvalidArgument("marginal point outside the family domain");
    }
  }
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["mode"] = ModeName(mode);
  if (family.kind() == FamilyKind::kFiniteExplicit) {
    j["family"] = family.ToJson();
  } else {
    j["family"] = FamilyKindName(family.kind());
  }
  if (distribution.marginal.kind() == Marginal::Kind::kUniform) {
    j["marginal"] = "uniform";
  } else {
    j["marginal"] = distribution.marginal.ToJson();
  }
  j["truth"] = distribution.truth.ToJson();
  j["gamma"] = distribution.noise_rate;
  j["n"] = n;
  j["m"] = m;
  j["epsilon"] = budget.epsilon;
  j["delta"] = budget.delta;
  j["alpha"] = accuracy.alpha;
  j["beta"] = accuracy.beta;
  j["scale_factor"] = scale_factor;
  j["trials"] = trials;
  j["seed"] = seed;
  return j;
}

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "schema_version", "mode",  "family", "marginal", "truth",
      "gamma",          "n",     "m",      "epsilon",  "delta",
      "alpha",          "beta",  "scale_factor", "trials", "seed"};
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  if (!j.contains("schema_version")) {
    throw InvalidArgument("config is missing schema_version");
  }

  ExperimentConfig c;
  try {
    c.schema_version = j.at("schema_version").get<int>();
    if (j.contains("mode")) c.mode = ModeFromName(j["mode"].get<std::string>());
    if (j.contains("family")) {
      const auto& f = j["family"];
      c.family = f.is_string() ? FamilyFromJson({{"family", f}}) : FamilyFromJson(f);
    }
    if (j.contains("marginal")) {
      const auto& mj = j["marginal"];
      c.distribution.marginal =
          mj.is_string() ? MarginalFromJson({{"kind", mj}}) : MarginalFromJson(mj);
    }
    if (j.contains("truth")) {
      c.distribution.truth = HypothesisFromJson(j["truth"]);
    } else if (c.family.kind() == FamilyKind::kInterval) {
      c.distribution.truth = Hypothesis::Interval(0.25, 0.75);
    } else if (c.family.kind() == FamilyKind::kFiniteExplicit) {
      c.distribution.truth = c.family.members().front();
    }
    c.distribution.noise_rate = j.value("gamma", c.distribution.noise_rate);
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.budget.epsilon = j.value("epsilon", c.budget.epsilon);
    c.budget.delta = j.value("delta", c.budget.delta);
    c.accuracy.alpha = j.value("alpha", c.accuracy.alpha);
    c.accuracy.beta = j.value("beta", c.accuracy.beta);
    c.scale_factor = j.value("scale_factor", c.scale_factor);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
  c.Validate();
  return c;
}

}  // namespace pcqr
