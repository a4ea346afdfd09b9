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

#include "pcqr/engine.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "pcqr/errors.h"
#include "pcqr/mechanisms.h"
#include "pcqr/relabel.h"

namespace pcqr {
namespace {

// Subsampling fraction denominator of the agnostic pipeline.
constexpr double kSubsampleDivisor = 56.0;

// floor(eps * n / 56), tolerant of the last-ulp error in eps * n.
std::size_t SubsampleSize(double epsilon, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(epsilon * static_cast<double>(n) / kSubsampleDivisor + 1e-9));
}

void ValidateStreamLength(std::size_t m) {
  if (m < 1) throw InvalidArgument("number of queries m must be >= 1");
}

}  // namespace

nlohmann::json AgnosticParams::ToJson() const {
  return {{"n_prime", n_prime},     {"T", cutoff},
          {"T_real", cutoff_real},  {"eps_prime", eps_prime},
          {"eps_hat", eps_hat},     {"delta_hat", delta_hat}};
}

nlohmann::json SubSampParams::ToJson() const {
  return {{"T", cutoff},
          {"scale_factor", scale_factor},
          {"canonical", canonical()},
          {"lambda", lambda},
          {"k", k},
          {"w", w},
          {"canonical_lambda", canonical_lambda},
          {"canonical_k", canonical_k},
          {"canonical_k_real", canonical_k_real},
          {"canonical_w", canonical_w}};
}

double CutoffReal(const AccuracyTarget& accuracy, std::size_t m) {
  accuracy.Validate();
  ValidateStreamLength(m);
  const double md = static_cast<double>(m);
  const double m_alpha = md * accuracy.alpha;
  return std::max(1.0, m_alpha / 8.0 +
                           0.25 * std::sqrt(3.0 * m_alpha *
                                            std::log(md / accuracy.beta)));
}

std::size_t Cutoff(const AccuracyTarget& accuracy, std::size_t m) {
  return static_cast<std::size_t>(std::ceil(CutoffReal(accuracy, m)));
}

AgnosticParams DeriveAgnosticParams(const PrivacyBudget& budget,
                                    const AccuracyTarget& accuracy,
                                    std::size_t m, std::size_t n) {
  budget.Validate();
  accuracy.Validate();
  ValidateStreamLength(m);
  const double alpha = accuracy.alpha;
  const double m_alpha = static_cast<double>(m) * alpha;
  const double log_2_over_delta = std::log(2.0 / budget.delta);

  AgnosticParams p;
  p.n_prime = SubsampleSize(budget.epsilon, n);
  if (p.n_prime < 1) {
    const auto required = static_cast<std::size_t>(
        std::ceil(kSubsampleDivisor / budget.epsilon));
    throw InfeasibleParameters(
        "n=" + std::to_string(n) + " gives n'=floor(eps*n/56)=0; need n >= " +
            std::to_string(required),
        required);
  }
  p.cutoff_real = CutoffReal(accuracy, m);
  p.cutoff = static_cast<std::size_t>(std::ceil(p.cutoff_real));
  p.eps_prime = alpha * std::max(1.0, std::sqrt(m_alpha));
  const double eps_star = std::min(1.0, p.eps_prime);
  p.eps_hat = eps_star / log_2_over_delta;
  p.delta_hat = budget.delta / (2.0 * std::exp(eps_star) * log_2_over_delta);
  return p;
}

SubSampParams DeriveSubSampParams(std::size_t cutoff,
                                  const PrivacyBudget& budget, double beta,
                                  std::size_t m, double scale_factor) {
  budget.Validate();
  ValidateStreamLength(m);
  if (cutoff < 1) throw InvalidArgument("cutoff T must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
    throw InvalidArgument("scale_factor must be positive");
  }
  const double t = static_cast<double>(cutoff);
  const double md = static_cast<double>(m);

  SubSampParams p;
  p.cutoff = cutoff;
  p.scale_factor = scale_factor;
  p.canonical_lambda =
      std::sqrt(32.0 * t * std::log(2.0 / budget.delta)) / budget.epsilon;
  p.canonical_k_real = 34.0 * std::numbers::sqrt2 * p.canonical_lambda *
                       std::log(4.0 * md * t / std::min(budget.delta, beta / 2.0));
  p.canonical_k = static_cast<std::size_t>(std::ceil(p.canonical_k_real));
  p.canonical_w = 2.0 * p.canonical_lambda * std::log(2.0 * md / budget.delta);

  p.lambda = scale_factor * p.canonical_lambda;
  p.w = scale_factor * p.canonical_w;
  p.k = scale_factor == 1.0
            ? p.canonical_k
            : std::max<std::size_t>(
                  1, static_cast<std::size_t>(std::ceil(
                         scale_factor * static_cast<double>(p.canonical_k))));
  return p;
}

std::size_t MinimalFeasibleN(const PrivacyBudget& budget,
                             const AccuracyTarget& accuracy, std::size_t m,
                             double scale_factor) {
  // k does not depend on n, so the n-independent part can be derived with
  // any n that passes the n' >= 1 check.
  const std::size_t probe_n = static_cast<std::size_t>(
      std::ceil(kSubsampleDivisor / budget.epsilon)) + 1;
  const AgnosticParams a = DeriveAgnosticParams(budget, accuracy, m, probe_n);
  const SubSampParams s =
      DeriveSubSampParams(a.cutoff, {a.eps_hat, a.delta_hat}, accuracy.beta, m,
                          scale_factor);
  auto n = static_cast<std::size_t>(std::ceil(
      kSubsampleDivisor * static_cast<double>(s.k) / budget.epsilon));
  while (n > 1 && SubsampleSize(budget.epsilon, n - 1) >= s.k) --n;
  while (SubsampleSize(budget.epsilon, n) < s.k) ++n;
  return n;
}

double AnalysisSampleSize(int vc_dimension, const PrivacyBudget& budget,
                          const AccuracyTarget& accuracy, std::size_t m) {
  const double a = accuracy.alpha;
  const double md = static_cast<double>(m);
  const double complexity =
      vc_dimension * std::log(1.0 / a) + std::log(md / accuracy.beta);
  return 8000.0 * complexity * std::pow(std::log(2.0 / budget.delta), 1.5) *
         std::log(md * a / std::min(budget.delta, accuracy.beta / 2.0)) /
         (a * a) * std::max(1.0, std::sqrt(md) * std::pow(a, 1.5));
}

Learner ErmLearner(HypothesisFamily family) {
  return [family = std::move(family)](const LabeledDataset& block) {
    return Erm(family, block);
  };
}

std::vector<Block> PartitionBlocks(std::size_t size, std::size_t k) {
  if (k < 1) throw InvalidArgument("PartitionBlocks: k must be >= 1");
  const std::size_t block_size = size / k;
  if (block_size == 0) {
    throw InfeasibleParameters("cannot split " + std::to_string(size) +
                               " records into k=" + std::to_string(k) +
                               " nonempty blocks; need at least " +
                               std::to_string(k) + " records",
                               k);
  }
  std::vector<Block> blocks(k);
  for (std::size_t j = 0; j < k; ++j) {
    blocks[j] = {j * block_size, (j + 1) * block_size};
  }
  return blocks;
}

std::vector<Hypothesis> TrainEnsemble(const LabeledDataset& s_hat,
                                      std::span<const Block> blocks,
                                      const Learner& learner) {
  std::vector<Hypothesis> ensemble;
  ensemble.reserve(blocks.size());
  for (const Block& b : blocks) {
    if (b.end > s_hat.size() || b.begin >= b.end) {
      throw InvalidArgument("TrainEnsemble: block out of range");
    }
    LabeledDataset part;
    part.origin = s_hat.origin;
    part.items.assign(s_hat.items.begin() + b.begin, s_hat.items.begin() + b.end);
    ensemble.push_back(learner(part));
  }
  return ensemble;
}

std::vector<Hypothesis> TrainEnsemble(const LabeledDataset& s_hat,
                                      std::size_t k, const Learner& learner) {
  const std::vector<Block> blocks = PartitionBlocks(s_hat.size(), k);
  return TrainEnsemble(s_hat, blocks, learner);
}

VoteCount CountVotes(std::span<const Hypothesis> ensemble, Feature x) {
  VoteCount votes;
  for (const Hypothesis& h : ensemble) {
    if (h(x) == Label::kOne) {
      ++votes.ones;
    } else {
      ++votes.zeros;
    }
  }
  return votes;
}

const char* AnswerSourceName(AnswerSource source) {
  switch (source) {
    case AnswerSource::kEngine:
      return "engine";
    case AnswerSource::kPostHalt:
      return "post_halt";
    case AnswerSource::kCoverLearner:
      return "cover_learner";
  }
  return "unknown";
}

SubSampEngine::SubSampEngine(std::vector<Hypothesis> ensemble,
                             const SubSampParams& params, RandomSource rng,
                             NoiseLogger noise_log)
    : ensemble_(std::move(ensemble)),
      params_(params),
      rng_(std::move(rng)),
      noise_log_(std::move(noise_log)) {
  if (ensemble_.empty()) throw InvalidArgument("SubSampEngine: empty ensemble");
  if (!(params_.lambda > 0.0)) {
    throw InvalidArgument("SubSampEngine: lambda must be positive");
  }
  noisy_threshold_ = params_.w + DrawLaplace("threshold", params_.lambda);
}

double SubSampEngine::DrawLaplace(std::string_view stage, double scale) {
  const double z = SampleLaplace(rng_, scale);
  if (noise_log_) noise_log_(stage, scale, z);
  return z;
}

AnswerRecord SubSampEngine::Answer(Feature x) {
  AnswerRecord record;
  record.index = answered_++;
  record.query = x;

  if (halted()) {
    record.label = LabelFromBool(rng_.Bernoulli(0.5));
    record.post_halt = true;
    record.counter = counter_;
    record.source = AnswerSource::kPostHalt;
    return record;
  }

  const VoteCount votes = CountVotes(ensemble_, x);
  record.dist = votes.dist();
  const StabilityQuery<Label> query{votes.majority(),
                                    static_cast<double>(votes.dist()),
                                    noisy_threshold_, 1.0 / (2.0 * params_.lambda)};
  double noisy_dist = 0.0;
  const std::optional<Label> released = StabilityTest(query, rng_, &noisy_dist);
  if (noise_log_) {
    noise_log_("stability", 2.0 * params_.lambda, noisy_dist - query.dist);
  }

  if (released.has_value()) {
    record.label = *released;
    record.stable = true;
  } else {
    record.label = LabelFromBool(rng_.Bernoulli(0.5));
    ++counter_;
    noisy_threshold_ = params_.w + DrawLaplace("threshold", params_.lambda);
    if (counter_ > params_.cutoff) halted_at_ = answered_;
  }
  record.counter = counter_;
  return record;
}

SubSampRun RunSubSamp(const LabeledDataset& s, std::span<const Feature> queries,
                      const Learner& learner, std::size_t cutoff,
                      const PrivacyBudget& budget, double beta,
                      const RandomSource& rng, double scale_factor,
                      const NoiseLogger& noise_log) {
  SubSampRun run;
  if (queries.empty()) return run;
  run.params = DeriveSubSampParams(cutoff, budget, beta, queries.size(),
                                   scale_factor);
  const std::vector<Block> blocks = PartitionBlocks(s.size(), run.params.k);
  run.block_size = blocks.front().size();
  SubSampEngine engine(TrainEnsemble(s, blocks, learner), run.params,
                       rng.Child("subsamp"), noise_log);
  run.answers.reserve(queries.size());
  for (Feature x : queries) run.answers.push_back(engine.Answer(x));
  run.unstable_count = engine.unstable_count();
  run.halted_at = engine.halted_at();
  return run;
}

PcqrRun RunAgnosticPcqr(const LabeledDataset& s,
                        std::span<const Feature> queries,
                        const HypothesisFamily& family, const Learner& learner,
                        const PrivacyBudget& budget,
                        const AccuracyTarget& accuracy, const RandomSource& rng,
                        const PcqrOptions& options) {
  PcqrRun run;
  run.n = s.size();
  run.agnostic = DeriveAgnosticParams(budget, accuracy, queries.size(), s.size());
  const AgnosticParams& a = run.agnostic;
  const PrivacyBudget engine_budget{a.eps_hat, a.delta_hat};
  run.subsamp = DeriveSubSampParams(a.cutoff, engine_budget, accuracy.beta,
                                    queries.size(), options.scale_factor);
  if (a.n_prime < run.subsamp.k) {
    const std::size_t required =
        MinimalFeasibleN(budget, accuracy, queries.size(), options.scale_factor);
    throw InfeasibleParameters(
        "n'=" + std::to_string(a.n_prime) + " < k=" +
            std::to_string(run.subsamp.k) + "; need n >= " +
            std::to_string(required),
        required);
  }

  RandomSource subsample_rng = rng.Child("subsample");
  const LabeledDataset s_prime =
      SampleWithoutReplacement(s, a.n_prime, subsample_rng);
  run.stages.push_back("subsample");

  RandomSource relabel_rng = rng.Child("relabel");
  RelabelResult relabeled = Relabel(s_prime, family, relabel_rng);
  run.cover_size = relabeled.cover_size;
  run.relabel_choice = relabeled.chosen;
  run.relabel_input_error = relabeled.chosen_input_error;
  run.stages.push_back("relabel");

  RandomSource resample_rng = rng.Child("resample");
  const LabeledDataset s_hat =
      ResampleWithReplacement(relabeled.relabeled, a.n_prime, resample_rng);
  run.stages.push_back("resample");

  SubSampRun engine =
      RunSubSamp(s_hat, queries, learner, a.cutoff, engine_budget,
                 accuracy.beta, rng, options.scale_factor, options.noise_log);
  run.stages.push_back("subsamp");
  run.block_size = engine.block_size;
  run.answers = std::move(engine.answers);
  run.unstable_count = engine.unstable_count;
  run.halted_at = engine.halted_at;
  return run;
}

}  // namespace pcqr
