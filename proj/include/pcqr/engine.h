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

#ifndef PCQR_ENGINE_H_
#define PCQR_ENGINE_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pcqr/core.h"
#include "pcqr/dataset.h"
#include "pcqr/hypothesis.h"
#include "pcqr/random.h"

namespace pcqr {

// Top-level parameter assignment of the agnostic pipeline.
struct AgnosticParams {
  std::size_t n_prime = 0;   // floor(eps * n / 56)
  double cutoff_real = 1.0;  // max(1, m a / 8 + sqrt(3 m a ln(m / b)) / 4)
  std::size_t cutoff = 1;    // ceil(cutoff_real)
  double eps_prime = 0.0;    // a * max(1, sqrt(m a))
  double eps_hat = 0.0;      // min(1, eps') / ln(2 / delta)
  double delta_hat = 0.0;    // delta / (2 e^{min(1, eps')} ln(2 / delta))

  nlohmann::json ToJson() const;
};

// Unstable-query cutoff T = ceil(max(1, m a / 8 + sqrt(3 m a ln(m / b)) / 4)).
double CutoffReal(const AccuracyTarget& accuracy, std::size_t m);
std::size_t Cutoff(const AccuracyTarget& accuracy, std::size_t m);

// Throws InfeasibleParameters (reporting the smallest workable n) when
// n' < 1.
AgnosticParams DeriveAgnosticParams(const PrivacyBudget& budget,
                                    const AccuracyTarget& accuracy,
                                    std::size_t m, std::size_t n);

// Parameters of the subsample-and-aggregate engine. The canonical_* fields
// always hold the unscaled formula values; lambda, k and w are those values
// multiplied by scale_factor.
struct SubSampParams {
  std::size_t cutoff = 1;
  double scale_factor = 1.0;
  double canonical_lambda = 0.0;  // sqrt(32 T ln(2 / delta)) / eps
  double canonical_k_real = 0.0;  // 34 sqrt(2) lambda ln(4 m T / min(delta, beta / 2))
  std::size_t canonical_k = 0;    // ceil(canonical_k_real)
  double canonical_w = 0.0;       // 2 lambda ln(2 m / delta)
  double lambda = 0.0;
  std::size_t k = 0;
  double w = 0.0;

  bool canonical() const { return scale_factor == 1.0; }
  nlohmann::json ToJson() const;
};

SubSampParams DeriveSubSampParams(std::size_t cutoff,
                                  const PrivacyBudget& budget, double beta,
                                  std::size_t m, double scale_factor = 1.0);

// Smallest n for which the agnostic pipeline has n' >= k, i.e. every
// ensemble member gets at least one record.
std::size_t MinimalFeasibleN(const PrivacyBudget& budget,
                             const AccuracyTarget& accuracy, std::size_t m,
                             double scale_factor = 1.0);

// Relabeled-sample size the accuracy analysis asks for:
//   8000 (d ln(1/a) + ln(m/b)) ln^{3/2}(2/delta) ln(m a / min(delta, b/2))
//        / a^2 * max(1, sqrt(m) a^{3/2}).
double AnalysisSampleSize(int vc_dimension, const PrivacyBudget& budget,
                          const AccuracyTarget& accuracy, std::size_t m);

using Learner = std::function<Hypothesis(const LabeledDataset&)>;

// Erm over `family`.
Learner ErmLearner(HypothesisFamily family);

// Half-open index range [begin, end) of one sub-sample.
struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

// k consecutive blocks of floor(size / k) records; the remainder is dropped.
// Throws InfeasibleParameters when a block would be empty.
std::vector<Block> PartitionBlocks(std::size_t size, std::size_t k);

std::vector<Hypothesis> TrainEnsemble(const LabeledDataset& s_hat,
                                      std::span<const Block> blocks,
                                      const Learner& learner);
std::vector<Hypothesis> TrainEnsemble(const LabeledDataset& s_hat,
                                      std::size_t k, const Learner& learner);

struct VoteCount {
  std::size_t zeros = 0;
  std::size_t ones = 0;

  // Ties go to label 0.
  Label majority() const { return LabelFromBool(ones > zeros); }
  std::size_t dist() const { return ones > zeros ? ones - zeros : zeros - ones; }
};

VoteCount CountVotes(std::span<const Hypothesis> ensemble, Feature x);

// Which stage produced an answer.
enum class AnswerSource { kEngine, kPostHalt, kCoverLearner };

const char* AnswerSourceName(AnswerSource source);

struct AnswerRecord {
  std::size_t index = 0;  // position j in the stream, 0-based
  Feature query = 0.0;
  Label label = Label::kZero;
  bool stable = false;
  bool post_halt = false;
  std::size_t counter = 0;          // unstable counter c after this answer
  std::optional<std::size_t> dist;  // vote margin; absent when not voted
  AnswerSource source = AnswerSource::kEngine;

  friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

// Receives (stage, scale, value) for every Laplace draw when set.
using NoiseLogger =
    std::function<void(std::string_view stage, double scale, double value)>;

// Online answering loop over a trained ensemble. Each query is voted on and
// passed through the stability test against the noisy threshold; an
// unstable outcome yields a uniform random label, bumps the counter and
// redraws the threshold. Once the counter exceeds the cutoff the engine is
// halted and every later query gets a uniform random label marked post_halt.
class SubSampEngine {
 public:
  SubSampEngine(std::vector<Hypothesis> ensemble, const SubSampParams& params,
                RandomSource rng, NoiseLogger noise_log = {});

  AnswerRecord Answer(Feature x);

  bool halted() const { return halted_at_.has_value(); }
  std::optional<std::size_t> halted_at() const { return halted_at_; }
  std::size_t unstable_count() const { return counter_; }
  std::size_t answered() const { return answered_; }
  double noisy_threshold() const { return noisy_threshold_; }
  std::span<const Hypothesis> ensemble() const { return ensemble_; }

 private:
  double DrawLaplace(std::string_view stage, double scale);

  std::vector<Hypothesis> ensemble_;
  SubSampParams params_;
  RandomSource rng_;
  NoiseLogger noise_log_;
  std::size_t counter_ = 0;
  std::size_t answered_ = 0;
  double noisy_threshold_ = 0.0;
  std::optional<std::size_t> halted_at_;
};

struct SubSampRun {
  SubSampParams params;
  std::size_t block_size = 0;
  std::vector<AnswerRecord> answers;
  std::size_t unstable_count = 0;
  std::optional<std::size_t> halted_at;  // index of the first post-halt query
};

// The realizable engine end to end: derive parameters from the queries'
// count, train the ensemble on `s` and answer every query. Returns exactly
// queries.size() records.
SubSampRun RunSubSamp(const LabeledDataset& s, std::span<const Feature> queries,
                      const Learner& learner, std::size_t cutoff,
                      const PrivacyBudget& budget, double beta,
                      const RandomSource& rng, double scale_factor = 1.0,
                      const NoiseLogger& noise_log = {});

struct PcqrOptions {
  double scale_factor = 1.0;
  NoiseLogger noise_log;
};

struct PcqrRun {
  std::size_t n = 0;
  AgnosticParams agnostic;
  SubSampParams subsamp;
  std::size_t block_size = 0;
  std::size_t cover_size = 0;
  Hypothesis relabel_choice = Hypothesis::Threshold(0.0);
  double relabel_input_error = 0.0;
  std::vector<AnswerRecord> answers;
  std::size_t unstable_count = 0;
  std::optional<std::size_t> halted_at;
  std::vector<std::string> stages;  // in execution order
};

// Agnostic pipeline: subsample n' records without replacement, relabel them
// through the exponential mechanism, resample n' records with replacement and
// answer the stream with the engine at privacy (eps_hat, delta_hat).
PcqrRun RunAgnosticPcqr(const LabeledDataset& s,
                        std::span<const Feature> queries,
                        const HypothesisFamily& family, const Learner& learner,
                        const PrivacyBudget& budget,
                        const AccuracyTarget& accuracy, const RandomSource& rng,
                        const PcqrOptions& options = {});

}  // namespace pcqr

#endif  // PCQR_ENGINE_H_
