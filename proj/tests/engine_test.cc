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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "pcqr/engine.h"
#include "pcqr/errors.h"
#include "pcqr/harness.h"

namespace pcqr {
namespace {

// Direct transcriptions of the parameter formulas, used as oracles.
double OracleCutoffReal(double m, double alpha, double beta) {
  return std::max(1.0, m * alpha / 8.0 +
                           std::sqrt(3.0 * m * alpha * std::log(m / beta)) / 4.0);
}
double OracleLambda(double t, double eps, double delta) {
  return std::sqrt(32.0 * t * std::log(2.0 / delta)) / eps;
}
double OracleKReal(double t, double eps, double delta, double beta, double m) {
  return 34.0 * std::sqrt(2.0) * OracleLambda(t, eps, delta) *
         std::log(4.0 * m * t / std::min(delta, beta / 2.0));
}

std::vector<Feature> Grid(std::size_t m) {
  std::vector<Feature> q;
  for (std::size_t i = 0; i < m; ++i) q.push_back((i + 0.5) / static_cast<double>(m));
  return q;
}

TEST(AgnosticParamsTest, WorkedSubsampleSize) {
  const AgnosticParams p = DeriveAgnosticParams({0.56, 0.01}, {0.1, 0.1}, 10, 10000);
  EXPECT_EQ(p.n_prime, 100u);
  EXPECT_EQ(DeriveAgnosticParams({1.0, 0.01}, {0.1, 0.1}, 10, 56 * 7).n_prime, 7u);
  EXPECT_EQ(DeriveAgnosticParams({1.0, 0.01}, {0.1, 0.1}, 10, 56 * 7 - 1).n_prime, 6u);
}

TEST(AgnosticParamsTest, WorkedCutoff) {
  const double t_real = OracleCutoffReal(1000, 0.16, 0.05);
  EXPECT_NEAR(std::log(20000.0), 9.9035, 5e-5);
  EXPECT_NEAR(t_real, 37.24, 5e-3);
  const AgnosticParams p = DeriveAgnosticParams({1.0, 0.01}, {0.16, 0.05}, 1000, 10000);
  EXPECT_NEAR(p.cutoff_real, t_real, 1e-12);
  EXPECT_EQ(p.cutoff, 38u);
  EXPECT_EQ(Cutoff({0.16, 0.05}, 1000), 38u);
  // Small streams clamp to 1.
  EXPECT_EQ(Cutoff({0.01, 0.9}, 1), 1u);
}

TEST(AgnosticParamsTest, WorkedPrivacySplit) {
  const AgnosticParams p = DeriveAgnosticParams({1.0, 0.01}, {0.16, 0.05}, 1000, 10000);
  EXPECT_NEAR(p.eps_prime, 0.16 * std::sqrt(160.0), 1e-12);
  EXPECT_NEAR(p.eps_prime, 2.02386, 5e-5);
  EXPECT_NEAR(p.eps_hat, 1.0 / std::log(200.0), 1e-15);
  EXPECT_NEAR(p.eps_hat, 0.18874, 5e-6);
  EXPECT_NEAR(p.delta_hat, 0.01 / (2.0 * std::numbers::e * std::log(200.0)), 1e-18);
  EXPECT_NEAR(p.delta_hat / 3.472e-4, 1.0, 5e-4);
}

TEST(AgnosticParamsTest, SmallPrivacyParameter) {
  // m alpha < 1: eps' = alpha and eps_hat uses it unclipped.
  const AgnosticParams p = DeriveAgnosticParams({1.0, 0.01}, {0.1, 0.1}, 5, 10000);
  EXPECT_DOUBLE_EQ(p.eps_prime, 0.1);
  EXPECT_NEAR(p.eps_hat, 0.1 / std::log(200.0), 1e-15);
  EXPECT_NEAR(p.delta_hat, 0.01 / (2.0 * std::exp(0.1) * std::log(200.0)), 1e-18);
}

TEST(AgnosticParamsTest, RandomizedInvariants) {
  RandomSource rng(157);
  for (int i = 0; i < 500; ++i) {
    const PrivacyBudget b{0.1 + 3 * rng.Uniform(), 1e-6 + 0.5 * rng.Uniform()};
    const AccuracyTarget a{0.01 + 0.9 * rng.Uniform(), 0.01 + 0.9 * rng.Uniform()};
    const std::size_t m = 1 + rng.UniformInt(5000);
    const AgnosticParams p = DeriveAgnosticParams(b, a, m, 100000);
    EXPECT_GE(p.n_prime, 1u);
    EXPECT_GE(p.cutoff, 1u);
    EXPECT_GT(p.eps_hat, 0.0);
    EXPECT_GT(p.delta_hat, 0.0);
    EXPECT_LT(p.delta_hat, b.delta);
    EXPECT_EQ(p.cutoff,
              static_cast<std::size_t>(std::ceil(OracleCutoffReal(m, a.alpha, a.beta))));
  }
}

TEST(AgnosticParamsTest, InfeasibleReportsRequiredN) {
  try {
    DeriveAgnosticParams({1.0, 0.01}, {0.1, 0.1}, 10, 55);
    FAIL();
  } catch (const InfeasibleParameters& e) {
    EXPECT_EQ(e.required_n(), 56u);
  }
  EXPECT_THROW(DeriveAgnosticParams({1.0, 0.01}, {0.1, 0.1}, 0, 1000), InvalidArgument);
  EXPECT_THROW(DeriveAgnosticParams({0.0, 0.01}, {0.1, 0.1}, 10, 1000), InvalidArgument);
}

TEST(SubSampParamsTest, WorkedValues) {
  const SubSampParams p = DeriveSubSampParams(1, {1.0, 0.05}, 0.1, 100);
  EXPECT_NEAR(std::log(40.0), 3.6889, 5e-5);
  EXPECT_NEAR(p.lambda, OracleLambda(1, 1.0, 0.05), 1e-12);
  EXPECT_NEAR(p.lambda, 10.865, 5e-4);
  EXPECT_NEAR(p.w, 2.0 * p.lambda * std::log(4000.0), 1e-9);
  EXPECT_NEAR(p.w, 180.2, 0.05);
  EXPECT_NEAR(p.canonical_k_real, OracleKReal(1, 1.0, 0.05, 0.1, 100), 1e-9);
  // 4695.06 to four significant digits, then ceiled.
  EXPECT_NEAR(p.canonical_k_real, 4695.0, 0.5);
  EXPECT_EQ(p.k, static_cast<std::size_t>(std::ceil(p.canonical_k_real)));
  EXPECT_EQ(p.k, 4696u);
  EXPECT_TRUE(p.canonical());
}

TEST(SubSampParamsTest, ScaleFactorKeepsCanonicalValues) {
  const SubSampParams c = DeriveSubSampParams(7, {0.3, 0.001}, 0.05, 500);
  const SubSampParams s = DeriveSubSampParams(7, {0.3, 0.001}, 0.05, 500, 0.01);
  EXPECT_FALSE(s.canonical());
  EXPECT_EQ(s.canonical_lambda, c.lambda);
  EXPECT_EQ(s.canonical_w, c.w);
  EXPECT_EQ(s.canonical_k, c.k);
  EXPECT_DOUBLE_EQ(s.lambda, 0.01 * c.lambda);
  EXPECT_DOUBLE_EQ(s.w, 0.01 * c.w);
  EXPECT_EQ(s.k, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(c.k))));
  EXPECT_EQ(DeriveSubSampParams(1, {1.0, 0.05}, 0.1, 100, 1e-9).k, 1u);
  EXPECT_THROW(DeriveSubSampParams(1, {1.0, 0.05}, 0.1, 100, 0.0), InvalidArgument);
  EXPECT_THROW(DeriveSubSampParams(0, {1.0, 0.05}, 0.1, 100), InvalidArgument);
}

TEST(SubSampParamsTest, PerBlockSampleSizeAtAnalysisScale) {
  // n'/k from the analysis sample size dominates (d ln(1/a) + ln(m/b)) / a.
  for (double alpha : {0.05, 0.1, 0.2}) {
    for (std::size_t m : {100u, 1000u, 2000u}) {
      const PrivacyBudget budget{1.0, 0.01};
      const AccuracyTarget acc{alpha, 0.1};
      const AgnosticParams a = DeriveAgnosticParams(budget, acc, m, 1000000);
      const SubSampParams s =
          DeriveSubSampParams(a.cutoff, {a.eps_hat, a.delta_hat}, acc.beta, m);
      const double n_prime = AnalysisSampleSize(1, budget, acc, m);
      const double per_block = n_prime / static_cast<double>(s.k);
      EXPECT_GE(per_block, (std::log(1.0 / alpha) + std::log(m / 0.1)) / alpha)
          << "alpha=" << alpha << " m=" << m;
    }
  }
}

TEST(MinimalFeasibleNTest, BoundaryIsExact) {
  const PrivacyBudget budget{1.0, 0.01};
  const AccuracyTarget acc{0.1, 0.1};
  for (double scale : {1e-4, 5e-4}) {
    const std::size_t n = MinimalFeasibleN(budget, acc, 200, scale);
    const std::size_t k = DeriveSubSampParams(
        DeriveAgnosticParams(budget, acc, 200, n).cutoff,
        {DeriveAgnosticParams(budget, acc, 200, n).eps_hat,
         DeriveAgnosticParams(budget, acc, 200, n).delta_hat},
        acc.beta, 200, scale).k;
    EXPECT_GE(DeriveAgnosticParams(budget, acc, 200, n).n_prime, k);
    EXPECT_LT(DeriveAgnosticParams(budget, acc, 200, n - 1).n_prime, k);
  }
}

TEST(PartitionTest, FloorArithmeticAndDisjointness) {
  const auto blocks = PartitionBlocks(10, 3);
  ASSERT_EQ(blocks.size(), 3u);
  for (const Block& b : blocks) EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(blocks.back().end, 9u);
  RandomSource rng(163);
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = 1 + rng.UniformInt(50);
    const std::size_t size = k + rng.UniformInt(1000);
    const auto bs = PartitionBlocks(size, k);
    std::set<std::size_t> seen;
    for (const Block& b : bs) {
      for (std::size_t j = b.begin; j < b.end; ++j) EXPECT_TRUE(seen.insert(j).second);
    }
    EXPECT_EQ(seen.size(), k * (size / k));
  }
}

TEST(PartitionTest, InfeasibleReportsRequiredSize) {
  try {
    PartitionBlocks(4, 5);
    FAIL();
  } catch (const InfeasibleParameters& e) {
    EXPECT_EQ(e.required_n(), 5u);
  }
}

TEST(TrainEnsembleTest, RealizableBlocksHaveZeroError) {
  RandomSource rng(167);
  SyntheticDistribution d;
  d.truth = Hypothesis::Threshold(0.37);
  const LabeledDataset s = GenSynthetic(d, 1003, rng);
  const HypothesisFamily family = HypothesisFamily::Thresholds();
  const auto blocks = PartitionBlocks(s.size(), 10);
  const auto ensemble = TrainEnsemble(s, blocks, ErmLearner(family));
  ASSERT_EQ(ensemble.size(), 10u);
  for (std::size_t j = 0; j < 10; ++j) {
    LabeledDataset part;
    part.items.assign(s.items.begin() + blocks[j].begin, s.items.begin() + blocks[j].end);
    EXPECT_EQ(EmpiricalError(ensemble[j], part), 0.0);
  }
}

TEST(TrainEnsembleTest, SingleBlockIsErmOfPrefix) {
  RandomSource rng(173);
  SyntheticDistribution d;
  d.noise_rate = 0.2;
  const LabeledDataset s = GenSynthetic(d, 57, rng);
  const HypothesisFamily family = HypothesisFamily::Thresholds();
  const auto ensemble = TrainEnsemble(s, 1, ErmLearner(family));
  ASSERT_EQ(ensemble.size(), 1u);
  EXPECT_EQ(ensemble[0], Erm(family, s));
}

TEST(VoteTest, CountsAndTies) {
  std::vector<Hypothesis> seven_three;
  for (int i = 0; i < 7; ++i) seven_three.push_back(Hypothesis::Threshold(0.1));
  for (int i = 0; i < 3; ++i) seven_three.push_back(Hypothesis::Threshold(0.9));
  const VoteCount v = CountVotes(seven_three, 0.5);
  EXPECT_EQ(v.ones, 7u);
  EXPECT_EQ(v.zeros, 3u);
  EXPECT_EQ(v.majority(), Label::kOne);
  EXPECT_EQ(v.dist(), 4u);
  const VoteCount tie{5, 5};
  EXPECT_EQ(tie.majority(), Label::kZero);
  EXPECT_EQ(tie.dist(), 0u);
}

std::vector<Hypothesis> TieEnsemble(std::size_t half) {
  std::vector<Hypothesis> e;
  for (std::size_t i = 0; i < half; ++i) {
    e.push_back(Hypothesis::Threshold(0.0));
    e.push_back(Hypothesis::Threshold(2.0));
  }
  return e;
}

TEST(EngineTest, AllTieStreamHaltsWithinBudget) {
  const SubSampParams params = DeriveSubSampParams(5, {1.0, 0.05}, 0.1, 50, 0.01);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SubSampEngine engine(TieEnsemble(3), params, RandomSource(seed));
    std::size_t unstable = 0;
    std::vector<AnswerRecord> records;
    for (std::size_t j = 0; j < 10 * params.cutoff; ++j) {
      records.push_back(engine.Answer(0.5));
      const AnswerRecord& r = records.back();
      EXPECT_EQ(r.index, j);
      if (!r.post_halt) {
        EXPECT_EQ(r.dist, 0u);
        unstable += !r.stable;
      } else {
        EXPECT_FALSE(r.stable);
        EXPECT_EQ(r.source, AnswerSource::kPostHalt);
      }
      EXPECT_LE(r.counter, params.cutoff + 1);
    }
    EXPECT_LE(unstable, params.cutoff + 1);
    ASSERT_TRUE(engine.halted());
    EXPECT_EQ(engine.unstable_count(), params.cutoff + 1);
    // The first post-halt answer sits right after the (T+1)-th unstable one.
    EXPECT_TRUE(records[*engine.halted_at()].post_halt);
    EXPECT_FALSE(records[*engine.halted_at() - 1].post_halt);
  }
}

TEST(EngineTest, UnanimousCanonicalEnsembleNeverUnstable) {
  const SubSampParams params = DeriveSubSampParams(1, {1.0, 0.05}, 0.1, 100);
  ASSERT_EQ(params.k, 4696u);
  std::vector<Hypothesis> ensemble(params.k, Hypothesis::Threshold(0.5));
  SubSampEngine engine(std::move(ensemble), params, RandomSource(179));
  RandomSource queries(181);
  for (int j = 0; j < 10000; ++j) {
    const AnswerRecord r = engine.Answer(queries.Uniform());
    ASSERT_TRUE(r.stable);
    EXPECT_EQ(*r.dist, params.k);
  }
  EXPECT_EQ(engine.unstable_count(), 0u);
}

TEST(EngineTest, NoiseLoggerSeesEveryDraw) {
  const SubSampParams params = DeriveSubSampParams(3, {1.0, 0.05}, 0.1, 20, 0.01);
  std::vector<std::string> stages;
  SubSampEngine engine(TieEnsemble(2), params, RandomSource(191),
                       [&](std::string_view stage, double scale, double) {
                         stages.emplace_back(stage);
                         EXPECT_GT(scale, 0.0);
                       });
  ASSERT_EQ(stages.size(), 1u);
  EXPECT_EQ(stages[0], "threshold");
  engine.Answer(0.5);
  EXPECT_EQ(stages[1], "stability");
}

TEST(RunSubSampTest, EmptyStream) {
  SyntheticDistribution d;
  RandomSource rng(193);
  const LabeledDataset s = GenSynthetic(d, 100, rng);
  const SubSampRun run = RunSubSamp(s, {}, ErmLearner(HypothesisFamily::Thresholds()), 1,
                                    {1.0, 0.05}, 0.1, RandomSource(1));
  EXPECT_TRUE(run.answers.empty());
}

TEST(RunSubSampTest, RealizableStreamTracksMajority) {
  SyntheticDistribution d;
  d.truth = Hypothesis::Threshold(0.6);
  RandomSource rng(197);
  const std::size_t m = 500;
  const PrivacyBudget budget{1.0, 0.05};
  const std::size_t cutoff = Cutoff({0.1, 0.1}, m);
  const SubSampParams canonical = DeriveSubSampParams(cutoff, budget, 0.1, m);
  // About 200 blocks of 50 records.
  const double scale = 200.0 / static_cast<double>(canonical.k);
  const LabeledDataset s = GenSynthetic(d, 200 * 50 + 30, rng);
  std::vector<Feature> queries;
  for (std::size_t j = 0; j < m; ++j) queries.push_back(rng.Uniform());
  const Learner learner = ErmLearner(HypothesisFamily::Thresholds());
  const SubSampRun run =
      RunSubSamp(s, queries, learner, cutoff, budget, 0.1, RandomSource(199), scale);
  ASSERT_EQ(run.answers.size(), m);
  EXPECT_EQ(run.block_size, 50u);
  const auto ensemble = TrainEnsemble(s, run.params.k, learner);
  std::size_t mismatches = 0;
  for (const AnswerRecord& r : run.answers) {
    mismatches += r.label != CountVotes(ensemble, r.query).majority();
  }
  EXPECT_LE(mismatches / static_cast<double>(m), 0.01);
  EXPECT_FALSE(run.halted_at.has_value());
}

TEST(RunSubSampTest, InfeasibleBlocks) {
  SyntheticDistribution d;
  RandomSource rng(211);
  const LabeledDataset s = GenSynthetic(d, 10, rng);
  EXPECT_THROW(RunSubSamp(s, Grid(5), ErmLearner(HypothesisFamily::Thresholds()), 1,
                          {1.0, 0.05}, 0.1, RandomSource(1)),
               InfeasibleParameters);
}

class AgnosticPipelineTest : public ::testing::Test {
 protected:
  static constexpr std::size_t kM = 300;
  AgnosticPipelineTest() {
    d_.truth = Hypothesis::Threshold(0.5);
    d_.noise_rate = 0.2;
    const PrivacyBudget budget{1.0, 0.01};
    const std::size_t cutoff = Cutoff(accuracy_, kM);
    const AgnosticParams a = DeriveAgnosticParams(budget, accuracy_, kM, 100000);
    const SubSampParams c =
        DeriveSubSampParams(cutoff, {a.eps_hat, a.delta_hat}, accuracy_.beta, kM);
    scale_ = 30.0 / static_cast<double>(c.k);
    n_ = MinimalFeasibleN(budget_, accuracy_, kM, scale_) * 40;
  }

  PcqrRun Run(std::uint64_t seed, std::size_t n) const {
    RandomSource rng(seed);
    const LabeledDataset s = GenSynthetic(d_, n, rng);
    std::vector<Feature> queries;
    for (std::size_t j = 0; j < kM; ++j) queries.push_back(rng.Uniform());
    const HypothesisFamily family = HypothesisFamily::Thresholds();
    return RunAgnosticPcqr(s, queries, family, ErmLearner(family), budget_, accuracy_,
                           RandomSource(seed).Child("algorithm"), {scale_, {}});
  }

  SyntheticDistribution d_;
  PrivacyBudget budget_{1.0, 0.01};
  AccuracyTarget accuracy_{0.1, 0.1};
  double scale_ = 1.0;
  std::size_t n_ = 0;
};

TEST_F(AgnosticPipelineTest, StageOrderAndShape) {
  const PcqrRun run = Run(223, n_);
  EXPECT_EQ(run.stages,
            (std::vector<std::string>{"subsample", "relabel", "resample", "subsamp"}));
  EXPECT_EQ(run.answers.size(), kM);
  EXPECT_EQ(run.agnostic.n_prime,
            static_cast<std::size_t>(std::floor(n_ / 56.0 + 1e-9)));
  EXPECT_EQ(run.block_size, run.agnostic.n_prime / run.subsamp.k);
  EXPECT_EQ(run.cover_size, run.agnostic.n_prime + 1);
  EXPECT_DOUBLE_EQ(run.subsamp.canonical_lambda * scale_, run.subsamp.lambda);
  EXPECT_LE(run.unstable_count, run.agnostic.cutoff + 1);
}

TEST_F(AgnosticPipelineTest, Deterministic) {
  const PcqrRun a = Run(227, n_), b = Run(227, n_);
  EXPECT_EQ(a.answers, b.answers);
  EXPECT_EQ(a.relabel_choice, b.relabel_choice);
}

TEST_F(AgnosticPipelineTest, ErrorNearNoiseRate) {
  std::size_t within = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomSource rng(seed);
    const LabeledDataset s = GenSynthetic(d_, n_, rng);
    std::vector<Feature> queries;
    std::vector<Label> truth;
    for (std::size_t j = 0; j < kM; ++j) {
      const Example e = GenSynthetic(d_, 1, rng)[0];
      queries.push_back(e.x);
      truth.push_back(e.y);
    }
    const HypothesisFamily family = HypothesisFamily::Thresholds();
    const PcqrRun run = RunAgnosticPcqr(s, queries, family, ErmLearner(family), budget_,
                                        accuracy_, RandomSource(seed + 1000), {scale_, {}});
    std::size_t wrong = 0;
    for (std::size_t j = 0; j < kM; ++j) wrong += run.answers[j].label != truth[j];
    within += wrong / static_cast<double>(kM) <= accuracy_.alpha + d_.noise_rate;
  }
  EXPECT_GE(within, 18u);
}

TEST_F(AgnosticPipelineTest, InfeasibleReportsMinimalN) {
  const std::size_t minimal = MinimalFeasibleN(budget_, accuracy_, kM, scale_);
  try {
    Run(229, minimal - 1);
    FAIL();
  } catch (const InfeasibleParameters& e) {
    EXPECT_EQ(e.required_n(), minimal);
  }
  EXPECT_NO_THROW(Run(229, minimal));
}

}  // namespace
}  // namespace pcqr
