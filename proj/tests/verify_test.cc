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

#include "pcqr/verify.h"

#include <gtest/gtest.h>

#include <set>

namespace pcqr {
namespace {

const CheckResult& Find(const VerifyReport& r, const std::string& name) {
  for (const CheckResult& c : r.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("missing check " + name);
}

TEST(ChiSquareTest, PerfectFitAndGrossMisfit) {
  const std::vector<double> p = {0.25, 0.25, 0.5};
  const std::vector<std::size_t> exact = {250, 250, 500};
  const ChiSquareResult fit = ChiSquareTest(exact, p);
  EXPECT_DOUBLE_EQ(fit.statistic, 0.0);
  EXPECT_EQ(fit.degrees_of_freedom, 2u);
  EXPECT_NEAR(fit.p_value, 1.0, 1e-12);
  const std::vector<std::size_t> off = {400, 100, 500};
  const ChiSquareResult bad = ChiSquareTest(off, p);
  // 150^2/250 twice.
  EXPECT_NEAR(bad.statistic, 180.0, 1e-9);
  EXPECT_LT(bad.p_value, 1e-30);
}

TEST(ChiSquareTest, KnownTailValue) {
  // One degree of freedom, statistic 3.841458820694124 sits at p = 0.05.
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<std::size_t> obs = {531, 469};
  const ChiSquareResult r = ChiSquareTest(obs, p);
  EXPECT_NEAR(r.statistic, 3.844, 1e-9);
  EXPECT_NEAR(r.p_value, 0.05, 0.001);
}

TEST(ChiSquareTest, SmallCellsArePooled) {
  const std::vector<double> p = {0.97, 0.01, 0.01, 0.01};
  const std::vector<std::size_t> obs = {97, 1, 1, 1};
  const ChiSquareResult r = ChiSquareTest(obs, p);
  // Pooled mass 3 < 5 is folded into the big cell: one cell remains.
  EXPECT_EQ(r.degrees_of_freedom, 0u);
  EXPECT_EQ(r.p_value, 1.0);
  const std::vector<double> q = {0.9, 0.02, 0.02, 0.02, 0.04};
  const std::vector<std::size_t> obs2 = {900, 20, 20, 20, 40};
  EXPECT_EQ(ChiSquareTest(obs2, q).degrees_of_freedom, 4u);
}

TEST(EmInstancesTest, FixedSetShape) {
  const auto instances = EmTestInstances();
  ASSERT_EQ(instances.size(), 20u);
  for (const auto& s : instances) {
    EXPECT_GE(s.candidates.size(), 1u);
    EXPECT_LE(s.candidates.size(), 10u);
    EXPECT_EQ(s.candidates.size(), s.scores.size());
  }
  EXPECT_EQ(instances[0].scores, (std::vector<double>{-0.0, -0.2, -0.5}));
  EXPECT_DOUBLE_EQ(instances[0].sensitivity, 0.1);
  EXPECT_EQ(instances[0].epsilon, 1.0);
  EXPECT_EQ(instances[3].candidates.size(), 1u);
}

TEST(UniformConvergenceTest, SampleSize) {
  // 50 (ln 5 + ln 10) / 0.04 = 4890.6
  EXPECT_EQ(UniformConvergenceSampleSize(1, 0.2, 0.1), 4891u);
  EXPECT_EQ(UniformConvergenceSampleSize(1, 0.1, 0.1), 23026u);
}

TEST(OverlappingBlocksTest, NeighboursShareHalf) {
  const auto blocks = OverlappingBlocks(100, 4);
  ASSERT_EQ(blocks.size(), 4u);
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    std::set<std::size_t> a, shared;
    for (std::size_t x = blocks[i].begin; x < blocks[i].end; ++x) a.insert(x);
    for (std::size_t x = blocks[i + 1].begin; x < blocks[i + 1].end; ++x) {
      if (a.count(x)) shared.insert(x);
    }
    EXPECT_EQ(shared.size(), (blocks[i].end - blocks[i].begin) / 2);
  }
  EXPECT_LE(blocks.back().end, 100u);
}

TEST(InfluenceProbeTest, DisjointBlocksStayWithinTwo) {
  const InfluenceProbeResult r = ProbeSingleRecordInfluence(30, 5);
  EXPECT_EQ(r.runs, 30u);
  EXPECT_EQ(r.violating_runs, 0u);
  EXPECT_LE(r.max_l1, 2u);
  EXPECT_GT(r.queries_checked, 30u * 200u);
}

TEST(InfluenceProbeTest, OverlappingBlocksAreCaught) {
  const InfluenceProbeResult r = ProbeSingleRecordInfluence(30, 5, true);
  EXPECT_GT(r.violating_runs, 0u);
  EXPECT_GT(r.max_l1, 2u);
}

TEST(VerifySuiteTest, DefaultSuitePasses) {
  const VerifyReport r = RunVerifySuite();
  for (const CheckResult& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checks.size(), 5u);
}

TEST(VerifySuiteTest, CorruptedEmSensitivityFails) {
  VerifyOptions o;
  o.corrupt_em_sensitivity = true;
  const VerifyReport r = RunVerifySuite(o);
  EXPECT_FALSE(r.passed());
  const CheckResult& em = Find(r, "em_chi_square");
  EXPECT_FALSE(em.passed);
  EXPECT_FALSE(em.detail.empty());
}

TEST(VerifySuiteTest, OverlappingBlocksFailInfluence) {
  VerifyOptions o;
  o.overlapping_blocks = true;
  const VerifyReport r = RunVerifySuite(o);
  EXPECT_FALSE(Find(r, "single_record_influence").passed);
  EXPECT_TRUE(Find(r, "em_chi_square").passed);
}

}  // namespace
}  // namespace pcqr
