// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include "criteria.h"
#include "dpaudit/budget.h"
#include "test_util.h"

namespace dpaudit {
namespace {

TEST(Soundness, RandomAndCorpus) {
  auto s = testing::RunSoundness(200, 7);
  EXPECT_GE(s.random_datasets, 200u);
  EXPECT_GT(s.corpus_checks, 0u);
  EXPECT_EQ(s.violations, 0u);
}

TEST(Soundness, SecondSeed) {
  auto s = testing::RunSoundness(100, 99);
  EXPECT_EQ(s.violations, 0u);
}

// Dropping any one noise site never raises the worst case.
TEST(Composition, SubsetMonotone) {
  for (const auto& c : testing::LoadManifest()) {
    AnalysisPlan plan = testing::LoadCasePlan(c);
    auto sites = CollectNoiseSites(plan);
    Rational full = ComposeSites(sites, plan.constraints, plan.schema).Cost();
    for (std::size_t i = 0; i < sites.size(); ++i) {
      auto fewer = sites;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
      EXPECT_LE(ComposeSites(fewer, plan.constraints, plan.schema).Cost(), full) << c.name;
    }
  }
}

TEST(Criteria, Taxonomy) {
  auto r = testing::CheckTaxonomyFidelity();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Criteria, BudgetArithmetic) {
  auto r = testing::CheckBudgetArithmetic();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Criteria, BudgetMagnitude) {
  auto r = testing::CheckBudgetMagnitude();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Criteria, NoiseOff) {
  auto r = testing::CheckNoiseOffEquivalence();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Criteria, Determinism) {
  auto r = testing::CheckDeterminism(DPAUDIT_CLI_PATH);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Criteria, RepairClosure) {
  auto r = testing::CheckRepairClosure();
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace dpaudit
