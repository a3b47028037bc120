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

#include "dpaudit/budget.h"
#include "json.hpp"
#include "test_util.h"

namespace dpaudit {
namespace {

using nlohmann::json;

BudgetLedger LedgerOf(const std::string& name) {
  static const auto cases = testing::LoadManifest();
  return Compose(testing::LoadCasePlan(testing::FindCase(cases, name)));
}

TEST(Compose, ZscoreFourteenSharesSumToBudget) {
  auto ledger = LedgerOf("zscore_correct");
  ASSERT_EQ(ledger.entries.size(), 14u);
  for (const auto& e : ledger.entries) EXPECT_EQ(e.epsilon, Rational(1, 14)) << e.node_id;
  EXPECT_EQ(ledger.worst_case_total, Rational(1));
  EXPECT_EQ(ledger.budget_limit, Rational(1));
  EXPECT_FALSE(ledger.exceeded());
}

TEST(Compose, FiveDaysComposeSequentially) {
  auto naive = LedgerOf("mistake5_incorrect");
  EXPECT_EQ(naive.entries.size(), 10u);
  EXPECT_EQ(naive.worst_case_total, Rational(5));
  EXPECT_TRUE(naive.exceeded());
  ASSERT_EQ(naive.composition.kind, CompositionNode::Kind::kSequential);
  EXPECT_EQ(naive.composition.attribute, "Day");
  ASSERT_EQ(naive.composition.children.size(), 5u);
  for (const auto& day : naive.composition.children) {
    EXPECT_EQ(day.kind, CompositionNode::Kind::kParallel);
    EXPECT_EQ(day.Cost(), Rational(1));
  }
  auto fixed = LedgerOf("mistake5_correct");
  EXPECT_EQ(fixed.worst_case_total, Rational(1));
  EXPECT_FALSE(fixed.exceeded());
}

TEST(Compose, SevenFullBudgetsAgainstOne) {
  auto ledger = LedgerOf("zscore_per_product_budget");
  EXPECT_EQ(ledger.entries.size(), 7u);
  EXPECT_EQ(ledger.worst_case_total, Rational(7));
  EXPECT_EQ(ledger.budget_limit, Rational(1));
  EXPECT_TRUE(ledger.exceeded());
}

TEST(Compose, SingleNode) {
  NoiseSite s{"a", std::nullopt, Rational(3, 10), {}};
  auto tree = ComposeSites({s}, {}, Schema{});
  EXPECT_EQ(tree.Cost(), Rational(3, 10));
}

TEST(Compose, GroupedNodeExpandsPerCell) {
  auto ledger = LedgerOf("daily_counts_grouped");
  ASSERT_EQ(ledger.entries.size(), 1u);
  EXPECT_EQ(ledger.entries[0].releases, 5u);
  EXPECT_EQ(ledger.worst_case_total, Rational(1));
}

TEST(Compose, DisjointValuesWithoutConstraintAreSequential) {
  Schema schema;
  schema.columns.push_back({"p", ColumnKind::kCategorical, std::vector<std::string>{"a", "b"}});
  std::vector<NoiseSite> sites = {{"x", std::nullopt, Rational(1, 2), {{"p", "a"}}},
                                  {"y", std::nullopt, Rational(1, 2), {{"p", "b"}}}};
  EXPECT_EQ(ComposeSites(sites, {}, schema).Cost(), Rational(1));
  PartitionConstraint c{"p", Guarantee::kSingleValue, std::nullopt};
  EXPECT_EQ(ComposeSites(sites, {c}, schema).Cost(), Rational(1, 2));
}

TEST(Compose, WithinConstraintLicensesInsideEachCell) {
  Schema schema;
  schema.columns.push_back({"day", ColumnKind::kCategorical, std::vector<std::string>{"1", "2"}});
  schema.columns.push_back({"len", ColumnKind::kCategorical, std::vector<std::string>{"s", "l"}});
  std::vector<NoiseSite> sites;
  for (std::string d : {"1", "2"}) {
    for (std::string l : {"s", "l"}) {
      sites.push_back({d + l, std::nullopt, Rational(1), {{"day", d}, {"len", l}}});
    }
  }
  PartitionConstraint within{"len", Guarantee::kSingleValue, std::string("day")};
  EXPECT_EQ(ComposeSites(sites, {within}, schema).Cost(), Rational(2));
  EXPECT_EQ(ComposeSites(sites, {}, schema).Cost(), Rational(4));
}

TEST(Compose, NoConstraintsSumsEntries) {
  for (const auto& c : testing::LoadManifest()) {
    auto plan = testing::LoadCasePlan(c);
    if (!plan.constraints.empty()) continue;
    auto ledger = Compose(plan);
    Rational sum = 0;
    for (const auto& e : ledger.entries) sum += e.epsilon * static_cast<long long>(e.releases);
    EXPECT_EQ(ledger.worst_case_total, sum) << c.name;
  }
}

TEST(Compose, RemovingANodeNeverIncreasesTotal) {
  for (const auto& c : testing::LoadManifest()) {
    auto plan = testing::LoadCasePlan(c);
    auto sites = CollectNoiseSites(plan);
    Rational full = ComposeSites(sites, plan.constraints, plan.schema).Cost();
    for (std::size_t i = 0; i < sites.size(); ++i) {
      auto fewer = sites;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
      EXPECT_LE(ComposeSites(fewer, plan.constraints, plan.schema).Cost(), full) << c.name;
    }
  }
}

TEST(Compose, DroppingConstraintsNeverDecreasesTotal) {
  for (const auto& c : testing::LoadManifest()) {
    auto plan = testing::LoadCasePlan(c);
    auto sites = CollectNoiseSites(plan);
    EXPECT_GE(ComposeSites(sites, {}, plan.schema).Cost(),
              ComposeSites(sites, plan.constraints, plan.schema).Cost())
        << c.name;
  }
}

TEST(Compose, IsDeterministic) {
  auto a = LedgerOf("telemetry_average");
  auto b = LedgerOf("telemetry_average");
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].node_id, b.entries[i].node_id);
  EXPECT_EQ(a.worst_case_total, b.worst_case_total);
}

TEST(Compose, NonPositiveEpsilonIsAnError) {
  auto cases = testing::LoadManifest();
  auto plan = testing::LoadCasePlan(testing::FindCase(cases, "mistake2_correct"));
  for (auto& n : plan.nodes) {
    if (n.kind() == NodeKind::kNoise) {
      auto p = n.as<NoisePayload>();
      p.epsilon = SymbolicEpsilon{"epsilon_total - 1"};
      n.payload = p;
    }
  }
  EXPECT_THROW(Compose(plan), BudgetError);
}

TEST(AllocateEqual, Examples) {
  EXPECT_EQ(AllocateEqual(Rational(1), 14), Rational(1, 14));
  EXPECT_EQ(AllocateEqual(Rational(1), 14) * 14, Rational(1));
  EXPECT_EQ(AllocateEqual(Rational(1), 2), Rational(1, 2));
  EXPECT_EQ(AllocateEqual(Rational(7, 3), 1), Rational(7, 3));
  EXPECT_THROW(AllocateEqual(Rational(1), 0), ContractViolation);
}

}  // namespace
}  // namespace dpaudit
