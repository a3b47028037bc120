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

#include <algorithm>

#include <gtest/gtest.h>

#include "dpaudit/plan.h"
#include "dpaudit/plan_graph.h"
#include "json.hpp"
#include "test_util.h"

namespace dpaudit {
namespace {

using nlohmann::json;
using testing::LoadManifest;

json MinimalPlan() {
  return json::parse(R"({
    "schema": {"columns": [
      {"name": "uid", "kind": "identifier"},
      {"name": "color", "kind": "categorical", "values": ["red", "blue"]},
      {"name": "amount", "kind": "numeric"}]},
    "privacy": {"unit_column": "uid", "neighboring": "add_or_remove_one", "epsilon_total": 1.0},
    "nodes": [
      {"id": "src", "kind": "source"},
      {"id": "n", "kind": "aggregate", "op": "count", "where": [], "group_by": null, "column": null},
      {"id": "noisy", "kind": "noise", "mechanism": "laplace", "epsilon": 1.0, "sensitivity": 1},
      {"id": "out", "kind": "release"}],
    "edges": [["src", "n"], ["n", "noisy"], ["noisy", "out"]],
    "constraints": []
  })");
}

std::vector<std::string> Codes(const std::vector<StructuralError>& errors) {
  std::vector<std::string> out;
  for (const auto& e : errors) out.push_back(e.code);
  return out;
}

bool HasCode(const std::vector<StructuralError>& errors, const std::string& code) {
  auto c = Codes(errors);
  return std::find(c.begin(), c.end(), code) != c.end();
}

TEST(ParsePlan, MinimalPlanIsFourNodeDag) {
  AnalysisPlan plan = ParsePlan(MinimalPlan().dump());
  EXPECT_EQ(plan.nodes.size(), 4u);
  EXPECT_EQ(plan.edges.size(), 3u);
  EXPECT_TRUE(ValidatePlan(plan).empty());
  PlanGraph graph(plan);
  ASSERT_TRUE(graph.TopologicalOrder().has_value());
  EXPECT_EQ(graph.TopologicalOrder()->front(), "src");
}

TEST(ParsePlan, ZscoreFixtureHasFourteenNoiseNodes) {
  auto cases = LoadManifest();
  AnalysisPlan plan = testing::LoadCasePlan(testing::FindCase(cases, "zscore_correct"));
  auto noise = std::count_if(plan.nodes.begin(), plan.nodes.end(),
                             [](const PlanNode& n) { return n.kind() == NodeKind::kNoise; });
  auto releases = std::count_if(plan.nodes.begin(), plan.nodes.end(),
                                [](const PlanNode& n) { return n.kind() == NodeKind::kRelease; });
  EXPECT_EQ(noise, 14);
  EXPECT_EQ(releases, 7);
}

TEST(ParsePlan, DanglingEdgeNamesTheId) {
  json j = MinimalPlan();
  j["edges"].push_back({"noisy", "ghost"});
  try {
    ParsePlan(j.dump());
    FAIL() << "expected a parse error";
  } catch (const PlanParseError& e) {
    EXPECT_EQ(e.identifier(), "ghost");
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(ParsePlan, UnknownKindIsRejected) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "x"}, {"kind", "sampler"}});
  try {
    ParsePlan(j.dump());
    FAIL();
  } catch (const PlanParseError& e) {
    EXPECT_EQ(e.identifier(), "sampler");
  }
}

TEST(ParsePlan, SyntaxErrorCarriesPosition) {
  try {
    ParsePlan("{\n  \"schema\": [1,\n}");
    FAIL();
  } catch (const PlanParseError& e) {
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 3u);
    EXPECT_TRUE(e.column().has_value());
  }
}

TEST(ParsePlan, UnknownKeyIsRejected) {
  json j = MinimalPlan();
  j["nodes"][2]["sensitivty"] = 1;
  EXPECT_THROW(ParsePlan(j.dump()), PlanParseError);
}

TEST(ParsePlan, DuplicateIdIsRejected) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "out"}, {"kind", "release"}});
  EXPECT_THROW(ParsePlan(j.dump()), PlanParseError);
}

TEST(ParsePlan, RoundTripIsIdentity) {
  for (const auto& c : LoadManifest()) {
    AnalysisPlan plan = testing::LoadCasePlan(c);
    std::string text = SerializePlan(plan);
    AnalysisPlan again = ParsePlan(text);
    EXPECT_EQ(plan, again) << c.name;
    EXPECT_EQ(SerializePlan(again), text) << c.name;
  }
}

TEST(ParsePlan, SymbolicEpsilonSurvivesRoundTrip) {
  json j = MinimalPlan();
  j["nodes"][2]["epsilon"] = "epsilon_total / 14";
  AnalysisPlan plan = ParsePlan(j.dump());
  const auto& noise = plan.Get("noisy").as<NoisePayload>();
  ASSERT_TRUE(std::holds_alternative<SymbolicEpsilon>(noise.epsilon));
  EXPECT_EQ(*ResolveEpsilon(noise, plan), Rational(1, 14));
  EXPECT_EQ(ParsePlan(SerializePlan(plan)), plan);
}

TEST(ValidatePlan, CycleListsItsNodes) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "p"}, {"kind", "post_process"}, {"expr", {"add", "q", 1}}});
  j["nodes"].push_back({{"id", "q"}, {"kind", "post_process"}, {"expr", {"add", "p", 1}}});
  auto errors = ValidatePlan(ParsePlan(j.dump()));
  ASSERT_TRUE(HasCode(errors, "CYCLE"));
  for (const auto& e : errors) {
    if (e.code == "CYCLE") EXPECT_EQ(e.node_ids, (std::vector<std::string>{"p", "q"}));
  }
}

TEST(ValidatePlan, TwoSources) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "src2"}, {"kind", "source"}});
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "MULTIPLE_SOURCES"));
}

TEST(ValidatePlan, NoSource) {
  json j = MinimalPlan();
  j["nodes"][0] = {{"id", "src"}, {"kind", "constant"}, {"value", 1}};
  j["edges"][0] = {"src", "n"};
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "NO_SOURCE"));
}

TEST(ValidatePlan, UnitColumnMustExist) {
  json j = MinimalPlan();
  j["privacy"]["unit_column"] = "nobody";
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "UNKNOWN_COLUMN"));
}

TEST(ValidatePlan, NonPositiveBudget) {
  json j = MinimalPlan();
  j["privacy"]["epsilon_total"] = 0;
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "NONPOSITIVE_EPSILON"));
}

TEST(ValidatePlan, ReleaseNeedsExactlyOneInput) {
  json j = MinimalPlan();
  j["edges"].push_back({"n", "out"});
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "BAD_ARITY"));
}

TEST(ValidatePlan, ConstraintOnNumericColumn) {
  json j = MinimalPlan();
  j["constraints"].push_back({{"attribute", "amount"}, {"guarantee", "single_value"}});
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "NOT_CATEGORICAL"));
}

TEST(ValidatePlan, SumNeedsNumericColumn) {
  json j = MinimalPlan();
  j["nodes"][1]["op"] = "sum";
  j["nodes"][1]["column"] = "color";
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "TYPE_MISMATCH"));
}

TEST(ValidatePlan, GroupByNeedsClosedValueSet) {
  json j = MinimalPlan();
  j["schema"]["columns"].push_back({{"name", "city"}, {"kind", "categorical"}});
  j["nodes"][1]["group_by"] = "city";
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "OPEN_VALUE_SET"));
}

TEST(ValidatePlan, ClipBoundMustBePositive) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "c"}, {"kind", "clip"}, {"per_unit_bound", 0}, {"scope", nullptr}});
  j["edges"] = json::array({json::array({"src", "c"}), json::array({"c", "n"}), json::array({"n", "noisy"}), json::array({"noisy", "out"})});
  EXPECT_TRUE(HasCode(ValidatePlan(ParsePlan(j.dump())), "INVALID_BOUND"));
}

TEST(ValidatePlan, IsPureAndSorted) {
  json j = MinimalPlan();
  j["nodes"].push_back({{"id", "src2"}, {"kind", "source"}});
  j["nodes"].push_back({{"id", "a_bad"}, {"kind", "release"}});
  j["privacy"]["epsilon_total"] = -1;
  AnalysisPlan plan = ParsePlan(j.dump());
  auto first = ValidatePlan(plan);
  auto second = ValidatePlan(plan);
  EXPECT_EQ(first, second);
  ASSERT_GE(first.size(), 2u);
  bool node_seen = false;
  std::string last;
  for (const auto& e : first) {
    if (e.node_ids.empty()) {
      EXPECT_FALSE(node_seen) << "plan-level errors come first";
      continue;
    }
    node_seen = true;
    EXPECT_LE(last, e.node_ids.front());
    last = e.node_ids.front();
  }
}

TEST(ValidatePlan, EveryFixtureIsStructurallyValid) {
  for (const auto& c : LoadManifest()) {
    auto errors = ValidatePlan(testing::LoadCasePlan(c));
    EXPECT_TRUE(errors.empty()) << c.name << ": " << (errors.empty() ? "" : errors[0].message);
  }
}

TEST(ValidatePlan, RestaurantRatioIsValid) {
  auto cases = LoadManifest();
  EXPECT_TRUE(ValidatePlan(testing::LoadCasePlan(testing::FindCase(cases, "restaurant_ratio"))).empty());
}

}  // namespace
}  // namespace dpaudit
