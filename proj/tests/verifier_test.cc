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
#include <functional>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "dpaudit/verifier.h"
#include "json.hpp"
#include "test_util.h"

namespace dpaudit {
namespace {

using nlohmann::json;

const std::vector<testing::FixtureCase>& Cases() {
  static const auto cases = testing::LoadManifest();
  return cases;
}

AnalysisPlan Fixture(const std::string& name) {
  return testing::LoadCasePlan(testing::FindCase(Cases(), name));
}

json Base() {
  return json::parse(R"({
    "schema": {"columns": [
      {"name": "uid", "kind": "identifier"},
      {"name": "kind", "kind": "categorical", "values": ["x", "y"]},
      {"name": "amount", "kind": "numeric"}]},
    "privacy": {"unit_column": "uid", "epsilon_total": 1.0},
    "nodes": [
      {"id": "src", "kind": "source"},
      {"id": "clip", "kind": "clip", "per_unit_bound": 5, "scope": null},
      {"id": "n", "kind": "aggregate", "op": "count"},
      {"id": "noisy", "kind": "noise", "epsilon": 1.0, "sensitivity": 5},
      {"id": "out", "kind": "release"}],
    "edges": [["src", "clip"], ["clip", "n"], ["n", "noisy"], ["noisy", "out"]]
  })");
}

json& Node(json& plan, const std::string& id) {
  for (auto& n : plan["nodes"]) {
    if (n["id"] == id) return n;
  }
  throw std::runtime_error(id);
}

std::set<std::string> CodesOf(const json& plan) {
  return testing::ShortCodes(Verify(ParsePlan(plan.dump())));
}

TEST(Verify, AverageFixtureCodes) {
  EXPECT_EQ(testing::ShortCodes(Verify(Fixture("telemetry_average"))),
            (std::set<std::string>{"M1", "M3", "M5"}));
}

TEST(Verify, ZscoreFixtureCodes) {
  EXPECT_EQ(testing::ShortCodes(Verify(Fixture("telemetry_zscore"))),
            (std::set<std::string>{"M2", "M4"}));
}

TEST(Verify, RestaurantRatioPasses) {
  auto report = Verify(Fixture("restaurant_ratio"));
  EXPECT_EQ(report.verdict, Verdict::kPass);
  EXPECT_TRUE(report.findings.empty());
}

TEST(Verify, BaselinePasses) { EXPECT_TRUE(CodesOf(Base()).empty()); }

TEST(CheckMisusedSensitivity, UnboundedIsFlaggedWhateverTheDeclaration) {
  json p = Base();
  p["edges"] = json::array({json::array({"src", "n"}), json::array({"n", "noisy"}), json::array({"noisy", "out"})});
  p["nodes"].erase(1);
  Node(p, "noisy")["sensitivity"] = 1000;
  auto findings = CheckMisusedSensitivity(ParsePlan(p.dump()));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].node_ids.front(), "noisy");
  Node(p, "noisy")["sensitivity"] = "auto";
  EXPECT_EQ(CheckMisusedSensitivity(ParsePlan(p.dump())).size(), 1u);
}

TEST(CheckMisusedSensitivity, UnderstatedConstant) {
  json p = Base();
  Node(p, "noisy")["sensitivity"] = 4;
  EXPECT_EQ(CodesOf(p), std::set<std::string>{"M1"});
}

TEST(CheckMisusedSensitivity, OverstatedConstantIsSound) {
  json p = Base();
  Node(p, "noisy")["sensitivity"] = 10;
  EXPECT_TRUE(CheckMisusedSensitivity(ParsePlan(p.dump())).empty());
}

TEST(CheckMisusedSensitivity, AutoResolves) {
  json p = Base();
  Node(p, "noisy")["sensitivity"] = "auto";
  EXPECT_TRUE(CodesOf(p).empty());
}

TEST(CheckDataDependentHyperparams, RawDataSensitivity) {
  auto findings = CheckDataDependentHyperparams(Fixture("telemetry_zscore"));
  EXPECT_EQ(findings.size(), 7u);
  for (const auto& f : findings) {
    EXPECT_EQ(f.code, FindingCode::kDataDependentHyperparam);
    EXPECT_EQ(f.severity, Severity::kViolation);
  }
}

TEST(CheckDataDependentHyperparams, LiteralIsFine) {
  json p = Base();
  p["nodes"].push_back({{"id", "s"}, {"kind", "hyperparameter"}, {"value", 10}});
  Node(p, "noisy")["sensitivity"] = {{"ref", "s"}};
  EXPECT_TRUE(CodesOf(p).empty());
}

TEST(CheckDataDependentHyperparams, NoisedInputIsPostProcessing) {
  json p = Base();
  p["nodes"].push_back({{"id", "bound"}, {"kind", "hyperparameter"}, {"value", {"max", "noisy", 1}}});
  p["nodes"].push_back({{"id", "clip2"}, {"kind", "clip"}, {"per_unit_bound", {{"ref", "bound"}}}, {"scope", nullptr}});
  p["nodes"].push_back({{"id", "m"}, {"kind", "aggregate"}, {"op", "count"}});
  p["nodes"].push_back({{"id", "noisy2"}, {"kind", "noise"}, {"epsilon", 0.5}, {"sensitivity", "auto"}});
  p["nodes"].push_back({{"id", "out2"}, {"kind", "release"}});
  Node(p, "noisy")["epsilon"] = 0.5;
  for (json e : {json{"src", "clip2"}, json{"clip2", "m"}, json{"m", "noisy2"}, json{"noisy2", "out2"}}) {
    p["edges"].push_back(e);
  }
  EXPECT_TRUE(CheckDataDependentHyperparams(ParsePlan(p.dump())).empty());
}

TEST(CheckDataDependentHyperparams, RawClipBound) {
  json p = Base();
  p["nodes"].push_back({{"id", "most"}, {"kind", "aggregate"}, {"op", "max_per_unit"}});
  p["nodes"].push_back({{"id", "bound"}, {"kind", "hyperparameter"}, {"value", "most"}});
  p["edges"].push_back({"src", "most"});
  Node(p, "clip")["per_unit_bound"] = {{"ref", "bound"}};
  Node(p, "noisy")["sensitivity"] = 5;
  EXPECT_TRUE(CodesOf(p).count("M2"));
}

TEST(CheckPartialPrivatization, NoisyOverTrue) {
  auto findings = CheckPartialPrivatization(Fixture("mistake3_incorrect"));
  ASSERT_EQ(findings.size(), 1u);
  const auto& nodes = findings[0].node_ids;
  EXPECT_EQ(nodes.front(), "out");
  EXPECT_NE(std::find(nodes.begin(), nodes.end(), "total_visits"), nodes.end());
  EXPECT_TRUE(CheckPartialPrivatization(Fixture("mistake3_correct")).empty());
}

TEST(CheckPartialPrivatization, ConstantReleaseIsFine) {
  json p = Base();
  p["nodes"].push_back({{"id", "c"}, {"kind", "constant"}, {"value", 3}});
  p["nodes"].push_back({{"id", "out_c"}, {"kind", "release"}});
  p["edges"].push_back({"c", "out_c"});
  EXPECT_TRUE(CheckPartialPrivatization(ParsePlan(p.dump())).empty());
}

TEST(CheckPartialPrivatization, ClampDoesNotSanitize) {
  json p = Base();
  p["nodes"].push_back({{"id", "c"}, {"kind", "post_process"}, {"expr", {"clamp", "n", 0, 1}}});
  p["nodes"].push_back({{"id", "out_c"}, {"kind", "release"}});
  p["edges"].push_back({"c", "out_c"});
  EXPECT_EQ(CheckPartialPrivatization(ParsePlan(p.dump())).size(), 1u);
}

TEST(CheckNoisePlacement, LowRatioWarns) {
  auto findings = CheckNoisePlacement(Fixture("mistake4_incorrect"));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].severity, Severity::kWarning);
  auto report = Verify(Fixture("mistake4_incorrect"));
  EXPECT_EQ(report.verdict, Verdict::kPassWithWarnings);
  EXPECT_FALSE(report.has_violations());
}

TEST(CheckNoisePlacement, RatioAtThresholdIsQuiet) {
  json p = Base();
  Node(p, "noisy")["signal_estimate"] = 5;
  EXPECT_TRUE(CheckNoisePlacement(ParsePlan(p.dump())).empty());
  Node(p, "noisy")["signal_estimate"] = 4.999;
  EXPECT_EQ(CheckNoisePlacement(ParsePlan(p.dump())).size(), 1u);
  EXPECT_TRUE(CheckNoisePlacement(ParsePlan(p.dump()), 0.5).empty());
}

TEST(CheckNoisePlacement, UnannotatedCountIsSkipped) {
  EXPECT_TRUE(CheckNoisePlacement(ParsePlan(Base().dump())).empty());
}

TEST(CheckNoisePlacement, UnitRangeWithUnitSensitivityIsQuiet) {
  EXPECT_TRUE(CheckNoisePlacement(Fixture("zscore_per_product_budget")).empty());
}

TEST(CheckBudget, SevenReleases) {
  auto findings = CheckBudget(Fixture("zscore_per_product_budget"));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].node_ids.size(), 7u);
  EXPECT_NE(findings[0].message.find("7"), std::string::npos);
}

TEST(CheckBudget, ExactBudgetPasses) { EXPECT_TRUE(CheckBudget(Fixture("zscore_correct")).empty()); }

TEST(CheckBudget, NoNoiseNodes) {
  json p = Base();
  p["nodes"] = {{{"id", "src"}, {"kind", "source"}}};
  p["edges"] = json::array();
  auto plan = ParsePlan(p.dump());
  EXPECT_TRUE(CheckBudget(plan).empty());
  EXPECT_EQ(Verify(plan).ledger.worst_case_total, Rational(0));
}

TEST(Verify, StructuralErrorsAbort) {
  json p = Base();
  p["nodes"].push_back({{"id", "src2"}, {"kind", "source"}});
  try {
    Verify(ParsePlan(p.dump()));
    FAIL();
  } catch (const PlanInvalid& e) {
    ASSERT_FALSE(e.errors().empty());
    EXPECT_EQ(e.errors()[0].code, "MULTIPLE_SOURCES");
  }
}

TEST(Verify, IsIdempotent) {
  for (const auto& c : Cases()) {
    auto plan = testing::LoadCasePlan(c);
    EXPECT_EQ(ReportToJson(Verify(plan)), ReportToJson(Verify(plan))) << c.name;
    EXPECT_EQ(ReportToText(Verify(plan)), ReportToText(Verify(plan))) << c.name;
  }
}

TEST(Verify, FindingsAreSortedAndWellFormed) {
  for (const auto& c : Cases()) {
    auto plan = testing::LoadCasePlan(c);
    auto report = Verify(plan);
    for (std::size_t i = 0; i < report.findings.size(); ++i) {
      const auto& f = report.findings[i];
      EXPECT_EQ(f.severity, f.code == FindingCode::kOverlyNoisy ? Severity::kWarning
                                                                : Severity::kViolation);
      ASSERT_FALSE(f.node_ids.empty());
      for (const auto& id : f.node_ids) EXPECT_NE(plan.Find(id), nullptr) << id;
      EXPECT_FALSE(f.message.empty());
      EXPECT_FALSE(f.suggestion.empty());
      if (i > 0) {
        const auto& prev = report.findings[i - 1];
        EXPECT_LE(std::tie(prev.code, prev.node_ids), std::tie(f.code, f.node_ids));
      }
    }
    bool only_warnings = std::all_of(report.findings.begin(), report.findings.end(),
                                     [](const Finding& f) { return f.severity == Severity::kWarning; });
    Verdict expected = report.findings.empty() ? Verdict::kPass
                       : only_warnings         ? Verdict::kPassWithWarnings
                                               : Verdict::kFail;
    EXPECT_EQ(report.verdict, expected) << c.name;
  }
}

TEST(Verify, JsonFieldNames) {
  auto j = json::parse(ReportToJson(Verify(Fixture("telemetry_average"))));
  for (const char* key : {"plan", "plan_hash", "verdict", "findings", "ledger"}) EXPECT_TRUE(j.contains(key)) << key;
  const auto& f = j["findings"][0];
  for (const char* key : {"code", "severity", "nodes", "message", "suggestion"}) EXPECT_TRUE(f.contains(key)) << key;
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["ledger"]["worst_case_total"], "7");
}

// Exhaustive path enumeration over the dependency graph, written without the
// library's graph helpers.
std::map<std::string, bool> ReleasesWithUnnoisedPath(const json& plan) {
  std::map<std::string, std::vector<std::string>> parents;
  std::map<std::string, std::string> kind;
  std::function<void(const json&, const std::string&)> refs = [&](const json& e, const std::string& owner) {
    if (e.is_string() && e != "epsilon_total") parents[owner].push_back(e);
    if (e.is_array()) {
      for (std::size_t i = 1; i < e.size(); ++i) refs(e[i], owner);
    }
    if (e.is_object() && e.contains("ref")) parents[owner].push_back(e["ref"]);
  };
  for (const auto& n : plan["nodes"]) {
    std::string id = n["id"];
    kind[id] = n["kind"];
    for (const char* k : {"expr", "value", "per_unit_bound", "sensitivity", "epsilon", "guard"}) {
      if (n.contains(k) && !(n["kind"] == "constant" && std::string(k) == "value") &&
          !(std::string(k) == "epsilon" && n[k].is_string())) {
        refs(n[k], id);
      }
    }
  }
  for (const auto& e : plan["edges"]) parents[e[1]].push_back(e[0]);
  std::map<std::string, bool> out;
  std::function<bool(const std::string&)> reaches = [&](const std::string& id) -> bool {
    if (kind[id] == "source") return true;
    if (kind[id] == "noise") return false;
    for (const auto& p : parents[id]) {
      if (reaches(p)) return true;
    }
    return false;
  };
  for (const auto& [id, k] : kind) {
    if (k == "release") out[id] = reaches(id);
  }
  return out;
}

TEST(CheckPartialPrivatization, AgreesWithPathEnumeration) {
  for (const auto& c : Cases()) {
    auto plan_json = json::parse(testing::ReadFile(c.plan_path));
    ASSERT_LE(plan_json["nodes"].size(), 200u);
    auto expected = ReleasesWithUnnoisedPath(plan_json);
    std::set<std::string> flagged;
    for (const auto& f : CheckPartialPrivatization(ParsePlan(plan_json.dump()))) {
      flagged.insert(f.node_ids.front());
    }
    for (const auto& [release, unprotected] : expected) {
      EXPECT_EQ(flagged.count(release) > 0, unprotected) << c.name << " " << release;
    }
  }
}

TEST(Verify, NoisingThePathOnlyRemovesFindings) {
  json p = json::parse(testing::ReadFile(testing::FindCase(Cases(), "mistake3_incorrect").plan_path));
  auto before = Verify(ParsePlan(p.dump()));
  p["nodes"].push_back({{"id", "noisy_total"}, {"kind", "noise"}, {"epsilon", "epsilon_total / 2"}, {"sensitivity", 5}});
  Node(p, "noisy_long")["epsilon"] = "epsilon_total / 2";
  Node(p, "ratio")["expr"] = {"div", "noisy_long", "noisy_total"};
  for (auto& e : p["edges"]) {
    if (e[0] == "total_visits" && e[1] == "ratio") e = {"noisy_total", "ratio"};
  }
  p["edges"].push_back({"total_visits", "noisy_total"});
  auto after = Verify(ParsePlan(p.dump()));
  EXPECT_TRUE(testing::ShortCodes(before).count("M3"));
  auto codes = testing::ShortCodes(after);
  EXPECT_FALSE(codes.count("M3"));
  EXPECT_FALSE(codes.count("M1"));
  EXPECT_FALSE(codes.count("M2"));
}

TEST(FindingCodes, NamesAndParsing) {
  EXPECT_EQ(CodeName(FindingCode::kMisusedSensitivity), "M1_MISUSED_SENSITIVITY");
  EXPECT_EQ(CodeName(FindingCode::kBudgetExceeded), "M5_BUDGET_EXCEEDED");
  EXPECT_EQ(ParseFindingCode("m3"), FindingCode::kPartiallyPrivatized);
  EXPECT_EQ(ParseFindingCode("M4_OVERLY_NOISY"), FindingCode::kOverlyNoisy);
  EXPECT_FALSE(ParseFindingCode("M9").has_value());
  EXPECT_EQ(SeverityOf(FindingCode::kOverlyNoisy), Severity::kWarning);
}

}  // namespace
}  // namespace dpaudit
