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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dpaudit/cli.h"
#include "json.hpp"
#include "test_util.h"

namespace dpaudit {
namespace {

using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Plan(const std::string& name) { return testing::SourcePath("fixtures/plans/" + name + ".json"); }
std::string Data(const std::string& name) { return testing::SourcePath("fixtures/data/" + name + ".csv"); }

std::string TempFile(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("dpaudit_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

TEST(Check, AverageFixtureFails) {
  auto o = Cli({"check", Plan("telemetry_average"), "--format", "json"});
  EXPECT_EQ(o.code, kExitViolation);
  auto j = json::parse(o.out);
  std::set<std::string> codes;
  for (const auto& f : j["findings"]) codes.insert(f["code"].get<std::string>().substr(0, 2));
  EXPECT_EQ(codes, (std::set<std::string>{"M1", "M3", "M5"}));
}

TEST(Check, CorrectFixturePasses) {
  auto o = Cli({"check", Plan("restaurant_ratio")});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("verdict: pass"), std::string::npos);
}

TEST(Check, WarningsOnlyDependsOnStrictFlag) {
  EXPECT_EQ(Cli({"check", Plan("mistake4_incorrect")}).code, kExitOk);
  EXPECT_EQ(Cli({"check", Plan("mistake4_incorrect"), "--strict-warnings"}).code, kExitViolation);
  EXPECT_EQ(Cli({"check", Plan("mistake4_incorrect"), "--threshold", "0.2"}).out.find("M4"), std::string::npos);
}

TEST(Check, MalformedFileIsToolError) {
  auto path = TempFile("bad.json", "{\n  \"schema\": [,\n}");
  auto o = Cli({"check", path});
  EXPECT_EQ(o.code, kExitToolError);
  EXPECT_NE(o.err.find("parse error"), std::string::npos);
  EXPECT_NE(o.err.find(":2:"), std::string::npos);
}

TEST(Check, StructuralErrorIsToolError) {
  auto j = json::parse(testing::ReadFile(Plan("mistake2_correct")));
  j["nodes"].push_back({{"id", "second_source"}, {"kind", "source"}});
  auto o = Cli({"check", TempFile("structural.json", j.dump())});
  EXPECT_EQ(o.code, kExitToolError);
  EXPECT_NE((o.out + o.err).find("MULTIPLE_SOURCES"), std::string::npos);
}

TEST(Check, MissingFile) {
  EXPECT_EQ(Cli({"check", "/nonexistent/plan.json"}).code, kExitToolError);
}

TEST(Run, DeterministicWithSeed) {
  std::vector<std::string> args = {"run", Plan("restaurant_ratio"), Data("restaurant"), "--seed", "42",
                                   "--format", "json"};
  auto a = Cli(args);
  auto b = Cli(args);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
  auto c = Cli({"run", Plan("restaurant_ratio"), Data("restaurant"), "--seed", "43", "--format", "json"});
  EXPECT_NE(a.out, c.out);
}

TEST(Run, RefusesInvalidPlanWithReport) {
  auto o = Cli({"run", Plan("telemetry_average"), Data("telemetry"), "--format", "json"});
  EXPECT_EQ(o.code, kExitViolation);
  EXPECT_NE(o.out.find("M1_MISUSED_SENSITIVITY"), std::string::npos);
  auto forced = Cli({"run", Plan("telemetry_average"), Data("telemetry"), "--allow-invalid"});
  EXPECT_EQ(forced.code, kExitOk);
}

TEST(Run, NoNoiseZscores) {
  auto o = Cli({"run", Plan("zscore_correct"), Data("telemetry"), "--no-noise", "--format", "json"});
  ASSERT_EQ(o.code, kExitOk);
  auto j = json::parse(o.out);
  EXPECT_EQ(j["noise_enabled"], false);
  double sum = 0;
  for (const auto& [k, v] : j["released"].items()) sum += v.get<double>();
  EXPECT_NEAR(sum, 0.0, 1e-9);  // z-scores around their own mean
}

TEST(Run, TraceFile) {
  auto path = (std::filesystem::temp_directory_path() / "dpaudit_cli_trace.json").string();
  std::remove(path.c_str());
  auto o = Cli({"run", Plan("mistake2_correct"), Data("restaurant"), "--trace", path});
  EXPECT_EQ(o.code, kExitOk);
  auto j = json::parse(testing::ReadFile(path));
  EXPECT_TRUE(j.contains("trace"));
}

TEST(Run, BadDataIsToolError) {
  auto csv = TempFile("bad.csv", "VisitorId,Day,Visit Length,Time spent\nv1,9,long,3\n");
  EXPECT_EQ(Cli({"run", Plan("mistake2_correct"), csv}).code, kExitToolError);
}

TEST(Run, RuntimeErrorExitCode) {
  auto j = json::parse(testing::ReadFile(Plan("mistake2_correct")));
  j["nodes"].push_back({{"id", "bad"}, {"kind", "post_process"}, {"expr", {"sqrt", {"sub", 0, {"abs", "noisy_visits"}}}}});
  j["nodes"].push_back({{"id", "r2"}, {"kind", "release"}});
  j["edges"].push_back({"bad", "r2"});
  auto o = Cli({"run", TempFile("runtime.json", j.dump()), Data("restaurant"), "--seed", "1"});
  EXPECT_EQ(o.code, kExitRuntimeError);
}

TEST(Oracle, SoundOnSixUsers) {
  auto o = Cli({"oracle", Plan("oracle_count_clip5"), Data("restaurant_six_users"), "visits"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("SOUND"), std::string::npos);
  EXPECT_EQ(o.out.find("UNSOUND"), std::string::npos);
}

TEST(Oracle, HeavyUserAgainstDeclaredOne) {
  auto o = Cli({"oracle", Plan("telemetry_average"), Data("telemetry_heavy_user"), "noisy_total_a",
                "--format", "json"});
  EXPECT_EQ(o.code, kExitViolation);
  auto j = json::parse(o.out);
  EXPECT_EQ(j["empirical"], 7.0);
  EXPECT_EQ(j["verdict"], "UNSOUND");
}

TEST(Oracle, EmptyDatasetGivesFullClip) {
  auto o = Cli({"oracle", Plan("oracle_count_clip5"), Data("restaurant_empty"), "visits", "--format", "json"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_EQ(json::parse(o.out)["empirical"], 5.0);
}

TEST(Oracle, CapExceeded) {
  auto o = Cli({"oracle", Plan("mistake2_correct"), Data("restaurant"), "visits"});
  EXPECT_EQ(o.code, kExitToolError);
  EXPECT_FALSE(o.err.empty());
}

TEST(Explain, KnownCodes) {
  auto m5 = Cli({"explain", "M5"});
  EXPECT_EQ(m5.code, kExitOk);
  EXPECT_NE(m5.out.find("5 days"), std::string::npos);
  auto m3 = Cli({"explain", "m3"});
  EXPECT_EQ(m3.code, kExitOk);
  EXPECT_NE(m3.out.find("epsilon_total / 2"), std::string::npos);
}

TEST(Explain, UnknownCode) {
  auto o = Cli({"explain", "M9"});
  EXPECT_EQ(o.code, kExitToolError);
}

TEST(Help, ListsCommands) {
  auto o = Cli({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  for (const char* cmd : {"check", "run", "oracle", "explain"}) EXPECT_NE(o.out.find(cmd), std::string::npos);
}

TEST(Color, EnvironmentToggle) {
  setenv("DPAUDIT_COLOR", "1", 1);
  auto colored = Cli({"check", Plan("telemetry_average")});
  unsetenv("DPAUDIT_COLOR");
  auto plain = Cli({"check", Plan("telemetry_average")});
  EXPECT_NE(colored.out.find("\x1b["), std::string::npos);
  EXPECT_EQ(plain.out.find("\x1b["), std::string::npos);
}

}  // namespace
}  // namespace dpaudit
