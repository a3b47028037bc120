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

#include "test_util.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dpaudit::testing {

std::string SourcePath(const std::string& relative) {
  return std::string(DPAUDIT_SOURCE_DIR) + "/" + relative;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<FixtureCase> LoadManifest() {
  auto j = nlohmann::json::parse(ReadFile(SourcePath("fixtures/manifest.json")));
  std::vector<FixtureCase> out;
  for (const auto& c : j.at("cases")) {
    FixtureCase fc;
    fc.name = c.at("name").get<std::string>();
    fc.plan_path = SourcePath("fixtures/" + c.at("plan").get<std::string>());
    if (!c.at("data").is_null()) fc.data_path = SourcePath("fixtures/" + c.at("data").get<std::string>());
    const auto& e = c.at("expected");
    if (e.is_string()) {
      fc.expect_pass = e.get<std::string>() == "pass";
    } else {
      for (const auto& code : e) fc.codes.insert(code.get<std::string>());
    }
    if (auto it = c.find("tags"); it != c.end()) {
      for (const auto& t : *it) fc.tags.insert(t.get<std::string>());
    }
    if (auto it = c.find("documented_warnings"); it != c.end()) {
      fc.documented_warnings = it->get<std::string>();
    }
    fc.note = c.value("note", "");
    out.push_back(std::move(fc));
  }
  return out;
}

const FixtureCase& FindCase(const std::vector<FixtureCase>& cases, const std::string& name) {
  for (const auto& c : cases) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no fixture case " + name);
}

AnalysisPlan LoadCasePlan(const FixtureCase& c) { return LoadPlanFile(c.plan_path); }

Dataset LoadCaseData(const FixtureCase& c, const AnalysisPlan& plan) {
  if (!c.data_path) throw std::runtime_error("fixture " + c.name + " has no dataset");
  return LoadDataset(*c.data_path, plan.schema, plan.privacy.unit_column);
}

std::set<std::string> ShortCodes(const Report& report) {
  std::set<std::string> out;
  for (const auto& f : report.findings) out.insert(ShortCode(f.code));
  return out;
}

}  // namespace dpaudit::testing
