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

#ifndef DPAUDIT_TESTS_TEST_UTIL_H_
#define DPAUDIT_TESTS_TEST_UTIL_H_

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dpaudit/dataset.h"
#include "dpaudit/plan.h"
#include "dpaudit/verifier.h"

namespace dpaudit::testing {

std::string SourcePath(const std::string& relative);
std::string ReadFile(const std::string& path);

struct FixtureCase {
  std::string name;
  std::string plan_path;  // absolute
  std::optional<std::string> data_path;
  bool expect_pass = false;
  std::set<std::string> codes;  // short codes, e.g. "M1"
  std::set<std::string> tags;
  std::optional<std::string> documented_warnings;
  std::string note;

  bool HasTag(const std::string& t) const { return tags.count(t) > 0; }
};

// Keeps gtest parameter names readable.
inline void PrintTo(const FixtureCase& c, std::ostream* os) { *os << c.name; }

std::vector<FixtureCase> LoadManifest();
const FixtureCase& FindCase(const std::vector<FixtureCase>& cases, const std::string& name);

AnalysisPlan LoadCasePlan(const FixtureCase& c);
Dataset LoadCaseData(const FixtureCase& c, const AnalysisPlan& plan);

std::set<std::string> ShortCodes(const Report& report);

}  // namespace dpaudit::testing

#endif  // DPAUDIT_TESTS_TEST_UTIL_H_
