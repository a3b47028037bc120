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

// The five error-class checks and report assembly.
//
//   M1  misused sensitivity          noise scale below the derived bound
//   M2  data-dependent hyperparameter a hyperparameter computed from raw data
//   M3  partially privatized          a release reachable from the source
//                                     without passing a noise node
//   M4  overly noisy result (warning) signal-to-sensitivity ratio < threshold
//   M5  budget exceeded               worst-case composed epsilon > total
//
// All checks assume a plan that passed ValidatePlan.

#ifndef DPAUDIT_VERIFIER_H_
#define DPAUDIT_VERIFIER_H_

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpaudit/budget.h"
#include "dpaudit/plan.h"

namespace dpaudit {

enum class FindingCode {
  kMisusedSensitivity = 1,
  kDataDependentHyperparam = 2,
  kPartiallyPrivatized = 3,
  kOverlyNoisy = 4,
  kBudgetExceeded = 5,
};

enum class Severity { kViolation, kWarning };

// "M1_MISUSED_SENSITIVITY"
std::string_view CodeName(FindingCode code);
// "M1"
std::string ShortCode(FindingCode code);
// Accepts "M1", "m1" or the full name.
std::optional<FindingCode> ParseFindingCode(std::string_view text);
Severity SeverityOf(FindingCode code);

struct Finding {
  FindingCode code;
  Severity severity;
  std::vector<std::string> node_ids;
  std::string message;
  std::string suggestion;
};

enum class Verdict { kPass, kFail, kPassWithWarnings };

std::string_view VerdictName(Verdict verdict);

struct Report {
  std::string plan_name;
  std::string plan_hash;  // FNV-1a-64 of the canonical plan text, hex
  std::vector<Finding> findings;  // sorted by (code, first node id)
  BudgetLedger ledger;
  Verdict verdict = Verdict::kPass;

  std::set<FindingCode> Codes() const;
  bool has_violations() const { return verdict == Verdict::kFail; }
};

// Thrown by Verify when the plan is structurally invalid.
class PlanInvalid : public std::runtime_error {
 public:
  explicit PlanInvalid(std::vector<StructuralError> errors);
  const std::vector<StructuralError>& errors() const { return errors_; }

 private:
  std::vector<StructuralError> errors_;
};

// Nodes whose value depends on raw data with no noise node in between.
std::set<std::string> SensitiveNodes(const AnalysisPlan& plan);

std::vector<Finding> CheckMisusedSensitivity(const AnalysisPlan& plan);
std::vector<Finding> CheckDataDependentHyperparams(const AnalysisPlan& plan);
std::vector<Finding> CheckPartialPrivatization(const AnalysisPlan& plan);

inline constexpr double kDefaultNoiseThreshold = 1.0;
std::vector<Finding> CheckNoisePlacement(const AnalysisPlan& plan,
                                         double threshold = kDefaultNoiseThreshold);
std::vector<Finding> CheckBudget(const AnalysisPlan& plan);

struct VerifyOptions {
  double noise_threshold = kDefaultNoiseThreshold;
};

Report Verify(const AnalysisPlan& plan, const VerifyOptions& options = {});

std::string ReportToJson(const Report& report, int indent = 2);
std::string ReportToText(const Report& report, bool color = false);
std::string StructuralErrorsToText(const std::vector<StructuralError>& errors);
std::string StructuralErrorsToJson(const std::vector<StructuralError>& errors, int indent = 2);

}  // namespace dpaudit

#endif  // DPAUDIT_VERIFIER_H_
