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

// Worst-case per-unit privacy budget under sequential (sum) and parallel
// (max) composition. Parallel composition is only ever licensed by a
// declared PartitionConstraint; disjoint attribute values alone never are.

#ifndef DPAUDIT_BUDGET_H_
#define DPAUDIT_BUDGET_H_

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpaudit/plan.h"
#include "dpaudit/rational.h"

namespace dpaudit {

class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& message, std::string node_id)
      : std::runtime_error(message), node_id_(std::move(node_id)) {}
  const std::string& node_id() const { return node_id_; }

 private:
  std::string node_id_;
};

// One release of one noise node. Grouped noise nodes yield one site per cell.
struct NoiseSite {
  std::string node_id;
  std::optional<std::string> cell;
  Rational epsilon;
  // Categorical column -> the single value every contributing row has.
  std::map<std::string, std::string> scope;
};

struct CompositionNode {
  enum class Kind { kLeaf, kSequential, kParallel };

  Kind kind = Kind::kSequential;
  // Leaf fields.
  std::string node_id;
  std::optional<std::string> cell;
  Rational epsilon = 0;
  // Column the children are split on (parallel, or sequential per-cell split).
  std::string attribute;
  // Value of the parent's split column this subtree covers, if any.
  std::optional<std::string> label;
  std::vector<CompositionNode> children;

  Rational Cost() const;
};

struct LedgerEntry {
  std::string node_id;
  Rational epsilon;          // per release
  std::size_t releases = 1;  // cells of a grouped noise node
};

struct BudgetLedger {
  std::vector<LedgerEntry> entries;  // sorted by node id
  CompositionNode composition;
  Rational worst_case_total = 0;
  Rational budget_limit = 0;

  bool exceeded() const { return worst_case_total > budget_limit; }
};

// Sites of every noise node of a validated plan. Throws BudgetError when an
// epsilon is unresolvable or nonpositive.
std::vector<NoiseSite> CollectNoiseSites(const AnalysisPlan& plan);

// Composition tree over arbitrary sites; children in canonical order.
CompositionNode ComposeSites(std::vector<NoiseSite> sites,
                             const std::vector<PartitionConstraint>& constraints,
                             const Schema& schema);

BudgetLedger Compose(const AnalysisPlan& plan);

// epsilon_total / n, exact. Throws ContractViolation for n == 0.
Rational AllocateEqual(const Rational& epsilon_total, std::size_t n);

}  // namespace dpaudit

#endif  // DPAUDIT_BUDGET_H_
