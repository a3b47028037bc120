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

#ifndef DPAUDIT_PLAN_GRAPH_H_
#define DPAUDIT_PLAN_GRAPH_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpaudit/plan.h"
#include "dpaudit/rational.h"

namespace dpaudit {

// Adjacency view over a plan. Dependencies are the union of explicit edges
// and node references (expression operands, {"ref"} parameters). The plan
// must outlive the graph.
class PlanGraph {
 public:
  explicit PlanGraph(const AnalysisPlan& plan);

  const AnalysisPlan& plan() const { return *plan_; }

  // Sorted, deduplicated.
  const std::vector<std::string>& Dependencies(std::string_view id) const;
  const std::vector<std::string>& Dependents(std::string_view id) const;
  // Parents through explicit edges only, in edge-list order.
  const std::vector<std::string>& EdgeInputs(std::string_view id) const;
  // Node ids referenced by the node's payload ({"ref"} params, expressions).
  const std::vector<std::string>& References(std::string_view id) const;

  // Kahn order with lexicographic tie-break; nullopt if the graph is cyclic.
  const std::optional<std::vector<std::string>>& TopologicalOrder() const { return order_; }
  // Node ids of one cycle (sorted), empty when acyclic.
  std::vector<std::string> FindCycle() const;

  // The single data input of a clip/aggregate/noise/release node, if it has
  // exactly one edge parent.
  std::optional<std::string> DataInput(std::string_view id) const;

  // All transitive dependencies of `id` (excluding `id`).
  std::vector<std::string> Ancestors(std::string_view id) const;

 private:
  const AnalysisPlan* plan_;
  std::map<std::string, std::vector<std::string>, std::less<>> deps_;
  std::map<std::string, std::vector<std::string>, std::less<>> dependents_;
  std::map<std::string, std::vector<std::string>, std::less<>> edge_inputs_;
  std::map<std::string, std::vector<std::string>, std::less<>> refs_;
  std::optional<std::vector<std::string>> order_;
};

// Ids referenced from a node's payload.
std::vector<std::string> PayloadReferences(const PlanNode& node);

// Clip nodes between the source and `node_id` along input edges, source
// first. Stops at the first node that is not a clip.
std::vector<const PlanNode*> ClipChain(const AnalysisPlan& plan, std::string_view node_id);

// Exact value of an expression built only from literals, constant nodes,
// epsilon_total and hyperparameters that are themselves constant. nullopt if
// it depends on data or uses an op without an exact rational result (sqrt,
// std). Division by zero yields nullopt.
std::optional<Rational> ResolveConstant(const Expr& expr, const AnalysisPlan& plan);

// Literal or constant hyperparameter value.
std::optional<Rational> ResolveParam(const Param& param, const AnalysisPlan& plan);

// Evaluates infix epsilon text ("epsilon_total / 14", "0.5 * epsilon_total",
// "1/7") exactly. Throws std::invalid_argument on malformed text.
Rational EvaluateEpsilonText(std::string_view text, const Rational& epsilon_total);

// Resolved epsilon of a noise node; nullopt when not statically resolvable.
std::optional<Rational> ResolveEpsilon(const NoisePayload& noise, const AnalysisPlan& plan);

// Constant declared sensitivity (literal or constant hyperparameter); nullopt
// for "auto" and for data-dependent references.
std::optional<Rational> DeclaredSensitivity(const NoisePayload& noise, const AnalysisPlan& plan);

}  // namespace dpaudit

#endif  // DPAUDIT_PLAN_GRAPH_H_
