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
#include <cmath>
#include <set>
#include <tuple>

#include "dpaudit/plan.h"
#include "dpaudit/plan_graph.h"

namespace dpaudit {
namespace {

class Validator {
 public:
  explicit Validator(const AnalysisPlan& plan) : plan_(plan), graph_(plan) {}

  std::vector<StructuralError> Run() {
    CheckSchema();
    CheckPrivacy();
    CheckSources();
    CheckCycle();
    CheckConstraints();
    for (const auto& node : plan_.nodes) CheckNode(node);
    std::sort(errors_.begin(), errors_.end(), [](const auto& a, const auto& b) {
      auto key = [](const StructuralError& e) {
        return std::tie(e.node_ids.empty() ? kNoNode : e.node_ids.front(), e.code, e.message);
      };
      return key(a) < key(b);
    });
    errors_.erase(std::unique(errors_.begin(), errors_.end()), errors_.end());
    return errors_;
  }

 private:
  static inline const std::string kNoNode;

  void Add(std::string code, std::vector<std::string> ids, std::string message) {
    errors_.push_back({std::move(code), std::move(ids), std::move(message)});
  }

  void CheckSchema() {
    std::set<std::string> names;
    for (const auto& c : plan_.schema.columns) {
      if (!names.insert(c.name).second) {
        Add("DUPLICATE_COLUMN", {}, "column '" + c.name + "' is declared more than once");
      }
      if (c.values && c.kind != ColumnKind::kCategorical) {
        Add("BAD_SCHEMA", {}, "column '" + c.name + "' declares values but is not categorical");
      }
    }
  }

  void CheckPrivacy() {
    if (!(plan_.privacy.epsilon_total > 0) || !std::isfinite(plan_.privacy.epsilon_total)) {
      Add("NONPOSITIVE_EPSILON", {}, "epsilon_total must be a positive finite number");
    }
    const Column* unit = plan_.schema.Find(plan_.privacy.unit_column);
    if (unit == nullptr) {
      Add("UNKNOWN_COLUMN", {},
          "privacy unit column '" + plan_.privacy.unit_column + "' is not in the schema");
    } else if (unit->kind == ColumnKind::kNumeric) {
      Add("TYPE_MISMATCH", {}, "privacy unit column '" + unit->name + "' cannot be numeric");
    }
  }

  void CheckSources() {
    std::vector<std::string> sources;
    for (const auto& n : plan_.nodes) {
      if (n.kind() == NodeKind::kSource) sources.push_back(n.id);
    }
    std::sort(sources.begin(), sources.end());
    if (sources.empty()) Add("NO_SOURCE", {}, "plan has no source node");
    if (sources.size() > 1) {
      Add("MULTIPLE_SOURCES", sources,
          "plan has " + std::to_string(sources.size()) + " source nodes; exactly one is allowed");
    }
  }

  void CheckCycle() {
    auto cycle = graph_.FindCycle();
    if (cycle.empty()) return;
    std::string listing;
    for (const auto& id : cycle) listing += (listing.empty() ? "" : ", ") + id;
    Add("CYCLE", cycle, "dependency cycle through nodes: " + listing);
  }

  void CheckConstraints() {
    for (const auto& c : plan_.constraints) {
      CheckCategorical(c.attribute, {}, "partition constraint attribute");
      if (c.within) {
        CheckCategorical(*c.within, {}, "partition constraint scope");
        if (c.guarantee == Guarantee::kSingleRow) {
          Add("BAD_SCHEMA", {}, "single_row constraint on '" + c.attribute +
                                    "' cannot be restricted by 'within'");
        }
      }
    }
  }

  // Returns the column when it exists.
  const Column* CheckColumn(const std::string& name, const std::vector<std::string>& ids,
                            const std::string& what) {
    const Column* c = plan_.schema.Find(name);
    if (c == nullptr) Add("UNKNOWN_COLUMN", ids, what + " '" + name + "' is not in the schema");
    return c;
  }

  void CheckCategorical(const std::string& name, const std::vector<std::string>& ids,
                        const std::string& what) {
    if (const Column* c = CheckColumn(name, ids, what); c && c->kind != ColumnKind::kCategorical) {
      Add("NOT_CATEGORICAL", ids, what + " '" + name + "' must be categorical");
    }
  }

  // Grouping and scoping need the full cell list up front.
  void CheckClosed(const std::string& name, const std::vector<std::string>& ids,
                   const std::string& what) {
    const Column* c = plan_.schema.Find(name);
    if (c && c->kind == ColumnKind::kCategorical && !c->values) {
      Add("OPEN_VALUE_SET", ids, what + " '" + name + "' needs a declared value set");
    }
  }

  const PlanNode* InputOf(const PlanNode& node, std::initializer_list<NodeKind> allowed) {
    const auto& inputs = graph_.EdgeInputs(node.id);
    if (inputs.size() != 1) {
      Add("BAD_ARITY", {node.id},
          std::string(NodeKindName(node.kind())) + " node '" + node.id +
              "' must have exactly one input edge, has " + std::to_string(inputs.size()));
      return nullptr;
    }
    const PlanNode* in = plan_.Find(inputs.front());
    if (in == nullptr) return nullptr;
    if (std::find(allowed.begin(), allowed.end(), in->kind()) == allowed.end()) {
      Add("BAD_INPUT", {node.id},
          std::string(NodeKindName(node.kind())) + " node '" + node.id + "' cannot take input from " +
              std::string(NodeKindName(in->kind())) + " node '" + in->id + "'");
      return nullptr;
    }
    return in;
  }

  void NoEdgeInputs(const PlanNode& node) {
    if (!graph_.EdgeInputs(node.id).empty()) {
      Add("BAD_ARITY", {node.id},
          std::string(NodeKindName(node.kind())) + " node '" + node.id + "' cannot have input edges");
    }
  }

  // Edges into expression nodes must name an operand of the expression.
  void EdgesReferenced(const PlanNode& node) {
    const auto& refs = graph_.References(node.id);
    for (const auto& from : graph_.EdgeInputs(node.id)) {
      if (std::find(refs.begin(), refs.end(), from) == refs.end()) {
        Add("UNUSED_EDGE", {node.id, from},
            "edge " + from + " -> " + node.id + " does not feed the node's expression");
      }
    }
  }

  void CheckHyperRef(const PlanNode& node, const Param& p, const std::string& what) {
    const auto* r = std::get_if<NodeRef>(&p);
    if (r == nullptr) return;
    const PlanNode* target = plan_.Find(r->id);
    if (target && target->kind() != NodeKind::kHyperparameter) {
      Add("BAD_REFERENCE", {node.id, r->id},
          what + " of node '" + node.id + "' must reference a hyperparameter node, '" + r->id +
              "' is " + std::string(NodeKindName(target->kind())));
    }
  }

  void CheckValueRefs(const PlanNode& node) {
    for (const auto& r : graph_.References(node.id)) {
      const PlanNode* target = plan_.Find(r);
      if (target && !target->produces_value()) {
        Add("BAD_REFERENCE", {node.id, r},
            "node '" + node.id + "' uses '" + r + "', a " +
                std::string(NodeKindName(target->kind())) + " node without a value");
      }
    }
  }

  void CheckNode(const PlanNode& node) {
    switch (node.kind()) {
      case NodeKind::kSource:
      case NodeKind::kConstant:
        NoEdgeInputs(node);
        break;
      case NodeKind::kClip:
        CheckClip(node);
        break;
      case NodeKind::kAggregate:
        CheckAggregate(node);
        break;
      case NodeKind::kNoise:
        CheckNoise(node);
        break;
      case NodeKind::kHyperparameter:
        EdgesReferenced(node);
        CheckValueRefs(node);
        break;
      case NodeKind::kPostProcess: {
        EdgesReferenced(node);
        CheckValueRefs(node);
        const auto& pp = node.as<PostProcessPayload>();
        if (pp.guard) {
          CheckHyperRef(node, *pp.guard, "guard");
          if (const auto* d = std::get_if<double>(&*pp.guard); d && !(*d > 0)) {
            Add("INVALID_BOUND", {node.id}, "guard of node '" + node.id + "' must be positive");
          }
        }
        break;
      }
      case NodeKind::kRelease: {
        const auto& inputs = graph_.EdgeInputs(node.id);
        if (inputs.size() != 1) {
          Add("BAD_ARITY", {node.id},
              "release node '" + node.id + "' must have exactly one input, has " +
                  std::to_string(inputs.size()));
        } else if (const PlanNode* in = plan_.Find(inputs.front()); in && !in->produces_value()) {
          Add("BAD_INPUT", {node.id},
              "release node '" + node.id + "' cannot release " +
                  std::string(NodeKindName(in->kind())) + " node '" + in->id + "'");
        }
        break;
      }
    }
  }

  void CheckClip(const PlanNode& node) {
    InputOf(node, {NodeKind::kSource, NodeKind::kClip});
    const auto& clip = node.as<ClipPayload>();
    CheckHyperRef(node, clip.per_unit_bound, "per_unit_bound");
    if (const auto* k = std::get_if<double>(&clip.per_unit_bound);
        k && (!(*k >= 1) || std::floor(*k) != *k)) {
      Add("INVALID_BOUND", {node.id}, "per_unit_bound of clip '" + node.id +
                                          "' must be a positive integer");
    }
    if (clip.scope) {
      CheckCategorical(*clip.scope, {node.id}, "clip scope");
      CheckClosed(*clip.scope, {node.id}, "clip scope");
    }
    if (clip.value_bounds) {
      if (const Column* c = CheckColumn(clip.value_bounds->column, {node.id}, "value_bounds column");
          c && c->kind != ColumnKind::kNumeric) {
        Add("TYPE_MISMATCH", {node.id},
            "value_bounds column '" + c->name + "' of clip '" + node.id + "' must be numeric");
      }
      if (!(clip.value_bounds->lo <= clip.value_bounds->hi)) {
        Add("INVALID_BOUND", {node.id}, "value_bounds of clip '" + node.id + "' have lo > hi");
      }
    }
  }

  void CheckAggregate(const PlanNode& node) {
    InputOf(node, {NodeKind::kSource, NodeKind::kClip});
    const auto& agg = node.as<AggregatePayload>();
    for (const auto& p : agg.where) {
      const Column* c = CheckColumn(p.column, {node.id}, "predicate column");
      if (c == nullptr) continue;
      bool numeric_value = std::holds_alternative<double>(p.value);
      bool ordering = p.op != CompareOp::kEq && p.op != CompareOp::kNe;
      if (c->kind == ColumnKind::kNumeric && !numeric_value) {
        Add("TYPE_MISMATCH", {node.id},
            "predicate on numeric column '" + c->name + "' must compare with a number");
      } else if (c->kind != ColumnKind::kNumeric && numeric_value) {
        Add("TYPE_MISMATCH", {node.id},
            "predicate on column '" + c->name + "' must compare with a string");
      } else if (ordering && (c->kind == ColumnKind::kCategorical ||
                              c->kind == ColumnKind::kIdentifier)) {
        Add("TYPE_MISMATCH", {node.id},
            "ordering comparison on unordered column '" + c->name + "'");
      } else if (c->kind == ColumnKind::kCategorical && c->values) {
        const auto& v = std::get<std::string>(p.value);
        if (std::find(c->values->begin(), c->values->end(), v) == c->values->end()) {
          Add("TYPE_MISMATCH", {node.id},
              "value '" + v + "' is not in the declared values of '" + c->name + "'");
        }
      }
    }
    if (agg.group_by) {
      CheckCategorical(*agg.group_by, {node.id}, "group_by column");
      CheckClosed(*agg.group_by, {node.id}, "group_by column");
    }
    if (agg.op == AggregateOp::kSum) {
      if (!agg.column) {
        Add("BAD_ARITY", {node.id}, "sum aggregate '" + node.id + "' needs a column");
      } else if (const Column* c = CheckColumn(*agg.column, {node.id}, "summed column");
                 c && c->kind != ColumnKind::kNumeric) {
        Add("TYPE_MISMATCH", {node.id}, "summed column '" + c->name + "' must be numeric");
      }
    } else if (agg.column) {
      Add("BAD_ARITY", {node.id}, "only sum aggregates take a column");
    }
  }

  void CheckNoise(const PlanNode& node) {
    InputOf(node, {NodeKind::kAggregate, NodeKind::kPostProcess});
    const auto& noise = node.as<NoisePayload>();
    if (const auto* r = std::get_if<NodeRef>(&noise.epsilon)) CheckHyperRef(node, *r, "epsilon");
    if (const auto* r = std::get_if<NodeRef>(&noise.sensitivity)) {
      CheckHyperRef(node, *r, "sensitivity");
    }
    if (const auto* d = std::get_if<double>(&noise.sensitivity); d && !(*d > 0)) {
      Add("INVALID_BOUND", {node.id}, "declared sensitivity of '" + node.id + "' must be positive");
    }
    if (noise.signal_estimate && !(*noise.signal_estimate >= 0)) {
      Add("INVALID_BOUND", {node.id}, "signal_estimate of '" + node.id + "' must be nonnegative");
    }
    auto eps = ResolveEpsilon(noise, plan_);
    if (!eps) {
      Add("UNRESOLVED_EPSILON", {node.id},
          "epsilon of noise node '" + node.id + "' cannot be resolved to a constant");
    } else if (*eps <= 0) {
      Add("NONPOSITIVE_EPSILON", {node.id},
          "epsilon of noise node '" + node.id + "' resolves to " + ToString(*eps));
    }
  }

  const AnalysisPlan& plan_;
  PlanGraph graph_;
  std::vector<StructuralError> errors_;
};

}  // namespace

std::vector<StructuralError> ValidatePlan(const AnalysisPlan& plan) {
  return Validator(plan).Run();
}

}  // namespace dpaudit
