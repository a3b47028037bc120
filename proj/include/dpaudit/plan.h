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

// In-memory model of an analysis plan: a DAG of source / clip / aggregate /
// noise / hyperparameter / constant / post_process / release nodes over a
// single tabular dataset, plus the privacy settings and the declared
// partition constraints. Plans are immutable after parsing.

#ifndef DPAUDIT_PLAN_H_
#define DPAUDIT_PLAN_H_

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dpaudit {

enum class ColumnKind { kCategorical, kNumeric, kTimestamp, kIdentifier };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  // Closed value set; only meaningful for categorical columns.
  std::optional<std::vector<std::string>> values;

  bool operator==(const Column&) const = default;
};

struct Schema {
  std::vector<Column> columns;

  const Column* Find(std::string_view name) const;
  std::optional<std::size_t> IndexOf(std::string_view name) const;

  bool operator==(const Schema&) const = default;
};

enum class Neighboring { kAddOrRemoveOne };

struct PrivacySpec {
  std::string unit_column;
  Neighboring neighboring = Neighboring::kAddOrRemoveOne;
  double epsilon_total = 1.0;

  bool operator==(const PrivacySpec&) const = default;
};

// {"ref": "<hyperparameter id>"}
struct NodeRef {
  std::string id;
  bool operator==(const NodeRef&) const = default;
};

// A numeric plan parameter: either a literal or a hyperparameter reference.
using Param = std::variant<double, NodeRef>;

enum class ExprOp { kAdd, kSub, kMul, kDiv, kClamp, kAbs, kMax, kMin, kSqrt, kMean, kStd };

// Prefix s-expression over node ids, literals and the `epsilon_total` symbol.
struct Expr {
  enum class Kind { kLiteral, kNode, kEpsilonTotal, kCall };

  Kind kind = Kind::kLiteral;
  double literal = 0.0;
  std::string node;
  ExprOp op = ExprOp::kAdd;
  std::vector<Expr> args;

  static Expr Literal(double value);
  static Expr Node(std::string id);
  static Expr EpsilonTotal();
  static Expr Call(ExprOp op, std::vector<Expr> args);

  bool operator==(const Expr&) const = default;
};

std::string_view ExprOpName(ExprOp op);
std::optional<ExprOp> ExprOpFromName(std::string_view name);
// Node ids referenced anywhere in the expression.
void CollectRefs(const Expr& expr, std::set<std::string>& out);

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view CompareOpName(CompareOp op);

struct Predicate {
  std::string column;
  CompareOp op = CompareOp::kEq;
  std::variant<std::string, double> value;

  bool operator==(const Predicate&) const = default;
};

enum class AggregateOp {
  kCount,
  kSum,
  // Largest number of matching rows contributed by any single privacy unit.
  kMaxPerUnit,
};

struct ValueBounds {
  std::string column;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const ValueBounds&) const = default;
};

struct SourcePayload {
  bool operator==(const SourcePayload&) const = default;
};

struct ClipPayload {
  Param per_unit_bound = 1.0;
  // Partition column; the bound then applies per unit and per cell of it.
  std::optional<std::string> scope;
  std::optional<ValueBounds> value_bounds;

  bool operator==(const ClipPayload&) const = default;
};

struct AggregatePayload {
  AggregateOp op = AggregateOp::kCount;
  std::vector<Predicate> where;  // conjunction
  std::optional<std::string> group_by;
  std::optional<std::string> column;  // summed column

  bool operator==(const AggregatePayload&) const = default;
};

struct AutoSensitivity {
  bool operator==(const AutoSensitivity&) const = default;
};

// Infix text over numbers and `epsilon_total`, e.g. "epsilon_total / 14".
struct SymbolicEpsilon {
  std::string text;
  bool operator==(const SymbolicEpsilon&) const = default;
};

using EpsilonSpec = std::variant<double, SymbolicEpsilon, NodeRef>;
using SensitivitySpec = std::variant<double, AutoSensitivity, NodeRef>;

enum class Mechanism { kLaplace };

struct NoisePayload {
  Mechanism mechanism = Mechanism::kLaplace;
  EpsilonSpec epsilon = 1.0;
  SensitivitySpec sensitivity = AutoSensitivity{};
  // Expected magnitude of the true value, used by the noise-placement check.
  std::optional<double> signal_estimate;

  bool operator==(const NoisePayload&) const = default;
};

struct HyperparameterPayload {
  Expr value;
  bool operator==(const HyperparameterPayload&) const = default;
};

struct ConstantPayload {
  double value = 0.0;
  bool operator==(const ConstantPayload&) const = default;
};

inline constexpr double kDefaultDivisionGuard = 1e-6;

struct PostProcessPayload {
  Expr expr;
  // Denominator guard; nullopt means plain division.
  std::optional<Param> guard = Param{kDefaultDivisionGuard};

  bool operator==(const PostProcessPayload&) const = default;
};

struct ReleasePayload {
  bool operator==(const ReleasePayload&) const = default;
};

// Alternative order matches NodeKind.
using NodePayload =
    std::variant<SourcePayload, ClipPayload, AggregatePayload, NoisePayload,
                 HyperparameterPayload, ConstantPayload, PostProcessPayload, ReleasePayload>;

enum class NodeKind {
  kSource,
  kClip,
  kAggregate,
  kNoise,
  kHyperparameter,
  kConstant,
  kPostProcess,
  kRelease,
};

std::string_view NodeKindName(NodeKind kind);

struct PlanNode {
  std::string id;
  NodePayload payload;
  std::optional<std::string> note;

  NodeKind kind() const { return static_cast<NodeKind>(payload.index()); }
  // True for kinds that produce a scalar (or per-cell) value.
  bool produces_value() const;

  template <typename T>
  const T& as() const {
    return std::get<T>(payload);
  }

  bool operator==(const PlanNode&) const = default;
};

struct Edge {
  std::string from;
  std::string to;

  bool operator==(const Edge&) const = default;
};

enum class Guarantee {
  // Within each cell of `within` (or globally), all of a unit's rows share
  // one value of the attribute.
  kSingleValue,
  // A unit contributes at most one row per value of the attribute.
  kSingleRow,
};

struct PartitionConstraint {
  std::string attribute;
  Guarantee guarantee = Guarantee::kSingleValue;
  std::optional<std::string> within;

  bool operator==(const PartitionConstraint&) const = default;
};

struct AnalysisPlan {
  std::string name;
  std::string description;
  Schema schema;
  PrivacySpec privacy;
  std::vector<PlanNode> nodes;
  std::vector<Edge> edges;
  std::vector<PartitionConstraint> constraints;

  const PlanNode* Find(std::string_view id) const;
  const PlanNode& Get(std::string_view id) const;  // throws std::out_of_range

  bool operator==(const AnalysisPlan&) const = default;
};

// Raised by ParsePlan. `line`/`column` are 1-based and set for syntax errors;
// `identifier` names the offending node id, kind, or key when there is one.
class PlanParseError : public std::runtime_error {
 public:
  PlanParseError(std::string message, std::string identifier = {},
                 std::optional<std::size_t> line = std::nullopt,
                 std::optional<std::size_t> column = std::nullopt);

  const std::string& identifier() const { return identifier_; }
  std::optional<std::size_t> line() const { return line_; }
  std::optional<std::size_t> column() const { return column_; }

 private:
  std::string identifier_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> column_;
};

// Parses plan-file text (see docs/plan-format.md).
AnalysisPlan ParsePlan(std::string_view text);
AnalysisPlan LoadPlanFile(const std::string& path);

// Canonical JSON text; ParsePlan(SerializePlan(p)) == p.
std::string SerializePlan(const AnalysisPlan& plan, int indent = 2);

// Raised when an operation is called outside its precondition.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& message, std::string node_id = {})
      : std::logic_error(message), node_id_(std::move(node_id)) {}
  const std::string& node_id() const { return node_id_; }

 private:
  std::string node_id_;
};

struct StructuralError {
  std::string code;
  std::vector<std::string> node_ids;
  std::string message;

  bool operator==(const StructuralError&) const = default;
};

// Empty iff the plan is structurally valid. Sorted by (first node id, code,
// message); plan-level errors (no node) come first.
std::vector<StructuralError> ValidatePlan(const AnalysisPlan& plan);

}  // namespace dpaudit

#endif  // DPAUDIT_PLAN_H_
