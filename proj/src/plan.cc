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

#include "dpaudit/plan.h"

#include <array>
#include <utility>

namespace dpaudit {
namespace {

constexpr std::array<std::pair<ExprOp, std::string_view>, 11> kExprOps = {{
    {ExprOp::kAdd, "add"},
    {ExprOp::kSub, "sub"},
    {ExprOp::kMul, "mul"},
    {ExprOp::kDiv, "div"},
    {ExprOp::kClamp, "clamp"},
    {ExprOp::kAbs, "abs"},
    {ExprOp::kMax, "max"},
    {ExprOp::kMin, "min"},
    {ExprOp::kSqrt, "sqrt"},
    {ExprOp::kMean, "mean"},
    {ExprOp::kStd, "std"},
}};

}  // namespace

const Column* Schema::Find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::optional<std::size_t> Schema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

Expr Expr::Literal(double value) {
  Expr e;
  e.kind = Kind::kLiteral;
  e.literal = value;
  return e;
}

Expr Expr::Node(std::string id) {
  Expr e;
  e.kind = Kind::kNode;
  e.node = std::move(id);
  return e;
}

Expr Expr::EpsilonTotal() {
  Expr e;
  e.kind = Kind::kEpsilonTotal;
  return e;
}

Expr Expr::Call(ExprOp op, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::kCall;
  e.op = op;
  e.args = std::move(args);
  return e;
}

std::string_view ExprOpName(ExprOp op) {
  for (const auto& [candidate, name] : kExprOps) {
    if (candidate == op) return name;
  }
  return "?";
}

std::optional<ExprOp> ExprOpFromName(std::string_view name) {
  for (const auto& [op, candidate] : kExprOps) {
    if (candidate == name) return op;
  }
  return std::nullopt;
}

void CollectRefs(const Expr& expr, std::set<std::string>& out) {
  switch (expr.kind) {
    case Expr::Kind::kNode:
      out.insert(expr.node);
      break;
    case Expr::Kind::kCall:
      for (const auto& arg : expr.args) CollectRefs(arg, out);
      break;
    default:
      break;
  }
}

std::string_view CompareOpName(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

std::string_view NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kSource: return "source";
    case NodeKind::kClip: return "clip";
    case NodeKind::kAggregate: return "aggregate";
    case NodeKind::kNoise: return "noise";
    case NodeKind::kHyperparameter: return "hyperparameter";
    case NodeKind::kConstant: return "constant";
    case NodeKind::kPostProcess: return "post_process";
    case NodeKind::kRelease: return "release";
  }
  return "?";
}

bool PlanNode::produces_value() const {
  switch (kind()) {
    case NodeKind::kAggregate:
    case NodeKind::kNoise:
    case NodeKind::kHyperparameter:
    case NodeKind::kConstant:
    case NodeKind::kPostProcess:
      return true;
    default:
      return false;
  }
}

const PlanNode* AnalysisPlan::Find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const PlanNode& AnalysisPlan::Get(std::string_view id) const {
  if (const PlanNode* n = Find(id)) return *n;
  throw std::out_of_range("no node with id '" + std::string(id) + "'");
}

PlanParseError::PlanParseError(std::string message, std::string identifier,
                               std::optional<std::size_t> line,
                               std::optional<std::size_t> column)
    : std::runtime_error(std::move(message)),
      identifier_(std::move(identifier)),
      line_(line),
      column_(column) {}

}  // namespace dpaudit
