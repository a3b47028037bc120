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

// Plan file reader/writer. The grammar is documented in docs/plan-format.md.

#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "dpaudit/plan.h"
#include "json.hpp"

namespace dpaudit {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void Fail(const std::string& message, const std::string& identifier = {}) {
  throw PlanParseError(message, identifier);
}

void CheckKeys(const json& obj, std::initializer_list<std::string_view> allowed,
               const std::string& context) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) Fail("unknown key '" + key + "' in " + context, key);
  }
}

const json& Require(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) Fail("missing key '" + std::string(key) + "' in " + context, key);
  return *it;
}

std::string RequireString(const json& obj, const char* key, const std::string& context) {
  const json& v = Require(obj, key, context);
  if (!v.is_string()) Fail("'" + std::string(key) + "' in " + context + " must be a string", key);
  return v.get<std::string>();
}

double RequireNumber(const json& v, const std::string& what) {
  if (!v.is_number()) Fail(what + " must be a number");
  return v.get<double>();
}

std::optional<std::string> OptionalString(const json& obj, const char* key,
                                          const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) Fail("'" + std::string(key) + "' in " + context + " must be a string", key);
  return it->get<std::string>();
}

ColumnKind ParseColumnKind(const std::string& s) {
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "timestamp") return ColumnKind::kTimestamp;
  if (s == "identifier") return ColumnKind::kIdentifier;
  Fail("unknown column kind '" + s + "'", s);
}

std::string ColumnKindText(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kTimestamp: return "timestamp";
    case ColumnKind::kIdentifier: return "identifier";
  }
  return "?";
}

Param ParseParam(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_object()) {
    CheckKeys(v, {"ref"}, what);
    return NodeRef{RequireString(v, "ref", what)};
  }
  Fail(what + " must be a number or {\"ref\": <hyperparameter id>}");
}

ordered_json ParamJson(const Param& p) {
  if (const auto* d = std::get_if<double>(&p)) return *d;
  return ordered_json{{"ref", std::get<NodeRef>(p).id}};
}

std::size_t MinArity(ExprOp op) {
  switch (op) {
    case ExprOp::kDiv: return 2;
    case ExprOp::kClamp: return 3;
    default: return 1;
  }
}

std::size_t MaxArity(ExprOp op) {
  switch (op) {
    case ExprOp::kSub:
    case ExprOp::kDiv: return 2;
    case ExprOp::kClamp: return 3;
    case ExprOp::kAbs:
    case ExprOp::kSqrt: return 1;
    default: return static_cast<std::size_t>(-1);
  }
}

Expr ParseExpr(const json& v, const std::string& owner) {
  if (v.is_number()) return Expr::Literal(v.get<double>());
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "epsilon_total") return Expr::EpsilonTotal();
    return Expr::Node(std::move(s));
  }
  if (v.is_array() && !v.empty() && v[0].is_string()) {
    auto name = v[0].get<std::string>();
    auto op = ExprOpFromName(name);
    if (!op) Fail("unknown operator '" + name + "' in expression of node '" + owner + "'", name);
    std::vector<Expr> args;
    for (std::size_t i = 1; i < v.size(); ++i) args.push_back(ParseExpr(v[i], owner));
    if (args.size() < MinArity(*op) || args.size() > MaxArity(*op)) {
      Fail("operator '" + name + "' given " + std::to_string(args.size()) +
               " operands in node '" + owner + "'",
           owner);
    }
    return Expr::Call(*op, std::move(args));
  }
  Fail("malformed expression in node '" + owner + "'", owner);
}

ordered_json ExprJson(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kLiteral: return e.literal;
    case Expr::Kind::kNode: return e.node;
    case Expr::Kind::kEpsilonTotal: return "epsilon_total";
    case Expr::Kind::kCall: {
      ordered_json arr = ordered_json::array();
      arr.push_back(std::string(ExprOpName(e.op)));
      for (const auto& a : e.args) arr.push_back(ExprJson(a));
      return arr;
    }
  }
  return nullptr;
}

CompareOp ParseCompareOp(const std::string& s, const std::string& owner) {
  for (CompareOp op : {CompareOp::kEq, CompareOp::kNe, CompareOp::kLt, CompareOp::kLe,
                       CompareOp::kGt, CompareOp::kGe}) {
    if (CompareOpName(op) == s) return op;
  }
  Fail("unknown comparison '" + s + "' in node '" + owner + "'", owner);
}

std::string AggregateOpText(AggregateOp op) {
  switch (op) {
    case AggregateOp::kCount: return "count";
    case AggregateOp::kSum: return "sum";
    case AggregateOp::kMaxPerUnit: return "max_per_unit";
  }
  return "?";
}

PlanNode ParseNode(const json& v) {
  if (!v.is_object()) Fail("node entries must be objects");
  const std::string id = RequireString(v, "id", "node");
  const std::string kind = RequireString(v, "kind", "node '" + id + "'");
  const std::string ctx = "node '" + id + "'";
  PlanNode node;
  node.id = id;
  node.note = OptionalString(v, "note", ctx);

  if (kind == "source") {
    CheckKeys(v, {"id", "kind", "note"}, ctx);
    node.payload = SourcePayload{};
  } else if (kind == "clip") {
    CheckKeys(v, {"id", "kind", "note", "per_unit_bound", "scope", "value_bounds"}, ctx);
    ClipPayload clip;
    clip.per_unit_bound = ParseParam(Require(v, "per_unit_bound", ctx), ctx + " per_unit_bound");
    // The scope must be stated, even if null.
    Require(v, "scope", ctx);
    clip.scope = OptionalString(v, "scope", ctx);
    if (auto it = v.find("value_bounds"); it != v.end() && !it->is_null()) {
      CheckKeys(*it, {"column", "lo", "hi"}, ctx + " value_bounds");
      clip.value_bounds = ValueBounds{RequireString(*it, "column", ctx + " value_bounds"),
                                      RequireNumber(Require(*it, "lo", ctx), ctx + " lo"),
                                      RequireNumber(Require(*it, "hi", ctx), ctx + " hi")};
    }
    node.payload = std::move(clip);
  } else if (kind == "aggregate") {
    CheckKeys(v, {"id", "kind", "note", "op", "where", "group_by", "column"}, ctx);
    AggregatePayload agg;
    const std::string op = RequireString(v, "op", ctx);
    if (op == "count") {
      agg.op = AggregateOp::kCount;
    } else if (op == "sum") {
      agg.op = AggregateOp::kSum;
    } else if (op == "max_per_unit") {
      agg.op = AggregateOp::kMaxPerUnit;
    } else {
      Fail("unknown aggregate op '" + op + "' in " + ctx, id);
    }
    if (auto it = v.find("where"); it != v.end() && !it->is_null()) {
      if (!it->is_array()) Fail("'where' in " + ctx + " must be an array", id);
      for (const auto& p : *it) {
        if (!p.is_array() || p.size() != 3 || !p[0].is_string() || !p[1].is_string() ||
            !(p[2].is_string() || p[2].is_number())) {
          Fail("predicates in " + ctx + " must be [column, op, value]", id);
        }
        Predicate pred;
        pred.column = p[0].get<std::string>();
        pred.op = ParseCompareOp(p[1].get<std::string>(), id);
        if (p[2].is_string()) {
          pred.value = p[2].get<std::string>();
        } else {
          pred.value = p[2].get<double>();
        }
        agg.where.push_back(std::move(pred));
      }
    }
    agg.group_by = OptionalString(v, "group_by", ctx);
    agg.column = OptionalString(v, "column", ctx);
    node.payload = std::move(agg);
  } else if (kind == "noise") {
    CheckKeys(v, {"id", "kind", "note", "mechanism", "epsilon", "sensitivity", "signal_estimate"},
              ctx);
    NoisePayload noise;
    if (auto m = OptionalString(v, "mechanism", ctx); m && *m != "laplace") {
      Fail("unsupported mechanism '" + *m + "' in " + ctx, id);
    }
    const json& eps = Require(v, "epsilon", ctx);
    if (eps.is_number()) {
      noise.epsilon = eps.get<double>();
    } else if (eps.is_string()) {
      noise.epsilon = SymbolicEpsilon{eps.get<std::string>()};
    } else {
      noise.epsilon = std::get<NodeRef>(ParseParam(eps, ctx + " epsilon"));
    }
    const json& sens = Require(v, "sensitivity", ctx);
    if (sens.is_string()) {
      if (sens.get<std::string>() != "auto") Fail("sensitivity string must be \"auto\" in " + ctx, id);
      noise.sensitivity = AutoSensitivity{};
    } else {
      Param p = ParseParam(sens, ctx + " sensitivity");
      if (const auto* d = std::get_if<double>(&p)) {
        noise.sensitivity = *d;
      } else {
        noise.sensitivity = std::get<NodeRef>(p);
      }
    }
    if (auto it = v.find("signal_estimate"); it != v.end() && !it->is_null()) {
      noise.signal_estimate = RequireNumber(*it, ctx + " signal_estimate");
    }
    node.payload = std::move(noise);
  } else if (kind == "hyperparameter") {
    CheckKeys(v, {"id", "kind", "note", "value"}, ctx);
    node.payload = HyperparameterPayload{ParseExpr(Require(v, "value", ctx), id)};
  } else if (kind == "constant") {
    CheckKeys(v, {"id", "kind", "note", "value"}, ctx);
    node.payload = ConstantPayload{RequireNumber(Require(v, "value", ctx), ctx + " value")};
  } else if (kind == "post_process") {
    CheckKeys(v, {"id", "kind", "note", "expr", "guard"}, ctx);
    PostProcessPayload pp;
    pp.expr = ParseExpr(Require(v, "expr", ctx), id);
    if (auto it = v.find("guard"); it != v.end()) {
      if (it->is_null()) {
        pp.guard = std::nullopt;
      } else {
        pp.guard = ParseParam(*it, ctx + " guard");
      }
    }
    node.payload = std::move(pp);
  } else if (kind == "release") {
    CheckKeys(v, {"id", "kind", "note"}, ctx);
    node.payload = ReleasePayload{};
  } else {
    Fail("unknown node kind '" + kind + "' for node '" + id + "'", kind);
  }
  return node;
}

ordered_json NodeJson(const PlanNode& node) {
  ordered_json j;
  j["id"] = node.id;
  j["kind"] = std::string(NodeKindName(node.kind()));
  switch (node.kind()) {
    case NodeKind::kSource:
    case NodeKind::kRelease:
      break;
    case NodeKind::kClip: {
      const auto& c = node.as<ClipPayload>();
      j["per_unit_bound"] = ParamJson(c.per_unit_bound);
      j["scope"] = c.scope ? ordered_json(*c.scope) : ordered_json(nullptr);
      if (c.value_bounds) {
        j["value_bounds"] = {{"column", c.value_bounds->column},
                             {"lo", c.value_bounds->lo},
                             {"hi", c.value_bounds->hi}};
      }
      break;
    }
    case NodeKind::kAggregate: {
      const auto& a = node.as<AggregatePayload>();
      j["op"] = AggregateOpText(a.op);
      ordered_json where = ordered_json::array();
      for (const auto& p : a.where) {
        ordered_json value = std::holds_alternative<std::string>(p.value)
                                 ? ordered_json(std::get<std::string>(p.value))
                                 : ordered_json(std::get<double>(p.value));
        where.push_back({p.column, std::string(CompareOpName(p.op)), value});
      }
      j["where"] = where;
      j["group_by"] = a.group_by ? ordered_json(*a.group_by) : ordered_json(nullptr);
      j["column"] = a.column ? ordered_json(*a.column) : ordered_json(nullptr);
      break;
    }
    case NodeKind::kNoise: {
      const auto& n = node.as<NoisePayload>();
      j["mechanism"] = "laplace";
      if (const auto* d = std::get_if<double>(&n.epsilon)) {
        j["epsilon"] = *d;
      } else if (const auto* s = std::get_if<SymbolicEpsilon>(&n.epsilon)) {
        j["epsilon"] = s->text;
      } else {
        j["epsilon"] = {{"ref", std::get<NodeRef>(n.epsilon).id}};
      }
      if (const auto* d = std::get_if<double>(&n.sensitivity)) {
        j["sensitivity"] = *d;
      } else if (std::holds_alternative<AutoSensitivity>(n.sensitivity)) {
        j["sensitivity"] = "auto";
      } else {
        j["sensitivity"] = {{"ref", std::get<NodeRef>(n.sensitivity).id}};
      }
      if (n.signal_estimate) j["signal_estimate"] = *n.signal_estimate;
      break;
    }
    case NodeKind::kHyperparameter:
      j["value"] = ExprJson(node.as<HyperparameterPayload>().value);
      break;
    case NodeKind::kConstant:
      j["value"] = node.as<ConstantPayload>().value;
      break;
    case NodeKind::kPostProcess: {
      const auto& p = node.as<PostProcessPayload>();
      j["expr"] = ExprJson(p.expr);
      j["guard"] = p.guard ? ParamJson(*p.guard) : ordered_json(nullptr);
      break;
    }
  }
  if (node.note) j["note"] = *node.note;
  return j;
}

void ExprRefsExist(const Expr& e, const std::set<std::string>& ids, const std::string& owner) {
  std::set<std::string> refs;
  CollectRefs(e, refs);
  for (const auto& r : refs) {
    if (!ids.count(r)) {
      Fail("node '" + owner + "' references nonexistent node '" + r + "'", r);
    }
  }
}

void ParamRefExists(const Param& p, const std::set<std::string>& ids, const std::string& owner) {
  if (const auto* r = std::get_if<NodeRef>(&p); r && !ids.count(r->id)) {
    Fail("node '" + owner + "' references nonexistent node '" + r->id + "'", r->id);
  }
}

void CheckDangling(const AnalysisPlan& plan) {
  std::set<std::string> ids;
  for (const auto& n : plan.nodes) ids.insert(n.id);
  for (const auto& e : plan.edges) {
    for (const auto* end : {&e.from, &e.to}) {
      if (!ids.count(*end)) {
        Fail("edge " + e.from + " -> " + e.to + " references nonexistent node '" + *end + "'",
             *end);
      }
    }
  }
  for (const auto& n : plan.nodes) {
    switch (n.kind()) {
      case NodeKind::kClip:
        ParamRefExists(n.as<ClipPayload>().per_unit_bound, ids, n.id);
        break;
      case NodeKind::kNoise: {
        const auto& noise = n.as<NoisePayload>();
        if (const auto* r = std::get_if<NodeRef>(&noise.epsilon)) ParamRefExists(*r, ids, n.id);
        if (const auto* r = std::get_if<NodeRef>(&noise.sensitivity)) ParamRefExists(*r, ids, n.id);
        break;
      }
      case NodeKind::kHyperparameter:
        ExprRefsExist(n.as<HyperparameterPayload>().value, ids, n.id);
        break;
      case NodeKind::kPostProcess: {
        const auto& pp = n.as<PostProcessPayload>();
        ExprRefsExist(pp.expr, ids, n.id);
        if (pp.guard) ParamRefExists(*pp.guard, ids, n.id);
        break;
      }
      default:
        break;
    }
  }
}

std::pair<std::size_t, std::size_t> LineColumn(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

AnalysisPlan ParsePlan(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based byte index of the offending character.
    auto [line, col] = LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw PlanParseError("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         {}, line, col);
  }
  if (!root.is_object()) Fail("plan must be a JSON object");
  CheckKeys(root, {"name", "description", "schema", "privacy", "nodes", "edges", "constraints"},
            "plan");

  AnalysisPlan plan;
  plan.name = OptionalString(root, "name", "plan").value_or("");
  plan.description = OptionalString(root, "description", "plan").value_or("");

  const json& schema = Require(root, "schema", "plan");
  if (!schema.is_object()) Fail("'schema' must be an object");
  CheckKeys(schema, {"columns"}, "schema");
  const json& columns = Require(schema, "columns", "schema");
  if (!columns.is_array()) Fail("'schema.columns' must be an array");
  for (const auto& c : columns) {
    if (!c.is_object()) Fail("schema columns must be objects");
    CheckKeys(c, {"name", "kind", "values"}, "column");
    Column col;
    col.name = RequireString(c, "name", "column");
    col.kind = ParseColumnKind(RequireString(c, "kind", "column '" + col.name + "'"));
    if (auto it = c.find("values"); it != c.end() && !it->is_null()) {
      if (!it->is_array()) Fail("'values' of column '" + col.name + "' must be an array", col.name);
      std::vector<std::string> values;
      for (const auto& v : *it) {
        if (!v.is_string()) Fail("values of column '" + col.name + "' must be strings", col.name);
        values.push_back(v.get<std::string>());
      }
      col.values = std::move(values);
    }
    plan.schema.columns.push_back(std::move(col));
  }

  const json& privacy = Require(root, "privacy", "plan");
  if (!privacy.is_object()) Fail("'privacy' must be an object");
  CheckKeys(privacy, {"unit_column", "neighboring", "epsilon_total"}, "privacy");
  plan.privacy.unit_column = RequireString(privacy, "unit_column", "privacy");
  if (auto n = OptionalString(privacy, "neighboring", "privacy");
      n && *n != "add_or_remove_one") {
    Fail("unsupported neighboring relation '" + *n + "'", *n);
  }
  plan.privacy.epsilon_total =
      RequireNumber(Require(privacy, "epsilon_total", "privacy"), "privacy.epsilon_total");

  const json& nodes = Require(root, "nodes", "plan");
  if (!nodes.is_array()) Fail("'nodes' must be an array");
  std::set<std::string> seen;
  for (const auto& n : nodes) {
    PlanNode node = ParseNode(n);
    if (!seen.insert(node.id).second) Fail("duplicate node id '" + node.id + "'", node.id);
    plan.nodes.push_back(std::move(node));
  }

  const json& edges = Require(root, "edges", "plan");
  if (!edges.is_array()) Fail("'edges' must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      Fail("edges must be [from, to] pairs of node ids");
    }
    plan.edges.push_back(Edge{e[0].get<std::string>(), e[1].get<std::string>()});
  }

  if (auto it = root.find("constraints"); it != root.end() && !it->is_null()) {
    if (!it->is_array()) Fail("'constraints' must be an array");
    for (const auto& c : *it) {
      if (!c.is_object()) Fail("constraints must be objects");
      CheckKeys(c, {"attribute", "guarantee", "within"}, "constraint");
      PartitionConstraint pc;
      pc.attribute = RequireString(c, "attribute", "constraint");
      const std::string g = RequireString(c, "guarantee", "constraint on '" + pc.attribute + "'");
      if (g == "single_value") {
        pc.guarantee = Guarantee::kSingleValue;
      } else if (g == "single_row") {
        pc.guarantee = Guarantee::kSingleRow;
      } else {
        Fail("unknown guarantee '" + g + "'", g);
      }
      pc.within = OptionalString(c, "within", "constraint");
      plan.constraints.push_back(std::move(pc));
    }
  }

  CheckDangling(plan);
  return plan;
}

AnalysisPlan LoadPlanFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlanParseError("cannot open plan file '" + path + "'", path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePlan(buffer.str());
}

std::string SerializePlan(const AnalysisPlan& plan, int indent) {
  ordered_json root;
  root["name"] = plan.name;
  root["description"] = plan.description;
  ordered_json columns = ordered_json::array();
  for (const auto& c : plan.schema.columns) {
    ordered_json col = {{"name", c.name}, {"kind", ColumnKindText(c.kind)}};
    if (c.values) col["values"] = *c.values;
    columns.push_back(col);
  }
  root["schema"] = {{"columns", columns}};
  root["privacy"] = {{"unit_column", plan.privacy.unit_column},
                     {"neighboring", "add_or_remove_one"},
                     {"epsilon_total", plan.privacy.epsilon_total}};
  ordered_json nodes = ordered_json::array();
  for (const auto& n : plan.nodes) nodes.push_back(NodeJson(n));
  root["nodes"] = nodes;
  ordered_json edges = ordered_json::array();
  for (const auto& e : plan.edges) edges.push_back({e.from, e.to});
  root["edges"] = edges;
  ordered_json constraints = ordered_json::array();
  for (const auto& c : plan.constraints) {
    ordered_json cj = {{"attribute", c.attribute},
                       {"guarantee", c.guarantee == Guarantee::kSingleValue ? "single_value"
                                                                            : "single_row"}};
    if (c.within) cj["within"] = *c.within;
    constraints.push_back(cj);
  }
  root["constraints"] = constraints;
  return root.dump(indent);
}

}  // namespace dpaudit
