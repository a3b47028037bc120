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

#include "dpaudit/executor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "dpaudit/plan_graph.h"
#include "dpaudit/rational.h"
#include "dpaudit/rng.h"
#include "dpaudit/sensitivity.h"
#include "json.hpp"

namespace dpaudit {
namespace {

using ordered_json = nlohmann::ordered_json;

bool Matches(const Predicate& p, const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    const auto* t = std::get_if<double>(&p.value);
    if (t == nullptr) return false;
    switch (p.op) {
      case CompareOp::kEq: return *d == *t;
      case CompareOp::kNe: return *d != *t;
      case CompareOp::kLt: return *d < *t;
      case CompareOp::kLe: return *d <= *t;
      case CompareOp::kGt: return *d > *t;
      case CompareOp::kGe: return *d >= *t;
    }
    return false;
  }
  const auto& s = std::get<std::string>(cell);
  const auto* t = std::get_if<std::string>(&p.value);
  if (t == nullptr) return false;
  int c = s.compare(*t);
  switch (p.op) {
    case CompareOp::kEq: return c == 0;
    case CompareOp::kNe: return c != 0;
    case CompareOp::kLt: return c < 0;
    case CompareOp::kLe: return c <= 0;
    case CompareOp::kGt: return c > 0;
    case CompareOp::kGe: return c >= 0;
  }
  return false;
}

std::string CellText(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return FormatDouble(std::get<double>(cell));
}

std::size_t ColumnOrThrow(const Dataset& dataset, const std::string& name) {
  auto idx = dataset.schema.IndexOf(name);
  if (!idx) throw DatasetError("unknown column '" + name + "'");
  return *idx;
}

double Require(double v, const std::string& what, const std::string& node_id) {
  if (!std::isfinite(v)) throw ExecutionError(what + " is not finite", node_id);
  return v;
}

// Element-wise application with scalar broadcasting.
NodeValue Map(const std::vector<NodeValue>& args, const std::string& node_id,
              const std::function<double(const std::vector<double>&)>& fn) {
  const std::vector<std::string>* cells = nullptr;
  for (const auto& a : args) {
    if (a.scalar()) continue;
    if (cells == nullptr) {
      cells = &a.cells;
    } else if (*cells != a.cells) {
      throw ExecutionError("operands have different group cells", node_id);
    }
  }
  NodeValue out;
  std::size_t n = 1;
  if (cells != nullptr) {
    out.cells = *cells;
    n = cells->size();
  }
  std::vector<double> x(args.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < args.size(); ++a) {
      x[a] = args[a].scalar() ? args[a].values[0] : args[a].values[i];
    }
    out.values.push_back(fn(x));
  }
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double PopulationStd(const std::vector<double>& v) {
  double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

class Engine {
 public:
  Engine(const AnalysisPlan& plan, const Dataset& dataset, const ExecuteOptions& options)
      : plan_(plan), graph_(plan), dataset_(dataset), options_(options) {
    result_.seed = options.seed;
    result_.noise_enabled = options.noise_enabled;
  }

  ExecutionResult Run() {
    for (const auto& id : *graph_.TopologicalOrder()) Visit(plan_.Get(id));
    return std::move(result_);
  }

 private:
  void Trace(const PlanNode& n, std::string detail) {
    result_.trace.push_back({n.id, std::string(NodeKindName(n.kind())), std::move(detail)});
  }

  const NodeValue& ValueOf(const std::string& id, const std::string& user) {
    auto it = values_.find(id);
    if (it == values_.end()) throw ExecutionError("'" + id + "' has no value", user);
    return it->second;
  }

  double ScalarOf(const std::string& id, const std::string& user) {
    const NodeValue& v = ValueOf(id, user);
    if (!v.scalar()) throw ExecutionError("'" + id + "' is grouped, a scalar is needed", user);
    return v.values[0];
  }

  double ParamValue(const Param& p, const std::string& user) {
    if (const auto* d = std::get_if<double>(&p)) return *d;
    return ScalarOf(std::get<NodeRef>(p).id, user);
  }

  NodeValue Eval(const Expr& e, std::optional<double> guard, const std::string& node_id) {
    switch (e.kind) {
      case Expr::Kind::kLiteral:
        return NodeValue::Scalar(e.literal);
      case Expr::Kind::kEpsilonTotal:
        return NodeValue::Scalar(plan_.privacy.epsilon_total);
      case Expr::Kind::kNode:
        return ValueOf(e.node, node_id);
      case Expr::Kind::kCall:
        break;
    }
    std::vector<NodeValue> args;
    for (const auto& a : e.args) args.push_back(Eval(a, guard, node_id));
    switch (e.op) {
      case ExprOp::kAdd:
        return Map(args, node_id, [](const auto& x) {
          double s = 0.0;
          for (double v : x) s += v;
          return s;
        });
      case ExprOp::kSub:
        return Map(args, node_id, [](const auto& x) { return x.size() == 1 ? -x[0] : x[0] - x[1]; });
      case ExprOp::kMul:
        return Map(args, node_id, [](const auto& x) {
          double p = 1.0;
          for (double v : x) p *= v;
          return p;
        });
      case ExprOp::kDiv:
        return Map(args, node_id, [&](const auto& x) {
          double d = guard ? std::max(x[1], *guard) : x[1];
          if (d == 0.0) throw ExecutionError("division by zero", node_id);
          return x[0] / d;
        });
      case ExprOp::kClamp:
        return Map(args, node_id, [&](const auto& x) {
          if (x[1] > x[2]) throw ExecutionError("clamp with lo > hi", node_id);
          return std::clamp(x[0], x[1], x[2]);
        });
      case ExprOp::kAbs:
        return Map(args, node_id, [](const auto& x) { return std::fabs(x[0]); });
      case ExprOp::kMax:
        return Map(args, node_id, [](const auto& x) { return *std::max_element(x.begin(), x.end()); });
      case ExprOp::kMin:
        return Map(args, node_id, [](const auto& x) { return *std::min_element(x.begin(), x.end()); });
      case ExprOp::kSqrt:
        return Map(args, node_id, [&](const auto& x) {
          if (x[0] < 0.0) throw ExecutionError("square root of a negative value", node_id);
          return std::sqrt(x[0]);
        });
      case ExprOp::kMean:
      case ExprOp::kStd: {
        auto reduce = e.op == ExprOp::kMean ? Mean : PopulationStd;
        if (args.size() == 1 && !args[0].scalar()) {
          if (args[0].values.empty()) throw ExecutionError("reduction over no cells", node_id);
          return NodeValue::Scalar(reduce(args[0].values));
        }
        return Map(args, node_id, [&](const auto& x) { return reduce(x); });
      }
    }
    throw ExecutionError("unknown operator", node_id);
  }

  void CheckFinite(const NodeValue& v, const std::string& node_id) {
    for (double x : v.values) Require(x, "value of '" + node_id + "'", node_id);
  }

  void Visit(const PlanNode& n) {
    switch (n.kind()) {
      case NodeKind::kSource:
        tables_.emplace(n.id, dataset_);
        Trace(n, std::to_string(dataset_.rows.size()) + " rows, " +
                     std::to_string(dataset_.unit_index.size()) + " units");
        return;
      case NodeKind::kClip: {
        const auto& clip = n.as<ClipPayload>();
        const Dataset& in = tables_.at(*graph_.DataInput(n.id));
        double raw = ParamValue(clip.per_unit_bound, n.id);
        Require(raw, "clip bound", n.id);
        std::size_t k = static_cast<std::size_t>(std::max(1.0, std::floor(raw)));
        Dataset out = ClipContributions(in, k, clip.scope, options_.seed, n.id, clip.value_bounds);
        result_.clipped_rows[n.id] = out.origin;
        Trace(n, "k=" + std::to_string(k) + (clip.scope ? " per " + *clip.scope : "") + ", kept " +
                     std::to_string(out.rows.size()) + " of " + std::to_string(in.rows.size()) +
                     " rows");
        tables_.emplace(n.id, std::move(out));
        return;
      }
      case NodeKind::kAggregate: {
        const Dataset& in = tables_.at(*graph_.DataInput(n.id));
        NodeValue v;
        try {
          v = EvaluateAggregate(n.as<AggregatePayload>(), in);
        } catch (const DatasetError& e) {
          throw ExecutionError(e.what(), n.id);
        }
        Trace(n, Describe(v));
        values_[n.id] = std::move(v);
        return;
      }
      case NodeKind::kNoise:
        VisitNoise(n);
        return;
      case NodeKind::kHyperparameter: {
        NodeValue v = Eval(n.as<HyperparameterPayload>().value, std::nullopt, n.id);
        CheckFinite(v, n.id);
        Trace(n, Describe(v));
        values_[n.id] = std::move(v);
        return;
      }
      case NodeKind::kConstant:
        values_[n.id] = NodeValue::Scalar(n.as<ConstantPayload>().value);
        return;
      case NodeKind::kPostProcess: {
        const auto& pp = n.as<PostProcessPayload>();
        std::optional<double> guard;
        if (pp.guard) guard = ParamValue(*pp.guard, n.id);
        NodeValue v = Eval(pp.expr, guard, n.id);
        CheckFinite(v, n.id);
        Trace(n, Describe(v));
        values_[n.id] = std::move(v);
        return;
      }
      case NodeKind::kRelease: {
        NodeValue v = ValueOf(*graph_.DataInput(n.id), n.id);
        result_.released[n.id] = v;
        Trace(n, Describe(v));
        values_[n.id] = std::move(v);
        return;
      }
    }
  }

  void VisitNoise(const PlanNode& n) {
    const auto& noise = n.as<NoisePayload>();
    const std::string input = *graph_.DataInput(n.id);
    NodeValue v = ValueOf(input, n.id);
    auto eps = ResolveEpsilon(noise, plan_);
    if (!eps || *eps <= 0) throw ExecutionError("epsilon is not a positive constant", n.id);
    double delta;
    if (const auto* d = std::get_if<double>(&noise.sensitivity)) {
      delta = *d;
    } else if (const auto* r = std::get_if<NodeRef>(&noise.sensitivity)) {
      delta = ScalarOf(r->id, n.id);
    } else {
      SensitivityBound b = DeriveInputSensitivity(plan_, n.id);
      if (b.unbounded()) {
        throw ExecutionError("automatic sensitivity of '" + input + "' is unbounded", n.id);
      }
      delta = *b.value;
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      throw ExecutionError("sensitivity " + FormatDouble(delta) + " is not positive", n.id);
    }
    double scale = delta / ToDouble(*eps);
    if (options_.noise_enabled) {
      RandomStream rng = MakeStream(options_.seed, "noise/" + n.id);
      NodeValue draws{v.cells, {}};
      for (double& x : v.values) {
        double z = SampleLaplace(scale, rng);
        draws.values.push_back(z);
        x += z;
      }
      result_.noise_draws[n.id] = std::move(draws);
    }
    Trace(n, "laplace scale=" + FormatDouble(scale) + " (sensitivity " + FormatDouble(delta) +
                 ", epsilon " + ToString(*eps) + ")" +
                 (options_.noise_enabled ? "" : ", noise disabled"));
    values_[n.id] = std::move(v);
  }

  static std::string Describe(const NodeValue& v) {
    if (v.scalar()) return FormatDouble(v.values[0]);
    std::string s;
    for (std::size_t i = 0; i < v.cells.size(); ++i) {
      s += (i ? ", " : "") + v.cells[i] + "=" + FormatDouble(v.values[i]);
    }
    return s;
  }

  const AnalysisPlan& plan_;
  PlanGraph graph_;
  const Dataset& dataset_;
  ExecuteOptions options_;
  std::map<std::string, Dataset> tables_;
  std::map<std::string, NodeValue> values_;
  ExecutionResult result_;
};

ordered_json ValueJson(const NodeValue& v) {
  if (v.scalar()) return v.values[0];
  ordered_json j = ordered_json::object();
  for (std::size_t i = 0; i < v.cells.size(); ++i) j[v.cells[i]] = v.values[i];
  return j;
}

}  // namespace

ExecutionRefused::ExecutionRefused(Report report)
    : std::runtime_error("plan '" + report.plan_name +
                         "' failed verification; pass allow_invalid to run it anyway"),
      report_(std::move(report)) {}

Dataset ClipContributions(const Dataset& dataset, std::size_t k,
                          const std::optional<std::string>& scope, std::uint64_t seed,
                          std::string_view clip_id, const std::optional<ValueBounds>& bounds) {
  if (k == 0) throw ContractViolation("clip bound must be at least 1", std::string(clip_id));
  std::optional<std::size_t> scope_idx;
  if (scope) scope_idx = ColumnOrThrow(dataset, *scope);
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    std::string cell = scope_idx ? CellText(dataset.rows[i][*scope_idx]) : std::string("*");
    groups[{dataset.UnitOf(i), cell}].push_back(i);
  }
  std::vector<bool> keep(dataset.rows.size(), false);
  for (auto& [key, rows] : groups) {
    if (rows.size() > k) {
      RandomStream rng = MakeStream(
          seed, "clip/" + std::string(clip_id) + "/" + key.first + "/" + key.second);
      // Partial Fisher-Yates: the first k slots become the sample.
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(UniformIndex(rng, rows.size() - i));
        std::swap(rows[i], rows[j]);
      }
      rows.resize(k);
    }
    for (std::size_t i : rows) keep[i] = true;
  }
  std::optional<std::size_t> bound_idx;
  if (bounds) bound_idx = ColumnOrThrow(dataset, bounds->column);
  Dataset out;
  out.schema = dataset.schema;
  out.unit_column = dataset.unit_column;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    if (!keep[i]) continue;
    Row row = dataset.rows[i];
    if (bound_idx) {
      double& v = std::get<double>(row[*bound_idx]);
      v = std::clamp(v, bounds->lo, bounds->hi);
    }
    out.rows.push_back(std::move(row));
    out.origin.push_back(dataset.origin[i]);
  }
  out.RebuildIndex();
  return out;
}

NodeValue EvaluateAggregate(const AggregatePayload& aggregate, const Dataset& dataset) {
  std::vector<std::pair<std::size_t, const Predicate*>> preds;
  for (const auto& p : aggregate.where) preds.push_back({ColumnOrThrow(dataset, p.column), &p});
  NodeValue out;
  std::optional<std::size_t> group_idx;
  std::map<std::string, std::size_t> cell_pos;
  if (aggregate.group_by) {
    group_idx = ColumnOrThrow(dataset, *aggregate.group_by);
    const Column& col = dataset.schema.columns[*group_idx];
    if (!col.values) {
      throw DatasetError("group_by column '" + col.name + "' has no declared value set");
    }
    out.cells = *col.values;
    for (std::size_t i = 0; i < out.cells.size(); ++i) cell_pos[out.cells[i]] = i;
    out.values.assign(out.cells.size(), 0.0);
  } else {
    out.values.assign(1, 0.0);
  }
  std::optional<std::size_t> sum_idx;
  if (aggregate.op == AggregateOp::kSum) {
    if (!aggregate.column) throw DatasetError("sum aggregate without a column");
    sum_idx = ColumnOrThrow(dataset, *aggregate.column);
  }
  std::vector<std::map<std::string, double>> per_unit(out.values.size());
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    const Row& row = dataset.rows[i];
    bool match = std::all_of(preds.begin(), preds.end(),
                             [&](const auto& p) { return Matches(*p.second, row[p.first]); });
    if (!match) continue;
    std::size_t slot = 0;
    if (group_idx) {
      auto it = cell_pos.find(CellText(row[*group_idx]));
      if (it == cell_pos.end()) continue;
      slot = it->second;
    }
    switch (aggregate.op) {
      case AggregateOp::kCount:
        out.values[slot] += 1.0;
        break;
      case AggregateOp::kSum:
        out.values[slot] += std::get<double>(row[*sum_idx]);
        break;
      case AggregateOp::kMaxPerUnit: {
        double& c = per_unit[slot][dataset.UnitOf(i)];
        c += 1.0;
        out.values[slot] = std::max(out.values[slot], c);
        break;
      }
    }
  }
  return out;
}

Dataset ApplyClipChain(const AnalysisPlan& plan, std::string_view aggregate_id,
                       const Dataset& dataset, std::uint64_t seed) {
  Dataset current = dataset;
  for (const PlanNode* c : ClipChain(plan, aggregate_id)) {
    const auto& clip = c->as<ClipPayload>();
    auto k = ResolveParam(clip.per_unit_bound, plan);
    if (!k) throw ContractViolation("clip '" + c->id + "' has no static bound", c->id);
    double raw = ToDouble(*k);
    current = ClipContributions(current, static_cast<std::size_t>(std::max(1.0, std::floor(raw))),
                                clip.scope, seed, c->id, clip.value_bounds);
  }
  return current;
}

ExecutionResult Execute(const AnalysisPlan& plan, const Dataset& dataset,
                        const ExecuteOptions& options) {
  if (options.allow_invalid) {
    auto errors = ValidatePlan(plan);
    if (!errors.empty()) throw PlanInvalid(std::move(errors));
  } else {
    Report report = Verify(plan, {options.noise_threshold});
    if (report.has_violations()) throw ExecutionRefused(std::move(report));
  }
  return Engine(plan, dataset, options).Run();
}

std::string ResultToJson(const ExecutionResult& result, int indent) {
  ordered_json j;
  j["seed"] = result.seed;
  j["noise_enabled"] = result.noise_enabled;
  j["released"] = ordered_json::object();
  for (const auto& [id, v] : result.released) j["released"][id] = ValueJson(v);
  j["noise_draws"] = ordered_json::object();
  for (const auto& [id, v] : result.noise_draws) j["noise_draws"][id] = ValueJson(v);
  return j.dump(indent) + "\n";
}

std::string TraceToJson(const ExecutionResult& result, int indent) {
  ordered_json j = ordered_json::array();
  for (const auto& t : result.trace) {
    j.push_back({{"node", t.node_id}, {"kind", t.kind}, {"detail", t.detail}});
  }
  ordered_json clipped = ordered_json::object();
  for (const auto& [id, rows] : result.clipped_rows) clipped[id] = rows.size();
  return ordered_json{{"seed", result.seed}, {"trace", j}, {"clipped_row_counts", clipped}}.dump(
             indent) +
         "\n";
}

}  // namespace dpaudit
