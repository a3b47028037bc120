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

#include "dpaudit/sensitivity.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "dpaudit/executor.h"
#include "dpaudit/plan_graph.h"
#include "dpaudit/rational.h"

namespace dpaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const PlanNode& RequireAggregate(const AnalysisPlan& plan, std::string_view id) {
  const PlanNode* node = plan.Find(id);
  if (node == nullptr) throw ContractViolation("no node '" + std::string(id) + "'", std::string(id));
  if (node->kind() != NodeKind::kAggregate) {
    throw ContractViolation("node '" + node->id + "' is a " +
                                std::string(NodeKindName(node->kind())) + ", not an aggregate",
                            node->id);
  }
  return *node;
}

// True when every row the aggregate reads has one fixed value of `column`
// (per output cell for grouped aggregates).
bool ConfinedTo(const AggregatePayload& agg, const std::string& column) {
  if (agg.group_by && *agg.group_by == column) return true;
  for (const auto& p : agg.where) {
    if (p.column == column && p.op == CompareOp::kEq) return true;
  }
  return false;
}

struct RowCap {
  std::optional<double> rows;  // per unit and output cell
  std::vector<std::string> trace;
};

RowCap DeriveRowCap(const AnalysisPlan& plan, const PlanNode& node) {
  const auto& agg = node.as<AggregatePayload>();
  RowCap out;
  auto tighten = [&](double v) {
    if (!out.rows || v < *out.rows) out.rows = v;
  };
  for (const PlanNode* clip_node : ClipChain(plan, node.id)) {
    const auto& clip = clip_node->as<ClipPayload>();
    auto k = ResolveParam(clip.per_unit_bound, plan);
    if (!k) {
      out.trace.push_back("clip '" + clip_node->id +
                          "' has a data-dependent bound and gives no static cap");
      continue;
    }
    double rows = ToDouble(*k);
    std::string step = "clip '" + clip_node->id + "': at most " + FormatDouble(rows) +
                       " rows per unit";
    if (clip.scope) {
      const std::string& s = *clip.scope;
      bool single_cell = ConfinedTo(agg, s);
      std::string why;
      for (const auto& c : plan.constraints) {
        if (single_cell) break;
        if (c.guarantee != Guarantee::kSingleValue || c.attribute != s) continue;
        if (!c.within) {
          single_cell = true;
          why = " (single_value constraint on '" + s + "')";
        } else if (ConfinedTo(agg, *c.within)) {
          single_cell = true;
          why = " (single_value constraint on '" + s + "' within '" + *c.within + "')";
        }
      }
      if (single_cell) {
        step += " per '" + s + "' cell, aggregate sees one cell" + why;
      } else {
        const Column* col = plan.schema.Find(s);
        double cells = col && col->values ? static_cast<double>(col->values->size()) : kInf;
        rows *= cells;
        step += " per '" + s + "' cell, aggregate spans " + FormatDouble(cells) + " cells -> " +
                FormatDouble(rows);
      }
    }
    out.trace.push_back(step);
    tighten(rows);
  }
  for (const auto& c : plan.constraints) {
    if (c.guarantee == Guarantee::kSingleRow && ConfinedTo(agg, c.attribute)) {
      out.trace.push_back("single_row constraint on '" + c.attribute +
                          "', aggregate sees one cell: at most 1 row per unit");
      tighten(1.0);
    }
  }
  return out;
}

std::string OpLabel(AggregateOp op) {
  switch (op) {
    case AggregateOp::kCount:
      return "count";
    case AggregateOp::kSum:
      return "sum";
    case AggregateOp::kMaxPerUnit:
      return "max_per_unit";
  }
  return "?";
}

bool SingleRowOnly(const AnalysisPlan& plan, const AggregatePayload& agg, double rows) {
  if (rows != 1.0) return false;
  for (const auto& c : plan.constraints) {
    if (c.guarantee == Guarantee::kSingleRow && ConfinedTo(agg, c.attribute)) return true;
  }
  return false;
}

// Interval arithmetic helpers. 0 * inf counts as 0.
double Mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

Interval Hull(std::initializer_list<double> v) {
  return {std::min(v), std::max(v)};
}

Interval MulI(Interval a, Interval b) {
  return Hull({Mul(a.lo, b.lo), Mul(a.lo, b.hi), Mul(a.hi, b.lo), Mul(a.hi, b.hi)});
}

constexpr Interval kAll{-kInf, kInf};

bool IsCountOver(const AnalysisPlan& plan, const Expr& e, const PlanNode** out) {
  if (e.kind != Expr::Kind::kNode) return false;
  const PlanNode* n = plan.Find(e.node);
  if (n == nullptr || n->kind() != NodeKind::kAggregate) return false;
  if (n->as<AggregatePayload>().op != AggregateOp::kCount) return false;
  *out = n;
  return true;
}

std::optional<std::string> EdgeInput(const AnalysisPlan& plan, const std::string& id) {
  std::optional<std::string> in;
  for (const auto& e : plan.edges) {
    if (e.to == id) {
      if (in) return std::nullopt;
      in = e.from;
    }
  }
  return in;
}

// count(P and Q) / count(P) over the same input.
bool IsProportion(const AnalysisPlan& plan, const Expr& e) {
  if (e.kind != Expr::Kind::kCall || e.op != ExprOp::kDiv || e.args.size() != 2) return false;
  const PlanNode* num = nullptr;
  const PlanNode* den = nullptr;
  if (!IsCountOver(plan, e.args[0], &num) || !IsCountOver(plan, e.args[1], &den)) return false;
  const auto& a = num->as<AggregatePayload>();
  const auto& b = den->as<AggregatePayload>();
  if (a.group_by != b.group_by) return false;
  auto ia = EdgeInput(plan, num->id);
  if (!ia || ia != EdgeInput(plan, den->id)) return false;
  for (const auto& p : b.where) {
    if (std::find(a.where.begin(), a.where.end(), p) == a.where.end()) return false;
  }
  return true;
}

class RangeAnalysis {
 public:
  explicit RangeAnalysis(const AnalysisPlan& plan) : plan_(plan) {}

  Interval OfNode(const std::string& id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    if (!active_.insert(id).second) return kAll;
    Interval r = Compute(id);
    active_.erase(id);
    memo_[id] = r;
    return r;
  }

 private:
  Interval Compute(const std::string& id) {
    const PlanNode* n = plan_.Find(id);
    if (n == nullptr) return kAll;
    switch (n->kind()) {
      case NodeKind::kConstant: {
        double v = n->as<ConstantPayload>().value;
        return {v, v};
      }
      case NodeKind::kHyperparameter: {
        const Expr& e = n->as<HyperparameterPayload>().value;
        if (auto c = ResolveConstant(e, plan_)) {
          double v = ToDouble(*c);
          return {v, v};
        }
        return OfExpr(e, std::nullopt);
      }
      case NodeKind::kAggregate: {
        const auto& agg = n->as<AggregatePayload>();
        if (agg.op != AggregateOp::kSum) return {0.0, kInf};
        return kAll;
      }
      case NodeKind::kPostProcess: {
        const auto& pp = n->as<PostProcessPayload>();
        std::optional<double> guard;
        if (pp.guard) {
          if (auto g = ResolveParam(*pp.guard, plan_)) guard = ToDouble(*g);
          else guard = 0.0;  // positive but unknown
        }
        return OfExpr(pp.expr, pp.guard ? guard : std::nullopt);
      }
      case NodeKind::kRelease: {
        auto in = EdgeInput(plan_, id);
        return in ? OfNode(*in) : kAll;
      }
      default:
        return kAll;
    }
  }

  Interval OfExpr(const Expr& e, std::optional<double> guard) {
    switch (e.kind) {
      case Expr::Kind::kLiteral:
        return {e.literal, e.literal};
      case Expr::Kind::kEpsilonTotal:
        return {plan_.privacy.epsilon_total, plan_.privacy.epsilon_total};
      case Expr::Kind::kNode:
        return OfNode(e.node);
      case Expr::Kind::kCall:
        break;
    }
    if (IsProportion(plan_, e)) return {0.0, 1.0};
    std::vector<Interval> a;
    for (const auto& arg : e.args) a.push_back(OfExpr(arg, guard));
    switch (e.op) {
      case ExprOp::kAdd: {
        Interval s{0.0, 0.0};
        for (const auto& x : a) s = {s.lo + x.lo, s.hi + x.hi};
        return s;
      }
      case ExprOp::kSub:
        if (a.size() == 1) return {-a[0].hi, -a[0].lo};
        return {a[0].lo - a[1].hi, a[0].hi - a[1].lo};
      case ExprOp::kMul: {
        Interval p{1.0, 1.0};
        for (const auto& x : a) p = MulI(p, x);
        return p;
      }
      case ExprOp::kDiv: {
        Interval d = a[1];
        if (guard) d = {std::max(d.lo, *guard), std::max(d.hi, *guard)};
        if (!(d.lo > 0.0) && !(d.hi < 0.0)) return kAll;
        Interval inv = {1.0 / d.hi, 1.0 / d.lo};
        return MulI(a[0], inv);
      }
      case ExprOp::kClamp: {
        Interval lifted{std::max(a[0].lo, a[1].lo), std::max(a[0].hi, a[1].hi)};
        return {std::min(lifted.lo, a[2].lo), std::min(lifted.hi, a[2].hi)};
      }
      case ExprOp::kAbs: {
        const Interval& x = a[0];
        if (x.lo >= 0) return x;
        if (x.hi <= 0) return {-x.hi, -x.lo};
        return {0.0, std::max(-x.lo, x.hi)};
      }
      case ExprOp::kMax: {
        Interval m = a[0];
        for (const auto& x : a) m = {std::max(m.lo, x.lo), std::max(m.hi, x.hi)};
        return m;
      }
      case ExprOp::kMin: {
        Interval m = a[0];
        for (const auto& x : a) m = {std::min(m.lo, x.lo), std::min(m.hi, x.hi)};
        return m;
      }
      case ExprOp::kSqrt:
        if (a[0].hi < 0) return kAll;
        return {std::sqrt(std::max(a[0].lo, 0.0)), std::sqrt(a[0].hi)};
      case ExprOp::kMean: {
        Interval s{0.0, 0.0};
        for (const auto& x : a) s = {s.lo + x.lo, s.hi + x.hi};
        double n = static_cast<double>(a.size());
        return {s.lo / n, s.hi / n};
      }
      case ExprOp::kStd: {
        double lo = kInf, hi = -kInf;
        for (const auto& x : a) {
          lo = std::min(lo, x.lo);
          hi = std::max(hi, x.hi);
        }
        // A single grouped operand may span any number of cells.
        if (a.size() == 1) return {0.0, kInf};
        return {0.0, (hi - lo) / 2.0};
      }
    }
    return kAll;
  }

  const AnalysisPlan& plan_;
  std::map<std::string, Interval> memo_;
  std::set<std::string> active_;
};

// ---- Oracle ----

std::size_t CountMultisets(std::size_t m, std::size_t max_size, std::size_t limit) {
  // sum_{s=1..L} C(m + s - 1, s), saturating at limit + 1.
  double total = 0.0;
  double term = 1.0;
  for (std::size_t s = 1; s <= max_size; ++s) {
    term = term * static_cast<double>(m + s - 1) / static_cast<double>(s);
    total += term;
    if (total > static_cast<double>(limit)) return limit + 1;
  }
  return static_cast<std::size_t>(total);
}

struct ColumnUse {
  bool full = false;  // every declared value matters
  std::vector<std::string> constants;
  std::vector<double> numbers;
};

std::vector<std::vector<Cell>> CandidateValues(const AnalysisPlan& plan,
                                               const AggregatePayload& agg,
                                               const std::vector<const PlanNode*>& chain,
                                               const Dataset& dataset) {
  std::map<std::string, ColumnUse> use;
  for (const auto& p : agg.where) {
    if (const auto* s = std::get_if<std::string>(&p.value)) {
      use[p.column].constants.push_back(*s);
    } else {
      double t = std::get<double>(p.value);
      use[p.column].numbers.insert(use[p.column].numbers.end(), {t - 1.0, t, t + 1.0});
    }
  }
  if (agg.group_by) use[*agg.group_by].full = true;
  for (const PlanNode* c : chain) {
    const auto& clip = c->as<ClipPayload>();
    if (clip.scope) use[*clip.scope].full = true;
    if (clip.value_bounds) {
      auto& u = use[clip.value_bounds->column];
      u.numbers.push_back(clip.value_bounds->lo);
      u.numbers.push_back(clip.value_bounds->hi);
    }
  }
  for (const auto& c : plan.constraints) {
    use[c.attribute].full = true;
    if (c.within) use[*c.within].full = true;
  }
  if (agg.column) {
    auto& u = use[*agg.column];
    if (u.numbers.empty()) {
      std::size_t idx = dataset.schema.IndexOf(*agg.column).value();
      double lo = 0.0, hi = 0.0;
      for (const auto& row : dataset.rows) {
        double v = std::get<double>(row[idx]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      u.numbers = {lo, hi};
    }
  }

  std::vector<std::vector<Cell>> out;
  for (const auto& col : dataset.schema.columns) {
    std::vector<Cell> values;
    auto it = use.find(col.name);
    if (col.name == dataset.unit_column) {
      values.push_back(std::string());  // filled per candidate
    } else if (col.kind == ColumnKind::kNumeric) {
      std::set<double> nums;
      if (it != use.end()) nums.insert(it->second.numbers.begin(), it->second.numbers.end());
      if (nums.empty()) nums.insert(0.0);
      values.assign(nums.begin(), nums.end());
    } else if (it == use.end()) {
      if (col.values && !col.values->empty()) {
        values.push_back(col.values->front());
      } else if (!dataset.rows.empty()) {
        std::size_t idx = dataset.schema.IndexOf(col.name).value();
        values.push_back(dataset.rows.front()[idx]);
      } else {
        values.push_back(std::string(col.kind == ColumnKind::kTimestamp ? "1970-01-01" : "x"));
      }
    } else {
      std::set<std::string> strs(it->second.constants.begin(), it->second.constants.end());
      std::vector<std::string> pool;
      if (col.values) {
        pool = *col.values;
      } else {
        std::size_t idx = dataset.schema.IndexOf(col.name).value();
        std::set<std::string> seen;
        for (const auto& row : dataset.rows) seen.insert(std::get<std::string>(row[idx]));
        pool.assign(seen.begin(), seen.end());
      }
      if (it->second.full) {
        strs.insert(pool.begin(), pool.end());
        if (!col.values) strs.insert("__other__");
      } else {
        // One representative outside the mentioned constants.
        auto extra = std::find_if(pool.begin(), pool.end(),
                                  [&](const std::string& v) { return !strs.count(v); });
        strs.insert(extra != pool.end() ? *extra : std::string("__other__"));
      }
      values.assign(strs.begin(), strs.end());
    }
    out.push_back(std::move(values));
  }
  return out;
}

bool RespectsConstraints(const AnalysisPlan& plan, const Schema& schema,
                         const std::vector<const Row*>& rows) {
  for (const auto& c : plan.constraints) {
    std::size_t a = schema.IndexOf(c.attribute).value();
    if (c.guarantee == Guarantee::kSingleRow) {
      std::set<Cell> seen;
      for (const Row* r : rows) {
        if (!seen.insert((*r)[a]).second) return false;
      }
    } else {
      std::optional<std::size_t> w;
      if (c.within) w = schema.IndexOf(*c.within).value();
      std::map<Cell, Cell> value_in;
      for (const Row* r : rows) {
        Cell key = w ? (*r)[*w] : Cell(std::string());
        auto [it, inserted] = value_in.emplace(key, (*r)[a]);
        if (!inserted && it->second != (*r)[a]) return false;
      }
    }
  }
  return true;
}

double MaxCellDiff(const NodeValue& a, const NodeValue& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d = std::max(d, std::fabs(a.values[i] - b.values[i]));
  }
  return d;
}

}  // namespace

std::string SensitivityBound::ToString() const {
  return value ? FormatDouble(*value) : std::string("unbounded");
}

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

SensitivityBound DeriveSensitivity(const AnalysisPlan& plan, std::string_view aggregate_id) {
  const PlanNode& node = RequireAggregate(plan, aggregate_id);
  const auto& agg = node.as<AggregatePayload>();
  RowCap cap = DeriveRowCap(plan, node);
  SensitivityBound out;
  out.trace = cap.trace;
  if (!cap.rows || !std::isfinite(*cap.rows)) {
    out.trace.push_back("R4: nothing bounds the rows one unit contributes to " + OpLabel(agg.op) +
                        " '" + node.id + "' -> unbounded");
    return out;
  }
  double rows = *cap.rows;
  if (agg.op == AggregateOp::kSum) {
    std::optional<ValueBounds> bounds;
    for (const PlanNode* c : ClipChain(plan, node.id)) {
      const auto& vb = c->as<ClipPayload>().value_bounds;
      if (vb && agg.column && vb->column == *agg.column) bounds = vb;
    }
    if (!bounds) {
      out.trace.push_back("R4: summed column '" + agg.column.value_or("") +
                          "' has no value bounds -> unbounded");
      return out;
    }
    double m = std::max(std::fabs(bounds->lo), std::fabs(bounds->hi));
    out.value = Mul(rows, m);
    out.trace.push_back("R3: sum '" + node.id + "' with " + FormatDouble(rows) +
                        " rows per unit and values in [" + FormatDouble(bounds->lo) + ", " +
                        FormatDouble(bounds->hi) + "] -> " + FormatDouble(*out.value));
    return out;
  }
  out.value = rows;
  std::string rule = SingleRowOnly(plan, agg, rows) ? "R2" : "R1";
  out.trace.push_back(rule + ": " + OpLabel(agg.op) + " '" + node.id + "' with " +
                      FormatDouble(rows) + " rows per unit -> " + FormatDouble(rows));
  return out;
}

Interval StaticRange(const AnalysisPlan& plan, std::string_view node_id) {
  return RangeAnalysis(plan).OfNode(std::string(node_id));
}

SensitivityBound DeriveInputSensitivity(const AnalysisPlan& plan, std::string_view noise_id) {
  const PlanNode* node = plan.Find(noise_id);
  if (node == nullptr || node->kind() != NodeKind::kNoise) {
    throw ContractViolation("'" + std::string(noise_id) + "' is not a noise node",
                            std::string(noise_id));
  }
  auto input = EdgeInput(plan, node->id);
  if (!input) throw ContractViolation("noise node '" + node->id + "' has no single input", node->id);
  const PlanNode& in = plan.Get(*input);
  if (in.kind() == NodeKind::kAggregate) return DeriveSensitivity(plan, in.id);
  SensitivityBound out;
  Interval r = StaticRange(plan, in.id);
  if (r.bounded()) {
    out.value = r.width();
    out.trace.push_back("R5: '" + in.id + "' always lies in [" + FormatDouble(r.lo) + ", " +
                        FormatDouble(r.hi) + "] -> " + FormatDouble(*out.value));
  } else {
    out.trace.push_back("R4: '" + in.id + "' has no static range -> unbounded");
  }
  return out;
}

double EmpiricalSensitivity(const AnalysisPlan& plan, std::string_view aggregate_id,
                            const Dataset& dataset, const OracleOptions& options) {
  const PlanNode& node = RequireAggregate(plan, aggregate_id);
  const auto& agg = node.as<AggregatePayload>();
  if (dataset.unit_index.size() > options.max_units) {
    throw OracleCapExceeded("dataset has " + std::to_string(dataset.unit_index.size()) +
                            " privacy units; the oracle enumerates at most " +
                            std::to_string(options.max_units));
  }
  const std::uint64_t seed = options.clip_seed;
  const NodeValue base = EvaluateAggregate(agg, ApplyClipChain(plan, node.id, dataset, seed));
  double best = 0.0;

  // Removal neighbors.
  std::size_t largest_unit = 0;
  for (const auto& [unit, positions] : dataset.unit_index) {
    largest_unit = std::max(largest_unit, positions.size());
    std::vector<Row> rows;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
      if (dataset.UnitOf(i) != unit) rows.push_back(dataset.rows[i]);
    }
    Dataset without = MakeDataset(dataset.schema, dataset.unit_column, std::move(rows));
    NodeValue q = EvaluateAggregate(agg, ApplyClipChain(plan, node.id, without, seed));
    best = std::max(best, MaxCellDiff(base, q));
  }

  // Addition neighbors: one synthetic unit.
  auto chain = ClipChain(plan, node.id);
  RowCap cap = DeriveRowCap(plan, node);
  std::size_t max_rows;
  if (cap.rows && std::isfinite(*cap.rows)) {
    max_rows = std::min(static_cast<std::size_t>(*cap.rows) + 1, options.max_added_rows);
  } else {
    max_rows = std::clamp<std::size_t>(largest_unit, 1, options.max_added_rows);
  }
  auto columns = CandidateValues(plan, agg, chain, dataset);
  std::string new_unit = "__added_unit__";
  while (dataset.unit_index.count(new_unit)) new_unit += "_";
  const std::size_t unit_idx = dataset.schema.IndexOf(dataset.unit_column).value();
  std::vector<Row> domain(1, Row{});
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<Row> next;
    for (const auto& partial : domain) {
      for (const auto& v : columns[c]) {
        Row r = partial;
        r.push_back(c == unit_idx ? Cell(new_unit) : v);
        next.push_back(std::move(r));
      }
    }
    domain = std::move(next);
  }
  if (CountMultisets(domain.size(), max_rows, options.max_candidates) > options.max_candidates) {
    throw OracleCapExceeded("synthetic unit enumeration exceeds " +
                            std::to_string(options.max_candidates) + " candidates (" +
                            std::to_string(domain.size()) + " row shapes, up to " +
                            std::to_string(max_rows) + " rows)");
  }

  const bool additive = agg.op != AggregateOp::kMaxPerUnit;
  std::vector<std::size_t> pick;  // nondecreasing indices into domain
  std::vector<const Row*> rows;
  std::function<void(std::size_t)> extend = [&](std::size_t from) {
    if (!pick.empty()) {
      std::vector<Row> unit_rows;
      for (std::size_t i : pick) unit_rows.push_back(domain[i]);
      Dataset added = MakeDataset(dataset.schema, dataset.unit_column, std::move(unit_rows));
      NodeValue v = EvaluateAggregate(agg, ApplyClipChain(plan, node.id, added, seed));
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        double diff = additive ? std::fabs(v.values[i])
                               : std::max(v.values[i], base.values[i]) - base.values[i];
        best = std::max(best, diff);
      }
    }
    if (pick.size() == max_rows) return;
    for (std::size_t i = from; i < domain.size(); ++i) {
      rows.push_back(&domain[i]);
      if (RespectsConstraints(plan, dataset.schema, rows)) {
        pick.push_back(i);
        extend(i);
        pick.pop_back();
      }
      rows.pop_back();
    }
  };
  extend(0);
  return best;
}

}  // namespace dpaudit
