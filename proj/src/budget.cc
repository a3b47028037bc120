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

#include "dpaudit/budget.h"

#include <algorithm>
#include <set>
#include <tuple>

#include "dpaudit/plan_graph.h"

namespace dpaudit {
namespace {

// A scoped constraint: inside one cell of `column`, the `unlocks` columns
// partition the units.
struct Pending {
  std::string column;
  std::set<std::string> unlocks;
};

bool SiteLess(const NoiseSite& a, const NoiseSite& b) {
  return std::tie(a.node_id, a.cell) < std::tie(b.node_id, b.cell);
}

CompositionNode Leaf(const NoiseSite& s) {
  CompositionNode n;
  n.kind = CompositionNode::Kind::kLeaf;
  n.node_id = s.node_id;
  n.cell = s.cell;
  n.epsilon = s.epsilon;
  return n;
}

CompositionNode Flat(std::vector<NoiseSite> sites) {
  std::sort(sites.begin(), sites.end(), SiteLess);
  if (sites.size() == 1) return Leaf(sites.front());
  CompositionNode n;
  n.kind = CompositionNode::Kind::kSequential;
  for (const auto& s : sites) n.children.push_back(Leaf(s));
  return n;
}

// Groups sites by their scope value of `column`; sites without one go to `rest`.
std::map<std::string, std::vector<NoiseSite>> SplitBy(const std::vector<NoiseSite>& sites,
                                                      const std::string& column,
                                                      std::vector<NoiseSite>& rest) {
  std::map<std::string, std::vector<NoiseSite>> groups;
  for (const auto& s : sites) {
    auto it = s.scope.find(column);
    if (it == s.scope.end()) {
      rest.push_back(s);
    } else {
      groups[it->second].push_back(s);
    }
  }
  return groups;
}

CompositionNode Build(const std::vector<NoiseSite>& sites, const std::set<std::string>& licensed,
                      const std::vector<Pending>& pending);

// Sequential node over `blocks` followed by the leftover sites as leaves.
CompositionNode WithRest(CompositionNode block, std::vector<NoiseSite> rest) {
  if (rest.empty()) return block;
  CompositionNode seq;
  seq.kind = CompositionNode::Kind::kSequential;
  seq.children.push_back(std::move(block));
  std::sort(rest.begin(), rest.end(), SiteLess);
  for (const auto& s : rest) seq.children.push_back(Leaf(s));
  return seq;
}

CompositionNode Build(const std::vector<NoiseSite>& sites, const std::set<std::string>& licensed,
                      const std::vector<Pending>& pending) {
  CompositionNode best = Flat(sites);
  if (sites.size() <= 1) return best;
  Rational best_cost = best.Cost();
  auto consider = [&](CompositionNode candidate) {
    Rational c = candidate.Cost();
    if (c < best_cost) {
      best_cost = c;
      best = std::move(candidate);
    }
  };

  // Parallel split on a column that partitions the units here.
  for (const auto& column : licensed) {
    std::vector<NoiseSite> rest;
    auto groups = SplitBy(sites, column, rest);
    if (groups.empty()) continue;
    std::set<std::string> inner = licensed;
    inner.erase(column);
    CompositionNode par;
    par.kind = CompositionNode::Kind::kParallel;
    par.attribute = column;
    for (auto& [value, group] : groups) {
      CompositionNode child = Build(group, inner, pending);
      child.label = value;
      par.children.push_back(std::move(child));
    }
    consider(WithRest(std::move(par), std::move(rest)));
  }

  // Sequential split by the cells of a scoped constraint.
  for (std::size_t i = 0; i < pending.size(); ++i) {
    std::vector<NoiseSite> rest;
    auto groups = SplitBy(sites, pending[i].column, rest);
    if (groups.empty()) continue;
    std::vector<Pending> inner_pending = pending;
    inner_pending.erase(inner_pending.begin() + static_cast<std::ptrdiff_t>(i));
    std::set<std::string> inner = licensed;
    inner.insert(pending[i].unlocks.begin(), pending[i].unlocks.end());
    inner.erase(pending[i].column);
    CompositionNode seq;
    seq.kind = CompositionNode::Kind::kSequential;
    seq.attribute = pending[i].column;
    for (auto& [value, group] : groups) {
      CompositionNode child = Build(group, inner, inner_pending);
      child.label = value;
      seq.children.push_back(std::move(child));
    }
    consider(WithRest(std::move(seq), std::move(rest)));
  }
  return best;
}

// Raw aggregates whose data reaches `id` without crossing a noise node.
void RawAggregates(const AnalysisPlan& plan, const PlanGraph& graph, const std::string& id,
                   std::set<std::string>& seen, std::vector<const PlanNode*>& out) {
  if (!seen.insert(id).second) return;
  const PlanNode* n = plan.Find(id);
  if (n == nullptr) return;
  switch (n->kind()) {
    case NodeKind::kAggregate:
      out.push_back(n);
      return;
    case NodeKind::kPostProcess:
    case NodeKind::kHyperparameter:
      for (const auto& d : graph.Dependencies(id)) RawAggregates(plan, graph, d, seen, out);
      return;
    default:
      return;
  }
}

std::map<std::string, std::string> PinnedValues(const AggregatePayload& agg) {
  std::map<std::string, std::string> pinned;
  for (const auto& p : agg.where) {
    if (p.op != CompareOp::kEq) continue;
    if (const auto* s = std::get_if<std::string>(&p.value)) pinned[p.column] = *s;
  }
  return pinned;
}

}  // namespace

Rational CompositionNode::Cost() const {
  switch (kind) {
    case Kind::kLeaf:
      return epsilon;
    case Kind::kSequential: {
      Rational total = 0;
      for (const auto& c : children) total += c.Cost();
      return total;
    }
    case Kind::kParallel: {
      Rational worst = 0;
      for (const auto& c : children) worst = std::max(worst, c.Cost());
      return worst;
    }
  }
  return 0;
}

std::vector<NoiseSite> CollectNoiseSites(const AnalysisPlan& plan) {
  PlanGraph graph(plan);
  std::vector<const PlanNode*> noise_nodes;
  for (const auto& n : plan.nodes) {
    if (n.kind() == NodeKind::kNoise) noise_nodes.push_back(&n);
  }
  std::sort(noise_nodes.begin(), noise_nodes.end(),
            [](const PlanNode* a, const PlanNode* b) { return a->id < b->id; });

  std::vector<NoiseSite> sites;
  for (const PlanNode* n : noise_nodes) {
    auto eps = ResolveEpsilon(n->as<NoisePayload>(), plan);
    if (!eps) throw BudgetError("epsilon of noise node '" + n->id + "' is unresolvable", n->id);
    if (*eps <= 0) {
      throw BudgetError("epsilon of noise node '" + n->id + "' is " + ToString(*eps), n->id);
    }
    std::vector<const PlanNode*> aggregates;
    std::set<std::string> seen;
    if (auto in = graph.DataInput(n->id)) RawAggregates(plan, graph, *in, seen, aggregates);

    // Scope: the pinned values every contributing aggregate agrees on.
    std::map<std::string, std::string> scope;
    std::set<std::string> groupings;
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
      const auto& agg = aggregates[i]->as<AggregatePayload>();
      auto pinned = PinnedValues(agg);
      if (i == 0) {
        scope = pinned;
      } else {
        for (auto it = scope.begin(); it != scope.end();) {
          auto p = pinned.find(it->first);
          it = (p == pinned.end() || p->second != it->second) ? scope.erase(it) : std::next(it);
        }
      }
      if (agg.group_by) groupings.insert(*agg.group_by);
    }
    if (groupings.size() > 1) {
      throw BudgetError("noise node '" + n->id + "' mixes values grouped by different columns",
                        n->id);
    }
    if (groupings.empty()) {
      sites.push_back({n->id, std::nullopt, *eps, scope});
      continue;
    }
    const std::string& g = *groupings.begin();
    const Column* col = plan.schema.Find(g);
    if (col == nullptr || !col->values) {
      throw BudgetError("group_by column '" + g + "' of noise node '" + n->id +
                            "' has no declared value set",
                        n->id);
    }
    for (const auto& cell : *col->values) {
      auto cell_scope = scope;
      cell_scope[g] = cell;
      sites.push_back({n->id, cell, *eps, std::move(cell_scope)});
    }
  }
  return sites;
}

CompositionNode ComposeSites(std::vector<NoiseSite> sites,
                             const std::vector<PartitionConstraint>& constraints,
                             const Schema& schema) {
  std::set<std::string> licensed;
  std::vector<Pending> pending;
  for (const auto& c : constraints) {
    if (c.guarantee == Guarantee::kSingleValue) {
      if (!c.within) {
        licensed.insert(c.attribute);
      } else {
        pending.push_back({*c.within, {c.attribute}});
      }
    } else {
      Pending p{c.attribute, {}};
      for (const auto& col : schema.columns) {
        if (col.kind == ColumnKind::kCategorical) p.unlocks.insert(col.name);
      }
      pending.push_back(std::move(p));
    }
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.column, a.unlocks) < std::tie(b.column, b.unlocks);
  });
  if (sites.empty()) return CompositionNode{};
  return Build(sites, licensed, pending);
}

BudgetLedger Compose(const AnalysisPlan& plan) {
  auto sites = CollectNoiseSites(plan);
  BudgetLedger ledger;
  for (const auto& s : sites) {
    if (!ledger.entries.empty() && ledger.entries.back().node_id == s.node_id) {
      ++ledger.entries.back().releases;
    } else {
      ledger.entries.push_back({s.node_id, s.epsilon, 1});
    }
  }
  ledger.composition = ComposeSites(std::move(sites), plan.constraints, plan.schema);
  ledger.worst_case_total = ledger.composition.Cost();
  ledger.budget_limit = RationalFromDouble(plan.privacy.epsilon_total);
  return ledger;
}

Rational AllocateEqual(const Rational& epsilon_total, std::size_t n) {
  if (n == 0) throw ContractViolation("cannot split a budget over zero queries");
  return epsilon_total / static_cast<long long>(n);
}

}  // namespace dpaudit
