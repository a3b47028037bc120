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

#include "dpaudit/plan_graph.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>

namespace dpaudit {
namespace {

const std::vector<std::string>& Lookup(
    const std::map<std::string, std::vector<std::string>, std::less<>>& m, std::string_view id) {
  static const std::vector<std::string> kEmpty;
  auto it = m.find(id);
  return it == m.end() ? kEmpty : it->second;
}

// Recursive-descent parser for epsilon text:
//   expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)*
//   factor := number | 'epsilon_total' | '(' expr ')' | '-' factor
class EpsilonTextParser {
 public:
  EpsilonTextParser(std::string_view text, const Rational& epsilon_total)
      : text_(text), epsilon_total_(epsilon_total) {}

  Rational Parse() {
    Rational v = Expr();
    SkipSpace();
    if (pos_ != text_.size()) Error();
    return v;
  }

 private:
  [[noreturn]] void Error() const {
    throw std::invalid_argument("malformed epsilon expression '" + std::string(text_) + "'");
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool Consume(char c) {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Rational Expr() {
    Rational v = Term();
    for (;;) {
      if (Consume('+')) {
        v += Term();
      } else if (Consume('-')) {
        v -= Term();
      } else {
        return v;
      }
    }
  }

  Rational Term() {
    Rational v = Factor();
    for (;;) {
      if (Consume('*')) {
        v *= Factor();
      } else if (Consume('/')) {
        Rational d = Factor();
        if (d == 0) Error();
        v /= d;
      } else {
        return v;
      }
    }
  }

  Rational Factor() {
    SkipSpace();
    if (Consume('(')) {
      Rational v = Expr();
      if (!Consume(')')) Error();
      return v;
    }
    if (Consume('-')) return -Factor();
    constexpr std::string_view kSymbol = "epsilon_total";
    if (text_.substr(pos_, kSymbol.size()) == kSymbol) {
      pos_ += kSymbol.size();
      return epsilon_total_;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (start == pos_) Error();
    return ParseRational(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  Rational epsilon_total_;
  std::size_t pos_ = 0;
};

std::optional<Rational> ResolveConstantImpl(const Expr& expr, const AnalysisPlan& plan,
                                            std::set<std::string>& visiting) {
  switch (expr.kind) {
    case Expr::Kind::kLiteral:
      return RationalFromDouble(expr.literal);
    case Expr::Kind::kEpsilonTotal:
      return RationalFromDouble(plan.privacy.epsilon_total);
    case Expr::Kind::kNode: {
      const PlanNode* n = plan.Find(expr.node);
      if (n == nullptr || !visiting.insert(expr.node).second) return std::nullopt;
      std::optional<Rational> out;
      if (n->kind() == NodeKind::kConstant) {
        out = RationalFromDouble(n->as<ConstantPayload>().value);
      } else if (n->kind() == NodeKind::kHyperparameter) {
        out = ResolveConstantImpl(n->as<HyperparameterPayload>().value, plan, visiting);
      }
      visiting.erase(expr.node);
      return out;
    }
    case Expr::Kind::kCall:
      break;
  }
  std::vector<Rational> args;
  for (const auto& a : expr.args) {
    auto v = ResolveConstantImpl(a, plan, visiting);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  switch (expr.op) {
    case ExprOp::kAdd: {
      Rational s = 0;
      for (const auto& a : args) s += a;
      return s;
    }
    case ExprOp::kSub:
      return args.size() == 1 ? Rational(-args[0]) : Rational(args[0] - args[1]);
    case ExprOp::kMul: {
      Rational p = 1;
      for (const auto& a : args) p *= a;
      return p;
    }
    case ExprOp::kDiv:
      if (args[1] == 0) return std::nullopt;
      return Rational(args[0] / args[1]);
    case ExprOp::kClamp:
      return std::clamp(args[0], args[1], std::max(args[1], args[2]));
    case ExprOp::kAbs:
      return args[0] < 0 ? Rational(-args[0]) : args[0];
    case ExprOp::kMax:
      return *std::max_element(args.begin(), args.end());
    case ExprOp::kMin:
      return *std::min_element(args.begin(), args.end());
    case ExprOp::kMean: {
      Rational s = 0;
      for (const auto& a : args) s += a;
      return Rational(s / static_cast<long>(args.size()));
    }
    case ExprOp::kSqrt:
    case ExprOp::kStd:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> PayloadReferences(const PlanNode& node) {
  std::set<std::string> refs;
  auto add_param = [&](const Param& p) {
    if (const auto* r = std::get_if<NodeRef>(&p)) refs.insert(r->id);
  };
  switch (node.kind()) {
    case NodeKind::kClip:
      add_param(node.as<ClipPayload>().per_unit_bound);
      break;
    case NodeKind::kNoise: {
      const auto& n = node.as<NoisePayload>();
      if (const auto* r = std::get_if<NodeRef>(&n.epsilon)) refs.insert(r->id);
      if (const auto* r = std::get_if<NodeRef>(&n.sensitivity)) refs.insert(r->id);
      break;
    }
    case NodeKind::kHyperparameter:
      CollectRefs(node.as<HyperparameterPayload>().value, refs);
      break;
    case NodeKind::kPostProcess: {
      const auto& p = node.as<PostProcessPayload>();
      CollectRefs(p.expr, refs);
      if (p.guard) add_param(*p.guard);
      break;
    }
    default:
      break;
  }
  return {refs.begin(), refs.end()};
}

PlanGraph::PlanGraph(const AnalysisPlan& plan) : plan_(&plan) {
  std::map<std::string, std::set<std::string>> deps;
  std::map<std::string, std::set<std::string>> dependents;
  for (const auto& n : plan.nodes) {
    deps[n.id];
    dependents[n.id];
    auto refs = PayloadReferences(n);
    refs_[n.id] = refs;
    for (const auto& r : refs) {
      deps[n.id].insert(r);
      dependents[r].insert(n.id);
    }
  }
  for (const auto& e : plan.edges) {
    deps[e.to].insert(e.from);
    dependents[e.from].insert(e.to);
    edge_inputs_[e.to].push_back(e.from);
  }
  for (auto& [id, s] : deps) deps_[id] = {s.begin(), s.end()};
  for (auto& [id, s] : dependents) dependents_[id] = {s.begin(), s.end()};

  std::map<std::string, std::size_t> indegree;
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, d] : deps_) {
    // Self-loops and edges from unknown ids still count; they block the order.
    indegree[id] = d.size();
    if (d.empty()) ready.push(id);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& child : Lookup(dependents_, id)) {
      if (--indegree[child] == 0) ready.push(child);
    }
  }
  if (order.size() == deps_.size()) order_ = std::move(order);
}

const std::vector<std::string>& PlanGraph::Dependencies(std::string_view id) const {
  return Lookup(deps_, id);
}

const std::vector<std::string>& PlanGraph::Dependents(std::string_view id) const {
  return Lookup(dependents_, id);
}

const std::vector<std::string>& PlanGraph::EdgeInputs(std::string_view id) const {
  return Lookup(edge_inputs_, id);
}

const std::vector<std::string>& PlanGraph::References(std::string_view id) const {
  return Lookup(refs_, id);
}

std::optional<std::string> PlanGraph::DataInput(std::string_view id) const {
  const auto& inputs = EdgeInputs(id);
  if (inputs.size() != 1) return std::nullopt;
  return inputs.front();
}

std::vector<std::string> PlanGraph::FindCycle() const {
  if (order_) return {};
  // Iterative DFS colouring; report the first back-edge cycle found.
  enum class Colour { kWhite, kGrey, kBlack };
  std::map<std::string, Colour, std::less<>> colour;
  for (const auto& [id, _] : deps_) colour[id] = Colour::kWhite;
  std::vector<std::string> stack;
  std::function<bool(const std::string&)> visit = [&](const std::string& id) -> bool {
    colour[id] = Colour::kGrey;
    stack.push_back(id);
    for (const auto& next : Dependents(id)) {
      auto it = colour.find(next);
      if (it == colour.end()) continue;
      if (it->second == Colour::kGrey) {
        auto from = std::find(stack.begin(), stack.end(), next);
        stack.erase(stack.begin(), from);
        return true;
      }
      if (it->second == Colour::kWhite && visit(next)) return true;
    }
    stack.pop_back();
    colour[id] = Colour::kBlack;
    return false;
  };
  for (const auto& [id, _] : deps_) {
    if (colour[id] == Colour::kWhite && visit(id)) {
      std::sort(stack.begin(), stack.end());
      return stack;
    }
  }
  return {};
}

std::vector<std::string> PlanGraph::Ancestors(std::string_view id) const {
  std::set<std::string> seen;
  std::vector<std::string> frontier(Dependencies(id).begin(), Dependencies(id).end());
  while (!frontier.empty()) {
    std::string next = frontier.back();
    frontier.pop_back();
    if (!seen.insert(next).second) continue;
    for (const auto& d : Dependencies(next)) frontier.push_back(d);
  }
  return {seen.begin(), seen.end()};
}

std::vector<const PlanNode*> ClipChain(const AnalysisPlan& plan, std::string_view node_id) {
  std::vector<const PlanNode*> chain;
  std::set<std::string> seen;
  std::string current(node_id);
  for (;;) {
    std::optional<std::string> input;
    for (const auto& e : plan.edges) {
      if (e.to == current) {
        if (input) return {};
        input = e.from;
      }
    }
    if (!input || !seen.insert(*input).second) break;
    const PlanNode* n = plan.Find(*input);
    if (n == nullptr || n->kind() != NodeKind::kClip) break;
    chain.push_back(n);
    current = *input;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::optional<Rational> ResolveConstant(const Expr& expr, const AnalysisPlan& plan) {
  std::set<std::string> visiting;
  return ResolveConstantImpl(expr, plan, visiting);
}

std::optional<Rational> ResolveParam(const Param& param, const AnalysisPlan& plan) {
  if (const auto* d = std::get_if<double>(&param)) return RationalFromDouble(*d);
  return ResolveConstant(Expr::Node(std::get<NodeRef>(param).id), plan);
}

Rational EvaluateEpsilonText(std::string_view text, const Rational& epsilon_total) {
  return EpsilonTextParser(text, epsilon_total).Parse();
}

std::optional<Rational> ResolveEpsilon(const NoisePayload& noise, const AnalysisPlan& plan) {
  if (const auto* d = std::get_if<double>(&noise.epsilon)) return RationalFromDouble(*d);
  if (const auto* s = std::get_if<SymbolicEpsilon>(&noise.epsilon)) {
    try {
      return EvaluateEpsilonText(s->text, RationalFromDouble(plan.privacy.epsilon_total));
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  return ResolveParam(std::get<NodeRef>(noise.epsilon), plan);
}

std::optional<Rational> DeclaredSensitivity(const NoisePayload& noise, const AnalysisPlan& plan) {
  if (const auto* d = std::get_if<double>(&noise.sensitivity)) return RationalFromDouble(*d);
  if (const auto* r = std::get_if<NodeRef>(&noise.sensitivity)) return ResolveParam(*r, plan);
  return std::nullopt;
}

}  // namespace dpaudit
