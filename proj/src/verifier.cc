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

#include "dpaudit/verifier.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "dpaudit/plan_graph.h"
#include "dpaudit/rational.h"
#include "dpaudit/rng.h"
#include "dpaudit/sensitivity.h"
#include "json.hpp"

namespace dpaudit {
namespace {

using ordered_json = nlohmann::ordered_json;

struct CodeInfo {
  FindingCode code;
  std::string_view name;
};

constexpr CodeInfo kCodes[] = {
    {FindingCode::kMisusedSensitivity, "M1_MISUSED_SENSITIVITY"},
    {FindingCode::kDataDependentHyperparam, "M2_DATA_DEPENDENT_HYPERPARAM"},
    {FindingCode::kPartiallyPrivatized, "M3_PARTIALLY_PRIVATIZED"},
    {FindingCode::kOverlyNoisy, "M4_OVERLY_NOISY"},
    {FindingCode::kBudgetExceeded, "M5_BUDGET_EXCEEDED"},
};

Finding MakeFinding(FindingCode code, std::vector<std::string> ids, std::string message,
                    std::string suggestion) {
  return {code, SeverityOf(code), std::move(ids), std::move(message), std::move(suggestion)};
}

std::vector<const PlanNode*> NodesOfKind(const AnalysisPlan& plan, NodeKind kind) {
  std::vector<const PlanNode*> out;
  for (const auto& n : plan.nodes) {
    if (n.kind() == kind) out.push_back(&n);
  }
  std::sort(out.begin(), out.end(),
            [](const PlanNode* a, const PlanNode* b) { return a->id < b->id; });
  return out;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

// Path source -> ... -> `id` through sensitive nodes only.
std::vector<std::string> UnprotectedPath(const PlanGraph& graph,
                                         const std::set<std::string>& sensitive,
                                         const std::string& id) {
  std::map<std::string, std::string> parent;
  std::vector<std::string> frontier{id};
  std::set<std::string> seen{id};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& cur : frontier) {
      if (graph.plan().Get(cur).kind() == NodeKind::kSource) {
        std::vector<std::string> path{cur};
        for (auto it = parent.find(cur); it != parent.end(); it = parent.find(it->second)) {
          path.push_back(it->second);
        }
        return path;
      }
      for (const auto& d : graph.Dependencies(cur)) {
        if (sensitive.count(d) && seen.insert(d).second) {
          parent[d] = cur;
          next.push_back(d);
        }
      }
    }
    frontier = std::move(next);
  }
  return {id};
}

std::string Colorize(const std::string& text, const char* code, bool color) {
  if (!color) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

void RenderTree(const CompositionNode& node, int depth, std::ostringstream& os) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  os << pad;
  if (node.label) os << node.label.value() << ": ";
  switch (node.kind) {
    case CompositionNode::Kind::kLeaf:
      os << node.node_id;
      if (node.cell) os << "[" << *node.cell << "]";
      os << "  eps=" << ToString(node.epsilon) << "\n";
      return;
    case CompositionNode::Kind::kSequential:
      os << "sequential";
      break;
    case CompositionNode::Kind::kParallel:
      os << "parallel";
      break;
  }
  if (!node.attribute.empty()) os << " by " << node.attribute;
  os << " (cost=" << ToString(node.Cost()) << ")\n";
  for (const auto& c : node.children) RenderTree(c, depth + 1, os);
}

ordered_json TreeJson(const CompositionNode& node) {
  ordered_json j;
  switch (node.kind) {
    case CompositionNode::Kind::kLeaf:
      j["type"] = "leaf";
      j["node"] = node.node_id;
      j["cell"] = node.cell ? ordered_json(*node.cell) : ordered_json(nullptr);
      j["epsilon"] = ToString(node.epsilon);
      break;
    case CompositionNode::Kind::kSequential:
    case CompositionNode::Kind::kParallel:
      j["type"] = node.kind == CompositionNode::Kind::kParallel ? "parallel" : "sequential";
      j["attribute"] = node.attribute.empty() ? ordered_json(nullptr) : ordered_json(node.attribute);
      j["cost"] = ToString(node.Cost());
      j["children"] = ordered_json::array();
      for (const auto& c : node.children) j["children"].push_back(TreeJson(c));
      break;
  }
  if (node.label) j["label"] = *node.label;
  return j;
}

std::string HashHex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string_view CodeName(FindingCode code) {
  for (const auto& c : kCodes) {
    if (c.code == code) return c.name;
  }
  return "?";
}

std::string ShortCode(FindingCode code) { return "M" + std::to_string(static_cast<int>(code)); }

std::optional<FindingCode> ParseFindingCode(std::string_view text) {
  std::string upper(text);
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (const auto& c : kCodes) {
    if (upper == c.name || upper == ShortCode(c.code)) return c.code;
  }
  return std::nullopt;
}

Severity SeverityOf(FindingCode code) {
  return code == FindingCode::kOverlyNoisy ? Severity::kWarning : Severity::kViolation;
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kPassWithWarnings:
      return "pass_with_warnings";
  }
  return "?";
}

std::set<FindingCode> Report::Codes() const {
  std::set<FindingCode> out;
  for (const auto& f : findings) out.insert(f.code);
  return out;
}

PlanInvalid::PlanInvalid(std::vector<StructuralError> errors)
    : std::runtime_error("plan is structurally invalid: " +
                         (errors.empty() ? std::string("no details") : errors.front().message)),
      errors_(std::move(errors)) {}

std::set<std::string> SensitiveNodes(const AnalysisPlan& plan) {
  PlanGraph graph(plan);
  std::set<std::string> sensitive;
  const auto& order = graph.TopologicalOrder();
  if (!order) return sensitive;
  for (const auto& id : *order) {
    const PlanNode& n = plan.Get(id);
    if (n.kind() == NodeKind::kNoise) continue;
    if (n.kind() == NodeKind::kSource) {
      sensitive.insert(id);
      continue;
    }
    for (const auto& d : graph.Dependencies(id)) {
      if (sensitive.count(d)) {
        sensitive.insert(id);
        break;
      }
    }
  }
  return sensitive;
}

std::vector<Finding> CheckMisusedSensitivity(const AnalysisPlan& plan) {
  std::vector<Finding> out;
  for (const PlanNode* n : NodesOfKind(plan, NodeKind::kNoise)) {
    const auto& noise = n->as<NoisePayload>();
    SensitivityBound derived = DeriveInputSensitivity(plan, n->id);
    std::string input = PlanGraph(plan).DataInput(n->id).value_or("");
    if (derived.unbounded()) {
      out.push_back(MakeFinding(
          FindingCode::kMisusedSensitivity, {n->id, input},
          "noise node '" + n->id + "' perturbs '" + input +
              "', whose sensitivity is unbounded because nothing limits one unit's contribution",
          "clip each unit's contributions before aggregating (or declare a partition constraint) "
          "and set the sensitivity to the resulting bound"));
      continue;
    }
    if (std::holds_alternative<AutoSensitivity>(noise.sensitivity)) continue;
    auto declared = DeclaredSensitivity(noise, plan);
    if (!declared) continue;  // data-dependent; reported by the hyperparameter check
    Rational needed = RationalFromDouble(*derived.value);
    if (*declared < needed) {
      out.push_back(MakeFinding(
          FindingCode::kMisusedSensitivity, {n->id, input},
          "noise node '" + n->id + "' declares sensitivity " + ToString(*declared) +
              " but '" + input + "' can change by up to " + derived.ToString() +
              " when one unit is added or removed",
          "set the sensitivity to at least " + derived.ToString() +
              " (the clip bound times the largest absolute value) or use \"auto\""));
    }
  }
  return out;
}

std::vector<Finding> CheckDataDependentHyperparams(const AnalysisPlan& plan) {
  auto sensitive = SensitiveNodes(plan);
  PlanGraph graph(plan);
  std::vector<Finding> out;
  for (const PlanNode* n : NodesOfKind(plan, NodeKind::kHyperparameter)) {
    if (!sensitive.count(n->id)) continue;
    std::vector<std::string> ids{n->id};
    for (const auto& d : graph.Dependencies(n->id)) {
      if (sensitive.count(d)) ids.push_back(d);
    }
    std::vector<std::string> users;
    for (const auto& d : graph.Dependents(n->id)) users.push_back(d);
    std::string used = users.empty() ? "" : " and is used by " + Join(users, ", ");
    out.push_back(MakeFinding(
        FindingCode::kDataDependentHyperparam, ids,
        "hyperparameter '" + n->id + "' is computed from raw data (" +
            Join({ids.begin() + 1, ids.end()}, ", ") + ") without noise" + used,
        "replace it with a data-independent constant, or derive it only from already-noised "
        "releases"));
  }
  return out;
}

std::vector<Finding> CheckPartialPrivatization(const AnalysisPlan& plan) {
  auto sensitive = SensitiveNodes(plan);
  PlanGraph graph(plan);
  std::vector<Finding> out;
  for (const PlanNode* n : NodesOfKind(plan, NodeKind::kRelease)) {
    if (!sensitive.count(n->id)) continue;
    auto path = UnprotectedPath(graph, sensitive, n->id);
    std::vector<std::string> ids{n->id};
    for (const auto& p : path) {
      if (p != n->id) ids.push_back(p);
    }
    out.push_back(MakeFinding(
        FindingCode::kPartiallyPrivatized, ids,
        "release '" + n->id + "' depends on raw data through an unnoised path: " +
            Join(path, " -> "),
        "add noise to every data-dependent input of the release (split epsilon between the "
        "queries) before combining them"));
  }
  return out;
}

std::vector<Finding> CheckNoisePlacement(const AnalysisPlan& plan, double threshold) {
  std::vector<Finding> out;
  PlanGraph graph(plan);
  for (const PlanNode* n : NodesOfKind(plan, NodeKind::kNoise)) {
    const auto& noise = n->as<NoisePayload>();
    std::optional<Rational> signal;
    std::string source_of_signal = "annotated signal estimate";
    if (noise.signal_estimate) {
      signal = RationalFromDouble(*noise.signal_estimate);
    } else if (auto in = graph.DataInput(n->id);
               in && plan.Get(*in).kind() == NodeKind::kPostProcess) {
      Interval r = StaticRange(plan, *in);
      if (r.bounded()) {
        signal = RationalFromDouble(r.width());
        source_of_signal = "range width of '" + *in + "'";
      }
    }
    if (!signal) continue;
    std::optional<Rational> delta = DeclaredSensitivity(noise, plan);
    if (!delta) {
      SensitivityBound derived = DeriveInputSensitivity(plan, n->id);
      if (derived.unbounded()) continue;
      delta = RationalFromDouble(*derived.value);
    }
    if (*delta <= 0) continue;
    Rational ratio = *signal / *delta;
    if (ratio < RationalFromDouble(threshold)) {
      out.push_back(MakeFinding(
          FindingCode::kOverlyNoisy, {n->id},
          "noise node '" + n->id + "' has signal-to-sensitivity ratio " +
              FormatDouble(ToDouble(ratio)) + " (" + source_of_signal + " " +
              FormatDouble(ToDouble(*signal)) + " over sensitivity " +
              FormatDouble(ToDouble(*delta)) + "), below " + FormatDouble(threshold),
          "noise the underlying counts or sums, which have a larger signal, and compute the "
          "ratio from the noisy parts"));
    }
  }
  return out;
}

std::vector<Finding> CheckBudget(const AnalysisPlan& plan) {
  BudgetLedger ledger = Compose(plan);
  if (!ledger.exceeded()) return {};
  std::vector<std::string> ids;
  for (const auto& e : ledger.entries) ids.push_back(e.node_id);
  std::ostringstream tree;
  RenderTree(ledger.composition, 0, tree);
  std::string text = tree.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return {MakeFinding(
      FindingCode::kBudgetExceeded, ids,
      "worst-case privacy loss per unit is " + ToString(ledger.worst_case_total) +
          " (about " + FormatDouble(ToDouble(ledger.worst_case_total)) +
          "), above the total budget " + ToString(ledger.budget_limit) + "; composition:\n" + text,
      "split epsilon_total across the releases so that the sequential sum stays within the "
      "budget, or declare a partition constraint that licenses parallel composition")};
}

Report Verify(const AnalysisPlan& plan, const VerifyOptions& options) {
  auto errors = ValidatePlan(plan);
  if (!errors.empty()) throw PlanInvalid(std::move(errors));
  Report report;
  report.plan_name = plan.name;
  report.plan_hash = HashHex(Fnv1a64(SerializePlan(plan)));
  report.ledger = Compose(plan);
  for (auto part : {CheckMisusedSensitivity(plan), CheckDataDependentHyperparams(plan),
                    CheckPartialPrivatization(plan),
                    CheckNoisePlacement(plan, options.noise_threshold), CheckBudget(plan)}) {
    for (auto& f : part) report.findings.push_back(std::move(f));
  }
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& a, const Finding& b) {
                     return std::tie(a.code, a.node_ids) < std::tie(b.code, b.node_ids);
                   });
  bool violation = false;
  for (const auto& f : report.findings) violation |= f.severity == Severity::kViolation;
  report.verdict = violation                   ? Verdict::kFail
                   : report.findings.empty()   ? Verdict::kPass
                                               : Verdict::kPassWithWarnings;
  return report;
}

std::string ReportToJson(const Report& report, int indent) {
  ordered_json j;
  j["plan"] = report.plan_name;
  j["plan_hash"] = report.plan_hash;
  j["verdict"] = VerdictName(report.verdict);
  j["findings"] = ordered_json::array();
  for (const auto& f : report.findings) {
    ordered_json fj;
    fj["code"] = CodeName(f.code);
    fj["severity"] = f.severity == Severity::kWarning ? "warning" : "violation";
    fj["nodes"] = f.node_ids;
    fj["message"] = f.message;
    fj["suggestion"] = f.suggestion;
    j["findings"].push_back(std::move(fj));
  }
  ordered_json ledger;
  ledger["entries"] = ordered_json::array();
  for (const auto& e : report.ledger.entries) {
    ordered_json ej;
    ej["node"] = e.node_id;
    ej["epsilon"] = ToString(e.epsilon);
    ej["releases"] = e.releases;
    ledger["entries"].push_back(std::move(ej));
  }
  ledger["worst_case_total"] = ToString(report.ledger.worst_case_total);
  ledger["worst_case_total_approx"] = ToDouble(report.ledger.worst_case_total);
  ledger["budget_limit"] = ToString(report.ledger.budget_limit);
  ledger["exceeded"] = report.ledger.exceeded();
  ledger["composition"] = TreeJson(report.ledger.composition);
  j["ledger"] = std::move(ledger);
  return j.dump(indent) + "\n";
}

std::string ReportToText(const Report& report, bool color) {
  std::ostringstream os;
  os << "plan " << report.plan_name << " (" << report.plan_hash << ")\n";
  for (const auto& f : report.findings) {
    bool warn = f.severity == Severity::kWarning;
    os << Colorize(warn ? "warning" : "violation", warn ? "33" : "31", color) << " "
       << CodeName(f.code) << " [" << Join(f.node_ids, ", ") << "]\n";
    std::istringstream msg(f.message);
    for (std::string line; std::getline(msg, line);) os << "    " << line << "\n";
    os << "    fix: " << f.suggestion << "\n";
  }
  os << "budget: " << ToString(report.ledger.worst_case_total) << " of "
     << ToString(report.ledger.budget_limit) << " across " << report.ledger.entries.size()
     << " noise node(s)\n";
  std::ostringstream tree;
  RenderTree(report.ledger.composition, 1, tree);
  os << tree.str();
  const char* verdict_color = report.verdict == Verdict::kPass   ? "32"
                              : report.verdict == Verdict::kFail ? "31"
                                                                 : "33";
  os << "verdict: " << Colorize(std::string(VerdictName(report.verdict)), verdict_color, color)
     << "\n";
  return os.str();
}

std::string StructuralErrorsToText(const std::vector<StructuralError>& errors) {
  std::ostringstream os;
  for (const auto& e : errors) {
    os << "error " << e.code;
    if (!e.node_ids.empty()) os << " [" << Join(e.node_ids, ", ") << "]";
    os << ": " << e.message << "\n";
  }
  return os.str();
}

std::string StructuralErrorsToJson(const std::vector<StructuralError>& errors, int indent) {
  ordered_json j;
  j["verdict"] = "invalid";
  j["errors"] = ordered_json::array();
  for (const auto& e : errors) {
    ordered_json ej;
    ej["code"] = e.code;
    ej["nodes"] = e.node_ids;
    ej["message"] = e.message;
    j["errors"].push_back(std::move(ej));
  }
  return j.dump(indent) + "\n";
}

}  // namespace dpaudit
