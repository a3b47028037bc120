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

#include "dpaudit/cli.h"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string_view>

#include "CLI11.hpp"
#include "dpaudit/dataset.h"
#include "dpaudit/executor.h"
#include "dpaudit/explain.h"
#include "dpaudit/plan.h"
#include "dpaudit/plan_graph.h"
#include "dpaudit/rational.h"
#include "dpaudit/sensitivity.h"
#include "dpaudit/verifier.h"
#include "json.hpp"

namespace dpaudit {
namespace {

using ordered_json = nlohmann::ordered_json;

struct Options {
  std::string format = "text";
  std::string plan_path;
  std::string data_path;
  std::string node_id;
  std::string code;
  std::string trace_path;
  std::uint64_t seed = 0;
  bool no_noise = false;
  bool allow_invalid = false;
  bool strict_warnings = false;
  double threshold = kDefaultNoiseThreshold;
  std::size_t max_units = OracleOptions{}.max_units;
};

bool ColorEnabled() {
  const char* v = std::getenv("DPAUDIT_COLOR");
  if (v == nullptr) return false;
  std::string_view s(v);
  return s == "1" || s == "true" || s == "always" || s == "yes" || s == "on";
}

bool Json(const Options& o) { return o.format == "json"; }

// Parses and validates; on failure prints diagnostics and returns nullopt.
std::optional<AnalysisPlan> LoadValidPlan(const Options& o, std::ostream& out,
                                          std::ostream& err) {
  AnalysisPlan plan;
  try {
    plan = LoadPlanFile(o.plan_path);
  } catch (const PlanParseError& e) {
    std::string where = o.plan_path;
    if (e.line()) {
      where += ":" + std::to_string(*e.line()) + ":" + std::to_string(e.column().value_or(0));
    }
    err << where << ": parse error: " << e.what() << "\n";
    if (Json(o)) {
      ordered_json j = {{"verdict", "invalid"},
                        {"parse_error", {{"message", e.what()},
                                         {"identifier", e.identifier()},
                                         {"line", e.line() ? ordered_json(*e.line()) : ordered_json()},
                                         {"column", e.column() ? ordered_json(*e.column()) : ordered_json()}}}};
      out << j.dump(2) << "\n";
    }
    return std::nullopt;
  }
  auto errors = ValidatePlan(plan);
  if (!errors.empty()) {
    err << o.plan_path << ": plan is structurally invalid\n" << StructuralErrorsToText(errors);
    if (Json(o)) out << StructuralErrorsToJson(errors);
    return std::nullopt;
  }
  return plan;
}

void PrintReport(const Report& report, const Options& o, std::ostream& out) {
  out << (Json(o) ? ReportToJson(report) : ReportToText(report, ColorEnabled()));
}

int VerdictExit(const Report& report, bool strict) {
  switch (report.verdict) {
    case Verdict::kPass:
      return kExitOk;
    case Verdict::kPassWithWarnings:
      return strict ? kExitViolation : kExitOk;
    case Verdict::kFail:
      return kExitViolation;
  }
  return kExitViolation;
}

int Check(const Options& o, std::ostream& out, std::ostream& err) {
  auto plan = LoadValidPlan(o, out, err);
  if (!plan) return kExitToolError;
  Report report;
  try {
    report = Verify(*plan, {o.threshold});
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitToolError;
  }
  PrintReport(report, o, out);
  return VerdictExit(report, o.strict_warnings);
}

std::optional<Dataset> LoadData(const Options& o, const AnalysisPlan& plan, std::ostream& err) {
  try {
    return LoadDataset(o.data_path, plan.schema, plan.privacy.unit_column);
  } catch (const DatasetError& e) {
    err << o.data_path << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

int Run(const Options& o, std::ostream& out, std::ostream& err) {
  auto plan = LoadValidPlan(o, out, err);
  if (!plan) return kExitToolError;
  auto data = LoadData(o, *plan, err);
  if (!data) return kExitToolError;
  if (!o.allow_invalid) {
    Report report = Verify(*plan, {o.threshold});
    int code = VerdictExit(report, o.strict_warnings);
    if (code != kExitOk) {
      err << "refusing to run '" << plan->name
          << "': verification failed (use --allow-invalid to override)\n";
      PrintReport(report, o, out);
      return code;
    }
  }
  ExecuteOptions exec;
  exec.seed = o.seed;
  exec.noise_enabled = !o.no_noise;
  exec.allow_invalid = true;  // gated above
  exec.noise_threshold = o.threshold;
  ExecutionResult result;
  try {
    result = Execute(*plan, *data, exec);
  } catch (const ExecutionError& e) {
    err << "runtime error in node '" << e.node_id() << "': " << e.what() << "\n";
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  if (!o.trace_path.empty()) {
    std::ofstream trace(o.trace_path, std::ios::binary);
    if (!trace) {
      err << "cannot write trace file '" << o.trace_path << "'\n";
      return kExitToolError;
    }
    trace << TraceToJson(result);
  }
  if (Json(o)) {
    out << ResultToJson(result);
  } else {
    out << "seed " << result.seed << (result.noise_enabled ? "" : " (noise disabled)") << "\n";
    for (const auto& [id, v] : result.released) {
      if (v.scalar()) {
        out << id << " = " << FormatDouble(v.values[0]) << "\n";
        continue;
      }
      out << id << ":\n";
      for (std::size_t i = 0; i < v.cells.size(); ++i) {
        out << "  " << v.cells[i] << " = " << FormatDouble(v.values[i]) << "\n";
      }
    }
  }
  return kExitOk;
}

int Oracle(const Options& o, std::ostream& out, std::ostream& err) {
  auto plan = LoadValidPlan(o, out, err);
  if (!plan) return kExitToolError;
  const PlanNode* node = plan->Find(o.node_id);
  if (node == nullptr) {
    err << "error: no node '" << o.node_id << "'\n";
    return kExitToolError;
  }
  PlanGraph graph(*plan);
  std::string agg_id = node->id;
  if (node->kind() == NodeKind::kNoise) agg_id = graph.DataInput(node->id).value_or("");
  const PlanNode* agg = plan->Find(agg_id);
  if (agg == nullptr || agg->kind() != NodeKind::kAggregate) {
    err << "error: '" << o.node_id << "' is neither an aggregate nor noise on an aggregate\n";
    return kExitToolError;
  }
  auto data = LoadData(o, *plan, err);
  if (!data) return kExitToolError;

  OracleOptions opts;
  opts.max_units = o.max_units;
  opts.clip_seed = o.seed;
  double empirical;
  SensitivityBound derived;
  try {
    derived = DeriveSensitivity(*plan, agg_id);
    empirical = EmpiricalSensitivity(*plan, agg_id, *data, opts);
  } catch (const OracleCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitToolError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitToolError;
  }
  bool sound = derived.unbounded() || empirical <= *derived.value;
  std::vector<std::pair<std::string, double>> declared;
  for (const auto& user : graph.Dependents(agg_id)) {
    const PlanNode& n = plan->Get(user);
    if (n.kind() != NodeKind::kNoise) continue;
    if (auto d = DeclaredSensitivity(n.as<NoisePayload>(), *plan)) {
      declared.push_back({n.id, ToDouble(*d)});
      sound = sound && empirical <= ToDouble(*d);
    }
  }
  if (Json(o)) {
    ordered_json j;
    j["node"] = agg_id;
    j["empirical"] = empirical;
    j["derived"] = derived.value ? ordered_json(*derived.value) : ordered_json("unbounded");
    j["derivation"] = derived.trace;
    j["declared"] = ordered_json::object();
    for (const auto& [id, v] : declared) j["declared"][id] = v;
    j["verdict"] = sound ? "SOUND" : "UNSOUND";
    out << j.dump(2) << "\n";
  } else {
    out << "node: " << agg_id << "\n";
    out << "empirical max change: " << FormatDouble(empirical) << "\n";
    out << "derived bound: " << derived.ToString() << "\n";
    for (const auto& step : derived.trace) out << "  " << step << "\n";
    for (const auto& [id, v] : declared) {
      out << "declared by " << id << ": " << FormatDouble(v) << "\n";
    }
    out << (sound ? "SOUND" : "UNSOUND") << "\n";
  }
  return sound ? kExitOk : kExitViolation;
}

int Explain(const Options& o, std::ostream& out, std::ostream& err) {
  auto code = ParseFindingCode(o.code);
  if (!code) {
    err << "error: unknown finding code '" << o.code << "' (expected M1..M5)\n";
    return kExitToolError;
  }
  out << ExplainText(*code);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Verify and run differentially private analysis plans.\n"
               "Exit codes: 0 pass, 1 violations, 2 tool/parse error, 3 runtime error.\n"
               "Set DPAUDIT_COLOR=1 for colored text reports.",
               "dpaudit"};
  app.require_subcommand(1);
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
  };
  auto add_threshold = [&](CLI::App* sub) {
    sub->add_option("--threshold", o.threshold,
                    "Minimum signal-to-sensitivity ratio before a noise node is flagged")
        ->capture_default_str();
  };

  CLI::App* check = app.add_subcommand("check", "Verify a plan and print the report");
  check->add_option("plan", o.plan_path, "Plan file (JSON)")->required();
  add_format(check);
  add_threshold(check);
  check->add_flag("--strict-warnings", o.strict_warnings, "Exit 1 on warnings too");

  CLI::App* run = app.add_subcommand("run", "Execute a verified plan on a CSV dataset");
  run->add_option("plan", o.plan_path, "Plan file (JSON)")->required();
  run->add_option("data", o.data_path, "Dataset (CSV with header)")->required();
  run->add_option("--seed", o.seed, "Seed for clipping and noise")->capture_default_str();
  run->add_flag("--no-noise", o.no_noise, "Skip noise sampling (exact statistics)");
  run->add_flag("--allow-invalid", o.allow_invalid, "Run even if verification fails");
  run->add_flag("--strict-warnings", o.strict_warnings, "Refuse plans with warnings too");
  run->add_option("--trace", o.trace_path, "Write the per-node trace (JSON) to this file");
  add_format(run);
  add_threshold(run);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Compare derived and brute-force sensitivity of an aggregate");
  oracle->add_option("plan", o.plan_path, "Plan file (JSON)")->required();
  oracle->add_option("data", o.data_path, "Dataset (CSV with header)")->required();
  oracle->add_option("node", o.node_id, "Aggregate node, or a noise node on one")->required();
  oracle->add_option("--max-units", o.max_units, "Largest number of units to enumerate")
      ->capture_default_str();
  oracle->add_option("--seed", o.seed, "Seed for clipping")->capture_default_str();
  add_format(oracle);

  CLI::App* explain = app.add_subcommand("explain", "Describe a finding class (M1..M5)");
  explain->add_option("code", o.code, "Finding code")->required();

  std::vector<std::string> storage{"dpaudit"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitToolError;
  }

  if (check->parsed()) return Check(o, out, err);
  if (run->parsed()) return Run(o, out, err);
  if (oracle->parsed()) return Oracle(o, out, err);
  return Explain(o, out, err);
}

}  // namespace dpaudit
