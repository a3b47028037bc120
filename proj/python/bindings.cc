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


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpaudit/budget.h"
#include "dpaudit/dataset.h"
#include "dpaudit/executor.h"
#include "dpaudit/explain.h"
#include "dpaudit/plan.h"
#include "dpaudit/rational.h"
#include "dpaudit/rng.h"
#include "dpaudit/sensitivity.h"
#include "dpaudit/verifier.h"

namespace py = pybind11;

namespace dpaudit {
namespace {

AnalysisPlan Parse(const std::string& text) { return ParsePlan(text); }

std::string CheckJson(const std::string& plan_text, double threshold) {
  return ReportToJson(Verify(Parse(plan_text), VerifyOptions{threshold}));
}

std::string RunJson(const std::string& plan_text, const std::string& csv_text, std::uint64_t seed,
                    bool noise, bool allow_invalid) {
  AnalysisPlan plan = Parse(plan_text);
  Dataset ds = ParseCsvDataset(csv_text, plan.schema, plan.privacy.unit_column);
  ExecuteOptions o;
  o.seed = seed;
  o.noise_enabled = noise;
  o.allow_invalid = allow_invalid;
  return ResultToJson(Execute(plan, ds, o));
}

double Oracle(const std::string& plan_text, const std::string& csv_text, const std::string& node) {
  AnalysisPlan plan = Parse(plan_text);
  Dataset ds = ParseCsvDataset(csv_text, plan.schema, plan.privacy.unit_column);
  return EmpiricalSensitivity(plan, node, ds);
}

std::optional<double> Derive(const std::string& plan_text, const std::string& node) {
  return DeriveSensitivity(Parse(plan_text), node).value;
}

std::string Explain(const std::string& code) {
  auto c = ParseFindingCode(code);
  if (!c) throw py::value_error("unknown finding code: " + code);
  return ExplainText(*c);
}

}  // namespace
}  // namespace dpaudit

PYBIND11_MODULE(_core, m) {
  using namespace dpaudit;
  m.doc() = "dpaudit native core";

  static py::exception<PlanParseError> plan_error(m, "PlanError", PyExc_ValueError);
  static py::exception<ExecutionRefused> refused(m, "ExecutionRefused", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PlanParseError& e) {
      plan_error(e.what());
    } catch (const PlanInvalid& e) {
      plan_error((std::string(e.what()) + "\n" + StructuralErrorsToJson(e.errors())).c_str());
    } catch (const DatasetError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ExecutionRefused& e) {
      refused(ReportToJson(e.report()).c_str());
    } catch (const OracleCapExceeded& e) {
      PyErr_SetString(PyExc_OverflowError, e.what());
    }
  });

  m.def("check", &CheckJson, py::arg("plan"), py::arg("threshold") = kDefaultNoiseThreshold,
        "Verifies plan JSON text; returns the report as JSON text.");
  m.def("run", &RunJson, py::arg("plan"), py::arg("csv"), py::arg("seed") = 0, py::arg("noise") = true,
        py::arg("allow_invalid") = false, "Executes a plan over CSV text; returns JSON text.");
  m.def("derive_sensitivity", &Derive, py::arg("plan"), py::arg("node"),
        "Static sensitivity of an aggregate, or None when unbounded.");
  m.def("empirical_sensitivity", &Oracle, py::arg("plan"), py::arg("csv"), py::arg("node"));
  m.def("explain", &Explain, py::arg("code"));
  m.def("canonical", [](const std::string& text) { return SerializePlan(ParsePlan(text)); },
        py::arg("plan"));
  m.def("laplace", [](double scale, std::uint64_t seed, const std::string& key, std::size_t n) {
    auto rng = MakeStream(seed, key);
    std::vector<double> out(n);
    for (auto& x : out) x = SampleLaplace(scale, rng);
    return out;
  }, py::arg("scale"), py::arg("seed"), py::arg("key"), py::arg("n"));
}
