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

#include "dpaudit/explain.h"

namespace dpaudit {
namespace {

constexpr const char* kM1 = R"(M1_MISUSED_SENSITIVITY (violation)

The noise scale of a Laplace node is sensitivity / epsilon. The sensitivity
has to cover the largest change one privacy unit can cause in the noised
value. It is flagged when nothing limits a unit's rows (no clip and no
partition constraint) or when the declared constant is below the bound
derived from the clip.

Wrong: a visitor may appear any number of times, yet sensitivity is 1.
  {"id": "visits", "kind": "aggregate", "op": "count", "where": [], "group_by": null, "column": null}
  {"id": "noisy_visits", "kind": "noise", "mechanism": "laplace", "epsilon": 1.0, "sensitivity": 1}
  edges: ["source", "visits"], ["visits", "noisy_visits"]

Fixed: keep at most 5 visits per visitor and noise with sensitivity 5.
  {"id": "clip_visits", "kind": "clip", "per_unit_bound": 5, "scope": null}
  {"id": "visits", "kind": "aggregate", "op": "count", "where": [], "group_by": null, "column": null}
  {"id": "noisy_visits", "kind": "noise", "mechanism": "laplace", "epsilon": 1.0, "sensitivity": 5}
  edges: ["source", "clip_visits"], ["clip_visits", "visits"], ["visits", "noisy_visits"]

Remedy: bound contributions first (clip per unit, value_bounds for sums),
then declare a sensitivity at least as large as the derived one, or "auto".
)";

constexpr const char* kM2 = R"(M2_DATA_DEPENDENT_HYPERPARAM (violation)

Hyperparameters (sensitivity, epsilon, clip bounds, guards) are published
implicitly through the noise they configure. A hyperparameter whose value is
computed from raw data, with no noise node in between, leaks that data.

Wrong: the clip bound is the largest number of visits any visitor made.
  {"id": "most_visits", "kind": "aggregate", "op": "max_per_unit", "where": [], "group_by": null, "column": null}
  {"id": "bound", "kind": "hyperparameter", "value": "most_visits"}
  {"id": "clip_visits", "kind": "clip", "per_unit_bound": {"ref": "bound"}, "scope": null}

Fixed: choose the bound from domain knowledge, independent of the data.
  {"id": "bound", "kind": "hyperparameter", "value": 5}
  {"id": "clip_visits", "kind": "clip", "per_unit_bound": {"ref": "bound"}, "scope": null}

Remedy: use a fixed constant, or derive the value only from outputs that
already passed through a noise node (post-processing is free).
)";

constexpr const char* kM3 = R"(M3_PARTIALLY_PRIVATIZED (violation)

Every value that reaches a release must pass through a noise node on every
path from the source. Noising one operand of a ratio and dividing by the
exact other operand still publishes the exact operand's information.

Wrong: a noisy count of long visits divided by the exact total.
  {"id": "noisy_long", "kind": "noise", "mechanism": "laplace", "epsilon": 1.0, "sensitivity": 5}
  {"id": "ratio", "kind": "post_process", "expr": ["div", "noisy_long", "total"], "guard": 1e-06}
  edges: ["long", "noisy_long"], ["noisy_long", "ratio"], ["total", "ratio"], ["ratio", "out"]

Fixed: split epsilon between the two queries and noise both.
  {"id": "noisy_long", "kind": "noise", "mechanism": "laplace", "epsilon": "epsilon_total / 2", "sensitivity": 5}
  {"id": "noisy_total", "kind": "noise", "mechanism": "laplace", "epsilon": "epsilon_total / 2", "sensitivity": 5}
  {"id": "ratio", "kind": "post_process", "expr": ["div", "noisy_long", "noisy_total"], "guard": 1e-06}

Remedy: noise each data-dependent input separately, give each a share of
the budget, and combine only the noisy values.
)";

constexpr const char* kM4 = R"(M4_OVERLY_NOISY (warning)

Not a privacy failure: the result is still private, but the noise may swamp
the signal. The check divides the expected magnitude of the noised value
(its signal_estimate, or the width of its static range) by the sensitivity
and warns when the ratio is below the threshold (default 1, strict).

Wrong: noise a rate that lives in [0, 1] and is expected near 0.3, with
sensitivity 1.
  {"id": "noisy_rate", "kind": "noise", "mechanism": "laplace", "epsilon": 1.0,
   "sensitivity": 1, "signal_estimate": 0.3}

Fixed: noise the numerator and denominator counts, whose magnitudes are
large compared to their sensitivity, and divide afterwards.
  {"id": "noisy_long", "kind": "noise", "epsilon": "epsilon_total / 2", "sensitivity": 5, "signal_estimate": 40}
  {"id": "noisy_total", "kind": "noise", "epsilon": "epsilon_total / 2", "sensitivity": 5, "signal_estimate": 100}
  {"id": "rate", "kind": "post_process", "expr": ["clamp", ["div", "noisy_long", "noisy_total"], 0, 1]}

Remedy: noise quantities with a large signal-to-sensitivity ratio; adjust
--threshold if your application tolerates more noise.
)";

constexpr const char* kM5 = R"(M5_BUDGET_EXCEEDED (violation)

Each release spends its epsilon. Releases that can involve the same unit
add up (sequential composition); releases over groups of units that are
provably disjoint cost only the largest share (parallel composition).
Disjoint attribute values alone do not make the units disjoint: a declared
partition constraint is required.

Example: visits are counted per day for 5 days, split into long and short
visits, each count with epsilon e. A visitor comes at most once per day
(constraint {"attribute": "Day", "guarantee": "single_row"}). Within one day
the long and short counts touch different visitors, so that day costs
max(e, e) = e. The same visitor can come on every day, so the 5 days add up:
  sequential by Day (cost=5e)
    1: parallel by Visit Length (cost=e)
    ...
    5: parallel by Visit Length (cost=e)
With epsilon_total = e that is 5 times the budget.

Fixed: give each daily count epsilon_total / 5, so the 5 days total
epsilon_total exactly. A plan may spend its whole budget (the check is <=).

Remedy: divide epsilon_total among the sequentially composed releases, and
declare partition constraints only when the data guarantees them.
)";

}  // namespace

std::string ExplainText(FindingCode code) {
  switch (code) {
    case FindingCode::kMisusedSensitivity:
      return kM1;
    case FindingCode::kDataDependentHyperparam:
      return kM2;
    case FindingCode::kPartiallyPrivatized:
      return kM3;
    case FindingCode::kOverlyNoisy:
      return kM4;
    case FindingCode::kBudgetExceeded:
      return kM5;
  }
  return {};
}

}  // namespace dpaudit
