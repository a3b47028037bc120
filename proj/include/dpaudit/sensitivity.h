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

// Worst-case sensitivity of aggregate queries under add-or-remove-one-unit,
// derived from declared contribution bounds, plus a brute-force empirical
// oracle used to check the derivation on small datasets.
//
// Derivation rules (per group cell for grouped aggregates):
//   R1  count below a clip with per_unit_bound k             -> k
//   R2  count pinned to / grouped by A, single_row(A) declared -> 1
//   R3  sum below a clip with bound k and value_bounds [lo,hi] -> k*max(|lo|,|hi|)
//   R4  nothing applies                                        -> Unbounded
//   R5  noise on a post-processed value with static range [lo,hi] -> hi-lo
// A clip scoped by column S bounds rows per unit and S-cell; for an
// aggregate not confined to one S-cell the cap is k times |values(S)|.

#ifndef DPAUDIT_SENSITIVITY_H_
#define DPAUDIT_SENSITIVITY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpaudit/dataset.h"
#include "dpaudit/plan.h"

namespace dpaudit {

struct SensitivityBound {
  // nullopt is Unbounded.
  std::optional<double> value;
  std::vector<std::string> trace;

  bool unbounded() const { return !value.has_value(); }
  std::string ToString() const;  // "5" or "unbounded"
};

SensitivityBound DeriveSensitivity(const AnalysisPlan& plan, std::string_view aggregate_id);

// Sensitivity of the value a noise node perturbs: DeriveSensitivity for an
// aggregate input, R5 for a post_process input.
SensitivityBound DeriveInputSensitivity(const AnalysisPlan& plan, std::string_view noise_id);

struct Interval {
  double lo;
  double hi;

  bool bounded() const;
  double width() const { return hi - lo; }
};

// Static value range of a value-producing node (interval arithmetic, plus the
// proportion rule: count(P and Q) / count(P) over the same input is in [0,1]).
Interval StaticRange(const AnalysisPlan& plan, std::string_view node_id);

struct OracleOptions {
  std::size_t max_units = 16;
  // Upper bound on rows of the synthetic added unit.
  std::size_t max_added_rows = 8;
  std::size_t max_candidates = 2'000'000;
  std::uint64_t clip_seed = 0;
};

class OracleCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// max over neighbors D' of |q(D) - q(D')| (max over cells for grouped
// aggregates). Neighbors: drop all rows of one existing unit, or add one
// synthetic unit built from every multiset of candidate rows up to the
// clip-derived row cap.
double EmpiricalSensitivity(const AnalysisPlan& plan, std::string_view aggregate_id,
                            const Dataset& dataset, const OracleOptions& options = {});

}  // namespace dpaudit

#endif  // DPAUDIT_SENSITIVITY_H_
