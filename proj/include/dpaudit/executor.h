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

// Plan execution: clipping, aggregation, Laplace noise and post-processing
// over a loaded dataset. Randomness comes from sub-streams of one seed:
//   noise node N          -> MakeStream(seed, "noise/N")
//   clip C, unit U, cell S -> MakeStream(seed, "clip/C/U/S")
// so editing one part of a plan never shifts another node's draws.

#ifndef DPAUDIT_EXECUTOR_H_
#define DPAUDIT_EXECUTOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpaudit/dataset.h"
#include "dpaudit/plan.h"
#include "dpaudit/verifier.h"

namespace dpaudit {

// Scalar (no cells) or one value per group cell.
struct NodeValue {
  std::vector<std::string> cells;
  std::vector<double> values;

  static NodeValue Scalar(double v) { return NodeValue{{}, {v}}; }
  bool scalar() const { return cells.empty(); }

  bool operator==(const NodeValue&) const = default;
};

struct TraceEntry {
  std::string node_id;
  std::string kind;
  std::string detail;
};

struct ExecuteOptions {
  std::uint64_t seed = 0;
  bool noise_enabled = true;
  bool allow_invalid = false;
  double noise_threshold = kDefaultNoiseThreshold;
};

struct ExecutionResult {
  std::map<std::string, NodeValue> released;
  std::uint64_t seed = 0;
  bool noise_enabled = true;
  std::map<std::string, NodeValue> noise_draws;
  std::vector<TraceEntry> trace;
  // Clip node -> surviving original row indices, ascending.
  std::map<std::string, std::vector<std::size_t>> clipped_rows;
};

// The plan failed verification and no override was given.
class ExecutionRefused : public std::runtime_error {
 public:
  explicit ExecutionRefused(Report report);
  const Report& report() const { return report_; }

 private:
  Report report_;
};

// Runtime failure tied to a node (domain error, unbounded auto sensitivity).
class ExecutionError : public std::runtime_error {
 public:
  ExecutionError(const std::string& message, std::string node_id)
      : std::runtime_error(message), node_id_(std::move(node_id)) {}
  const std::string& node_id() const { return node_id_; }

 private:
  std::string node_id_;
};

// Keeps min(count, k) rows per unit (per unit and `scope` cell when given),
// chosen uniformly without replacement from the unit's own sub-stream; the
// survivors keep their original order. Values of `bounds.column` are clamped
// to [lo, hi].
Dataset ClipContributions(const Dataset& dataset, std::size_t k,
                          const std::optional<std::string>& scope, std::uint64_t seed,
                          std::string_view clip_id,
                          const std::optional<ValueBounds>& bounds = std::nullopt);

// Exact count / sum / max-per-unit over predicate-matching rows; one value per
// declared cell of group_by (missing cells are 0).
NodeValue EvaluateAggregate(const AggregatePayload& aggregate, const Dataset& dataset);

// Dataset after the clip chain that feeds `aggregate_id`; clip bounds must be
// statically known.
Dataset ApplyClipChain(const AnalysisPlan& plan, std::string_view aggregate_id,
                       const Dataset& dataset, std::uint64_t seed);

ExecutionResult Execute(const AnalysisPlan& plan, const Dataset& dataset,
                        const ExecuteOptions& options = {});

// Released values, seed and noise draws (full double precision).
std::string ResultToJson(const ExecutionResult& result, int indent = 2);
std::string TraceToJson(const ExecutionResult& result, int indent = 2);

}  // namespace dpaudit

#endif  // DPAUDIT_EXECUTOR_H_
