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

#ifndef DPAUDIT_EXPLAIN_H_
#define DPAUDIT_EXPLAIN_H_

#include <string>

#include "dpaudit/verifier.h"

namespace dpaudit {

// Definition, a wrong/fixed plan fragment pair, and remediation for one
// finding class.
std::string ExplainText(FindingCode code);

}  // namespace dpaudit

#endif  // DPAUDIT_EXPLAIN_H_
