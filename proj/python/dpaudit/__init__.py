# Copyright 2026 The dpaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the dpaudit plan verifier and executor."""

import json
import os

from . import _core
from ._core import ExecutionRefused, PlanError

__all__ = [
    "ExecutionRefused",
    "PlanError",
    "check",
    "derive_sensitivity",
    "empirical_sensitivity",
    "explain",
    "run",
]


def _text(plan_or_path):
    if isinstance(plan_or_path, dict):
        return json.dumps(plan_or_path)
    if isinstance(plan_or_path, (str, os.PathLike)) and os.path.exists(plan_or_path):
        with open(plan_or_path, encoding="utf-8") as f:
            return f.read()
    return str(plan_or_path)


def check(plan, threshold=1.0):
    """Verify a plan (dict, JSON text, or path). Returns the report dict."""
    return json.loads(_core.check(_text(plan), threshold))


def run(plan, data, seed=0, noise=True, allow_invalid=False):
    """Execute a plan over CSV data (text or path)."""
    return json.loads(_core.run(_text(plan), _text(data), seed, noise, allow_invalid))


def derive_sensitivity(plan, node):
    return _core.derive_sensitivity(_text(plan), node)


def empirical_sensitivity(plan, data, node):
    return _core.empirical_sensitivity(_text(plan), _text(data), node)


def explain(code):
    return _core.explain(code)
