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

import json
import os
import pathlib

import pytest

import dpaudit
from dpaudit import _core

ROOT = pathlib.Path(os.environ.get("DPAUDIT_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
PLANS = ROOT / "fixtures" / "plans"
DATA = ROOT / "fixtures" / "data"


def short_codes(report):
    return {f["code"][:2] for f in report["findings"]}


def test_average_fixture_codes():
    report = dpaudit.check(PLANS / "telemetry_average.json")
    assert short_codes(report) == {"M1", "M3", "M5"}
    assert report["verdict"] == "fail"


def test_repaired_fixture_passes():
    assert dpaudit.check(PLANS / "telemetry_zscore_repaired.json")["verdict"] == "pass"


def test_budget_ledger_is_exact():
    report = dpaudit.check(PLANS / "zscore_per_product_budget.json")
    assert report["ledger"]["worst_case_total"] == "7"


def test_run_is_deterministic():
    a = dpaudit.run(PLANS / "restaurant_ratio.json", DATA / "restaurant.csv", seed=42)
    b = dpaudit.run(PLANS / "restaurant_ratio.json", DATA / "restaurant.csv", seed=42)
    assert a == b


def test_run_refuses_invalid_plan():
    with pytest.raises(dpaudit.ExecutionRefused):
        dpaudit.run(PLANS / "telemetry_average.json", DATA / "telemetry.csv")


def test_malformed_plan():
    with pytest.raises(dpaudit.PlanError):
        dpaudit.check("{ not json")


def test_sensitivity_and_oracle():
    plan = PLANS / "oracle_count_clip5.json"
    assert dpaudit.derive_sensitivity(plan, "visits") == 5
    assert dpaudit.empirical_sensitivity(plan, DATA / "restaurant_six_users.csv", "visits") == 5


def test_laplace_moments():
    xs = _core.laplace(2.0, 5, "smoke", 200_000)
    mean = sum(xs) / len(xs)
    mean_abs = sum(abs(x) for x in xs) / len(xs)
    assert abs(mean) < 0.05
    assert abs(mean_abs - 2.0) < 0.05


def test_explain_and_canonical_round_trip():
    assert dpaudit.explain("m5") == dpaudit.explain("M5") != ""
    text = (PLANS / "mistake2_correct.json").read_text()
    once = _core.canonical(text)
    assert _core.canonical(once) == once
    assert json.loads(once)["nodes"]
