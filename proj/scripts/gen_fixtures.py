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

"""Regenerates fixtures/data/*.csv, fixtures/plans/*.json and the manifest.

Deterministic: running it twice produces byte-identical files.
"""

import argparse
import csv
import datetime
import json
import pathlib
import random

PRODUCTS = ["A", "B", "C", "D", "E", "F", "Others"]
EVENTS = ["open", "close", "save", "reset", "error"]
DAYS = ["1", "2", "3", "4", "5"]
LENGTHS = ["long", "short"]

TELEMETRY_SCHEMA = {
    "columns": [
        {"name": "User ID", "kind": "identifier"},
        {"name": "Product Type", "kind": "categorical", "values": PRODUCTS},
        {"name": "Event Type", "kind": "categorical", "values": EVENTS},
        {"name": "Time of Event", "kind": "timestamp"},
    ]
}

RESTAURANT_SCHEMA = {
    "columns": [
        {"name": "VisitorId", "kind": "identifier"},
        {"name": "Day", "kind": "categorical", "values": DAYS},
        {"name": "Visit Length", "kind": "categorical", "values": LENGTHS},
        {"name": "Time spent", "kind": "numeric"},
    ]
}


def key(p):
    return p.lower()


# ---------------------------------------------------------------- datasets


def telemetry_rows(seed, users, mean_events):
    rng = random.Random(seed)
    start = datetime.datetime(2023, 3, 1)
    rows = []
    for u in range(1, users + 1):
        uid = "u%03d" % u
        weights = [rng.random() + 0.2 for _ in PRODUCTS]
        err_rate = rng.uniform(0.1, 0.45)
        n = max(1, int(rng.expovariate(1.0 / mean_events)) + 1)
        for _ in range(n):
            product = rng.choices(PRODUCTS, weights)[0]
            if rng.random() < err_rate:
                event = "error"
            else:
                event = rng.choice(EVENTS[:4])
            t = start + datetime.timedelta(seconds=rng.randrange(0, 30 * 86400))
            rows.append([uid, product, event, t.strftime("%Y-%m-%d %H:%M:%S")])
    rows.sort(key=lambda r: (r[3], r[0]))
    return rows


def restaurant_rows(seed, visitors):
    rng = random.Random(seed)
    rows = []
    for v in range(1, visitors + 1):
        vid = "v%03d" % v
        for day in DAYS:
            if rng.random() < 0.45:
                spent = rng.randint(5, 150)
                length = "long" if spent >= 60 else "short"
                rows.append([vid, day, length, str(spent)])
    rows.sort(key=lambda r: (int(r[1]), r[0]))
    return rows


def heavy_user_rows():
    # One user with 7 product-A events, two light users.
    rows = [["u001", "A", "open" if i % 2 else "error", "2023-03-01 09:%02d:00" % i]
            for i in range(7)]
    rows.append(["u002", "A", "save", "2023-03-02 10:00:00"])
    rows.append(["u003", "B", "error", "2023-03-02 11:00:00"])
    return rows


def six_user_rows():
    rows = []
    counts = [1, 3, 6, 2, 8, 4]
    for i, c in enumerate(counts):
        vid = "v%03d" % (i + 1)
        for j in range(c):
            spent = 20 + 17 * ((i + j) % 6)
            rows.append([vid, DAYS[j % 5], "long" if spent >= 60 else "short", str(spent)])
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------- plan helpers


def plan(name, description, schema, unit, eps_total, nodes, edges, constraints=None):
    return {
        "name": name,
        "description": description,
        "schema": schema,
        "privacy": {"unit_column": unit, "neighboring": "add_or_remove_one",
                    "epsilon_total": eps_total},
        "nodes": nodes,
        "edges": edges,
        "constraints": constraints or [],
    }


def source():
    return {"id": "source", "kind": "source"}


def clip(id_, k, scope=None, value_bounds=None):
    n = {"id": id_, "kind": "clip", "per_unit_bound": k, "scope": scope}
    if value_bounds:
        n["value_bounds"] = value_bounds
    return n


def agg(id_, op="count", where=None, group_by=None, column=None):
    return {"id": id_, "kind": "aggregate", "op": op, "where": where or [],
            "group_by": group_by, "column": column}


def noise(id_, eps, sens, signal=None):
    n = {"id": id_, "kind": "noise", "mechanism": "laplace", "epsilon": eps, "sensitivity": sens}
    if signal is not None:
        n["signal_estimate"] = signal
    return n


def pp(id_, expr, guard=1e-06):
    return {"id": id_, "kind": "post_process", "expr": expr, "guard": guard}


def hyper(id_, value):
    return {"id": id_, "kind": "hyperparameter", "value": value}


def release(id_):
    return {"id": id_, "kind": "release"}


def refs(expr):
    out = []
    if isinstance(expr, str):
        if expr != "epsilon_total":
            out.append(expr)
    elif isinstance(expr, list):
        for a in expr[1:]:
            out.extend(refs(a))
    return out


def pp_edges(node):
    seen = []
    for r in refs(node["expr"] if node["kind"] == "post_process" else node["value"]):
        if r not in seen:
            seen.append(r)
    return [[r, node["id"]] for r in seen]


# ---------------------------------------------------------------- telemetry plans


def zscore_tail(nodes, edges, rate_ids):
    """Shared post-processing: mean/std across products, z-score per product."""
    mean = pp("mean_rate", ["mean"] + rate_ids, guard=None)
    std = pp("std_rate", ["std"] + rate_ids, guard=None)
    nodes += [mean, std]
    edges += pp_edges(mean) + pp_edges(std)
    for p, r in zip(PRODUCTS, rate_ids):
        z = pp("z_" + key(p), ["div", ["sub", r, "mean_rate"], "std_rate"])
        rel = release("release_z_" + key(p))
        nodes += [z, rel]
        edges += pp_edges(z) + [[z["id"], rel["id"]]]


def avg_flawed():
    nodes, edges = [source(), clip("clip_user_product", 1, scope="Product Type")], []
    edges.append(["source", "clip_user_product"])
    for p in PRODUCTS:
        k = key(p)
        total = agg("total_" + k, where=[["Product Type", "==", p]])
        noisy = noise("noisy_total_" + k, 1.0, 1)
        users = agg("users_" + k, where=[["Product Type", "==", p]])
        avg = pp("avg_" + k, ["div", noisy["id"], users["id"]])
        rel = release("release_avg_" + k)
        nodes += [total, noisy, users, avg, rel]
        edges += [["source", total["id"]], [total["id"], noisy["id"]],
                  ["clip_user_product", users["id"]]]
        edges += pp_edges(avg) + [[avg["id"], rel["id"]]]
    return plan("telemetry_average",
                "Average events per user for each product type. Per-product totals are "
                "noised with sensitivity 1 at epsilon 1 each and divided by the exact "
                "number of distinct users.",
                TELEMETRY_SCHEMA, "User ID", 1.0, nodes, edges)


def avg_repaired():
    nodes = [source(), clip("clip_events", 5), clip("clip_user_product", 1, scope="Product Type")]
    edges = [["source", "clip_events"], ["source", "clip_user_product"]]
    for p in PRODUCTS:
        k = key(p)
        total = agg("total_" + k, where=[["Product Type", "==", p]])
        noisy_t = noise("noisy_total_" + k, "epsilon_total / 14", 5, signal=50)
        users = agg("users_" + k, where=[["Product Type", "==", p]])
        noisy_u = noise("noisy_users_" + k, "epsilon_total / 14", 1, signal=10)
        avg = pp("avg_" + k, ["max", ["div", noisy_t["id"], ["max", noisy_u["id"], 1]], 0])
        rel = release("release_avg_" + k)
        nodes += [total, noisy_t, users, noisy_u, avg, rel]
        edges += [["clip_events", total["id"]], [total["id"], noisy_t["id"]],
                  ["clip_user_product", users["id"]], [users["id"], noisy_u["id"]]]
        edges += pp_edges(avg) + [[avg["id"], rel["id"]]]
    return plan("telemetry_average_repaired",
                "Average events per user for each product type. Events are clipped to 5 per "
                "user, distinct users are counted with one row per user and product, and "
                "both counts are noised at epsilon_total / 14.",
                TELEMETRY_SCHEMA, "User ID", 1.0, nodes, edges)


def zscore_flawed():
    nodes, edges = [source()], []
    rate_ids = []
    for p in PRODUCTS:
        k = key(p)
        errors = agg("errors_" + k, where=[["Product Type", "==", p], ["Event Type", "==", "error"]])
        total = agg("total_" + k, where=[["Product Type", "==", p]])
        maxerr = agg("max_user_errors_" + k, op="max_per_unit",
                     where=[["Product Type", "==", p], ["Event Type", "==", "error"]])
        sens = hyper("sensitivity_" + k, ["div", maxerr["id"], total["id"]])
        rate = pp("true_rate_" + k, ["div", errors["id"], total["id"]])
        noisy = noise("noisy_rate_" + k, "epsilon_total / 7", {"ref": sens["id"]}, signal=0.3)
        clamped = pp("rate_" + k, ["clamp", noisy["id"], 0, 1], guard=None)
        nodes += [errors, total, maxerr, sens, rate, noisy, clamped]
        edges += [["source", errors["id"]], ["source", total["id"]], ["source", maxerr["id"]]]
        edges += pp_edges(sens) + pp_edges(rate) + [[rate["id"], noisy["id"]]] + pp_edges(clamped)
        rate_ids.append(clamped["id"])
    zscore_tail(nodes, edges, rate_ids)
    return plan("telemetry_zscore",
                "Z-score of the error rate of each product type. The noise scale uses the "
                "largest per-user error count divided by the product total, and the exact "
                "rate is noised.",
                TELEMETRY_SCHEMA, "User ID", 1.0, nodes, edges)


def zscore_counts(name, description, sens, extra_nodes=(), k=5):
    nodes, edges = [source()] + list(extra_nodes), []
    nodes.append(clip("clip_events", k))
    edges.append(["source", "clip_events"])
    rate_ids = []
    for p in PRODUCTS:
        kk = key(p)
        errors = agg("errors_" + kk, where=[["Product Type", "==", p], ["Event Type", "==", "error"]])
        total = agg("total_" + kk, where=[["Product Type", "==", p]])
        noisy_e = noise("noisy_errors_" + kk, "epsilon_total / 14", sens, signal=5)
        noisy_t = noise("noisy_total_" + kk, "epsilon_total / 14", sens, signal=40)
        rate = pp("rate_" + kk, ["clamp", ["div", noisy_e["id"], noisy_t["id"]], 0, 1])
        nodes += [errors, total, noisy_e, noisy_t, rate]
        edges += [["clip_events", errors["id"]], ["clip_events", total["id"]],
                  [errors["id"], noisy_e["id"]], [total["id"], noisy_t["id"]]]
        edges += pp_edges(rate)
        rate_ids.append(rate["id"])
    zscore_tail(nodes, edges, rate_ids)
    return plan(name, description, TELEMETRY_SCHEMA, "User ID", 1.0, nodes, edges)


def zscore_correct():
    return zscore_counts(
        "zscore_correct",
        "Z-score of per-product error rates. Events are clipped to 5 per user; the error and "
        "total counts of each product are noised at epsilon_total / 14 with sensitivity 5.",
        5)


def zscore_repaired():
    p = zscore_counts(
        "telemetry_zscore_repaired",
        "Repair of the flawed z-score program: the sensitivity is a fixed hyperparameter "
        "shared by the clip and the noise nodes, and counts are noised instead of rates.",
        {"ref": "contribution_bound"}, extra_nodes=[hyper("contribution_bound", 5)])
    for n in p["nodes"]:
        if n["kind"] == "clip":
            n["per_unit_bound"] = {"ref": "contribution_bound"}
    return p


def zscore_per_product_budget():
    nodes, edges = [source(), clip("clip_events", 5)], [["source", "clip_events"]]
    rate_ids = []
    for p in PRODUCTS:
        k = key(p)
        errors = agg("errors_" + k, where=[["Product Type", "==", p], ["Event Type", "==", "error"]])
        total = agg("total_" + k, where=[["Product Type", "==", p]])
        rate = pp("true_rate_" + k, ["div", errors["id"], total["id"]])
        noisy = noise("noisy_rate_" + k, 1.0, 1)
        clamped = pp("rate_" + k, ["clamp", noisy["id"], 0, 1], guard=None)
        nodes += [errors, total, rate, noisy, clamped]
        edges += [["clip_events", errors["id"]], ["clip_events", total["id"]]]
        edges += pp_edges(rate) + [[rate["id"], noisy["id"]]] + pp_edges(clamped)
        rate_ids.append(clamped["id"])
    zscore_tail(nodes, edges, rate_ids)
    return plan("zscore_per_product_budget",
                "Z-score program that spends epsilon 1.0 on the error rate of each of the "
                "seven product types.",
                TELEMETRY_SCHEMA, "User ID", 1.0, nodes, edges)


# ---------------------------------------------------------------- restaurant plans


def rplan(name, description, nodes, edges, constraints=None):
    return plan(name, description, RESTAURANT_SCHEMA, "VisitorId", 1.0, nodes, edges, constraints)


def mistake1(correct):
    nodes = [source(), clip("clip_visits", 10),
             agg("visits"), noise("noisy_visits", 1.0, {"ref": "sensitivity"}), release("out")]
    edges = [["source", "clip_visits"], ["clip_visits", "visits"], ["visits", "noisy_visits"],
             ["noisy_visits", "out"]]
    if correct:
        nodes.append(hyper("sensitivity", 10))
        desc = "Visit count clipped to 10 per visitor; the sensitivity is the constant 10."
    else:
        nodes += [agg("row_count"), hyper("sensitivity", "row_count")]
        edges += [["source", "row_count"], ["row_count", "sensitivity"]]
        desc = "Visit count whose sensitivity is set to the number of rows in the data."
    return rplan("mistake1_" + ("correct" if correct else "incorrect"), desc, nodes, edges)


def mistake2(correct):
    if correct:
        nodes = [source(), clip("clip_visits", 5), agg("visits"),
                 noise("noisy_visits", 1.0, 5), release("out")]
        edges = [["source", "clip_visits"], ["clip_visits", "visits"], ["visits", "noisy_visits"],
                 ["noisy_visits", "out"]]
        desc = "Visit count clipped to 5 visits per visitor, noised with sensitivity 5."
    else:
        nodes = [source(), agg("visits"), noise("noisy_visits", 1.0, 1), release("out")]
        edges = [["source", "visits"], ["visits", "noisy_visits"], ["noisy_visits", "out"]]
        desc = "Visit count noised with sensitivity 1 although visitors return many times."
    return rplan("mistake2_" + ("correct" if correct else "incorrect"), desc, nodes, edges)


def ratio_plan(name, desc, eps, noisy_total, rate_from_counts=True, signal=None):
    nodes = [source(), clip("clip_visits", 5),
             agg("long_visits", where=[["Time spent", ">", 60]]), agg("total_visits"),
             noise("noisy_long", eps, 5, signal=signal)]
    edges = [["source", "clip_visits"], ["clip_visits", "long_visits"],
             ["clip_visits", "total_visits"], ["long_visits", "noisy_long"]]
    if noisy_total:
        nodes.append(noise("noisy_total", eps, 5, signal=None if signal is None else 100))
        edges.append(["total_visits", "noisy_total"])
        ratio = pp("ratio", ["clamp", ["div", "noisy_long", "noisy_total"], 0, 1])
    else:
        ratio = pp("ratio", ["div", "noisy_long", "total_visits"])
    nodes += [ratio, release("out")]
    edges += pp_edges(ratio) + [["ratio", "out"]]
    return rplan(name, desc, nodes, edges)


def mistake3(correct):
    if correct:
        return ratio_plan("mistake3_correct",
                          "Share of visits over 60 minutes; both counts noised at "
                          "epsilon_total / 2.", "epsilon_total / 2", True)
    return ratio_plan("mistake3_incorrect",
                      "Share of visits over 60 minutes; the long-visit count is noised and "
                      "divided by the exact total.", 1.0, False)


def mistake4(correct):
    if correct:
        return ratio_plan("mistake4_correct",
                          "Share of long visits from a noisy long count and a noisy total, "
                          "each at epsilon_total / 2.", "epsilon_total / 2", True, signal=40)
    nodes = [source(), clip("clip_visits", 5),
             agg("long_visits", where=[["Visit Length", "==", "long"]]), agg("total_visits"),
             pp("true_ratio", ["div", "long_visits", "total_visits"]),
             noise("noisy_ratio", 1.0, 1, signal=0.3), release("out")]
    edges = [["source", "clip_visits"], ["clip_visits", "long_visits"],
             ["clip_visits", "total_visits"], ["long_visits", "true_ratio"],
             ["total_visits", "true_ratio"], ["true_ratio", "noisy_ratio"], ["noisy_ratio", "out"]]
    return rplan("mistake4_incorrect",
                 "Share of long visits computed exactly, then noised with sensitivity 1; "
                 "the expected share is about 0.3.", nodes, edges)


def mistake5(correct):
    eps = "epsilon_total / 5" if correct else "epsilon_total"
    nodes, edges = [source()], []
    for d in DAYS:
        for length in LENGTHS:
            a = agg("count_d%s_%s" % (d, length),
                    where=[["Day", "==", d], ["Visit Length", "==", length]])
            n = noise("noisy_d%s_%s" % (d, length), eps, 1)
            r = release("release_d%s_%s" % (d, length))
            nodes += [a, n, r]
            edges += [["source", a["id"]], [a["id"], n["id"]], [n["id"], r["id"]]]
    desc = ("Daily counts of long and short visits over 5 days; each visitor comes at most "
            "once per day. Each count uses " + eps + ".")
    return rplan("mistake5_" + ("correct" if correct else "incorrect"), desc, nodes, edges,
                 [{"attribute": "Day", "guarantee": "single_row"}])


def restaurant_ratio():
    return ratio_plan("restaurant_ratio",
                      "Ratio of long visits to all visits with each count clipped to 5 visits "
                      "per visitor and noised at epsilon_total / 2.", "epsilon_total / 2", True)


def mean_time_spent():
    nodes = [source(),
             clip("clip_visits", 5, value_bounds={"column": "Time spent", "lo": 0, "hi": 120}),
             agg("time_sum", op="sum", column="Time spent"), agg("visit_count"),
             noise("noisy_sum", "epsilon_total / 2", "auto", signal=5000),
             noise("noisy_count", "epsilon_total / 2", "auto", signal=100),
             pp("mean_time", ["clamp", ["div", "noisy_sum", ["max", "noisy_count", 1]], 0, 120]),
             release("out")]
    edges = [["source", "clip_visits"], ["clip_visits", "time_sum"],
             ["clip_visits", "visit_count"], ["time_sum", "noisy_sum"],
             ["visit_count", "noisy_count"]]
    edges += pp_edges(nodes[6]) + [["mean_time", "out"]]
    return rplan("mean_time_spent",
                 "Mean time spent per visit: clipped sum over a clipped count, both noised "
                 "with derived sensitivity.", nodes, edges)


def daily_grouped(correct):
    eps = "epsilon_total / 5" if correct else 1.0
    nodes = [source(), agg("per_day", group_by="Day"), noise("noisy_per_day", eps, 1)]
    edges = [["source", "per_day"], ["per_day", "noisy_per_day"]]
    nodes.append(release("out"))
    edges.append(["noisy_per_day", "out"])
    constraints = [{"attribute": "Day", "guarantee": "single_row"}]
    name = "daily_counts_grouped"
    desc = "Visits per day as one grouped count."
    if not correct:
        constraints = []
        name = "daily_counts_grouped_no_constraint"
        desc += " No per-day guarantee is declared, so every visitor may be in every cell."
    return rplan(name, desc, nodes, edges, constraints)


# ---------------------------------------------------------------- oracle plans


def oracle_count_plan():
    nodes = [source(), clip("clip_visits", 5), agg("visits"),
             noise("noisy_visits", 1.0, 5), release("out")]
    edges = [["source", "clip_visits"], ["clip_visits", "visits"], ["visits", "noisy_visits"],
             ["noisy_visits", "out"]]
    return rplan("oracle_count_clip5", "Visit count with 5 visits kept per visitor.", nodes, edges)


# ---------------------------------------------------------------- main


def build(root):
    data = root / "fixtures" / "data"
    plans = root / "fixtures" / "plans"
    data.mkdir(parents=True, exist_ok=True)
    plans.mkdir(parents=True, exist_ok=True)

    telemetry_header = [c["name"] for c in TELEMETRY_SCHEMA["columns"]]
    restaurant_header = [c["name"] for c in RESTAURANT_SCHEMA["columns"]]
    write_csv(data / "telemetry.csv", telemetry_header, telemetry_rows(20260301, 100, 19))
    write_csv(data / "restaurant.csv", restaurant_header, restaurant_rows(20260302, 120))
    write_csv(data / "telemetry_heavy_user.csv", telemetry_header, heavy_user_rows())
    write_csv(data / "restaurant_six_users.csv", restaurant_header, six_user_rows())
    write_csv(data / "restaurant_empty.csv", restaurant_header, [])

    cases = []

    def add(p, dataset, expected, note, warnings_note=None, kind=None):
        path = plans / (p["name"] + ".json")
        path.write_text(json.dumps(p, indent=2) + "\n")
        case = {"name": p["name"], "plan": "plans/" + path.name,
                "data": "data/" + dataset if dataset else None,
                "expected": expected, "note": note}
        if warnings_note:
            case["documented_warnings"] = warnings_note
        if kind:
            case["tags"] = kind
        cases.append(case)

    add(avg_flawed(), "telemetry.csv", ["M1", "M3", "M5"],
        "Per-product average events per user with unclipped totals, exact user counts and "
        "epsilon 1 per product.")
    add(avg_repaired(), "telemetry.csv", "pass",
        "Repaired average: clipped totals, noisy distinct-user counts, 14 shares of the budget.",
        kind=["repaired", "correct"])
    add(zscore_flawed(), "telemetry.csv", ["M2", "M4"],
        "Per-product error-rate z-scores with a data-derived noise scale on the exact rate.")
    add(zscore_repaired(), "telemetry.csv", "pass",
        "Repaired z-score: fixed contribution bound, noisy counts, 14 budget shares.",
        kind=["repaired", "correct"])
    add(zscore_correct(), "telemetry.csv", "pass",
        "Worked z-score example: clip 5, 14 noisy counts at epsilon_total / 14.",
        kind=["correct", "count_sum"])
    add(zscore_per_product_budget(), "telemetry.csv", ["M5"],
        "Epsilon 1.0 per product rate over seven products: worst case 7.0 against 1.0.")
    for correct in (False, True):
        add(mistake1(correct), "restaurant.csv", "pass" if correct else ["M2"],
            "Sensitivity taken from the data size." if not correct
            else "Sensitivity fixed in advance.",
            kind=["correct", "count_sum"] if correct else None)
        add(mistake2(correct), "restaurant.csv", "pass" if correct else ["M1"],
            "Unbounded visit count with sensitivity 1." if not correct
            else "Visit count clipped to 5 per visitor.",
            kind=["correct", "count_sum"] if correct else None)
        add(mistake3(correct), "restaurant.csv", "pass" if correct else ["M3"],
            "Noisy numerator over exact denominator." if not correct
            else "Both counts noised with half the budget each.",
            kind=["correct", "count_sum"] if correct else None)
        add(mistake4(correct), "restaurant.csv", "pass" if correct else ["M4"],
            "Rate in [0, 1] near 0.3 noised with sensitivity 1." if not correct
            else "Counts noised before the division.",
            kind=["correct", "count_sum"] if correct else None)
        add(mistake5(correct), "restaurant.csv", "pass" if correct else ["M5"],
            "Ten daily counts at epsilon_total each: 5 days compose sequentially." if not correct
            else "Ten daily counts at epsilon_total / 5 each.",
            kind=["correct", "count_sum"] if correct else None)
    add(restaurant_ratio(), "restaurant.csv", "pass",
        "Long-visit ratio with both counts noised at epsilon_total / 2.",
        kind=["correct", "count_sum"])
    add(mean_time_spent(), "restaurant.csv", "pass",
        "Mean of a bounded numeric column from a clipped sum and count.",
        kind=["correct", "count_sum"])
    add(daily_grouped(True), "restaurant.csv", "pass",
        "Grouped per-day count at epsilon_total / 5 per day; a visitor may come every day.",
        kind=["correct", "count_sum"])
    add(daily_grouped(False), "restaurant.csv", ["M1", "M5"],
        "Grouped per-day count without a per-day guarantee: unbounded rows and 5 cells "
        "composed sequentially.")
    add(oracle_count_plan(), "restaurant_six_users.csv", "pass",
        "Clipped count for the enumeration oracle.", kind=["correct", "count_sum", "oracle"])

    manifest = {"cases": cases}
    (root / "fixtures" / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default=str(pathlib.Path(__file__).resolve().parent.parent))
    args = parser.parse_args()
    build(pathlib.Path(args.root))


if __name__ == "__main__":
    main()
