#!/usr/bin/env python3
"""Build the replay fixture used by the end-to-end acceptance check.

Reads a generated single-schema dataset, scripts two synthetic models and a
judge as recorded chat-completion replies, and writes the tables the scorer
should print for them. Scores are computed here from the scoring rules, not
by calling the C++ code.

usage: make_replay_fixture.py FIXTURE_DIR   (expects FIXTURE_DIR/dataset)
"""

import json
import sys
from fractions import Fraction
from pathlib import Path

MODELS = ["synthetic-careful", "synthetic-hasty"]
JUDGE = "synthetic-judge"
POINTS = [100, 70, 50, 35, 25, 20, 15, 10, 5, 0]

FILTER_SLOTS = ["integer_property_filter", "text_property_filter", "boolean_property_filter"]
AGG_SLOTS = ["integer_property_aggregation", "text_property_aggregation", "boolean_property_aggregation"]

COMPONENTS = [
    ("Search Queries", lambda c: c["search"]),
    ("Integer Filters", lambda c: c["filter"] == "int"),
    ("Text Filters", lambda c: c["filter"] == "text"),
    ("Boolean Filters", lambda c: c["filter"] == "bool"),
    ("Integer Aggregations", lambda c: c["aggregation"] == "int"),
    ("Text Aggregations", lambda c: c["aggregation"] == "text"),
    ("Boolean Aggregations", lambda c: c["aggregation"] == "bool"),
    ("GroupBy Operations", lambda c: c["groupby"]),
]

CAREFUL_CYCLE = ["exact", "exact", "case_search", "exact", "toggle_groupby", "exact", "bump_filter", "exact",
                 "swap_metric"]
HASTY_CYCLE = ["exact", "toggle_search", "bump_filter", "exact", "no_tool", "swap_metric", "wrong_collection"]


def behaviour(model, i):
    if model == "synthetic-careful":
        return {20: "no_tool", 41: "wrong_collection"}.get(i, CAREFUL_CYCLE[i % len(CAREFUL_CYCLE)])
    return {30: "malformed", 50: "malformed"}.get(i, HASTY_CYCLE[i % len(HASTY_CYCLE)])


def first_property(schema, collection, data_type):
    for c in schema["collections"]:
        if c["name"] == collection:
            for p in c["properties"]:
                if data_type is None or p["data_type"] == data_type:
                    return p["name"]
    raise KeyError((collection, data_type))


def perturb(kind, truth, schema):
    """Arguments the scripted model sends for a tool-calling behaviour."""
    q = json.loads(json.dumps(truth))
    coll = q["collection_name"]
    if kind == "exact":
        return q
    if kind == "case_search":
        if "search_query" in q:
            q["search_query"] = "  " + q["search_query"].upper().replace(" ", "   ")
        return q
    if kind == "toggle_groupby":
        if "groupby_property" in q:
            del q["groupby_property"]
        else:
            q["groupby_property"] = first_property(schema, coll, "BOOLEAN")
        return q
    if kind == "toggle_search":
        if "search_query" in q:
            del q["search_query"]
        else:
            q["search_query"] = "cozy atmosphere"
        return q
    if kind == "bump_filter":
        if "integer_property_filter" in q:
            q["integer_property_filter"]["value"] += 1
        elif "text_property_filter" in q:
            q["text_property_filter"]["value"] += " extra"
        elif "boolean_property_filter" in q:
            q["boolean_property_filter"]["value"] = not q["boolean_property_filter"]["value"]
        else:
            q["integer_property_filter"] = {"property_name": first_property(schema, coll, "NUMBER"),
                                            "operator": ">", "value": 3}
        return q
    if kind == "swap_metric":
        if "integer_property_aggregation" in q:
            a = q["integer_property_aggregation"]
            a["metrics"] = "MIN" if a["metrics"] == "MAX" else "MAX"
        elif "text_property_aggregation" in q:
            a = q["text_property_aggregation"]
            a.pop("top_occurrences_limit", None)
            a["metrics"] = "TOP_OCCURRENCES" if a["metrics"] == "COUNT" else "COUNT"
        elif "boolean_property_aggregation" in q:
            a = q["boolean_property_aggregation"]
            a["metrics"] = "TOTAL_FALSE" if a["metrics"] == "TOTAL_TRUE" else "TOTAL_TRUE"
        else:
            q["integer_property_aggregation"] = {"property_name": first_property(schema, coll, "NUMBER"),
                                                 "metrics": "COUNT"}
        return q
    if kind == "wrong_collection":
        names = [c["name"] for c in schema["collections"]]
        return {"collection_name": names[(names.index(coll) + 1) % len(names)]}
    raise ValueError(kind)


def canonical(q):
    q = json.loads(json.dumps(q))
    if "search_query" in q:
        q["search_query"] = " ".join(q["search_query"].split()).lower()
    if "text_property_filter" in q:
        q["text_property_filter"]["value"] = q["text_property_filter"]["value"].strip()
    for slot in FILTER_SLOTS:
        if slot in q:
            v = q[slot]["value"]
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                q[slot]["value"] = float(v)
    return q


def ast_points(pred, truth):
    """Score in hundredths: 40 for routing, 15 per matching operator group."""
    p, t = canonical(pred), canonical(truth)
    if p["collection_name"] != t["collection_name"]:
        return 0
    pts = 40
    pts += 15 if ("search_query" in p) == ("search_query" in t) else 0
    pts += 15 if all(p.get(s) == t.get(s) for s in FILTER_SLOTS) else 0
    pts += 15 if all(p.get(s) == t.get(s) for s in AGG_SLOTS) else 0
    pts += 15 if p.get("groupby_property") == t.get("groupby_property") else 0
    return pts


def complexity(c):
    n = int(c["search"]) + int(c["filter"] != "none") + int(c["aggregation"] != "none") + int(c["groupby"])
    return "SIMPLE" if n == 1 else ("MODERATE" if n == 2 else "COMPLEX")


def openai_payload(text, tool_calls, usage):
    message = {"role": "assistant", "content": text}
    if tool_calls:
        message["tool_calls"] = [
            {"id": f"call_{k}", "type": "function", "function": {"name": "query_database", "arguments": args}}
            for k, args in enumerate(tool_calls)]
    return {"id": "chatcmpl-fixture",
            "choices": [{"index": 0, "message": message, "finish_reason": "tool_calls" if tool_calls else "stop"}],
            "usage": {"prompt_tokens": usage[0], "completion_tokens": usage[1]}}


def write_entry(path, payload, usage, latency):
    path.parent.mkdir(parents=True, exist_ok=True)
    entry = {"envelope": "openai", "payload": payload,
             "usage": {"input_tokens": usage[0], "output_tokens": usage[1]}, "latency_ms": latency}
    path.write_text(json.dumps(entry, indent=1) + "\n")


def pct(hits, n, decimals):
    return "n/a" if n == 0 else "%.*f" % (decimals, 100.0 * hits / n)


def csv(rows):
    return "".join(",".join(r) + "\n" for r in rows)


def main(fixture):
    fixture = Path(fixture)
    dataset = [json.loads(line) for line in (fixture / "dataset" / "dataset.jsonl").read_text().splitlines() if line]
    schema = json.loads((fixture / "dataset" / "schemas" / "restaurants.json").read_text())
    assert len(dataset) == 63, len(dataset)
    archive = fixture / "archive"

    scored = {m: [] for m in MODELS}
    shown = {}  # (record, model) -> what the judge compares
    for i, rec in enumerate(dataset):
        truth = rec["ground_truth_query"]
        for m in MODELS:
            kind = behaviour(m, i)
            usage = (1200 + 7 * i, 45 + i % 5)
            if kind == "no_tool":
                text = "I can answer this without the database." if m == MODELS[0] else "Please check the website."
                payload = openai_payload(text, [], usage)
                outcome = {"em": False, "ast": 0, "routed": False, "no_tool": True, "malformed": False, "calls": 0}
                shown[(i, m)] = ("text", text)
            elif kind == "malformed":
                payload = openai_payload(None, ['{"collection_name": '], usage)
                outcome = {"em": False, "ast": 0, "routed": False, "no_tool": False, "malformed": True, "calls": 0}
                shown[(i, m)] = ("unparseable",)
            else:
                args = perturb(kind, truth, schema)
                payload = openai_payload(None, [json.dumps(args)], usage)
                pts = ast_points(args, truth)
                outcome = {"em": canonical(args) == canonical(truth), "ast": pts, "routed": pts >= 40,
                           "no_tool": False, "malformed": False, "calls": 1}
                shown[(i, m)] = ("query", json.dumps(canonical(args), sort_keys=True))
            outcome["record"] = rec
            scored[m].append(outcome)
            write_entry(archive / m / f"{rec['record_id']}.json", payload, usage, 10.0 + i % 4)

    # Judge: better score ranks first; equal scores alternate or tie.
    ranks = {m: [] for m in MODELS}
    for i, rec in enumerate(dataset):
        a, b = shown[(i, MODELS[0])], shown[(i, MODELS[1])]
        if a == b:
            for m in MODELS:
                ranks[m].append(1)
            continue
        sa = (scored[MODELS[0]][i]["em"], scored[MODELS[0]][i]["ast"])
        sb = (scored[MODELS[1]][i]["em"], scored[MODELS[1]][i]["ast"])
        if sa == sb:
            ra, rb = (1, 1) if i % 3 == 0 else ((1, 2) if i % 2 == 0 else (2, 1))
        else:
            ra, rb = (1, 2) if sa > sb else (2, 1)
        ranks[MODELS[0]].append(ra)
        ranks[MODELS[1]].append(rb)
        # Models are labelled in name order, so P1 is the careful one.
        body = {"ranking": [{"prediction": "P1", "rank": ra}, {"prediction": "P2", "rank": rb}],
                "explanation": "P%d matches the request more closely." % (1 if ra <= rb else 2)}
        write_entry(archive / JUDGE / f"{rec['record_id']}.json",
                    openai_payload(json.dumps(body), [], (2000 + i, 80)), (2000 + i, 80), 20.0)

    # Expected tables.
    def summary(m):
        rows = scored[m]
        em = sum(r["em"] for r in rows)
        ast = Fraction(sum(r["ast"] for r in rows), 100 * len(rows))
        return em, ast

    order = sorted(MODELS, key=lambda m: (-summary(m)[0], -summary(m)[1], m))
    expected = fixture / "expected"
    expected.mkdir(exist_ok=True)

    board = [["Rank", "Model", "Exact Match (%)", "Simple (%)", "Moderate (%)", "Complex (%)", "AST Score",
              "Routing (%)", "No Tool (%)", "Calls/Query", "Records"]]
    aggregates = {}
    for rank, m in enumerate(order, 1):
        rows = scored[m]
        em, ast = summary(m)
        bucket = {b: [r for r in rows if complexity(r["record"]["combination"]) == b]
                  for b in ("SIMPLE", "MODERATE", "COMPLEX")}
        calling = [r for r in rows if r["calls"] > 0]
        routed = sum(r["routed"] for r in rows)
        no_tool = sum(r["no_tool"] for r in rows)
        board.append([str(rank), m, pct(em, len(rows), 1)] +
                     [pct(sum(r["em"] for r in bucket[b]), len(bucket[b]), 1) for b in ("SIMPLE", "MODERATE", "COMPLEX")] +
                     ["%.3f" % float(ast), pct(routed, len(rows), 1), pct(no_tool, len(rows), 2),
                      "%.2f" % (sum(r["calls"] for r in calling) / len(calling)), str(len(rows))])
        aggregates[m] = {"exact_matches": em, "ast_sum_hundredths": sum(r["ast"] for r in rows), "routed": routed,
                         "no_tool": no_tool, "bucket_sizes": {b: len(v) for b, v in bucket.items()}}
    (expected / "leaderboard.csv").write_text(csv(board))

    comp = [["Component"] + order]
    for label, uses in COMPONENTS:
        row = [label]
        for m in order:
            q = [r for r in scored[m] if uses(r["record"]["combination"])]
            row.append(pct(sum(r["em"] for r in q), len(q), 2))
        comp.append(row)
    (expected / "components.csv").write_text(csv(comp))

    per = [["Schema"] + order, ["restaurants"] + [pct(summary(m)[0], 63, 2) for m in order]]
    (expected / "per_schema.csv").write_text(csv(per))

    nt = [["Model", "No Tool", "Records", "No Tool (%)", "Malformed", "Multi-slot"]]
    for m in order:
        rows = scored[m]
        k = sum(r["no_tool"] for r in rows)
        nt.append([m, str(k), str(len(rows)), pct(k, len(rows), 2), str(sum(r["malformed"] for r in rows)), "0"])
    (expected / "no_tool.csv").write_text(csv(nt))

    pref_rows = []
    for m in MODELS:
        score = sum(POINTS[r - 1] if r <= len(POINTS) else 0 for r in ranks[m])
        firsts = sum(r == 1 for r in ranks[m])
        pref_rows.append((score, m, firsts))
    pref_rows.sort(key=lambda t: -t[0])
    pref = [["Model", "Weighted Score", "First Places", "First Place (%)", "Judged Queries"]]
    for score, m, firsts in pref_rows:
        pref.append([m, str(score), str(firsts), pct(firsts, 63, 2), "63"])
    (expected / "preference.csv").write_text(csv(pref))
    (expected / "aggregates.json").write_text(json.dumps(aggregates, indent=2) + "\n")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
