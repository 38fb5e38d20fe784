#!/usr/bin/env python3
"""Recomputes the analytics tables from data/paper_fixture.csv with pandas/scipy.

Placements are read from the hierarchy column, not the scenario id, so the id
parser is not shared with the code under test. Writes
tests/data/analytics_oracle.json.
"""
import json
import math
import pathlib

import pandas as pd
from scipy import stats

ROOT = pathlib.Path(__file__).resolve().parents[2]
BASELINE = "x25519mlkem768__ml_root__ml_int__ml_leaf"
PRICE = 0.04
CLASSES = {"small_internal": 1e5, "medium_api": 1e7, "high_volume_frontend": 1e8}


def placement(h):
    parts = [p.strip().split(" ") for p in h.split("/")]
    roles = {role: fam for fam, role in parts}
    return roles["root"], roles.get("int"), roles["leaf"]


def load():
    df = pd.read_csv(ROOT / "data" / "paper_fixture.csv")
    df[["root", "int", "leaf"]] = df["hierarchy"].apply(lambda h: pd.Series(placement(h)))
    df["ratio"] = df["server_task_ms"] / df["client_task_ms"]
    return df.set_index("scenario_id", drop=False)


def perf_group(r):
    if r["leaf"] == "SLH":
        return "leaf_slh"
    if r["root"] == "SLH":
        return "root_slh_leaf_ml"
    return "all_ml"


def main():
    df = load()
    base = df.loc[BASELINE]
    out = {}

    out["campaign_a_latency_ratio"] = {
        "classical": df.loc["x25519__leaf_slhdsashake192s", "mean_ms"] / df.loc["x25519__leaf_mldsa65", "mean_ms"],
        "hybrid": df.loc["x25519mlkem768__leaf_slhdsashake192s", "mean_ms"]
        / df.loc["x25519mlkem768__leaf_mldsa65", "mean_ms"],
    }

    d3 = df[(df["kex_mode"] == "hybrid") & (df["depth"] == 3)]
    out["strategy_latency_vs_baseline"] = (d3["mean_ms"] / base["mean_ms"]).to_dict()

    classes = {
        "all_ml": (df["root"] != "SLH") & (df["int"] != "SLH") & (df["leaf"] != "SLH"),
        "root_slh_leaf_not_slh": (df["root"] == "SLH") & (df["leaf"] != "SLH"),
        "intermediate_slh_any": df["int"] == "SLH",
        "leaf_slh": df["leaf"] == "SLH",
    }
    out["placement"] = {
        k: {"n": int(m.sum()), "mean_ms": df[m]["mean_ms"].mean(), "median_ms": df[m]["mean_ms"].median()}
        for k, m in classes.items()
    }

    h = "x25519mlkem768__"
    depth = [
        ("ml_root__ml_leaf", "ml_root__ml_int__ml_leaf"),
        ("slh_root__ml_leaf", "slh_root__ml_int__ml_leaf"),
        ("ml_root__slh_leaf", "ml_root__ml_int__slh_leaf"),
        ("ml_root__slh_leaf", "ml_root__slh_int__slh_leaf"),
        ("slh_root__slh_leaf", "slh_root__ml_int__slh_leaf"),
        ("slh_root__slh_leaf", "slh_root__slh_int__slh_leaf"),
    ]
    out["depth_latency_ratio"] = [df.loc[h + b, "mean_ms"] / df.loc[h + a, "mean_ms"] for a, b in depth]

    kex = [
        ("x25519__leaf_mldsa65", "x25519mlkem768__leaf_mldsa65"),
        ("x25519__leaf_slhdsashake192s", "x25519mlkem768__leaf_slhdsashake192s"),
        ("x25519mlkem768__ml_root__ml_leaf", "mlkem768__ml_root__ml_leaf"),
        ("x25519mlkem768__slh_root__ml_int__ml_leaf", "mlkem768__slh_root__ml_int__ml_leaf"),
        ("x25519mlkem768__slh_root__slh_leaf", "mlkem768__slh_root__slh_leaf"),
    ]
    out["kex_latency_ratio"] = [df.loc[b, "mean_ms"] / df.loc[a, "mean_ms"] for a, b in kex]

    subsets = {"all": df, "non_leaf_slh": df[df["leaf"] != "SLH"], "leaf_slh": df[df["leaf"] == "SLH"]}
    out["correlations_bytes_read"] = {
        k: {
            "n": len(s),
            "pearson": stats.pearsonr(s["bytes_read"], s["mean_ms"])[0],
            "spearman": stats.spearmanr(s["bytes_read"], s["mean_ms"])[0],
        }
        for k, s in subsets.items()
    }

    pairs = []
    for a in df.itertuples():
        for b in df.itertuples():
            if a.bytes_read > b.bytes_read and a.mean_ms < b.mean_ms:
                diff = a.bytes_read - b.bytes_read
                ratio = b.mean_ms / a.mean_ms
                pairs.append((diff * math.log(ratio), a.scenario_id, b.scenario_id, diff, ratio))
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))
    out["counterexamples_top5"] = [
        {"more_bytes": p[1], "fewer_bytes": p[2], "bytes_diff": p[3], "latency_ratio": p[4]} for p in pairs[:5]
    ]

    hps = 1000.0 / df["server_task_ms"]
    out["capacity"] = {
        sid: {"hps": hps[sid], "retained": hps[sid] / hps[BASELINE], "multiplier": hps[BASELINE] / hps[sid]}
        for sid in df.index
    }

    cost = df["server_task_ms"] / 1000.0 * 1e6 / 3600.0 * PRICE
    out["economics"] = {
        sid: {"cost_per_million": cost[sid], "multiplier": cost[sid] / cost[BASELINE]} for sid in df.index
    }

    groups = df.apply(perf_group, axis=1)
    out["service_class_monthly"] = {
        name: {
            g: {
                "mean": 30 * (cost[groups == g] * n / 1e6).mean(),
                "median": 30 * (cost[groups == g] * n / 1e6).median(),
            }
            for g in sorted(groups.unique())
        }
        for name, n in CLASSES.items()
    }

    def regime(r):
        return "overwhelmingly_server_bound" if r > 10 else "client_skewed" if r < 0.5 else "balanced"

    out["regimes"] = {sid: regime(r) for sid, r in df["ratio"].items()}

    def label(x):
        if x <= 1.5:
            return "Reasonable"
        if x <= 20:
            return "Penalized but plausible"
        if x <= 200:
            return "Operationally problematic"
        return "Unsuitable for interactive TLS front-end"

    out["plausibility"] = {sid: label(v) for sid, v in out["strategy_latency_vs_baseline"].items()}

    path = ROOT / "tests" / "data" / "analytics_oracle.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
