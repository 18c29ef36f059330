"""Aggregation, rank statistics and report files for a benchmark run."""

from __future__ import annotations

import csv
import json
import math
import warnings
from collections import defaultdict
from pathlib import Path

import numpy as np

from .bench import EvalReport, write_results_csv
from .stats import friedman_test, nemenyi_cd, nemenyi_pairs, rank_rows
from .tuning import parameter_modes

__all__ = ["aggregate", "rank_table", "summarize", "cd_groups", "plot_cd_diagram",
           "emit_report", "OVERALL"]

OVERALL = "overall"


def _order(values, preferred=()):
    seen = list(dict.fromkeys(v for v in preferred if v in values))
    return seen + sorted(set(values) - set(seen))


def aggregate(records) -> list:
    """Mean and pooled standard deviation (ddof 1) per dataset, feature set and method."""
    groups = defaultdict(list)
    for r in records:
        if r.error is None:
            groups[(r.dataset, r.feature_set, r.method)].append(r.accuracy)
    out = []
    for (ds, fs, m), accs in groups.items():
        a = np.asarray(accs)
        out.append({"dataset": ds, "feature_set": fs, "method": m, "n": int(a.size),
                    "mean": float(a.mean()),
                    "std": float(a.std(ddof=1)) if a.size > 1 else 0.0})
    return out


def rank_table(records, methods, feature_set=None):
    """Fold-mean accuracy table with cases ``(dataset, feature_set, run)``.

    Cases lacking any of ``methods`` are dropped.  Returns
    ``(cases, scores, dropped)`` with ``scores`` of shape (cases, methods).
    """
    cells = defaultdict(list)
    for r in records:
        if r.error is None and (feature_set is None or r.feature_set == feature_set):
            cells[(r.dataset, r.feature_set, r.run, r.method)].append(r.accuracy)
    case_keys = sorted({k[:3] for k in cells}, key=lambda c: (c[0], c[1], c[2]))
    cases, rows, dropped = [], [], 0
    for c in case_keys:
        row = [cells.get((*c, m)) for m in methods]
        if any(v is None for v in row):
            dropped += 1
            continue
        cases.append(c)
        rows.append([float(np.mean(v)) for v in row])
    scores = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(methods))
    return cases, scores, dropped


def _rank_summary(records, methods, feature_set=None) -> dict:
    cases, scores, dropped = rank_table(records, methods, feature_set)
    k, n = len(methods), len(cases)
    out = {"methods": list(methods), "n_cases": n, "dropped_cases": dropped}
    if k < 2 or n < 1:
        out["error"] = f"need at least 2 methods and 1 complete case (k={k}, N={n})"
        return out
    mean_ranks = rank_rows(scores).mean(axis=0)
    out["mean_ranks"] = [float(v) for v in mean_ranks]
    if k >= 3 and n >= 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fr = friedman_test(scores)
        out["friedman"] = {"statistic": fr.statistic, "p_value": fr.p_value, "df": k - 1}
    else:
        out["friedman"] = None  # undefined below 3 methods or 2 cases
    if k <= 20:
        cd = nemenyi_cd(k, n)
        sig = nemenyi_pairs(mean_ranks, cd)
        out["nemenyi"] = {
            "cd": cd,
            "significant_pairs": [[methods[i], methods[j]] for i in range(k)
                                  for j in range(i + 1, k) if sig[i, j]],
        }
    return out


def summarize(report: EvalReport) -> dict:
    """Everything that goes into ``summary.json``."""
    records = report.ok_records()
    cfg = report.config
    methods = _order({r.method for r in records}, cfg.methods if cfg else ())
    fsets = _order({r.feature_set for r in records},
                   [f"{s}F" for s in (cfg.feature_sets or ())] if cfg else ())
    datasets = _order({r.dataset for r in records},
                      [d.name for d in cfg.datasets] if cfg else ())

    aggs = aggregate(records)
    ds_i = {d: i for i, d in enumerate(datasets)}
    fs_i = {f: i for i, f in enumerate(fsets)}
    m_i = {m: i for i, m in enumerate(methods)}
    aggs.sort(key=lambda a: (ds_i[a["dataset"]], fs_i[a["feature_set"]], m_i[a["method"]]))

    ranks = {fs: _rank_summary(records, methods, fs) for fs in fsets}
    ranks[OVERALL] = _rank_summary(records, methods)

    modes = {}
    for m in methods:
        chosen = [r.params for r in records if r.method == m]
        modes[m] = {k: {"value": v, "share": s} for k, (v, s) in parameter_modes(chosen).items()}

    return {
        "complete": report.complete,
        "n_records": len(records),
        "datasets": datasets,
        "feature_sets": fsets,
        "methods": methods,
        "aggregates": aggs,
        "ranks": ranks,
        "parameter_modes": modes,
        "missing": report.missing,
    }


def cd_groups(mean_ranks, cd: float) -> list:
    """Maximal runs of rank-sorted methods spanning at most ``cd``.

    Returns index pairs ``(first, last)`` into the sorted order; single
    methods are not reported.
    """
    r = np.sort(np.asarray(mean_ranks, dtype=np.float64))
    spans = []
    for i in range(r.size):
        j = int(np.searchsorted(r, r[i] + cd, side="right")) - 1
        if j > i and not (spans and spans[-1][1] >= j):
            spans.append((i, j))
    return spans


def plot_cd_diagram(methods, mean_ranks, cd: float, path, title: str | None = None):
    """Critical-difference diagram as a standalone SVG.

    Methods sit on a rank axis (best on the left), the CD bar is drawn
    above the axis and methods whose ranks differ by less than CD are
    joined by a thick line.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    methods = list(methods)
    ranks = np.asarray(mean_ranks, dtype=np.float64)
    k = len(methods)
    order = np.argsort(ranks, kind="stable")
    lo, hi = 1, max(k, 2)
    half = (k + 1) // 2
    height = 1.6 + 0.32 * half

    with matplotlib.rc_context({"svg.hashsalt": "graphssl", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, height))
        ax.set_xlim(lo - 0.6, hi + 0.6)
        ax.set_ylim(-(half + 1.2), 1.6)
        ax.axis("off")
        ax.hlines(0, lo, hi, color="black", lw=1)
        for t in range(lo, hi + 1):
            ax.vlines(t, 0, 0.12, color="black", lw=1)
            ax.text(t, 0.2, str(t), ha="center", va="bottom", fontsize=9)
        # CD bar
        ax.hlines(1.2, lo, lo + cd, color="black", lw=1.5)
        ax.vlines([lo, lo + cd], 1.1, 1.3, color="black", lw=1.5)
        ax.text(lo + cd / 2, 1.35, f"CD = {cd:.2f}", ha="center", va="bottom", fontsize=9)
        for pos, idx in enumerate(order):
            x = ranks[idx]
            left = pos < half
            row = pos if left else k - 1 - pos
            y = -(row + 1) * 0.6
            xt = lo - 0.4 if left else hi + 0.4
            ax.plot([x, x, xt], [0, y, y], color="black", lw=0.8)
            ax.text(xt - 0.05 if left else xt + 0.05, y, f"{methods[idx]} ({x:.2f})",
                    ha="right" if left else "left", va="center", fontsize=8)
        sorted_ranks = ranks[order]
        for g, (i, j) in enumerate(cd_groups(ranks, cd)):
            y = -0.15 - 0.12 * g
            ax.hlines(y, sorted_ranks[i] - 0.03, sorted_ranks[j] + 0.03, color="tab:red", lw=3)
        if title:
            ax.set_title(title, fontsize=10)
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
        plt.close(fig)
    return Path(path)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(o):
    # NaN is not valid JSON
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def emit_report(report: EvalReport, out_dir, formats=("csv", "json", "ranks", "svg")) -> dict:
    """Write the requested report files into ``out_dir``; returns name -> path."""
    if not report.records:
        raise ValueError("empty report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    if "csv" in formats:
        written["results"] = write_results_csv(report, out_dir / "results.csv")
    summary = summarize(report) if set(formats) - {"csv"} else None
    if "json" in formats:
        path = out_dir / "summary.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_clean(summary), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        written["summary"] = path
    if "ranks" in formats:
        path = out_dir / "ranks.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scope", "method", "mean_rank", "n_cases"])
            for scope, res in summary["ranks"].items():
                for m, r in zip(res["methods"], res.get("mean_ranks", [])):
                    w.writerow([scope, m, repr(float(r)), res["n_cases"]])
        written["ranks"] = path
    if "svg" in formats:
        res = summary["ranks"][OVERALL]
        if "nemenyi" in res:
            written["cd_diagram"] = plot_cd_diagram(
                res["methods"], res["mean_ranks"], res["nemenyi"]["cd"],
                out_dir / "cd_diagram.svg",
                title=f"N = {res['n_cases']} cases")
    return written
