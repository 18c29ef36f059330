"""Run a benchmark from a TOML config and print the mean accuracy table.

    python3 scripts/run_benchmark.py scripts/bench.toml runs/demo --workers 4

Equivalent to ``graphssl bench`` followed by a console summary of
``summary.json``.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from graphssl.harness import emit_report, load_config, run_benchmark


def print_table(summary):
    methods = summary["methods"]
    cells = {(a["dataset"], a["feature_set"], a["method"]): a for a in summary["aggregates"]}
    width = max(9, *(len(m) for m in methods))
    print("dataset    fset  " + " ".join(m.rjust(width) for m in methods))
    for ds in summary["datasets"]:
        for fs in summary["feature_sets"]:
            row = []
            for m in methods:
                a = cells.get((ds, fs, m))
                row.append(f"{100 * a['mean']:5.1f}+-{100 * a['std']:4.1f}".rjust(width)
                           if a else "-".rjust(width))
            print(f"{ds[:10]:<10} {fs:>5} " + " ".join(row))
    overall = summary["ranks"]["overall"]
    if "mean_ranks" in overall:
        print("\nmean ranks over", overall["n_cases"], "cases:")
        for m, r in sorted(zip(overall["methods"], overall["mean_ranks"]), key=lambda t: t[1]):
            print(f"  {m:<12} {r:6.2f}")
        if overall.get("nemenyi"):
            print(f"  Nemenyi CD = {overall['nemenyi']['cd']:.3f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--resume", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    config = load_config(args.config, seed=args.seed)
    t0 = time.perf_counter()
    report = run_benchmark(config, args.out, workers=args.workers, resume=args.resume)
    files = emit_report(report, args.out)
    print(f"{len(report.ok_records())} records in {time.perf_counter() - t0:.1f}s")
    with open(Path(files["summary"]), encoding="utf-8") as fh:
        print_table(json.load(fh))
    if not report.complete:
        print(f"{len(report.missing)} cells failed, see summary.json", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
