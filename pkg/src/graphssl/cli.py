"""Command-line entry point: ``graphssl {bench,autocorr,embed,classify,synth}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .classifiers import METHODS, ModelSpec, make_model
from .embeddings import EMBEDDING_KINDS, EmbeddingSpec, embed
from .io import load_dataset, save_dataset
from .spatial import class_autocorrelation_report
from .synthetic import GENERATORS

log = logging.getLogger("graphssl")

_METHOD_IDS = {m.lower(): m for m in METHODS}


def _method(value: str) -> str:
    try:
        return _METHOD_IDS[value.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown method {value!r}; choose from {', '.join(METHODS)}") from None


def _literal(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _params(items) -> dict:
    out = {}
    pairs = [part for item in items or () for part in item.split(",") if part]
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise SystemExit(f"bad parameter {item!r}; expected key=value")
        out[key] = _literal(value)
    return out


def cmd_bench(args) -> int:
    from .harness.bench import load_config, run_benchmark
    from .harness.report import emit_report

    config = load_config(args.config, seed=args.seed)
    report = run_benchmark(config, args.out, workers=args.workers, resume=args.resume)
    files = emit_report(report, args.out)
    for name, path in files.items():
        print(f"{name}: {path}")
    if not report.complete:
        print(f"incomplete: {len(report.missing)} missing cells (see summary.json)",
              file=sys.stderr)
        return 1
    return 0


def cmd_autocorr(args) -> int:
    report = class_autocorrelation_report(load_dataset(args.dataset))
    print(json.dumps(report.to_dict(), indent=2, default=float))
    print(report.to_text())
    return 0


def cmd_embed(args) -> int:
    bundle = load_dataset(args.dataset)
    spec = EmbeddingSpec(args.kind, p_fraction=args.p_frac, theta=args.theta)
    emb = embed(bundle.graph, spec)
    rows = [[str(i)] + [repr(float(v)) for v in s] for i, s in zip(bundle.node_ids, emb.scores)]
    text = "\n".join("\t".join(r) for r in rows) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {emb.p} dimensions for {len(rows)} nodes to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(args) -> int:
    from .harness.cv import CvPlan, make_cv_plan
    from .harness.tuning import MODE_DEFAULTS, accuracy

    bundle = load_dataset(args.dataset)
    params = {**MODE_DEFAULTS[args.method], **_params(args.params)}
    folds = int(round(1.0 / args.labeling_rate))
    if folds < 2:
        raise SystemExit("labeling rate must be at most 0.5")
    split = make_cv_plan(bundle.labels, CvPlan(runs=1, external_folds=folds, inner_folds=2,
                                               seed=args.seed))[0].splits[0]
    classify = make_model(ModelSpec(args.method, params), bundle)
    pred = classify(split.labeled, bundle.labels[split.labeled])
    acc = accuracy(pred[split.test], bundle.labels[split.test])
    print(f"{args.method} {json.dumps(params, sort_keys=True)}: "
          f"labeled={split.labeled.size} test={split.test.size} accuracy={acc:.4f}")
    if args.out:
        is_labeled = np.zeros(len(bundle.labels), dtype=bool)
        is_labeled[split.labeled] = True
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("node\tlabel\tprediction\tlabeled\n")
            for i, t, p, l in zip(bundle.node_ids, bundle.labels, pred, is_labeled):
                fh.write(f"{i}\t{t}\t{p}\t{int(l)}\n")
    return 0


def cmd_synth(args) -> int:
    opts = _params(args.option)
    bundle = GENERATORS[args.kind](seed=args.seed, name=args.kind, **opts)
    path = save_dataset(bundle, args.out, dense=args.dense)
    print(f"wrote {args.kind} dataset ({len(bundle.labels)} nodes) to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphssl",
                                description="Semi-supervised node classification on graphs.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a benchmark described by a TOML file")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    b.add_argument("--resume", action="store_true")
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("autocorr", help="class-membership autocorrelation of a dataset")
    a.add_argument("dataset")
    a.set_defaults(func=cmd_autocorr)

    e = sub.add_parser("embed", help="spectral node embedding")
    e.add_argument("--kind", choices=EMBEDDING_KINDS, required=True)
    e.add_argument("--p-frac", type=float, required=True)
    e.add_argument("--theta", type=float, default=None)
    e.add_argument("--out", default=None)
    e.add_argument("dataset")
    e.set_defaults(func=cmd_embed)

    c = sub.add_parser("classify", help="classify one random labeled/test split")
    c.add_argument("--method", type=_method, required=True)
    c.add_argument("--params", action="append", default=[], metavar="KEY=VALUE[,...]",
                   help="model parameters; repeat the flag or separate pairs with commas")
    c.add_argument("--labeling-rate", type=float, default=0.2)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None)
    c.add_argument("dataset")
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("synth", help="write a seeded synthetic dataset")
    s.add_argument("--kind", choices=sorted(GENERATORS), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--option", action="append", default=[], metavar="KEY=VALUE[,...]",
                   help="generator arguments, e.g. n=400,p_in=0.05")
    s.add_argument("--dense", action="store_true", help="write features.dense.csv")
    s.add_argument("out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
