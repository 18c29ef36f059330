"""Benchmark orchestration: datasets x feature sets x methods x runs x folds.

Results are journaled to ``records.jsonl`` as work units finish, which makes
runs resumable.  ``results.csv`` is rewritten from the journal in a fixed
order at the end, so identical configurations give byte-identical files no
matter how work was scheduled.
"""

from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..classifiers import METHODS, ConstantFeatureWarning, ModelSpec, Workspace, make_model
from ..io import load_dataset
from ..synthetic import GENERATORS
from .cv import CvPlan, make_cv_plan
from .preprocess import FEATURE_SET_SIZES, FeatureSetSpec, build_feature_sets, chi2_rank
from .tuning import DEFAULT_GRIDS, accuracy, grid_search

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

__all__ = ["DatasetConfig", "BenchConfig", "Record", "EvalReport", "load_config",
           "run_benchmark", "RESULT_COLUMNS"]

RESULT_COLUMNS = ("dataset", "feature_set", "method", "run", "fold", "n_labeled",
                  "n_test", "accuracy", "params_json")
ALL_FEATURES = "all"


@dataclass(frozen=True)
class DatasetConfig:
    """A dataset directory, or a synthetic generator with its arguments."""

    name: str
    path: str | None = None
    synthetic: str | None = None
    options: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if (self.path is None) == (self.synthetic is None):
            raise ValueError(f"dataset {self.name!r}: give exactly one of path / synthetic")
        if self.synthetic is not None and self.synthetic not in GENERATORS:
            raise ValueError(f"unknown generator {self.synthetic!r}")

    def load(self):
        if self.path is not None:
            return load_dataset(self.path, name=self.name)
        return GENERATORS[self.synthetic](name=self.name, **self.options)


@dataclass(frozen=True)
class BenchConfig:
    datasets: tuple
    methods: tuple = METHODS
    grids: dict = field(default_factory=dict)
    plan: CvPlan = CvPlan()
    feature_sets: tuple | None = FEATURE_SET_SIZES

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("dataset names must be unique")

    def grid(self, method: str) -> dict:
        return {**DEFAULT_GRIDS[method], **self.grids.get(method, {})}


def load_config(path, seed: int | None = None) -> BenchConfig:
    """Read a TOML benchmark configuration.

    Relative dataset paths are resolved against the configuration file.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    datasets = []
    for d in raw.get("datasets", []):
        d = dict(d)
        name = d.pop("name")
        ds_path = d.pop("path", None)
        if ds_path is not None:
            ds_path = str((path.parent / ds_path).resolve())
        datasets.append(DatasetConfig(name, ds_path, d.pop("synthetic", None), d))
    plan_raw = dict(raw.get("plan", {}))
    if seed is not None:
        plan_raw["seed"] = seed
    elif "seed" in raw:
        plan_raw.setdefault("seed", raw["seed"])
    fs = raw.get("feature_sets", list(FEATURE_SET_SIZES))
    grids = {m: {k: tuple(v) for k, v in g.items()} for m, g in raw.get("grids", {}).items()}
    return BenchConfig(
        datasets=tuple(datasets),
        methods=tuple(raw.get("methods", METHODS)),
        grids=grids,
        plan=CvPlan(**plan_raw),
        feature_sets=tuple(fs) if fs else None,
    )


@dataclass(frozen=True)
class Record:
    dataset: str
    feature_set: str
    method: str
    run: int
    fold: int
    n_labeled: int
    n_test: int
    accuracy: float | None
    params: dict
    error: str | None = None

    @property
    def key(self):
        return (self.dataset, self.feature_set, self.method, self.run, self.fold)

    def to_json(self) -> str:
        return json.dumps({
            "dataset": self.dataset, "feature_set": self.feature_set, "method": self.method,
            "run": self.run, "fold": self.fold, "n_labeled": self.n_labeled,
            "n_test": self.n_test, "accuracy": self.accuracy, "params": self.params,
            "error": self.error}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "Record":
        d = json.loads(line)
        return cls(d["dataset"], d["feature_set"], d["method"], d["run"], d["fold"],
                   d["n_labeled"], d["n_test"], d["accuracy"], d["params"], d.get("error"))

    def csv_row(self) -> list:
        return [self.dataset, self.feature_set, self.method, str(self.run), str(self.fold),
                str(self.n_labeled), str(self.n_test), repr(float(self.accuracy)),
                json.dumps(self.params, sort_keys=True)]


@dataclass
class EvalReport:
    records: list
    config: BenchConfig | None = None
    missing: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.missing

    def ok_records(self) -> list:
        return [r for r in self.records if r.error is None]


# -- worker side -------------------------------------------------------------

_CACHE = {}


def _prepared(ds: DatasetConfig, config: BenchConfig):
    """Dataset, its feature subsets and a graph workspace, cached per process."""
    key = (ds, config.feature_sets)
    if key not in _CACHE:
        bundle = ds.load()
        if config.feature_sets:
            order, _ = chi2_rank(bundle.features, bundle.labels)
            sets = build_feature_sets(bundle, FeatureSetSpec(tuple(config.feature_sets)), order)
        else:
            sets = {ALL_FEATURES: bundle}
        _CACHE.clear()  # one dataset at a time keeps memory bounded
        _CACHE[key] = (bundle, sets, Workspace(bundle.graph))
    return _CACHE[key]


def _run_unit(config: BenchConfig, ds: DatasetConfig, method: str, run: int, skip: frozenset):
    """All feature sets and external folds of one (dataset, method, run)."""
    bundle, sets, ws = _prepared(ds, config)
    run_plan = make_cv_plan(bundle.labels, config.plan)[run]
    grid = config.grid(method)
    out = []
    for fs_label, fs_bundle in sets.items():
        for split in run_plan.splits:
            key = (ds.name, fs_label, method, run, split.fold)
            if key in skip:
                continue
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ConstantFeatureWarning)
                    params, _ = grid_search(method, grid, split, fs_bundle, ws)
                    classify = make_model(ModelSpec(method, params), fs_bundle, ws)
                    pred = classify(split.labeled, fs_bundle.labels[split.labeled])
                acc = accuracy(pred[split.test], fs_bundle.labels[split.test])
                out.append(Record(*key, split.labeled.size, split.test.size, acc, params))
            except Exception as exc:  # recorded as a missing cell, never fatal
                log.warning("%s failed: %s", key, exc)
                out.append(Record(*key, split.labeled.size, split.test.size, None, {},
                                  f"{type(exc).__name__}: {exc}"))
    return out


# -- driver ------------------------------------------------------------------

def _read_journal(path: Path) -> dict:
    done = {}
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = Record.from_json(line)
                    done[rec.key] = rec
    return done


def _sort_key(config: BenchConfig, fs_order: dict):
    ds_index = {d.name: i for i, d in enumerate(config.datasets)}
    m_index = {m: i for i, m in enumerate(config.methods)}

    def key(r: Record):
        return (ds_index.get(r.dataset, 1 << 30), r.dataset,
                fs_order.get(r.feature_set, 1 << 30), r.feature_set,
                m_index.get(r.method, 1 << 30), r.method, r.run, r.fold)
    return key


def run_benchmark(config: BenchConfig, out_dir=None, workers: int = 1,
                  resume: bool = False) -> EvalReport:
    """Run the full factorial benchmark with nested hyperparameter tuning.

    With ``out_dir`` every finished unit is appended to
    ``out_dir/records.jsonl`` and ``results.csv`` is written at the end.
    ``resume`` keeps successful journal records and recomputes the rest.
    """
    journal = None
    done = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        journal = out_dir / "records.jsonl"
        if resume:
            done = {k: r for k, r in _read_journal(journal).items() if r.error is None}
        # rewrite without the failures that are about to be retried
        with open(journal, "w", encoding="utf-8", newline="\n") as fh:
            for rec in done.values():
                fh.write(rec.to_json() + "\n")
    skip = frozenset(done)

    units = [(ds, m, r) for ds in config.datasets for m in config.methods
             for r in range(config.plan.runs)]
    records = dict(done)

    def collect(batch):
        for rec in batch:
            records[rec.key] = rec
        if journal is not None and batch:
            with open(journal, "a", encoding="utf-8", newline="\n") as fh:
                for rec in batch:
                    fh.write(rec.to_json() + "\n")

    if workers <= 1:
        for ds, m, r in units:
            collect(_run_unit(config, ds, m, r, skip))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_unit, config, ds, m, r, skip) for ds, m, r in units]
            for fut in futures:
                collect(fut.result())

    fs_order = {lab: i for i, lab in enumerate(
        [FeatureSetSpec.label(s) for s in (config.feature_sets or ())] + [ALL_FEATURES])}
    ordered = sorted(records.values(), key=_sort_key(config, fs_order))
    missing = [{"key": list(r.key), "reason": r.error} for r in ordered if r.error is not None]
    report = EvalReport(ordered, config, missing)
    if out_dir is not None:
        write_results_csv(report, out_dir / "results.csv")
    return report


def write_results_csv(report: EvalReport, path) -> Path:
    import csv

    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for rec in report.ok_records():
            writer.writerow(rec.csv_row())
    return path
