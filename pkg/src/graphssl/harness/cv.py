"""Fold plans for repeated nested cross-validation.

In every run the nodes are dealt into ``external_folds`` folds.  Each
external fold in turn is the labeled set (20% of the nodes with five folds)
and the remaining nodes are the test set.  The labeled set is itself split
into ``inner_folds`` folds that drive hyperparameter selection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

__all__ = ["CvPlan", "RunPlan", "Split", "make_cv_plan", "assign_folds"]


@dataclass(frozen=True)
class CvPlan:
    runs: int = 5
    external_folds: int = 5
    inner_folds: int = 5
    seed: int = 0
    stratify: bool = True
    max_attempts: int = 100

    @property
    def labeling_rate(self) -> float:
        return 1.0 / self.external_folds


@dataclass(frozen=True, eq=False)
class Split:
    """Labeled/test node indices of one external fold."""

    run: int
    fold: int
    labeled: np.ndarray
    test: np.ndarray
    inner: np.ndarray = field(repr=False)  # inner fold id per labeled node

    def inner_splits(self):
        """Yield ``(train, validation)`` node indices for each inner fold."""
        for k in np.unique(self.inner):
            yield self.labeled[self.inner != k], self.labeled[self.inner == k]


@dataclass(frozen=True, eq=False)
class RunPlan:
    run: int
    fold_of: np.ndarray
    splits: list


def assign_folds(labels, k: int, rng: np.random.Generator, stratify: bool = True) -> np.ndarray:
    """Fold id per item; with ``stratify`` each class is spread round-robin."""
    labels = np.asarray(labels)
    n = labels.size
    if stratify:
        order = []
        for c in np.unique(labels):
            members = np.flatnonzero(labels == c)
            order.append(rng.permutation(members))
        order = np.concatenate(order)
    else:
        order = rng.permutation(n)
    folds = np.empty(n, dtype=np.int64)
    folds[order] = (np.arange(n) + rng.integers(k)) % k
    return folds


def _all_classes_everywhere(labels, folds, k):
    classes = np.unique(labels)
    return all(np.unique(labels[folds == f]).size == classes.size for f in range(k))


def make_cv_plan(labels, plan: CvPlan = CvPlan()) -> list:
    """Realize ``plan`` for a labeled node set; returns one :class:`RunPlan` per run."""
    labels = np.asarray(labels)
    n = labels.size
    if n < 25:
        raise ValueError(f"need at least 25 nodes for nested cross-validation, got {n}")
    out = []
    for run in range(plan.runs):
        rng = np.random.default_rng([plan.seed, run])
        for attempt in range(plan.max_attempts):
            fold_of = assign_folds(labels, plan.external_folds, rng, plan.stratify)
            if _all_classes_everywhere(labels, fold_of, plan.external_folds):
                break
        else:
            log.warning("run %d: some labeled fold lacks a class after %d draws",
                        run, plan.max_attempts)
        splits = []
        for f in range(plan.external_folds):
            labeled = np.flatnonzero(fold_of == f)
            test = np.flatnonzero(fold_of != f)
            inner = assign_folds(labels[labeled], plan.inner_folds, rng, plan.stratify)
            splits.append(Split(run, f, labeled, test, inner))
        out.append(RunPlan(run, fold_of, splits))
    return out
