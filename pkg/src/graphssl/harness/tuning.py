"""Hyperparameter grids and inner-fold grid search."""

from __future__ import annotations

import itertools
import logging
import warnings
from collections import Counter

import numpy as np

from ..classifiers import ConstantFeatureWarning, ModelSpec, Workspace, make_model
from .cv import Split

log = logging.getLogger(__name__)

__all__ = ["C_GRID", "THETA_GRID", "ALPHA_GRID", "P_FRAC_GRID", "DEFAULT_GRIDS",
           "MODE_DEFAULTS", "grid_points", "grid_search", "parameter_modes", "accuracy"]

C_GRID = (1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6)
THETA_GRID = (1e-9, 1e-6, 1e-3, 1.0)
ALPHA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0)
P_FRAC_GRID = (0.05, 0.10, 0.20, 0.35, 0.50)

_SVM = {"C": C_GRID}
_EMB = {"C": C_GRID, "p_frac": P_FRAC_GRID}
_BOPM = {"theta": THETA_GRID, "C": C_GRID, "p_frac": P_FRAC_GRID}

DEFAULT_GRIDS = {
    "BoP-A": {"theta": THETA_GRID},
    "CTK-A": {"alpha": ALPHA_GRID},
    "SVM-M-A": _EMB, "SVM-G-A": _EMB, "SVM-L-A": _EMB, "SVM-BoPM-A": _BOPM,
    "SVM-X": _SVM,
    "SAR-AX": {},
    "SVM-M-AX": _EMB, "SVM-G-AX": _EMB, "SVM-L-AX": _EMB, "SVM-BoPM-AX": _BOPM,
    "ASVM-AX": _SVM,
    "SVM-DK-AX": _SVM,
}

# most frequently selected values in the reference benchmark; used when a
# single model is run without tuning
MODE_DEFAULTS = {
    "BoP-A": {"theta": 1e-6},
    "CTK-A": {"alpha": 0.8},
    "SVM-M-A": {"C": 1e-2, "p_frac": 0.05},
    "SVM-G-A": {"C": 1e-2, "p_frac": 0.05},
    "SVM-L-A": {"C": 1e2, "p_frac": 0.05},
    "SVM-BoPM-A": {"theta": 1.0, "C": 1e3, "p_frac": 0.05},
    "SVM-X": {"C": 1e-2},
    "SAR-AX": {},
    "SVM-M-AX": {"C": 1e2, "p_frac": 0.05},
    "SVM-G-AX": {"C": 1e2, "p_frac": 0.05},
    "SVM-L-AX": {"C": 1e2, "p_frac": 0.05},
    "SVM-BoPM-AX": {"theta": 1.0, "C": 1e3, "p_frac": 0.05},
    "ASVM-AX": {"C": 1.0},
    "SVM-DK-AX": {"C": 1e-4},
}


def grid_points(grid: dict) -> list:
    """Cartesian product in declaration order; the first point is the tie winner."""
    if not grid:
        return [{}]
    keys = list(grid)
    for k in keys:
        if len(grid[k]) == 0:
            raise ValueError(f"empty grid for parameter {k!r}")
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    return float(np.mean(pred == truth)) if truth.size else float("nan")


def grid_search(method: str, grid: dict, split: Split, bundle, workspace: Workspace | None = None,
                fixed: dict | None = None):
    """Select hyperparameters for one external fold by inner cross-validation.

    Only the labeled nodes of ``split`` are used: each inner fold is
    validated with the other inner folds as the labeled set.  Grid points
    whose model raises are skipped.

    Returns ``(best_params, table)`` where ``table`` lists
    ``(params, mean_validation_accuracy)`` for every grid point.
    """
    ws = workspace if workspace is not None else Workspace(bundle)
    points = grid_points(grid)
    fixed = fixed or {}
    if len(points) == 1:
        return {**fixed, **points[0]}, [(points[0], float("nan"))]
    labels = bundle.labels
    table = []
    for point in points:
        params = {**fixed, **point}
        classify = make_model(ModelSpec(method, params), bundle, ws)
        accs = []
        try:
            for train, valid in split.inner_splits():
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ConstantFeatureWarning)
                    pred = classify(train, labels[train])
                accs.append(accuracy(pred[valid], labels[valid]))
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            log.debug("%s %s skipped: %s", method, params, exc)
            table.append((point, float("nan")))
            continue
        table.append((point, float(np.mean(accs))))
    scores = np.array([s for _, s in table])
    if np.all(np.isnan(scores)):
        raise RuntimeError(f"{method}: every grid point failed")
    best = int(np.nanargmax(scores))  # first maximum = earliest in grid order
    return {**fixed, **points[best]}, table


def parameter_modes(selections: list) -> dict:
    """Most frequent value of each parameter with its share of selections.

    Ties go to the smallest value.
    """
    out = {}
    keys = sorted({k for s in selections for k in s})
    for k in keys:
        counts = Counter(s[k] for s in selections if k in s)
        top = max(counts.values())
        value = min(v for v, c in counts.items() if c == top)
        out[k] = (value, top / sum(counts.values()))
    return out
