"""Feature ranking and nested feature subsets."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..graph import DatasetBundle

log = logging.getLogger(__name__)

__all__ = ["FEATURE_SET_SIZES", "FeatureSetSpec", "binarize", "chi2_rank",
           "build_feature_sets"]

FEATURE_SET_SIZES = (5, 10, 25, 50, 100)


@dataclass(frozen=True)
class FeatureSetSpec:
    sizes: tuple = FEATURE_SET_SIZES

    def __post_init__(self):
        if list(self.sizes) != sorted(set(self.sizes)) or min(self.sizes) < 1:
            raise ValueError("feature-set sizes must be positive and increasing")

    @staticmethod
    def label(size: int) -> str:
        return f"{size}F"


def binarize(column: np.ndarray) -> np.ndarray:
    """Presence indicator for 0/1-like columns, above-median indicator otherwise."""
    values = np.unique(column)
    if values.size <= 2 and (values.size == 1 or 0.0 in values):
        return column != 0
    return column > np.median(column)


def chi2_rank(features, labels):
    """Rank features by the chi-square statistic of (binarized feature, class).

    Returns ``(order, statistics)``: feature indices sorted by decreasing
    statistic (ties by index) and the per-feature statistic.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes, y = np.unique(labels, return_inverse=True)
    n, m = x.shape
    class_counts = np.bincount(y, minlength=classes.size).astype(np.float64)
    stats = np.zeros(m)
    for j in range(m):
        b = binarize(x[:, j])
        on = np.bincount(y[b], minlength=classes.size).astype(np.float64)
        observed = np.vstack([on, class_counts - on])
        row = observed.sum(axis=1, keepdims=True)
        if np.any(row == 0):
            continue  # constant after binarization: no association
        expected = row * class_counts[None, :] / n
        ok = expected > 0
        stats[j] = float(np.sum((observed[ok] - expected[ok]) ** 2 / expected[ok]))
    order = np.lexsort((np.arange(m), -stats))
    return order, stats


def build_feature_sets(bundle: DatasetBundle, spec: FeatureSetSpec = FeatureSetSpec(),
                       order=None) -> dict:
    """Nested top-k feature subsets, keyed by label (``"5F"``, ...).

    Sizes larger than the number of available features are dropped; the
    largest kept set is the largest size that fits.
    """
    m = bundle.features.shape[1]
    if m == 0:
        raise ValueError("dataset has no features")
    if order is None:
        order, _ = chi2_rank(bundle.features, bundle.labels)
    sizes = [s for s in spec.sizes if s <= m]
    if len(sizes) < len(spec.sizes):
        log.warning("%s: only %d features; largest set is %s", bundle.name, m,
                    FeatureSetSpec.label(sizes[-1]) if sizes else "none")
    if not sizes:
        sizes = [m]
    out = {}
    for s in sizes:
        cols = order[:s]
        out[FeatureSetSpec.label(s)] = bundle.with_features(
            bundle.features[:, cols], bundle.feature_names[cols])
    return out
