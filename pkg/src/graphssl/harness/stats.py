"""Friedman rank test and Nemenyi critical differences."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = ["Q_ALPHA_05", "FriedmanResult", "rank_rows", "friedman_test", "nemenyi_cd",
           "nemenyi_pairs"]

# Studentized range quantiles at alpha = 0.05, infinite degrees of freedom,
# divided by sqrt(2); indexed by the number of methods k.
Q_ALPHA_05 = {
    2: 1.960, 3: 2.344, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.948, 8: 3.031,
    9: 3.102, 10: 3.164, 11: 3.219, 12: 3.268, 13: 3.313, 14: 3.354,
    15: 3.391, 16: 3.426, 17: 3.458, 18: 3.489, 19: 3.517, 20: 3.544,
}


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: np.ndarray
    n_cases: int


def rank_rows(scores) -> np.ndarray:
    """Rank each case's methods, 1 for the highest score, ties averaged.

    ``scores`` has shape ``(cases, methods)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    return np.vstack([stats.rankdata(-row, method="average") for row in scores])


def friedman_test(scores) -> FriedmanResult:
    """Friedman test on a ``(cases, methods)`` accuracy table.

    Uses the rank-sum form ``12 N / (k (k+1)) sum_j R_j^2 - 3 N (k+1)``
    with ``k - 1`` degrees of freedom.  A table where every case ties all
    methods gives statistic 0 and p-value 1.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError("scores must be a (cases, methods) table")
    n, k = scores.shape
    if k < 3 or n < 2:
        raise ValueError(f"need k >= 3 methods and N >= 2 cases, got k={k}, N={n}")
    if np.all(scores == scores[:, :1]):
        warnings.warn("all methods tie on every case", RuntimeWarning, stacklevel=2)
    ranks = rank_rows(scores)
    mean_ranks = ranks.mean(axis=0)
    stat = 12.0 * n / (k * (k + 1)) * float(np.sum(mean_ranks ** 2)) - 3.0 * n * (k + 1)
    stat = max(stat, 0.0)
    p = float(stats.chi2.sf(stat, k - 1))
    return FriedmanResult(stat, p, mean_ranks, n)


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference ``q_alpha sqrt(k (k+1) / (6 N))``."""
    if alpha != 0.05:
        raise ValueError("only alpha = 0.05 is tabulated")
    if k not in Q_ALPHA_05:
        raise ValueError(f"k={k} outside the supported range 2..20")
    if n < 1:
        raise ValueError("need at least one case")
    return Q_ALPHA_05[k] * math.sqrt(k * (k + 1) / (6.0 * n))


def nemenyi_pairs(mean_ranks, cd: float) -> np.ndarray:
    """Boolean matrix: ``True`` where two methods' mean ranks differ by more than ``cd``."""
    r = np.asarray(mean_ranks, dtype=np.float64)
    return np.abs(r[:, None] - r[None, :]) > cd
