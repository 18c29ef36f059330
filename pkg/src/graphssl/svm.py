"""Linear SVM trained by dual coordinate descent, one-vs-one for multiclass.

Each binary problem is the L2-regularized hinge-loss SVM

    min_w  1/2 |w|^2 + C sum_i max(0, 1 - y_i w'x_i)

with the bias folded into ``w`` through a constant feature.  The dual is
solved one coordinate at a time with the box constraint ``0 <= a_i <= C``
(Hsieh et al., ICML 2008), with shrinking of coordinates stuck at a bound.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numba
import numpy as np

__all__ = ["LinearSvmModel", "train_linear_svm", "predict", "decision_votes", "dual_cd"]

MAX_EPOCHS = 1000
TOL = 1e-4


@numba.njit(cache=True)
def _duality_gap(x, y, alpha, w, c):
    n = x.shape[0]
    hinge = 0.0
    for i in range(n):
        m = 1.0 - y[i] * np.dot(w, x[i])
        if m > 0.0:
            hinge += m
    ww = np.dot(w, w)
    primal = 0.5 * ww + c * hinge
    dual = alpha.sum() - 0.5 * ww
    return primal, primal - dual


@numba.njit(cache=True)
def dual_cd(x, y, c, max_epochs, tol, seed):
    """Dual coordinate descent for the hinge-loss linear SVM.

    Stops once the duality gap is below ``tol * max(1, primal)``.  Returns
    ``(w, alpha, epochs, gap)``.
    """
    n, d = x.shape
    np.random.seed(seed)
    alpha = np.zeros(n)
    w = np.zeros(d)
    qii = np.empty(n)
    for i in range(n):
        qii[i] = np.dot(x[i], x[i])
    active = np.arange(n)
    n_active = n
    pg_max_old = np.inf
    pg_min_old = -np.inf
    gap = np.inf
    epoch = 0
    while epoch < max_epochs:
        epoch += 1
        np.random.shuffle(active[:n_active])
        pg_max = -np.inf
        pg_min = np.inf
        s = 0
        while s < n_active:
            i = active[s]
            g = y[i] * np.dot(w, x[i]) - 1.0
            pg = 0.0
            if alpha[i] == 0.0:
                if g > pg_max_old:
                    # shrink: stuck at the lower bound
                    n_active -= 1
                    active[s], active[n_active] = active[n_active], active[s]
                    continue
                if g < 0.0:
                    pg = g
            elif alpha[i] == c:
                if g < pg_min_old:
                    n_active -= 1
                    active[s], active[n_active] = active[n_active], active[s]
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if abs(pg) > 1e-12 and qii[i] > 0.0:
                old = alpha[i]
                new = min(max(old - g / qii[i], 0.0), c)
                alpha[i] = new
                delta = (new - old) * y[i]
                for k in range(d):
                    w[k] += delta * x[i, k]
            s += 1
        primal, gap = _duality_gap(x, y, alpha, w, c)
        if gap <= tol * max(1.0, primal):
            break
        if n_active < n and pg_max - pg_min <= tol:
            # shrunk problem solved but the full one is not: unshrink
            n_active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    return w, alpha, epoch, gap


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    """One-vs-one collection of binary linear SVMs.

    ``weights[k]`` and ``biases[k]`` separate ``pairs[k] = (a, b)``; a
    positive decision value votes for class ``a``.
    """

    classes: np.ndarray
    pairs: list
    weights: np.ndarray
    biases: np.ndarray
    C: float

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return x @ self.weights.T + self.biases


def train_linear_svm(x, y, C: float = 1.0, max_epochs: int = MAX_EPOCHS,
                     tol: float = TOL, seed: int = 0) -> LinearSvmModel:
    """Train ``q (q - 1) / 2`` pairwise linear SVMs."""
    if not C > 0:
        raise ValueError(f"C must be > 0, got {C}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (samples, features) with one label per sample")
    classes = np.unique(y)
    d = x.shape[1]
    if classes.size < 2:
        warnings.warn("single-class training set; the model predicts that class",
                      stacklevel=2)
        return LinearSvmModel(classes, [], np.zeros((0, d)), np.zeros(0), C)
    xb = np.hstack([x, np.ones((x.shape[0], 1))])
    pairs, weights, biases = [], [], []
    for a, b in itertools.combinations(classes, 2):
        rows = np.flatnonzero((y == a) | (y == b))
        sign = np.where(y[rows] == a, 1.0, -1.0)
        w, _, _, _ = dual_cd(xb[rows], sign, float(C), max_epochs, tol, seed)
        pairs.append((a, b))
        weights.append(w[:d])
        biases.append(w[d])
    return LinearSvmModel(classes, pairs, np.array(weights), np.array(biases), C)


def decision_votes(model: LinearSvmModel, x) -> np.ndarray:
    """Pairwise vote counts, shape ``(samples, classes)``."""
    x = np.asarray(x, dtype=np.float64)
    votes = np.zeros((x.shape[0], model.classes.size), dtype=np.int64)
    if not model.pairs:
        votes[:, 0] = 1
        return votes
    dec = model.decision_function(x)
    index = {c: k for k, c in enumerate(model.classes.tolist())}
    for k, (a, b) in enumerate(model.pairs):
        win_a = dec[:, k] > 0
        votes[win_a, index[a.item()]] += 1
        votes[~win_a, index[b.item()]] += 1
    return votes


def predict(model: LinearSvmModel, x) -> np.ndarray:
    """Majority vote over pairs; ties go to the smallest class id."""
    return model.classes[np.argmax(decision_votes(model, x), axis=1)]
