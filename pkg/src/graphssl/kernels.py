"""Node kernels and the sum-of-similarities classifier.

The regularized commute-time kernel is ``K = (D - alpha A)^-1``.  Entry
``k_ij`` is the discounted number of visits to ``j`` of a random walk from
``i`` that survives each step with probability ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._util import argmax_lowest
from .graph import Graph

__all__ = [
    "KernelError",
    "KernelMatrix",
    "ALPHA_GRID",
    "DENSE_MAX",
    "rctk",
    "rctk_system",
    "linear_feature_kernel",
    "class_indicators",
    "sum_of_similarities_scores",
    "sum_of_similarities_classify",
]

ALPHA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0)
DENSE_MAX = 5000


class KernelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    K: np.ndarray
    kind: str


def rctk_system(graph: Graph, alpha: float) -> sp.csc_matrix:
    if not 0 < alpha <= 1:
        raise KernelError(f"alpha must lie in (0, 1], got {alpha}")
    return sp.csc_matrix(sp.diags(graph.degree) - alpha * graph.adjacency)


def _factor(system: sp.csc_matrix, alpha: float):
    # at alpha = 1 the system is the Laplacian, singular on every connected graph
    if alpha >= 1.0:
        raise KernelError("D - A is singular (alpha = 1); no commute-time kernel exists")
    try:
        return spla.splu(system)
    except RuntimeError as exc:
        raise KernelError(f"cannot factor D - alpha A: {exc}") from exc


def _solve(system, lu, rhs, tol=1e-10):
    sol = lu.solve(rhs)
    res = np.abs(system @ sol - rhs).max(axis=0)
    if not np.all(np.isfinite(sol)) or np.any(res > tol * np.maximum(1.0, np.abs(sol).max(axis=0))):
        raise KernelError("solve of (D - alpha A) failed the residual check")
    return sol


def rctk(graph: Graph, alpha: float, max_nodes: int = DENSE_MAX) -> KernelMatrix:
    """Dense regularized commute-time kernel."""
    system = rctk_system(graph, alpha)
    if graph.n > max_nodes:
        raise KernelError(
            f"dense kernel for {graph.n} nodes exceeds {max_nodes}; "
            "use sum_of_similarities_scores instead")
    lu = _factor(system, alpha)
    k = _solve(system, lu, np.eye(graph.n))
    return KernelMatrix((k + k.T) / 2, "rctk")


def linear_feature_kernel(features) -> KernelMatrix:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return KernelMatrix(x @ x.T, "linear_features")


def class_indicators(n: int, labeled: dict) -> tuple[list, np.ndarray]:
    """One indicator column per class (sorted), ones on its labeled nodes."""
    classes = sorted(labeled)
    y = np.zeros((n, len(classes)))
    for col, c in enumerate(classes):
        nodes = np.asarray(list(labeled[c]), dtype=np.int64)
        if nodes.size == 0:
            raise KernelError(f"class {c} has no labeled node")
        y[nodes, col] = 1.0
    return classes, y


def sum_of_similarities_scores(kernel_or_graph, labeled: dict, alpha: float | None = None,
                               normalize: bool = False):
    """Scores ``K y^c`` for every node and class.

    ``kernel_or_graph`` is either a kernel (ndarray or :class:`KernelMatrix`)
    or a :class:`Graph`; for a graph the commute-time scores are obtained by
    solving ``(D - alpha A) s = y^c`` without forming ``K``.  With
    ``normalize`` each class column is divided by its labeled count.
    """
    if isinstance(kernel_or_graph, Graph):
        if alpha is None:
            raise KernelError("alpha is required when scoring from a graph")
        n = kernel_or_graph.n
        classes, y = class_indicators(n, labeled)
        system = rctk_system(kernel_or_graph, alpha)
        scores = _solve(system, _factor(system, alpha), y)
    else:
        k = kernel_or_graph.K if isinstance(kernel_or_graph, KernelMatrix) else np.asarray(kernel_or_graph)
        classes, y = class_indicators(k.shape[0], labeled)
        scores = k @ y
    if normalize:
        scores = scores / y.sum(axis=0, keepdims=True)
    return classes, scores


def sum_of_similarities_classify(kernel_or_graph, labeled: dict, targets,
                                 alpha: float | None = None, normalize: bool = False):
    """Assign each target to the class with the largest sum of similarities.

    Ties go to the smallest class id.  Returns ``(predictions, scores)``
    where ``scores`` has one row per target.
    """
    targets = np.asarray(targets, dtype=np.int64)
    classes, scores = sum_of_similarities_scores(kernel_or_graph, labeled, alpha, normalize)
    scores = scores[targets]
    return np.asarray(classes)[argmax_lowest(scores)], scores
