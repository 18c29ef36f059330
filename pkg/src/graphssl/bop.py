"""Bag-of-paths framework: fundamental matrix, modularity and group betweenness.

Paths are weighted by a Boltzmann factor: with the random-walk reference
probabilities ``p_ij`` and edge costs ``c_ij``, a single step carries weight
``w_ij = p_ij exp(-theta c_ij)`` and the fundamental matrix
``Z = (I - W)^-1 = sum_t W^t`` accumulates the weights of all paths between
every pair of nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._util import argmax_lowest
from .graph import Graph

log = logging.getLogger(__name__)

__all__ = [
    "BopError",
    "BopContext",
    "THETA_GRID",
    "MAX_NODES",
    "bop_fundamental",
    "bop_modularity_matrix",
    "bop_group_betweenness",
    "bop_group_betweenness_classify",
]

THETA_GRID = (1e-9, 1e-6, 1e-3, 1.0)
MAX_NODES = 5000


class BopError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BopContext:
    theta: float
    W: sp.csr_matrix
    Z: np.ndarray

    @property
    def n(self) -> int:
        return self.Z.shape[0]


def bop_fundamental(graph: Graph, theta: float, max_nodes: int = MAX_NODES,
                    check: bool = True) -> BopContext:
    """Fundamental matrix ``Z = (I - W)^-1`` by a dense LU solve."""
    if not theta > 0:
        raise BopError(f"theta must be > 0, got {theta}")
    n = graph.n
    if n > max_nodes:
        raise BopError(f"bag-of-paths needs a dense {n}x{n} solve; limit is {max_nodes} nodes")
    p = graph.transition
    # P and C share the adjacency's sorted sparsity pattern
    w = sp.csr_matrix((p.data * np.exp(-theta * graph.costs.data), p.indices, p.indptr),
                      shape=p.shape)
    system = np.eye(n) - w.toarray()
    try:
        lu = sla.lu_factor(system, check_finite=True)
        z = sla.lu_solve(lu, np.eye(n))
    except (sla.LinAlgError, ValueError) as exc:
        raise BopError(f"cannot solve (I - W) Z = I: {exc}") from exc
    if not np.all(np.isfinite(z)):
        raise BopError("(I - W) is numerically singular")
    if check:
        res = np.abs(system @ z - np.eye(n)).max(axis=0)
        scale = 1e-10 * np.maximum(1.0, np.abs(z).sum(axis=0))
        if np.any(res > scale):
            raise BopError(f"fundamental matrix residual {res.max():.3e} too large")
    # Z is a sum of nonnegative matrices; LU can leave tiny negative residue
    np.maximum(z, 0.0, out=z)
    return BopContext(float(theta), w, z)


def bop_modularity_matrix(ctx: BopContext) -> np.ndarray:
    """``Q = Z - (Z e)(e' Z) / (e' Z e)``, symmetrized."""
    z = ctx.Z
    row = z.sum(axis=1)
    col = z.sum(axis=0)
    total = row.sum()
    if not total > 0:
        raise BopError("e'Ze must be positive")
    q = z - np.outer(row, col) / total
    return (q + q.T) / 2


def bop_group_betweenness(ctx: BopContext, labeled: dict) -> tuple[list, np.ndarray]:
    """Group betweenness of every node with respect to each class.

    For class ``c`` with labeled nodes ``L_c``, node ``i`` scores::

        1 / (z_ii N_c) * sum_{j != k in L_c \\ {i}} z_ji z_ik / z_jk

    where ``N_c`` is the number of ordered pairs in the sum.  A class with a
    single labeled node only has the pair ``(j, j)``, which is used then.
    Scores are meant for unlabeled nodes; for a labeled ``i`` the pairs
    starting or ending at ``i`` itself are not removed.

    Returns
    -------
    classes : list
        Keys of ``labeled`` in sorted order.
    scores : ndarray, shape (n, n_classes)
    """
    z = ctx.Z
    n = z.shape[0]
    classes = sorted(labeled)
    scores = np.zeros((n, len(classes)))
    diag = np.diag(z)
    for col, c in enumerate(classes):
        members = np.unique(np.asarray(list(labeled[c]), dtype=np.int64))
        if members.size == 0:
            raise BopError(f"class {c} has no labeled node")
        inv = 1.0 / z[np.ix_(members, members)]
        if members.size > 1:
            np.fill_diagonal(inv, 0.0)
        into = z[members, :].T      # into[i, j] = z_ji
        out = z[:, members]         # out[i, k] = z_ik
        total = np.einsum("ij,jk,ik->i", into, inv, out)
        pairs = float(max(members.size * (members.size - 1), 1))
        scores[:, col] = total / (diag * pairs)
    return classes, scores


def bop_group_betweenness_classify(ctx: BopContext, labeled: dict, targets):
    """Assign each target to the class of highest group betweenness.

    ``labeled`` maps class id to an iterable of labeled node indices.
    Ties go to the smallest class id.

    Returns
    -------
    predictions : ndarray
        Class id per target.
    scores : ndarray, shape (len(targets), n_classes)
    """
    targets = np.asarray(targets, dtype=np.int64)
    labeled_nodes = set()
    for c, nodes in labeled.items():
        labeled_nodes.update(int(i) for i in nodes)
    clash = labeled_nodes.intersection(targets.tolist())
    if clash:
        raise BopError(f"target node(s) {sorted(clash)[:5]} are also labeled")
    classes, scores = bop_group_betweenness(ctx, labeled)
    scores = scores[targets]
    return np.asarray(classes)[argmax_lowest(scores)], scores
