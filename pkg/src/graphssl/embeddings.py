"""Structural node scores from four autocorrelation-type eigenproblems.

========  ====================================  ===================
kind      problem                               columns
========  ====================================  ===================
moran     H A H x = l x                         largest, centered
geary     L x = l H x                           smallest nontrivial
lpca      (I - P)'(I - P) x = l H x             smallest nontrivial
bopmod    Q_BoP x = l x                         largest nontrivial
========  ====================================  ===================

``L`` and ``(I - P)'(I - P)`` annihilate the constant vector from both
sides, so on centered vectors ``H`` acts as the identity and the
generalized problems reduce to ordinary ones restricted to the subspace
orthogonal to the constant vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigen import symmetric_eigs
from .graph import Graph

__all__ = [
    "Embedding",
    "EmbeddingSpec",
    "EMBEDDING_KINDS",
    "P_FRACTIONS",
    "embed",
    "moran_embedding",
    "geary_embedding",
    "lpca_embedding",
    "bop_modularity_embedding",
    "lpca_matrix",
]

EMBEDDING_KINDS = ("moran", "geary", "lpca", "bopmod")
P_FRACTIONS = (0.05, 0.10, 0.20, 0.35, 0.50)


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: str
    p_fraction: float | None = None
    p: int | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in EMBEDDING_KINDS:
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if (self.p is None) == (self.p_fraction is None):
            raise ValueError("give exactly one of p and p_fraction")
        if self.kind == "bopmod" and (self.theta is None or self.theta <= 0):
            raise ValueError("bopmod embedding needs theta > 0")

    def dimension(self, n: int) -> int:
        # half-up rounding, so that 0.05 * 50 = 2.5 gives 3
        p = self.p if self.p is not None else int(math.floor(self.p_fraction * n + 0.5))
        if p < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {p} for n={n}")
        if p > n - 1:
            raise ValueError(f"embedding dimension {p} exceeds the {n - 1} nontrivial directions")
        return p


@dataclass(frozen=True, eq=False)
class Embedding:
    scores: np.ndarray
    eigenvalues: np.ndarray
    kind: str

    @property
    def p(self) -> int:
        return self.scores.shape[1]


def moran_embedding(graph: Graph, spec: EmbeddingSpec) -> Embedding:
    """Centered scores maximizing Moran's I; ``I(x_k) = n / a.. * l_k``."""
    vals, vecs = symmetric_eigs(graph.adjacency, spec.dimension(graph.n),
                                "largest_nontrivial")
    return Embedding(vecs, vals, "moran")


def geary_embedding(graph: Graph, spec: EmbeddingSpec) -> Embedding:
    """Scores minimizing Geary's c; ``c(x_k) = (n - 1) / a.. * l_k``."""
    vals, vecs = symmetric_eigs(graph.laplacian, spec.dimension(graph.n),
                                "smallest_nontrivial")
    return Embedding(vecs, vals, "geary")


def lpca_matrix(graph: Graph) -> sp.csr_matrix:
    r = sp.identity(graph.n, format="csr") - graph.transition
    m = (r.T @ r).tocsr()
    # P is not symmetric, so the product is only symmetric up to rounding
    return ((m + m.T) / 2).tocsr()


def lpca_embedding(graph: Graph, spec: EmbeddingSpec) -> Embedding:
    """Scores minimizing the contiguity ratio; ``cr(x_k) = l_k``."""
    vals, vecs = symmetric_eigs(lpca_matrix(graph), spec.dimension(graph.n),
                                "smallest_nontrivial")
    return Embedding(vecs, vals, "lpca")


def bop_modularity_embedding(graph: Graph, spec: EmbeddingSpec, context=None) -> Embedding:
    """Leading nontrivial eigenvectors of the bag-of-paths modularity matrix.

    ``context`` may be a precomputed :class:`~graphssl.bop.BopContext` for the
    same graph and ``spec.theta``.
    """
    from .bop import bop_fundamental, bop_modularity_matrix

    if spec.theta is None or spec.theta <= 0:
        raise ValueError("theta must be > 0")
    if context is None:
        context = bop_fundamental(graph, spec.theta)
    q = bop_modularity_matrix(context)
    vals, vecs = symmetric_eigs(q, spec.dimension(graph.n), "largest_nontrivial",
                                dense_max=max(q.shape[0], 1))
    return Embedding(vecs, vals, "bopmod")


_DISPATCH = {
    "moran": moran_embedding,
    "geary": geary_embedding,
    "lpca": lpca_embedding,
    "bopmod": bop_modularity_embedding,
}


def embed(graph: Graph, spec: EmbeddingSpec) -> Embedding:
    return _DISPATCH[spec.kind](graph, spec)
