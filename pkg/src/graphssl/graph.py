"""Undirected weighted graphs and the matrices derived from them.

Everything downstream (autocorrelation indexes, embeddings, kernels,
classifiers) consumes a :class:`Graph`.  Matrices are stored as CSR with
sorted indices so that every numerical routine iterates in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

__all__ = [
    "Graph",
    "GraphError",
    "DatasetBundle",
    "build_graph",
    "from_undirected",
    "default_costs",
    "laplacian",
    "transition_matrix",
    "degree",
    "is_connected",
]

# weights below this are treated as missing edges (c = 1/a would overflow)
WEIGHT_EPS = 1e-12


class GraphError(ValueError):
    """Raised for malformed graphs or degenerate graph operations."""


def _canonical(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.float64)
    m.eliminate_zeros()
    m.sum_duplicates()
    m.sort_indices()
    return m


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    Parameters
    ----------
    adjacency : scipy.sparse matrix
        Symmetric, nonnegative, zero diagonal.
    costs : scipy.sparse matrix, optional
        Transition costs with the same support as ``adjacency``.  Defaults
        to ``1 / a_ij`` on every edge.
    """

    adjacency: sp.csr_matrix
    costs: sp.csr_matrix = field(default=None)

    def __post_init__(self):
        a = _canonical(self.adjacency)
        if a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency must be square, got {a.shape}")
        if a.nnz and a.data.min() < 0:
            raise GraphError("adjacency has negative weights")
        if a.diagonal().any():
            raise GraphError("adjacency has self-loops")
        if (a != a.T).nnz:
            raise GraphError("adjacency is not symmetric")
        object.__setattr__(self, "adjacency", a)
        c = default_costs(a) if self.costs is None else _canonical(self.costs)
        if c.shape != a.shape or not _same_support(a, c):
            raise GraphError("costs must be defined exactly on the edges")
        if c.nnz and c.data.min() <= 0:
            raise GraphError("costs must be positive")
        object.__setattr__(self, "costs", c)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @cached_property
    def volume(self) -> float:
        """Sum of all adjacency entries, a••."""
        return float(self.degree.sum())

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        return laplacian(self)

    @cached_property
    def transition(self) -> sp.csr_matrix:
        return transition_matrix(self)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def permuted(self, perm) -> "Graph":
        """Relabel nodes so that new node ``k`` is old node ``perm[k]``."""
        perm = np.asarray(perm)
        return Graph(self.adjacency[perm][:, perm], self.costs[perm][:, perm])


def _same_support(a: sp.csr_matrix, b: sp.csr_matrix) -> bool:
    return (
        a.nnz == b.nnz
        and np.array_equal(a.indptr, b.indptr)
        and np.array_equal(a.indices, b.indices)
    )


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    """A graph together with node features and class labels.

    ``labels`` holds the raw class ids; ``classes`` is their sorted unique
    set, so ``classes[k]`` is the class encoded as ``k`` internally.
    """

    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    node_ids: np.ndarray = None
    feature_names: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.labels)
        if x.shape[0] != self.graph.n or y.shape[0] != self.graph.n:
            raise GraphError(
                f"row mismatch: graph has {self.graph.n} nodes, features "
                f"{x.shape[0]} rows, labels {y.shape[0]} entries"
            )
        if np.unique(y).size < 2:
            raise GraphError("a dataset needs at least two classes")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        if self.node_ids is None:
            object.__setattr__(self, "node_ids", np.arange(self.graph.n))
        if self.feature_names is None:
            object.__setattr__(self, "feature_names", np.arange(x.shape[1]))

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @cached_property
    def y(self) -> np.ndarray:
        """Labels encoded as ``0..q-1``."""
        return np.searchsorted(self.classes, self.labels)

    def with_features(self, features, feature_names=None) -> "DatasetBundle":
        return DatasetBundle(
            self.graph, features, self.labels, self.name, self.node_ids,
            feature_names,
        )


def build_graph(edges, n: int | None = None, symmetrize: bool = True,
                keep_largest_component: bool = True):
    """Build a :class:`Graph` from ``(src, dst, weight)`` triples.

    Self-loops and weights below ``1e-12`` are dropped.  With
    ``symmetrize`` the adjacency becomes ``(A + A.T) / 2``; the largest
    connected component is then extracted from the symmetrized graph.

    Returns
    -------
    graph : Graph
    index_map : ndarray
        ``index_map[new] = old`` node id for each surviving node.
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.size == 0:
        raise GraphError("empty edge list")
    if edges.ndim != 2 or edges.shape[1] not in (2, 3):
        raise GraphError("edges must be (src, dst[, weight]) rows")
    src = edges[:, 0].astype(np.int64)
    dst = edges[:, 1].astype(np.int64)
    w = edges[:, 2] if edges.shape[1] == 3 else np.ones(len(edges))
    if np.any(w < 0):
        raise GraphError("negative edge weight")
    if src.min() < 0 or dst.min() < 0:
        raise GraphError("node ids must be nonnegative")
    size = int(max(src.max(), dst.max())) + 1
    if n is None:
        n = size
    elif n < size:
        raise GraphError(f"edge refers to node {size - 1} but n={n}")

    keep = (src != dst) & (w >= WEIGHT_EPS)
    a = sp.coo_matrix((w[keep], (src[keep], dst[keep])), shape=(n, n)).tocsr()
    a.sum_duplicates()
    if symmetrize:
        a = (a + a.T) / 2.0
    elif (abs(a - a.T) > 0).nnz:
        raise GraphError("asymmetric adjacency; pass symmetrize=True")
    a = _canonical(a)
    a.data[a.data < WEIGHT_EPS] = 0.0
    a = _canonical(a)

    index_map = np.arange(n)
    if keep_largest_component:
        ncomp, comp = csgraph.connected_components(a, directed=False)
        if ncomp > 1:
            sizes = np.bincount(comp)
            # lowest component label among the largest wins ties
            index_map = np.flatnonzero(comp == np.argmax(sizes))
            a = _canonical(a[index_map][:, index_map])
    return Graph(a), index_map


def from_undirected(edges, n: int | None = None) -> Graph:
    """Graph with ``a_ij = a_ji = w`` for each listed ``(i, j[, w])`` edge.

    No symmetrization averaging and no component extraction take place.
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 2 or len(edges) == 0:
        raise GraphError("empty edge list")
    both = np.vstack([edges, edges[:, [1, 0] + list(range(2, edges.shape[1]))]])
    graph, _ = build_graph(both, n=n, symmetrize=True, keep_largest_component=False)
    return graph


def default_costs(graph_or_adjacency) -> sp.csr_matrix:
    """Edge costs ``c_ij = 1 / a_ij``; nothing is stored off the edges."""
    a = graph_or_adjacency.adjacency if isinstance(graph_or_adjacency, Graph) \
        else _canonical(graph_or_adjacency)
    c = a.copy()
    c.data = 1.0 / c.data
    return c


def degree(graph: Graph) -> np.ndarray:
    return graph.degree


def laplacian(graph: Graph) -> sp.csr_matrix:
    """``L = D - A``."""
    lap = sp.diags(graph.degree) - graph.adjacency
    return _canonical(lap)


def transition_matrix(graph: Graph) -> sp.csr_matrix:
    """Row-stochastic ``P = D^-1 A``."""
    d = graph.degree
    if np.any(d <= 0):
        bad = np.flatnonzero(d <= 0)
        raise GraphError(f"zero-degree node(s) {bad[:5].tolist()}; cannot normalize")
    return _canonical(sp.diags(1.0 / d) @ graph.adjacency)


def is_connected(graph: Graph) -> bool:
    if graph.n == 0:
        return False
    order = csgraph.breadth_first_order(graph.adjacency, 0, directed=False,
                                        return_predecessors=False)
    return len(order) == graph.n
