"""Seeded synthetic datasets.

``sbm_dataset`` is graph-driven: classes are the blocks of a stochastic
block model and the node features are pure noise.  ``blobs_dataset`` is
feature-driven: classes are Gaussian blobs in feature space and the graph
is an Erdos-Renyi graph that ignores the classes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import DatasetBundle, build_graph

__all__ = ["sbm_dataset", "blobs_dataset", "two_cliques_bridge", "GENERATORS"]


def _random_edges(rng, n, prob):
    """Upper-triangular Bernoulli edges; ``prob`` is an n x n probability array."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < prob[iu, ju]
    return np.column_stack([iu[keep], ju[keep]])


def _bundle(edges, x, labels, name, n):
    both = np.vstack([edges, edges[:, ::-1]])
    graph, index_map = build_graph(np.column_stack([both, np.ones(len(both))]), n=n)
    return DatasetBundle(graph, x[index_map], labels[index_map], name, node_ids=index_map)


def sbm_dataset(n: int = 400, blocks: int = 2, p_in: float = 0.06, p_out: float = 0.005,
                m: int = 100, seed: int = 0, name: str = "sbm") -> DatasetBundle:
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % blocks + 1
    labels = labels[rng.permutation(n)]
    same = labels[:, None] == labels[None, :]
    edges = _random_edges(rng, n, np.where(same, p_in, p_out))
    # binary bag-of-words-like noise features
    x = (rng.random((n, m)) < 0.1).astype(np.float64)
    return _bundle(edges, x, labels, name, n)


def blobs_dataset(n: int = 400, classes: int = 2, m: int = 100, informative: int = 5,
                  separation: float = 4.0, p_edge: float = 0.02, seed: int = 0,
                  name: str = "blobs") -> DatasetBundle:
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % classes + 1
    labels = labels[rng.permutation(n)]
    centers = rng.standard_normal((classes, informative))
    centers *= separation / np.linalg.norm(centers[0] - centers[1]) if classes > 1 else 1.0
    x = rng.standard_normal((n, m))
    x[:, :informative] += centers[labels - 1]
    edges = _random_edges(rng, n, np.full((n, n), p_edge))
    return _bundle(edges, x, labels, name, n)


def two_cliques_bridge(size: int = 5, m: int = 3, seed: int = 0) -> DatasetBundle:
    """Two ``size``-cliques joined through one bridge node (the last node).

    Clique members carry classes 1 and 2; the bridge is class 1.  Features
    are uninformative noise.
    """
    rng = np.random.default_rng(seed)
    n = 2 * size + 1
    edges = []
    for base in (0, size):
        edges += [(base + i, base + j) for i in range(size) for j in range(i + 1, size)]
    bridge = n - 1
    edges += [(0, bridge), (size, bridge)]
    labels = np.array([1] * size + [2] * size + [1])
    x = rng.standard_normal((n, m))
    return _bundle(np.asarray(edges), x, labels, "cliques", n)


GENERATORS = {"sbm": sbm_dataset, "blobs": blobs_dataset}
