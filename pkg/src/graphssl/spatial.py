"""Global autocorrelation indexes of a node-valued vector.

Three indexes are provided: Moran's I, Geary's c and the contiguity ratio
(local variance over variance).  Each has an edge-sum form, which is the
canonical definition, and a quadratic-form counterpart used by the
embeddings; the two are kept separate so they can check each other.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .graph import DatasetBundle, Graph

__all__ = [
    "DegenerateVarianceError",
    "AutocorrReport",
    "moran_index",
    "geary_index",
    "contiguity_ratio",
    "moran_index_matrix",
    "geary_index_matrix",
    "contiguity_ratio_matrix",
    "class_autocorrelation_report",
]


class DegenerateVarianceError(ValueError):
    """The input vector is constant, so every index is 0/0."""


def _centered(graph: Graph, x) -> tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != graph.n:
        raise ValueError(f"vector has length {x.shape[0]}, graph has {graph.n} nodes")
    xc = x - x.mean()
    ss = float(xc @ xc)
    # relative test: a constant vector leaves only rounding noise after centering
    if ss <= 1e-24 * max(1.0, float(x @ x)):
        raise DegenerateVarianceError("index undefined for a constant vector")
    return xc, ss


def _edges(graph: Graph):
    a = graph.adjacency.tocoo()
    return a.row, a.col, a.data


def moran_index(graph: Graph, x) -> float:
    """Moran's I, ``(n / a..) sum_ij a_ij (x_i - m)(x_j - m) / sum_i (x_i - m)^2``."""
    xc, ss = _centered(graph, x)
    i, j, w = _edges(graph)
    return graph.n / graph.volume * float(np.sum(w * xc[i] * xc[j])) / ss


def geary_index(graph: Graph, x) -> float:
    """Geary's c, ``(n-1) / (2 a..) sum_ij a_ij (x_i - x_j)^2 / sum_i (x_i - m)^2``.

    Takes values in ``[0, 2]`` on typical data: 0 for perfect positive
    autocorrelation, about 1 for none.
    """
    xc, ss = _centered(graph, x)
    i, j, w = _edges(graph)
    return (graph.n - 1) / (2.0 * graph.volume) * float(np.sum(w * (xc[i] - xc[j]) ** 2)) / ss


def contiguity_ratio(graph: Graph, x) -> float:
    """Local variance over variance, with local means ``m_i = sum_j p_ij x_j``."""
    xc, ss = _centered(graph, x)
    i, j, w = _edges(graph)
    local_mean = np.bincount(i, weights=w * xc[j], minlength=graph.n) / graph.degree
    return float(np.sum((xc - local_mean) ** 2)) / ss


def moran_index_matrix(graph: Graph, x) -> float:
    xc, ss = _centered(graph, x)
    # H x = xc, so x' H A H x = xc' A xc
    return graph.n / graph.volume * float(xc @ (graph.adjacency @ xc)) / ss


def geary_index_matrix(graph: Graph, x) -> float:
    # x'Lx is half the ordered-pair edge sum, hence no factor 2 below
    xc, ss = _centered(graph, x)
    return (graph.n - 1) / graph.volume * float(xc @ (graph.laplacian @ xc)) / ss


def contiguity_ratio_matrix(graph: Graph, x) -> float:
    xc, ss = _centered(graph, x)
    x = np.asarray(x, dtype=np.float64).ravel()
    r = x - graph.transition @ x
    return float(r @ r) / ss


@dataclass(frozen=True)
class AutocorrReport:
    classes: list
    moran: list
    geary: list
    lpca: list

    @property
    def moran_mean(self) -> float:
        return float(np.mean(self.moran))

    @property
    def geary_mean(self) -> float:
        return float(np.mean(self.geary))

    @property
    def lpca_mean(self) -> float:
        return float(np.mean(self.lpca))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean"] = {"moran": self.moran_mean, "geary": self.geary_mean,
                     "lpca": self.lpca_mean}
        return d

    def to_text(self) -> str:
        rows = [("class", "moran", "geary", "lpca")]
        for c, m, g, l in zip(self.classes, self.moran, self.geary, self.lpca):
            rows.append((str(c), f"{m:.4f}", f"{g:.4f}", f"{l:.4f}"))
        rows.append(("mean", f"{self.moran_mean:.4f}", f"{self.geary_mean:.4f}",
                     f"{self.lpca_mean:.4f}"))
        widths = [max(len(r[k]) for r in rows) for k in range(4)]
        return "\n".join(
            "  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows
        )


def class_autocorrelation_report(bundle: DatasetBundle) -> AutocorrReport:
    """Indexes of every class-indicator vector and their means over classes."""
    if bundle.classes.size < 2:
        raise ValueError("need at least two classes")
    moran, geary, lpca = [], [], []
    for k, c in enumerate(bundle.classes):
        ind = (bundle.y == k).astype(np.float64)
        if not ind.any():
            raise ValueError(f"class {c} has no members")
        moran.append(moran_index(bundle.graph, ind))
        geary.append(geary_index(bundle.graph, ind))
        lpca.append(contiguity_ratio(bundle.graph, ind))
    return AutocorrReport([c.item() for c in bundle.classes], moran, geary, lpca)
