"""Reading and writing datasets in the on-disk directory layout.

A dataset directory holds::

    edges.tsv           src <TAB> dst <TAB> weight      (0-based node ids)
    features.tsv        node <TAB> feature <TAB> value  (sparse triplets)
      or features.dense.csv                             (one row per node)
    labels.tsv          node <TAB> class id

Only nodes listed in ``labels.tsv`` carry a class; the graph is
symmetrized and reduced to its largest connected component on load.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .graph import DatasetBundle, GraphError, build_graph

log = logging.getLogger(__name__)

__all__ = ["load_dataset", "save_dataset"]


def _read_table(path: Path, ncols: int, fill=None) -> np.ndarray:
    """Parse a TAB-separated numeric table; ``fill`` pads a missing last column."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if fill is not None and len(parts) == ncols - 1:
                parts.append(repr(fill))
            if len(parts) < ncols:
                raise GraphError(f"{path}:{lineno}: expected {ncols} columns")
            try:
                rows.append([float(p) for p in parts[:ncols]])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise GraphError(f"{path}:{lineno}: non-numeric field") from None
    return np.asarray(rows, dtype=np.float64).reshape(-1, ncols)


def load_dataset(directory, name: str | None = None, symmetrize: bool = True,
                 keep_largest_component: bool = True) -> DatasetBundle:
    directory = Path(directory)
    edges = _read_table(directory / "edges.tsv", 3, fill=1.0)
    labels_tab = _read_table(directory / "labels.tsv", 2)
    label_nodes = labels_tab[:, 0].astype(np.int64)
    label_vals = labels_tab[:, 1].astype(np.int64)

    n = int(max(edges[:, :2].max() if edges.size else -1, label_nodes.max())) + 1
    labels = np.full(n, -1, dtype=np.int64)
    labels[label_nodes] = label_vals

    dense = directory / "features.dense.csv"
    if dense.exists():
        x = np.loadtxt(dense, delimiter=",", dtype=np.float64, ndmin=2)
        if x.shape[0] != n:
            raise GraphError(f"{dense}: {x.shape[0]} rows for {n} nodes")
    else:
        trip = _read_table(directory / "features.tsv", 3)
        m = int(trip[:, 1].max()) + 1 if trip.size else 0
        x = np.zeros((n, m))
        # duplicates: last value wins
        x[trip[:, 0].astype(np.int64), trip[:, 1].astype(np.int64)] = trip[:, 2]

    graph, index_map = build_graph(edges, n=n, symmetrize=symmetrize,
                                   keep_largest_component=keep_largest_component)
    labels = labels[index_map]
    x = x[index_map]
    if np.any(labels < 0):
        # unlabeled nodes cannot be scored; drop them and re-extract the component
        keep = np.flatnonzero(labels >= 0)
        log.warning("%s: dropping %d node(s) without a class", directory,
                    graph.n - keep.size)
        sub = graph.adjacency[keep][:, keep].tocoo()
        graph, sub_map = build_graph(
            np.column_stack([sub.row, sub.col, sub.data]), n=keep.size,
            symmetrize=False, keep_largest_component=True)
        index_map = index_map[keep[sub_map]]
        labels, x = labels[keep[sub_map]], x[keep[sub_map]]
    return DatasetBundle(graph, x, labels, name or directory.name, node_ids=index_map)


def save_dataset(bundle: DatasetBundle, directory, dense: bool = False) -> Path:
    """Write ``bundle`` in the directory layout, using its own node numbering."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    # both arcs are written so that symmetrization on load is the identity
    a = bundle.graph.adjacency.tocoo()
    with open(directory / "edges.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for i, j, w in zip(a.row, a.col, a.data):
            fh.write(f"{i}\t{j}\t{float(w)!r}\n")
    with open(directory / "labels.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for i, c in enumerate(bundle.labels):
            fh.write(f"{i}\t{int(c)}\n")
    if dense:
        np.savetxt(directory / "features.dense.csv", bundle.features,
                   delimiter=",", fmt="%.17g")
    else:
        with open(directory / "features.tsv", "w", encoding="utf-8", newline="\n") as fh:
            rows, cols = np.nonzero(bundle.features)
            for i, j in zip(rows, cols):
                fh.write(f"{i}\t{j}\t{float(bundle.features[i, j])!r}\n")
            n, m = bundle.features.shape
            if m and not bundle.features[:, m - 1].any():
                # keeps the trailing all-zero column in the feature count
                fh.write(f"{n - 1}\t{m - 1}\t0.0\n")
    return directory
