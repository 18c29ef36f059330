"""Classifiers combining node features and graph structure.

All classifiers are transductive: they see the whole graph and feature
matrix, the labels of a labeled node subset, and predict a class for every
node.  :func:`make_model` maps each of the fourteen method identifiers to
such a predictor.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._util import argmax_lowest
from .bop import bop_fundamental, bop_group_betweenness_classify, bop_modularity_matrix
from .eigen import symmetric_eigs
from .embeddings import EmbeddingSpec, lpca_matrix
from .graph import DatasetBundle, Graph
from .kernels import rctk, sum_of_similarities_classify, DENSE_MAX as KERNEL_DENSE_MAX
from .svm import decision_votes, predict, train_linear_svm

log = logging.getLogger(__name__)

__all__ = [
    "METHODS",
    "A_ONLY",
    "X_ONLY",
    "ConstantFeatureWarning",
    "ModelSpec",
    "Workspace",
    "standardize",
    "compose_features",
    "autocovariates",
    "AutoSvmResult",
    "autosvm_classify",
    "double_kernel_matrix",
    "double_kernel_svm",
    "SarModel",
    "sar_fit",
    "sar_fit_vector",
    "sar_classify",
    "make_model",
]

METHODS = (
    "SVM-X", "BoP-A", "CTK-A", "SVM-M-A", "SVM-G-A", "SVM-L-A", "SVM-BoPM-A",
    "SAR-AX", "SVM-M-AX", "SVM-G-AX", "SVM-L-AX", "SVM-BoPM-AX", "ASVM-AX", "SVM-DK-AX",
)
A_ONLY = ("BoP-A", "CTK-A", "SVM-M-A", "SVM-G-A", "SVM-L-A", "SVM-BoPM-A")
X_ONLY = ("SVM-X",)
_EMBEDDING_OF = {"M": "moran", "G": "geary", "L": "lpca", "BoPM": "bopmod"}

DK_ALPHA = 0.8


class ConstantFeatureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelSpec:
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")


# -- feature composition ----------------------------------------------------

def standardize(x, rows=None, drop_constant: bool = True):
    """Zero mean, unit variance per column, with statistics from ``rows``.

    Columns constant over ``rows`` are dropped (with a
    :class:`ConstantFeatureWarning`) or, if ``drop_constant`` is false,
    only centered.
    """
    x = np.asarray(x, dtype=np.float64)
    ref = x if rows is None else x[rows]
    mean = ref.mean(axis=0)
    std = ref.std(axis=0)
    const = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    out = (x - mean) / np.where(const, 1.0, std)
    if const.any():
        if drop_constant:
            warnings.warn(f"dropping {int(const.sum())} constant column(s)",
                          ConstantFeatureWarning, stacklevel=2)
            out = out[:, ~const]
        else:
            out[:, const] = 0.0
    return out


def compose_features(parts, rows=None) -> np.ndarray:
    """Standardize each block over ``rows`` and concatenate columns in order."""
    blocks = [np.atleast_2d(np.asarray(p, dtype=np.float64)) for p in parts]
    if not blocks:
        raise ValueError("nothing to compose")
    n = blocks[0].shape[0]
    if any(b.shape[0] != n for b in blocks):
        raise ValueError(f"row mismatch: {[b.shape[0] for b in blocks]}")
    return np.hstack([standardize(b, rows) for b in blocks])


# -- cached graph quantities ------------------------------------------------

class Workspace:
    """Per-dataset cache of graph-derived matrices.

    Embeddings are computed once at the largest requested dimension and
    sliced for smaller ones; fundamental matrices and kernels are cached by
    parameter value.  Nothing here depends on labels or features, so one
    workspace serves every feature subset of a dataset.
    """

    def __init__(self, graph_or_bundle):
        self.graph = graph_or_bundle.graph if isinstance(graph_or_bundle, DatasetBundle) \
            else graph_or_bundle
        self._eig = {}
        self._bop = {}
        self._rctk = {}

    def bop(self, theta: float):
        key = float(theta)
        if key not in self._bop:
            self._bop[key] = bop_fundamental(self.graph, key)
        return self._bop[key]

    def rctk(self, alpha: float):
        key = float(alpha)
        if key not in self._rctk:
            self._rctk[key] = rctk(self.graph, key).K
        return self._rctk[key]

    def embedding(self, kind: str, p: int, theta: float | None = None) -> np.ndarray:
        n = self.graph.n
        key = (kind, None if kind != "bopmod" else float(theta))
        have = self._eig.get(key)
        if have is None or have.shape[1] < p:
            # one solve at half the node count covers the whole tuning grid
            count = min(n - 1, max(p, int(math.floor(0.5 * n + 0.5))))
            if kind == "moran":
                _, vecs = symmetric_eigs(self.graph.adjacency, count, "largest_nontrivial")
            elif kind == "geary":
                _, vecs = symmetric_eigs(self.graph.laplacian, count, "smallest_nontrivial")
            elif kind == "lpca":
                _, vecs = symmetric_eigs(lpca_matrix(self.graph), count, "smallest_nontrivial")
            else:
                q = bop_modularity_matrix(self.bop(theta))
                _, vecs = symmetric_eigs(q, count, "largest_nontrivial", dense_max=n)
            self._eig[key] = have = vecs
        return have[:, :p]


# -- autocovariate SVM ------------------------------------------------------

def autocovariates(transition, memberships) -> np.ndarray:
    """``ac_i^c = sum_j p_ij yhat_j^c``."""
    return np.asarray(transition @ memberships)


def _one_hot(codes, q):
    out = np.zeros((codes.size, q))
    out[np.arange(codes.size), codes] = 1.0
    return out


@dataclass
class AutoSvmResult:
    labels: np.ndarray
    classes: np.ndarray
    iterations: int
    converged: bool
    cycle: bool
    changes: list
    history: list = field(repr=False, default_factory=list)

    def iterate(self, t: int) -> np.ndarray:
        """Class per node after round ``t`` (0 is the feature-only SVM)."""
        return self.classes[self.history[t][0]]


def autosvm_classify(graph: Graph, features, labeled, labeled_y, C: float = 1.0,
                     max_iter: int = 50, soft: bool = False,
                     update: str = "synchronous") -> AutoSvmResult:
    """Iterated SVM on node features augmented with neighborhood class averages.

    Round 0 is a plain SVM on the features.  Each later round recomputes the
    autocovariates from the current predictions (labeled nodes fixed to their
    true class), retrains on ``[X, Ac]`` over the labeled nodes and
    re-predicts the unlabeled ones.  Iteration stops when no prediction
    changes, when a labeling recurs (a cycle; the iterate on the cycle
    with the best training accuracy is kept), or after ``max_iter`` rounds.
    A 2-cycle is caught at round ``t`` by comparison with round ``t - 2``.

    ``labels`` in the result covers all nodes; labeled ones keep their
    given class.
    """
    if update not in ("synchronous", "sequential"):
        raise ValueError(f"unknown update mode {update!r}")
    n = graph.n
    labeled = np.asarray(labeled, dtype=np.int64)
    labeled_y = np.asarray(labeled_y)
    classes = np.unique(labeled_y)
    q = classes.size
    unlabeled = np.setdiff1d(np.arange(n), labeled)
    x = standardize(features, labeled)
    p = graph.transition

    model = train_linear_svm(x[labeled], labeled_y, C)
    codes = np.empty(n, dtype=np.int64)
    codes[labeled] = np.searchsorted(classes, labeled_y)
    codes[unlabeled] = np.searchsorted(classes, predict(model, x[unlabeled]))
    memberships = _one_hot(codes, q)

    def train_accuracy(m, z):
        return float(np.mean(predict(m, z[labeled]) == labeled_y))

    history = [(codes.copy(), train_accuracy(model, x))]
    changes = []
    seen = {codes.tobytes(): 0}
    converged = cycle = False
    t = 0
    while t < max_iter:
        t += 1
        ac = autocovariates(p, memberships)
        z = np.hstack([x, standardize(ac, labeled, drop_constant=False)])
        model = train_linear_svm(z[labeled], labeled_y, C)
        new = codes.copy()
        if update == "synchronous":
            votes = decision_votes(model, z[unlabeled])
            new[unlabeled] = argmax_lowest(votes)
            new_members = memberships.copy()
            new_members[unlabeled] = votes / votes.sum(axis=1, keepdims=True) if soft \
                else _one_hot(new[unlabeled], q)
        else:
            new_members = memberships.copy()
            mean, std = ac[labeled].mean(axis=0), ac[labeled].std(axis=0)
            std = np.where(std > 1e-12, std, 1.0)
            for i in unlabeled:
                row = p.getrow(i)
                ac_i = (row @ new_members).ravel()
                zi = np.concatenate([x[i], (ac_i - mean) / std])
                votes = decision_votes(model, zi[None, :])[0]
                new[i] = argmax_lowest(votes[None, :])[0]
                new_members[i] = votes / votes.sum() if soft else _one_hot(new[i:i + 1], q)[0]
        changed = np.flatnonzero(new != codes)
        changes.append(changed.tolist())
        history.append((new.copy(), train_accuracy(model, z)))
        if changed.size == 0:
            converged = True
            break
        if soft:  # memberships carry more than the labeling; only check t - 2
            first = len(history) - 3 if len(history) >= 3 and \
                np.array_equal(new, history[-3][0]) else None
        else:
            first = seen.get(new.tobytes())
        if first is not None:
            # hard updates are a deterministic map of the labeling: a revisit is a cycle
            cycle = True
            best = max(history[first + 1:], key=lambda h: h[1])
            codes = best[0]
            break
        seen[new.tobytes()] = len(history) - 1
        codes, memberships = new, new_members
    else:
        log.info("autoSVM stopped after %d rounds without converging", max_iter)
    if converged:
        codes = new
    return AutoSvmResult(classes[codes], classes, t, converged, cycle, changes, history)


# -- double kernel SVM ------------------------------------------------------

def double_kernel_matrix(graph_kernel, features, rows=None) -> np.ndarray:
    """``[K_A, K_X]`` with ``K_X = X X'`` on features standardized over ``rows``."""
    x = standardize(features, rows, drop_constant=False)
    return np.hstack([np.asarray(graph_kernel), x @ x.T])


def _scale_block(k, rows):
    # center columns, then one scale for the whole block so that the
    # geometry inside each kernel is kept and the two blocks weigh the same
    k = k - k[rows].mean(axis=0)
    rms = float(np.sqrt(np.mean(k[rows] ** 2)))
    return k / rms if rms > 0 else k


def double_kernel_svm(graph: Graph, features, labeled, labeled_y, C: float = 1.0,
                      alpha: float = DK_ALPHA, graph_kernel=None) -> np.ndarray:
    """Linear SVM on the rows of ``[K_A, K_X]``; returns a class per node.

    Each ``n``-column block is centered over the labeled rows and divided by
    its root mean square there (one scalar per block).
    """
    labeled = np.asarray(labeled, dtype=np.int64)
    k_a = rctk(graph, alpha).K if graph_kernel is None else graph_kernel
    both = double_kernel_matrix(k_a, features, labeled)
    z = np.hstack([_scale_block(both[:, :graph.n], labeled),
                   _scale_block(both[:, graph.n:], labeled)])
    model = train_linear_svm(z[labeled], labeled_y, C)
    return predict(model, z)


# -- spatial autoregressive model ------------------------------------------

@dataclass(frozen=True, eq=False)
class SarModel:
    """Per-class lag models ``y = rho P y + X w + e``.

    ``design`` is the full design matrix (intercept first) used for
    prediction; ``rho``, ``coef`` and ``sigma2`` have one entry per class.
    """

    classes: np.ndarray
    rho: np.ndarray
    coef: np.ndarray
    sigma2: np.ndarray
    loglik: np.ndarray
    design: np.ndarray = field(repr=False)


def _transition_spectrum(graph: Graph) -> np.ndarray:
    # P = D^-1 A is similar to the symmetric D^-1/2 A D^-1/2
    s = 1.0 / np.sqrt(graph.degree)
    sym = (sp.diags(s) @ graph.adjacency @ sp.diags(s)).toarray()
    return np.linalg.eigvalsh((sym + sym.T) / 2)


def _ridge_solve(x, r, ridge):
    gram = x.T @ x
    reg = np.full(x.shape[1], ridge)
    reg[0] = 0.0  # intercept is not penalized
    try:
        return np.linalg.solve(gram + np.diag(reg), x.T @ r)
    except np.linalg.LinAlgError:
        return np.linalg.solve(gram + np.diag(reg + 1e-8), x.T @ r)


class _SarLikelihood:
    def __init__(self, graph, design, y, rows, eigvals, ridge):
        self.design = design
        self.rows = rows
        self.y = y
        self.lag = np.asarray(graph.transition @ y)
        self.eig = eigvals
        self.ridge = ridge
        self.n_rows = rows.size
        self.share = rows.size / graph.n

    def fit(self, rho):
        r = self.y[self.rows] - rho * self.lag[self.rows]
        xl = self.design[self.rows]
        w = _ridge_solve(xl, r, self.ridge)
        e = r - xl @ w
        sigma2 = max(float(e @ e) / self.n_rows, 1e-300)
        logdet = float(np.sum(np.log(np.abs(1.0 - rho * self.eig))))
        ll = -0.5 * self.n_rows * (math.log(2 * math.pi * sigma2) + 1) + self.share * logdet
        return ll, w, sigma2


def _golden_max(f, lo, hi, tol=1e-7, max_iter=200):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def sar_fit_vector(graph: Graph, design, y, rows=None, rho: float | None = None,
                   eigvals=None, grid_size: int = 41, ridge: float = 0.0):
    """Concentrated maximum likelihood for one response vector.

    ``y`` is defined on all nodes; only ``rows`` enter the likelihood (the
    lag ``P y`` uses every node).  With ``rho`` given, only the regression
    coefficients are estimated.

    Returns ``(rho, coef, sigma2, loglik)``.
    """
    n = graph.n
    rows = np.arange(n) if rows is None else np.asarray(rows, dtype=np.int64)
    design = np.asarray(design, dtype=np.float64)
    eigvals = _transition_spectrum(graph) if eigvals is None else eigvals
    lik = _SarLikelihood(graph, design, np.asarray(y, dtype=np.float64), rows, eigvals, ridge)
    if rho is not None:
        ll, w, s2 = lik.fit(float(rho))
        return float(rho), w, s2, ll

    lam_min = float(eigvals.min())
    lo = max(-1.0, 1.0 / lam_min) if lam_min < 0 else -1.0
    hi = 1.0  # the largest eigenvalue of a stochastic matrix
    grid = np.linspace(lo, hi, grid_size + 2)[1:-1]
    lls = [lik.fit(r)[0] for r in grid]
    k = int(np.argmax(lls))
    a = grid[k - 1] if k > 0 else lo + 1e-9 * (hi - lo)
    b = grid[k + 1] if k < grid_size - 1 else hi - 1e-9 * (hi - lo)
    best, _ = _golden_max(lambda r: lik.fit(r)[0], a, b)
    margin = 1e-6 * (hi - lo)
    if best <= lo + margin or best >= hi - margin:
        warnings.warn(f"rho estimate {best:.6f} at the stability boundary; clamped",
                      RuntimeWarning, stacklevel=2)
        best = min(max(best, lo + margin), hi - margin)
    ll, w, s2 = lik.fit(best)
    return best, w, s2, ll


def sar_design(features, rows) -> np.ndarray:
    x = standardize(features, rows)
    return np.hstack([np.ones((x.shape[0], 1)), x])


def sar_fit(bundle_or_graph, features, labeled, labeled_y, ridge: float | None = None) -> SarModel:
    """Fit one lag model per class on class-indicator responses.

    Unlabeled entries of each indicator are set to the class frequency among
    labeled nodes so that the spatial lag is defined everywhere.  When there
    are fewer labeled rows than design columns a unit ridge penalty is used.
    """
    graph = bundle_or_graph.graph if isinstance(bundle_or_graph, DatasetBundle) else bundle_or_graph
    labeled = np.asarray(labeled, dtype=np.int64)
    labeled_y = np.asarray(labeled_y)
    design = sar_design(features, labeled)
    if ridge is None:
        ridge = 1.0 if labeled.size < design.shape[1] + 1 else 0.0
    if ridge == 0.0 and np.linalg.matrix_rank(design[labeled]) < design.shape[1]:
        ridge = 1e-8
    eig = _transition_spectrum(graph)
    classes = np.unique(labeled_y)
    rhos, coefs, s2s, lls = [], [], [], []
    for c in classes:
        ind = (labeled_y == c).astype(np.float64)
        y = np.full(graph.n, ind.mean())
        y[labeled] = ind
        rho, w, s2, ll = sar_fit_vector(graph, design, y, labeled, eigvals=eig, ridge=ridge)
        rhos.append(rho)
        coefs.append(w)
        s2s.append(s2)
        lls.append(ll)
    return SarModel(classes, np.array(rhos), np.array(coefs), np.array(s2s), np.array(lls), design)


def sar_predict_scores(model: SarModel, graph: Graph) -> np.ndarray:
    """Continuous memberships ``(I - rho P)^-1 X w`` per class."""
    eye = sp.identity(graph.n, format="csc")
    out = np.empty((graph.n, model.classes.size))
    for k in range(model.classes.size):
        lu = spla.splu(sp.csc_matrix(eye - model.rho[k] * graph.transition))
        out[:, k] = lu.solve(model.design @ model.coef[k])
    return out


def sar_classify(model: SarModel, bundle_or_graph) -> np.ndarray:
    graph = bundle_or_graph.graph if isinstance(bundle_or_graph, DatasetBundle) else bundle_or_graph
    return model.classes[argmax_lowest(sar_predict_scores(model, graph))]


# -- dispatch ---------------------------------------------------------------

def _labeled_dict(labeled, labeled_y):
    out = {}
    for i, c in zip(labeled, labeled_y):
        out.setdefault(c.item() if hasattr(c, "item") else c, []).append(int(i))
    return out


def make_model(spec: ModelSpec, bundle: DatasetBundle, workspace: Workspace | None = None):
    """Build ``classify(labeled, labeled_y) -> class per node`` for ``spec``.

    Hyperparameters are read from ``spec.params``: ``C``, ``theta``,
    ``alpha``, ``p_frac`` (or ``p``) as relevant to the method.
    """
    ws = workspace if workspace is not None else Workspace(bundle)
    method, params = spec.method, dict(spec.params)
    graph, x, n = bundle.graph, bundle.features, bundle.n

    def dim():
        return EmbeddingSpec("moran", p=params.get("p"),
                             p_fraction=None if "p" in params else params["p_frac"]).dimension(n)

    def fill(labeled, labeled_y, targets_pred):
        out = np.empty(n, dtype=bundle.labels.dtype)
        out[labeled] = labeled_y
        mask = np.ones(n, dtype=bool)
        mask[labeled] = False
        out[mask] = targets_pred
        return out

    if method == "SVM-X":
        def classify(labeled, labeled_y):
            z = compose_features([x], labeled)
            return predict(train_linear_svm(z[labeled], labeled_y, params["C"]), z)

    elif method == "BoP-A":
        def classify(labeled, labeled_y):
            targets = np.setdiff1d(np.arange(n), labeled)
            pred, _ = bop_group_betweenness_classify(
                ws.bop(params["theta"]), _labeled_dict(labeled, labeled_y), targets)
            return fill(labeled, labeled_y, pred)

    elif method == "CTK-A":
        def classify(labeled, labeled_y):
            targets = np.setdiff1d(np.arange(n), labeled)
            source = ws.rctk(params["alpha"]) if n <= KERNEL_DENSE_MAX else graph
            pred, _ = sum_of_similarities_classify(
                source, _labeled_dict(labeled, labeled_y), targets, alpha=params["alpha"],
                normalize=params.get("normalize", False))
            return fill(labeled, labeled_y, pred)

    elif method.startswith("SVM-") and method.split("-")[1] in _EMBEDDING_OF:
        kind = _EMBEDDING_OF[method.split("-")[1]]
        with_x = method.endswith("-AX")

        def classify(labeled, labeled_y):
            emb = ws.embedding(kind, dim(), params.get("theta"))
            z = compose_features([x, emb] if with_x else [emb], labeled)
            return predict(train_linear_svm(z[labeled], labeled_y, params["C"]), z)

    elif method == "ASVM-AX":
        def classify(labeled, labeled_y):
            return autosvm_classify(graph, x, labeled, labeled_y, params["C"],
                                    max_iter=params.get("max_iter", 50),
                                    soft=params.get("soft", False)).labels

    elif method == "SVM-DK-AX":
        def classify(labeled, labeled_y):
            alpha = params.get("alpha", DK_ALPHA)
            return double_kernel_svm(graph, x, labeled, labeled_y, params["C"], alpha,
                                     graph_kernel=ws.rctk(alpha))

    elif method == "SAR-AX":
        def classify(labeled, labeled_y):
            model = sar_fit(graph, x, labeled, labeled_y)
            return fill(labeled, labeled_y, sar_classify(model, graph)[
                np.setdiff1d(np.arange(n), labeled)])
    else:  # pragma: no cover - ModelSpec validates ids
        raise ValueError(f"unknown method {method!r}")
    return classify
