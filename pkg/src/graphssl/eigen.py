"""Extremal eigenpairs of symmetric matrices.

Small problems go through LAPACK (``scipy.linalg.eigh``); larger ones
through ARPACK's Lanczos iteration on a matrix-free operator, so that
centered matrices such as ``H A H`` are never formed.  "Nontrivial"
problems live on the subspace orthogonal to the constant vector: the
matrix is centered on both sides and the constant direction is pushed to
the far end of the spectrum, where it cannot be selected.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["EigenError", "symmetric_eigs", "gershgorin_bound", "fix_signs"]

DENSE_MAX = 1500
WHICH = ("largest", "smallest", "largest_nontrivial", "smallest_nontrivial")


class EigenError(RuntimeError):
    """Bad request or solver failure."""


def gershgorin_bound(m) -> float:
    """Upper bound on the spectral radius: max absolute row sum."""
    if sp.issparse(m):
        return float(abs(m).sum(axis=1).max()) if m.shape[0] else 0.0
    return float(np.abs(m).sum(axis=1).max()) if len(m) else 0.0


def fix_signs(vectors: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Flip columns so their largest-magnitude entry is positive.

    Entries within ``rtol`` of the maximum count as ties, resolved by the
    lowest index, so that rounding noise cannot flip the convention.
    """
    v = np.array(vectors, dtype=np.float64, copy=True)
    for k in range(v.shape[1]):
        mag = np.abs(v[:, k])
        top = np.flatnonzero(mag >= mag.max() * (1 - rtol))[0]
        if v[top, k] < 0:
            v[:, k] = -v[:, k]
    return v


def _center_both(m: np.ndarray) -> np.ndarray:
    m = m - m.mean(axis=0, keepdims=True)
    return m - m.mean(axis=1, keepdims=True)


def symmetric_eigs(m, count: int, which: str = "largest", metric=None,
                   dense_max: int = DENSE_MAX, check: bool = True):
    """Extremal eigenpairs of a symmetric matrix.

    Parameters
    ----------
    m : ndarray or sparse matrix
        Symmetric ``n x n`` matrix.
    count : int
        Number of eigenpairs, ``1 <= count < n``.
    which : {"largest", "smallest", "largest_nontrivial", "smallest_nontrivial"}
        The ``_nontrivial`` variants solve ``H M H x = lambda x`` restricted
        to vectors orthogonal to the constant vector.
    metric : ndarray, optional
        Symmetric positive definite ``B`` of a generalized problem
        ``M x = lambda B x``; vectors are then B-orthonormal.  Dense only.

    Returns
    -------
    values : ndarray, shape (count,)
        Sorted from most to least extreme in the requested direction.
    vectors : ndarray, shape (n, count)
    """
    if which not in WHICH:
        raise EigenError(f"which must be one of {WHICH}, got {which!r}")
    n = m.shape[0]
    if m.shape != (n, n):
        raise EigenError(f"matrix must be square, got {m.shape}")
    nontrivial = which.endswith("_nontrivial")
    largest = which.startswith("largest")
    available = n - 1 if nontrivial else n
    if count < 1 or count >= n or count > available:
        raise EigenError(f"cannot extract {count} eigenpairs from an {n}x{n} problem")
    if metric is not None and nontrivial:
        raise EigenError("a metric cannot be combined with the nontrivial variants")

    bound = gershgorin_bound(m)
    # Lanczos only pays off for a few pairs of a large matrix
    if metric is not None or n <= dense_max or count > n // 5:
        dense = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.float64)
        if nontrivial:
            # constant direction moved past the opposite end of the spectrum
            push = -(2 * bound + 1) if largest else (2 * bound + 1)
            dense = _center_both(dense) + push / n
        dense = (dense + dense.T) / 2
        lo, hi = (n - count, n - 1) if largest else (0, count - 1)
        b = None if metric is None else np.asarray(metric, dtype=np.float64)
        vals, vecs = sla.eigh(dense, b, subset_by_index=[lo, hi])
    else:
        vals, vecs = _lanczos(m, count, largest, nontrivial, bound)

    order = np.argsort(-vals if largest else vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    if nontrivial:
        vecs = vecs - vecs.mean(axis=0, keepdims=True)
        vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    vecs = fix_signs(vecs)
    if check:
        _check_residuals(m, vals, vecs, metric, nontrivial, bound)
    return vals, vecs


def _lanczos(m, count, largest, nontrivial, bound):
    n = m.shape[0]
    sigma = 2 * bound + 1
    push = -sigma if largest else sigma

    def matvec(x):
        x = np.ravel(x)
        if nontrivial:
            xc = x - x.mean()
            y = m @ xc
            y = y - y.mean() + push * x.mean()
        else:
            y = m @ x
        # smallest eigenpairs of M are the largest of (sigma I - M)
        return y if largest else sigma * x - y

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        vals, vecs = spla.eigsh(op, k=count, which="LA", tol=0, v0=v0,
                                maxiter=max(1000, 20 * n))
    except spla.ArpackNoConvergence as exc:
        raise EigenError(f"Lanczos did not converge: {exc}") from exc
    if not largest:
        vals = sigma - vals
    return vals, vecs


def _check_residuals(m, vals, vecs, metric, nontrivial, bound, rtol=1e-8):
    mv = m @ vecs
    if nontrivial:
        # vectors are centered, so H M H x = H (M x)
        mv = mv - mv.mean(axis=0, keepdims=True)
    bx = vecs if metric is None else np.asarray(metric) @ vecs
    res = np.linalg.norm(mv - bx * vals, axis=0)
    scale = rtol * max(1.0, bound) * np.linalg.norm(vecs, axis=0)
    if np.any(res > scale):
        raise EigenError(f"eigen residual {res.max():.3e} above tolerance")
