import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphssl.bop import bop_fundamental, bop_modularity_matrix
from graphssl.embeddings import (EmbeddingSpec, bop_modularity_embedding, embed,
                                 geary_embedding, lpca_embedding, lpca_matrix,
                                 moran_embedding)
from graphssl.spatial import contiguity_ratio, geary_index, moran_index
from graphssl.synthetic import sbm_dataset

from conftest import path_graph, random_graph


def _agreement(col, labels):
    side = col > 0
    truth = labels == labels[0]
    return max(np.mean(side == truth), np.mean(side != truth))


def test_k2_embeddings(k2):
    spec = EmbeddingSpec("moran", p=1)
    e = moran_embedding(k2, spec)
    assert e.eigenvalues[0] == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(e.scores[:, 0], np.array([1, -1]) / np.sqrt(2))
    assert moran_index(k2, e.scores[:, 0]) == pytest.approx(-1.0, abs=1e-12)
    g = geary_embedding(k2, EmbeddingSpec("geary", p=1))
    assert g.eigenvalues[0] == pytest.approx(2.0, abs=1e-12)
    assert abs(g.scores[0, 0]) == pytest.approx(abs(g.scores[1, 0]))
    assert np.allclose(lpca_matrix(k2).toarray(), [[2, -2], [-2, 2]])
    l = lpca_embedding(k2, EmbeddingSpec("lpca", p=1))
    assert l.eigenvalues[0] == pytest.approx(4.0, abs=1e-12)


def test_k2_bop_modularity(k2):
    e = bop_modularity_embedding(k2, EmbeddingSpec("bopmod", p=1, theta=np.log(2)))
    assert e.eigenvalues[0] == pytest.approx(2 / 3, abs=1e-12)
    assert np.allclose(e.scores[:, 0], np.array([1, -1]) / np.sqrt(2))


def test_p4_fiedler_monotone():
    g = geary_embedding(path_graph(4), EmbeddingSpec("geary", p=1))
    col = g.scores[:, 0]
    assert np.all(np.diff(col) > 0) or np.all(np.diff(col) < 0)
    vals = np.linalg.eigvalsh(path_graph(4).laplacian.toarray())
    assert g.eigenvalues[0] == pytest.approx(vals[1], abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(4, 30))
def test_index_identities(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    vol = g.volume
    p = max(1, n // 3)
    m = moran_embedding(g, EmbeddingSpec("moran", p=p))
    for x, lam in zip(m.scores.T, m.eigenvalues):
        assert abs(moran_index(g, x) - n / vol * lam) < 1e-8
    ge = geary_embedding(g, EmbeddingSpec("geary", p=p))
    for x, lam in zip(ge.scores.T, ge.eigenvalues):
        assert abs(geary_index(g, x) - (n - 1) / vol * lam) < 1e-8
    lp = lpca_embedding(g, EmbeddingSpec("lpca", p=p))
    for x, lam in zip(lp.scores.T, lp.eigenvalues):
        assert abs(contiguity_ratio(g, x) - lam) < 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(4, 25))
def test_centered_and_orthonormal(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    for kind in ("moran", "geary", "lpca"):
        e = embed(g, EmbeddingSpec(kind, p=n // 2))
        assert np.allclose(e.scores.mean(axis=0), 0, atol=1e-8)
        assert np.allclose(e.scores.T @ e.scores, np.eye(e.p), atol=1e-6)


def test_laplacian_eigvecs_solve_geary_system(rng):
    g = random_graph(rng, 12)
    vals, vecs = np.linalg.eigh(g.laplacian.toarray())
    h = np.eye(12) - 1 / 12
    for lam, x in zip(vals[1:], vecs[:, 1:].T):
        # L x = lam H x holds because L is centered and x is orthogonal to 1
        assert np.allclose(g.laplacian @ x, lam * h @ x, atol=1e-10)


def test_permutation_equivariance(rng):
    g = random_graph(rng, 14)
    perm = rng.permutation(14)
    h = g.permuted(perm)
    for kind in ("moran", "geary", "lpca"):
        a = embed(g, EmbeddingSpec(kind, p=2))
        b = embed(h, EmbeddingSpec(kind, p=2))
        assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
        for k in range(2):
            if abs(a.eigenvalues[k] - a.eigenvalues[1 - k]) < 1e-8:
                continue  # degenerate pair: only the subspace is determined
            x, y = a.scores[perm, k], b.scores[:, k]
            assert np.allclose(x, y, atol=1e-8) or np.allclose(x, -y, atol=1e-8)


def test_sbm_leading_columns_separate_blocks():
    b = sbm_dataset(n=300, p_in=0.08, p_out=0.004, seed=3)
    m = moran_embedding(b.graph, EmbeddingSpec("moran", p=1))
    assert _agreement(m.scores[:, 0], b.labels) >= 0.9
    q = bop_modularity_embedding(b.graph, EmbeddingSpec("bopmod", p=1, theta=1.0))
    assert _agreement(q.scores[:, 0], b.labels) >= 0.9


@given(st.integers(0, 2**32 - 1), st.integers(3, 15), st.sampled_from([1e-3, 0.5, 2.0]))
def test_bop_modularity_annihilates_ones(seed, n, theta):
    g = random_graph(np.random.default_rng(seed), n)
    q = bop_modularity_matrix(bop_fundamental(g, theta))
    assert np.allclose(q @ np.ones(n), 0, atol=1e-9 * np.abs(q).max())


def test_spec_validation():
    with pytest.raises(ValueError):
        EmbeddingSpec("moran")
    with pytest.raises(ValueError):
        EmbeddingSpec("bopmod", p=1)
    with pytest.raises(ValueError):
        EmbeddingSpec("newman", p=1)
    with pytest.raises(ValueError):
        EmbeddingSpec("lpca", p=0).dimension(10)
    with pytest.raises(ValueError):
        EmbeddingSpec("lpca", p=10).dimension(10)
    assert EmbeddingSpec("lpca", p_fraction=0.05).dimension(50) == 3
    assert EmbeddingSpec("lpca", p_fraction=0.05).dimension(400) == 20
