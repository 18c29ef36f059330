import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphssl.bop import (BopError, bop_fundamental, bop_group_betweenness,
                          bop_group_betweenness_classify, bop_modularity_matrix)
from graphssl.synthetic import two_cliques_bridge

from conftest import path_graph, random_graph


def path_sum(w, tol=1e-14):
    """Sum of W^t until the geometric tail is below ``tol``."""
    rho = np.abs(w).sum(axis=1).max()  # induced infinity-norm bound on W
    total = np.eye(len(w))
    term = np.eye(len(w))
    t = 0
    while True:
        term = term @ w
        total += term
        t += 1
        if rho ** (t + 1) / (1 - rho) < tol:
            return total


def brute_gbet(z, members, i):
    pairs = [(j, k) for j in members for k in members if j != k]
    if not pairs:
        pairs = [(members[0], members[0])]
    s = sum(z[j, i] * z[i, k] / z[j, k] for j, k in pairs)
    return s / (z[i, i] * len(pairs))


def test_k2_closed_form(k2):
    ctx = bop_fundamental(k2, np.log(2))
    assert np.allclose(ctx.W.toarray(), [[0, 0.5], [0.5, 0]], atol=1e-15)
    assert np.allclose(ctx.Z, [[4 / 3, 2 / 3], [2 / 3, 4 / 3]], atol=1e-12)
    q = bop_modularity_matrix(ctx)
    assert np.allclose(q, [[1 / 3, -1 / 3], [-1 / 3, 1 / 3]], atol=1e-12)


def test_large_theta_suppresses_paths(rng):
    ctx = bop_fundamental(random_graph(rng, 6, weighted=False), 20.0)
    assert np.allclose(ctx.Z, np.eye(6), atol=1e-6)


def test_path_sum_oracle_p3():
    ctx = bop_fundamental(path_graph(3), 1.0)
    assert np.allclose(ctx.Z, path_sum(ctx.W.toarray()), atol=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(3, 5), st.sampled_from([0.5, 1.0, 3.0]))
def test_path_sum_oracle_small(seed, n, theta):
    ctx = bop_fundamental(random_graph(np.random.default_rng(seed), n), theta)
    assert np.allclose(ctx.Z, path_sum(ctx.W.toarray()), atol=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(3, 20))
def test_z_structure_and_theta_monotone(seed, n):
    g = random_graph(np.random.default_rng(seed), n)
    prev = None
    for theta in (1e-3, 0.1, 1.0, 5.0):
        z = bop_fundamental(g, theta).Z
        assert np.all(np.diag(z) >= 1 - 1e-12)
        assert np.all(z - np.eye(n) >= -1e-12)
        if prev is not None:
            off = ~np.eye(n, dtype=bool)
            assert np.all(z[off] <= prev[off] * (1 + 1e-9) + 1e-12)
        prev = z


@given(st.integers(0, 2**32 - 1), st.integers(3, 20))
def test_modularity_trace_identity(seed, n):
    z = bop_fundamental(random_graph(np.random.default_rng(seed), n), 0.5).Z
    q = bop_modularity_matrix(type("C", (), {"Z": z})())
    e = np.ones(n)
    expected = np.trace(z) - (z @ e) @ (e @ z) / (e @ z @ e)
    assert np.trace(q) == pytest.approx(expected, abs=1e-9)


def test_betweenness_symmetry_on_p4():
    ctx = bop_fundamental(path_graph(4), 1.0)
    _, s = bop_group_betweenness(ctx, {"A": [0, 3]})
    assert s[1, 0] == pytest.approx(s[2, 0], rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_betweenness_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 9)
    ctx = bop_fundamental(g, 0.7)
    labeled = {1: [0, 3, 5], 2: [7]}
    classes, s = bop_group_betweenness(ctx, labeled)
    for i in (1, 2, 4, 6, 8):
        for col, c in enumerate(classes):
            assert s[i, col] == pytest.approx(brute_gbet(ctx.Z, labeled[c], i), rel=1e-12)


def test_cliques_classified_to_own_side():
    b = two_cliques_bridge(size=5)
    ctx = bop_fundamental(b.graph, 1.0)
    labeled = {1: [1, 2], 2: [6, 7]}
    targets = [0, 3, 4, 5, 8, 9]
    preds, scores = bop_group_betweenness_classify(ctx, labeled, targets)
    assert list(preds) == [1, 1, 1, 2, 2, 2]
    assert scores.shape == (6, 2)


def test_single_class(rng):
    ctx = bop_fundamental(random_graph(rng, 8), 1.0)
    preds, _ = bop_group_betweenness_classify(ctx, {"only": [0, 1]}, [2, 3, 4])
    assert list(preds) == ["only"] * 3


def test_scale_invariance_of_argmax(rng):
    ctx = bop_fundamental(random_graph(rng, 10), 1.0)
    _, s = bop_group_betweenness(ctx, {1: [0, 1], 2: [5, 6]})
    assert np.array_equal(np.argmax(s, axis=1), np.argmax(3.7 * s, axis=1))


def test_errors(rng, k2):
    g = random_graph(rng, 6)
    with pytest.raises(BopError):
        bop_fundamental(g, 0.0)
    with pytest.raises(BopError):
        bop_fundamental(g, 1.0, max_nodes=5)
    ctx = bop_fundamental(g, 1.0)
    with pytest.raises(BopError):
        bop_group_betweenness_classify(ctx, {1: [0], 2: [1]}, [1, 2])
    with pytest.raises(BopError):
        bop_group_betweenness(ctx, {1: []})
