import numpy as np
import pytest

import graphssl.harness.tuning as tuning
from graphssl.classifiers import Workspace
from graphssl.graph import DatasetBundle
from graphssl.harness.cv import CvPlan, assign_folds, make_cv_plan
from graphssl.harness.tuning import (DEFAULT_GRIDS, MODE_DEFAULTS, grid_points, grid_search,
                                     parameter_modes)
from graphssl.synthetic import blobs_dataset, sbm_dataset


def test_fold_sizes_for_100_nodes():
    labels = np.repeat([1, 2, 3, 4], 25)
    plan = make_cv_plan(labels, CvPlan(runs=1))
    for s in plan[0].splits:
        assert s.labeled.size == 20 and s.test.size == 80
        sizes = [v.size for _, v in s.inner_splits()]
        assert sizes == [4] * 5


def test_deterministic_for_seed():
    labels = np.random.default_rng(0).integers(0, 3, 137)
    a = make_cv_plan(labels, CvPlan(seed=9))
    b = make_cv_plan(labels, CvPlan(seed=9))
    c = make_cv_plan(labels, CvPlan(seed=10))
    assert all(np.array_equal(x.fold_of, y.fold_of) for x, y in zip(a, b))
    assert any(not np.array_equal(x.fold_of, y.fold_of) for x, y in zip(a, c))
    for x, y in zip(a, b):
        for s, t in zip(x.splits, y.splits):
            assert np.array_equal(s.inner, t.inner)


def test_twenty_five_splits_partition_nodes():
    labels = np.repeat([1, 2], 50)
    plan = make_cv_plan(labels)
    splits = [s for r in plan for s in r.splits]
    assert len(splits) == 25
    for r in plan:
        covered = np.sort(np.concatenate([s.labeled for s in r.splits]))
        assert np.array_equal(covered, np.arange(100))
        for s in r.splits:
            assert np.intersect1d(s.labeled, s.test).size == 0
            assert np.unique(labels[s.labeled]).size == 2


def test_stratified_folds_balance_classes():
    labels = np.repeat([1, 2, 3], [50, 30, 20])
    folds = assign_folds(labels, 5, np.random.default_rng(1))
    for f in range(5):
        assert np.bincount(labels[folds == f], minlength=4)[1:].tolist() == [10, 6, 4]


def test_too_few_nodes():
    with pytest.raises(ValueError):
        make_cv_plan(np.arange(24) % 2)


def _split_and_bundle(seed=0):
    b = blobs_dataset(n=200, m=10, seed=seed)
    return make_cv_plan(b.labels, CvPlan(runs=1))[0].splits[0], b


def test_single_point_grid():
    split, b = _split_and_bundle()
    best, _ = grid_search("SVM-X", {"C": (0.5,)}, split, b)
    assert best == {"C": 0.5}


def test_svm_x_evaluates_seven_values_per_inner_split(monkeypatch):
    split, b = _split_and_bundle()
    calls = []
    real = tuning.make_model

    def counting(spec, bundle, ws=None):
        inner = real(spec, bundle, ws)

        def classify(labeled, labeled_y):
            calls.append(spec.params["C"])
            return inner(labeled, labeled_y)
        return classify

    monkeypatch.setattr(tuning, "make_model", counting)
    _, table = grid_search("SVM-X", DEFAULT_GRIDS["SVM-X"], split, b)
    assert len(table) == 7
    assert len(calls) == 7 * 5
    assert sorted(set(calls)) == sorted(DEFAULT_GRIDS["SVM-X"]["C"])


def test_first_maximum_wins(monkeypatch):
    split, b = _split_and_bundle()

    def constant(spec, bundle, ws=None):
        return lambda labeled, labeled_y: np.full(bundle.n, bundle.labels[0])

    monkeypatch.setattr(tuning, "make_model", constant)
    best, table = grid_search("SVM-X", {"C": (3.0, 1.0, 2.0)}, split, b)
    assert best == {"C": 3.0}
    assert len({s for _, s in table}) == 1


def test_failing_points_skipped():
    b = sbm_dataset(n=100, seed=1)
    split = make_cv_plan(b.labels, CvPlan(runs=1))[0].splits[0]
    best, table = grid_search("CTK-A", {"alpha": (0.4, 1.0)}, split, b)
    assert best == {"alpha": 0.4}
    assert np.isnan(table[1][1])


def test_sar_passthrough():
    split, b = _split_and_bundle()
    assert grid_search("SAR-AX", {}, split, b)[0] == {}


def test_grid_points_order():
    pts = grid_points({"a": (1, 2), "b": ("x", "y")})
    assert pts == [{"a": 1, "b": "x"}, {"a": 1, "b": "y"}, {"a": 2, "b": "x"},
                   {"a": 2, "b": "y"}]
    with pytest.raises(ValueError):
        grid_points({"a": ()})


def test_mode_aggregation():
    sel = [{"alpha": v} for v in (0.8, 0.8, 0.6, 0.8, 1.0)]
    assert parameter_modes(sel) == {"alpha": (0.8, 0.6)}


def test_default_grids_cover_all_methods():
    from graphssl.classifiers import METHODS
    assert set(DEFAULT_GRIDS) == set(METHODS) == set(MODE_DEFAULTS)
    assert DEFAULT_GRIDS["SVM-X"]["C"] == (1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6)


@pytest.mark.parametrize("method", ["SVM-X", "CTK-A", "SVM-M-AX", "ASVM-AX"])
def test_no_leakage_from_test_nodes(method, monkeypatch):
    b = sbm_dataset(n=120, m=10, seed=4)
    split = make_cv_plan(b.labels, CvPlan(runs=1, seed=2))[0].splits[1]
    grid = {k: v[:3] for k, v in DEFAULT_GRIDS[method].items()}

    # taint: every node index handed to a classifier or scored must be labeled
    seen = set()
    real = tuning.make_model

    def tracking(spec, bundle, ws=None):
        inner = real(spec, bundle, ws)

        def classify(labeled, labeled_y):
            seen.update(np.asarray(labeled).tolist())
            return inner(labeled, labeled_y)
        return classify

    monkeypatch.setattr(tuning, "make_model", tracking)
    ws = Workspace(b.graph)
    best, table = grid_search(method, grid, split, b, ws)
    assert seen <= set(split.labeled.tolist())

    # scrambling test-node labels cannot change the selection
    labels = b.labels.copy()
    rng = np.random.default_rng(0)
    labels[split.test] = rng.permutation(labels[split.test][::-1])
    tainted = DatasetBundle(b.graph, b.features, labels, b.name)
    best2, table2 = grid_search(method, grid, split, tainted, ws)
    assert best2 == best
    assert [s for _, s in table2] == [s for _, s in table]
