import json
import shutil
import subprocess

import numpy as np
import pytest

from graphssl.cli import _literal, _params, main
from graphssl.io import load_dataset


@pytest.fixture
def dataset(tmp_path):
    d = tmp_path / "sbm"
    assert main(["synth", "--kind", "sbm", "--seed", "3", "--option", "n=80,m=12",
                 str(d)]) == 0
    return d


def test_synth_writes_loadable_dataset(dataset):
    b = load_dataset(dataset)
    assert b.features.shape[1] == 12
    assert b.n <= 80


def test_autocorr(dataset, capsys):
    assert main(["autocorr", str(dataset)]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[:out.index("\n}\n") + 2])
    assert set(payload) == {"classes", "moran", "geary", "lpca", "mean"}
    assert "mean" in out.splitlines()[-1]


def test_embed(dataset, tmp_path):
    out = tmp_path / "emb.tsv"
    assert main(["embed", "--kind", "geary", "--p-frac", "0.05", str(dataset),
                 "--out", str(out)]) == 0
    rows = [line.split("\t") for line in out.read_text().splitlines()]
    n = load_dataset(dataset).n
    assert len(rows) == n
    assert all(len(r) == 1 + round(0.05 * n) for r in rows)


def test_embed_bopmod_needs_theta(dataset, capsys):
    assert main(["embed", "--kind", "bopmod", "--p-frac", "0.1", str(dataset)]) == 2
    assert "theta" in capsys.readouterr().err


def test_classify(dataset, tmp_path, capsys):
    out = tmp_path / "pred.tsv"
    assert main(["classify", "--method", "ctk-a", "--params", "alpha=0.6", "--seed", "1",
                 "--out", str(out), str(dataset)]) == 0
    line = capsys.readouterr().out
    assert line.startswith('CTK-A {"alpha": 0.6}')
    rows = out.read_text().splitlines()
    assert rows[0] == "node\tlabel\tprediction\tlabeled"
    labeled = [r for r in rows[1:] if r.endswith("\t1")]
    assert abs(len(labeled) - 0.2 * (len(rows) - 1)) <= 1  # folds differ by at most one


def test_classify_unknown_method(dataset):
    with pytest.raises(SystemExit):
        main(["classify", "--method", "svm-q", str(dataset)])


def test_bench_twice_identical(tmp_path, dataset):
    cfg = tmp_path / "bench.toml"
    cfg.write_text(
        'methods = ["CTK-A", "SVM-X", "SVM-G-A"]\nfeature_sets = [5, 10]\n'
        '[plan]\nruns = 1\nseed = 5\n'
        f'[[datasets]]\nname = "sbm"\npath = "{dataset.name}"\n'
        '[grids.SVM-X]\nC = [0.01, 1.0]\n'
        '[grids.SVM-G-A]\nC = [1.0]\np_frac = [0.05, 0.1]\n'
        '[grids.CTK-A]\nalpha = [0.2, 0.8]\n')
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "r1")]) == 0
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "r2"),
                 "--workers", "2"]) == 0
    a = (tmp_path / "r1" / "results.csv").read_bytes()
    assert a == (tmp_path / "r2" / "results.csv").read_bytes()
    assert a.count(b"\n") == 1 + 3 * 2 * 5
    for name in ("summary.json", "ranks.csv", "cd_diagram.svg", "records.jsonl"):
        assert (tmp_path / "r1" / name).exists()
    # the seed override changes the folds
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "r3"),
                 "--seed", "6"]) == 0
    assert (tmp_path / "r3" / "results.csv").read_bytes() != a


def test_param_parsing():
    assert _literal("1e-4") == 1e-4 and isinstance(_literal("3"), int)
    assert _literal("true") is True and _literal("abc") == "abc"
    assert _params(["C=1", "soft=false"]) == {"C": 1, "soft": False}
    assert _params(["C=1,theta=0.5", "p_frac=0.1"]) == {"C": 1, "theta": 0.5, "p_frac": 0.1}
    with pytest.raises(SystemExit):
        _params(["C"])


@pytest.mark.skipif(shutil.which("graphssl") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["graphssl", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("bench", "autocorr", "embed", "classify", "synth"):
        assert cmd in res.stdout
