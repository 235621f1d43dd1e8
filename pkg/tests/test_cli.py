"""
Module: tests/test_cli.py
Description: End-to-end tests of the command-line subcommands and exit codes.
"""
import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from etl.load import read_features, write_features, write_pgm
from main import EXIT_OK, EXIT_VALIDATION, main


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Runs every CLI call inside tmp_path with webhooks disabled."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MAXFUN_WEBHOOK_URL", raising=False)
    monkeypatch.setenv("MAXFUN_THREADS", "1")
    return tmp_path


@pytest.fixture
def constant_pgm(workdir):
    path = str(workdir / "flat.pgm")
    write_pgm(path, np.full((12, 12), 0.6))
    return path


def test_pool_constant_image(constant_pgm):
    """Test pooling a flat image is flat and reproducible byte for byte."""
    args = ["pool", "--set", f"input={constant_pgm}", "--set", "window=3", "--set", "stride=3"]
    assert main(args + ["--set", "output=a.mfpf"]) == EXIT_OK
    assert main(args + ["--set", "output=b.mfpf"]) == EXIT_OK

    pooled = read_features("a.mfpf")
    assert pooled.shape == (1, 4, 4)
    assert np.allclose(pooled, 153.0 / 255.0)
    with open("a.mfpf", "rb") as a, open("b.mfpf", "rb") as b:
        assert a.read() == b.read()


def test_pool_feature_file_with_provenance(workdir):
    X = np.zeros((2, 5, 5))
    X[1, 0, 0] = 9.0
    write_features("x.mfpf", X)
    code = main(
        [
            "pool", "--set", "input=x.mfpf", "--set", "method=maxfun_noncentered", "--set", "window=5",
            "--set", "stride=5", "--set", "b=1", "--set", "output=y.mfpf", "--set", "provenance=prov.csv",
        ]
    )
    assert code == EXIT_OK
    assert read_features("y.mfpf")[:, 0, 0].tolist() == [0.0, 1.0]
    prov = pd.read_csv("prov.csv")
    assert list(prov.columns) == ["channel", "k", "l", "value", "radius", "center_row", "center_col"]
    assert prov.loc[prov["channel"] == 1, ["center_row", "center_col"]].values.tolist() == [[1, 1]]


def test_pool_rejects_even_centered_window(constant_pgm):
    args = ["pool", "--set", f"input={constant_pgm}", "--set", "window=4", "--set", "stride=4"]
    assert main(args) == EXIT_VALIDATION
    assert not os.path.exists("outputs/pooled.mfpf")


def test_pool_missing_input():
    assert main(["pool"]) == EXIT_VALIDATION


def test_csc_verify_passes(workdir):
    code = main(["csc-verify", "--set", "trials=3", "--set", "output=stability.csv"])
    assert code == EXIT_OK
    report = pd.read_csv("stability.csv")
    assert len(report) == 3 * 2
    assert report["pass"].all()


def test_csc_verify_noiseless(workdir):
    assert main(["csc-verify", "--set", "trials=2", "--set", "eps0=0", "--set", "output=s.csv"]) == EXIT_OK
    report = pd.read_csv("s.csv")
    assert (report["code_dev_sq"] <= 1e-20).all()
    assert (report["noise_norm"] == 0.0).all()


def test_csc_verify_rejects_sparsity_violation(workdir, capsys):
    layer = {"local": [[1.0], [0.15]], "window": 5, "stride": 5, "r_min": 1, "b": 2, "centered": True, "lambda": 4}
    with open("run.json", "w", encoding="utf-8") as f:
        json.dump({"layers": [layer], "output": "never.csv"}, f)
    assert main(["csc-verify", "--config", "run.json"]) == EXIT_VALIDATION
    assert "SPARSITY_CONDITION_VIOLATED" in capsys.readouterr().err
    assert not os.path.exists("never.csv")


def test_classify_on_fixture(workdir, capsys):
    args = [
        "classify",
        "--set", "dataset.fixture.enabled=true",
        "--set", "dataset.fixture.per_class=8",
        "--set", "dataset.fixture.rows=24",
        "--set", "dataset.fixture.cols=24",
        "--set", "preprocess.target=24",
        "--set", "regimes=[{window: 11, stride: 11}, {window: 11, stride: 5}]",
        "--set", "alpha_grid=[0.5]",
        "--set", "r_min_grid=[2]",
        "--set", "svm.epochs=5",
    ]
    assert main(args) == EXIT_OK
    table = pd.read_csv("outputs/pooling_comparison.csv")
    assert len(table) == 12
    assert os.path.exists("outputs/pooling_cv.csv")
    assert "centered maxfun" in capsys.readouterr().out


def test_classify_without_dataset():
    assert main(["classify"]) == EXIT_VALIDATION


def test_selftest_small(capsys):
    args = ["selftest"]
    for key, value in (
        ("oracle_inputs", 3),
        ("sandwich_images", 5),
        ("nonexpansive_pairs", 20),
        ("monotone_inputs", 5),
        ("coherence_dicts", 3),
        ("stability_trials", 2),
    ):
        args += ["--set", f"{key}={value}"]
    assert main(args) == EXIT_OK
    out = capsys.readouterr().out
    assert "sandwich" in out and "stability" in out


def test_unknown_override_key():
    assert main(["selftest", "--set", "nonsense=1"]) == EXIT_VALIDATION


@pytest.mark.parametrize(
    "override, code",
    [
        ("r_min_grid=[0]", "BAD_RADIUS"),
        ("r_min_grid=[50]", "BAD_RADIUS"),
        ("b=40", "RADIUS_EXCEEDS_WINDOW"),
        ("regimes=[{window: 20, stride: 20}]", "EVEN_WINDOW_CENTERED"),
    ],
)
def test_classify_rejects_bad_maxfun_settings(override, code, capsys):
    """Test radius and window settings are refused before any data is produced."""
    args = ["classify", "--set", "dataset.fixture.enabled=true", "--set", override]
    assert main(args) == EXIT_VALIDATION
    assert code in capsys.readouterr().err
    assert not os.path.exists("outputs")
