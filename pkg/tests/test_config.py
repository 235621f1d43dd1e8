"""
Module: tests/test_config.py
Description: Unit tests for configuration file structure and run-config merging.
"""
import json
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

try:
    from utils.config import COMMAND_SECTIONS, load_config, load_run_config, parse_override
    from utils.errors import ValidationError
except ImportError:
    load_config = None


@pytest.fixture
def config():
    """
    Project configuration fixture.
    """
    if not load_config:
        pytest.fail("Could not import utils.config. Check if PyYAML is installed and utils/config.py exists.")
    return load_config()


@pytest.fixture
def run_file(tmp_path):
    """Writes a JSON run file and returns its path."""

    def _write(payload):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write


def test_essential_keys_structure(config):
    """Verify every subcommand has a defaults section."""
    for key in ["path", *COMMAND_SECTIONS.values()]:
        assert key in config, f"Missing required configuration key: {key}"


def test_path_configuration(config):
    assert isinstance(config["path"].get("log_file"), str)


def test_csc_layers_are_complete(config):
    for layer in config["csc_verify"]["layers"]:
        assert {"local", "window", "stride", "r_min", "b", "centered", "lambda"} <= set(layer)


def test_parse_override_types():
    assert parse_override("window=5") == {"window": 5}
    assert parse_override("svm.reg_C=0.5") == {"svm": {"reg_C": 0.5}}
    assert parse_override("centered=false") == {"centered": False}
    assert parse_override("alpha_grid=[0.1, 0.2]") == {"alpha_grid": [0.1, 0.2]}
    assert parse_override("input=") == {"input": None}


def test_parse_override_errors():
    with pytest.raises(ValidationError, match="BAD_OVERRIDE"):
        parse_override("window")
    with pytest.raises(ValidationError, match="BAD_OVERRIDE"):
        parse_override("svm..epochs=3")


def test_defaults_without_overrides(config):
    cfg = load_run_config("pool")
    assert cfg.values == config["pool"]
    assert cfg.paths["log_file"] == config["path"]["log_file"]


def test_run_file_then_overrides(run_file):
    """Overrides win over the run file, which wins over the defaults."""
    path = run_file({"window": 7, "stride": 2})
    cfg = load_run_config("pool", path, ["stride=3", "centered=false"])
    assert (cfg["window"], cfg["stride"], cfg["centered"]) == (7, 3, False)
    assert cfg.get("method") == "maxfun"


def test_nested_merge_and_list_replacement(run_file):
    path = run_file({"svm": {"epochs": 4}, "alpha_grid": [0.5]})
    cfg = load_run_config("classify", path)
    assert cfg.get("svm.epochs") == 4
    assert cfg.get("svm.reg_C") == 1.0
    assert cfg["alpha_grid"] == [0.5]


def test_unknown_keys_rejected(run_file):
    with pytest.raises(ValidationError, match="UNKNOWN_CONFIG_KEY: windw"):
        load_run_config("pool", overrides=["windw=3"])
    with pytest.raises(ValidationError, match="UNKNOWN_CONFIG_KEY: svm.epoch"):
        load_run_config("classify", run_file({"svm": {"epoch": 3}}))
    with pytest.raises(ValidationError, match="UNKNOWN_COMMAND"):
        load_run_config("train")


def test_missing_run_file():
    with pytest.raises(ValidationError, match="RUN_FILE_NOT_FOUND"):
        load_run_config("pool", "nowhere.json")
