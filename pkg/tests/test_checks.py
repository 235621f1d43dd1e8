"""
Module: tests/test_checks.py
Description: The verification suites pass on the shipped implementation.
"""
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from checks.suites import (
    coherence,
    degenerate_identity,
    epsilon_arithmetic,
    monotone,
    nonexpansive,
    oracle_equivalence,
    run_all,
    sandwich,
    stability,
)
from utils.config import load_config


@pytest.fixture
def config():
    return load_config()


def test_oracle_equivalence():
    result = oracle_equivalence(seed=0, inputs=40)
    assert result.passed, result.detail


def test_sandwich():
    result = sandwich(seed=0, images=100)
    assert result.passed
    assert result.failures == 0


def test_degenerate_identity():
    assert degenerate_identity(seed=1, inputs=30).passed


def test_nonexpansive_full_size():
    """Test the full pair count used by selftest."""
    result = nonexpansive(seed=0, pairs=10000)
    assert result.trials >= 10000
    assert result.passed


def test_monotone():
    assert monotone(seed=2, inputs=50).passed


def test_epsilon_arithmetic():
    result = epsilon_arithmetic()
    assert result.passed, result.detail


def test_coherence():
    assert coherence(seed=0, dictionaries=20).passed


def test_stability(config):
    result = stability(config["csc_verify"], seed=0, trials=5)
    assert result.passed
    assert result.trials == 5


def test_run_all_order_and_summary(config):
    selftest = dict(
        config["selftest"],
        oracle_inputs=4,
        sandwich_images=4,
        nonexpansive_pairs=40,
        monotone_inputs=4,
        coherence_dicts=4,
        stability_trials=2,
    )
    results = run_all(selftest, config["csc_verify"])
    assert [r.name for r in results] == [
        "oracle_equivalence",
        "sandwich",
        "degenerate_identity",
        "nonexpansive",
        "monotone",
        "epsilon_arithmetic",
        "coherence",
        "stability",
    ]
    assert all(r.passed for r in results)
    assert results[0].summary().startswith("PASS")
