"""
Module: tests/test_core.py
Description: Unit tests for lattice conventions (vectorization, norms, input checks).
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.lattice import as_image, check_nonnegative, devectorize, frob_norm, vectorize
from utils.errors import ValidationError


def test_vectorize_single_element():
    assert vectorize([[7.0]]).tolist() == [7.0]


def test_vectorize_is_column_major():
    """X[0,0], X[1,0], X[0,1], X[1,1]."""
    assert vectorize([[1, 3], [2, 4]]).tolist() == [1, 2, 3, 4]


def test_vectorize_three_by_two():
    X = np.array([[10 * i + j for j in (1, 2)] for i in (1, 2, 3)], dtype=float)
    assert vectorize(X).tolist() == [11, 21, 31, 12, 22, 32]


def test_devectorize_examples():
    assert devectorize([7.0], 1, 1).tolist() == [[7.0]]
    assert devectorize([1, 2, 3, 4], 2, 2).tolist() == [[1, 3], [2, 4]]


def test_devectorize_round_trip():
    X = np.random.default_rng(0).random((5, 4))
    assert np.array_equal(devectorize(vectorize(X), 5, 4), X)


def test_devectorize_length_mismatch():
    with pytest.raises(ValidationError, match="LENGTH_MISMATCH"):
        devectorize([1, 2, 3], 2, 2)


def test_frob_norm_examples():
    assert frob_norm(np.zeros((3, 3))) == 0.0
    assert frob_norm([[3.0, 4.0]]) == 5.0
    assert frob_norm(np.eye(2)) == pytest.approx(np.sqrt(2.0), abs=1e-15)


@pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros(4), [[np.nan, 1.0]], [[np.inf]]])
def test_as_image_rejects_bad_input(bad):
    with pytest.raises(ValidationError):
        as_image(bad)


def test_as_image_channels_only_when_allowed():
    stack = np.zeros((2, 3, 3))
    assert as_image(stack, allow_channels=True).shape == (2, 3, 3)
    with pytest.raises(ValidationError, match="BAD_IMAGE_RANK"):
        as_image(stack)


def test_check_nonnegative():
    check_nonnegative(np.zeros((2, 2)))
    with pytest.raises(ValidationError, match="NEGATIVE_INPUT"):
        check_nonnegative(np.array([[0.0, -1e-9]]))


def test_frob_norm_is_a_metric():
    """Test the induced distance is symmetric, zero only on equal inputs and obeys the triangle inequality."""
    rng = np.random.default_rng(11)
    for _ in range(200):
        X, Y, Z = rng.normal(size=(3, 5, 4))
        d_xy, d_yx = frob_norm(X - Y), frob_norm(Y - X)
        assert d_xy == d_yx
        assert d_xy > 0.0
        assert frob_norm(X - X) == 0.0
        assert frob_norm(X - Z) <= d_xy + frob_norm(Y - Z) + 1e-12
    assert frob_norm(-2.5 * np.ones((2, 2))) == 2.5 * frob_norm(np.ones((2, 2)))
