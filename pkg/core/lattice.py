"""
Module: core.lattice
Description:
    Real-valued functions on a finite lattice and the conventions shared by all
    other modules: 64-bit floats, 0-based indices, column-major vectorization.
"""
import logging
from typing import Any

import numpy as np
from numpy.typing import NDArray

from utils.errors import ValidationError

logger = logging.getLogger(__name__)

# Image: (M, N), or channel-stacked (C, M, N) where a module says so.
Image = NDArray[np.float64]
Vec = NDArray[np.float64]
Mat = NDArray[np.float64]


def as_image(X: Any, allow_channels: bool = False) -> Image:
    """
    Converts input to a float64 lattice function and checks its shape.

    Args:
        X: Array-like of shape (M, N), or (C, M, N) when ``allow_channels``.
        allow_channels (bool): Accept a leading channel axis.

    Returns:
        Image: A float64 array (a copy only when a conversion was needed).

    Raises:
        ValidationError: Wrong rank, empty axes or non-finite entries.
    """
    arr = np.asarray(X, dtype=np.float64)
    ranks = (2, 3) if allow_channels else (2,)
    if arr.ndim not in ranks:
        raise ValidationError(f"BAD_IMAGE_RANK: expected rank in {ranks}, got shape {arr.shape}")
    if 0 in arr.shape:
        raise ValidationError(f"EMPTY_IMAGE: shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("NON_FINITE_IMAGE: NaN or inf entries")
    return arr


def as_vec(v: Any) -> Vec:
    """Converts input to a non-empty, finite, 1-D float64 vector."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"BAD_VECTOR_SHAPE: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("NON_FINITE_VECTOR: NaN or inf entries")
    return arr


def check_nonnegative(X: NDArray[np.float64], where: str = "input") -> None:
    """
    Rejects negative entries at a pooling boundary.

    Raises:
        ValidationError: If any entry is negative.
    """
    if np.any(X < 0):
        count = int(np.count_nonzero(X < 0))
        logger.error(f"[Core] {count} negative entries in {where}")
        raise ValidationError(f"NEGATIVE_INPUT: {count} negative entries in {where} (min={float(X.min())})")


def vectorize(X: Any) -> Vec:
    """
    Column-major vectorization: X[0,0], X[1,0], ..., X[M-1,0], X[0,1], ..., X[M-1,N-1].
    """
    return as_image(X).flatten(order="F")


def devectorize(v: Any, M: int, N: int) -> Image:
    """
    Inverse of :func:`vectorize`.

    Raises:
        ValidationError: If ``len(v) != M * N``.
    """
    vec = as_vec(v)
    if M < 1 or N < 1 or vec.size != M * N:
        raise ValidationError(f"LENGTH_MISMATCH: len={vec.size} but M*N={M}*{N}")
    return vec.reshape((M, N), order="F").copy()


def frob_norm(A: Any) -> float:
    """Frobenius norm of an image, matrix or vector (2-norm of all entries)."""
    arr = np.asarray(A, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))
