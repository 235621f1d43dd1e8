"""
Module: classify.features
Description:
    Shallow feature extraction for the pooling comparison: a fixed bank of
    3x3 kernels (oriented differences plus seeded random kernels), valid
    correlation and a rectifier, followed by per-channel pooling into a flat
    feature vector.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.signal import correlate2d

from core.lattice import Image, as_image, check_nonnegative, vectorize
from pooling.grid import MaxfunConfig, PoolGrid
from pooling.operators import (
    MaxfunProfile,
    maxfun_profile,
    pool_avg,
    pool_max,
    pool_maxfun,
    pool_mixed,
    pool_stochastic,
    reduce_profile,
)
from utils.errors import ValidationError

logger = logging.getLogger(__name__)

# (C, H, W), non-negative after rectification
FeatureTensor = NDArray[np.float64]

POOL_METHODS = ("avg", "max", "mixed", "stochastic", "maxfun_noncentered", "maxfun")

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])


@dataclass(frozen=True)
class FilterBank:
    filters: List[NDArray[np.float64]] = field(default_factory=list)
    half_wave: bool = True

    def __post_init__(self):
        if not self.filters:
            raise ValidationError("EMPTY_FILTER_BANK: at least one kernel is required")
        kernels = [np.asarray(f, dtype=np.float64) for f in self.filters]
        shape = kernels[0].shape
        for k in kernels:
            if k.ndim != 2 or k.shape != shape or k.shape[0] != k.shape[1]:
                raise ValidationError(f"BAD_KERNEL_SHAPE: kernels must share one square shape, got {k.shape}")
            if not np.all(np.isfinite(k)):
                raise ValidationError("NON_FINITE_KERNEL")
        object.__setattr__(self, "filters", kernels)

    @property
    def channels(self) -> int:
        return len(self.filters)

    @property
    def kernel_size(self) -> int:
        return self.filters[0].shape[0]


def default_filter_bank(seed: int = 0, half_wave: bool = True) -> FilterBank:
    """
    Eight oriented difference kernels (cos t * Gx + sin t * Gy for t = k*pi/4)
    followed by eight random 3x3 kernels with unit Frobenius norm.
    """
    sobel_y = _SOBEL_X.T
    oriented = [
        np.cos(k * np.pi / 4) * _SOBEL_X + np.sin(k * np.pi / 4) * sobel_y for k in range(8)
    ]
    rng = np.random.default_rng(seed)
    random_kernels = []
    for _ in range(8):
        k = rng.standard_normal((3, 3))
        random_kernels.append(k / np.linalg.norm(k))
    return FilterBank(filters=oriented + random_kernels, half_wave=half_wave)


def extract_features(img, bank: FilterBank) -> FeatureTensor:
    """
    Valid correlation with every kernel of the bank, then rectification.

    Args:
        img: Non-negative (H, W) image.
        bank (FilterBank): Kernels and rectifier choice.

    Returns:
        FeatureTensor: (C, H-k+1, W-k+1), every entry >= 0.

    Raises:
        ValidationError: Negative pixels or a kernel larger than the image.
    """
    X = as_image(img)
    check_nonnegative(X, where="feature extraction")
    k = bank.kernel_size
    if k > X.shape[0] or k > X.shape[1]:
        raise ValidationError(f"KERNEL_TOO_LARGE: kernel {k}x{k} vs image {X.shape}")

    responses = np.stack([correlate2d(X, f, mode="valid") for f in bank.filters])
    if bank.half_wave:
        return np.maximum(responses, 0.0)
    return np.abs(responses)


def _flatten_channels(values: Image) -> NDArray[np.float64]:
    # channel-major, each channel column-major
    return np.concatenate([vectorize(channel) for channel in values])


def pool_tensor(t: FeatureTensor, grid: PoolGrid, method: str, params: Optional[Dict[str, Any]] = None):
    """
    Pools every channel of ``t`` on ``grid`` and flattens the result.

    Args:
        t (FeatureTensor): (C, H, W) non-negative tensor.
        grid (PoolGrid): Grid over (H, W).
        method (str): One of ``POOL_METHODS``.
        params (dict): ``alpha`` for mixed; ``r_min`` and ``b`` for the maxfun
            variants (b defaults to (window-1)//2, r_min to 1).

    Returns:
        Vector of length C * out_rows * out_cols.

    Raises:
        ValidationError: Unknown method, missing or invalid parameters.
    """
    params = params or {}
    arr = as_image(t, allow_channels=True)
    if arr.ndim == 2:
        arr = arr[None]

    if method == "avg":
        out = pool_avg(arr, grid)
    elif method == "max":
        out = pool_max(arr, grid)
    elif method == "mixed":
        if "alpha" not in params:
            raise ValidationError("MISSING_PARAM: mixed pooling needs alpha")
        out = pool_mixed(arr, grid, params["alpha"])
    elif method == "stochastic":
        out = pool_stochastic(arr, grid)
    elif method in ("maxfun", "maxfun_noncentered"):
        cfg = MaxfunConfig(
            r_min=int(params.get("r_min", 1)),
            b=int(params.get("b", (grid.window - 1) // 2)),
            centered=method == "maxfun",
        )
        out = pool_maxfun(arr, grid, cfg)
    else:
        raise ValidationError(f"UNKNOWN_METHOD: {method!r} not in {POOL_METHODS}")
    return _flatten_channels(out.values)


def tensor_profile(t: FeatureTensor, grid: PoolGrid, b: int, centered: bool, r_min: int = 1) -> MaxfunProfile:
    """Radius profile of a whole tensor, for sweeping r_min without re-pooling."""
    arr = as_image(t, allow_channels=True)
    if arr.ndim == 2:
        arr = arr[None]
    return maxfun_profile(arr, grid, b, centered=centered, r_min=r_min)


def profile_features(profile: MaxfunProfile, r_min: int):
    """Flat feature vector of a profile reduced at ``r_min``; equals pool_tensor with the same radii."""
    return _flatten_channels(reduce_profile(profile, r_min).values)
