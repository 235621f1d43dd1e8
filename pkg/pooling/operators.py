"""
Module: pooling.operators
Description:
    Average, max, mixed, stochastic and maxfun pooling (centered and
    non-centered), plus the 1-D maxfun used on sparse codes.

    Inputs are non-negative images of shape (M, N) or channel stacks (C, M, N);
    pooling acts on the last two axes. Window sums are accumulated in a fixed
    row-major order, one offset at a time, so results do not depend on how
    windows are scheduled and match the loop oracles in ``pooling.naive`` bit
    for bit.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import NDArray

from core.lattice import Image, as_image, check_nonnegative
from pooling.grid import MaxfunConfig, PoolGrid, PoolGrid1D
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Provenance:
    """Winning radius and absolute center of every maxfun cell."""

    radius: NDArray[np.int64]
    center_row: NDArray[np.int64]
    center_col: Optional[NDArray[np.int64]] = None


@dataclass(frozen=True)
class PoolOutput:
    values: Image
    provenance: Optional[Provenance] = None


@dataclass(frozen=True)
class MaxfunProfile:
    """
    Best sub-square mean per cell and per radius.

    ``means[..., t]`` is the largest mean over admissible centers at radius
    ``radii[t]``; ``center_rows`` / ``center_cols`` hold the winning center
    (smallest row, then column, on ties).
    """

    radii: Tuple[int, ...]
    means: NDArray[np.float64]
    center_rows: NDArray[np.int64]
    center_cols: NDArray[np.int64]


def ordered_sum(block: NDArray[np.float64]) -> NDArray[np.float64]:
    """Sums the last two axes in row-major order, one element at a time."""
    acc = np.zeros(block.shape[:-2], dtype=np.float64)
    for i in range(block.shape[-2]):
        for j in range(block.shape[-1]):
            acc = acc + block[..., i, j]
    return acc


def _prepare(X, g: PoolGrid) -> Image:
    arr = as_image(X, allow_channels=True)
    if arr.shape[-2:] != g.shape:
        logger.error(f"[Pool] Input shape {arr.shape} does not match grid {g.shape}")
        raise ValidationError(f"SHAPE_MISMATCH: input {arr.shape[-2:]} vs grid {g.shape}")
    check_nonnegative(arr, where="pooling input")
    return arr


def _windows(X: Image, g: PoolGrid) -> NDArray[np.float64]:
    """View of shape (..., m, n, window, window)."""
    view = sliding_window_view(X, (g.window, g.window), axis=(-2, -1))
    return view[..., :: g.stride, :: g.stride, :, :][..., : g.out_rows, : g.out_cols, :, :]


def _window_origins(g: PoolGrid) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    rows = np.arange(g.out_rows, dtype=np.int64)[:, None] * g.stride
    cols = np.arange(g.out_cols, dtype=np.int64)[None, :] * g.stride
    return np.broadcast_to(rows, g.out_shape), np.broadcast_to(cols, g.out_shape)


def _avg_values(win: NDArray[np.float64], window: int) -> NDArray[np.float64]:
    return ordered_sum(win) / (window * window)


def _max_values(win: NDArray[np.float64]) -> NDArray[np.float64]:
    return win.max(axis=(-2, -1))


def pool_avg(X, g: PoolGrid) -> PoolOutput:
    """Mean of every window."""
    win = _windows(_prepare(X, g), g)
    return PoolOutput(values=_avg_values(win, g.window))


def pool_max(X, g: PoolGrid) -> PoolOutput:
    """Largest entry of every window."""
    win = _windows(_prepare(X, g), g)
    return PoolOutput(values=_max_values(win))


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"ALPHA_OUT_OF_RANGE: alpha={alpha} not in [0, 1]")
    return alpha


def pool_mixed(X, g: PoolGrid, alpha: float) -> PoolOutput:
    """alpha * max + (1 - alpha) * mean; the closed interval [0, 1] is accepted."""
    alpha = check_alpha(alpha)
    win = _windows(_prepare(X, g), g)
    values = alpha * _max_values(win) + (1.0 - alpha) * _avg_values(win, g.window)
    return PoolOutput(values=values)


def pool_stochastic(X, g: PoolGrid) -> PoolOutput:
    """
    Deterministic stochastic pooling: sum(x^2) / sum(x) per window.

    An all-zero window pools to 0.
    """
    win = _windows(_prepare(X, g), g)
    squares = ordered_sum(win * win)
    totals = ordered_sum(win)
    positive = totals > 0
    values = np.where(positive, squares / np.where(positive, totals, 1.0), 0.0)
    return PoolOutput(values=values)


def _centered_profile(win, g: PoolGrid, radii) -> MaxfunProfile:
    c = (g.window - 1) // 2
    means = np.stack(
        [
            ordered_sum(win[..., c - r : c + r + 1, c - r : c + r + 1]) / ((2 * r + 1) ** 2)
            for r in radii
        ],
        axis=-1,
    )
    origin_rows, origin_cols = _window_origins(g)
    shape = means.shape
    rows = np.broadcast_to((origin_rows + c)[..., None], shape).copy()
    cols = np.broadcast_to((origin_cols + c)[..., None], shape).copy()
    return MaxfunProfile(radii=tuple(radii), means=means, center_rows=rows, center_cols=cols)


def _free_profile(win, g: PoolGrid, radii) -> MaxfunProfile:
    origin_rows, origin_cols = _window_origins(g)
    best_means, best_rows, best_cols = [], [], []
    for r in radii:
        side = 2 * r + 1
        span = g.window - 2 * r
        acc = np.zeros(win.shape[:-2] + (span, span), dtype=np.float64)
        for di in range(side):
            for dj in range(side):
                acc = acc + win[..., di : di + span, dj : dj + span]
        means = (acc / (side * side)).reshape(win.shape[:-2] + (span * span,))
        flat = np.argmax(means, axis=-1)
        best_means.append(np.take_along_axis(means, flat[..., None], axis=-1)[..., 0])
        best_rows.append(origin_rows + flat // span + r)
        best_cols.append(origin_cols + flat % span + r)
    return MaxfunProfile(
        radii=tuple(radii),
        means=np.stack(best_means, axis=-1),
        center_rows=np.stack(best_rows, axis=-1).astype(np.int64),
        center_cols=np.stack(best_cols, axis=-1).astype(np.int64),
    )


def maxfun_profile(X, g: PoolGrid, b: int, centered: bool = True, r_min: int = 1) -> MaxfunProfile:
    """
    Candidate means of maxfun pooling for every radius in [r_min, b].

    Computing the profile once lets callers evaluate several ``r_min`` values
    without re-summing (see :func:`reduce_profile`).
    """
    cfg = MaxfunConfig(r_min=r_min, b=b, centered=centered)
    cfg.validate_for_window(g.window)
    win = _windows(_prepare(X, g), g)
    if centered:
        return _centered_profile(win, g, cfg.radii)
    return _free_profile(win, g, cfg.radii)


def reduce_profile(profile: MaxfunProfile, r_min: int) -> PoolOutput:
    """Max over radii >= r_min; ties go to the smaller radius."""
    if isinstance(r_min, bool) or int(r_min) != r_min or r_min < 1:
        raise ValidationError(f"BAD_RADIUS: r_min={r_min!r} must be an integer >= 1")
    radii = np.asarray(profile.radii)
    keep = radii >= r_min
    if not np.any(keep):
        raise ValidationError(f"BAD_RADIUS: r_min={r_min} exceeds profile radii {profile.radii}")
    means = profile.means[..., keep]
    pick = np.argmax(means, axis=-1)[..., None]
    values = np.take_along_axis(means, pick, axis=-1)[..., 0]
    provenance = Provenance(
        radius=radii[keep][pick[..., 0]].astype(np.int64),
        center_row=np.take_along_axis(profile.center_rows[..., keep], pick, axis=-1)[..., 0],
        center_col=np.take_along_axis(profile.center_cols[..., keep], pick, axis=-1)[..., 0],
    )
    return PoolOutput(values=values, provenance=provenance)


def pool_maxfun(X, g: PoolGrid, cfg: MaxfunConfig) -> PoolOutput:
    """
    Maxfun pooling: per window, the largest mean over sub-squares of radius
    r in [r_min, b] (centered at the window center, or anywhere they fit).
    """
    cfg.validate_for_window(g.window)
    profile = maxfun_profile(X, g, cfg.b, centered=cfg.centered, r_min=cfg.r_min)
    out = reduce_profile(profile, cfg.r_min)
    logger.debug(f"[Pool] maxfun {cfg} on grid {g.out_shape}")
    return out


def pool_maxfun_1d(x, g1: PoolGrid1D, cfg: MaxfunConfig) -> PoolOutput:
    """
    1-D maxfun over intervals of length 2r+1, independently per channel.

    Args:
        x: Signal of shape (N,) or (N, C) (spatial positions x channels).
        g1 (PoolGrid1D): Intervals along the spatial axis.
        cfg (MaxfunConfig): Radius range and centering.

    Returns:
        PoolOutput: values of shape (out_len,) or (out_len, C); provenance
        ``center_row`` holds the winning spatial position.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[0] != g1.length:
        raise ValidationError(f"SHAPE_MISMATCH: signal {arr.shape} vs grid length {g1.length}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("NON_FINITE_VECTOR: NaN or inf entries")
    check_nonnegative(arr, where="1-D pooling input")
    cfg.validate_for_window(g1.window)

    channels = arr.reshape(g1.length, -1).T
    win = sliding_window_view(channels, g1.window, axis=-1)[:, :: g1.stride, :][:, : g1.out_len, :]
    origins = np.arange(g1.out_len, dtype=np.int64) * g1.stride

    best = None
    for r in cfg.radii:
        side = 2 * r + 1
        if cfg.centered:
            c = (g1.window - 1) // 2
            starts = [c - r]
        else:
            starts = list(range(0, g1.window - 2 * r))
        for start in starts:
            acc = np.zeros(win.shape[:-1], dtype=np.float64)
            for d in range(side):
                acc = acc + win[..., start + d]
            mean = acc / side
            if best is None:
                best = mean
                radius = np.full(mean.shape, r, dtype=np.int64)
                center = np.broadcast_to(origins + start + r, mean.shape).copy()
            else:
                better = mean > best
                best = np.where(better, mean, best)
                radius = np.where(better, r, radius)
                center = np.where(better, origins + start + r, center)

    values, radius, center = best.T, radius.T, center.T
    if arr.ndim == 1:
        values, radius, center = values[:, 0], radius[:, 0], center[:, 0]
    return PoolOutput(values=np.ascontiguousarray(values), provenance=Provenance(radius=radius, center_row=center))
