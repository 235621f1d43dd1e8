"""
Module: pooling.grid
Description:
    Geometry of pooling windows (2-D and 1-D) and the maxfun radius settings.
    Windows are emitted only where they lie fully inside the input; with
    window == stride they tile the input into disjoint squares.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

from utils.errors import ValidationError

logger = logging.getLogger(__name__)

Index = Tuple[int, int]


def _out_len(length: int, window: int, stride: int) -> int:
    return (length - window) // stride + 1


@dataclass(frozen=True)
class PoolGrid:
    """Windows Q[k, l] = rows [k*stride, k*stride+window) x cols [l*stride, l*stride+window)."""

    rows: int
    cols: int
    window: int
    stride: int
    out_rows: int
    out_cols: int

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def out_shape(self) -> Tuple[int, int]:
        return (self.out_rows, self.out_cols)

    @property
    def disjoint(self) -> bool:
        return self.stride >= self.window

    def origin(self, k: int, l: int) -> Index:
        """Top-left pixel of window (k, l)."""
        if not (0 <= k < self.out_rows and 0 <= l < self.out_cols):
            raise ValidationError(f"WINDOW_OUT_OF_RANGE: ({k}, {l}) not in {self.out_shape}")
        return (k * self.stride, l * self.stride)

    def region(self, k: int, l: int) -> Tuple[slice, slice]:
        i0, j0 = self.origin(k, l)
        return slice(i0, i0 + self.window), slice(j0, j0 + self.window)

    def index_set(self, k: int, l: int) -> Tuple[Index, ...]:
        """Q[k, l] as explicit indices, row-major."""
        i0, j0 = self.origin(k, l)
        return tuple(
            (i, j) for i in range(i0, i0 + self.window) for j in range(j0, j0 + self.window)
        )

    def windows(self) -> Iterator[Tuple[Index, Tuple[slice, slice]]]:
        """Yields ((k, l), region) from top-left to bottom-right."""
        for k in range(self.out_rows):
            for l in range(self.out_cols):
                yield (k, l), self.region(k, l)


def make_grid(M: int, N: int, window: int, stride: int) -> PoolGrid:
    """
    Builds the pooling grid of an M x N input.

    Raises:
        ValidationError: Non-positive sizes, zero stride, or a window larger
            than the input.
    """
    if M < 1 or N < 1:
        raise ValidationError(f"BAD_INPUT_SHAPE: {M}x{N}")
    if stride < 1:
        raise ValidationError(f"BAD_STRIDE: stride={stride} must be >= 1")
    if window < 1:
        raise ValidationError(f"BAD_WINDOW: window={window} must be >= 1")
    if window > min(M, N):
        logger.error(f"[Pool] Window {window} does not fit a {M}x{N} input")
        raise ValidationError(f"WINDOW_EXCEEDS_INPUT: window={window} > min(M, N)={min(M, N)}")
    return PoolGrid(
        rows=M,
        cols=N,
        window=window,
        stride=stride,
        out_rows=_out_len(M, window, stride),
        out_cols=_out_len(N, window, stride),
    )


@dataclass(frozen=True)
class PoolGrid1D:
    """Intervals [k*stride, k*stride+window) along one spatial axis."""

    length: int
    window: int
    stride: int
    out_len: int

    def region(self, k: int) -> slice:
        if not 0 <= k < self.out_len:
            raise ValidationError(f"WINDOW_OUT_OF_RANGE: {k} not in [0, {self.out_len})")
        return slice(k * self.stride, k * self.stride + self.window)


def make_grid_1d(length: int, window: int, stride: int) -> PoolGrid1D:
    """1-D analogue of :func:`make_grid`."""
    if length < 1:
        raise ValidationError(f"BAD_INPUT_SHAPE: length={length}")
    if stride < 1:
        raise ValidationError(f"BAD_STRIDE: stride={stride} must be >= 1")
    if window < 1:
        raise ValidationError(f"BAD_WINDOW: window={window} must be >= 1")
    if window > length:
        raise ValidationError(f"WINDOW_EXCEEDS_INPUT: window={window} > length={length}")
    return PoolGrid1D(length=length, window=window, stride=stride, out_len=_out_len(length, window, stride))


@dataclass(frozen=True)
class MaxfunConfig:
    """
    Radius range [r_min, b] of the maxfun candidates.

    ``b`` is the largest radius; a window's side length is always called
    ``window``. Centered mode uses the window center only; otherwise every
    center whose (2r+1)-square fits in the window competes.
    """

    r_min: int = 1
    b: int = 1
    centered: bool = True

    def __post_init__(self):
        if self.r_min < 1:
            raise ValidationError(f"BAD_RADIUS: r_min={self.r_min} must be >= 1")
        if self.b < self.r_min:
            raise ValidationError(f"BAD_RADIUS: b={self.b} < r_min={self.r_min}")

    def validate_for_window(self, window: int) -> None:
        """
        Raises:
            ValidationError: If the candidate squares cannot fit the window.
        """
        if 2 * self.b + 1 > window:
            logger.error(f"[Pool] Radius bound b={self.b} too large for window {window}")
            raise ValidationError(f"RADIUS_EXCEEDS_WINDOW: 2b+1={2 * self.b + 1} > window={window}")
        if self.centered and window % 2 == 0:
            logger.error(f"[Pool] Centered maxfun needs an odd window, got {window}")
            raise ValidationError(f"EVEN_WINDOW_CENTERED: window={window} has no center pixel")

    @property
    def radii(self) -> range:
        return range(self.r_min, self.b + 1)


def subsquare(center: Index, r: int, shape: Optional[Tuple[int, int]] = None) -> Tuple[Index, ...]:
    """
    Indices of the (2r+1) x (2r+1) square centered at ``center``, row-major.

    Raises:
        ValidationError: Negative radius, or a square leaving the input.
    """
    i, j = center
    if r < 0:
        raise ValidationError(f"BAD_RADIUS: r={r}")
    if i - r < 0 or j - r < 0:
        raise ValidationError(f"SUBSQUARE_OUT_OF_BOUNDS: center={center}, r={r}")
    if shape is not None and (i + r >= shape[0] or j + r >= shape[1]):
        raise ValidationError(f"SUBSQUARE_OUT_OF_BOUNDS: center={center}, r={r}, shape={shape}")
    return tuple((a, c) for a in range(i - r, i + r + 1) for c in range(j - r, j + r + 1))
