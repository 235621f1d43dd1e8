"""
Module: pooling.naive
Description:
    Plain loop implementations of every pooling operator. They share no code
    with ``pooling.operators`` beyond ``subsquare`` and serve as oracles for the
    equivalence suites (tests and ``selftest``). Each window sum is accumulated
    in row-major order with Python floats.
"""
from typing import List

import numpy as np

from pooling.grid import subsquare


def _origins(length: int, window: int, stride: int) -> List[int]:
    return list(range(0, length - window + 1, stride))


def _window_entries(X, i0: int, j0: int, window: int) -> List[float]:
    return [float(X[i, j]) for i in range(i0, i0 + window) for j in range(j0, j0 + window)]


def _loop(X, window: int, stride: int, reduce) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    rows = _origins(X.shape[0], window, stride)
    cols = _origins(X.shape[1], window, stride)
    out = np.zeros((len(rows), len(cols)))
    for k, i0 in enumerate(rows):
        for l, j0 in enumerate(cols):
            out[k, l] = reduce(X, i0, j0)
    return out


def _mean(values: List[float]) -> float:
    acc = 0.0
    for v in values:
        acc += v
    return acc / len(values)


def naive_avg(X, window: int, stride: int) -> np.ndarray:
    return _loop(X, window, stride, lambda A, i0, j0: _mean(_window_entries(A, i0, j0, window)))


def naive_max(X, window: int, stride: int) -> np.ndarray:
    def reduce(A, i0, j0):
        best = None
        for v in _window_entries(A, i0, j0, window):
            if best is None or v > best:
                best = v
        return best

    return _loop(X, window, stride, reduce)


def naive_mixed(X, window: int, stride: int, alpha: float) -> np.ndarray:
    mx = naive_max(X, window, stride)
    av = naive_avg(X, window, stride)
    out = np.zeros(mx.shape)
    for k in range(mx.shape[0]):
        for l in range(mx.shape[1]):
            out[k, l] = alpha * mx[k, l] + (1.0 - alpha) * av[k, l]
    return out


def naive_stochastic(X, window: int, stride: int) -> np.ndarray:
    def reduce(A, i0, j0):
        squares, total = 0.0, 0.0
        for v in _window_entries(A, i0, j0, window):
            squares += v * v
        for v in _window_entries(A, i0, j0, window):
            total += v
        return squares / total if total > 0 else 0.0

    return _loop(X, window, stride, reduce)


def naive_maxfun(X, window: int, stride: int, r_min: int, b: int, centered: bool = True) -> np.ndarray:
    """Enumerates (r, center) candidates in order; the first strict maximum wins."""

    def reduce(A, i0, j0):
        best = None
        for r in range(r_min, b + 1):
            if centered:
                c = (window - 1) // 2
                centers = [(i0 + c, j0 + c)]
            else:
                centers = [
                    (i0 + p, j0 + q)
                    for p in range(r, window - r)
                    for q in range(r, window - r)
                ]
            for center in centers:
                value = _mean([float(A[i, j]) for i, j in subsquare(center, r)])
                if best is None or value > best:
                    best = value
        return best

    return _loop(X, window, stride, reduce)


def naive_maxfun_1d(x, window: int, stride: int, r_min: int, b: int, centered: bool = True) -> np.ndarray:
    """1-D oracle on a signal of shape (N,) or (N, C)."""
    arr = np.asarray(x, dtype=np.float64)
    signal = arr.reshape(arr.shape[0], -1)
    origins = _origins(signal.shape[0], window, stride)
    out = np.zeros((len(origins), signal.shape[1]))
    for ch in range(signal.shape[1]):
        for k, o in enumerate(origins):
            best = None
            for r in range(r_min, b + 1):
                starts = [(window - 1) // 2 - r] if centered else list(range(0, window - 2 * r))
                for s in starts:
                    value = _mean([float(signal[o + s + d, ch]) for d in range(2 * r + 1)])
                    if best is None or value > best:
                        best = value
            out[k, ch] = best
    return out[:, 0] if arr.ndim == 1 else out
