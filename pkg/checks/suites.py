"""
Module: checks.suites
Description:
    End-to-end verification suites run by ``selftest``: equivalence with the
    loop oracles, the avg <= maxfun <= max sandwich, the degenerate identity
    with average pooling, non-expansiveness, monotonicity, error-bound
    arithmetic, mutual coherence and the layered stability bound.
"""
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

import numpy as np

from csc.dictionary import mutual_coherence
from csc.model import build_model
from csc.stability import epsilon_recursion, verify_stability
from pooling.grid import MaxfunConfig, make_grid, make_grid_1d
from pooling.naive import (
    naive_avg,
    naive_max,
    naive_maxfun,
    naive_maxfun_1d,
    naive_mixed,
    naive_stochastic,
)
from pooling.operators import (
    pool_avg,
    pool_max,
    pool_maxfun,
    pool_maxfun_1d,
    pool_mixed,
    pool_stochastic,
)

logger = logging.getLogger(__name__)

SLACK = 1e-12


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    failures: int = 0
    seconds: float = 0.0
    detail: str = ""

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<20s} trials={self.trials:<6d} failures={self.failures:<4d} {self.seconds:6.2f}s"
        return f"{text}  {self.detail}" if self.detail else text


def _random_input(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform [0, 1) values with about a quarter of the entries zeroed."""
    X = rng.random(shape)
    X[rng.random(shape) < 0.25] = 0.0
    return X


def oracle_equivalence(seed: int = 0, inputs: int = 100) -> SuiteResult:
    """Every operator equals its loop oracle bit for bit, in both grid regimes."""
    rng = np.random.default_rng([seed, 1])
    failures = []
    for t in range(inputs):
        window = int(rng.integers(2, 6))
        stride = window if t % 2 == 0 else int(rng.integers(1, window))
        M, N = (int(v) for v in rng.integers(window, 33, size=2))
        X = _random_input(rng, (M, N))
        g = make_grid(M, N, window, stride)
        alpha = float(rng.random())
        b = int(rng.integers(1, (window - 1) // 2 + 1)) if window >= 3 else 0

        pairs = {
            "avg": (pool_avg(X, g).values, naive_avg(X, window, stride)),
            "max": (pool_max(X, g).values, naive_max(X, window, stride)),
            "mixed": (pool_mixed(X, g, alpha).values, naive_mixed(X, window, stride, alpha)),
            "stochastic": (pool_stochastic(X, g).values, naive_stochastic(X, window, stride)),
        }
        if b >= 1:
            r_min = int(rng.integers(1, b + 1))
            free = MaxfunConfig(r_min=r_min, b=b, centered=False)
            pairs["maxfun"] = (
                pool_maxfun(X, g, free).values,
                naive_maxfun(X, window, stride, r_min, b, centered=False),
            )
            x1 = X[:, : min(N, 4)]
            g1 = make_grid_1d(M, window, stride)
            pairs["maxfun_1d"] = (
                pool_maxfun_1d(x1, g1, free).values,
                naive_maxfun_1d(x1, window, stride, r_min, b, centered=False),
            )
            if window % 2 == 1:
                cfg = MaxfunConfig(r_min=r_min, b=b, centered=True)
                pairs["centered_maxfun"] = (
                    pool_maxfun(X, g, cfg).values,
                    naive_maxfun(X, window, stride, r_min, b, centered=True),
                )
        for name, (fast, slow) in pairs.items():
            if not np.array_equal(fast, slow):
                failures.append(f"{name}@{t}")
    return SuiteResult(
        name="oracle_equivalence",
        passed=not failures,
        trials=inputs,
        failures=len(failures),
        detail=", ".join(failures[:5]),
    )


def sandwich(seed: int = 0, images: int = 1000, size: int = 63, window: int = 7) -> SuiteResult:
    """avg <= pooled <= max per cell, for both maxfun variants with 2b+1 = window, stochastic and mixed."""
    rng = np.random.default_rng([seed, 2])
    X = _random_input(rng, (images, size, size))
    g = make_grid(size, size, window, window)
    b = (window - 1) // 2
    avg = pool_avg(X, g).values
    mx = pool_max(X, g).values
    bad_cells = 0
    for centered in (True, False):
        mf = pool_maxfun(X, g, MaxfunConfig(r_min=1, b=b, centered=centered)).values
        bad_cells += int(np.count_nonzero((avg > mf + SLACK) | (mf > mx + SLACK)))
    between = [pool_stochastic(X, g).values] + [pool_mixed(X, g, alpha).values for alpha in (0.0, 0.5, 1.0)]
    for pooled in between:
        bad_cells += int(np.count_nonzero((avg > pooled + SLACK) | (pooled > mx + SLACK)))
    return SuiteResult(
        name="sandwich",
        passed=bad_cells == 0,
        trials=images,
        failures=bad_cells,
        detail=f"{avg.size} cells per operator",
    )


def degenerate_identity(seed: int = 0, inputs: int = 100) -> SuiteResult:
    """r_min = b with 2b+1 = window reduces maxfun to average pooling exactly."""
    rng = np.random.default_rng([seed, 3])
    failures = 0
    for t in range(inputs):
        b = int(rng.integers(1, 4))
        window = 2 * b + 1
        stride = window if t % 2 == 0 else int(rng.integers(1, window))
        M, N = (int(v) for v in rng.integers(window, 33, size=2))
        X = _random_input(rng, (M, N))
        g = make_grid(M, N, window, stride)
        avg = pool_avg(X, g).values
        for centered in (True, False):
            mf = pool_maxfun(X, g, MaxfunConfig(r_min=b, b=b, centered=centered)).values
            failures += int(not np.array_equal(mf, avg))
    return SuiteResult(name="degenerate_identity", passed=failures == 0, trials=inputs, failures=failures)


def _pair_norms(A: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(A.reshape(A.shape[0], -1) ** 2, axis=1))


def _flip_perturbation(rng: np.random.Generator, X: np.ndarray, window: int) -> np.ndarray:
    """Raises or lowers the central pixel of every window so the winning radius tends to change."""
    Y = X.copy()
    c = (window - 1) // 2
    scale = rng.uniform(0.0, 1.0, size=(X.shape[0], 1, 1))
    centers = Y[:, c::window, c::window]
    Y[:, c::window, c::window] = np.where(
        rng.random(centers.shape) < 0.5, centers + scale, centers * rng.random(centers.shape)
    )
    return Y


def nonexpansive(seed: int = 0, pairs: int = 10000) -> SuiteResult:
    """
    ||P(X) - P(Y)|| <= ||X - Y|| for disjoint windows, 2-D and 1-D, half of the
    pairs random and half with argmax-flipping perturbations.
    """
    rng = np.random.default_rng([seed, 4])
    half = pairs // 2
    failures = 0

    window, b, size = 5, 2, 15
    g = make_grid(size, size, window, window)
    X = _random_input(rng, (half, size, size))
    Y = np.concatenate(
        [_random_input(rng, (half // 2, size, size)), _flip_perturbation(rng, X[half // 2 :], window)]
    )
    for centered in (True, False):
        cfg = MaxfunConfig(r_min=1, b=b, centered=centered)
        P = pool_maxfun(X, g, cfg).values
        Q = pool_maxfun(Y, g, cfg).values
        failures += int(np.count_nonzero(_pair_norms(P - Q) > _pair_norms(X - Y) + SLACK))

    length = 30
    g1 = make_grid_1d(length, window, window)
    x = _random_input(rng, (length, pairs - half))
    y = x.copy()
    y[window // 2 :: window] += rng.uniform(0.0, 1.0, size=y[window // 2 :: window].shape)
    y[:, ::2] = _random_input(rng, (length, y[:, ::2].shape[1]))
    for centered in (True, False):
        cfg = MaxfunConfig(r_min=1, b=b, centered=centered)
        p = pool_maxfun_1d(x, g1, cfg).values
        q = pool_maxfun_1d(y, g1, cfg).values
        lhs = np.sqrt(np.sum((p - q) ** 2, axis=0))
        rhs = np.sqrt(np.sum((x - y) ** 2, axis=0))
        failures += int(np.count_nonzero(lhs > rhs + SLACK))

    return SuiteResult(
        name="nonexpansive",
        passed=failures == 0,
        trials=pairs,
        failures=failures,
        detail=f"{half} 2-D pairs, {pairs - half} 1-D pairs",
    )


def monotone(seed: int = 0, inputs: int = 200) -> SuiteResult:
    """
    X <= Y entrywise implies pooled X <= pooled Y for avg, max, mixed and maxfun.

    Stochastic pooling is left out: it is not monotone. [[2, 0], [0, 0]] pools
    to 2 while the larger [[2, 1], [0, 0]] pools to 5/3.
    """
    rng = np.random.default_rng([seed, 5])
    size, window = 12, 5
    X = _random_input(rng, (inputs, size, size))
    Y = X + rng.random(X.shape) * (rng.random(X.shape) < 0.5)
    failures = 0
    for stride in (window, 2):
        g = make_grid(size, size, window, stride)
        ops: Dict[str, Callable[[np.ndarray], Any]] = {
            "avg": lambda A: pool_avg(A, g),
            "max": lambda A: pool_max(A, g),
            "mixed": lambda A: pool_mixed(A, g, 0.3),
            "maxfun": lambda A: pool_maxfun(A, g, MaxfunConfig(r_min=1, b=2, centered=True)),
            "maxfun_noncentered": lambda A: pool_maxfun(A, g, MaxfunConfig(r_min=1, b=2, centered=False)),
        }
        for op in ops.values():
            failures += int(np.count_nonzero(op(X).values > op(Y).values + SLACK))
    return SuiteResult(name="monotone", passed=failures == 0, trials=inputs, failures=failures)


def epsilon_arithmetic() -> SuiteResult:
    """Direct substitution and the mu = 0 doubling law."""
    failures = []
    eps = epsilon_recursion(0.1, [1], [0.5])
    if abs(eps[0] - 0.08) > 1e-15:
        failures.append(f"eps1^2={eps[0]!r}")
    eps0 = 0.3
    chain = epsilon_recursion(eps0, [1, 2, 3, 4], [0.0] * 4)
    previous = eps0 * eps0
    for i, value in enumerate(chain, start=1):
        if value != 4.0 * previous:
            failures.append(f"layer {i} not doubled")
        previous = value
    return SuiteResult(
        name="epsilon_arithmetic", passed=not failures, trials=5, failures=len(failures), detail=", ".join(failures)
    )


def coherence(seed: int = 0, dictionaries: int = 50) -> SuiteResult:
    """mutual_coherence against a pairwise loop; identity gives exactly 0."""
    rng = np.random.default_rng([seed, 6])
    failures = 0
    for _ in range(dictionaries):
        n, m = (int(v) for v in rng.integers(2, 12, size=2))
        D = rng.standard_normal((n, m))
        best = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                di, dj = D[:, i], D[:, j]
                best = max(best, abs(float(di @ dj)) / (np.linalg.norm(di) * np.linalg.norm(dj)))
        failures += int(abs(mutual_coherence(D) - min(best, 1.0)) > 1e-14)
    failures += int(mutual_coherence(np.eye(8)) != 0.0)
    return SuiteResult(name="coherence", passed=failures == 0, trials=dictionaries + 1, failures=failures)


def stability(csc_cfg: Dict[str, Any], seed: int = 0, trials: int = 20) -> SuiteResult:
    """Layered stability bound with the oracle solver on the configured model."""
    model = build_model(csc_cfg["N"], csc_cfg["layers"])
    report = verify_stability(
        model,
        float(csc_cfg["eps0"]),
        [seed + t for t in range(trials)],
        solver="oracle",
        amp_range=tuple(csc_cfg["amp_range"]),
        literal_mu1=bool(csc_cfg["literal_mu1"]),
    )
    return SuiteResult(
        name="stability",
        passed=report.all_passed,
        trials=report.trials,
        failures=report.failed_trials,
        detail=f"pass rate {report.pass_rate:.4f}",
    )


def _timed(fn: Callable[[], SuiteResult]) -> SuiteResult:
    start = time.perf_counter()
    result = fn()
    result.seconds = time.perf_counter() - start
    logger.info(f"[Selftest] {result.summary()}")
    return result


def run_all(selftest_cfg: Dict[str, Any], csc_cfg: Dict[str, Any]) -> List[SuiteResult]:
    """Runs every suite in a fixed order."""
    seed = int(selftest_cfg["seed"])
    suites: List[Callable[[], SuiteResult]] = [
        lambda: oracle_equivalence(seed, int(selftest_cfg["oracle_inputs"])),
        lambda: sandwich(seed, int(selftest_cfg["sandwich_images"])),
        lambda: degenerate_identity(seed, int(selftest_cfg["oracle_inputs"])),
        lambda: nonexpansive(seed, int(selftest_cfg["nonexpansive_pairs"])),
        lambda: monotone(seed, int(selftest_cfg["monotone_inputs"])),
        epsilon_arithmetic,
        lambda: coherence(seed, int(selftest_cfg["coherence_dicts"])),
        lambda: stability(csc_cfg, seed, int(selftest_cfg["stability_trials"])),
    ]
    return [_timed(suite) for suite in suites]
