"""
Module: csc.stability
Description:
    Empirical verification of the stability of layered sparse coding with
    maxfun pooling:

        ||P_i* - P_i^||^2 <= ||G_i* - G_i^||^2 <= eps_i^2,
        eps_i^2 = 4 eps_{i-1}^2 / (1 - (2 lambda_i - 1) mu_i).

    Each trial synthesizes an exact ground-truth chain, perturbs the signal
    with noise of norm exactly eps0, solves the noisy problem layer by layer
    and checks both inequalities per layer.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.lattice import Vec, frob_norm
from csc.model import DcppModel, LayerSpec, dcpp_forward, greedy_solver, oracle_solver, pool_code
from csc.sparse import SparseCode, gen_sparse_code, l0_inf
from utils.errors import InfeasibleError, ValidationError
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)

SLACK = 1e-9
REPORT_COLUMNS = [
    "seed",
    "layer",
    "mu",
    "lambda",
    "eps_sq",
    "code_dev_sq",
    "pool_dev_sq",
    "pass",
    "lemma_pass",
    "status",
    "noise_norm",
]


def sparsity_condition(lam: float, mu: float) -> bool:
    """True iff lam < (1 + 1/mu) / 2; always true for mu = 0."""
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"BAD_COHERENCE: mu={mu} not in [0, 1]")
    if mu == 0.0:
        return True
    return lam < 0.5 * (1.0 + 1.0 / mu)


def epsilon_recursion(
    eps0: float, lambdas: Sequence[float], mus: Sequence[float], literal_mu1: bool = False
) -> List[float]:
    """
    Squared error budgets eps_1^2 .. eps_L^2.

    Args:
        eps0 (float): Noise bound of the input signal.
        lambdas: Stripe-sparsity bounds per layer.
        mus: Mutual coherence per layer.
        literal_mu1 (bool): Use mu of the first dictionary in every denominator.

    Raises:
        ValidationError: A non-positive denominator (violated sparsity condition).
    """
    if eps0 < 0:
        raise ValidationError(f"BAD_TOLERANCE: eps0={eps0}")
    if len(lambdas) != len(mus):
        raise ValidationError(f"LENGTH_MISMATCH: {len(lambdas)} lambdas vs {len(mus)} mus")
    eps_sq = eps0 * eps0
    out = []
    for i, (lam, mu) in enumerate(zip(lambdas, mus), start=1):
        mu_used = mus[0] if literal_mu1 else mu
        denom = 1.0 - (2.0 * lam - 1.0) * mu_used
        if denom <= 0.0:
            logger.error(f"[CSC] Sparsity condition violated at layer {i}: lambda={lam}, mu={mu_used}")
            raise ValidationError(
                f"SPARSITY_CONDITION_VIOLATED: layer {i} lambda={lam} mu={mu_used} (denominator {denom})"
            )
        eps_sq = 4.0 * eps_sq / denom
        out.append(eps_sq)
    return out


@dataclass
class GroundTruth:
    signal: Vec
    codes: List[SparseCode]
    pooled: List[Vec]


def _unpool(target: Vec, layer: LayerSpec) -> SparseCode:
    """
    A code whose pooled output is ``target``: each pooled value v is placed as
    v * (2 r_min + 1) at the middle of its window (disjoint windows only).
    """
    grid = layer.grid
    m1 = layer.dictionary.m1
    values = target.reshape(grid.out_len, m1)
    if np.any(values < 0):
        raise ValidationError(
            "NEGATIVE_SYNTHESIS: pooled targets are negative; use non-negative local filters"
        )
    blocks = np.zeros((layer.dictionary.N, m1))
    mid = (layer.window - 1) // 2
    for k in range(grid.out_len):
        blocks[k * grid.stride + mid] = values[k] * (2 * layer.pool.r_min + 1)
    return SparseCode(gamma=blocks.reshape(-1), n0=layer.dictionary.n0, m1=m1)


def synthesize_chain(model: DcppModel, seed: int, amp_range: Sequence[float] = (1.0, 2.0)) -> GroundTruth:
    """
    Builds an exact instance of the layered model, deepest layer first.

    The top code is drawn with :func:`gen_sparse_code`; every lower code is the
    unpooling of the layer above's reconstruction D_i G_i, so that
    Pool(G_{i-1}) = D_i G_i up to rounding. The signal is D_1 G_1.

    Raises:
        ValidationError: A synthesized code violates its layer's lambda, or
            reconstructions are negative.
    """
    layers = model.layers
    top = layers[-1]
    codes: List[Optional[SparseCode]] = [None] * len(layers)
    codes[-1] = gen_sparse_code(
        seed, top.dictionary.N, top.dictionary.n0, top.dictionary.m1, top.lam, amp_range
    )
    for t in range(len(layers) - 1, 0, -1):
        target = layers[t].dictionary.D @ codes[t].gamma
        code = _unpool(target, layers[t - 1])
        if l0_inf(code) > layers[t - 1].lam:
            raise ValidationError(
                f"SYNTHESIS_SPARSITY: layer {t} needs lambda >= {l0_inf(code)}, has {layers[t - 1].lam}"
            )
        codes[t - 1] = code

    pooled = [pool_code(code, layer) for code, layer in zip(codes, layers)]
    signal = layers[0].dictionary.D @ codes[0].gamma
    return GroundTruth(signal=signal, codes=list(codes), pooled=pooled)


def boundary_noise(length: int, norm: float, seed: int) -> Vec:
    """Direction uniform on the sphere, Euclidean norm exactly ``norm``."""
    if norm == 0:
        return np.zeros(length)
    rng = np.random.default_rng([seed, 7])
    direction = rng.standard_normal(length)
    return norm * direction / np.linalg.norm(direction)


@dataclass
class LayerOutcome:
    seed: int
    layer: int
    mu: float
    lam: int
    eps_sq: float
    code_dev_sq: float
    pool_dev_sq: float
    passed: bool
    lemma_pass: bool
    status: str
    noise_norm: float


@dataclass
class StabilityReport:
    outcomes: List[LayerOutcome] = field(default_factory=list)
    eps0: float = 0.0
    solver: str = "oracle"

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "seed": o.seed,
                "layer": o.layer,
                "mu": o.mu,
                "lambda": o.lam,
                "eps_sq": o.eps_sq,
                "code_dev_sq": o.code_dev_sq,
                "pool_dev_sq": o.pool_dev_sq,
                "pass": o.passed,
                "lemma_pass": o.lemma_pass,
                "status": o.status,
                "noise_norm": o.noise_norm,
            }
            for o in self.outcomes
        ]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    @property
    def trials(self) -> int:
        return len({o.seed for o in self.outcomes})

    @property
    def failed_trials(self) -> int:
        return len({o.seed for o in self.outcomes if not o.passed})

    @property
    def pass_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return 1.0 - self.failed_trials / self.trials

    @property
    def lemma_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        failed = {o.seed for o in self.outcomes if not o.lemma_pass}
        return 1.0 - len(failed) / self.trials

    @property
    def all_passed(self) -> bool:
        return bool(self.outcomes) and all(o.passed for o in self.outcomes)


def unpooled_load(layer: LayerSpec) -> int:
    """Worst-case l0_inf of a code unpooled into ``layer``: every window middle, every channel."""
    full = _unpool(np.ones(layer.pooled_len), layer)
    return l0_inf(full)


def check_preconditions(model: DcppModel, literal_mu1: bool = False) -> None:
    """
    Raises:
        ValidationError: Overlapping pooling windows, or a layer violating
            lambda < (1 + 1/mu) / 2 (the message names the layer, mu and
            lambda), or a lower layer whose lambda cannot hold the code
            unpooled into it from the layer above.
    """
    mu1 = model.layers[0].dictionary.mu
    for i, layer in enumerate(model.layers, start=1):
        if layer.stride != layer.window:
            raise ValidationError(
                f"OVERLAPPING_WINDOWS: layer {i} has window={layer.window}, stride={layer.stride}; "
                "the stability bound needs disjoint windows"
            )
        mu = mu1 if literal_mu1 else layer.dictionary.mu
        if not sparsity_condition(layer.lam, mu):
            logger.error(f"[CSC] Layer {i} fails the sparsity condition (mu={mu:.6f}, lambda={layer.lam})")
            raise ValidationError(
                f"SPARSITY_CONDITION_VIOLATED: layer {i} mu={mu:.6f} lambda={layer.lam} "
                f"bound={0.5 * (1 + 1 / mu) if mu > 0 else float('inf'):.6f}"
            )

    for i, layer in enumerate(model.layers[:-1], start=1):
        load = unpooled_load(layer)
        if load > layer.lam:
            logger.error(f"[CSC] Layer {i} cannot hold unpooled codes (load={load}, lambda={layer.lam})")
            raise ValidationError(
                f"SYNTHESIS_SPARSITY: layer {i} needs lambda >= {load} to hold unpooled codes, has {layer.lam}"
            )


def run_trial(
    model: DcppModel,
    eps0: float,
    seed: int,
    eps_sq: Sequence[float],
    solver: str = "oracle",
    amp_range: Sequence[float] = (1.0, 2.0),
) -> List[LayerOutcome]:
    """One seeded trial; returns one outcome per layer."""
    truth = synthesize_chain(model, seed, amp_range)
    noise = boundary_noise(model.input_len, eps0, seed)
    observed = truth.signal + noise

    if solver == "oracle":
        solve = oracle_solver([code.support for code in truth.codes])
    elif solver == "greedy":
        solve = greedy_solver(nonneg=True)
    else:
        raise ValidationError(f"UNKNOWN_SOLVER: {solver}")

    noise_norm = frob_norm(noise)
    try:
        result = dcpp_forward(observed, model, solve, strict=False)
    except InfeasibleError as e:
        logger.warning(f"[CSC] Trial seed={seed} aborted at layer {e.layer}: {e}")
        return [
            LayerOutcome(
                seed=seed, layer=i, mu=layer.dictionary.mu, lam=layer.lam, eps_sq=eps_sq[i - 1],
                code_dev_sq=math.nan, pool_dev_sq=math.nan, passed=False, lemma_pass=False,
                status="aborted", noise_norm=noise_norm,
            )
            for i, layer in enumerate(model.layers, start=1)
        ]

    outcomes = []
    for i, layer in enumerate(model.layers, start=1):
        code_dev = frob_norm(truth.codes[i - 1].gamma - result.codes[i - 1].gamma) ** 2
        pool_dev = frob_norm(truth.pooled[i - 1] - result.pooled[i - 1]) ** 2
        lemma_ok = pool_dev <= code_dev + SLACK
        bound_ok = code_dev <= eps_sq[i - 1] + SLACK
        outcomes.append(
            LayerOutcome(
                seed=seed,
                layer=i,
                mu=layer.dictionary.mu,
                lam=layer.lam,
                eps_sq=eps_sq[i - 1],
                code_dev_sq=code_dev,
                pool_dev_sq=pool_dev,
                passed=bool(lemma_ok and bound_ok),
                lemma_pass=bool(lemma_ok),
                status="infeasible" if i in result.infeasible_layers else "solved",
                noise_norm=noise_norm,
            )
        )
    return outcomes


def verify_stability(
    model: DcppModel,
    eps0: float,
    seeds: Sequence[int],
    solver: str = "oracle",
    amp_range: Sequence[float] = (1.0, 2.0),
    literal_mu1: bool = False,
    threads: Optional[int] = None,
) -> StabilityReport:
    """
    Runs seeded stability trials.

    Preconditions are checked before any trial runs. Layer i's pursuit budget is
    the error bound of its input (eps0 for the first layer, eps_{i-1} after).

    Raises:
        ValidationError: Violated preconditions or unknown solver.
    """
    if solver not in ("oracle", "greedy"):
        raise ValidationError(f"UNKNOWN_SOLVER: {solver}")
    check_preconditions(model, literal_mu1=literal_mu1)
    mus = [layer.dictionary.mu for layer in model.layers]
    eps_sq = epsilon_recursion(eps0, [layer.lam for layer in model.layers], mus, literal_mu1=literal_mu1)

    budgets = [eps0] + [math.sqrt(e) for e in eps_sq[:-1]]
    budgeted = DcppModel(
        layers=tuple(replace(layer, eps=budget) for layer, budget in zip(model.layers, budgets))
    )

    logger.info(f"[CSC] Running {len(seeds)} stability trials (solver={solver}, eps0={eps0})")
    per_trial = parallel_map(
        lambda seed: run_trial(budgeted, eps0, int(seed), eps_sq, solver=solver, amp_range=amp_range),
        seeds,
        threads,
    )
    report = StabilityReport(outcomes=[o for trial in per_trial for o in trial], eps0=eps0, solver=solver)
    logger.info(f"[CSC] Pass rate {report.pass_rate:.4f} over {report.trials} trials")
    return report
