"""
Module: csc.sparse
Description:
    Convolutional sparse codes: stripes, the l0,inf stripe-sparsity norm and a
    seeded generator of codes with bounded stripe sparsity.

    A code of length N*m1 is N blocks of m1 coefficients; stripe j is the
    2n0-1 consecutive blocks starting at block j, indices taken mod N.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from core.lattice import Vec, as_vec
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SparseCode:
    gamma: Vec
    n0: int
    m1: int

    def __post_init__(self):
        gamma = as_vec(self.gamma)
        object.__setattr__(self, "gamma", gamma)
        if self.n0 < 1 or self.m1 < 1:
            raise ValidationError(f"BAD_CODE_STRUCTURE: n0={self.n0}, m1={self.m1}")
        if gamma.size % self.m1:
            raise ValidationError(f"BAD_CODE_LENGTH: {gamma.size} not divisible by m1={self.m1}")

    @property
    def N(self) -> int:
        return self.gamma.size // self.m1

    @property
    def blocks(self) -> np.ndarray:
        """View of shape (N, m1): spatial positions x channels."""
        return self.gamma.reshape(self.N, self.m1)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.gamma != 0.0)


def _stripe_blocks(N: int, n0: int, j: int) -> np.ndarray:
    return (j + np.arange(2 * n0 - 1)) % N


def stripe(code: SparseCode, j: int) -> Vec:
    """Stripe j, length (2n0-1)*m1. Blocks repeat when 2n0-1 exceeds N."""
    if not 0 <= j < code.N:
        raise ValidationError(f"STRIPE_OUT_OF_RANGE: j={j} not in [0, {code.N})")
    return code.blocks[_stripe_blocks(code.N, code.n0, j)].reshape(-1)


def stripes_by_block(N: int, n0: int) -> List[List[int]]:
    """For each block, the stripes that contain it."""
    owners: List[List[int]] = [[] for _ in range(N)]
    for j in range(N):
        for blk in np.unique(_stripe_blocks(N, n0, j)):
            owners[int(blk)].append(j)
    return owners


def l0_inf(code: SparseCode) -> int:
    """
    Largest number of exact non-zeros in any stripe. A block is counted once
    per stripe even when the stripe wraps onto it twice.
    """
    per_block = np.count_nonzero(code.blocks != 0.0, axis=1)
    best = 0
    for j in range(code.N):
        count = int(per_block[np.unique(_stripe_blocks(code.N, code.n0, j))].sum())
        best = max(best, count)
    return best


def gen_sparse_code(
    rng_seed: int,
    N: int,
    n0: int,
    m1: int,
    lam: int,
    amp_range: Sequence[float] = (1.0, 2.0),
    fill: float = 0.5,
    signed: bool = False,
) -> SparseCode:
    """
    Draws a code with l0_inf <= lam.

    Coefficients are visited in a seeded random order; each is tried with
    probability ``fill`` and kept only if no stripe would exceed ``lam``.
    At least one coefficient is always set.

    Args:
        rng_seed (int): Seed of the generator.
        N, n0, m1 (int): Code structure.
        lam (int): Stripe-sparsity bound (>= 1).
        amp_range: (low, high) magnitudes, 0 < low <= high.
        fill (float): Probability of trying each coefficient.
        signed (bool): Flip signs at random.

    Raises:
        ValidationError: lam < 1, bad amplitude range or structure.
    """
    if lam < 1:
        raise ValidationError(f"INFEASIBLE_SPARSITY: lambda={lam} < 1")
    low, high = float(amp_range[0]), float(amp_range[1])
    if not 0 < low <= high:
        raise ValidationError(f"BAD_AMPLITUDE_RANGE: {amp_range}")
    if N < 1 or n0 < 1 or m1 < 1:
        raise ValidationError(f"BAD_CODE_STRUCTURE: N={N}, n0={n0}, m1={m1}")

    rng = np.random.default_rng(rng_seed)
    owners = stripes_by_block(N, n0)
    stripe_counts = np.zeros(N, dtype=np.int64)
    gamma = np.zeros(N * m1)

    order = rng.permutation(N * m1)
    tries = rng.random(N * m1) < fill
    tries[0] = True
    for idx, attempt in zip(order, tries):
        if not attempt:
            continue
        blk = idx // m1
        if stripe_counts[owners[blk]].max() >= lam:
            continue
        stripe_counts[owners[blk]] += 1
        gamma[idx] = rng.uniform(low, high)

    if signed:
        signs = np.where(rng.random(N * m1) < 0.5, -1.0, 1.0)
        gamma = gamma * signs
    return SparseCode(gamma=gamma, n0=n0, m1=m1)
