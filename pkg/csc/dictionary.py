"""
Module: csc.dictionary
Description:
    Global convolutional dictionaries built by circularly shifting a local
    n0 x m1 filter matrix to all N positions, and their mutual coherence.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.lattice import Mat
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


def mutual_coherence(D) -> float:
    """
    max over i != j of |d_i . d_j| / (||d_i|| ||d_j||).

    Raises:
        ValidationError: Non-matrix input or a zero column.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2:
        raise ValidationError(f"BAD_MATRIX_SHAPE: {D.shape}")
    norms = np.linalg.norm(D, axis=0)
    if np.any(norms == 0):
        raise ValidationError(f"ZERO_COLUMN: columns {np.flatnonzero(norms == 0).tolist()}")
    if D.shape[1] < 2:
        return 0.0
    normalized = D / norms
    gram = np.abs(normalized.T @ normalized)
    np.fill_diagonal(gram, 0.0)
    return float(min(gram.max(), 1.0))


@dataclass(frozen=True)
class ConvDictionary:
    """
    D has N rows and N*m1 columns; column block j (columns j*m1 .. j*m1+m1-1)
    is the normalized local matrix placed on rows j .. j+n0-1 (mod N).
    """

    N: int
    n0: int
    m1: int
    local: Mat
    D: Mat
    mu: float

    @property
    def atoms(self) -> int:
        return self.N * self.m1

    def stripe_dictionary(self, j: int) -> Mat:
        """
        Stripe dictionary: the n0 rows j+n0-1 .. j+2n0-2 (mod N) of D restricted
        to the columns of blocks j .. j+2n0-2, so that those rows of D @ gamma
        equal stripe_dictionary(j) @ stripe(gamma, j).
        """
        span = 2 * self.n0 - 1
        if span > self.N:
            raise ValidationError(f"STRIPE_TOO_LONG: 2n0-1={span} > N={self.N}")
        if not 0 <= j < self.N:
            raise ValidationError(f"STRIPE_OUT_OF_RANGE: j={j}")
        rows = (j + self.n0 - 1 + np.arange(self.n0)) % self.N
        blocks = (j + np.arange(span)) % self.N
        cols = (blocks[:, None] * self.m1 + np.arange(self.m1)[None, :]).reshape(-1)
        return self.D[np.ix_(rows, cols)]


def build_dict(local, N: int) -> ConvDictionary:
    """
    Builds the global convolutional dictionary of a local filter matrix.

    Args:
        local: n0 x m1 matrix (a 1-D array is one filter).
        N (int): Signal length.

    Raises:
        ValidationError: n0 > N or a zero filter.
    """
    local = np.asarray(local, dtype=np.float64)
    if local.ndim == 1:
        local = local[:, None]
    if local.ndim != 2 or 0 in local.shape:
        raise ValidationError(f"BAD_LOCAL_SHAPE: {local.shape}")
    n0, m1 = local.shape
    if N < 1 or n0 > N:
        raise ValidationError(f"FILTER_TOO_LONG: n0={n0} > N={N}")
    norms = np.linalg.norm(local, axis=0)
    if np.any(norms == 0):
        logger.error("[CSC] Local filter matrix has a zero column")
        raise ValidationError(f"ZERO_COLUMN: local filters {np.flatnonzero(norms == 0).tolist()}")
    normalized = local / norms

    D = np.zeros((N, N * m1))
    offsets = np.arange(n0)
    for j in range(N):
        D[(j + offsets) % N, j * m1 : (j + 1) * m1] = normalized

    mu = mutual_coherence(D)
    logger.debug(f"[CSC] Built dictionary N={N} n0={n0} m1={m1} mu={mu:.6f}")
    return ConvDictionary(N=N, n0=n0, m1=m1, local=normalized, D=D, mu=mu)
