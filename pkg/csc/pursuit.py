"""
Module: csc.pursuit
Description:
    Sparse pursuit against a convolutional dictionary.

    - Greedy orthogonal matching pursuit whose atom selection never lets a
      stripe exceed the sparsity budget (optionally non-negative, with NNLS
      refits).
    - Oracle-support least squares, used when the true support is known.
"""
import logging
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import nnls

from core.lattice import as_vec
from csc.dictionary import ConvDictionary
from csc.sparse import SparseCode, stripes_by_block
from utils.errors import InfeasibleError, ValidationError

logger = logging.getLogger(__name__)


def _check_signal(D: ConvDictionary, y) -> np.ndarray:
    y = as_vec(y)
    if y.size != D.N:
        raise ValidationError(f"LENGTH_MISMATCH: signal length {y.size} vs dictionary N={D.N}")
    return y


def pursuit_greedy(
    D: ConvDictionary,
    y,
    lam: int,
    eps: float,
    nonneg: bool = False,
    max_atoms: Optional[int] = None,
) -> SparseCode:
    """
    Orthogonal matching pursuit with a stripe-sparsity admissibility rule.

    Each step picks the admissible atom most correlated with the residual (an
    atom is admissible while every stripe containing its block holds fewer than
    ``lam`` selected atoms), then refits all selected coefficients by least
    squares (NNLS when ``nonneg``).

    Returns:
        SparseCode: Code with ||y - D gamma||_2 <= eps and l0_inf <= lam.

    Raises:
        ValidationError: Bad inputs.
        InfeasibleError: The budget ``eps`` cannot be met; ``.code`` holds the
            best code found, which still satisfies l0_inf <= lam.
    """
    if eps < 0:
        raise ValidationError(f"BAD_TOLERANCE: eps={eps}")
    if lam < 1:
        raise ValidationError(f"INFEASIBLE_SPARSITY: lambda={lam} < 1")
    y = _check_signal(D, y)

    owners = stripes_by_block(D.N, D.n0)
    stripe_counts = np.zeros(D.N, dtype=np.int64)
    atom_blocks = np.arange(D.atoms) // D.m1
    gamma = np.zeros(D.atoms)
    active = []
    residual = y.copy()
    best_norm = float(np.linalg.norm(residual))
    limit = D.atoms if max_atoms is None else max_atoms

    while best_norm > eps and len(active) < limit:
        blocked = np.array([stripe_counts[owners[b]].max() >= lam for b in range(D.N)])
        corr = D.D.T @ residual
        scores = corr.copy() if nonneg else np.abs(corr)
        scores[blocked[atom_blocks]] = -np.inf
        scores[active] = -np.inf
        pick = int(np.argmax(scores))
        if not scores[pick] > 1e-14:
            break

        active.append(pick)
        stripe_counts[owners[atom_blocks[pick]]] += 1
        sub = D.D[:, active]
        if nonneg:
            coef, _ = nnls(sub, y)
        else:
            coef = np.linalg.lstsq(sub, y, rcond=None)[0]
        candidate = np.zeros(D.atoms)
        candidate[active] = coef
        new_norm = float(np.linalg.norm(y - sub @ coef))
        logger.debug(f"[CSC] OMP step {len(active)}: atom={pick} residual={new_norm:.3e}")
        if new_norm >= best_norm:
            break
        gamma, best_norm = candidate, new_norm

    code = SparseCode(gamma=gamma, n0=D.n0, m1=D.m1)
    if best_norm > eps:
        logger.warning(f"[CSC] Greedy pursuit stopped at residual {best_norm:.3e} > eps={eps:.3e}")
        raise InfeasibleError(
            f"PURSUIT_INFEASIBLE: residual {best_norm:.6e} > eps {eps:.6e} with {np.count_nonzero(gamma)} atoms",
            code=code,
        )
    return code


def pursuit_oracle(D: ConvDictionary, y, support: Sequence[int]) -> SparseCode:
    """
    Least squares restricted to a known support.

    Raises:
        ValidationError: Empty or out-of-range support, or rank-deficient
            restricted system.
    """
    y = _check_signal(D, y)
    support = np.unique(np.asarray(support, dtype=np.int64))
    if support.size == 0:
        raise ValidationError("EMPTY_SUPPORT: oracle pursuit needs at least one atom")
    if support[0] < 0 or support[-1] >= D.atoms:
        raise ValidationError(f"SUPPORT_OUT_OF_RANGE: atoms must lie in [0, {D.atoms})")

    sub = D.D[:, support]
    if np.linalg.matrix_rank(sub) < support.size:
        logger.error(f"[CSC] Oracle support of size {support.size} is rank deficient")
        raise ValidationError(f"RANK_DEFICIENT_SUPPORT: {support.size} columns, rank {np.linalg.matrix_rank(sub)}")
    coef = np.linalg.lstsq(sub, y, rcond=None)[0]
    gamma = np.zeros(D.atoms)
    gamma[support] = coef
    return SparseCode(gamma=gamma, n0=D.n0, m1=D.m1)
