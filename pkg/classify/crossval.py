"""
Module: classify.crossval
Description:
    Seeded k-fold partitions and grid search of one pooling hyperparameter
    by mean validation accuracy.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from classify.svm import accuracy, svm_predict, svm_train
from utils.errors import ValidationError
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CvPlan:
    k: int = 3
    grid: Tuple[float, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"BAD_FOLDS: k={self.k} < 2")
        object.__setattr__(self, "grid", tuple(self.grid))


@dataclass
class CvResult:
    best: Any
    scores: Dict[Any, float] = field(default_factory=dict)
    fold_accuracies: Dict[Any, List[float]] = field(default_factory=dict)


def make_folds(n: int, k: int, seed: int) -> List[np.ndarray]:
    """Seeded uniform partition of range(n) into k folds whose sizes differ by at most one."""
    if k < 2:
        raise ValidationError(f"BAD_FOLDS: k={k} < 2")
    if n < k:
        raise ValidationError(f"TOO_FEW_SAMPLES: {n} samples for {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def cross_validate(
    features,
    labels,
    folds: Sequence[np.ndarray],
    svm_params: Optional[Dict[str, Any]] = None,
    threads: Optional[int] = None,
) -> List[float]:
    """Validation accuracy of every fold, in fold order."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    svm_params = svm_params or {}

    def run_fold(fold: np.ndarray) -> float:
        train = np.ones(y.shape[0], dtype=bool)
        train[fold] = False
        model = svm_train(X[train], y[train], **svm_params)
        return accuracy(svm_predict(model, X[fold]), y[fold])

    return parallel_map(run_fold, folds, threads)


def kfold_select(
    plan: CvPlan,
    labels,
    featurize: Callable[[Any], np.ndarray],
    svm_params: Optional[Dict[str, Any]] = None,
    threads: Optional[int] = None,
) -> CvResult:
    """
    Picks the grid value with the best mean validation accuracy.

    Args:
        plan (CvPlan): Folds, grid and seed.
        labels: Training labels.
        featurize: Maps a grid value to the (n, d) training feature matrix.
        svm_params (dict): Keyword arguments for :func:`svm_train`.
        threads (int): Worker cap for the folds.

    Returns:
        CvResult: Best value (ties to the smallest), mean accuracies and
        per-fold accuracies. A single-value grid is returned without search.

    Raises:
        ValidationError: Empty grid or fewer samples than folds.
    """
    if not plan.grid:
        raise ValidationError("EMPTY_GRID: nothing to select from")
    grid = sorted(plan.grid)
    if len(grid) == 1:
        return CvResult(best=grid[0])

    y = np.asarray(labels)
    folds = make_folds(y.shape[0], plan.k, plan.seed)
    result = CvResult(best=None)
    best_score = -np.inf
    for value in grid:
        accs = cross_validate(featurize(value), y, folds, svm_params, threads)
        score = float(np.mean(accs))
        result.scores[value] = score
        result.fold_accuracies[value] = accs
        logger.debug(f"[CV] value={value} folds={accs} mean={score:.4f}")
        if score > best_score:
            best_score = score
            result.best = value
    logger.info(f"[CV] Selected {result.best} (mean accuracy {best_score:.4f})")
    return result
