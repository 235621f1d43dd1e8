"""
Module: classify.svm
Description:
    Linear one-vs-rest SVM trained with seeded stochastic subgradient descent
    on the hinge loss (Pegasos step sizes, averaged iterates).
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from numpy.typing import NDArray

from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass
class SvmModel:
    classes: np.ndarray
    W: NDArray[np.float64]
    b: NDArray[np.float64]
    mean: NDArray[np.float64]
    std: NDArray[np.float64]
    history: List[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.W.shape[1]


def _as_features(features) -> NDArray[np.float64]:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValidationError(f"BAD_FEATURE_MATRIX: shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("NON_FINITE_FEATURES")
    return X


def _objective(X, Y, W, b, lam: float) -> float:
    margins = Y * (X @ W.T + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0).sum()
    return float(0.5 * lam * np.sum(W * W) + hinge)


def svm_train(features, labels, reg_C: float = 1.0, epochs: int = 30, seed: int = 0, learning_rate: float = 0.1) -> SvmModel:
    """
    Trains one linear scorer per class against the rest.

    Samples are first put in a canonical order (by label, then feature values)
    so the result does not depend on how the caller ordered them; every epoch
    then visits them in a seeded random order. ``history`` holds the objective
    of the averaged iterate after each epoch; the model returned is the
    averaged iterate with the lowest of those objectives (or the zero model
    when none beats it).

    Args:
        features: (n, d) matrix.
        labels: n labels, at least two distinct.
        reg_C (float): Inverse regularization strength (> 0).
        epochs (int): Passes over the data (>= 1).
        seed (int): Shuffling seed.
        learning_rate (float): Initial step size.

    Returns:
        SvmModel: Weights in standardized feature space plus the scaling.

    Raises:
        ValidationError: Fewer than two classes, length mismatch or bad parameters.
    """
    X = _as_features(features)
    y = np.asarray(labels)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValidationError(f"DIMENSION_MISMATCH: {X.shape[0]} samples vs {y.shape} labels")
    if reg_C <= 0 or epochs < 1 or learning_rate <= 0:
        raise ValidationError(f"BAD_SVM_PARAMS: reg_C={reg_C}, epochs={epochs}, learning_rate={learning_rate}")
    classes, y_idx = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise ValidationError(f"SINGLE_CLASS: need at least two classes, got {classes.tolist()}")

    keys = np.vstack([X.T[::-1], y_idx[None, :]])
    canonical = np.lexsort(keys)
    X, y_idx = X[canonical], y_idx[canonical]

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    Xs = (X - mean) / std

    n, d = Xs.shape
    K = classes.size
    Y = np.where(y_idx[:, None] == np.arange(K)[None, :], 1.0, -1.0)
    lam = 1.0 / (reg_C * n)

    rng = np.random.default_rng(seed)
    W = np.zeros((K, d))
    b = np.zeros(K)
    W_avg = np.zeros((K, d))
    b_avg = np.zeros(K)
    best_W, best_b = W_avg.copy(), b_avg.copy()
    best_obj = _objective(Xs, Y, best_W, best_b, lam)
    history = []
    t = 0
    for epoch in range(epochs):
        for i in rng.permutation(n):
            eta = learning_rate / (1.0 + learning_rate * lam * t)
            violated = Y[i] * (W @ Xs[i] + b) < 1.0
            W *= 1.0 - eta * lam
            W[violated] += eta * np.outer(Y[i, violated], Xs[i])
            b[violated] += eta * Y[i, violated]
            t += 1
            W_avg += (W - W_avg) / t
            b_avg += (b - b_avg) / t
        obj = _objective(Xs, Y, W_avg, b_avg, lam)
        if obj < best_obj:
            best_obj = obj
            best_W, best_b = W_avg.copy(), b_avg.copy()
        history.append(obj)
        logger.debug(f"[SVM] epoch {epoch + 1}/{epochs} objective={obj:.6f} best={best_obj:.6f}")

    return SvmModel(classes=classes, W=best_W, b=best_b, mean=mean, std=std, history=history)


def svm_scores(model: SvmModel, features) -> NDArray[np.float64]:
    X = _as_features(features)
    if X.shape[1] != model.dim:
        raise ValidationError(f"DIMENSION_MISMATCH: features have {X.shape[1]} columns, model {model.dim}")
    return ((X - model.mean) / model.std) @ model.W.T + model.b


def svm_predict(model: SvmModel, features) -> np.ndarray:
    """Label of the highest-scoring class; ties go to the lowest class index."""
    return model.classes[np.argmax(svm_scores(model, features), axis=1)]


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValidationError(f"DIMENSION_MISMATCH: predictions {pred.shape} vs truth {truth.shape}")
    if pred.size == 0:
        raise ValidationError("EMPTY_LABELS")
    return float(np.mean(pred == truth))
