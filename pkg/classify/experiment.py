"""
Module: classify.experiment
Description:
    The pooling comparison: load and preprocess a labelled corpus, extract
    filter-bank features, pool them with every strategy under two grid
    regimes (partitioning and overlapping windows), select each strategy's
    hyperparameter by k-fold cross-validation on the training split and
    report test accuracy of a linear SVM.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from classify.crossval import CvPlan, cross_validate, kfold_select, make_folds
from classify.features import (
    FilterBank,
    default_filter_bank,
    extract_features,
    pool_tensor,
    profile_features,
    tensor_profile,
)
from classify.svm import accuracy, svm_predict, svm_train
from etl.extract import DatasetManifest, is_feature_file, load_image, read_manifest
from etl.load import read_features
from etl.synthetic import generate_texture_corpus
from etl.transform import filter_classes, preprocess, split
from pooling.grid import MaxfunConfig, PoolGrid, make_grid
from utils.errors import ValidationError
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)

# (row label, pooling method), in report order
STRATEGIES: Tuple[Tuple[str, str], ...] = (
    ("average", "avg"),
    ("maximum", "max"),
    ("mixed", "mixed"),
    ("stochastic", "stochastic"),
    ("maxfun", "maxfun_noncentered"),
    ("centered maxfun", "maxfun"),
)
RESULT_COLUMNS = ["strategy", "window", "stride", "hyperparam", "accuracy"]


@dataclass
class ComparisonResult:
    table: pd.DataFrame
    cv_log: pd.DataFrame = field(default_factory=pd.DataFrame)
    n_train: int = 0
    n_test: int = 0

    def to_text(self) -> str:
        return render_table(self.table)


def regime_label(window: int, stride: int) -> str:
    kind = "partition" if stride >= window else "overlap"
    return f"window={window} stride={stride} ({kind})"


def render_table(table: pd.DataFrame) -> str:
    """Aligned text: one row per strategy, one column per grid regime."""
    order = [name for name, _ in STRATEGIES]
    view = table.assign(
        regime=[regime_label(w, s) for w, s in zip(table["window"], table["stride"])],
        cell=[
            f"{acc:.4f}" + ("" if pd.isna(h) else f" ({h:g})")
            for acc, h in zip(table["accuracy"], table["hyperparam"])
        ],
    )
    regimes = list(dict.fromkeys(view["regime"]))
    pivot = view.pivot(index="strategy", columns="regime", values="cell")
    pivot = pivot.reindex(index=[s for s in order if s in pivot.index], columns=regimes)
    pivot.index.name = "strategy"
    pivot.columns.name = None
    return pivot.to_string() + "\n"


@dataclass(frozen=True)
class RegimeSettings:
    window: int
    stride: int
    b: int
    r_min_grid: Tuple[int, ...]


def regime_settings(regime: Dict[str, Any], cfg: Dict[str, Any]) -> RegimeSettings:
    """
    Window, stride, radius bound and r_min grid of one regime.

    ``b`` defaults to (window - 1) // 2 and the r_min grid to 2..b (or [1]
    when b < 2). Every r_min is checked against both maxfun variants.

    Raises:
        ValidationError: Bad window or stride, an even window (centered maxfun
            has no center pixel), b too large for the window, or an r_min
            outside [1, b].
    """
    window, stride = int(regime["window"]), int(regime["stride"])
    if window < 1 or stride < 1:
        raise ValidationError(f"BAD_REGIME: {regime}")
    b = int(cfg["b"]) if cfg.get("b") is not None else (window - 1) // 2
    if b < 1:
        raise ValidationError(f"BAD_RADIUS: b={b} for window={window}; maxfun needs window >= 3")
    r_min_grid = cfg.get("r_min_grid") or (list(range(2, b + 1)) if b >= 2 else [1])
    for r_min in r_min_grid:
        if isinstance(r_min, bool) or not isinstance(r_min, int) or not 1 <= r_min <= b:
            raise ValidationError(f"BAD_RADIUS: r_min={r_min!r} not an integer in [1, b={b}]")
        for centered in (True, False):
            MaxfunConfig(r_min=int(r_min), b=b, centered=centered).validate_for_window(window)
    return RegimeSettings(window=window, stride=stride, b=b, r_min_grid=tuple(int(r) for r in r_min_grid))


def resolve_manifest(dataset_cfg: Dict[str, Any], seed: int) -> DatasetManifest:
    fixture = dataset_cfg.get("fixture") or {}
    if fixture.get("enabled"):
        path = generate_texture_corpus(
            fixture["root"],
            per_class=int(fixture["per_class"]),
            rows=int(fixture["rows"]),
            cols=int(fixture["cols"]),
            seed=seed,
        )
        return read_manifest(path)
    if not dataset_cfg.get("manifest"):
        raise ValidationError("MISSING_DATASET: set classify.dataset.manifest or enable the fixture")
    return read_manifest(dataset_cfg["manifest"])


def load_tensors(
    manifest: DatasetManifest, bank: FilterBank, target: int, threads: Optional[int] = None
) -> List[np.ndarray]:
    """Feature tensors of every sample; ``.mfpf`` samples are taken as precomputed features."""

    def featurize(path: str) -> np.ndarray:
        if is_feature_file(path):
            tensor = read_features(path)
            if np.any(tensor < 0):
                raise ValidationError(f"NEGATIVE_INPUT: precomputed features in {path} are negative")
            return tensor
        return extract_features(preprocess(load_image(path), target), bank)

    tensors = parallel_map(featurize, manifest.paths, threads)
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ValidationError(f"SHAPE_MISMATCH: feature tensors have shapes {sorted(shapes)}")
    return tensors


def _stack(vectors: List[np.ndarray]) -> np.ndarray:
    return np.vstack([v[None, :] for v in vectors])


def _evaluate(
    method: str,
    tensors_train: List[np.ndarray],
    tensors_test: List[np.ndarray],
    y_train: np.ndarray,
    grid: PoolGrid,
    plan: CvPlan,
    b: int,
    alpha_grid,
    r_min_grid,
    svm_params: Dict[str, Any],
    threads: Optional[int],
) -> Tuple[Optional[float], np.ndarray, np.ndarray, Dict[Any, List[float]]]:
    """Selected hyperparameter, train and test feature matrices, and per-fold accuracies."""
    folds = make_folds(len(y_train), plan.k, plan.seed)

    if method == "mixed":
        pooled = {
            part: {m: _stack([pool_tensor(t, grid, m) for t in tensors]) for m in ("max", "avg")}
            for part, tensors in (("train", tensors_train), ("test", tensors_test))
        }

        def mix(part: str, alpha: float) -> np.ndarray:
            return alpha * pooled[part]["max"] + (1.0 - alpha) * pooled[part]["avg"]

        cv = kfold_select(
            CvPlan(k=plan.k, grid=tuple(alpha_grid), seed=plan.seed),
            y_train, lambda a: mix("train", a), svm_params, threads,
        )
        return cv.best, mix("train", cv.best), mix("test", cv.best), cv.fold_accuracies

    if method in ("maxfun", "maxfun_noncentered"):
        centered = method == "maxfun"
        profiles = {
            part: [tensor_profile(t, grid, b, centered=centered) for t in tensors]
            for part, tensors in (("train", tensors_train), ("test", tensors_test))
        }

        def reduce(part: str, r_min: int) -> np.ndarray:
            return _stack([profile_features(p, int(r_min)) for p in profiles[part]])

        cv = kfold_select(
            CvPlan(k=plan.k, grid=tuple(r_min_grid), seed=plan.seed),
            y_train, lambda r: reduce("train", r), svm_params, threads,
        )
        return cv.best, reduce("train", cv.best), reduce("test", cv.best), cv.fold_accuracies

    X_train = _stack([pool_tensor(t, grid, method) for t in tensors_train])
    X_test = _stack([pool_tensor(t, grid, method) for t in tensors_test])
    accs = cross_validate(X_train, y_train, folds, svm_params, threads)
    return None, X_train, X_test, {None: accs}


def run_pooling_comparison(cfg: Dict[str, Any], threads: Optional[int] = None) -> ComparisonResult:
    """
    Runs every pooling strategy under every configured grid regime.

    Args:
        cfg (dict): The ``classify`` configuration section (dataset, preprocess,
            features, regimes, b, alpha_grid, r_min_grid, cv_folds,
            test_fraction, svm, seed).
        threads (int): Worker cap for loading and folds.

    Returns:
        ComparisonResult: Accuracy table in report order plus the CV log.

    Raises:
        ValidationError: Missing dataset, empty classes or an infeasible grid
            for the feature dimensions.
    """
    seed = int(cfg["seed"])
    dataset_cfg = cfg["dataset"]
    regimes = cfg["regimes"]
    if not regimes:
        raise ValidationError("EMPTY_REGIMES: configure at least one (window, stride) regime")
    settings = [regime_settings(regime, cfg) for regime in regimes]

    manifest = resolve_manifest(dataset_cfg, seed)
    manifest = filter_classes(manifest, int(dataset_cfg.get("min_count") or 0), dataset_cfg.get("max_count"))
    train, test = split(manifest, float(cfg["test_fraction"]), seed)
    y_train, y_test = np.asarray(train.labels), np.asarray(test.labels)

    bank = default_filter_bank(seed=seed, half_wave=bool(cfg["features"]["half_wave"]))
    target = int(cfg["preprocess"]["target"])
    logger.info(f"[Classify] Extracting features for {len(train)} train / {len(test)} test samples")
    tensors_train = load_tensors(train, bank, target, threads)
    tensors_test = load_tensors(test, bank, target, threads)
    _, H, W = tensors_train[0].shape
    if tensors_test[0].shape != tensors_train[0].shape:
        raise ValidationError("SHAPE_MISMATCH: train and test feature tensors differ")

    plan = CvPlan(k=int(cfg["cv_folds"]), seed=seed)
    svm_params = {
        "reg_C": float(cfg["svm"]["reg_C"]),
        "epochs": int(cfg["svm"]["epochs"]),
        "learning_rate": float(cfg["svm"]["learning_rate"]),
        "seed": seed,
    }

    rows, log_rows = [], []
    for regime in settings:
        window, stride, b, r_min_grid = regime.window, regime.stride, regime.b, regime.r_min_grid
        grid = make_grid(H, W, window, stride)
        logger.info(f"[Classify] Regime {regime_label(window, stride)}: {grid.out_rows}x{grid.out_cols} cells, b={b}")

        for name, method in STRATEGIES:
            best, X_train, X_test, fold_accs = _evaluate(
                method, tensors_train, tensors_test, y_train, grid, plan, b,
                cfg["alpha_grid"], r_min_grid, svm_params, threads,
            )
            model = svm_train(X_train, y_train, **svm_params)
            acc = accuracy(svm_predict(model, X_test), y_test)
            rows.append(
                {
                    "strategy": name,
                    "window": window,
                    "stride": stride,
                    "hyperparam": np.nan if best is None else float(best),
                    "accuracy": acc,
                }
            )
            for value, accs in fold_accs.items():
                for fold, fold_acc in enumerate(accs):
                    log_rows.append(
                        {
                            "strategy": name,
                            "window": window,
                            "stride": stride,
                            "value": np.nan if value is None else float(value),
                            "fold": fold,
                            "accuracy": fold_acc,
                        }
                    )
            logger.info(f"[Classify] {name:>16s} w={window} s={stride}: accuracy={acc:.4f} (param={best})")

    return ComparisonResult(
        table=pd.DataFrame(rows, columns=RESULT_COLUMNS),
        cv_log=pd.DataFrame(log_rows, columns=["strategy", "window", "stride", "value", "fold", "accuracy"]),
        n_train=len(train),
        n_test=len(test),
    )
