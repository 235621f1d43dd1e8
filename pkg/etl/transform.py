"""
Module: etl.transform
Description:
    Preprocessing of images and manifests before feature extraction:
    centered zero padding to a square, bilinear resize, data quality checks,
    class filtering by count and the seeded train/test split.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.ndimage import map_coordinates

from core.lattice import Image, as_image
from etl.extract import DatasetManifest
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


def validate_image(img) -> bool:
    """
    Data quality gate for a preprocessed image.

    Checks:
        1. Rank 2 and non-empty.
        2. Finite values.
        3. Values inside [0, 1].

    Returns:
        bool: True if all checks pass, False otherwise.
    """
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        logger.error(f"[Validation] Bad image shape {arr.shape}.")
        return False
    if not np.all(np.isfinite(arr)):
        logger.error("[Validation] Non-finite pixels found.")
        return False
    if arr.min() < 0.0 or arr.max() > 1.0:
        logger.error(f"[Validation] Pixels outside [0, 1]: [{arr.min()}, {arr.max()}].")
        return False
    return True


def pad_to_square(img) -> Image:
    """
    Zero-pads the short side so the image becomes max(M, N) square.

    The original stays centered; an odd remainder puts the extra row at the
    bottom or the extra column at the right.
    """
    X = as_image(img)
    M, N = X.shape
    side = max(M, N)
    top = (side - M) // 2
    left = (side - N) // 2
    return np.pad(X, ((top, side - M - top), (left, side - N - left)), mode="constant")


def resize(img, target: int) -> Image:
    """
    Bilinear resize to ``target`` x ``target`` with pixel-center alignment.

    Samples outside the source grid take the nearest edge pixel. The result is
    clipped to [0, 1]; a source already at the target size is returned unchanged.

    Raises:
        ValidationError: target < 1.
    """
    if int(target) < 1:
        raise ValidationError(f"BAD_TARGET_SIZE: {target}")
    target = int(target)
    X = as_image(img)
    if X.shape == (target, target):
        return X.copy()

    rows = (np.arange(target) + 0.5) * (X.shape[0] / target) - 0.5
    cols = (np.arange(target) + 0.5) * (X.shape[1] / target) - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    out = map_coordinates(X, [rr, cc], order=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def preprocess(img, target: int = 128) -> Image:
    """pad_to_square then resize; rejects images that fail :func:`validate_image`."""
    out = resize(pad_to_square(img), target)
    if not validate_image(out):
        raise ValidationError("DQ_FAILED: preprocessed image failed validation")
    return out


def filter_classes(
    manifest: DatasetManifest, min_count: int = 0, max_count: Optional[int] = None
) -> DatasetManifest:
    """
    Keeps the classes whose sample count lies in [min_count, max_count].

    Raises:
        ValidationError: min_count > max_count, or no class survives.
    """
    if max_count is not None and min_count > max_count:
        raise ValidationError(f"BAD_COUNT_RANGE: min={min_count} > max={max_count}")
    counts = manifest.histogram()
    upper = np.inf if max_count is None else max_count
    keep = set(counts[(counts >= min_count) & (counts <= upper)].index)
    if not keep:
        logger.error(f"[Transform] No class has between {min_count} and {max_count} samples.")
        raise ValidationError(f"EMPTY_DATASET: no class with count in [{min_count}, {max_count}]")

    dropped = sorted(set(counts.index) - keep)
    if dropped:
        logger.info(f"[Transform] Dropping {len(dropped)} classes outside [{min_count}, {max_count}]")
    return DatasetManifest(entries=tuple(e for e in manifest.entries if e[1] in keep))


def split(manifest: DatasetManifest, test_fraction: float, seed: int) -> Tuple[DatasetManifest, DatasetManifest]:
    """
    Seeded uniform train/test partition.

    The test set has floor(n * test_fraction + 0.5) entries; both parts keep
    manifest order.

    Raises:
        ValidationError: Fraction outside (0, 1) or a split leaving one side empty.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(f"DEGENERATE_FRACTION: test_fraction={test_fraction} not in (0, 1)")
    n = len(manifest)
    n_test = int(np.floor(n * test_fraction + 0.5))
    if n_test == 0 or n_test == n:
        raise ValidationError(f"DEGENERATE_SPLIT: {n} samples at fraction {test_fraction} leave one side empty")

    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    logger.info(f"[Transform] Split {n} samples into {n - n_test} train / {n_test} test")
    return manifest.subset(train_idx.tolist()), manifest.subset(test_idx.tolist())
