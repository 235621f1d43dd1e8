"""
Module: etl.synthetic
Description:
    Seeded generator of a small striped-texture corpus (horizontal, vertical
    and diagonal classes) written as PGM files plus a manifest. Used as the
    bundled fixture for the classification pipeline.
"""
import logging
import os
from typing import Dict, Sequence

import numpy as np

from core.lattice import Image
from etl.load import write_pgm, write_text

logger = logging.getLogger(__name__)

TEXTURE_CLASSES = ("horizontal", "vertical", "diagonal")
MANIFEST_NAME = "manifest.tsv"


def stripe_texture(rows: int, cols: int, orientation: str, period: float, phase: float) -> Image:
    """Sinusoidal stripes in [0.25, 0.75]."""
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    coord = {"horizontal": r, "vertical": c, "diagonal": (r + c) / np.sqrt(2.0)}[orientation]
    return 0.5 + 0.25 * np.sin(2.0 * np.pi * coord / period + phase)


def generate_texture_corpus(
    root: str,
    per_class: int = 20,
    rows: int = 60,
    cols: int = 72,
    seed: int = 0,
    noise: float = 0.1,
    classes: Sequence[str] = TEXTURE_CLASSES,
) -> str:
    """
    Writes ``per_class`` images of every texture class under ``root``.

    Each image draws a stripe period in [4, 8], a random phase and uniform
    pixel noise of half-width ``noise``; pixels are clipped to [0, 1].

    Returns:
        str: Path of the manifest (``path<TAB>label``, paths relative to root).
    """
    rng = np.random.default_rng(seed)
    lines = ["# synthetic striped textures"]
    counts: Dict[str, int] = {}
    for label in classes:
        os.makedirs(os.path.join(root, label), exist_ok=True)
        for i in range(per_class):
            period = rng.uniform(4.0, 8.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            img = stripe_texture(rows, cols, label, period, phase)
            img = np.clip(img + rng.uniform(-noise, noise, size=img.shape), 0.0, 1.0)
            rel = f"{label}/{label}_{i:03d}.pgm"
            write_pgm(os.path.join(root, rel), img)
            lines.append(f"{rel}\t{label}")
        counts[label] = per_class

    manifest_path = os.path.join(root, MANIFEST_NAME)
    write_text(manifest_path, "\n".join(lines) + "\n")
    logger.info(f"[Synthetic] Wrote texture corpus {counts} to {root}")
    return manifest_path
