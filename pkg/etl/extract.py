"""
Module: etl.extract
Description:
    Ingestion of images and dataset manifests.
    Reads 8-bit binary PGM (P5) and 8-bit PNG into [0, 1] grayscale images,
    and ``path<TAB>label`` manifests into a DatasetManifest.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
import png

from core.lattice import Image
from utils.errors import ImageFormatError, ValidationError

logger = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
FEATURE_SUFFIX = ".mfpf"


def _pgm_header(data: bytes) -> Tuple[List[int], int]:
    """Width, height and maxval of a P5 header, plus the payload offset."""
    fields: List[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageFormatError("CORRUPT_HEADER: PGM header ends early")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise ImageFormatError("CORRUPT_HEADER: unterminated PGM comment")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"CORRUPT_HEADER: bad PGM field {token!r}")
        fields.append(int(token))
    # exactly one whitespace byte separates header and raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("CORRUPT_HEADER: missing whitespace after maxval")
    return fields, pos + 1


def _read_pgm(data: bytes) -> Image:
    (width, height, maxval), offset = _pgm_header(data)
    if width < 1 or height < 1:
        raise ImageFormatError(f"CORRUPT_HEADER: size {width}x{height}")
    if not 0 < maxval <= 255:
        raise ImageFormatError(f"UNSUPPORTED_FORMAT: only 8-bit PGM is supported (maxval={maxval})")
    payload = data[offset:]
    if len(payload) < width * height:
        raise ImageFormatError(f"TRUNCATED_PAYLOAD: expected {width * height} bytes, found {len(payload)}")
    raster = np.frombuffer(payload, dtype=np.uint8, count=width * height).reshape(height, width)
    if np.any(raster > maxval):
        raise ImageFormatError(f"CORRUPT_PAYLOAD: sample above maxval {maxval}")
    return raster.astype(np.float64) / maxval


def _read_png(path: str) -> Image:
    try:
        width, height, rows, info = png.Reader(filename=path).asDirect()
        if info["bitdepth"] != 8:
            raise ImageFormatError(f"UNSUPPORTED_FORMAT: PNG bit depth {info['bitdepth']}, only 8-bit is supported")
        planes = info["planes"]
        raster = np.vstack([np.asarray(row, dtype=np.uint8) for row in rows])
    except png.Error as e:
        raise ImageFormatError(f"CORRUPT_PNG: {e}") from e

    raster = raster.reshape(height, width, planes).astype(np.float64) / 255.0
    if info["alpha"]:
        raster = raster[..., :-1]
    # unweighted mean over colour channels
    return raster.mean(axis=2) if raster.shape[2] > 1 else raster[..., 0]


def load_image(path: str) -> Image:
    """
    Loads a grayscale image scaled to [0, 1].

    Args:
        path (str): 8-bit P5 PGM, or 8-bit grayscale / RGB PNG (alpha ignored,
            colour averaged without weights).

    Returns:
        Image: (rows, cols) float64 array.

    Raises:
        ImageFormatError: Unsupported format, corrupt header or truncated payload.
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        logger.error(f"[Extract] Cannot read image {path}: {e}")
        raise ImageFormatError(f"UNREADABLE_IMAGE: {path}: {e}") from e

    if data.startswith(b"P5"):
        img = _read_pgm(data)
    elif data.startswith(PNG_SIGNATURE):
        img = _read_png(path)
    else:
        raise ImageFormatError(f"UNSUPPORTED_FORMAT: {path} is neither P5 PGM nor PNG")
    logger.debug(f"[Extract] Loaded {path} with shape {img.shape}")
    return img


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple((str(p), str(lbl)) for p, lbl in self.entries)
        object.__setattr__(self, "entries", entries)
        paths = [p for p, _ in entries]
        if len(set(paths)) != len(paths):
            dupes = sorted({p for p in paths if paths.count(p) > 1})
            raise ValidationError(f"DUPLICATE_PATH: {dupes[:5]}")
        if any(not lbl for _, lbl in entries):
            raise ValidationError("EMPTY_LABEL: every manifest entry needs a label")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def paths(self) -> List[str]:
        return [p for p, _ in self.entries]

    @property
    def labels(self) -> List[str]:
        return [lbl for _, lbl in self.entries]

    def histogram(self) -> pd.Series:
        """Entries per class, sorted by label."""
        return pd.Series(self.labels, dtype=object).value_counts().sort_index()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.entries), columns=["path", "label"])

    def subset(self, indices: Sequence[int]) -> "DatasetManifest":
        return DatasetManifest(entries=tuple(self.entries[i] for i in indices))


def read_manifest(path: str) -> DatasetManifest:
    """
    Parses a UTF-8 manifest of ``path<TAB>label`` lines.

    Blank lines and lines starting with ``#`` are skipped; relative paths are
    resolved against the manifest's directory.

    Raises:
        ValidationError: Missing file, malformed line, duplicate path or empty label.
    """
    if not os.path.exists(path):
        logger.error(f"[Extract] Manifest not found: {path}")
        raise ValidationError(f"MISSING_DATASET: manifest {path} does not exist")

    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(f"BAD_MANIFEST_LINE: {path}:{lineno} expects path<TAB>label")
            sample, label = parts[0].strip(), parts[1].strip()
            if not os.path.isabs(sample):
                sample = os.path.normpath(os.path.join(base, sample))
            entries.append((sample, label))

    manifest = DatasetManifest(entries=tuple(entries))
    logger.info(f"[Extract] Manifest {path}: {len(manifest)} samples in {manifest.histogram().size} classes")
    return manifest


def is_feature_file(path: str) -> bool:
    return path.lower().endswith(FEATURE_SUFFIX)
