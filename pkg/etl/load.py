"""
Module: etl.load
Description:
    Persistence of artifacts: the binary feature-tensor format, PGM images,
    CSV and text reports.
    Every writer goes through a temporary file in the target directory and an
    atomic rename, so readers never see a partial file.
"""
import logging
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import pandas as pd

from core.lattice import as_image
from utils.errors import ValidationError

logger = logging.getLogger(__name__)

FEATURE_MAGIC = b"MFPF"
FEATURE_VERSION = 1
_HEADER_DTYPE = np.dtype("<u4")
_PAYLOAD_DTYPE = np.dtype("<f8")
HEADER_SIZE = len(FEATURE_MAGIC) + 4 * _HEADER_DTYPE.itemsize


@dataclass(frozen=True)
class FeatureHeader:
    version: int
    channels: int
    rows: int
    cols: int

    @property
    def payload_len(self) -> int:
        return self.channels * self.rows * self.cols


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Writes ``data`` to a sibling temp file, then renames it over ``path``."""
    target_dir = os.path.dirname(os.path.abspath(path))
    os.makedirs(target_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=target_dir, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_path, path)
    except OSError:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        logger.critical(f"[Load] Failed to write {path}")
        raise


def write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_csv(path: str, df: pd.DataFrame) -> None:
    write_text(path, df.to_csv(index=False, lineterminator="\n"))
    logger.info(f"[Load] Wrote {len(df)} rows to {path}")


def encode_features(tensor) -> bytes:
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or 0 in arr.shape:
        raise ValidationError(f"BAD_TENSOR_SHAPE: {arr.shape}")
    header = np.array([FEATURE_VERSION, *arr.shape], dtype=_HEADER_DTYPE).tobytes()
    return FEATURE_MAGIC + header + np.ascontiguousarray(arr, dtype=_PAYLOAD_DTYPE).tobytes(order="C")


def write_features(path: str, tensor) -> None:
    """
    Writes a (C, H, W) tensor (or an (H, W) map as C = 1).

    Layout: magic ``MFPF``, u32 version, u32 C, H, W, then C*H*W little-endian
    float64 values, channel-major then row-major.
    """
    atomic_write_bytes(path, encode_features(tensor))
    logger.debug(f"[Load] Wrote feature tensor to {path}")


def decode_header(data: bytes) -> FeatureHeader:
    if len(data) < HEADER_SIZE:
        raise ValidationError(f"TRUNCATED_HEADER: {len(data)} bytes")
    if data[: len(FEATURE_MAGIC)] != FEATURE_MAGIC:
        raise ValidationError(f"BAD_MAGIC: {data[:4]!r}")
    version, c, h, w = np.frombuffer(data, dtype=_HEADER_DTYPE, count=4, offset=len(FEATURE_MAGIC)).tolist()
    if version != FEATURE_VERSION:
        raise ValidationError(f"VERSION_MISMATCH: file version {version}, supported {FEATURE_VERSION}")
    return FeatureHeader(version=version, channels=c, rows=h, cols=w)


def decode_features(data: bytes) -> np.ndarray:
    header = decode_header(data)
    payload = data[HEADER_SIZE:]
    expected = header.payload_len * _PAYLOAD_DTYPE.itemsize
    if len(payload) != expected:
        raise ValidationError(
            f"LENGTH_MISMATCH: header says {header.channels}x{header.rows}x{header.cols} "
            f"({expected} bytes), payload has {len(payload)}"
        )
    values = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE).astype(np.float64)
    return values.reshape(header.channels, header.rows, header.cols)


def read_features(path: str) -> np.ndarray:
    """
    Reads a feature tensor written by :func:`write_features`.

    Raises:
        ValidationError: Wrong magic, unsupported version or payload length mismatch.
    """
    with open(path, "rb") as f:
        return decode_features(f.read())


def write_pgm(path: str, img) -> None:
    """Writes a [0, 1] image as 8-bit binary PGM (values rounded, clipped)."""
    X = as_image(img)
    raster = np.clip(np.rint(X * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{X.shape[1]} {X.shape[0]}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + raster.tobytes(order="C"))
