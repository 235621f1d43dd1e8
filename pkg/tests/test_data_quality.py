"""
Module: tests/test_data_quality.py
Description: Unit tests for image ingestion, preprocessing, dataset handling
    and the feature file format.
"""
import os
import sys

import numpy as np
import png
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from etl.extract import DatasetManifest, is_feature_file, load_image, read_manifest
from etl.load import (
    HEADER_SIZE,
    decode_features,
    encode_features,
    read_features,
    write_features,
    write_pgm,
)
from etl.synthetic import TEXTURE_CLASSES, generate_texture_corpus
from etl.transform import filter_classes, pad_to_square, preprocess, resize, split, validate_image
from utils.errors import ImageFormatError, ValidationError


@pytest.fixture
def write_bytes(tmp_path):
    """Writes raw bytes to a file under tmp_path and returns its path."""

    def _write(name, data):
        path = tmp_path / name
        path.write_bytes(data)
        return str(path)

    return _write


@pytest.fixture
def class_manifest():
    """Manifest with 79, 80, 130 and 131 samples in classes A to D."""
    entries = []
    for label, count in (("A", 79), ("B", 80), ("C", 130), ("D", 131)):
        entries.extend((f"{label}/{i}.pgm", label) for i in range(count))
    return DatasetManifest(entries=tuple(entries))


# --- image ingestion ----------------------------------------------------


def test_pgm_scaled_to_unit_interval(write_bytes):
    """Test that 8-bit samples are divided by maxval."""
    path = write_bytes("a.pgm", b"P5\n2 2\n255\n" + bytes([0, 255, 51, 102]))
    assert np.allclose(load_image(path), [[0.0, 1.0], [0.2, 0.4]])


def test_pgm_all_zero(write_bytes):
    path = write_bytes("z.pgm", b"P5\n3 2\n255\n" + bytes(6))
    img = load_image(path)
    assert img.shape == (2, 3)
    assert not np.any(img)


def test_pgm_header_comment(write_bytes):
    path = write_bytes("c.pgm", b"P5\n# scanner output\n2 1\n255\n\x00\xff")
    assert load_image(path).tolist() == [[0.0, 1.0]]


def test_pgm_format_errors(write_bytes):
    """Test truncated rasters, 16-bit files and unknown formats are rejected."""
    with pytest.raises(ImageFormatError, match="TRUNCATED_PAYLOAD"):
        load_image(write_bytes("t.pgm", b"P5\n4 4\n255\n" + bytes(10)))
    with pytest.raises(ImageFormatError, match="UNSUPPORTED_FORMAT"):
        load_image(write_bytes("w.pgm", b"P5\n1 1\n65535\n\x00\x01"))
    with pytest.raises(ImageFormatError, match="UNSUPPORTED_FORMAT"):
        load_image(write_bytes("p2.pgm", b"P2\n1 1\n255\n0\n"))
    with pytest.raises(ImageFormatError, match="UNREADABLE_IMAGE"):
        load_image("does/not/exist.pgm")


def test_png_greyscale(tmp_path):
    path = str(tmp_path / "g.png")
    with open(path, "wb") as f:
        png.Writer(width=2, height=1, greyscale=True, bitdepth=8).write(f, [[0, 255]])
    assert load_image(path).tolist() == [[0.0, 1.0]]


def test_png_rgb_is_unweighted_mean(tmp_path):
    path = str(tmp_path / "rgb.png")
    with open(path, "wb") as f:
        png.Writer(width=1, height=1, greyscale=False, bitdepth=8).write(f, [[255, 0, 0]])
    assert np.isclose(load_image(path)[0, 0], 1.0 / 3.0)


def test_pgm_writer_roundtrip(tmp_path):
    img = np.arange(12, dtype=np.float64).reshape(3, 4) * 17.0 / 255.0
    path = str(tmp_path / "out.pgm")
    write_pgm(path, img)
    assert np.allclose(load_image(path), img)


# --- preprocessing ------------------------------------------------------


def test_validate_image():
    """Test the data quality gate on good and bad images."""
    assert validate_image(np.full((3, 3), 0.5)) is True
    assert validate_image(np.zeros((0, 3))) is False
    assert validate_image(np.array([[0.1, np.nan]])) is False
    assert validate_image(np.array([[1.5]])) is False
    assert validate_image(np.zeros(4)) is False


def test_pad_to_square_centres_image():
    padded = pad_to_square(np.ones((100, 120)))
    assert padded.shape == (120, 120)
    assert not np.any(padded[:10]) and not np.any(padded[110:])
    assert np.all(padded[10:110] == 1.0)


def test_pad_odd_remainder_goes_bottom():
    padded = pad_to_square(np.ones((3, 6)))
    assert padded.shape == (6, 6)
    assert padded[:, 0].tolist() == [0.0, 1.0, 1.0, 1.0, 0.0, 0.0]


def test_resize_identity_and_constant():
    img = np.random.default_rng(0).random((8, 8))
    assert np.array_equal(resize(img, 8), img)
    assert np.allclose(resize(np.full((5, 5), 0.3), 12), 0.3)


def test_resize_checkerboard_bilinear():
    """Test half-pixel aligned bilinear upsampling with edge clamping."""
    board = np.array([[1.0, 0.0], [0.0, 1.0]])
    # sample positions -0.25, 0.25, 0.75, 1.25 clamp to the source grid
    t = np.array([0.0, 0.25, 0.75, 1.0])
    r, c = np.meshgrid(t, t, indexing="ij")
    expected = 1.0 - r - c + 2.0 * r * c
    assert np.allclose(resize(board, 4), expected)


def test_preprocess_shape_and_determinism():
    img = np.random.default_rng(1).random((30, 45))
    a, b = preprocess(img, 16), preprocess(img, 16)
    assert a.shape == (16, 16)
    assert np.array_equal(a, b)
    with pytest.raises(ValidationError, match="BAD_TARGET_SIZE"):
        preprocess(img, 0)


# --- datasets -----------------------------------------------------------


def test_filter_classes_bounds_inclusive(class_manifest):
    kept = filter_classes(class_manifest, min_count=80, max_count=130)
    assert sorted(set(kept.labels)) == ["B", "C"]
    assert len(kept) == 210


def test_filter_classes_errors(class_manifest):
    with pytest.raises(ValidationError, match="BAD_COUNT_RANGE"):
        filter_classes(class_manifest, 10, 5)
    with pytest.raises(ValidationError, match="EMPTY_DATASET"):
        filter_classes(class_manifest, 200, 300)


def test_split_sizes_and_determinism():
    manifest = DatasetManifest(entries=tuple((f"{i}.pgm", "ab"[i % 2]) for i in range(10)))
    train, test = split(manifest, 0.4, seed=0)
    assert (len(train), len(test)) == (6, 4)
    assert sorted(train.paths + test.paths) == sorted(manifest.paths)
    again_train, _ = split(manifest, 0.4, seed=0)
    assert again_train.paths == train.paths


def test_split_errors():
    manifest = DatasetManifest(entries=(("a.pgm", "x"), ("b.pgm", "y")))
    with pytest.raises(ValidationError, match="DEGENERATE_FRACTION"):
        split(manifest, 1.0, seed=0)
    with pytest.raises(ValidationError, match="DEGENERATE_SPLIT"):
        split(manifest, 0.1, seed=0)


def test_read_manifest(tmp_path):
    """Test comments, blank lines and relative path resolution."""
    path = tmp_path / "m.tsv"
    path.write_text("# header\n\nimgs/a.pgm\tcat\n/abs/b.pgm\tdog\n", encoding="utf-8")
    manifest = read_manifest(str(path))
    assert manifest.labels == ["cat", "dog"]
    assert manifest.paths == [str(tmp_path / "imgs" / "a.pgm"), "/abs/b.pgm"]
    assert manifest.histogram().to_dict() == {"cat": 1, "dog": 1}


def test_manifest_errors(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("only-a-path\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="BAD_MANIFEST_LINE"):
        read_manifest(str(bad))
    with pytest.raises(ValidationError, match="MISSING_DATASET"):
        read_manifest(str(tmp_path / "missing.tsv"))
    with pytest.raises(ValidationError, match="DUPLICATE_PATH"):
        DatasetManifest(entries=(("a.pgm", "x"), ("a.pgm", "y")))


def test_synthetic_corpus(tmp_path):
    """Test the texture fixture is complete, readable and reproducible."""
    path = generate_texture_corpus(str(tmp_path / "one"), per_class=4, rows=12, cols=16, seed=3)
    manifest = read_manifest(path)
    assert manifest.histogram().to_dict() == {label: 4 for label in TEXTURE_CLASSES}
    img = load_image(manifest.paths[0])
    assert img.shape == (12, 16)
    assert 0.0 <= img.min() and img.max() <= 1.0

    other = read_manifest(generate_texture_corpus(str(tmp_path / "two"), per_class=4, rows=12, cols=16, seed=3))
    for a, b in zip(manifest.paths, other.paths):
        assert np.array_equal(load_image(a), load_image(b))


# --- feature files ------------------------------------------------------


def test_feature_file_roundtrip(tmp_path):
    tensor = np.random.default_rng(2).random((3, 4, 5))
    path = str(tmp_path / "t.mfpf")
    write_features(path, tensor)
    assert is_feature_file(path)
    assert np.array_equal(read_features(path), tensor)
    assert os.path.getsize(path) == HEADER_SIZE + tensor.size * 8


def test_feature_file_map_is_one_channel():
    assert decode_features(encode_features(np.ones((2, 3)))).shape == (1, 2, 3)


def test_feature_file_corruption():
    data = encode_features(np.ones((2, 2, 2)))
    with pytest.raises(ValidationError, match="BAD_MAGIC"):
        decode_features(b"XXXX" + data[4:])
    with pytest.raises(ValidationError, match="LENGTH_MISMATCH"):
        decode_features(data[:-1])
    with pytest.raises(ValidationError, match="VERSION_MISMATCH"):
        decode_features(data[:4] + (2).to_bytes(4, "little") + data[8:])
    with pytest.raises(ValidationError, match="TRUNCATED_HEADER"):
        decode_features(data[:6])
