"""IDX file parsing and writing (the MNIST on-disk format).

Layout, all integers big-endian 32-bit:
  images: magic 2051, count n, rows, cols, then n*rows*cols raw bytes
  labels: magic 2049, count n, then n raw bytes
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049


class IdxParseError(ValueError):
    """Malformed IDX content; ``offset`` locates the failure in the file."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def _read_u32(buf: bytes, offset: int, what: str) -> int:
    if len(buf) < offset + 4:
        raise IdxParseError(f"truncated file while reading {what}", len(buf))
    return struct.unpack_from(">I", buf, offset)[0]


def read_idx_images(path) -> np.ndarray:
    """n x rows x cols uint8 array."""
    buf = Path(path).read_bytes()
    magic = _read_u32(buf, 0, "magic")
    if magic != IMAGES_MAGIC:
        raise IdxParseError(f"expected images magic {IMAGES_MAGIC}, found {magic}", 0)
    n = _read_u32(buf, 4, "image count")
    rows = _read_u32(buf, 8, "row count")
    cols = _read_u32(buf, 12, "column count")
    expected = 16 + n * rows * cols
    if len(buf) < expected:
        raise IdxParseError(
            f"expected {n}x{rows}x{cols} pixel bytes, file ends early", len(buf))
    if len(buf) > expected:
        raise IdxParseError(
            f"dimension mismatch: {len(buf) - expected} trailing bytes", expected)
    return np.frombuffer(buf, dtype=np.uint8, count=n * rows * cols,
                         offset=16).reshape(n, rows, cols).copy()


def read_idx_labels(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    magic = _read_u32(buf, 0, "magic")
    if magic != LABELS_MAGIC:
        raise IdxParseError(f"expected labels magic {LABELS_MAGIC}, found {magic}", 0)
    n = _read_u32(buf, 4, "label count")
    expected = 8 + n
    if len(buf) < expected:
        raise IdxParseError(f"expected {n} label bytes, file ends early", len(buf))
    if len(buf) > expected:
        raise IdxParseError(
            f"dimension mismatch: {len(buf) - expected} trailing bytes", expected)
    return np.frombuffer(buf, dtype=np.uint8, count=n, offset=8).copy()


def write_idx_images(path, images: np.ndarray):
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("images must be n x rows x cols")
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


@dataclass
class MnistDataset:
    """Images normalized to [0,1] (bytes / 255) with integer labels."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise IdxParseError(
                f"{len(self.images)} images but {len(self.labels)} labels", 0)

    @property
    def n(self) -> int:
        return len(self.labels)


def load_dataset(images_path, labels_path, dtype=np.float32) -> MnistDataset:
    images = read_idx_images(images_path).astype(dtype) / dtype(255)
    labels = read_idx_labels(labels_path).astype(np.int64)
    return MnistDataset(images, labels)
