"""Offline 28x28 digit dataset in IDX format.

Built from scikit-learn's 8x8 handwritten digits: upscaled 3x, zero-padded
to 28x28, and augmented with integer pixel shifts.  Source digits are split
into train/test pools before augmentation so the two sets never share a
source image.  Drop-in replacement for the real MNIST files when the
network is unavailable; everything downstream reads plain IDX.

Usage: python -m xordlab.mnist.surrogate OUTDIR [n_train] [n_test] [seed]
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .idx import write_idx_images, write_idx_labels

FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def _warp(img8: np.ndarray, theta: float, shear: float, scale: float,
          dy: float, dx: float) -> np.ndarray:
    """8x8 source -> 28x28 canvas through one bilinear affine warp
    (rotation, shear, scale, subpixel shift).  The style variance this
    injects -- stroke orientation above all -- is what makes a handful of
    random conv filters a genuine bottleneck, as on real digit data."""
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    shr = np.array([[1.0, shear], [0.0, 1.0]])
    fwd = rot @ shr * scale * 3.0  # 8x8 stretched ~3x onto the canvas
    inv = np.linalg.inv(fwd)
    yy, xx = np.meshgrid(np.arange(28) - 13.5 - dy,
                         np.arange(28) - 13.5 - dx, indexing="ij")
    src_y = inv[0, 0] * yy + inv[0, 1] * xx + 3.5
    src_x = inv[1, 0] * yy + inv[1, 1] * xx + 3.5
    i0 = np.floor(src_y).astype(int)
    j0 = np.floor(src_x).astype(int)
    fy = src_y - i0
    fx = src_x - j0
    out = np.zeros((28, 28))
    for di, dj, w in ((0, 0, (1 - fy) * (1 - fx)), (0, 1, (1 - fy) * fx),
                      (1, 0, fy * (1 - fx)), (1, 1, fy * fx)):
        ii = i0 + di
        jj = j0 + dj
        valid = (ii >= 0) & (ii < 8) & (jj >= 0) & (jj < 8)
        out[valid] += w[valid] * img8[ii[valid], jj[valid]]
    return out


def _augment(pool_x, pool_y, n, rng):
    images = np.empty((n, 28, 28), dtype=np.uint8)
    labels = np.empty(n, dtype=np.uint8)
    src = rng.integers(0, len(pool_x), size=n)
    for i, s in enumerate(src):
        warped = _warp(pool_x[s],
                       theta=rng.uniform(-0.3, 0.3),
                       shear=rng.uniform(-0.25, 0.25),
                       scale=rng.uniform(0.85, 1.1),
                       dy=rng.uniform(-2.0, 2.0),
                       dx=rng.uniform(-2.0, 2.0))
        gain = rng.uniform(0.7, 1.0)
        noise = rng.normal(0.0, 6.0, size=(28, 28))
        canvas = warped * (gain * 255.0 / 16.0) + noise
        images[i] = np.clip(canvas, 0, 255).astype(np.uint8)
        labels[i] = pool_y[s]
    return images, labels


def build_surrogate(out_dir, n_train: int = 8000, n_test: int = 2000,
                    seed: int = 0):
    """Write the four IDX files; returns their paths."""
    from sklearn.datasets import load_digits

    digits = load_digits()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 28, 28]))
    order = rng.permutation(len(digits.images))
    cut = int(0.8 * len(order))
    train_pool, test_pool = order[:cut], order[cut:]

    train_x, train_y = _augment(digits.images[train_pool],
                                digits.target[train_pool], n_train, rng)
    test_x, test_y = _augment(digits.images[test_pool],
                              digits.target[test_pool], n_test, rng)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / FILES[0], train_x)
    write_idx_labels(out / FILES[1], train_y)
    write_idx_images(out / FILES[2], test_x)
    write_idx_labels(out / FILES[3], test_y)
    return [out / name for name in FILES]


if __name__ == "__main__":
    import sys

    args = sys.argv[1:]
    if not args:
        sys.exit("usage: python -m xordlab.mnist.surrogate OUTDIR [n_train] [n_test] [seed]")
    paths = build_surrogate(
        args[0],
        n_train=int(args[1]) if len(args) > 1 else 8000,
        n_test=int(args[2]) if len(args) > 2 else 2000,
        seed=int(args[3]) if len(args) > 3 else 0,
    )
    for p in paths:
        print(p)
