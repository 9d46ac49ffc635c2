"""Training, filter clustering, and the cluster-initialization experiment.

The protocol mirrors the appendix setup: Adam, batch size one-tenth of the
training set, truncated-normal init, and for the small random-init baseline
a grid of six (learning rate, init std) pairs whose best curve is reported.
"""

from __future__ import annotations

import gzip
import math
import urllib.request
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..util import trial_rng
from .idx import MnistDataset, read_idx_images, read_idx_labels
from .net import (
    AdamState,
    ConvNet,
    accuracy,
    adam_step,
    forward_backward,
    init_convnet,
)

__all__ = [
    "TrainConfig",
    "TrainResult",
    "train_mnist",
    "KMeansResult",
    "cluster_filters",
    "kmeans_unit",
    "cluster_init_experiment",
    "RANDOM_INIT_GRID",
    "fetch_mnist",
    "MNIST_FILES",
]

# (learning rate, init std) pairs tried for the random-init small net.
RANDOM_INIT_GRID = (
    (0.01, 0.01), (0.01, 0.05), (0.05, 0.05),
    (0.05, 0.01), (0.1, 0.5), (0.1, 0.1),
)


@dataclass(frozen=True)
class TrainConfig:
    channels: int = 120
    filter_size: int = 3
    n_train: int = 6000
    lr: float = 0.01
    init_std: float = 0.05
    epochs: int = 20
    batch_frac: float = 0.1
    plateau_patience: int = 3
    plateau_rel_tol: float = 0.01  # an epoch "improves" if loss drops by 1%
    train_only: tuple | None = None  # e.g. ("fc_w", "fc_b", "conv_b")
    conv_init: np.ndarray | None = None

    def replace(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


@dataclass
class TrainResult:
    net: ConvNet
    train_acc: list
    test_acc: list
    train_loss: list
    epochs_run: int


def train_mnist(cfg: TrainConfig, data: MnistDataset, test: MnistDataset,
                seed: int) -> TrainResult:
    """Train on ``cfg.n_train`` randomly drawn images.  Per epoch the trace
    records the running accuracy over that epoch's training batches, the
    exact test accuracy, and the mean loss; training stops early once the
    epoch loss has not improved for ``plateau_patience`` epochs."""
    from .net import forward_backward_cols, im2col_pooled

    rng = trial_rng(seed, 0)
    if cfg.n_train > data.n:
        raise ValueError(f"asked for {cfg.n_train} of {data.n} training images")
    pick = rng.choice(data.n, size=cfg.n_train, replace=False)
    x = data.images[pick]
    y = data.labels[pick]

    net = init_convnet(cfg.channels, cfg.filter_size, cfg.init_std, rng,
                       in_h=x.shape[1], in_w=x.shape[2])
    if cfg.conv_init is not None:
        net.conv_w = cfg.conv_init.astype(net.conv_w.dtype).copy()
    state = AdamState.for_net(net)
    batch = max(1, round(cfg.n_train * cfg.batch_frac))
    f2 = cfg.filter_size ** 2
    cols_all = im2col_pooled(x, cfg.filter_size)  # reused every epoch

    train_acc, test_acc, losses = [], [], []
    best = math.inf
    stale = 0
    epochs_run = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(cfg.n_train)
        epoch_loss = 0.0
        hits = 0
        for i in range(0, cfg.n_train, batch):
            idx = order[i:i + batch]
            cols2 = cols_all[idx].reshape(-1, f2)
            loss, logits, grads = forward_backward_cols(net, cols2, len(idx), y[idx])
            adam_step(state, net, grads, cfg.lr, only=cfg.train_only)
            epoch_loss += loss * len(idx)
            hits += int((logits.argmax(axis=1) == y[idx]).sum())
        epoch_loss /= cfg.n_train
        losses.append(epoch_loss)
        train_acc.append(hits / cfg.n_train)
        test_acc.append(accuracy(net, test.images, test.labels))
        epochs_run += 1
        if epoch_loss < best * (1.0 - cfg.plateau_rel_tol):
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= cfg.plateau_patience:
                break
    return TrainResult(net, train_acc, test_acc, losses, epochs_run)


# ---------------------------------------------------------------------------
# spherical k-means over unit-normalized filters


@dataclass
class KMeansResult:
    centers: np.ndarray      # k x dim, unit norm
    assignments: np.ndarray  # index of nearest center by angle
    inertia: float           # sum of squared distances to assigned centers
    angles_deg: np.ndarray   # per-filter angle to nearest center
    excluded: list           # zero-norm filter indices


def _normalize_rows(x):
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / norms


def kmeans_unit(vectors: np.ndarray, k: int, rng: np.random.Generator,
                restarts: int = 10, tol: float = 1e-6, max_iter: int = 300):
    """k-means on unit vectors: k-means++ seeding, Lloyd iterations with
    assignment by largest cosine (equivalently smallest Euclidean distance,
    since the centers are renormalized after every mean update), stopping
    when the inertia improves by less than ``tol``.  Best of ``restarts``."""
    n = len(vectors)
    if n < k:
        raise ValueError(f"need at least {k} vectors, got {n}")
    best = None
    for _ in range(restarts):
        centers = _pp_seed(vectors, k, rng)
        prev = math.inf
        for _ in range(max_iter):
            sims = vectors @ centers.T
            assign = sims.argmax(axis=1)
            d2 = np.sum((vectors - centers[assign]) ** 2, axis=1)
            inertia = float(d2.sum())
            new_centers = np.empty_like(centers)
            for ci in range(k):
                mask = assign == ci
                if not mask.any():
                    # reseed an empty cluster from the farthest point
                    new_centers[ci] = vectors[d2.argmax()]
                else:
                    mean = vectors[mask].mean(axis=0)
                    norm = np.linalg.norm(mean)
                    new_centers[ci] = mean / norm if norm > 0 else vectors[mask][0]
            centers = new_centers
            if prev - inertia < tol:
                break
            prev = inertia
        sims = vectors @ centers.T
        assign = sims.argmax(axis=1)
        inertia = float(np.sum((vectors - centers[assign]) ** 2))
        if best is None or inertia < best[2]:
            best = (centers, assign, inertia)
    return best


def _pp_seed(vectors, k, rng):
    n = len(vectors)
    centers = [vectors[rng.integers(n)]]
    for _ in range(k - 1):
        d2 = np.min([np.sum((vectors - c) ** 2, axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(vectors[rng.integers(n)])
            continue
        centers.append(vectors[rng.choice(n, p=d2 / total)])
    return np.array(centers)


def cluster_filters(net: ConvNet, k: int = 4, seed: int = 0,
                    restarts: int = 10, tol: float = 1e-6) -> KMeansResult:
    """Unit-normalize the conv filters (bias excluded), cluster them, and
    report each filter's angle to its nearest center in degrees."""
    flat = net.conv_w.reshape(net.channels, -1).astype(np.float64)
    norms = np.linalg.norm(flat, axis=1)
    excluded = np.nonzero(norms == 0)[0].tolist()
    keep = norms > 0
    unit = _normalize_rows(flat[keep])
    centers, assign, inertia = kmeans_unit(unit, k, trial_rng(seed, 0),
                                           restarts=restarts, tol=tol)
    cos = np.clip((unit * centers[assign]).sum(axis=1), -1.0, 1.0)
    angles = np.degrees(np.arccos(cos))
    return KMeansResult(centers, assign, inertia, angles, excluded)


# ---------------------------------------------------------------------------
# cluster-initialized small networks


def cluster_init_experiment(data: MnistDataset, test: MnistDataset,
                            centers: np.ndarray, train_sizes, seed: int,
                            filter_size: int = 3, runs: int = 20,
                            grid=RANDOM_INIT_GRID, epochs: int = 20,
                            big_channels: int = 120,
                            progress=None):
    """Per train size: a 4-channel net whose frozen conv filters are the
    cluster centers (FC + conv bias trained, lr 0.01 / std 0.05), the best
    of the six-(lr, std) random-init grid, and a 120-channel reference.
    Returns one row per size with the three accuracies."""
    k = len(centers)
    conv_init = centers.reshape(k, filter_size, filter_size)
    rows = []
    for size_i, n in enumerate(train_sizes):
        cluster_accs = []
        for r in range(runs):
            cfg = TrainConfig(channels=k, filter_size=filter_size, n_train=n,
                              lr=0.01, init_std=0.05, epochs=epochs,
                              train_only=("fc_w", "fc_b", "conv_b"),
                              conv_init=conv_init)
            res = train_mnist(cfg, data, test, seed=_exp_seed(seed, size_i, 0, r))
            cluster_accs.append(res.test_acc[-1])
            if progress:
                progress(f"n={n} cluster run {r + 1}/{runs}")
        grid_curves = []
        for gi, (lr, std) in enumerate(grid):
            accs = []
            for r in range(runs):
                cfg = TrainConfig(channels=k, filter_size=filter_size, n_train=n,
                                  lr=lr, init_std=std, epochs=epochs)
                res = train_mnist(cfg, data, test,
                                  seed=_exp_seed(seed, size_i, 1 + gi, r))
                accs.append(res.test_acc[-1])
            grid_curves.append(float(np.mean(accs)))
            if progress:
                progress(f"n={n} grid pair {gi + 1}/{len(grid)} done")
        big_cfg = TrainConfig(channels=big_channels, filter_size=filter_size,
                              n_train=n, lr=0.01, init_std=0.05, epochs=epochs)
        big = train_mnist(big_cfg, data, test, seed=_exp_seed(seed, size_i, 99, 0))
        rows.append({
            "n_train": n,
            "cluster_init_acc": float(np.mean(cluster_accs)),
            "best_random_acc": float(max(grid_curves)),
            "grid_accs": grid_curves,
            "big_net_acc": big.test_acc[-1],
        })
        if progress:
            progress(f"n={n} done")
    return rows


def _exp_seed(seed, size_i, arm, run):
    return int(np.random.SeedSequence([seed, size_i, arm, run]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# fetching the real dataset (optional; the lab reads any IDX files)

MNIST_FILES = {
    "train-images-idx3-ubyte": 47040016,
    "train-labels-idx1-ubyte": 60008,
    "t10k-images-idx3-ubyte": 7840016,
    "t10k-labels-idx1-ubyte": 10008,
}


def fetch_mnist(dest_dir, base_url: str, expected_sizes: dict | None = None,
                timeout: float = 60.0):
    """Download the four gzipped IDX files, decompress, and verify the
    decompressed byte lengths.  Returns the four file paths."""
    expected = expected_sizes or MNIST_FILES
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, size in expected.items():
        url = f"{base_url.rstrip('/')}/{name}.gz"
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            raw = gzip.decompress(resp.read())
        if len(raw) != size:
            raise IOError(f"{name}: expected {size} bytes, got {len(raw)}")
        out = dest / name
        out.write_bytes(raw)
        paths.append(out)
    return paths
