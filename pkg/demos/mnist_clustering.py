"""Narrative demo: filter clustering on digit images (desk scale).

Trains the conv/pool/FC net on an offline digit dataset and shows that
trained filters cluster around a few directions while random filters do
not, then initializes a 4-channel net from the cluster centers and
compares against a random-init 4-channel net.

Writes the dataset as standard IDX files; point ``--data-dir`` at real
MNIST files to run the same pipeline at full scale.

Run: python demos/mnist_clustering.py [workdir]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from xordlab.mnist import TrainConfig, cluster_filters, init_convnet, load_dataset, train_mnist
from xordlab.mnist.surrogate import build_surrogate
from xordlab.util import trial_rng

workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
paths = build_surrogate(workdir, n_train=4000, n_test=1000, seed=0)
train = load_dataset(paths[0], paths[1])
test = load_dataset(paths[2], paths[3])
print(f"digit dataset at {workdir} ({train.n} train / {test.n} test)")

big = train_mnist(TrainConfig(channels=60, n_train=3000, epochs=10), train, test, seed=0)
print(f"60-channel net: test accuracy {big.test_acc[-1]:.3f} "
      f"after {big.epochs_run} epochs")

km = cluster_filters(big.net, k=4, seed=0)
random_net = init_convnet(60, 3, 0.05, trial_rng(7, 0))
km_rand = cluster_filters(random_net, k=4, seed=0)
print(f"median angle to nearest center: trained {np.median(km.angles_deg):.1f}°, "
      f"random {np.median(km_rand.angles_deg):.1f}°")

centers = km.centers.reshape(4, 3, 3)
small_cluster = train_mnist(
    TrainConfig(channels=4, n_train=1500, epochs=10,
                train_only=("fc_w", "fc_b", "conv_b"), conv_init=centers),
    train, test, seed=1)
small_random = train_mnist(TrainConfig(channels=4, n_train=1500, epochs=10),
                           train, test, seed=1)
print(f"4-channel nets at n=1500: cluster-initialized {small_cluster.test_acc[-1]:.3f} "
      f"vs random-initialized {small_random.test_acc[-1]:.3f}")
