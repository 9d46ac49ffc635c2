import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: criterion-level verification runs (minutes)")


@pytest.fixture(scope="session")
def digit_data(tmp_path_factory):
    """Small offline digit dataset (IDX on disk, loaded once per session)."""
    from xordlab.mnist import load_dataset
    from xordlab.mnist.surrogate import build_surrogate

    root = tmp_path_factory.mktemp("digits")
    paths = build_surrogate(root, n_train=3000, n_test=800, seed=0)
    train = load_dataset(paths[0], paths[1])
    test = load_dataset(paths[2], paths[3])
    return train, test


# ---------------------------------------------------------------------------
# worker-pool plumbing for the acceptance suite: spawn workers load the
# dataset once from disk (no large pickles per job), then map training jobs


_WORKER = {}


def _init_mnist_worker(data_dir):
    from xordlab.mnist import load_dataset

    _WORKER["train"] = load_dataset(f"{data_dir}/train-images-idx3-ubyte",
                                    f"{data_dir}/train-labels-idx1-ubyte")
    _WORKER["test"] = load_dataset(f"{data_dir}/t10k-images-idx3-ubyte",
                                   f"{data_dir}/t10k-labels-idx1-ubyte")


def mnist_train_job(cfg_kw, seed, want_filters=False):
    from xordlab.mnist import TrainConfig, train_mnist

    cfg_kw = dict(cfg_kw)
    conv_init = cfg_kw.pop("conv_init", None)
    if conv_init is not None:
        conv_init = np.asarray(conv_init)
    cfg = TrainConfig(conv_init=conv_init, **cfg_kw)
    res = train_mnist(cfg, _WORKER["train"], _WORKER["test"], seed)
    out = {"test_acc": res.test_acc[-1], "train_acc": res.train_acc[-1],
           "epochs": res.epochs_run, "seed": seed}
    if want_filters:
        out["conv_w"] = res.net.conv_w.copy()
    return out
