"""Conv/pool/FC network: forward-backward against finite differences,
closed-form identities, pooling conventions, Adam."""

import math

import numpy as np
import pytest

from xordlab.mnist.net import (
    AdamState,
    ConvNet,
    accuracy,
    adam_step,
    forward,
    forward_backward,
    init_convnet,
    pooled_shape,
    softmax_xent,
    truncated_normal,
)
from xordlab.util import trial_rng


def _smooth_net(seed, channels=2, f=3, size=12, batch=4, margin=1e-3):
    """float64 net + batch with all activations away from relu kinks and all
    pooling windows free of near-ties."""
    rng = trial_rng(seed, 0)
    while True:
        net = init_convnet(channels, f, 0.2, rng, in_h=size, in_w=size,
                           dtype=np.float64)
        net.conv_b = rng.normal(0.0, 0.3, channels)
        x = rng.random((batch, size, size))
        y = rng.integers(0, 10, batch)
        _, (cols2, (act, arg, pooled, flat)) = forward(net, x)
        win = np.sort(act.reshape(-1, 4, channels), axis=1)
        if np.abs(act).min() > margin and (win[:, 3] - win[:, 2]).min() > margin:
            return net, x, y


def test_gradients_match_finite_differences():
    worst = 0.0
    for seed in (0, 1, 2):
        net, x, y = _smooth_net(seed)
        _, grads = forward_backward(net, x, y)
        h = 1e-5
        for name, g in grads.items():
            p = getattr(net, name)
            flat_p = p.reshape(-1)
            flat_g = np.asarray(g).reshape(-1)
            idx = range(flat_p.size) if flat_p.size <= 40 else \
                trial_rng(seed, 1).choice(flat_p.size, 40, replace=False)
            for i in idx:
                old = flat_p[i]
                flat_p[i] = old + h
                lp, _ = forward_backward(net, x, y)
                flat_p[i] = old - h
                lm, _ = forward_backward(net, x, y)
                flat_p[i] = old
                fd = (lp - lm) / (2 * h)
                rel = abs(fd - flat_g[i]) / max(abs(fd), abs(flat_g[i]), 1e-3)
                worst = max(worst, rel)
    assert worst <= 1e-4


def test_zero_net_uniform_softmax():
    net = init_convnet(3, 3, 0.0, trial_rng(0, 0))
    x = np.random.default_rng(0).random((5, 28, 28)).astype(np.float32)
    y = np.arange(5) % 10
    loss, _ = forward_backward(net, x, y)
    assert loss == pytest.approx(math.log(10), rel=1e-5)


def test_channel_permutation_permutes_gradients():
    rng = trial_rng(4, 0)
    net = init_convnet(3, 3, 0.1, rng, dtype=np.float64)
    net.conv_b = rng.normal(0, 0.1, 3)
    x = rng.random((4, 28, 28))
    y = rng.integers(0, 10, 4)
    _, g = forward_backward(net, x, y)

    perm = np.array([2, 0, 1])
    ph, pw = pooled_shape(28, 28, 3)
    net2 = net.copy()
    net2.conv_w = net.conv_w[perm]
    net2.conv_b = net.conv_b[perm]
    fc = net.fc_w.reshape(ph * pw, 3, 10)
    net2.fc_w = fc[:, perm, :].reshape(ph * pw * 3, 10)
    _, g2 = forward_backward(net2, x, y)
    assert np.allclose(g2["conv_w"], g["conv_w"][perm], atol=1e-12)
    assert np.allclose(g2["conv_b"], g["conv_b"][perm], atol=1e-12)


def test_pooling_routes_to_lowest_index_on_ties():
    # constant activations tie every 2x2 window; the gradient must land on
    # window position 0 (row-major lowest)
    net = init_convnet(1, 3, 0.0, trial_rng(0, 0), in_h=6, in_w=6,
                       dtype=np.float64)
    net.conv_b = np.array([1.0])
    net.fc_w = np.ones_like(net.fc_w)
    x = np.zeros((1, 6, 6))
    y = np.array([0])
    logits, (cols2, (act, arg, pooled, flat)) = forward(net, x)
    assert np.all(arg == 0)
    loss, grads = forward_backward(net, x, y)
    assert np.isfinite(loss)


def test_softmax_xent_closed_form():
    rng = trial_rng(6, 0)
    logits = rng.normal(size=(7, 10))
    labels = rng.integers(0, 10, 7)
    loss, dlogits = softmax_xent(logits, labels)
    z = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs = z / z.sum(axis=1, keepdims=True)
    onehot = np.eye(10)[labels]
    assert np.allclose(dlogits, (probs - onehot) / 7, atol=1e-12)


def test_truncated_normal_within_two_sigma():
    rng = trial_rng(8, 0)
    out = truncated_normal((2000,), 0.05, rng, dtype=np.float64)
    assert np.abs(out).max() <= 0.1
    assert out.std() == pytest.approx(0.05, rel=0.15)  # truncation shrinks it


def test_adam_zero_gradient_keeps_parameters():
    net = init_convnet(2, 3, 0.1, trial_rng(0, 0))
    before = net.copy()
    state = AdamState.for_net(net)
    grads = {k: np.zeros_like(v) for k, v in net.params().items()}
    adam_step(state, net, grads, lr=0.1)
    for name in net.params():
        assert np.array_equal(getattr(net, name), getattr(before, name))


def test_adam_first_step_is_signed_lr():
    net = init_convnet(2, 3, 0.1, trial_rng(1, 0), dtype=np.float64)
    before = net.copy()
    state = AdamState.for_net(net)
    rng = trial_rng(2, 0)
    grads = {k: rng.normal(size=v.shape) for k, v in net.params().items()}
    adam_step(state, net, grads, lr=0.01)
    for name, g in grads.items():
        step = getattr(net, name) - getattr(before, name)
        expect = -0.01 * np.sign(g) * np.abs(g) / (np.abs(g) + 1e-8)
        assert np.allclose(step, expect, atol=1e-9)
        assert np.allclose(step, -0.01 * np.sign(g), atol=1e-4)


def test_adam_only_restricts_updates():
    net = init_convnet(2, 3, 0.1, trial_rng(3, 0))
    before = net.copy()
    state = AdamState.for_net(net)
    grads = {k: np.ones_like(v) for k, v in net.params().items()}
    adam_step(state, net, grads, lr=0.01, only=("fc_w", "fc_b", "conv_b"))
    assert np.array_equal(net.conv_w, before.conv_w)
    assert not np.array_equal(net.fc_w, before.fc_w)
    assert not np.array_equal(net.conv_b, before.conv_b)


def test_accuracy_and_empty_batch_errors():
    net = init_convnet(2, 3, 0.1, trial_rng(0, 0))
    x = np.random.default_rng(0).random((6, 28, 28)).astype(np.float32)
    y = np.zeros(6, dtype=np.int64)
    assert 0.0 <= accuracy(net, x, y) <= 1.0
    with pytest.raises(ValueError):
        forward_backward(net, x[:0], y[:0])
    with pytest.raises(ValueError):
        accuracy(net, x[:0], y[:0])


def test_filter_size_variants_shapes():
    for f in (3, 4, 7):
        net = init_convnet(2, f, 0.1, trial_rng(0, 0))
        ph, pw = pooled_shape(28, 28, f)
        x = np.random.default_rng(1).random((3, 28, 28)).astype(np.float32)
        logits, _ = forward(net, x)
        assert logits.shape == (3, 10)
        assert net.fc_w.shape[0] == 2 * ph * pw
