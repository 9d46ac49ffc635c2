"""Three-layer network: valid convolution (stride 1, single input channel),
ReLU, 2x2 max pooling (stride 2), fully connected layer to 10 logits,
softmax cross-entropy.  Forward and backward are written directly in numpy;
pooling routes its gradient to the lowest row-major argmax position and
relu'(0) = 0.

The convolution runs as one GEMM over an im2col patch matrix whose rows are
arranged so every 2x2 pooling window is four consecutive rows: pooling is
then a contiguous max/argmax over axis 1.  Conv positions outside the
pooled region are never computed (they influence neither logits nor
gradients).  Trainers can build the patch matrix once per image set and
reuse it across epochs (``im2col_pooled`` / ``forward_backward_cols``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_CLASSES = 10

PARAM_FIELDS = ("conv_w", "conv_b", "fc_w", "fc_b")


@dataclass
class ConvNet:
    conv_w: np.ndarray  # C x f x f
    conv_b: np.ndarray  # C
    fc_w: np.ndarray    # (C * ph * pw) x 10
    fc_b: np.ndarray    # 10

    @property
    def channels(self) -> int:
        return self.conv_w.shape[0]

    @property
    def filter_size(self) -> int:
        return self.conv_w.shape[1]

    def params(self):
        return {name: getattr(self, name) for name in PARAM_FIELDS}

    def copy(self) -> "ConvNet":
        return ConvNet(*(getattr(self, n).copy() for n in PARAM_FIELDS))


def pooled_shape(in_h: int, in_w: int, f: int):
    oh, ow = in_h - f + 1, in_w - f + 1
    return oh // 2, ow // 2


def truncated_normal(shape, std, rng, dtype=np.float32):
    """Gaussian with resampling outside ±2 std."""
    out = rng.normal(0.0, std, size=shape)
    while True:
        bad = np.abs(out) > 2 * std
        if not bad.any():
            break
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
    return out.astype(dtype)


def init_convnet(channels: int, filter_size: int, std: float,
                 rng: np.random.Generator, in_h: int = 28, in_w: int = 28,
                 dtype=np.float32) -> ConvNet:
    ph, pw = pooled_shape(in_h, in_w, filter_size)
    return ConvNet(
        conv_w=truncated_normal((channels, filter_size, filter_size), std, rng, dtype),
        conv_b=np.zeros(channels, dtype=dtype),
        fc_w=truncated_normal((channels * ph * pw, N_CLASSES), std, rng, dtype),
        fc_b=np.zeros(N_CLASSES, dtype=dtype),
    )


_GATHER_CACHE = {}


def _gather_index(in_h: int, in_w: int, f: int) -> np.ndarray:
    """(ph*pw*4) x f^2 flat pixel indices: pooling windows contiguous, the
    four conv positions of each window in row-major order."""
    key = (in_h, in_w, f)
    if key not in _GATHER_CACHE:
        oh, ow = in_h - f + 1, in_w - f + 1
        ph, pw = oh // 2, ow // 2
        a = np.arange(ph)[:, None, None]
        b = np.arange(pw)[None, :, None]
        dy = np.array([0, 0, 1, 1])[None, None, :]
        dx = np.array([0, 1, 0, 1])[None, None, :]
        pos_i = np.broadcast_to(2 * a + dy, (ph, pw, 4)).reshape(-1)
        pos_j = np.broadcast_to(2 * b + dx, (ph, pw, 4)).reshape(-1)
        wi, wj = np.divmod(np.arange(f * f), f)
        flat = (pos_i[:, None] + wi) * in_w + (pos_j[:, None] + wj)
        _GATHER_CACHE[key] = flat.astype(np.int32)
    return _GATHER_CACHE[key]


def im2col_pooled(x: np.ndarray, f: int) -> np.ndarray:
    """N x (ph*pw*4) x f^2 patch tensor for a batch of N images."""
    n, in_h, in_w = x.shape
    idx = _gather_index(in_h, in_w, f)
    return x.reshape(n, in_h * in_w)[:, idx]


def _forward_cols(net: ConvNet, cols2: np.ndarray, n: int):
    """cols2: (n * ph*pw*4) x f^2."""
    c = net.channels
    f = net.filter_size
    act = cols2 @ net.conv_w.reshape(c, f * f).T
    act += net.conv_b
    np.maximum(act, 0.0, out=act)

    win = act.reshape(-1, 4, c)
    arg = win.argmax(axis=1)  # first maximum = lowest row-major window index
    pooled = np.take_along_axis(win, arg[:, None, :], axis=1)[:, 0, :]

    flat = pooled.reshape(n, -1)
    logits = flat @ net.fc_w + net.fc_b
    return logits, (act, arg, pooled, flat)


def forward(net: ConvNet, x: np.ndarray):
    """Logits for a batch of images (N x H x W); returns (logits, cache)."""
    cols = im2col_pooled(x, net.filter_size)
    cols2 = cols.reshape(-1, net.filter_size ** 2)
    logits, inner = _forward_cols(net, cols2, len(x))
    return logits, (cols2, inner)


def softmax_xent(logits: np.ndarray, labels: np.ndarray):
    """(mean loss, dloss/dlogits)."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    expv = np.exp(shifted)
    probs = expv / expv.sum(axis=1, keepdims=True)
    n = len(labels)
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, np.finfo(probs.dtype).tiny)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n


def forward_backward_cols(net: ConvNet, cols2: np.ndarray, n: int,
                          labels: np.ndarray):
    logits, (act, arg, pooled, flat) = _forward_cols(net, cols2, n)
    loss, dlogits = softmax_xent(logits, labels)
    c = net.channels
    f = net.filter_size

    d_fc_w = flat.T @ dlogits
    d_fc_b = dlogits.sum(axis=0)
    dflat = dlogits @ net.fc_w.T

    dpool = dflat.reshape(-1, c)
    dpool = dpool * (pooled > 0)  # relu'(0)=0; only the argmax position flows
    dwin = np.zeros_like(act).reshape(-1, 4, c)
    np.put_along_axis(dwin, arg[:, None, :], dpool[:, None, :], axis=1)

    dpre2 = dwin.reshape(-1, c)
    d_conv_w = (dpre2.T @ cols2).reshape(c, f, f)
    d_conv_b = dpre2.sum(axis=0)

    grads = {"conv_w": d_conv_w, "conv_b": d_conv_b,
             "fc_w": d_fc_w, "fc_b": d_fc_b}
    return loss, logits, grads


def forward_backward(net: ConvNet, x: np.ndarray, labels: np.ndarray):
    """(loss, gradients dict keyed like the parameters)."""
    if len(x) == 0:
        raise ValueError("batch must be nonempty")
    cols = im2col_pooled(x, net.filter_size)
    loss, _, grads = forward_backward_cols(
        net, cols.reshape(-1, net.filter_size ** 2), len(x), labels)
    return loss, grads


def predict(net: ConvNet, x: np.ndarray, batch: int = 512) -> np.ndarray:
    out = []
    for i in range(0, len(x), batch):
        logits, _ = forward(net, x[i:i + batch])
        out.append(logits.argmax(axis=1))
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def accuracy(net: ConvNet, x: np.ndarray, labels: np.ndarray) -> float:
    if len(x) == 0:
        raise ValueError("empty evaluation set")
    return float((predict(net, x) == labels).mean())


@dataclass
class AdamState:
    """First/second moments with bias correction; beta1=0.9, beta2=0.999,
    eps=1e-8."""

    m: dict
    v: dict
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_net(cls, net: ConvNet) -> "AdamState":
        return cls(m={k: np.zeros_like(p) for k, p in net.params().items()},
                   v={k: np.zeros_like(p) for k, p in net.params().items()})


def adam_step(state: AdamState, net: ConvNet, grads: dict, lr: float,
              only: tuple | None = None):
    """One Adam update in place.  ``only`` restricts the update to the named
    parameters (the cluster-initialized small net trains just fc_w, fc_b,
    conv_b)."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t
    for name, g in grads.items():
        if only is not None and name not in only:
            continue
        p = getattr(net, name)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * np.square(g)
        m_hat = m / correction1
        v_hat = v / correction2
        p -= (lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype)
