"""Weight initialization, forward passes, hinge losses, exact subgradients,
and the full-batch gradient-descent loop with trace recording.

Two architectures share the machinery:

* ``xor``  -- two-layer fully connected net on 2-vectors,
              N(x) = sum_i [relu(w_i . x) - relu(u_i . x)],
              trained with the unnormalized hinge sum at margin 1;
* ``xord`` -- three-layer conv/max-pool net on {±1}^(2d) inputs,
              N(x) = sum_i [max_j relu(w_i . x_j) - max_j relu(u_i . x_j)],
              trained with per-sign-mean hinges at margins (gamma, 1).

Conventions (fixed so runs are deterministic and auditable):
relu'(0) = 0; max-pooling routes gradient to the lowest-index argmax
position; margin indicators are strict (a point contributes iff its margin
is violated strictly).  Iterations where one of those conventions could
have mattered are flagged in the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .patterns import PATTERN_COORDS, BinaryInput

__all__ = [
    "XOR_POINTS",
    "XOR_LABELS",
    "xor_training_set",
    "WeightMatrix",
    "HyperParams",
    "StopRule",
    "Endpoint",
    "TrainTrace",
    "NumericalFailureError",
    "init_gaussian",
    "xor_forward",
    "xord_forward",
    "hinge_loss",
    "subgradient",
    "train",
    "angle_deg",
    "realizing_net",
    "decoy_net",
]

# The four XOR training points in their conventional order and labels.
XOR_POINTS = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
XOR_LABELS = np.array([1, -1, 1, -1], dtype=float)


def xor_training_set():
    return [(XOR_POINTS[i].copy(), float(XOR_LABELS[i])) for i in range(4)]


class NumericalFailureError(RuntimeError):
    pass


@dataclass
class WeightMatrix:
    """2k filters: k 'w' filters (positive output sign), k 'u' filters."""

    w: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.w.shape != self.u.shape or self.w.ndim != 2 or self.w.shape[1] != 2:
            raise ValueError(f"expected matching (k, 2) filter blocks, got {self.w.shape} / {self.u.shape}")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.u))):
            raise ValueError("filter coordinates must be finite")

    @property
    def k(self) -> int:
        return self.w.shape[0]

    def copy(self) -> "WeightMatrix":
        return WeightMatrix(self.w.copy(), self.u.copy())

    # -- text format ---------------------------------------------------
    # One filter per line, sign group tagged:
    #   w <index> <c0> <c1>
    # Floats are written with repr so parsing round-trips bit-exactly.

    def to_text(self) -> str:
        lines = ["# xordlab weights v1", f"k {self.k}"]
        for tag, block in (("w", self.w), ("u", self.u)):
            for j in range(self.k):
                lines.append(f"{tag} {j} {float(block[j, 0])!r} {float(block[j, 1])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightMatrix":
        k = None
        blocks = {"w": {}, "u": {}}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "k":
                k = int(parts[1])
            elif parts[0] in ("w", "u") and len(parts) == 4:
                blocks[parts[0]][int(parts[1])] = (float(parts[2]), float(parts[3]))
            else:
                raise ValueError(f"unrecognized weights line {ln}: {raw!r}")
        if k is None or len(blocks["w"]) != k or len(blocks["u"]) != k:
            raise ValueError("weights text is incomplete")
        w = np.array([blocks["w"][j] for j in range(k)])
        u = np.array([blocks["u"][j] for j in range(k)])
        return cls(w, u)


def init_gaussian(k: int, sigma_g: float, rng: np.random.Generator) -> WeightMatrix:
    """IID zero-mean Gaussian coordinates; w block drawn before u block."""
    if sigma_g < 0:
        raise ValueError("sigma_g must be >= 0")
    w = rng.normal(0.0, sigma_g, size=(k, 2)) if sigma_g > 0 else np.zeros((k, 2))
    u = rng.normal(0.0, sigma_g, size=(k, 2)) if sigma_g > 0 else np.zeros((k, 2))
    return WeightMatrix(w, u)


@dataclass(frozen=True)
class StopRule:
    """zero-loss | patience | budget.  Zero loss and an exactly-zero
    subgradient always stop a run; 'patience' additionally stops after
    ``patience`` consecutive iterations without strict loss improvement."""

    kind: str = "zero-loss"
    patience: int | None = None

    def __post_init__(self):
        if self.kind not in ("zero-loss", "patience", "budget"):
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind == "patience" and (self.patience is None or self.patience < 1):
            raise ValueError("patience rule needs patience >= 1")


@dataclass(frozen=True)
class HyperParams:
    k: int
    c_eta: float
    sigma_g: float
    gamma: float = 1.0
    max_iters: int = 10_000
    stop_rule: StopRule = field(default_factory=StopRule)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.c_eta <= 0:
            raise ValueError("c_eta must be > 0")
        if self.sigma_g < 0:
            raise ValueError("sigma_g must be >= 0")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @property
    def eta(self) -> float:
        return self.c_eta / self.k


@dataclass(frozen=True)
class Endpoint:
    kind: str  # GlobalMin | LocalMin | BudgetExhausted
    iteration: int


def angle_deg(v, w) -> float:
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    nv, nw = np.linalg.norm(v), np.linalg.norm(w)
    if nv == 0 or nw == 0:
        return 90.0
    c = np.clip(np.dot(v, w) / (nv * nw), -1.0, 1.0)
    return math.degrees(math.acos(c))


# ---------------------------------------------------------------------------
# forward passes


def xor_forward(W: WeightMatrix, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.maximum(W.w @ x, 0.0).sum() - np.maximum(W.u @ x, 0.0).sum())


def xord_forward(W: WeightMatrix, x: BinaryInput) -> float:
    slots = x.slot_matrix()  # d x 2
    pw = np.maximum(W.w @ slots.T, 0.0).max(axis=1)
    pu = np.maximum(W.u @ slots.T, 0.0).max(axis=1)
    return float(pw.sum() - pu.sum())


# ---------------------------------------------------------------------------
# training-set preparation
#
# A max-pooled forward value depends on an input only through the set of
# distinct patterns it contains, and its subgradient additionally through
# the order in which patterns first appear (the lowest-index pooling rule).
# Points are therefore grouped by (label, member mask, first-occurrence
# ranks); each group evaluates once per iteration.


@dataclass(frozen=True)
class _Group:
    label: float
    mask: tuple          # 4 bools, member patterns
    first_occ: tuple     # rank of first occurrence per pattern (inf if absent)
    count: int
    class_key: str


def _xord_groups(S):
    if not S:
        raise ValueError("training set must be nonempty")
    table = {}
    for x, y in S:
        if not isinstance(x, BinaryInput):
            raise ValueError("xord training points must be BinaryInput values")
        if y not in (1, -1, 1.0, -1.0):
            raise ValueError(f"labels must be ±1, got {y!r}")
        mask = [False] * 4
        first = [math.inf] * 4
        for pos, idx in enumerate(x.indices):
            if not mask[idx - 1]:
                mask[idx - 1] = True
                first[idx - 1] = pos
        key = (float(y), tuple(mask), tuple(first))
        table[key] = table.get(key, 0) + 1
    groups = []
    for (y, mask, first), count in sorted(table.items(), key=lambda kv: kv[0]):
        members = ",".join(str(i + 1) for i in range(4) if mask[i])
        groups.append(_Group(y, mask, first, count, members))
    return groups


class _XordProblem:
    arch = "xord"

    def __init__(self, S, gamma: float):
        self.gamma = float(gamma)
        self.groups = _xord_groups(S)
        self.m_pos = sum(g.count for g in self.groups if g.label > 0)
        self.m_neg = sum(g.count for g in self.groups if g.label < 0)
        self.masks = np.array([g.mask for g in self.groups])            # G x 4
        self.first = np.array([g.first_occ for g in self.groups])      # G x 4
        self.labels = np.array([g.label for g in self.groups])
        self.counts = np.array([g.count for g in self.groups])
        self.margins = np.where(self.labels > 0, self.gamma, 1.0)

    def group_keys(self):
        return [f"{'+' if g.label > 0 else '-'}{g.class_key}" for g in self.groups]

    def stats(self, W: WeightMatrix):
        relu_w = np.maximum(W.w @ PATTERN_COORDS.T, 0.0)   # k x 4
        relu_u = np.maximum(W.u @ PATTERN_COORDS.T, 0.0)
        G = len(self.groups)
        k = W.k
        n_values = np.empty(G)
        coef_w = np.zeros((k, 4))
        coef_u = np.zeros((k, 4))
        pool_tie = False
        # first pass: pooled values per group
        pooled_w = np.empty((G, k))
        pooled_u = np.empty((G, k))
        args_w = np.empty((G, k), dtype=np.int64)
        args_u = np.empty((G, k), dtype=np.int64)
        for gi in range(G):
            mask = self.masks[gi]
            for relu, pooled, args in ((relu_w, pooled_w, args_w),
                                       (relu_u, pooled_u, args_u)):
                vals = np.where(mask, relu, -np.inf)
                peak = vals.max(axis=1)
                cand = vals == peak[:, None]
                n_cand = cand.sum(axis=1)
                if np.any((n_cand > 1) & (peak > 0)):
                    pool_tie = True
                # lowest first-occurrence position among tied patterns
                rank = np.where(cand, self.first[gi], np.inf)
                args[gi] = rank.argmin(axis=1)
                pooled[gi] = peak
            n_values[gi] = pooled_w[gi].sum() - pooled_u[gi].sum()

        resid = np.where(self.labels > 0,
                         self.gamma - n_values, 1.0 + n_values)
        viol = resid > 0.0
        margin_tie = bool(np.any(resid == 0.0))
        per_sign = np.where(self.labels > 0, self.m_pos, self.m_neg)
        loss = float(np.sum(self.counts * np.maximum(resid, 0.0) / per_sign))

        for gi in range(G):
            if not viol[gi]:
                continue
            sgn = -1.0 if self.labels[gi] > 0 else 1.0
            scale = self.counts[gi] / per_sign[gi]
            live_w = pooled_w[gi] > 0.0
            live_u = pooled_u[gi] > 0.0
            np.add.at(coef_w, (np.nonzero(live_w)[0], args_w[gi][live_w]), sgn * scale)
            np.add.at(coef_u, (np.nonzero(live_u)[0], args_u[gi][live_u]), -sgn * scale)

        grad_w = coef_w @ PATTERN_COORDS
        grad_u = coef_u @ PATTERN_COORDS

        # S_t^+ = pooled response of the argmax-{1,3} w-filters on a diverse
        # positive point (monitored sum from the convergence analysis).
        dots_w = W.w @ PATTERN_COORDS.T
        owner = dots_w.argmax(axis=1)
        in13 = (owner == 0) | (owner == 2)
        s_plus = float(relu_w.max(axis=1)[in13].sum())

        return _StepStats(loss, n_values, viol, grad_w, grad_u,
                          pool_tie, margin_tie, False, s_plus)


class _XorProblem:
    arch = "xor"

    def __init__(self, S, gamma: float):
        if not S:
            raise ValueError("training set must be nonempty")
        if gamma != 1.0:
            raise ValueError("the xor hinge uses margin 1 on both sides")
        self.gamma = 1.0
        self.X = np.array([np.asarray(x, dtype=float) for x, _ in S])
        self.y = np.array([float(y) for _, y in S])
        if self.X.ndim != 2 or self.X.shape[1] != 2:
            raise ValueError("xor training points must be 2-vectors")
        if not np.all(np.abs(self.y) == 1.0):
            raise ValueError("labels must be ±1")

    def group_keys(self):
        return [f"x{i + 1}" for i in range(len(self.y))]

    def stats(self, W: WeightMatrix):
        dw = W.w @ self.X.T    # k x n
        du = W.u @ self.X.T
        n_values = np.maximum(dw, 0.0).sum(axis=0) - np.maximum(du, 0.0).sum(axis=0)
        resid = 1.0 - self.y * n_values
        viol = resid > 0.0
        margin_tie = bool(np.any(resid == 0.0))
        loss = float(np.maximum(resid, 0.0).sum())

        coef = self.y * viol
        grad_w = -((dw > 0.0) * coef) @ self.X
        grad_u = ((du > 0.0) * coef) @ self.X
        # relu'(0)=0 could have mattered only where a violating point meets
        # an exactly-zero preactivation
        kink = bool(np.any((dw[:, viol] == 0.0)) or np.any((du[:, viol] == 0.0)))
        return _StepStats(loss, n_values, viol, grad_w, grad_u,
                          False, margin_tie, kink, math.nan)


@dataclass
class _StepStats:
    loss: float
    n_values: np.ndarray
    violations: np.ndarray
    grad_w: np.ndarray
    grad_u: np.ndarray
    pool_tie: bool
    margin_tie: bool
    kink: bool
    s_plus: float


def _problem(S, arch: str, gamma: float):
    if arch == "xor":
        return _XorProblem(S, gamma)
    if arch == "xord":
        return _XordProblem(S, gamma)
    raise ValueError(f"unknown architecture {arch!r}")


def hinge_loss(W: WeightMatrix, S, arch: str, gamma: float = 1.0) -> float:
    return _problem(S, arch, gamma).stats(W).loss


def subgradient(W: WeightMatrix, S, arch: str, gamma: float = 1.0):
    """Exact subgradient of ``hinge_loss`` under the stated conventions,
    returned as (grad_w, grad_u) with filter-block shapes."""
    st = _problem(S, arch, gamma).stats(W)
    return st.grad_w, st.grad_u


# ---------------------------------------------------------------------------
# training loop


@dataclass
class TrainTrace:
    """Per-iteration history of a run.  Row ``t`` describes the iterate W_t
    *before* its update; ``a_counters[t]`` counts the margin-violating
    iterations strictly before t, so the clustering decompositions read
    straight off the trace."""

    arch: str
    eta: float
    gamma: float
    group_keys: list
    group_labels: np.ndarray
    loss: np.ndarray = None
    n_values: np.ndarray = None
    violations: np.ndarray = None
    a_counters: np.ndarray = None
    s_plus: np.ndarray = None
    pool_tie: np.ndarray = None
    margin_tie: np.ndarray = None
    kink: np.ndarray = None
    weights: list = None
    assign_w: np.ndarray = None
    assign_u: np.ndarray = None
    w0: WeightMatrix = None

    @property
    def iterations(self) -> int:
        return len(self.loss) - 1

    def to_csv(self, path):
        """Documented trace schema; see SCHEMA.md."""
        import csv

        keys = self.group_keys
        with open(path, "w", newline="") as fh:
            fh.write("# schema=xordlab/trace/v1\n")
            fh.write(f"# arch={self.arch} eta={self.eta!r} gamma={self.gamma!r} "
                     f"groups={';'.join(keys)}\n")
            wr = csv.writer(fh)
            header = (["t", "loss"]
                      + [f"n[{k}]" for k in keys]
                      + [f"viol[{k}]" for k in keys]
                      + [f"a[{k}]" for k in keys]
                      + ["s_plus", "pool_tie", "margin_tie", "kink"])
            wr.writerow(header)
            for t in range(len(self.loss)):
                row = [t, repr(float(self.loss[t]))]
                row += [repr(float(v)) for v in self.n_values[t]]
                row += [int(v) for v in self.violations[t]]
                row += [int(v) for v in self.a_counters[t]]
                sp = self.s_plus[t]
                row += ["" if math.isnan(sp) else repr(float(sp))]
                row += [int(self.pool_tie[t]), int(self.margin_tie[t]), int(self.kink[t])]
                wr.writerow(row)


@dataclass
class TrainState:
    """What monitors see each iteration (before the update of W)."""

    t: int
    W: WeightMatrix
    stats: _StepStats
    a_counters: np.ndarray
    eta: float
    gamma: float
    arch: str
    converged: bool


def train(W0: WeightMatrix, S, hp: HyperParams, arch: str,
          monitors=(), record_weights: bool = False,
          record_sets: bool = False):
    """Full-batch gradient descent; returns (W_final, TrainTrace, Endpoint).

    Stops at the first zero-loss iterate (GlobalMin), at an exactly-zero
    subgradient with positive loss (LocalMin), on patience exhaustion, or
    at the iteration budget (both BudgetExhausted).
    """
    problem = _problem(S, arch, hp.gamma)
    eta = hp.eta
    W = W0.copy()
    n_groups = len(problem.group_keys())

    loss_hist, n_hist, viol_hist, a_hist = [], [], [], []
    splus_hist, ptie_hist, mtie_hist, kink_hist = [], [], [], []
    weights_hist = [] if record_weights else None
    aw_hist, au_hist = ([], []) if record_sets else (None, None)

    a_counters = np.zeros(n_groups, dtype=np.int64)
    best_loss = math.inf
    stale = 0
    endpoint = None

    t = 0
    while True:
        st = problem.stats(W)
        if not math.isfinite(st.loss):
            raise NumericalFailureError(
                f"non-finite loss at iteration {t} (|W| max "
                f"{max(np.abs(W.w).max(), np.abs(W.u).max()):.3e})")

        loss_hist.append(st.loss)
        n_hist.append(st.n_values.copy())
        viol_hist.append(st.violations.copy())
        a_hist.append(a_counters.copy())
        splus_hist.append(st.s_plus)
        ptie_hist.append(st.pool_tie)
        mtie_hist.append(st.margin_tie)
        kink_hist.append(st.kink)
        if record_weights:
            weights_hist.append(W.copy())
        if record_sets:
            aw_hist.append((W.w @ PATTERN_COORDS.T).argmax(axis=1).astype(np.int8) + 1)
            au_hist.append((W.u @ PATTERN_COORDS.T).argmax(axis=1).astype(np.int8) + 1)

        converged = st.loss == 0.0
        for mon in monitors:
            mon(TrainState(t, W, st, a_counters, eta, hp.gamma, arch, converged))

        if converged:
            endpoint = Endpoint("GlobalMin", t)
            break
        if not (st.grad_w.any() or st.grad_u.any()):
            endpoint = Endpoint("LocalMin", t)
            break
        if hp.stop_rule.kind == "patience":
            if st.loss < best_loss:
                best_loss = st.loss
                stale = 0
            else:
                stale += 1
                if stale >= hp.stop_rule.patience:
                    endpoint = Endpoint("BudgetExhausted", t)
                    break
        if t >= hp.max_iters:
            endpoint = Endpoint("BudgetExhausted", t)
            break

        W.w -= eta * st.grad_w
        W.u -= eta * st.grad_u
        a_counters += st.violations.astype(np.int64)
        t += 1

    trace = TrainTrace(
        arch=arch, eta=eta, gamma=hp.gamma,
        group_keys=problem.group_keys(),
        group_labels=(problem.labels if arch == "xord" else problem.y),
        loss=np.array(loss_hist),
        n_values=np.array(n_hist),
        violations=np.array(viol_hist),
        a_counters=np.array(a_hist),
        s_plus=np.array(splus_hist),
        pool_tie=np.array(ptie_hist),
        margin_tie=np.array(mtie_hist),
        kink=np.array(kink_hist),
        weights=weights_hist,
        assign_w=np.array(aw_hist) if record_sets else None,
        assign_u=np.array(au_hist) if record_sets else None,
        w0=W0.copy(),
    )
    return W, trace, endpoint


# ---------------------------------------------------------------------------
# reference nets


def realizing_net(scale: float = 1.0) -> WeightMatrix:
    """k=2 net implementing the ground truth: w = (3p1, 3p3), u = (p2, p4)."""
    w = np.array([3 * PATTERN_COORDS[0], 3 * PATTERN_COORDS[2]]) * scale
    u = np.array([PATTERN_COORDS[1], PATTERN_COORDS[3]])
    return WeightMatrix(w, u)


def decoy_net() -> WeightMatrix:
    """k=2 net with zero loss on all-diverse sets that detects only pattern 1:
    w = (3p1, 3p1), u = (p2, p2)."""
    w = np.array([3 * PATTERN_COORDS[0], 3 * PATTERN_COORDS[0]])
    u = np.array([PATTERN_COORDS[1], PATTERN_COORDS[1]])
    return WeightMatrix(w, u)
