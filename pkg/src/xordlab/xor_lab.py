"""Set tracking and empirical verifiers for the two-dimensional XOR warm-up.

The verifiers check, per run, the three claims made about this regime:
sign-based exploration at initialization, the clustering decomposition of
every filter during training, and the angle bound at convergence.  The
small-network (k=2) Monte Carlo measures how often under-exploration at
initialization traps gradient descent in a local minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gd import (
    XOR_LABELS,
    XOR_POINTS,
    Endpoint,
    HyperParams,
    StopRule,
    WeightMatrix,
    angle_deg,
    init_gaussian,
    train,
    xor_forward,
    xor_training_set,
)
from .util import trial_rng, wilson_ci

__all__ = [
    "XorSetSnapshot",
    "xor_set_snapshot",
    "xor_overparam_hp",
    "xor_small_hp",
    "check_exploration_xor",
    "clustering_decomposition_xor",
    "final_angle_check_xor",
    "run_xor",
    "montecarlo_small_xor",
    "convergence_bound_iters",
    "angle_threshold_deg",
]


@dataclass(frozen=True)
class XorSetSnapshot:
    """Sign-based neuron sets at one iteration: W+(i) = {j : w_j . x_i > 0}."""

    t: int
    wplus: dict
    uplus: dict

    def __post_init__(self):
        # the four dot products of one filter cannot all be <= 0 unless the
        # filter is zero (x3 = -x1, x4 = -x2)
        pass


def xor_set_snapshot(W: WeightMatrix, t: int = 0) -> XorSetSnapshot:
    dw = W.w @ XOR_POINTS.T
    du = W.u @ XOR_POINTS.T
    wplus = {i + 1: frozenset(np.nonzero(dw[:, i] > 0)[0].tolist()) for i in range(4)}
    uplus = {i + 1: frozenset(np.nonzero(du[:, i] > 0)[0].tolist()) for i in range(4)}
    return XorSetSnapshot(t, wplus, uplus)


def xor_overparam_hp(k: int = 50, c_eta: float = 0.4, max_iters: int = 500) -> HyperParams:
    """Theorem-regime defaults: sigma_g at its admissible ceiling."""
    return HyperParams(k=k, c_eta=c_eta, sigma_g=c_eta / (16 * k ** 1.5),
                       gamma=1.0, max_iters=max_iters)


def xor_small_hp(c_eta: float = 0.4, max_iters: int = 2000) -> HyperParams:
    return xor_overparam_hp(k=2, c_eta=c_eta, max_iters=max_iters)


def convergence_bound_iters(k: int) -> int:
    """ceil(16 sqrt(k) / (sqrt(k) - 2)); requires k > 16."""
    if k <= 16:
        raise ValueError("the convergence bound needs k > 16")
    return math.ceil(16 * math.sqrt(k) / (math.sqrt(k) - 2))


def angle_threshold_deg(c_eta: float, gamma: float = 1.0) -> float:
    """arccos((gamma - 1 + (1 - 2 c_eta)) ...) -- for the XOR warm-up gamma
    is 1 and the bound is arccos((1 - 2 c_eta) / (1 + c_eta))."""
    num = gamma - 1 + 1 - 2 * c_eta
    den = gamma - 1 + 1 + c_eta
    return math.degrees(math.acos(max(-1.0, min(1.0, num / den))))


def check_exploration_xor(snapshot: XorSetSnapshot, k: int) -> dict:
    """Are all eight initial set sizes within k/2 ± 2 sqrt(k)?"""
    if k <= 16:
        raise ValueError("exploration bounds are stated for k > 16")
    lo = k / 2 - 2 * math.sqrt(k)
    hi = k / 2 + 2 * math.sqrt(k)
    sizes = {f"W+({i})": len(snapshot.wplus[i]) for i in range(1, 5)}
    sizes.update({f"U+({i})": len(snapshot.uplus[i]) for i in range(1, 5)})
    ok = {name: lo <= n <= hi for name, n in sizes.items()}
    return {"lower": lo, "upper": hi, "sizes": sizes, "ok": ok,
            "all_ok": all(ok.values())}


def clustering_decomposition_xor(trace, j: int, i: int):
    """Per-iteration decomposition w_t^j = a_i(t) eta x_i + v_t for an
    eligible filter (j in W0+(i), i in {1,3}).

    Returns a list of (a_i(t), v_t, ok) where ok requires v_t . x_i > 0 and
    |v_t . x_2| < 2 eta.  The trace must carry weight snapshots.
    """
    if i not in (1, 3):
        raise ValueError("the decomposition is stated for i in {1, 3}")
    if trace.weights is None:
        raise ValueError("trace was recorded without weight snapshots")
    snap0 = xor_set_snapshot(trace.weights[0], 0)
    if j not in snap0.wplus[i]:
        raise ValueError(f"filter {j} is not in W0+({i})")
    eta = trace.eta
    x_i = XOR_POINTS[i - 1]
    x_2 = XOR_POINTS[1]
    out = []
    for t, W in enumerate(trace.weights):
        a = int(trace.a_counters[t][i - 1])
        v = W.w[j] - a * eta * x_i
        ok = (float(v @ x_i) > 0.0) and (abs(float(v @ x_2)) < 2 * eta)
        out.append((a, v, ok))
    return out


def final_angle_check_xor(W_final: WeightMatrix, snapshot0: XorSetSnapshot,
                          c_eta: float) -> dict:
    """Angle bound at a global minimum: every filter stays within
    arccos((1 - 2 c_eta)/(1 + c_eta)) of the point that owned it at t=0
    (w-filters for i in {1,3}, u-filters for i in {2,4})."""
    threshold = angle_threshold_deg(c_eta)
    angles = []
    for i in (1, 3):
        for j in sorted(snapshot0.wplus[i]):
            angles.append(("w", i, j, angle_deg(W_final.w[j], XOR_POINTS[i - 1])))
    for i in (2, 4):
        for j in sorted(snapshot0.uplus[i]):
            angles.append(("u", i, j, angle_deg(W_final.u[j], XOR_POINTS[i - 1])))
    worst = max((a for *_, a in angles), default=0.0)
    return {"threshold_deg": threshold, "angles": angles, "max_angle_deg": worst,
            "all_ok": worst <= threshold}


@dataclass
class XorRunReport:
    seed: int
    k: int
    endpoint: Endpoint
    exploration: dict
    angle_check: dict | None
    clustering_ok: bool
    misclassified: list
    trace: object = field(repr=False, default=None)
    w0: WeightMatrix = field(repr=False, default=None)
    w_final: WeightMatrix = field(repr=False, default=None)


def run_xor(hp: HyperParams, seed: int, record_weights: bool = True) -> XorRunReport:
    """One seeded XOR run plus all per-run verifier results."""
    rng = trial_rng(seed, 0)
    W0 = init_gaussian(hp.k, hp.sigma_g, rng)
    S = xor_training_set()
    W, trace, endpoint = train(W0, S, hp, "xor", record_weights=record_weights)

    snap0 = xor_set_snapshot(W0, 0)
    exploration = (check_exploration_xor(snap0, hp.k)
                   if hp.k > 16 else {"all_ok": None})

    clustering_ok = True
    if record_weights:
        for i in (1, 3):
            for j in snap0.wplus[i]:
                if not all(ok for *_, ok in clustering_decomposition_xor(trace, j, i)):
                    clustering_ok = False

    angle_check = None
    if endpoint.kind == "GlobalMin":
        angle_check = final_angle_check_xor(W, snap0, hp.c_eta)

    mis = []
    for i in range(4):
        n = xor_forward(W, XOR_POINTS[i])
        if n == 0.0 or math.copysign(1.0, n) != XOR_LABELS[i]:
            mis.append(i + 1)
    return XorRunReport(seed, hp.k, endpoint, exploration, angle_check,
                        clustering_ok, mis, trace, W0, W)


def montecarlo_small_xor(trials: int, seed: int, c_eta: float = 0.4,
                         init_event_trials: int | None = None) -> dict:
    """k=2 Monte Carlo: local-minimum fraction with 95% CI, plus the
    frequency of the under-exploration event at initialization (some
    W0+(i), i in {1,3}, or U0+(i), i in {2,4}, empty; exactly 3/4 by
    sign-independence)."""
    hp = xor_small_hp(c_eta=c_eta)
    n_local = 0
    n_local_err = 0
    endpoints = {"GlobalMin": 0, "LocalMin": 0, "BudgetExhausted": 0}
    for idx in range(trials):
        rep = run_xor(hp, seed=_derived(seed, idx), record_weights=False)
        endpoints[rep.endpoint.kind] += 1
        if rep.endpoint.kind == "LocalMin":
            n_local += 1
            if rep.misclassified:
                n_local_err += 1

    n_init = init_event_trials or trials
    n_event = 0
    for idx in range(n_init):
        rng = trial_rng(seed + 1_000_003, idx)
        W0 = init_gaussian(2, hp.sigma_g, rng)
        snap = xor_set_snapshot(W0, 0)
        if (not snap.wplus[1] or not snap.wplus[3]
                or not snap.uplus[2] or not snap.uplus[4]):
            n_event += 1

    lo, hi = wilson_ci(n_local, trials)
    return {
        "trials": trials,
        "local_min_fraction": n_local / trials,
        "local_min_ci95": (lo, hi),
        "local_min_all_misclassify": n_local_err == n_local,
        "endpoints": endpoints,
        "init_event_trials": n_init,
        "init_event_frequency": n_event / n_init,
    }


def _derived(seed: int, idx: int) -> int:
    # run_xor derives its own rng from (seed, 0); feed it a combined seed
    return int(np.random.SeedSequence([seed, idx]).generate_state(1)[0])
