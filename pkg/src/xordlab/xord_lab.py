"""XOR-detection verifiers: argmax set tracking, detection confidence,
ground-truth recovery, decoy experiments, channel sweeps, the trajectory
symmetry check, and the sample-complexity calculator.

Theorem-regime trials train on one positive and one negative diverse point
(the network value and gradient are class functions, so a diverse m+m set
is equivalent to the pair) and verify each claim the analysis makes about
the trajectory and the endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .gd import (
    HyperParams,
    StopRule,
    WeightMatrix,
    angle_deg,
    hinge_loss,
    init_gaussian,
    train,
    xord_forward,
)
from .patterns import (
    CRITICAL_CLASSES,
    PATTERN_COORDS,
    BinaryInput,
    DistributionSpec,
    PatternSet,
    all_pattern_sets,
    exact_test_error,
    p_star,
)
from .util import trial_rng, wilson_ci

__all__ = [
    "ConfigurationRejectedError",
    "XordSetSnapshot",
    "xord_sets",
    "DetectionReport",
    "detection_confidence",
    "recovers_fstar",
    "class_decisions",
    "TrialReport",
    "diverse_pair",
    "all_diverse_set",
    "with_nondiverse_set",
    "alpha_k",
    "detection_threshold",
    "main_angle_threshold_deg",
    "theorem_budget",
    "InvariantMonitor",
    "theorem_main_trial",
    "theorem_small_trial",
    "decoy_experiment",
    "SweepConfig",
    "sweep_run",
    "sweep_channels",
    "gamma_comparison",
    "symmetry_check",
    "sample_complexity_bounds",
    "sample_signed",
]

NEGLIGIBLE_C = 1e-10  # the analysis' unobservable probability constant


class ConfigurationRejectedError(ValueError):
    """Hyperparameters miss a theorem precondition and no override was given."""


# ---------------------------------------------------------------------------
# argmax sets and endpoint classifiers


@dataclass(frozen=True)
class XordSetSnapshot:
    """Argmax-based filter sets: W+(i) collects the filters whose largest
    dot product over all four patterns is attained at pattern i; W-(i)
    restricts the argmax to the negative patterns {2,4}."""

    t: int
    wplus: dict
    uplus: dict
    wminus: dict
    uminus: dict
    tie: bool


def _argmax_sets(dots: np.ndarray, cols):
    sub = dots[:, [c - 1 for c in cols]]
    order = sub.argmax(axis=1)
    peak = sub.max(axis=1)
    tie = bool(np.any((sub == peak[:, None]).sum(axis=1) > 1))
    sets = {c: frozenset(np.nonzero(order == ci)[0].tolist())
            for ci, c in enumerate(cols)}
    return sets, tie


def xord_sets(W: WeightMatrix, t: int = 0) -> XordSetSnapshot:
    dw = W.w @ PATTERN_COORDS.T
    du = W.u @ PATTERN_COORDS.T
    wplus, tw1 = _argmax_sets(dw, (1, 2, 3, 4))
    uplus, tu1 = _argmax_sets(du, (1, 2, 3, 4))
    wminus, tw2 = _argmax_sets(dw, (2, 4))
    uminus, tu2 = _argmax_sets(du, (2, 4))
    return XordSetSnapshot(t, wplus, uplus, wminus, uminus,
                           tw1 or tu1 or tw2 or tu2)


@dataclass(frozen=True)
class DetectionReport:
    """Summed rectified responses of each sign group to its patterns:
    D(p) = sum_j relu(w_j . p) for p in {p1, p3}, and the u-filters for
    {p2, p4}.  A pattern is detected when D(p) > c_d (strict)."""

    c_d: float
    d_values: dict
    detected: dict

    @property
    def all_detected(self) -> bool:
        return all(self.detected.values())

    @property
    def undetected(self) -> list:
        return [i for i in (1, 2, 3, 4) if not self.detected[i]]


def detection_confidence(W: WeightMatrix, c_d: float) -> DetectionReport:
    if c_d < 0:
        raise ValueError("c_d must be >= 0")
    dvals = {}
    for i in (1, 3):
        dvals[i] = float(np.maximum(W.w @ PATTERN_COORDS[i - 1], 0.0).sum())
    for i in (2, 4):
        dvals[i] = float(np.maximum(W.u @ PATTERN_COORDS[i - 1], 0.0).sum())
    detected = {i: dvals[i] > c_d for i in (1, 2, 3, 4)}
    return DetectionReport(c_d, dvals, detected)


def class_decisions(W: WeightMatrix, d: int):
    """sign(N) on the canonical representative of every feasible class.
    Returns (decisions, zero_margin_classes); a decision of 0 marks an
    exactly-zero network output."""
    decisions = {}
    zero_margin = []
    for ps in all_pattern_sets():
        if len(ps.members) > d:
            continue
        n = xord_forward(W, ps.representative(d))
        if n == 0.0:
            decisions[ps] = 0
            zero_margin.append(ps)
        else:
            decisions[ps] = 1 if n > 0 else -1
    return decisions, zero_margin


def recovers_fstar(W: WeightMatrix, d: int):
    """Does sign(N) match the ground truth on every pattern-set class?"""
    if d < 4:
        raise ValueError("recovery is evaluated at d >= 4 (all 15 classes feasible)")
    decisions, zero_margin = class_decisions(W, d)
    recovered = all(dec == ps.label for ps, dec in decisions.items())
    return recovered, decisions, zero_margin


# ---------------------------------------------------------------------------
# canonical training sets


def diverse_pair(d: int = 10):
    """One canonical positive diverse and one canonical negative diverse point."""
    xp = PatternSet({1, 2, 3, 4}).representative(d)
    xn = PatternSet({2, 4}).representative(d)
    return [(xp, 1.0), (xn, -1.0)]


def _random_arrangement(members, d, rng):
    alphabet = sorted(members)
    want = set(alphabet)
    while True:
        draw = [alphabet[i] for i in rng.integers(0, len(alphabet), size=d)]
        if set(draw) == want:
            return BinaryInput(tuple(draw))


def all_diverse_set(d: int = 10, m: int = 6, rng=None):
    """m positive diverse + m negative diverse points (random arrangements)."""
    rng = rng or np.random.default_rng(0)
    S = [( _random_arrangement({1, 2, 3, 4}, d, rng), 1.0) for _ in range(m)]
    S += [(_random_arrangement({2, 4}, d, rng), -1.0) for _ in range(m)]
    return S


def with_nondiverse_set(d: int = 10, m: int = 6, rng=None):
    """The all-diverse set with one negative point replaced by (p2, ..., p2)."""
    S = all_diverse_set(d, m, rng)
    S[m] = (BinaryInput((2,) * d), -1.0)
    return S


# ---------------------------------------------------------------------------
# theorem-regime constants


def alpha_k(k: int) -> float:
    if k / 4 <= 2 * math.sqrt(k):
        raise ValueError("alpha(k) needs k/4 > 2 sqrt(k), i.e. k > 64")
    return (k / 4 + 2 * math.sqrt(k)) / (k / 4 - 2 * math.sqrt(k))


def detection_threshold(k: int, c_eta: float) -> float:
    """Largest confidence at which the endpoint is guaranteed to detect all
    patterns: (1 - 5 c_eta / 4) / (alpha(k) + 1)."""
    return (1 - 5 * c_eta / 4) / (alpha_k(k) + 1)


def main_angle_threshold_deg(gamma: float, c_eta: float) -> float:
    """arccos((gamma - 1 - 2 c_eta) / (gamma - 1 + c_eta)) in degrees."""
    c = (gamma - 1 - 2 * c_eta) / (gamma - 1 + c_eta)
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def theorem_budget(gamma: float, c_eta: float) -> int:
    """ceil(28 (gamma + 1 + 8 c_eta) / c_eta) iterations."""
    return math.ceil(28 * (gamma + 1 + 8 * c_eta) / c_eta)


def xord_theorem_hp(k: int = 120, c_eta: float = 1 / 410, gamma: float = 8.0,
                    max_iters: int | None = None) -> HyperParams:
    return HyperParams(k=k, c_eta=c_eta, sigma_g=c_eta / (16 * k ** 1.5),
                       gamma=gamma,
                       max_iters=max_iters or theorem_budget(gamma, c_eta))


# ---------------------------------------------------------------------------
# trajectory invariants


class InvariantMonitor:
    """Streaming checks of the trajectory claims for a diverse-pair run:

    * set stability: W_t+(i) = W_0+(i) for i in {1,3} at every t;
    * value bounds:  N_t(x+) <= gamma + 3 c_eta, -N_t(x-) <= 1 + 3 c_eta,
                     S_t+ <= gamma + 1 + 8 c_eta;
    * clustering:    for j in W_0+(i), i in {1,3}, the residual
                     w_t^j - a+(t) eta p_i keeps a positive p_i-component
                     and |residual . p_2| < 2 eta;
    * monotonicity:  S_t+ does not decrease before the global minimum,
                     except (stays put) when N_t(x+) >= gamma;
    * update equivalence: between consecutive iterations without tie or
                     dead-pool events, the generic subgradient step equals
                     the closed-form set-based update exactly.

    Violations are collected, not raised, so a trial report can carry them.
    """

    def __init__(self, hp: HyperParams, pos_index: int, neg_index: int):
        self.hp = hp
        self.c_eta = hp.c_eta
        self.eta = hp.eta
        self.gamma = hp.gamma
        self.pos_index = pos_index
        self.neg_index = neg_index
        self.violations = []
        self.exploration_ok = None
        self._w0_sets = None
        self._w0 = None
        self._prev = None  # (s_plus, n_pos, converged)
        self._predicted = None
        self._prev_clean = False

    def _record(self, t, what):
        self.violations.append((t, what))

    def __call__(self, state):
        t, W, st = state.t, state.W, state.stats
        n_pos = float(st.n_values[self.pos_index])
        n_neg = float(st.n_values[self.neg_index])
        dots_w = W.w @ PATTERN_COORDS.T
        owner = dots_w.argmax(axis=1)

        if t == 0:
            self._w0_sets = {i: frozenset(np.nonzero(owner == i - 1)[0].tolist())
                             for i in (1, 3)}
            self._w0 = W.copy()
            k = self.hp.k
            size = len(self._w0_sets[1] | self._w0_sets[3])
            self.exploration_ok = (k / 2 - 2 * math.sqrt(k) <= size
                                   <= k / 2 + 2 * math.sqrt(k))
        else:
            for i in (1, 3):
                cur = frozenset(np.nonzero(owner == i - 1)[0].tolist())
                if cur != self._w0_sets[i]:
                    self._record(t, f"set-stability W+({i})")

        if n_pos > self.gamma + 3 * self.c_eta:
            self._record(t, "bound N(x+)")
        if -n_neg > 1 + 3 * self.c_eta:
            self._record(t, "bound -N(x-)")
        if st.s_plus > self.gamma + 1 + 8 * self.c_eta:
            self._record(t, "bound S+")

        a_plus = int(state.a_counters[self.pos_index])
        for i in (1, 3):
            idx = sorted(self._w0_sets[i])
            if idx:
                resid = W.w[idx] - a_plus * self.eta * PATTERN_COORDS[i - 1]
                if not np.all(resid @ PATTERN_COORDS[i - 1] > 0):
                    self._record(t, f"clustering residual sign ({i})")
                if not np.all(np.abs(resid @ PATTERN_COORDS[1]) < 2 * self.eta):
                    self._record(t, f"clustering residual p2 ({i})")

        if self._prev is not None:
            s_prev, n_pos_prev, conv_prev = self._prev
            if not conv_prev:
                if n_pos_prev < self.gamma:
                    if st.s_plus < s_prev:
                        self._record(t, "S+ decreased")
                elif abs(st.s_plus - s_prev) > 1e-12 * max(1.0, abs(s_prev)):
                    self._record(t, "S+ moved while N(x+) >= gamma")

        if self._predicted is not None and self._prev_clean:
            pred_w, pred_u = self._predicted
            if not (np.array_equal(W.w, pred_w) and np.array_equal(W.u, pred_u)):
                self._record(t, "closed-form update mismatch")

        # closed-form prediction for the next iterate
        relu_w = np.maximum(dots_w, 0.0)
        dots_u = W.u @ PATTERN_COORDS.T
        relu_u = np.maximum(dots_u, 0.0)
        clean = (not st.pool_tie and not st.margin_tie
                 and float(relu_w.max(axis=1).min()) > 0.0
                 and float(relu_u.max(axis=1).min()) > 0.0
                 and float(relu_w[:, [1, 3]].max(axis=1).min()) > 0.0
                 and float(relu_u[:, [1, 3]].max(axis=1).min()) > 0.0)
        self._prev_clean = clean
        if clean and not state.converged:
            beta_p = 1.0 if n_pos < self.gamma else 0.0
            beta_n = 1.0 if -n_neg < 1.0 else 0.0
            k = len(dots_w)
            rows = np.arange(k)
            i1w = dots_w.argmax(axis=1)
            i2w = np.array([1, 3])[dots_w[:, [1, 3]].argmax(axis=1)]
            i1u = dots_u.argmax(axis=1)
            i2u = np.array([1, 3])[dots_u[:, [1, 3]].argmax(axis=1)]
            # evaluate through the same float path as the trainer
            # (coefficient matrix times the pattern matrix, then one axpy)
            cw = np.zeros((k, 4))
            np.add.at(cw, (rows, i1w), -beta_p)
            np.add.at(cw, (rows, i2w), beta_n)
            cu = np.zeros((k, 4))
            np.add.at(cu, (rows, i1u), beta_p)
            np.add.at(cu, (rows, i2u), -beta_n)
            pred_w = W.w - self.eta * (cw @ PATTERN_COORDS)
            pred_u = W.u - self.eta * (cu @ PATTERN_COORDS)
            self._predicted = (pred_w, pred_u)
        else:
            self._predicted = None

        self._prev = (st.s_plus, n_pos, state.converged)


# ---------------------------------------------------------------------------
# trial reports


@dataclass
class TrialReport:
    kind: str
    seed: int
    k: int
    endpoint_kind: str
    iterations: int
    recovered_fstar: bool
    decisions: dict
    misclassified: list
    zero_margin: list
    detection: DetectionReport | None
    test_error: float | None
    angles: list
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "schema_version": 1,
            "kind": self.kind,
            "seed": self.seed,
            "k": self.k,
            "endpoint": self.endpoint_kind,
            "iterations": self.iterations,
            "recovered_fstar": self.recovered_fstar,
            "decisions": {ps.key: int(dec) for ps, dec in self.decisions.items()},
            "misclassified": [ps.key for ps in self.misclassified],
            "zero_margin": [ps.key for ps in self.zero_margin],
            "test_error": self.test_error,
            "angles": self.angles,
            "extras": self.extras,
        }
        if self.detection is not None:
            payload["detection"] = {
                "c_d": self.detection.c_d,
                "d_values": {str(i): v for i, v in self.detection.d_values.items()},
                "detected": {str(i): bool(v) for i, v in self.detection.detected.items()},
            }
        return json.dumps(payload, indent=2, sort_keys=True)


def _misclassified(decisions) -> list:
    return [ps for ps, dec in decisions.items() if dec != ps.label]


# ---------------------------------------------------------------------------
# theorem trials


def theorem_main_trial(seed: int, k: int = 120, c_eta: float = 1 / 410,
                       gamma: float = 8.0, d: int = 10,
                       dist: DistributionSpec | None = None,
                       override: bool = False) -> TrialReport:
    """One over-parameterized diverse-pair run with every endpoint and
    trajectory claim checked.  Preconditions: k >= 120, c_eta <= 1/410,
    gamma >= 8 (sigma_g sits at its admissible ceiling)."""
    if not override:
        problems = []
        if k < 120:
            problems.append(f"k={k} < 120")
        if c_eta > 1 / 410:
            problems.append(f"c_eta={c_eta} > 1/410")
        if gamma < 8:
            problems.append(f"gamma={gamma} < 8")
        if problems:
            raise ConfigurationRejectedError(
                "; ".join(problems) + " (pass override to run anyway)")

    hp = xord_theorem_hp(k=k, c_eta=c_eta, gamma=gamma)
    rng = trial_rng(seed, 0)
    W0 = init_gaussian(k, hp.sigma_g, rng)
    S = diverse_pair(d)
    pos_index, neg_index = _pair_indices(S)
    monitor = InvariantMonitor(hp, pos_index, neg_index)
    W, trace, endpoint = train(W0, S, hp, "xord", monitors=[monitor])

    recovered, decisions, zero_margin = recovers_fstar(W, d)
    c_d = detection_threshold(k, c_eta)
    det = detection_confidence(W, c_d)

    snap0 = xord_sets(W0, 0)
    thr = main_angle_threshold_deg(gamma, c_eta)
    angles = []
    for i in (1, 3):
        for j in sorted(snap0.wplus[i]):
            angles.append(angle_deg(W.w[j], PATTERN_COORDS[i - 1]))
    max_angle = max(angles, default=0.0)

    test_err = None
    if dist is not None:
        test_err = exact_test_error(decisions, dist)

    return TrialReport(
        kind="xord-theorem-main", seed=seed, k=k,
        endpoint_kind=endpoint.kind, iterations=endpoint.iteration,
        recovered_fstar=recovered, decisions=decisions,
        misclassified=_misclassified(decisions), zero_margin=zero_margin,
        detection=det, test_error=test_err, angles=angles,
        extras={
            "c_eta": c_eta, "gamma": gamma, "d": d,
            "budget": hp.max_iters,
            "c_d": c_d,
            "angle_threshold_deg": thr,
            "max_angle_deg": max_angle,
            "angles_ok": max_angle <= thr,
            "exploration_ok": monitor.exploration_ok,
            "invariant_violations": monitor.violations,
            "success": (endpoint.kind == "GlobalMin" and recovered
                        and det.all_detected and max_angle <= thr),
        },
    )


def _pair_indices(S):
    """(positive, negative) group indices as ordered by the trainer."""
    from .gd import _xord_groups

    groups = _xord_groups(S)
    pos = next(i for i, g in enumerate(groups) if g.label > 0)
    neg = next(i for i, g in enumerate(groups) if g.label < 0)
    return pos, neg


def theorem_small_trial(seed: int, dist: DistributionSpec,
                        c_eta: float = 1 / 41, gamma: float = 1.0,
                        override: bool = False) -> TrialReport:
    """One k=2 diverse-pair run.  Reports whether the endpoint is a
    non-recovering global minimum, which critical classes it fully
    misclassifies, and its exact test error (the theorem promises at least
    p* whenever recovery fails)."""
    if not override and c_eta > 1 / 41:
        raise ConfigurationRejectedError(
            f"c_eta={c_eta} > 1/41 (pass override to run anyway)")

    k = 2
    hp = xord_theorem_hp(k=k, c_eta=c_eta, gamma=gamma)
    rng = trial_rng(seed, 0)
    W0 = init_gaussian(k, hp.sigma_g, rng)
    d = dist.d
    S = diverse_pair(d)
    W, trace, endpoint = train(W0, S, hp, "xord")

    recovered, decisions, zero_margin = recovers_fstar(W, d)
    det = detection_confidence(W, 2 * c_eta)
    test_err = exact_test_error(decisions, dist)
    bad_critical = [ps for ps in CRITICAL_CLASSES if decisions[ps] != ps.label]
    nonrec_global = endpoint.kind == "GlobalMin" and not recovered

    return TrialReport(
        kind="xord-theorem-small", seed=seed, k=k,
        endpoint_kind=endpoint.kind, iterations=endpoint.iteration,
        recovered_fstar=recovered, decisions=decisions,
        misclassified=_misclassified(decisions), zero_margin=zero_margin,
        detection=det, test_error=test_err, angles=[],
        extras={
            "c_eta": c_eta, "gamma": gamma, "d": d,
            "nonrecovering_global_min": nonrec_global,
            "misclassified_critical": [ps.key for ps in bad_critical],
            "p_star": p_star(dist),
            "test_error_ge_p_star": test_err >= p_star(dist),
        },
    )


# ---------------------------------------------------------------------------
# decoy experiments (section-6 style)


def decoy_experiment(variant: str, k: int, seed: int, d: int = 10, m: int = 6,
                     c_eta: float = 0.04, gamma: float = 8.0,
                     sigma_g: float = 1e-5, patience: int = 20,
                     max_iters: int = 30_000, keep_weights: bool = False):
    """Train one net on a decoy training set (all-diverse, or with one
    non-diverse negative point) and report train loss / recovery.

    Defaults: the figure-1 protocol's step size and init with a
    theorem-scale margin (gamma=8).  At gamma=1 the borderline classes
    {1,2,4} / {2,3,4} land within ~0.06 of zero and the over-parameterized
    net frequently fails to recover, which is exactly why the analysis
    requires a large margin for generalization.
    """
    if variant not in ("all-diverse", "with-nondiverse"):
        raise ValueError(f"unknown decoy variant {variant!r}")
    rng = trial_rng(seed, 1)
    S = (all_diverse_set(d, m, rng) if variant == "all-diverse"
         else with_nondiverse_set(d, m, rng))
    hp = HyperParams(k=k, c_eta=c_eta, sigma_g=sigma_g, gamma=gamma,
                     max_iters=max_iters,
                     stop_rule=StopRule("patience", patience))
    W0 = init_gaussian(k, sigma_g, trial_rng(seed, 0))
    W, trace, endpoint = train(W0, S, hp, "xord")

    recovered, decisions, zero_margin = recovers_fstar(W, d)
    train_err = _train_error_01(W, S)
    report = TrialReport(
        kind=f"xord-decoy-{variant}", seed=seed, k=k,
        endpoint_kind=endpoint.kind, iterations=endpoint.iteration,
        recovered_fstar=recovered, decisions=decisions,
        misclassified=_misclassified(decisions), zero_margin=zero_margin,
        detection=detection_confidence(W, 0.0), test_error=None, angles=[],
        extras={
            "variant": variant, "d": d, "m": m,
            "train_loss": float(trace.loss[-1]),
            "train_error_01": train_err,
            "zero_train_error": train_err == 0.0,
        },
    )
    if keep_weights:
        report.extras["w0"] = W0
        report.extras["w_final"] = W
    return report


def _train_error_01(W: WeightMatrix, S) -> float:
    wrong = 0
    for x, y in S:
        n = xord_forward(W, x)
        if n == 0.0 or math.copysign(1.0, n) != y:
            wrong += 1
    return wrong / len(S)


# ---------------------------------------------------------------------------
# channel sweep (figure-1 protocol) and hinge-confidence comparison


@dataclass(frozen=True)
class SweepConfig:
    """Appendix protocol defaults: eta = 0.04/k, 6+6 training points drawn
    from a distribution with diverse-class masses (p_plus, p_minus), init
    std 1e-5, stop after 20 non-improving iterations or 30000 total."""

    channels: tuple = (4, 6, 8, 20, 50, 100, 200)
    runs: int = 100
    m_pos: int = 6
    m_neg: int = 6
    d: int = 10
    p_plus: float = 0.5
    p_minus: float = 0.9
    prob_positive: float = 0.5
    c_eta: float = 0.04
    gamma: float = 1.0
    sigma_g: float = 1e-5
    patience: int = 20
    max_iters: int = 30_000

    def dist(self) -> DistributionSpec:
        return DistributionSpec.from_diversity(self.d, self.p_plus, self.p_minus,
                                               self.prob_positive)

    def replace(self, **kw) -> "SweepConfig":
        from dataclasses import replace as _replace

        return _replace(self, **kw)


def sample_signed(dist: DistributionSpec, label: int, rng) -> BinaryInput:
    """A draw from the stated sign's conditional class distribution."""
    table = (dist.positive_class_weights if label == 1
             else dist.negative_class_weights)
    classes = [ps for ps in sorted(table, key=lambda p: p.key)
               if len(ps.members) <= dist.d]
    weights = np.array([table[ps] for ps in classes])
    if weights.sum() <= 0:
        raise ValueError("no feasible class carries weight")
    idx = rng.choice(len(classes), p=weights / weights.sum())
    return _random_arrangement(classes[idx].members, dist.d, rng)


def sweep_run(cfg: SweepConfig, k: int, seed: int, gamma: float | None = None):
    """One sweep run: fresh training set, fresh init, patience-stopped
    training, exact class-based test error."""
    gamma = cfg.gamma if gamma is None else gamma
    dist = cfg.dist()
    rng = trial_rng(seed, 0)
    S = [(sample_signed(dist, 1, rng), 1.0) for _ in range(cfg.m_pos)]
    S += [(sample_signed(dist, -1, rng), -1.0) for _ in range(cfg.m_neg)]
    W0 = init_gaussian(k, cfg.sigma_g, rng)
    hp = HyperParams(k=k, c_eta=cfg.c_eta, sigma_g=cfg.sigma_g, gamma=gamma,
                     max_iters=cfg.max_iters,
                     stop_rule=StopRule("patience", cfg.patience))
    W, trace, endpoint = train(W0, S, hp, "xord")
    decisions, _ = class_decisions(W, cfg.d)
    err = exact_test_error(decisions, dist)
    train_err = _train_error_01(W, S)
    return {
        "k": k, "seed": seed, "gamma": gamma,
        "endpoint": endpoint.kind, "iterations": endpoint.iteration,
        "train_error_01": train_err,
        "zero_train_error": train_err == 0.0,
        "train_loss": float(trace.loss[-1]),
        "test_error": err,
    }


def _aggregate(rows):
    zero = [r for r in rows if r["zero_train_error"]]
    return {
        "runs": len(rows),
        "zero_train_error_runs": len(zero),
        "mean_test_error": float(np.mean([r["test_error"] for r in rows])),
        "mean_test_error_zero_train": (float(np.mean([r["test_error"] for r in zero]))
                                       if zero else math.nan),
    }


def sweep_channels(cfg: SweepConfig, seed: int, pool=None):
    """Per-channel aggregates over cfg.runs seeded runs.  Returns
    (summary_rows, per_run_rows)."""
    jobs = [(k, int(np.random.SeedSequence([seed, k, r]).generate_state(1)[0]))
            for k in cfg.channels for r in range(cfg.runs)]
    if pool is None:
        results = [sweep_run(cfg, k, s) for k, s in jobs]
    else:
        results = pool.starmap(_sweep_job, [(cfg, k, s) for k, s in jobs])
    summary = []
    for k in cfg.channels:
        rows = [r for r in results if r["k"] == k]
        agg = _aggregate(rows)
        agg["k"] = k
        agg["gamma"] = cfg.gamma
        summary.append(agg)
    return summary, results


def _sweep_job(cfg, k, s):
    return sweep_run(cfg, k, s)


def gamma_comparison(cfg: SweepConfig, seed: int, gammas=(1.0, 5.0), pool=None):
    """The sweep at each margin, with pairwise-shared seeds."""
    jobs = [(g, k, int(np.random.SeedSequence([seed, k, r]).generate_state(1)[0]))
            for g in gammas for k in cfg.channels for r in range(cfg.runs)]
    if pool is None:
        results = [sweep_run(cfg, k, s, gamma=g) for g, k, s in jobs]
    else:
        results = pool.starmap(_gamma_job, [(cfg, k, s, g) for g, k, s in jobs])
    summary = []
    for g in gammas:
        for k in cfg.channels:
            rows = [r for r in results if r["k"] == k and r["gamma"] == g]
            agg = _aggregate(rows)
            agg["k"] = k
            agg["gamma"] = g
            summary.append(agg)
    return summary, results


def _gamma_job(cfg, k, s, g):
    return sweep_run(cfg, k, s, gamma=g)


# ---------------------------------------------------------------------------
# symmetry of paired trajectories


def symmetry_check(seed: int, iters: int = 500, c_eta: float = 1 / 41,
                   gamma: float = 1.0, d: int = 10):
    """Run a k=2 diverse-pair trajectory next to its u1-negated twin and
    require bitwise agreement (losses equal; second trajectory equals the
    first with u1 negated) at every iteration.

    Returns (ok, first_divergence_iteration_or_None).
    """
    if iters == 0:
        return True, None
    hp = HyperParams(k=2, c_eta=c_eta, sigma_g=c_eta / (16 * 2 ** 1.5),
                     gamma=gamma, max_iters=iters)
    W0 = init_gaussian(2, hp.sigma_g, trial_rng(seed, 0))
    W0m = W0.copy()
    W0m.u[0] = -W0m.u[0]
    S = diverse_pair(d)
    _, tr1, _ = train(W0, S, hp, "xord", record_weights=True)
    _, tr2, _ = train(W0m, S, hp, "xord", record_weights=True)
    T = min(len(tr1.loss), len(tr2.loss))
    for t in range(T):
        W1, W2 = tr1.weights[t], tr2.weights[t]
        same = (tr1.loss[t] == tr2.loss[t]
                and np.array_equal(W1.w, W2.w)
                and np.array_equal(-W1.u[0], W2.u[0])
                and np.array_equal(W1.u[1], W2.u[1]))
        if not same:
            return False, t
    if len(tr1.loss) != len(tr2.loss):
        return False, T
    return True, None


# ---------------------------------------------------------------------------
# sample-complexity calculator


def sample_complexity_bounds(p_plus: float, p_minus: float,
                             delta: float | None = None,
                             c: float = NEGLIGIBLE_C):
    """(m1_bound, m2_bound): two samples suffice for the over-parameterized
    net, while the k=2 net needs at least
        m2 = 2 log(48 delta / 33 (1 - c)) / log(p_plus p_minus)
    samples.  delta defaults to its admissible floor
    1 - p_plus p_minus (1 - c - 16 e^-8).
    """
    if not (0 < p_plus < 1 and 0 < p_minus < 1):
        raise ValueError("p_plus and p_minus must lie strictly in (0, 1)")
    floor = 1 - p_plus * p_minus * (1 - c - 16 * math.exp(-8))
    if delta is None:
        delta = floor
    if delta < floor - 1e-15:
        raise ValueError(f"delta={delta} is below its admissible floor {floor}")
    m2 = 2 * math.log(48 * delta / (33 * (1 - c))) / math.log(p_plus * p_minus)
    return {"m1_bound": 2, "m2_bound": m2, "delta": delta, "delta_floor": floor,
            "p_plus": p_plus, "p_minus": p_minus, "c": c}
