"""Pattern algebra for binary XOR-detection inputs.

An input lives in {±1}^(2d) and is read as d two-coordinate slots, each
holding one of the four patterns

    1 -> ( 1,  1)      2 -> ( 1, -1)      3 -> (-1, -1)      4 -> (-1,  1)

The ground-truth rule assigns +1 exactly when some slot holds pattern 1 or
pattern 3.  Because a max-pooling network is constant on inputs that share
the same set of distinct patterns, everything downstream (labels, test
error, sampling) reduces to the 15 nonempty subsets of {1,2,3,4}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PATTERN_COORDS",
    "POSITIVE_PATTERNS",
    "NEGATIVE_PATTERNS",
    "Pattern",
    "PatternSet",
    "BinaryInput",
    "DistributionSpec",
    "UnsatisfiableDistributionError",
    "IncompleteDecisionsError",
    "pattern_vec",
    "label_of",
    "pattern_set_of",
    "is_diverse",
    "enumerate_classes",
    "all_pattern_sets",
    "count_arrangements",
    "uniform_diversity_probs",
    "p_star",
    "class_mass",
    "sample",
    "exact_test_error",
    "CRITICAL_CLASSES",
]

# Row i-1 holds the coordinates of pattern i.
PATTERN_COORDS = np.array(
    [[1, 1], [1, -1], [-1, -1], [-1, 1]], dtype=float
)

POSITIVE_PATTERNS = (1, 3)
NEGATIVE_PATTERNS = (2, 4)


class UnsatisfiableDistributionError(ValueError):
    """All probability mass sits on classes that cannot occur at this d."""


class IncompleteDecisionsError(ValueError):
    """A feasible class has no decision attached."""


def pattern_vec(index: int) -> np.ndarray:
    """Coordinates of pattern ``index`` (a fresh array)."""
    if index not in (1, 2, 3, 4):
        raise ValueError(f"pattern index must be in 1..4, got {index!r}")
    return PATTERN_COORDS[index - 1].copy()


@dataclass(frozen=True)
class Pattern:
    """One of the four two-coordinate binary patterns."""

    index: int

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise ValueError(f"pattern index must be in 1..4, got {self.index!r}")

    @property
    def coords(self) -> np.ndarray:
        return pattern_vec(self.index)

    @property
    def negation(self) -> "Pattern":
        # 1 <-> 3 and 2 <-> 4 are negations of each other.
        return Pattern(((self.index + 1) % 4) + 1)


def _label_of_members(members: frozenset) -> int:
    return 1 if members & {1, 3} else -1


@dataclass(frozen=True)
class PatternSet:
    """A nonempty subset of {1,2,3,4} together with its induced label."""

    members: frozenset = field()

    def __init__(self, members):
        object.__setattr__(self, "members", frozenset(members))
        if not self.members:
            raise ValueError("pattern set must be nonempty")
        if not self.members <= {1, 2, 3, 4}:
            raise ValueError(f"pattern indices must be in 1..4, got {set(members)!r}")

    @property
    def label(self) -> int:
        return _label_of_members(self.members)

    @property
    def key(self) -> str:
        """Canonical text key, e.g. '2,4' (used in config blocks)."""
        return ",".join(str(i) for i in sorted(self.members))

    @classmethod
    def from_key(cls, key: str) -> "PatternSet":
        return cls(int(tok) for tok in key.split(","))

    def representative(self, d: int) -> "BinaryInput":
        """Canonical input: members ascending, then the smallest member repeated."""
        if len(self.members) > d:
            raise ValueError(f"class {self.key} needs at least {len(self.members)} slots, d={d}")
        order = sorted(self.members)
        return BinaryInput(tuple(order) + (order[0],) * (d - len(order)))

    def __repr__(self):
        return f"PatternSet({{{self.key}}})"


def all_pattern_sets() -> list:
    """The 15 nonempty subsets, sorted by (size, members)."""
    out = []
    for r in range(1, 5):
        for combo in itertools.combinations((1, 2, 3, 4), r):
            out.append(PatternSet(combo))
    return out


# The four classes whose minimum mass lower-bounds the test error of
# failing two-channel solutions.
CRITICAL_CLASSES = (
    PatternSet({2}),
    PatternSet({4}),
    PatternSet({2, 4, 1}),
    PatternSet({2, 4, 3}),
)


@dataclass(frozen=True)
class BinaryInput:
    """A point of {±1}^(2d), stored as its d pattern indices."""

    indices: tuple

    def __post_init__(self):
        if len(self.indices) < 1:
            raise ValueError("input needs at least one slot")
        if any(i not in (1, 2, 3, 4) for i in self.indices):
            raise ValueError(f"pattern indices must be in 1..4, got {self.indices!r}")

    @property
    def d(self) -> int:
        return len(self.indices)

    def as_vector(self) -> np.ndarray:
        """Flattened ±1 coordinate vector of length 2d."""
        return PATTERN_COORDS[np.array(self.indices) - 1].reshape(-1)

    def slot_matrix(self) -> np.ndarray:
        """d x 2 matrix, one pattern per row."""
        return PATTERN_COORDS[np.array(self.indices) - 1]

    @classmethod
    def from_vector(cls, vec) -> "BinaryInput":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size % 2 != 0:
            raise ValueError("coordinate vector must be one-dimensional with even length")
        if not np.all(np.abs(vec) == 1.0):
            raise ValueError("coordinates must be ±1")
        slots = vec.reshape(-1, 2)
        idx = []
        for s in slots:
            matches = np.nonzero((PATTERN_COORDS == s).all(axis=1))[0]
            idx.append(int(matches[0]) + 1)
        return cls(tuple(idx))


def label_of(x: BinaryInput) -> int:
    """+1 iff some slot holds pattern 1 or 3."""
    return 1 if any(i in (1, 3) for i in x.indices) else -1


def pattern_set_of(x: BinaryInput) -> PatternSet:
    return PatternSet(set(x.indices))


def is_diverse(x: BinaryInput) -> bool:
    """Positive and all four patterns present, or negative with both of {2,4}."""
    members = set(x.indices)
    if label_of(x) == 1:
        return members == {1, 2, 3, 4}
    return members == {2, 4}


def enumerate_classes(d: int):
    """All 15 classes with feasibility at this d and a canonical representative.

    The representative is None for infeasible classes (more distinct
    patterns than slots).
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    out = []
    for ps in all_pattern_sets():
        feasible = len(ps.members) <= d
        rep = ps.representative(d) if feasible else None
        out.append((ps, feasible, rep))
    return out


def count_arrangements(members, d: int) -> int:
    """Number of length-d pattern strings whose distinct-pattern set is exactly
    ``members`` (inclusion-exclusion over sub-alphabets)."""
    s = len(frozenset(members))
    if s == 0 or s > d:
        return 0
    return sum((-1) ** j * math.comb(s, j) * (s - j) ** d for j in range(s))


def uniform_diversity_probs(d: int, mode: str = "as-printed"):
    """(p_plus, p_minus) for the uniform distribution on {±1}^(2d).

    mode='as-printed' evaluates the closed forms
        p_plus  = 1 - (4*3^d - 6*2^d + 4) / 4^d
        p_minus = 1 - 1 / 2^(d-1)
    verbatim.  mode='conditional' returns exact conditional probabilities
    P(diverse | sign): the as-printed p_plus normalizes by all 4^d strings
    rather than by the positive ones, so the two modes differ on p_plus
    (and agree exactly on p_minus).
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if mode not in ("as-printed", "conditional"):
        raise ValueError(f"unknown mode {mode!r}")
    n_diverse_pos = count_arrangements({1, 2, 3, 4}, d)
    n_diverse_neg = count_arrangements({2, 4}, d)
    if mode == "as-printed":
        p_plus = 1.0 - (4 * 3**d - 6 * 2**d + 4) / 4**d
        p_minus = 1.0 - 1.0 / 2 ** (d - 1)
        return p_plus, p_minus
    n_pos = 4**d - 2**d
    n_neg = 2**d
    p_plus = n_diverse_pos / n_pos
    p_minus = n_diverse_neg / n_neg
    return p_plus, p_minus


def _validate_weights(weights, d, want_label):
    total = 0.0
    for ps, w in weights.items():
        if ps.label != want_label:
            raise ValueError(f"class {ps.key} has label {ps.label}, expected {want_label}")
        if w < 0:
            raise ValueError(f"negative weight for class {ps.key}")
        if len(ps.members) > d and w != 0:
            raise ValueError(f"class {ps.key} is infeasible at d={d} but carries weight {w}")
        total += w
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"weights for label {want_label} sum to {total}, not 1")


@dataclass(frozen=True)
class DistributionSpec:
    """A label-respecting distribution over {±1}^(2d), specified class-wise.

    Within each sign, mass is split over the pattern-set classes; inside a
    class, arrangements are uniform.  ``mode`` records how the weights were
    produced ('uniform' = exact arrangement counts, 'class-weighted' =
    anything else) and has no effect on sampling.
    """

    d: int
    prob_positive: float
    positive_class_weights: dict
    negative_class_weights: dict
    mode: str = "class-weighted"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not 0.0 <= self.prob_positive <= 1.0:
            raise ValueError("prob_positive must lie in [0, 1]")
        if self.mode not in ("uniform", "class-weighted"):
            raise ValueError(f"unknown mode {self.mode!r}")
        _validate_weights(self.positive_class_weights, self.d, 1)
        _validate_weights(self.negative_class_weights, self.d, -1)

    # -- constructors ------------------------------------------------------

    @classmethod
    def uniform(cls, d: int) -> "DistributionSpec":
        """Uniform on {±1}^(2d): class weights are exact arrangement counts."""
        pos, neg = {}, {}
        n_pos = 4**d - 2**d
        n_neg = 2**d
        for ps in all_pattern_sets():
            cnt = count_arrangements(ps.members, d)
            if ps.label == 1:
                pos[ps] = cnt / n_pos
            else:
                neg[ps] = cnt / n_neg
        return cls(d, n_pos / 4**d, pos, neg, mode="uniform")

    @classmethod
    def from_diversity(cls, d: int, p_plus: float, p_minus: float,
                       prob_positive: float = 0.5) -> "DistributionSpec":
        """Give the diverse class of each sign the stated mass and spread the
        remainder uniformly over that sign's feasible non-diverse classes."""
        if d < 4:
            raise ValueError("diverse positives need d >= 4")
        pos, neg = {}, {}
        pos_classes = [ps for ps in all_pattern_sets()
                       if ps.label == 1 and len(ps.members) <= d]
        neg_classes = [ps for ps in all_pattern_sets()
                       if ps.label == -1 and len(ps.members) <= d]
        diverse_pos = PatternSet({1, 2, 3, 4})
        diverse_neg = PatternSet({2, 4})
        rest_pos = [ps for ps in pos_classes if ps != diverse_pos]
        rest_neg = [ps for ps in neg_classes if ps != diverse_neg]
        pos[diverse_pos] = p_plus
        for ps in rest_pos:
            pos[ps] = (1.0 - p_plus) / len(rest_pos)
        neg[diverse_neg] = p_minus
        for ps in rest_neg:
            neg[ps] = (1.0 - p_minus) / len(rest_neg)
        return cls(d, prob_positive, pos, neg)

    # -- config block ------------------------------------------------------

    def to_config(self) -> dict:
        """Plain mapping with classes keyed like '2,4' (YAML/JSON friendly)."""
        return {
            "d": self.d,
            "prob_positive": self.prob_positive,
            "mode": self.mode,
            "positive_class_weights": {ps.key: w for ps, w in
                                       sorted(self.positive_class_weights.items(),
                                              key=lambda kv: kv[0].key)},
            "negative_class_weights": {ps.key: w for ps, w in
                                       sorted(self.negative_class_weights.items(),
                                              key=lambda kv: kv[0].key)},
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "DistributionSpec":
        return cls(
            d=int(cfg["d"]),
            prob_positive=float(cfg["prob_positive"]),
            positive_class_weights={PatternSet.from_key(k): float(w)
                                    for k, w in cfg["positive_class_weights"].items()},
            negative_class_weights={PatternSet.from_key(k): float(w)
                                    for k, w in cfg["negative_class_weights"].items()},
            mode=cfg.get("mode", "class-weighted"),
        )

    # -- queries -----------------------------------------------------------

    def feasible_classes(self):
        for ps in all_pattern_sets():
            if len(ps.members) <= self.d:
                yield ps

    def weight_of(self, ps: PatternSet) -> float:
        table = self.positive_class_weights if ps.label == 1 else self.negative_class_weights
        return table.get(ps, 0.0)


def class_mass(dist: DistributionSpec, ps: PatternSet) -> float:
    """Unconditional probability of drawing a point whose class is ``ps``."""
    prior = dist.prob_positive if ps.label == 1 else 1.0 - dist.prob_positive
    return prior * dist.weight_of(ps)


def p_star(dist: DistributionSpec) -> float:
    """Minimum mass among the four critical classes {2}, {4}, {2,4,1}, {2,4,3}."""
    return min(class_mass(dist, ps) for ps in CRITICAL_CLASSES)


def _sample_arrangement(members, d: int, rng: np.random.Generator) -> tuple:
    """Uniform string over members^d conditioned on using every member.

    Rejection from members^d is exactly uniform on the target set; classes
    of size 1 need no rejection.
    """
    alphabet = np.array(sorted(members))
    s = len(alphabet)
    if s == 1:
        return tuple(int(alphabet[0]) for _ in range(d))
    want = frozenset(int(a) for a in alphabet)
    while True:
        draw = alphabet[rng.integers(0, s, size=d)]
        if frozenset(int(v) for v in draw) == want:
            return tuple(int(v) for v in draw)


def sample(dist: DistributionSpec, rng: np.random.Generator):
    """One (BinaryInput, label) draw: sign, then class, then arrangement."""
    label = 1 if rng.random() < dist.prob_positive else -1
    table = dist.positive_class_weights if label == 1 else dist.negative_class_weights
    classes = [ps for ps in sorted(table, key=lambda p: p.key)
               if len(ps.members) <= dist.d]
    weights = np.array([table[ps] for ps in classes])
    total = weights.sum()
    if total <= 0:
        raise UnsatisfiableDistributionError(
            f"no feasible class carries weight for label {label} at d={dist.d}")
    idx = rng.choice(len(classes), p=weights / total)
    ps = classes[idx]
    return BinaryInput(_sample_arrangement(ps.members, dist.d, rng)), label


def exact_test_error(decisions: dict, dist: DistributionSpec) -> float:
    """Exact 0-1 error of class-wise decisions under ``dist``.

    ``decisions`` maps PatternSet -> predicted sign; a prediction of 0
    (zero network margin) counts as an error on either label.  Classes
    with zero mass may be omitted.
    """
    err = 0.0
    for ps in dist.feasible_classes():
        mass = class_mass(dist, ps)
        if mass == 0.0:
            continue
        if ps not in decisions:
            raise IncompleteDecisionsError(f"no decision for feasible class {ps.key}")
        if decisions[ps] != ps.label:
            err += mass
    return err
