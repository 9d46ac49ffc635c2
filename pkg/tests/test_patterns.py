"""Pattern algebra: labels, classes, diversity probabilities, distributions.

The independent oracle used throughout is brute-force enumeration of all
4^d pattern strings, with labels and diversity evaluated straight from the
definitions.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xordlab.patterns import (
    CRITICAL_CLASSES,
    BinaryInput,
    DistributionSpec,
    IncompleteDecisionsError,
    Pattern,
    PatternSet,
    UnsatisfiableDistributionError,
    all_pattern_sets,
    class_mass,
    count_arrangements,
    enumerate_classes,
    exact_test_error,
    is_diverse,
    label_of,
    p_star,
    pattern_set_of,
    pattern_vec,
    sample,
    uniform_diversity_probs,
)

# ---------------------------------------------------------------------------
# enumeration oracle


def enumerate_strings(d):
    return itertools.product((1, 2, 3, 4), repeat=d)


def oracle_label(indices):
    return 1 if any(i in (1, 3) for i in indices) else -1


def oracle_diverse(indices):
    members = set(indices)
    if oracle_label(indices) == 1:
        return members == {1, 2, 3, 4}
    return members == {2, 4}


def oracle_counts(d):
    """(n_pos, n_neg, n_diverse_pos, n_diverse_neg, per-class counts)."""
    per_class = {}
    n_pos = n_dpos = n_dneg = 0
    for s in enumerate_strings(d):
        key = frozenset(s)
        per_class[key] = per_class.get(key, 0) + 1
        if oracle_label(s) == 1:
            n_pos += 1
            n_dpos += oracle_diverse(s)
        else:
            n_dneg += oracle_diverse(s)
    return n_pos, 4**d - n_pos, n_dpos, n_dneg, per_class


# ---------------------------------------------------------------------------
# basic types


def test_pattern_bijection():
    assert np.array_equal(pattern_vec(1), [1, 1])
    assert np.array_equal(pattern_vec(2), [1, -1])
    assert np.array_equal(pattern_vec(3), [-1, -1])
    assert np.array_equal(pattern_vec(4), [-1, 1])


def test_pattern_negations():
    assert np.array_equal(pattern_vec(1), -pattern_vec(3))
    assert np.array_equal(pattern_vec(2), -pattern_vec(4))
    assert Pattern(1).negation == Pattern(3)
    assert Pattern(4).negation == Pattern(2)


def test_pattern_vec_rejects_bad_index():
    for bad in (0, 5, -1):
        with pytest.raises(ValueError):
            pattern_vec(bad)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=12))
def test_vector_round_trip(indices):
    x = BinaryInput(tuple(indices))
    back = BinaryInput.from_vector(x.as_vector())
    assert back == x
    assert len(x.as_vector()) == 2 * x.d


@given(st.lists(st.integers(1, 4), min_size=1, max_size=12))
def test_label_matches_oracle(indices):
    x = BinaryInput(tuple(indices))
    assert label_of(x) == oracle_label(indices)
    assert pattern_set_of(x).members == frozenset(indices)
    assert is_diverse(x) == oracle_diverse(tuple(indices))


def test_label_examples():
    assert label_of(BinaryInput((2, 2, 2, 2))) == -1
    assert label_of(BinaryInput((2, 4, 1, 2))) == 1
    assert label_of(BinaryInput((3, 3, 3, 3))) == 1


def test_pattern_set_examples():
    assert pattern_set_of(BinaryInput((1, 2, 3, 4))).members == {1, 2, 3, 4}
    ps = pattern_set_of(BinaryInput((2, 4, 2, 4)))
    assert ps.members == {2, 4} and ps.label == -1
    assert pattern_set_of(BinaryInput((2, 2, 2, 2))).members == {2}


def test_diversity_examples():
    assert is_diverse(BinaryInput((1, 2, 3, 4)))
    assert is_diverse(BinaryInput((2, 4, 4, 4)))
    assert not is_diverse(BinaryInput((1, 2, 4, 2)))


def test_fifteen_classes_twelve_positive():
    classes = all_pattern_sets()
    assert len(classes) == 15
    assert sum(ps.label == 1 for ps in classes) == 12
    assert sum(ps.label == -1 for ps in classes) == 3
    for ps in classes:
        assert ps.label == (1 if ps.members & {1, 3} else -1)


def test_enumerate_classes_feasibility_and_representatives():
    classes = enumerate_classes(4)
    assert len(classes) == 15
    assert all(feasible for _, feasible, _ in classes)

    d2 = {ps.key: feasible for ps, feasible, _ in enumerate_classes(2)}
    assert not d2["1,2,3,4"]
    assert d2["2,4"]

    rep = dict((ps.key, rep) for ps, _, rep in classes)["2,4"]
    assert rep == BinaryInput((2, 4, 2, 2))
    for ps, feasible, rep in enumerate_classes(6):
        if feasible:
            assert pattern_set_of(rep) == ps


# ---------------------------------------------------------------------------
# diversity probabilities against the enumeration oracle


@pytest.mark.parametrize("d", range(1, 9))
def test_as_printed_p_minus_equals_enumeration(d):
    _, _, _, n_dneg, _ = oracle_counts(d)
    _, p_minus = uniform_diversity_probs(d, "as-printed")
    assert p_minus == n_dneg / 2**d


@pytest.mark.parametrize("d", range(1, 9))
def test_as_printed_p_plus_normalizes_by_all_strings(d):
    n_pos, _, n_dpos, _, _ = oracle_counts(d)
    p_plus, _ = uniform_diversity_probs(d, "as-printed")
    # the printed closed form divides the diverse count by 4^d, not by the
    # positive count; both readings are exposed via the mode flag
    assert p_plus == 1 - (4**d - n_dpos) / 4**d
    p_cond, _ = uniform_diversity_probs(d, "conditional")
    if d >= 4:
        assert p_cond == n_dpos / n_pos
        assert p_cond > p_plus
    else:
        assert p_cond == 0 == p_plus


def test_printed_values_d4():
    assert uniform_diversity_probs(4, "as-printed") == (0.09375, 0.875)
    p_cond, _ = uniform_diversity_probs(4, "conditional")
    assert p_cond == 24 / 240 == 0.1


def test_diversity_probs_d1_and_errors():
    assert uniform_diversity_probs(1, "as-printed")[0] == 0.0
    with pytest.raises(ValueError):
        uniform_diversity_probs(0)
    with pytest.raises(ValueError):
        uniform_diversity_probs(4, "weird")


@pytest.mark.parametrize("d", range(1, 9))
def test_count_arrangements_matches_enumeration(d):
    *_, per_class = oracle_counts(d)
    for ps in all_pattern_sets():
        assert count_arrangements(ps.members, d) == per_class.get(ps.members, 0)


# ---------------------------------------------------------------------------
# distributions


def test_uniform_distribution_weights_are_exact_counts():
    d = 4
    dist = DistributionSpec.uniform(d)
    n_pos, n_neg, *_ , per_class = oracle_counts(d)
    assert dist.prob_positive == n_pos / 4**d
    for ps in all_pattern_sets():
        expected = per_class.get(ps.members, 0) / (n_pos if ps.label == 1 else n_neg)
        assert dist.weight_of(ps) == pytest.approx(expected, abs=0)


def test_from_diversity_splits_remainder_uniformly():
    dist = DistributionSpec.from_diversity(10, 0.5, 0.9)
    assert dist.weight_of(PatternSet({1, 2, 3, 4})) == 0.5
    assert dist.weight_of(PatternSet({2, 4})) == 0.9
    assert dist.weight_of(PatternSet({1})) == pytest.approx(0.5 / 11)
    assert dist.weight_of(PatternSet({2})) == pytest.approx(0.1 / 2)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DistributionSpec(2, 0.5,
                         {PatternSet({1, 2, 3, 4}): 1.0},
                         {PatternSet({2}): 1.0})  # infeasible class with weight
    with pytest.raises(ValueError):
        DistributionSpec.from_diversity(3, 0.5, 0.9)


def test_distribution_config_round_trip():
    dist = DistributionSpec.from_diversity(10, 0.5, 0.9)
    cfg = dist.to_config()
    assert cfg["positive_class_weights"]["1,2,3,4"] == 0.5
    back = DistributionSpec.from_config(cfg)
    assert back == dist


def test_p_star_minimum_and_examples():
    # hand-weighted: masses 0.01, 0.02, 0.03, 0.04 on the critical classes
    pos = {ps: 0.0 for ps in all_pattern_sets() if ps.label == 1}
    neg = {ps: 0.0 for ps in all_pattern_sets() if ps.label == -1}
    pos[PatternSet({1, 2, 4})] = 0.06
    pos[PatternSet({3, 2, 4})] = 0.08
    pos[PatternSet({1, 2, 3, 4})] = 0.86
    neg[PatternSet({2})] = 0.02
    neg[PatternSet({4})] = 0.04
    neg[PatternSet({2, 4})] = 0.94
    dist = DistributionSpec(10, 0.5, pos, neg)
    masses = sorted(class_mass(dist, ps) for ps in CRITICAL_CLASSES)
    assert p_star(dist) == masses[0] == pytest.approx(0.01)

    # zero weight on one critical class
    neg[PatternSet({2})] = 0.0
    neg[PatternSet({4})] = 0.06
    dist0 = DistributionSpec(10, 0.5, pos, neg)
    assert p_star(dist0) == 0.0


def test_p_star_uniform_d4_against_enumeration():
    d = 4
    dist = DistributionSpec.uniform(d)
    *_, per_class = oracle_counts(d)
    masses = [per_class.get(ps.members, 0) / 4**d for ps in CRITICAL_CLASSES]
    assert p_star(dist) == pytest.approx(min(masses), rel=1e-12)


# ---------------------------------------------------------------------------
# sampling


def test_sample_round_trips_and_frequencies():
    dist = DistributionSpec.from_diversity(6, 0.5, 0.9)
    rng = np.random.default_rng(7)
    counts = {}
    n = 20_000
    for _ in range(n):
        x, y = sample(dist, rng)
        ps = pattern_set_of(x)
        assert ps.label == y
        counts[ps] = counts.get(ps, 0) + 1
    for ps, c in counts.items():
        expect = class_mass(dist, ps)
        sigma = math.sqrt(expect * (1 - expect) / n)
        assert abs(c / n - expect) <= 4 * sigma + 1e-9, ps.key


def test_sample_degenerate_distributions():
    pos = {ps: 0.0 for ps in all_pattern_sets() if ps.label == 1}
    neg = {ps: 0.0 for ps in all_pattern_sets() if ps.label == -1}
    pos[PatternSet({1, 2, 3, 4})] = 1.0
    neg[PatternSet({2})] = 1.0
    dist = DistributionSpec(4, 0.5, pos, neg)
    rng = np.random.default_rng(0)
    for _ in range(50):
        x, y = sample(dist, rng)
        if y == 1:
            assert is_diverse(x)
        else:
            assert x == BinaryInput((2, 2, 2, 2))


def test_sample_unsatisfiable():
    # the constructor forbids weight on infeasible classes, so corrupt a
    # validated instance to exercise the sampler's own guard
    pos = {ps: 0.0 for ps in all_pattern_sets() if ps.label == 1}
    neg = {ps: 0.0 for ps in all_pattern_sets() if ps.label == -1}
    pos[PatternSet({1, 2, 3, 4})] = 1.0
    neg[PatternSet({2})] = 1.0
    dist = DistributionSpec(4, 1.0, pos, neg, mode="class-weighted")
    object.__setattr__(dist, "d", 2)
    with pytest.raises(UnsatisfiableDistributionError):
        sample(dist, np.random.default_rng(0))


def test_sample_determinism():
    dist = DistributionSpec.from_diversity(8, 0.5, 0.9)
    a = [sample(dist, np.random.default_rng(42)) for _ in range(20)]
    b = [sample(dist, np.random.default_rng(42)) for _ in range(20)]
    assert a == b


# ---------------------------------------------------------------------------
# exact test error


def test_exact_test_error_true_labels_and_single_flip():
    dist = DistributionSpec.uniform(5)
    decisions = {ps: ps.label for ps in all_pattern_sets()}
    assert exact_test_error(decisions, dist) == 0.0

    flipped = dict(decisions)
    flipped[PatternSet({2})] = 1
    assert exact_test_error(flipped, dist) == pytest.approx(
        class_mass(dist, PatternSet({2})))


def test_exact_test_error_affine_in_flips():
    dist = DistributionSpec.from_diversity(7, 0.4, 0.8, prob_positive=0.6)
    decisions = {ps: ps.label for ps in all_pattern_sets()}
    base = exact_test_error(decisions, dist)
    for ps in all_pattern_sets():
        flipped = dict(decisions)
        flipped[ps] = -ps.label
        delta = exact_test_error(flipped, dist) - base
        assert delta == pytest.approx(class_mass(dist, ps), abs=1e-15)


def test_exact_test_error_zero_decision_counts_as_error():
    dist = DistributionSpec.uniform(4)
    decisions = {ps: ps.label for ps in all_pattern_sets()}
    decisions[PatternSet({3})] = 0
    assert exact_test_error(decisions, dist) == pytest.approx(
        class_mass(dist, PatternSet({3})))


def test_exact_test_error_missing_decision():
    dist = DistributionSpec.uniform(4)
    decisions = {ps: ps.label for ps in all_pattern_sets()}
    del decisions[PatternSet({2, 4})]
    with pytest.raises(IncompleteDecisionsError):
        exact_test_error(decisions, dist)
