"""XOR warm-up verifiers: exploration bounds, clustering decomposition,
convergence/angle checks, and the k=2 Monte Carlo."""

import math

import numpy as np
import pytest

from xordlab.gd import WeightMatrix, XOR_POINTS, init_gaussian, train, xor_training_set
from xordlab.util import trial_rng
from xordlab.xor_lab import (
    angle_threshold_deg,
    check_exploration_xor,
    clustering_decomposition_xor,
    convergence_bound_iters,
    final_angle_check_xor,
    montecarlo_small_xor,
    run_xor,
    xor_overparam_hp,
    xor_set_snapshot,
)


def test_exploration_bounds_k100():
    W = init_gaussian(100, 1e-5, trial_rng(0, 0))
    rep = check_exploration_xor(xor_set_snapshot(W), 100)
    assert rep["lower"] == 30.0 and rep["upper"] == 70.0


def test_exploration_bounds_k25():
    W = init_gaussian(25, 1e-5, trial_rng(0, 0))
    rep = check_exploration_xor(xor_set_snapshot(W), 25)
    assert rep["lower"] == pytest.approx(2.5)
    assert rep["upper"] == pytest.approx(22.5)


def test_exploration_adversarial_snapshot_fails():
    k = 20
    W = WeightMatrix(np.tile([1.0, 1.0], (k, 1)), np.tile([1.0, -1.0], (k, 1)))
    rep = check_exploration_xor(xor_set_snapshot(W), k)
    assert not rep["all_ok"]
    assert rep["sizes"]["W+(1)"] == k


def test_exploration_rejects_small_k():
    W = init_gaussian(10, 1e-5, trial_rng(0, 0))
    with pytest.raises(ValueError):
        check_exploration_xor(xor_set_snapshot(W), 10)


def test_snapshot_partition_when_no_zero_dots():
    W = init_gaussian(40, 1e-5, trial_rng(3, 0))
    snap = xor_set_snapshot(W)
    dots = W.w @ XOR_POINTS.T
    if not (dots == 0).any():
        assert snap.wplus[1] | snap.wplus[3] == frozenset(range(40))
        assert not snap.wplus[1] & snap.wplus[3]


def test_convergence_bound_value():
    assert convergence_bound_iters(50) == 23
    with pytest.raises(ValueError):
        convergence_bound_iters(16)


def test_angle_threshold_values():
    assert angle_threshold_deg(0.4) == pytest.approx(
        math.degrees(math.acos(0.2 / 1.4)))
    assert angle_threshold_deg(0.4) == pytest.approx(81.787, abs=1e-2)
    assert angle_threshold_deg(1e-9) == pytest.approx(0.0, abs=1e-2)


def test_clustering_decomposition_initial_iterate():
    hp = xor_overparam_hp(k=50)
    rep = run_xor(hp, seed=4)
    snap0 = xor_set_snapshot(rep.w0)
    for i in (1, 3):
        j = min(snap0.wplus[i])
        rows = clustering_decomposition_xor(rep.trace, j, i)
        a0, v0, ok0 = rows[0]
        assert a0 == 0
        assert np.array_equal(v0, rep.w0.w[j])  # v_0 is the raw init filter
        assert ok0
        assert all(ok for _, _, ok in rows)
        assert [a for a, *_ in rows] == sorted(a for a, *_ in rows)


def test_clustering_decomposition_rejects_bad_args():
    hp = xor_overparam_hp(k=50)
    rep = run_xor(hp, seed=4)
    snap0 = xor_set_snapshot(rep.w0)
    not_in = min(frozenset(range(50)) - snap0.wplus[1])
    with pytest.raises(ValueError):
        clustering_decomposition_xor(rep.trace, not_in, 1)
    with pytest.raises(ValueError):
        clustering_decomposition_xor(rep.trace, 0, 2)


def test_overparam_runs_meet_all_lemmas():
    hp = xor_overparam_hp()
    bound = convergence_bound_iters(50)
    for seed in range(20):
        rep = run_xor(hp, seed=seed)
        assert rep.endpoint.kind == "GlobalMin"
        assert rep.endpoint.iteration <= bound
        assert rep.exploration["all_ok"]
        assert rep.clustering_ok
        assert rep.angle_check["all_ok"]
        assert not rep.misclassified


def test_final_angle_check_structure():
    hp = xor_overparam_hp()
    rep = run_xor(hp, seed=9)
    snap0 = xor_set_snapshot(rep.w0)
    chk = final_angle_check_xor(rep.w_final, snap0, hp.c_eta)
    # every filter appears once on its own side
    w_entries = [(g, i, j) for g, i, j, _ in chk["angles"] if g == "w"]
    assert len(w_entries) == 50
    assert chk["max_angle_deg"] <= chk["threshold_deg"]


def test_montecarlo_small_xor_quick():
    rep = montecarlo_small_xor(150, seed=21, init_event_trials=2000)
    assert 0.6 <= rep["local_min_fraction"] <= 0.9
    assert rep["local_min_all_misclassify"]
    assert 0.70 <= rep["init_event_frequency"] <= 0.80
    lo, hi = rep["local_min_ci95"]
    assert lo <= rep["local_min_fraction"] <= hi
