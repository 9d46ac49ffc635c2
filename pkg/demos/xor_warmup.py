"""Narrative demo: the XOR warm-up.

An over-parameterized two-layer net (k=50) explores every pattern
direction at initialization and converges to a global minimum within the
predicted iteration bound, with every filter clustered to its pattern.
The minimal net (k=2) usually fails to explore and parks in a local
minimum that misclassifies at least one point.

Run: python demos/xor_warmup.py
"""

from xordlab.xor_lab import (
    convergence_bound_iters,
    montecarlo_small_xor,
    run_xor,
    xor_overparam_hp,
)

hp = xor_overparam_hp(k=50, c_eta=0.4)
rep = run_xor(hp, seed=0)
print(f"k=50: {rep.endpoint.kind} at iteration {rep.endpoint.iteration} "
      f"(bound: {convergence_bound_iters(50)})")
print(f"  exploration at init within k/2 ± 2√k: {rep.exploration['all_ok']}")
print(f"  clustering decomposition held at every iteration: {rep.clustering_ok}")
print(f"  largest final filter angle: {rep.angle_check['max_angle_deg']:.2f}° "
      f"(bound {rep.angle_check['threshold_deg']:.2f}°)")

print("\nk=2, 300 seeded runs:")
mc = montecarlo_small_xor(300, seed=1, init_event_trials=3000)
print(f"  local-minimum fraction: {mc['local_min_fraction']:.3f} "
      f"(claim: at least 0.75 in the limit)")
print(f"  under-exploration at init: {mc['init_event_frequency']:.3f} "
      f"(exact probability 3/4)")
print(f"  every local minimum misclassified a point: {mc['local_min_all_misclassify']}")
