"""Narrative demo: the sample-complexity gap.

Two samples suffice for the over-parameterized net, while the k=2 net
needs a number of samples that grows as the diverse-point probabilities
approach 1.  The k=2 Monte Carlo shows the failure mode behind the gap:
global minima that fully misclassify one of the critical classes.

Run: python demos/sample_complexity.py
"""

from xordlab.patterns import DistributionSpec, p_star, uniform_diversity_probs
from xordlab.xord_lab import sample_complexity_bounds, theorem_small_trial

for p in (0.98, 0.92):
    res = sample_complexity_bounds(p, p, delta=None if p == 0.98 else 0.16)
    print(f"p+ = p- = {p}: m1 <= {res['m1_bound']},  m2 >= {res['m2_bound']:.1f} "
          f"(delta = {res['delta']:.4f})")

print("\nuniform diversity probabilities:")
for d in (4, 6, 10):
    printed = uniform_diversity_probs(d, "as-printed")
    cond = uniform_diversity_probs(d, "conditional")
    print(f"  d={d}: p+ printed {printed[0]:.5f} / conditional {cond[0]:.5f}, "
          f"p- {printed[1]:.5f}")

dist = DistributionSpec.from_diversity(10, 0.5, 0.9)
print(f"\nFig-1 style distribution: p* = {p_star(dist):.4f}")
fails = 0
for seed in range(40):
    rep = theorem_small_trial(seed, dist)
    if rep.extras["nonrecovering_global_min"]:
        fails += 1
        assert rep.test_error >= p_star(dist)
print(f"k=2 trials ending at a non-recovering global minimum: {fails}/40 "
      f"(claim: at least (1-c)·33/48 ≈ 0.69); each had test error >= p*")
