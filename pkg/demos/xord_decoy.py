"""Narrative demo: decoy training sets in XOR detection.

A training set of 6 positive and 6 negative diverse points admits
zero-loss solutions that detect only one positive pattern.  The k=100 net
escapes the decoy (it explores all four directions at initialization and
recovers the ground truth); the k=2 net fits the sample perfectly and
still misclassifies whole classes of inputs.

Run: python demos/xord_decoy.py
"""

from xordlab.gd import decoy_net, hinge_loss
from xordlab.xord_lab import all_diverse_set, decoy_experiment, detection_confidence

import numpy as np

S = all_diverse_set(d=10, m=6, rng=np.random.default_rng(0))
hand = decoy_net()
print("hand-built decoy net (w = 3p1 twice, u = p2 twice):")
print(f"  train loss on the all-diverse set: {hinge_loss(hand, S, 'xord', 8.0)}")
det = detection_confidence(hand, 0.0)
print(f"  patterns detected: { {i: v for i, v in det.detected.items()} }\n")

for k in (2, 100):
    rep = decoy_experiment("all-diverse", k, seed=0)
    det = rep.detection
    print(f"k={k}: train error {rep.extras['train_error_01']:.0%}, "
          f"recovers the ground truth: {rep.recovered_fstar}")
    print(f"  misclassified classes: {[ps.key for ps in rep.misclassified] or 'none'}")
    print(f"  detection sums: { {i: round(v, 2) for i, v in det.d_values.items()} }")
