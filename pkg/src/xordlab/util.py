"""Small shared helpers: per-trial seed derivation and binomial intervals."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["trial_seed_sequence", "trial_rng", "wilson_ci"]


def trial_seed_sequence(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Counter-based derivation: trial i of master seed s draws from
    SeedSequence([s, i]).  Documented so runs are reproducible under any
    worker scheduling."""
    return np.random.SeedSequence([int(master_seed), int(trial_index)])


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed_sequence(master_seed, trial_index))


def wilson_ci(successes: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval (default 95%)."""
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
