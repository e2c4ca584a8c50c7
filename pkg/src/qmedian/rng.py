"""Seeded random streams and small statistics helpers.

Every trial draws from its own Philox stream keyed by ``(seed, stream, trial)``,
so results do not depend on scheduling and paired experiments can share
random numbers.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import beta


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, trial))
    return np.random.Generator(np.random.Philox(ss))


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    a = (1 - level) / 2
    lo = 0.0 if successes == 0 else float(beta.ppf(a, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - a, successes + 1, trials - successes))
    return lo, hi


def mean_sigma(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))
