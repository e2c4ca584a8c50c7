"""Threshold distinguisher built on the counting primitive.

``distinguish(oracle, low, high)`` decides between "at most ``low`` ones"
(answer 0) and "at least ``high`` ones" (answer 1). It spends

    ceil(scale * (sqrt(n / gap) + sqrt(m (n - m)) / gap))

queries on one count, where ``gap = high - low`` and ``m`` is whichever of
``low, high`` lies farther from ``n/2``, and answers 0 iff the estimate is
below the midpoint ``low + gap/2``. Inputs strictly between the two levels
may get either answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.stats import binom

from . import constants
from .qcount import DEFAULT_COUNTER


def _far_level(n: int, low: int, high: int) -> int:
    # ties go to ``high``, matching PartialFunction.m
    return high if abs(n / 2 - high) >= abs(n / 2 - low) else low


def rate(n: int, low: int, high: int) -> float:
    """``sqrt(n/gap) + sqrt(m(n-m))/gap`` for the pair ``(low, high)``."""
    gap = high - low
    m = _far_level(n, low, high)
    return math.sqrt(n / gap) + math.sqrt(m * (n - m)) / gap


def query_cost(n: int, low: int, high: int, scale: float) -> int:
    """Queries per unboosted call; the ceiling is taken at 40 digits."""
    _check_levels(n, low, high)
    gap = high - low
    m = _far_level(n, low, high)
    with mpmath.workdps(40):
        val = mpmath.mpf(scale) * (mpmath.sqrt(mpmath.mpf(n) / gap)
                                   + mpmath.sqrt(m * (n - m)) / gap)
        return max(1, int(mpmath.ceil(val)))


def threshold(low: int, high: int) -> Fraction:
    return low + Fraction(high - low, 2)


def _check_levels(n: int, low: int, high: int) -> None:
    if not 0 <= low < high <= n:
        raise ValueError(f"need 0 <= low < high <= n, got low={low}, high={high}, n={n}")


@dataclass(frozen=True)
class DistinguisherConfig:
    """``scale`` multiplies the query rate; ``reps`` is the (odd) majority size."""

    scale: float = field(default_factory=lambda: constants.get("distinguisher_scale"))
    reps: int = 1
    counter: object = None

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be at least 1")
        if self.reps < 1 or self.reps % 2 == 0:
            raise ValueError("reps must be a positive odd integer")

    @property
    def model(self):
        return self.counter or DEFAULT_COUNTER


def _draw_answers(oracle, low: int, high: int, cfg: DistinguisherConfig,
                  rng: np.random.Generator, size: int) -> np.ndarray:
    n = oracle.n
    _check_levels(n, low, high)
    queries = query_cost(n, low, high, cfg.scale)
    oracle.charge(queries * size)
    below = cfg.model.draw_below(n, oracle.hidden_weight(), queries,
                                 float(threshold(low, high)), rng, size)
    return (~below).astype(int)


def distinguish(oracle, low: int, high: int, cfg: DistinguisherConfig | None = None,
                rng: np.random.Generator | None = None) -> int:
    """0 if the count looks like ``<= low``, 1 if it looks like ``>= high``."""
    cfg = cfg or DistinguisherConfig()
    rng = rng if rng is not None else np.random.default_rng()
    return int(_draw_answers(oracle, low, high, cfg, rng, 1)[0])


def distinguish_many(oracle, low: int, high: int, size: int,
                     cfg: DistinguisherConfig | None = None,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Answers of ``size`` independent unboosted calls (charges ``size`` times the cost)."""
    cfg = cfg or DistinguisherConfig()
    rng = rng if rng is not None else np.random.default_rng()
    return _draw_answers(oracle, low, high, cfg, rng, size)


def distinguish_boosted(oracle, low: int, high: int, cfg: DistinguisherConfig | None = None,
                        rng: np.random.Generator | None = None, reps: int | None = None) -> int:
    """Majority of ``reps`` independent calls to :func:`distinguish`."""
    cfg = cfg or DistinguisherConfig()
    reps = cfg.reps if reps is None else reps
    if reps < 1 or reps % 2 == 0:
        raise ValueError("reps must be a positive odd integer")
    rng = rng if rng is not None else np.random.default_rng()
    answers = _draw_answers(oracle, low, high, cfg, rng, reps)
    return int(answers.sum() * 2 > reps)


def success_probability(n: int, low: int, high: int, t_true: int, scale: float,
                        counter=None) -> float:
    """Exact probability of the correct answer for a count outside the gap."""
    _check_levels(n, low, high)
    if low < t_true < high:
        raise ValueError("no correct answer inside the gap")
    counter = counter or DEFAULT_COUNTER
    queries = query_cost(n, low, high, scale)
    p = counter.prob_below(n, t_true, queries, float(threshold(low, high)))
    return p if t_true <= low else 1.0 - p


def majority_success(p: float, reps: int) -> float:
    """Probability that a majority of ``reps`` independent trials succeed."""
    return float(binom.sf(reps // 2, reps, p))


def reps_for_error(p: float, target: float, max_reps: int = 10001) -> int:
    """Smallest odd repetition count whose majority errs with probability ``<= target``."""
    if p <= 0.5:
        raise ValueError("boosting needs a single-call success above 1/2")
    for reps in range(1, max_reps + 1, 2):
        if 1 - majority_success(p, reps) <= target:
            return reps
    raise ValueError("target unreachable within max_reps")


def g_lower(x: float, n: int, queries: int) -> float:
    """``x - sqrt(x n)/queries - n/(4 queries^2)``: the least estimate
    compatible with the counting error bound when there are ``x`` ones."""
    if x < 0:
        raise ValueError("x must be non-negative")
    return x - math.sqrt(x * n) / queries - n / (4 * queries * queries)


def calibration_grid(sizes=(16, 64, 256)) -> list[tuple[int, int, int]]:
    """Adversarial ``(n, low, high)`` cells used to fit ``scale``.

    Gaps ``1, sqrt(n), n/4``; ``low`` at the bottom, the middle, a quarter
    and the top of the range, so both the ``m <= n/2`` and ``m > n/2``
    branches appear.
    """
    cells = set()
    for n in sizes:
        for gap in sorted({1, math.isqrt(n), n // 4}):
            for low in {0, (n - gap) // 2, n // 4, n - gap}:
                if 0 <= low and low + gap <= n:
                    cells.add((n, low, low + gap))
    return sorted(cells)


def worst_success(scale: float, cells=None, counter=None) -> tuple[float, tuple]:
    """Smallest exact success probability over the cells at both boundary counts."""
    cells = cells or calibration_grid()
    worst, arg = 1.0, None
    for n, low, high in cells:
        for t_true in (low, high):
            p = success_probability(n, low, high, t_true, scale, counter)
            if p < worst:
                worst, arg = p, (n, low, high, t_true)
    return worst, arg
