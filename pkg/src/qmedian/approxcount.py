"""Two-phase additive approximate counting.

Phase one runs the counting primitive a few times at the coarse budget
``ceil(first * sqrt(n/delta))`` and keeps the median ``t_tilde``. Phase two
makes one more estimate at

    ceil(second * (sqrt(n/delta) + sqrt(t_tilde (n - t_tilde)) / delta))

and returns it clamped to ``[0, n]``. The cost therefore adapts to
``t (n - t)``: counts near 0 or ``n`` are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from . import constants
from .qcount import DEFAULT_COUNTER, count_many


def expected_query_bound(n: int, t: float, delta: float) -> float:
    """``sqrt(n/delta) + sqrt(t(n-t))/delta``."""
    if not 0 <= t <= n:
        raise ValueError("t must lie in [0, n]")
    if delta < 1:
        raise ValueError("delta must be at least 1")
    return math.sqrt(n / delta) + math.sqrt(t * (n - t)) / delta


@dataclass(frozen=True)
class TwoPhaseConfig:
    first: float = field(default_factory=lambda: constants.get("twophase_first_scale"))
    second: float = field(default_factory=lambda: constants.get("twophase_second_scale"))
    first_reps: int = 5
    counter: object = None

    def __post_init__(self):
        if self.first <= 0 or self.second <= 0:
            raise ValueError("scales must be positive")
        if self.first_reps < 1 or self.first_reps % 2 == 0:
            raise ValueError("first_reps must be a positive odd integer")

    @property
    def model(self):
        return self.counter or DEFAULT_COUNTER

    def first_budget(self, n: int, delta: float) -> int:
        return max(1, math.ceil(self.first * math.sqrt(n / delta)))

    def second_budget(self, n: int, t_tilde: float, delta: float) -> int:
        t_tilde = min(max(t_tilde, 0.0), float(n))
        return max(1, math.ceil(self.second * expected_query_bound(n, t_tilde, delta)))


@dataclass(frozen=True)
class TwoPhaseEstimate:
    t: float
    t_tilde: float
    first_queries: int
    second_queries: int
    queries: int


def approx_count(oracle, delta: float, cfg: TwoPhaseConfig | None = None,
                 rng: np.random.Generator | None = None) -> TwoPhaseEstimate:
    """Estimate the number of ones to within ``delta`` (with probability >= 2/3)."""
    if delta < 1:
        raise ValueError("delta must be at least 1")
    cfg = cfg or TwoPhaseConfig()
    rng = rng if rng is not None else np.random.default_rng()
    n = oracle.n
    q1 = cfg.first_budget(n, delta)
    first = count_many(oracle, q1, rng, cfg.first_reps, cfg.model)
    t_tilde = float(np.median(first))
    q2 = cfg.second_budget(n, t_tilde, delta)
    t = float(count_many(oracle, q2, rng, 1, cfg.model)[0])
    t = min(max(t, 0.0), float(n))
    return TwoPhaseEstimate(t, t_tilde, cfg.first_reps * q1, q2, cfg.first_reps * q1 + q2)


def median_law(values: np.ndarray, probs: np.ndarray, reps: int) -> tuple[np.ndarray, np.ndarray]:
    """Law of the median of ``reps`` i.i.d. draws from a finite law."""
    order = np.argsort(values, kind="stable")
    v, p = values[order], probs[order]
    cdf = np.minimum(np.cumsum(p), 1.0)
    # median <= v  iff  at least (reps+1)/2 draws are <= v
    med_cdf = binom.sf(reps // 2, reps, cdf)
    med_p = np.diff(np.concatenate([[0.0], med_cdf]))
    return v, np.clip(med_p, 0.0, None)


class ExactTwoPhase:
    """Exact success probability and expected cost of the two-phase counter
    under the phase-estimation model (no sampling)."""

    def __init__(self, cfg: TwoPhaseConfig):
        self.cfg = cfg
        self._second = lru_cache(maxsize=4096)(self._second_success)

    def first_law(self, n: int, t_true: int, delta: float):
        values, probs = self.cfg.model.law(n, t_true, self.cfg.first_budget(n, delta))
        return median_law(values, probs, self.cfg.first_reps)

    def _second_success(self, n: int, t_true: int, delta: float, queries: int) -> float:
        values, probs = self.cfg.model.law(n, t_true, queries)
        values = np.clip(values, 0, n)
        return float(probs[np.abs(values - t_true) < delta].sum())

    def evaluate(self, n: int, t_true: int, delta: float) -> dict:
        med, med_p = self.first_law(n, t_true, delta)
        keep = med_p > 0
        med, med_p = med[keep], med_p[keep]
        budgets = np.array([self.cfg.second_budget(n, float(v), delta) for v in med])
        success = sum(w * self._second(n, t_true, delta, int(b)) for w, b in zip(med_p, budgets))
        q1 = self.cfg.first_reps * self.cfg.first_budget(n, delta)
        return {
            "n": n, "t": t_true, "delta": delta,
            "success": float(success),
            "expected_queries": float(q1 + (med_p * budgets).sum()),
            "t_tilde_values": med, "t_tilde_probs": med_p,
        }

    def concentration(self, n: int, t_true: int, delta: float, factor: float) -> float:
        """``Pr[|t_tilde - t| <= factor (min(t, n-t) + delta)]``."""
        med, med_p = self.first_law(n, t_true, delta)
        radius = factor * (min(t_true, n - t_true) + delta)
        return float(med_p[np.abs(med - t_true) <= radius].sum())


def default_grid() -> list[tuple[int, int, int]]:
    """``(n, t, delta)`` cells used for calibration and acceptance."""
    cells = set()
    for n, deltas in ((16, (1, 2)), (256, (1, 4, 16)), (1024, (1, 8, 32))):
        for delta in deltas:
            for t in (0, 1, n // 4, n // 2, n - 1, n):
                cells.add((n, t, delta))
    cells.update({(256, 128, 16), (1024, 16, 32), (1024, 512, 32)})
    return sorted(cells)
