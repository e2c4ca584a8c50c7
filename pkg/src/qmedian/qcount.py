"""Simulated amplitude-estimation counting primitive.

A call with budget ``queries`` charges that many oracle reads and returns
an estimate of the number of ones. The guarantee modelled is

    |t_true - t| <= sqrt(t_true (n - t_true)) / queries
                    + |n - 2 t_true| / (4 queries^2)

with probability at least 2/3. No circuit is simulated: the phase register
value ``y`` is drawn from the closed-form phase-estimation law (squared
Dirichlet kernel around the two eigenphases ``+-theta/pi`` with
``theta = arcsin sqrt(t_true / n)``) and mapped to ``n sin^2(pi y / M)``.

Grid size. The error law above is what a phase error of at most
``1/(2 queries)`` radians gives after expanding ``sin^2`` to second order.
An ``M``-point register lands within ``pi/M`` of the true phase with
probability at least ``8/pi^2``, so ``M >= 2 pi queries`` is needed. The
smallest power of two above that is used and the call is still charged as
``queries`` reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import polygamma

GRID_FACTOR = 2 * math.pi
_CACHE_MAX_M = 1 << 16
_TABLE_MAX_M = 1 << 12  # larger grids sample through the wrapped tail law


def error_budget(n: int, t_true: float, queries: int) -> float:
    if queries < 1:
        raise ValueError("queries must be positive")
    if not 0 <= t_true <= n:
        raise ValueError("t_true must lie in [0, n]")
    q = queries
    return math.sqrt(t_true * (n - t_true)) / q + abs(n - 2 * t_true) / (4 * q * q)


def phase_grid(queries: int, grid_factor: float = GRID_FACTOR) -> int:
    """Smallest power of two ``>= max(2, grid_factor * queries)``."""
    target = max(2.0, grid_factor * queries)
    return 1 << math.ceil(math.log2(target) - 1e-12)


def _kernel(y: np.ndarray, shift: float, M: int) -> np.ndarray:
    """``sin^2(pi M d) / (M^2 sin^2(pi d))`` at ``d = y/M - shift``.

    ``M d = y - M shift`` is formed first so that exact grid hits give exact
    zeros in the numerator and exact ones at the peak.
    """
    md = y - M * shift
    md = md - M * np.round(md / M)  # wrap d into [-1/2, 1/2]
    peak = md == 0
    whole = md == np.round(md)
    num = np.where(whole, 0.0, np.sin(np.pi * md) ** 2)
    den = M * M * np.sin(np.pi * md / M) ** 2
    out = num / np.where(peak, 1.0, den)
    return np.where(peak, 1.0, out)


def _phase_distribution(n: int, t_true: int, M: int) -> np.ndarray:
    if M < 2:
        raise ValueError("M must be at least 2")
    if not 0 <= t_true <= n:
        raise ValueError("t_true must lie in [0, n]")
    phi = math.asin(math.sqrt(t_true / n)) / math.pi
    y = np.arange(M, dtype=float)
    return 0.5 * (_kernel(y, phi, M) + _kernel(y, -phi, M))


@lru_cache(maxsize=512)
def _cached(n: int, t_true: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    p = _phase_distribution(n, t_true, M)
    cdf = np.cumsum(p)
    p.setflags(write=False)
    cdf.setflags(write=False)
    return p, cdf


def _law(n: int, t_true: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    if M <= _CACHE_MAX_M:
        return _cached(n, int(t_true), M)
    p = _phase_distribution(n, t_true, M)
    return p, np.cumsum(p)


def phase_distribution(n: int, t_true: int, M: int) -> np.ndarray:
    """Outcome law of the ``M``-point phase register for ``t_true`` ones out of ``n``."""
    return np.array(_law(n, t_true, M)[0])


def estimate(n: int, y, M: int):
    """``n sin^2(pi y / M)``."""
    return n * np.sin(np.pi * np.asarray(y) / M) ** 2


def estimate_less(n: int, y: np.ndarray, M: int, threshold: float) -> np.ndarray:
    """Exact test ``n sin^2(pi y/M) < threshold`` for rational thresholds.

    With ``M`` a power of two, ``sin^2(pi y/M)`` is rational only when
    ``4y`` is a multiple of ``M`` (values 0, 1/2, 1); those are compared
    exactly. Other values are irrational, and when float evaluation lands
    within ``1e-9`` of the threshold they are re-evaluated at 50 digits.
    """
    y = np.asarray(y)
    vals = estimate(n, y, M)
    out = vals < threshold
    exact = (4 * y) % M == 0
    if exact.any():
        q = ((4 * y[exact]) // M) % 4  # 0, 1, 2, 3 quarter turns
        ex = np.where(q == 0, 0.0, np.where(q == 2, float(n), n / 2))
        out[exact] = ex < threshold
    near = ~exact & (np.abs(vals - threshold) < 1e-9 * max(1.0, n))
    for k in np.flatnonzero(near):
        with mpmath.workdps(50):
            v = n * mpmath.sin(mpmath.pi * int(y[k]) / M) ** 2
            out[k] = bool(v < mpmath.mpf(threshold))
    return out


def _trigamma(x):
    return polygamma(1, x)


def _sample_index(a: float, v: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of ``i >= 0`` with ``Pr[i] = (i+a)^-2 / trigamma(a)``.

    The survival function is ``Pr[I >= m] = trigamma(m+a) / trigamma(a)``;
    ``I`` is the largest ``m`` whose survival is still ``>= v``.
    """
    total = _trigamma(a)
    lo = np.zeros(v.shape)
    # trigamma(x) > 1/x, so the survival at m exceeds v below m = 1/(v total) - a
    hi = np.floor(2.0 / (v * total)) + 2.0
    while True:
        mid = np.floor((lo + hi) / 2)
        ok = _trigamma(mid + a) >= v * total
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
        if np.all(hi - lo <= 1):
            return lo


def _sample_wrapped(center: float, M: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws from ``y -> K(y/M - center/M)`` on ``0..M-1``.

    With ``c = center`` and ``f = c - floor(c)``, the identity
    ``csc^2 x = sum_k (x - k pi)^-2`` turns the kernel into the fold modulo
    ``M`` of the integer law ``u -> sin^2(pi f) / (pi^2 (u - f)^2)`` placed at
    ``floor(c) + u``. That law splits into ``u >= 1`` (offsets ``1-f, 2-f, ..``)
    and ``u <= 0`` (offsets ``f, 1+f, ..``), each sampled by inverse CDF.
    """
    base = math.floor(center)
    f = center - base
    if f == 0.0:
        return np.full(size, base % M, dtype=np.int64)
    up_mass, down_mass = _trigamma(1 - f), _trigamma(f)
    up = rng.random(size) < up_mass / (up_mass + down_mass)
    v = 1.0 - rng.random(size)  # in (0, 1]
    out = np.empty(size, dtype=np.int64)
    if up.any():
        out[up] = base + 1 + _sample_index(1 - f, v[up]).astype(np.int64)
    if (~up).any():
        out[~up] = base - _sample_index(f, v[~up]).astype(np.int64)
    return out % M


def sample_phase(n: int, t_true: int, M: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Register outcomes drawn from :func:`phase_distribution` in ``O(size)``
    time regardless of ``M``."""
    phi = math.asin(math.sqrt(t_true / n)) / math.pi
    plus = rng.random(size) < 0.5
    out = np.empty(size, dtype=np.int64)
    k = int(plus.sum())
    out[plus] = _sample_wrapped(M * phi, M, rng, k)
    out[~plus] = _sample_wrapped(-M * phi, M, rng, size - k)
    return out


@dataclass(frozen=True)
class CountEstimate:
    t: float
    queries: int
    M: int
    y: int | None
    error_budget: float  # for the hidden true count; diagnostics only

    def within_budget(self, t_true: float) -> bool:
        return abs(self.t - t_true) <= self.error_budget


class PhaseCounter:
    """Dirichlet-kernel model of the counting primitive."""

    name = "phase"

    def __init__(self, grid_factor: float = GRID_FACTOR):
        self.grid_factor = grid_factor

    def grid(self, queries: int) -> int:
        return phase_grid(queries, self.grid_factor)

    def sample_y(self, n: int, t_true: int, queries: int, rng: np.random.Generator, size: int) -> np.ndarray:
        M = self.grid(queries)
        if M > _TABLE_MAX_M:
            return sample_phase(n, t_true, M, rng, size)
        _, cdf = _law(n, t_true, M)
        u = rng.random(size) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), M - 1)

    def sample(self, n: int, t_true: int, queries: int, rng: np.random.Generator, size: int) -> np.ndarray:
        return estimate(n, self.sample_y(n, t_true, queries, rng, size), self.grid(queries))

    def below(self, n: int, y_or_t: np.ndarray, queries: int, threshold: float) -> np.ndarray:
        return estimate_less(n, y_or_t, self.grid(queries), threshold)

    def draw_below(self, n, t_true, queries, threshold, rng, size) -> np.ndarray:
        """Whether each of ``size`` independent estimates falls below ``threshold``."""
        return self.below(n, self.sample_y(n, t_true, queries, rng, size), queries, threshold)

    def prob_below(self, n: int, t_true: int, queries: int, threshold: float) -> float:
        M = self.grid(queries)
        p, _ = _law(n, t_true, M)
        return float(p[estimate_less(n, np.arange(M), M, threshold)].sum())

    def law(self, n: int, t_true: int, queries: int) -> tuple[np.ndarray, np.ndarray]:
        """Distinct estimate values and their probabilities."""
        M = self.grid(queries)
        p, _ = _law(n, t_true, M)
        half = M // 2
        # y and M - y give the same estimate
        y = np.arange(half + 1)
        probs = p[: half + 1].copy()
        probs[1:half] += p[M - 1:half:-1]
        return estimate(n, y, M), probs


class ContractCounter:
    """Adversarial model that only honours the stated guarantee.

    With probability exactly 2/3 the estimate is ``t_Y`` plus uniform noise
    within the error budget (clamped to ``[0, n]``); otherwise it is the
    endpoint of ``[0, n]`` farthest from ``t_Y``.
    """

    name = "contract"
    p_good = 2 / 3

    def grid(self, queries: int) -> None:
        return None

    def sample(self, n, t_true, queries, rng, size) -> np.ndarray:
        b = error_budget(n, t_true, queries)
        good = rng.random(size) < self.p_good
        noise = rng.uniform(-b, b, size)
        bad_value = float(n) if t_true <= n / 2 else 0.0
        return np.where(good, np.clip(t_true + noise, 0, n), bad_value)

    def sample_y(self, n, t_true, queries, rng, size):
        return self.sample(n, t_true, queries, rng, size)

    def below(self, n, y_or_t, queries, threshold) -> np.ndarray:
        return np.asarray(y_or_t) < threshold

    def draw_below(self, n, t_true, queries, threshold, rng, size) -> np.ndarray:
        return self.sample(n, t_true, queries, rng, size) < threshold

    def prob_below(self, n, t_true, queries, threshold) -> float:
        b = error_budget(n, t_true, queries)
        lo, hi = t_true - b, t_true + b
        if b == 0:
            good = float(t_true < threshold)
        else:
            # clamping moves mass onto the endpoints 0 and n
            good = min(max((threshold - lo) / (hi - lo), 0.0), 1.0)
            if threshold > n:
                good = 1.0
            elif threshold <= 0:
                good = 0.0
        bad_value = float(n) if t_true <= n / 2 else 0.0
        return self.p_good * good + (1 - self.p_good) * float(bad_value < threshold)


DEFAULT_COUNTER = PhaseCounter()


@dataclass(frozen=True)
class CountParams:
    queries: int

    def __post_init__(self):
        if self.queries < 1:
            raise ValueError("queries must be positive")


def count(oracle, params: CountParams | int, rng: np.random.Generator, counter=None) -> CountEstimate:
    """One estimate; charges exactly ``queries`` reads to ``oracle``."""
    queries = params.queries if isinstance(params, CountParams) else CountParams(int(params)).queries
    counter = counter or DEFAULT_COUNTER
    oracle.charge(queries)
    n, t_true = oracle.n, oracle.hidden_weight()
    y = counter.sample_y(n, t_true, queries, rng, 1)[0]
    M = counter.grid(queries)
    t = float(estimate(n, y, M)) if M is not None else float(y)
    return CountEstimate(t, queries, M or 0, int(y) if M is not None else None,
                         error_budget(n, t_true, queries))


def count_many(oracle, queries: int, rng: np.random.Generator, size: int, counter=None) -> np.ndarray:
    """``size`` independent estimates (charges ``size * queries``)."""
    counter = counter or DEFAULT_COUNTER
    oracle.charge(queries * size)
    return counter.sample(oracle.n, oracle.hidden_weight(), queries, rng, size)
