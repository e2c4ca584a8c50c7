"""Approximate degree of the symmetric partial functions ``f_{l,l'}``.

``f_{l,l'}`` is 1 on inputs with exactly ``l`` ones and 0 on inputs with
exactly ``l'`` ones. A polynomial approximates it to within ``c`` if it stays
in ``[-c, 1+c]`` on the whole cube and within ``c`` of ``f`` where ``f`` is
defined.

Symmetrizing any multilinear approximant gives a univariate ``q`` of no
larger degree with the same constraints at the integer Hamming weights
``0..n``, and any such ``q`` composed with ``x_0 + ... + x_{n-1}`` and
multilinearized is an approximant again. The minimal degree is therefore a
univariate quantity, decided here by linear feasibility programs in the
coefficient vector and a binary search over the degree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import linprog

from .polytools import Polynomial

FEAS_TOL = 1e-7
AMBIGUITY_TOL = 1e-4
DEFAULT_C = 1 / 3
MAX_N = 256


class IndeterminateError(RuntimeError):
    """A certificate could not separate feasibility from solver noise."""


class NoReductionError(ValueError):
    """Parameters outside every reduction branch."""


@dataclass(frozen=True)
class PartialFunction:
    n: int
    l: int
    lprime: int
    c: float = DEFAULT_C

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not (0 <= self.l <= self.n and 0 <= self.lprime <= self.n):
            raise ValueError("l and l' must lie in [0, n]")
        if self.l == self.lprime:
            raise ValueError("l and l' must differ")
        if not 0 <= self.c < 0.5:
            raise ValueError("c must lie in [0, 1/2)")

    @property
    def delta(self) -> int:
        return abs(self.l - self.lprime)

    @property
    def m(self) -> int:
        """The one of ``l, l'`` farthest from ``n/2`` (``l`` on ties)."""
        a, b = self.l, self.lprime
        return a if abs(self.n / 2 - a) >= abs(self.n / 2 - b) else b

    def complement(self) -> "PartialFunction":
        return PartialFunction(self.n, self.n - self.l, self.n - self.lprime, self.c)


def theory_bound(pf: PartialFunction) -> float:
    """``sqrt(n/delta) + sqrt(m(n-m))/delta`` without the hidden constant."""
    n, d, m = pf.n, pf.delta, pf.m
    return math.sqrt(n / d) + math.sqrt(m * (n - m)) / d


def _design(n: int, d: int) -> np.ndarray:
    """``T_k(2i/n - 1)`` for ``i = 0..n`` and ``k = 0..d``."""
    u = 2.0 * np.arange(n + 1) / n - 1.0
    return npcheb.chebvander(u, d)


def max_slack(pf: PartialFunction, d: int) -> tuple[float, np.ndarray]:
    """Largest ``s`` such that some ``q`` of degree ``<= d`` satisfies every
    constraint with margin ``s``; returns ``(s, chebyshev coefficients)``.

    The constraints are ``-c <= q(i) <= 1+c`` for all ``i``,
    ``q(l) >= 1-c`` and ``q(l') <= c``; ``d`` is feasible iff ``s >= 0``.
    """
    n, c = pf.n, pf.c
    A = _design(n, d)
    k = d + 1
    ones = np.ones((n + 1, 1))
    # variables: (a_0 .. a_d, s); maximize s
    rows = [
        np.hstack([-A, ones]),            # -q(i) + s <= c
        np.hstack([A, ones]),             #  q(i) + s <= 1 + c
        np.hstack([-A[[pf.l]], [[1.0]]]),       # -q(l) + s <= -(1 - c)
        np.hstack([A[[pf.lprime]], [[1.0]]]),   #  q(l') + s <= c
    ]
    rhs = np.concatenate([np.full(n + 1, c), np.full(n + 1, 1 + c), [-(1 - c)], [c]])
    A_ub = np.vstack(rows)
    obj = np.zeros(k + 1)
    obj[-1] = -1.0
    bounds = [(None, None)] * k + [(None, 1.0)]
    res = linprog(obj, A_ub=A_ub, b_ub=rhs, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed at degree {d}: {res.message}")
    return float(res.x[-1]), res.x[:-1]


def residuals(pf: PartialFunction, q: Polynomial) -> np.ndarray:
    """Constraint residuals of ``q`` (non-negative means satisfied)."""
    n, c = pf.n, pf.c
    vals = np.asarray(q.to_numpy()(np.arange(n + 1, dtype=float)), dtype=float)
    return np.concatenate([
        vals + c,
        1 + c - vals,
        [vals[pf.l] - (1 - c)],
        [c - vals[pf.lprime]],
    ])


@dataclass
class DegreeCertificate:
    pf: PartialFunction
    d_star: int
    witness: Polynomial
    witness_margin: float
    infeasibility_margin: float  # -max_slack at d_star - 1 (positive when infeasible)
    status: str = "certified"   # or "indeterminate"
    slack_by_degree: dict = field(default_factory=dict)

    @property
    def min_residual(self) -> float:
        return float(residuals(self.pf, self.witness).min())

    def to_dict(self) -> dict:
        s = self.pf
        return {
            "n": s.n, "l": s.l, "lprime": s.lprime, "c": s.c,
            "d_star": self.d_star, "status": self.status,
            "theory_bound": theory_bound(s),
            "witness_margin": self.witness_margin,
            "min_residual": self.min_residual,
            "infeasibility_margin": self.infeasibility_margin,
            "witness_chebyshev_coefficients": [float(v) for v in self.witness.coef],
            "witness_domain": list(self.witness.domain),
        }


def minimal_degree(pf: PartialFunction, max_degree: int | None = None,
                   max_n: int = MAX_N) -> DegreeCertificate:
    """Least ``d`` admitting an approximating ``q`` of degree ``<= d``."""
    n = pf.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the configured maximum {max_n}")
    hi = n if max_degree is None else min(max_degree, n)
    cache: dict[int, tuple[float, np.ndarray]] = {}

    def slack(d):
        if d not in cache:
            cache[d] = max_slack(pf, d)
        return cache[d][0]

    if slack(hi) < -FEAS_TOL:
        raise ValueError(f"no approximant of degree <= {hi}")
    lo = -1  # degree -1 is the empty program: infeasible by convention
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if slack(mid) >= -FEAS_TOL:
            hi = mid
        else:
            lo = mid
    d_star = hi
    s_star, coef = cache[d_star]
    below = slack(d_star - 1) if d_star >= 1 else -math.inf
    status = "indeterminate" if below >= -AMBIGUITY_TOL else "certified"
    witness = Polynomial(tuple(coef), "chebyshev", (0.0, float(n)))
    return DegreeCertificate(pf, d_star, witness, s_star, -below, status,
                             {d: v[0] for d, v in sorted(cache.items())})


@dataclass
class FitReport:
    slope: float
    intercept: float
    r2: float
    ratio_min: float
    ratio_max: float
    theory: str
    points: list = field(default_factory=list)

    @property
    def ratio_band(self) -> float:
        return self.ratio_max / self.ratio_min

    def to_dict(self) -> dict:
        return {
            "slope": self.slope, "intercept": self.intercept, "r2": self.r2,
            "ratio_min": self.ratio_min, "ratio_max": self.ratio_max,
            "ratio_band": self.ratio_band, "theory": self.theory, "points": self.points,
        }


def loglog_fit(xs: Sequence[float], ys: Sequence[float], theory: Sequence[float] | None = None,
               theory_name: str = "") -> FitReport:
    """Least-squares line through ``(log x, log y)`` plus ``y / theory`` ratios."""
    if len(xs) < 4:
        raise ValueError("a fit needs at least 4 points")
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if theory is None:
        ratios = np.ones(len(xs))
    else:
        ratios = np.asarray(ys, float) / np.asarray(theory, float)
    pts = [{"x": float(x), "y": float(y), "ratio": float(r)} for x, y, r in zip(xs, ys, ratios)]
    return FitReport(float(slope), float(intercept), r2, float(ratios.min()), float(ratios.max()),
                     theory_name, pts)


def scaling_fit(family: Callable[[int], PartialFunction], sizes: Sequence[int],
                max_n: int = MAX_N) -> tuple[FitReport, list[DegreeCertificate]]:
    """Log-log slope of ``d*(n)`` and the ``d*/theory_bound`` ratio series."""
    if len(sizes) < 4:
        raise ValueError("scaling_fit needs at least 4 sizes")
    certs = [minimal_degree(family(n), max_n=max_n) for n in sizes]
    bad = [c.pf.n for c in certs if c.status != "certified"]
    if bad:
        raise IndeterminateError(f"indeterminate certificates at n={bad}")
    fit = loglog_fit(list(sizes), [c.d_star for c in certs],
                     [theory_bound(c.pf) for c in certs], "sqrt(n/delta) + sqrt(m(n-m))/delta")
    return fit, certs


def median_family(n: int, c: float = DEFAULT_C) -> PartialFunction:
    return PartialFunction(n, n // 2 + 1, n // 2, c)


def or_family(n: int, c: float = DEFAULT_C) -> PartialFunction:
    return PartialFunction(n, 1, 0, c)


FAMILIES = {"median": median_family, "or": or_family}


@dataclass(frozen=True)
class Reduction:
    pf: PartialFunction
    branch: str
    params: dict


def reduction_params(problem: str, n: int, k: int | None = None, delta: float | None = None,
                     epsilon: float | None = None, t: int | None = None,
                     c: float = DEFAULT_C) -> Reduction:
    """The partial function instance a lower-bound reduction starts from.

    * ``kth``: a ``delta``-approximate ``k``-th smallest algorithm computes
      ``f_{n-k+gap, n-k-gap}`` (interior ``k``), ``f_{n, n-k-gap}`` (small ``k``)
      or ``f_{n-k+gap, 0}`` (large ``k``), with ``gap = ceil(delta) <= n/4``.
    * ``median``: odd ``n``, ``k = (n+1)/2``, ``gap = ceil((eps n + 1)/2)``,
      then as ``kth``.
    * ``count``: an additive ``delta`` counter computes ``f_{t, t+ceil(2 delta)}``
      or ``f_{t, t-ceil(2 delta)}`` (``delta <= n/6``).
    * ``relcount``: a relative ``eps`` counter computes ``f_{t, t+1}`` when
      ``eps t <= 1/4`` and ``f_{t', t}`` with
      ``t' = floor((1-eps) t / (1+eps))`` otherwise.
    """
    if problem == "median":
        if epsilon is None:
            raise NoReductionError("median needs epsilon")
        if n % 2 == 0:
            raise NoReductionError("the median reduction is defined for odd n")
        if not 1 / (2 * n) <= epsilon < 1:
            raise NoReductionError("epsilon must lie in [1/(2n), 1)")
        k = (n + 1) // 2
        gap = math.ceil((epsilon * n + 1) / 2)
        red = reduction_params("kth", n, k=k, delta=gap, c=c)
        return Reduction(red.pf, "median/" + red.branch, {**red.params, "epsilon": epsilon})
    if problem == "kth":
        if k is None or delta is None:
            raise NoReductionError("kth needs k and delta")
        if not 1 <= k <= n:
            raise NoReductionError("k must lie in [1, n]")
        gap = math.ceil(delta)
        if gap < 1 or gap > n / 4:
            raise NoReductionError("kth reduction needs 1 <= ceil(delta) <= n/4")
        params = {"n": n, "k": k, "delta": gap}
        if 2 * gap < k < n - 2 * gap:
            return Reduction(PartialFunction(n, n - k + gap, n - k - gap, c), "interior", params)
        if k <= 2 * gap:
            return Reduction(PartialFunction(n, n, n - k - gap, c), "low", params)
        return Reduction(PartialFunction(n, n - k + gap, 0, c), "high", params)
    if problem == "count":
        if t is None or delta is None:
            raise NoReductionError("count needs t and delta")
        if not 0 <= t <= n:
            raise NoReductionError("t must lie in [0, n]")
        if not 0 < delta <= n / 6:
            raise NoReductionError("count reduction needs 0 < delta <= n/6")
        step = math.ceil(2 * delta)
        params = {"n": n, "t": t, "delta": delta}
        up_ok, down_ok = t + step <= n, t - step >= 0
        if up_ok and (t <= n / 2 or not down_ok):
            return Reduction(PartialFunction(n, t, t + step, c), "up", params)
        if down_ok:
            return Reduction(PartialFunction(n, t, t - step, c), "down", params)
        raise NoReductionError("neither neighbouring partial function is defined")
    if problem == "relcount":
        if t is None or epsilon is None:
            raise NoReductionError("relcount needs t and epsilon")
        if not 0 < epsilon < 1 or not 0 <= t <= n:
            raise NoReductionError("need 0 < epsilon < 1 and 0 <= t <= n")
        params = {"n": n, "t": t, "epsilon": epsilon}
        if epsilon * t <= Fraction(1, 4):
            if t + 1 > n:
                raise NoReductionError("f_{t,t+1} undefined at t = n")
            return Reduction(PartialFunction(n, t, t + 1, c), "small", params)
        tp = math.floor((1 - epsilon) * t / (1 + epsilon))
        if tp == t:
            raise NoReductionError("t' coincides with t")
        return Reduction(PartialFunction(n, tp, t, c), "large", {**params, "tprime": tp})
    raise NoReductionError(f"unknown problem {problem!r}")


def _solve_rational(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    k = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][k] for r in range(k)]


def exact_max_slack(pf: PartialFunction, d: int) -> Fraction:
    """Optimal margin of the degree-``d`` program in rational arithmetic.

    The program is bounded (the margin is capped at 1) and the Vandermonde
    rows have full column rank, so the optimum sits at a vertex; every basis
    of ``d + 2`` active constraints is tried. Only practical for ``n <= 6``.
    """
    c = Fraction(pf.c).limit_denominator(10 ** 6)
    rows, rhs = [], []
    for i in range(pf.n + 1):
        powers = [Fraction(i) ** j for j in range(d + 1)]
        rows.append([-p for p in powers] + [Fraction(1)])
        rhs.append(c)
        rows.append(powers + [Fraction(1)])
        rhs.append(1 + c)
    rows.append([-Fraction(pf.l) ** j for j in range(d + 1)] + [Fraction(1)])
    rhs.append(c - 1)
    rows.append([Fraction(pf.lprime) ** j for j in range(d + 1)] + [Fraction(1)])
    rhs.append(c)
    rows.append([Fraction(0)] * (d + 1) + [Fraction(1)])
    rhs.append(Fraction(1))
    best = None
    for basis in itertools.combinations(range(len(rows)), d + 2):
        z = _solve_rational([rows[r] for r in basis], [rhs[r] for r in basis])
        if z is None or (best is not None and z[-1] <= best):
            continue
        if all(sum(a * x for a, x in zip(row, z)) <= b for row, b in zip(rows, rhs)):
            best = z[-1]
    return best


def exact_minimal_degree(pf: PartialFunction, max_n: int = 6) -> int:
    """Minimal degree decided in exact rational arithmetic (small ``n`` only)."""
    if pf.n > max_n:
        raise ValueError(f"exact mode is limited to n <= {max_n}")
    for d in range(pf.n + 1):
        if exact_max_slack(pf, d) >= 0:
            return d
    raise AssertionError("degree n always interpolates f")
