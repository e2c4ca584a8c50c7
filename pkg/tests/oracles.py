"""Independent reference computations used by the tests.

Nothing here imports the code paths it checks.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def _solve_exact(A, b):
    """Gaussian elimination over the rationals; ``None`` if singular."""
    k = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(k):
        piv = next((r for r in range(col, k) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(k):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b_ for a, b_ in zip(M[r], M[col])]
    return [M[r][k] for r in range(k)]


def exact_max_slack(n: int, l: int, lp: int, c: Fraction, d: int) -> Fraction:
    """Max margin of the degree-``d`` approximation program, by exhaustive
    vertex enumeration in exact rational arithmetic (monomial basis)."""
    rows, rhs = [], []
    for i in range(n + 1):
        powers = [Fraction(i) ** k for k in range(d + 1)]
        rows.append([-p for p in powers] + [Fraction(1)])
        rhs.append(c)
        rows.append(powers + [Fraction(1)])
        rhs.append(1 + c)
    pl = [Fraction(l) ** k for k in range(d + 1)]
    pp = [Fraction(lp) ** k for k in range(d + 1)]
    rows.append([-v for v in pl] + [Fraction(1)])
    rhs.append(-(1 - c))
    rows.append(pp + [Fraction(1)])
    rhs.append(c)
    nv = d + 2
    best = None
    for subset in itertools.combinations(range(len(rows)), nv):
        z = _solve_exact([rows[r] for r in subset], [rhs[r] for r in subset])
        if z is None:
            continue
        if all(sum(a * x for a, x in zip(row, z)) <= h for row, h in zip(rows, rhs)):
            if best is None or z[-1] > best:
                best = z[-1]
    return best


def exact_min_degree(n: int, l: int, lp: int, c: Fraction = Fraction(1, 3)) -> int:
    for d in range(n + 1):
        if exact_max_slack(n, l, lp, c, d) >= 0:
            return d
    raise AssertionError("degree n must always be feasible")


def clarabel_min_degree(n: int, l: int, lp: int, c: float = 1 / 3) -> int:
    """Minimal degree by an interior-point solver with ``q`` parametrized by
    its values at Chebyshev nodes (barycentric Lagrange basis)."""
    import cvxpy as cp

    for d in range(n + 1):
        nodes = (n / 2) * (1 + np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1)))
        w = np.array([1 / np.prod([nodes[j] - nodes[m] for m in range(d + 1) if m != j])
                      for j in range(d + 1)])
        L = np.zeros((n + 1, d + 1))
        for i in range(n + 1):
            diff = i - nodes
            hit = np.flatnonzero(np.abs(diff) < 1e-14)
            if hit.size:
                L[i, hit[0]] = 1.0
            else:
                t = w / diff
                L[i] = t / t.sum()
        v = cp.Variable(d + 1)
        s = cp.Variable()
        q = L @ v
        cons = [q >= -c + s, q <= 1 + c - s, q[l] >= 1 - c + s, q[lp] <= c - s, s <= 1]
        prob = cp.Problem(cp.Maximize(s), cons)
        prob.solve(solver="CLARABEL")
        if prob.value is not None and prob.value >= -1e-7:
            return d
    raise AssertionError("unreachable")


def binom_sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)
