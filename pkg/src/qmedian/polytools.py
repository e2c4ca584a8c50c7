"""Univariate polynomial toolkit: symmetrization, Chebyshev polynomials,
uniform norms and numerical checks of the classical growth and derivative
inequalities (Markov, Bernstein, trigonometric Bernstein, Chebyshev growth,
integer-point growth).

Each check is a proven inequality; a violation beyond float noise means a bug.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as npmono

RTOL = 1e-9
_GRID = 4097


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial ``sum_k coef[k] * B_k(u)`` with ``u`` the affine image
    of ``x`` under ``domain -> [-1, 1]`` and ``B_k`` either ``x**k``
    (``basis="monomial"``) or ``T_k`` (``basis="chebyshev"``).

    Coefficients may be ints or Fractions; evaluation at rational points is
    then exact.
    """

    coef: tuple
    basis: str = "chebyshev"
    domain: tuple = (-1, 1)

    def __post_init__(self):
        if self.basis not in ("chebyshev", "monomial"):
            raise ValueError(f"unknown basis {self.basis!r}")
        c = list(self.coef) or [0]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coef", tuple(c))
        a, b = self.domain
        if not a < b:
            raise ValueError("domain must be an increasing interval")
        object.__setattr__(self, "domain", (a, b))

    @property
    def degree(self) -> int:
        return len(self.coef) - 1

    def _map(self, x):
        a, b = self.domain
        if (a, b) == (-1, 1):
            return x
        return (2 * x - (a + b)) / (b - a)

    def __call__(self, x):
        u = self._map(x)
        c = self.coef
        if self.basis == "monomial":
            acc = c[-1] * (u * 0 + 1) if isinstance(u, np.ndarray) else c[-1]
            for ck in reversed(c[:-1]):
                acc = acc * u + ck
            return acc
        # Clenshaw
        b1 = b2 = 0
        for ck in reversed(c[1:]):
            b1, b2 = 2 * u * b1 - b2 + ck, b1
        return u * b1 - b2 + c[0]

    def to_numpy(self):
        cls = np.polynomial.Chebyshev if self.basis == "chebyshev" else np.polynomial.Polynomial
        return cls([float(v) for v in self.coef], domain=list(map(float, self.domain)))

    @classmethod
    def from_numpy(cls, p) -> "Polynomial":
        basis = "chebyshev" if isinstance(p, np.polynomial.Chebyshev) else "monomial"
        if not np.allclose(p.window, [-1, 1]):
            raise ValueError("only the default window is supported")
        return cls(tuple(float(v) for v in p.coef), basis, tuple(float(v) for v in p.domain))

    def deriv(self) -> "Polynomial":
        return Polynomial.from_numpy(self.to_numpy().deriv())

    def to_basis(self, basis: str) -> "Polynomial":
        if basis == self.basis:
            return self
        if self.basis == "monomial":
            coef = npcheb.poly2cheb(np.asarray(self.coef, dtype=float))
        else:
            coef = npcheb.cheb2poly(np.asarray(self.coef, dtype=float))
        return Polynomial(tuple(float(v) for v in coef), basis, self.domain)

    def with_domain(self, domain: tuple) -> "Polynomial":
        """Same function, coefficients re-expressed over a different domain."""
        if tuple(domain) == self.domain:
            return self
        p = self.to_numpy()
        q = p.convert(domain=list(map(float, domain)))
        return Polynomial.from_numpy(q)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if other.basis != self.basis or other.domain != self.domain:
            other = other.to_basis(self.basis).with_domain(self.domain)
        return Polynomial.from_numpy(self.to_numpy() * other.to_numpy())

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if other.basis != self.basis or other.domain != self.domain:
            other = other.to_basis(self.basis).with_domain(self.domain)
        return Polynomial.from_numpy(self.to_numpy() - other.to_numpy())


@dataclass(frozen=True)
class MultilinearPolynomial:
    """``sum_S coef[S] * prod_{i in S} x_i`` over subsets ``S`` of ``range(n)``."""

    n: int
    terms: Mapping[frozenset, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for s, v in self.terms.items():
            s = frozenset(s)
            if any(not 0 <= i < self.n for i in s):
                raise ValueError(f"monomial {sorted(s)} outside arity {self.n}")
            if v:
                clean[s] = clean.get(s, 0) + v
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max((len(s) for s in self.terms), default=0)

    def __call__(self, x: Sequence) -> float:
        return sum(v * math.prod(x[i] for i in s) for s, v in self.terms.items())

    @classmethod
    def random(cls, n: int, degree: int, rng: np.random.Generator, density: float = 1.0):
        terms = {}
        for k in range(degree + 1):
            for s in itertools.combinations(range(n), k):
                if k == degree or rng.random() < density:
                    terms[frozenset(s)] = float(rng.normal())
        return cls(n, terms)


def symmetrize(p: MultilinearPolynomial) -> Polynomial:
    """Univariate ``q`` with ``q(|X|) = p_sym(X)`` on the boolean cube.

    A monomial over a ``j``-set averages to ``C(s, j) / C(n, j)`` when ``s``
    ones are present, so ``q`` is a combination of binomial polynomials in
    ``s``. The result is in the monomial basis with exact Fraction
    coefficients whenever ``p`` has rational coefficients.
    """
    n = p.n
    exact = all(isinstance(v, (int, Fraction)) for v in p.terms.values())
    conv = Fraction if exact else float
    by_size: dict[int, object] = {}
    for s, v in p.terms.items():
        by_size[len(s)] = by_size.get(len(s), 0) + conv(v)
    total = [conv(0)] * (p.degree + 1)
    for j, weight in by_size.items():
        # C(s, j) = s (s-1) ... (s-j+1) / j!
        falling = [Fraction(1)]
        for r in range(j):
            falling = _mul_linear(falling, -r)
        scale = Fraction(1, math.comb(n, j) * math.factorial(j))
        for k, ck in enumerate(falling):
            total[k] += weight * conv(ck * scale)
    coef = tuple(total)
    return Polynomial(coef, basis="monomial")


def _mul_linear(c: list, a) -> list:
    """Multiply the monomial-basis polynomial ``c`` by ``(s + a)``."""
    out = [Fraction(0)] * (len(c) + 1)
    for k, ck in enumerate(c):
        out[k] += a * ck
        out[k + 1] += ck
    return out


def symmetrize_by_permutations(p: MultilinearPolynomial, x: Sequence[int]) -> Fraction | float:
    """``p_sym(x)`` by brute-force averaging over all ``n!`` permutations."""
    n = p.n
    total = 0
    count = 0
    for perm in itertools.permutations(range(n)):
        total += p([x[perm[i]] for i in range(n)])
        count += 1
    return total / count


def chebyshev(d: int) -> Polynomial:
    """Chebyshev polynomial ``T_d``."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    return Polynomial(tuple([0] * d + [1]), basis="chebyshev")


def chebyshev_closed_form(d: int, x: float) -> float:
    """``T_d(x) = ((x + sqrt(x^2-1))^d + (x - sqrt(x^2-1))^d) / 2`` for ``|x| >= 1``."""
    if abs(x) < 1:
        return math.cos(d * math.acos(x))
    r = math.sqrt(x * x - 1)
    return 0.5 * ((x + r) ** d + (x - r) ** d)


def _interval_max(p: Polynomial, lo: float, hi: float, grid: int = _GRID) -> tuple[float, float]:
    """Max of ``|p|`` over ``[lo, hi]`` and where it is attained.

    Critical points come from the derivative's real roots; a Chebyshev-point
    grid is evaluated as well so that a missed root can only lower accuracy
    to grid resolution, never miss an endpoint.
    """
    np_p = p.to_numpy()
    cands = [lo, hi]
    if p.degree >= 2:
        roots = np_p.deriv().roots()
        scale = max(1.0, abs(hi), abs(lo))
        real = roots[np.abs(roots.imag) <= 1e-7 * scale].real
        cands.extend(r for r in real if lo <= r <= hi)
    theta = np.linspace(0, math.pi, grid)
    cands.extend((lo + hi) / 2 + (hi - lo) / 2 * np.cos(theta))
    xs = np.asarray(cands, dtype=float)
    vals = np.abs(np_p(xs))
    k = int(np.argmax(vals))
    return float(vals[k]), float(xs[k])


def norm(p: Polynomial) -> float:
    """Uniform norm ``max_{|x| <= 1} |p(x)|``."""
    return _interval_max(p, -1.0, 1.0)[0]


@dataclass
class InequalityReport:
    name: str
    ratio: float
    status: str  # "ok" | "violated" | "precondition-failed"
    degree: int
    detail: dict = field(default_factory=dict)
    tolerance: float = RTOL

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _verdict(name, ratio, degree, detail, tol=RTOL) -> InequalityReport:
    status = "ok" if ratio <= 1 + tol else "violated"
    return InequalityReport(name, float(ratio), status, degree, detail, tol)


def _as_unit_domain(p: Polynomial) -> Polynomial:
    return p if p.domain == (-1, 1) else p.with_domain((-1, 1))


def check_markov(p: Polynomial) -> InequalityReport:
    """``max |p'| / (d^2 ||p||)`` over ``[-1, 1]``."""
    p = _as_unit_domain(p)
    d = p.degree
    if d < 1:
        raise ValueError("Markov check needs degree >= 1")
    pn = norm(p)
    dn, where = _interval_max(p.deriv(), -1.0, 1.0)
    return _verdict("markov", dn / (d * d * pn), d, {"norm": pn, "max_derivative": dn, "argmax": where})


def check_bernstein(p: Polynomial) -> InequalityReport:
    """``max sqrt(1-x^2)|p'(x)| / (d ||p||)`` over ``[-1, 1]``.

    The weighted derivative is not a polynomial but its square
    ``(1 - x^2) p'(x)^2`` is, so the maximum is found exactly the same way.
    """
    p = _as_unit_domain(p)
    d = p.degree
    pn = norm(p)
    if d == 0:
        return _verdict("bernstein", 0.0, 0, {"norm": pn})
    dp = p.deriv().to_basis("chebyshev").to_numpy()
    weight = np.polynomial.Chebyshev([0.5, 0, -0.5])  # 1 - x^2
    sq = Polynomial.from_numpy(weight * dp * dp)
    m2, where = _interval_max(sq, -1.0, 1.0)
    m = math.sqrt(max(m2, 0.0))
    return _verdict("bernstein", m / (d * pn), d, {"norm": pn, "max_weighted_derivative": m, "argmax": where})


@dataclass(frozen=True)
class TrigPolynomial:
    """``a[0] + sum_k a[k] cos(kx) + b[k] sin(kx)``; ``b[0]`` is ignored."""

    a: tuple
    b: tuple = ()

    @property
    def degree(self) -> int:
        d = 0
        for k in range(1, max(len(self.a), len(self.b))):
            ak = self.a[k] if k < len(self.a) else 0
            bk = self.b[k] if k < len(self.b) else 0
            if ak or bk:
                d = k
        return d

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, float(self.a[0]) if self.a else 0.0)
        for k in range(1, max(len(self.a), len(self.b))):
            if k < len(self.a):
                out = out + self.a[k] * np.cos(k * x)
            if k < len(self.b):
                out = out + self.b[k] * np.sin(k * x)
        return out

    def deriv(self) -> "TrigPolynomial":
        K = max(len(self.a), len(self.b))
        a = [0.0] * K
        b = [0.0] * K
        for k in range(1, K):
            ak = self.a[k] if k < len(self.a) else 0.0
            bk = self.b[k] if k < len(self.b) else 0.0
            a[k] = k * bk
            b[k] = -k * ak
        return TrigPolynomial(tuple(a), tuple(b))

    def _laurent(self) -> np.ndarray:
        """Coefficients of ``z^d t`` as a polynomial in ``z = e^{ix}`` (ascending)."""
        d = self.degree
        c = np.zeros(2 * d + 1, dtype=complex)
        c[d] = self.a[0] if self.a else 0.0
        for k in range(1, d + 1):
            ak = self.a[k] if k < len(self.a) else 0.0
            bk = self.b[k] if k < len(self.b) else 0.0
            c[d + k] = (ak - 1j * bk) / 2
            c[d - k] = (ak + 1j * bk) / 2
        return c


def trig_norm(t: TrigPolynomial, grid: int = 8193) -> float:
    """``max_{|x| <= pi} |t(x)|`` via critical points on the unit circle plus a grid."""
    xs = [np.linspace(-math.pi, math.pi, grid)]
    if t.degree >= 1:
        c = t.deriv()._laurent()
        nz = np.flatnonzero(np.abs(c) > 0)
        if nz.size:
            roots = npmono.polyroots(c[: nz[-1] + 1])
            on_circle = roots[np.abs(np.abs(roots) - 1) < 1e-6]
            xs.append(np.angle(on_circle))
    vals = np.abs(t(np.concatenate(xs)))
    return float(vals.max())


def check_trig_bernstein(t: TrigPolynomial, d: int | None = None) -> InequalityReport:
    """``max |t'| / (d ||t||)`` over ``[-pi, pi]``."""
    actual = t.degree
    if d is None:
        d = actual
    if d < actual or (d == 0 and actual > 0):
        raise ValueError(f"declared degree {d} is below the actual degree {actual}")
    tn = trig_norm(t)
    if actual == 0:
        return _verdict("trig_bernstein", 0.0, d, {"norm": tn})
    dn = trig_norm(t.deriv())
    return _verdict("trig_bernstein", dn / (d * tn), d, {"norm": tn, "max_derivative": dn})


def check_growth(p: Polynomial, n: int, c: float | None = None) -> InequalityReport:
    """Integer-point growth: ``|p(i)| <= c`` for ``i = 0..n`` and ``d <= n``
    imply ``|p(x)| <= 2^d c`` on ``[0, n]``.

    With ``c=None`` the tightest admissible ``c`` (the max over the integers)
    is used.
    """
    d = p.degree
    ints = np.arange(n + 1, dtype=float)
    at_ints = float(np.max(np.abs(p.to_numpy()(ints))))
    if c is None:
        c = at_ints
    detail = {"n": n, "c": c, "max_at_integers": at_ints}
    if d > n or at_ints > c * (1 + RTOL) + 1e-300:
        return InequalityReport("growth", math.nan, "precondition-failed", d, detail)
    if c == 0:
        # p vanishes on n+1 >= d+1 points, so p == 0
        return _verdict("growth", 0.0, d, detail)
    m, where = _interval_max(p, 0.0, float(n))
    detail.update(max_on_interval=m, argmax=where)
    return _verdict("growth", m / (2 ** d * c), d, detail)


def check_cheb_bound(p: Polynomial, a: float, c: float | None = None, grid: int = 2001) -> InequalityReport:
    """Growth outside ``[-a, a]``: ``|p| <= c`` there implies
    ``|p(x)| <= c |T_d(x / a)|`` for ``a < |x| <= 1``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    p = _as_unit_domain(p)
    d = p.degree
    inner, _ = _interval_max(p, -a, a)
    if c is None:
        c = inner
    detail = {"a": a, "c": c, "max_inside": inner}
    if inner > c * (1 + RTOL) + 1e-300:
        return InequalityReport("cheb_bound", math.nan, "precondition-failed", d, detail)
    if a >= 1:
        return _verdict("cheb_bound", 0.0, d, detail)
    if c == 0:
        return _verdict("cheb_bound", 0.0, d, detail)
    xs = np.linspace(a, 1.0, grid)[1:]
    xs = np.concatenate([xs, -xs])
    np_p = p.to_numpy()
    bound = c * np.abs(np.polynomial.Chebyshev.basis(d)(xs / a))
    ratio = np.abs(np_p(xs)) / bound
    k = int(np.argmax(ratio))
    detail.update(argmax=float(xs[k]))
    return _verdict("cheb_bound", float(ratio[k]), d, detail)


def random_polynomial(rng: np.random.Generator, max_degree: int = 10, basis: str = "chebyshev") -> Polynomial:
    d = int(rng.integers(1, max_degree + 1))
    coef = rng.normal(size=d + 1)
    coef[-1] = coef[-1] if abs(coef[-1]) > 1e-3 else 1.0
    return Polynomial(tuple(coef), basis)


def random_trig_polynomial(rng: np.random.Generator, max_degree: int = 8) -> TrigPolynomial:
    d = int(rng.integers(1, max_degree + 1))
    a = rng.normal(size=d + 1)
    b = rng.normal(size=d + 1)
    b[0] = 0.0
    return TrigPolynomial(tuple(a), tuple(b))


def lagrange_through(xs: Sequence[float], ys: Sequence[float], domain: tuple = (-1, 1)) -> Polynomial:
    """Interpolating polynomial through ``(xs, ys)`` expressed in the Chebyshev basis over ``domain``."""
    xs = np.asarray(xs, dtype=float)
    a, b = domain
    u = (2 * xs - (a + b)) / (b - a)
    V = npcheb.chebvander(u, len(xs) - 1)
    coef = np.linalg.solve(V, np.asarray(ys, dtype=float))
    return Polynomial(tuple(coef), "chebyshev", (a, b))
