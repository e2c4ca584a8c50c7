"""Input models with query accounting.

Every algorithm in the package talks to its input through one of these
oracles. Reads are charged to a :class:`QueryLedger`; the ledger is a per-run
object, so concurrent trials never share counters.

Methods whose names start with ``hidden_`` exist for the simulator only (a
classical stand-in for quantum subroutines needs to know, say, how many ones a
boolean function has). They never touch a ledger and algorithm code must not
base decisions on them.
"""

from __future__ import annotations

import csv
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

# A comparison x_i < x_j computed reversibly reads both values and then
# uncomputes both reads.
VALUE_QUERIES_PER_COMPARISON = 4


class QueryLedger:
    """Per-run query counter, keyed by subroutine label."""

    def __init__(self) -> None:
        self.counts: Counter[str] = Counter()

    def charge(self, label: str, amount: int = 1) -> None:
        if amount < 0:
            raise ValueError("query charges are non-negative")
        self.counts[label] += int(amount)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def snapshot(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))

    def __repr__(self) -> str:
        return f"QueryLedger(total={self.total}, counts={self.snapshot()})"


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for oracle of size {n}")


class BooleanOracle:
    """Oracle access to bits ``x_0 .. x_{n-1}``."""

    def __init__(self, bits: Iterable[int], ledger: QueryLedger | None = None, label: str = "bits"):
        arr = np.asarray(list(bits), dtype=np.int8)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a boolean oracle needs at least one bit")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.label = label

    @property
    def n(self) -> int:
        return int(self._bits.size)

    def read_bit(self, i: int) -> int:
        _check_index(i, self.n)
        self.charge(1)
        return int(self._bits[i])

    def charge(self, calls: int) -> None:
        """Record ``calls`` oracle calls made by a (simulated) quantum subroutine."""
        self.ledger.charge(self.label, calls)

    def hidden_weight(self) -> int:
        return int(self._bits.sum())

    def hidden_ones(self) -> np.ndarray:
        return np.flatnonzero(self._bits)


class NumberOracle:
    """Oracle access to a list of numbers; repeated values are allowed."""

    def __init__(self, values: Iterable, ledger: QueryLedger | None = None, label: str = "values"):
        vals = tuple(values)
        if len(vals) < 1:
            raise ValueError("a number oracle needs at least one value")
        arr = np.asarray([float(v) for v in vals], dtype=float)
        if not np.isfinite(arr).all():
            raise ValueError("values must be finite")
        arr.setflags(write=False)
        self._values = arr
        self._order = np.argsort(arr, kind="stable")
        self._sorted = arr[self._order]
        self._order.setflags(write=False)
        self._sorted.setflags(write=False)
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.label = label

    @property
    def n(self) -> int:
        return int(self._values.size)

    def read(self, i: int) -> float:
        _check_index(i, self.n)
        self.ledger.charge(self.label, 1)
        return float(self._values[i])

    def charge_predicate(self, label: str, bit_queries: int, reads_per_bit: int) -> None:
        """Charge value reads made on behalf of a derived boolean view."""
        self.ledger.charge(label, bit_queries * reads_per_bit)

    # simulator-only helpers -------------------------------------------------
    def hidden_values(self) -> np.ndarray:
        return self._values

    def hidden_count_less(self, v: float) -> int:
        return int(np.searchsorted(self._sorted, v, side="left"))

    def hidden_count_leq(self, v: float) -> int:
        return int(np.searchsorted(self._sorted, v, side="right"))

    def hidden_between(self, lo: float, hi: float) -> np.ndarray:
        """Indices ``l`` with ``lo < x_l < hi``, in sorted-value order."""
        a = np.searchsorted(self._sorted, lo, side="right")
        b = np.searchsorted(self._sorted, hi, side="left")
        return self._order[a:max(a, b)]

    def rank_set(self, i: int) -> "RankBounds":
        v = self._values[i]
        return RankBounds(self.hidden_count_less(v) + 1, self.hidden_count_leq(v))


class RankBounds(tuple):
    """``(lo, hi)``: the sorted positions (1-based) a value can occupy."""

    def __new__(cls, lo: int, hi: int):
        return super().__new__(cls, (int(lo), int(hi)))

    @property
    def lo(self) -> int:
        return self[0]

    @property
    def hi(self) -> int:
        return self[1]


class ComparisonOracle:
    """Comparison-tree access: a query ``(i, j)`` answers ``x_i < x_j``.

    With ``emulated=True`` each comparison is also charged to the backing
    value oracle's ledger, as if simulated by value queries.
    """

    def __init__(self, backing: NumberOracle, ledger: QueryLedger | None = None,
                 label: str = "comparisons", emulated: bool = False):
        self.backing = backing
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.label = label
        self.emulated = emulated

    @property
    def n(self) -> int:
        return self.backing.n

    def compare(self, i: int, j: int) -> int:
        _check_index(i, self.n)
        _check_index(j, self.n)
        self.ledger.charge(self.label, 1)
        if self.emulated:
            self.backing.ledger.charge(self.backing.label, VALUE_QUERIES_PER_COMPARISON)
        vals = self.backing.hidden_values()
        return int(vals[i] < vals[j])

    def charge_predicate(self, label: str, bit_queries: int, reads_per_bit: int) -> None:
        self.ledger.charge(label, bit_queries * reads_per_bit)
        if self.emulated:
            self.backing.ledger.charge(
                self.backing.label, bit_queries * reads_per_bit * VALUE_QUERIES_PER_COMPARISON)

    def hidden_values(self) -> np.ndarray:
        return self.backing.hidden_values()

    def hidden_count_less(self, v: float) -> int:
        return self.backing.hidden_count_less(v)

    def hidden_count_leq(self, v: float) -> int:
        return self.backing.hidden_count_leq(v)

    def hidden_between(self, lo: float, hi: float) -> np.ndarray:
        return self.backing.hidden_between(lo, hi)

    def rank_set(self, i: int) -> RankBounds:
        return self.backing.rank_set(i)


ListOracle = NumberOracle | ComparisonOracle


class PredicateView:
    """Boolean function ``y_j = pred(j)`` derived from a list oracle.

    Each query to the view is one bit query on the view's own ledger and
    ``reads_per_bit`` queries (value reads or comparisons) on the base oracle.
    """

    def __init__(self, base: ListOracle, ones: np.ndarray | Callable[[], np.ndarray],
                 reads_per_bit: int, label: str, ledger: QueryLedger | None = None):
        self.base = base
        self._ones = ones
        self.reads_per_bit = reads_per_bit
        self.label = label
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def n(self) -> int:
        return self.base.n

    def charge(self, calls: int) -> None:
        self.ledger.charge(self.label, calls)
        self.base.charge_predicate(self.label, calls, self.reads_per_bit)

    def hidden_ones(self) -> np.ndarray:
        if callable(self._ones):
            self._ones = self._ones()
        return self._ones

    def hidden_weight(self) -> int:
        return int(len(self.hidden_ones()))


class CountView:
    """Boolean view whose only simulator-visible property is its weight.

    Cheaper than :class:`PredicateView` when the counting primitive is the
    sole consumer (no sampling of ones needed).
    """

    def __init__(self, base: ListOracle, weight: int, reads_per_bit: int, label: str,
                 ledger: QueryLedger | None = None):
        self.base = base
        self._weight = int(weight)
        self.reads_per_bit = reads_per_bit
        self.label = label
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def n(self) -> int:
        return self.base.n

    def charge(self, calls: int) -> None:
        self.ledger.charge(self.label, calls)
        self.base.charge_predicate(self.label, calls, self.reads_per_bit)

    def hidden_weight(self) -> int:
        return self._weight


def read_bit(oracle: BooleanOracle, i: int) -> int:
    return oracle.read_bit(i)


def compare(oracle: ComparisonOracle, i: int, j: int) -> int:
    return oracle.compare(i, j)


def load_values(path: str | Path) -> list[Fraction | float]:
    """Read one value per line (or the first column of a CSV file).

    Blank lines and ``#`` comments are skipped. Values written as ``a/b`` are
    kept as exact fractions.
    """
    out: list[Fraction | float] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            cell = row[0].strip()
            try:
                out.append(Fraction(cell) if "/" in cell else float(cell))
            except ValueError:
                if not out:  # header row
                    continue
                raise
    if not out:
        raise ValueError(f"no values in {path}")
    return out


def generate_values(recipe: str, rng: np.random.Generator | int | None = 0) -> np.ndarray:
    """Generate an input list from a compact recipe string.

    ``kind:key=value,...`` with kinds

    * ``uniform:n=101`` i.i.d. uniform on [0, 1)
    * ``sorted:n=101`` the grid ``1/n, 2/n, ..., 1``
    * ``permutation:n=101`` a shuffled grid
    * ``duplicates:n=101,copies=50,value=0.5`` ``copies`` equal values plus
      distinct uniform values
    * ``levels:n=1000,levels=10`` values drawn from a few distinct levels
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    kind, _, rest = recipe.partition(":")
    params: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = val.strip()
    try:
        n = int(params["n"])
    except KeyError:
        raise ValueError(f"generator recipe {recipe!r} needs n=") from None
    if n < 1:
        raise ValueError("n must be positive")
    if kind == "uniform":
        return rng.random(n)
    if kind == "sorted":
        return np.arange(1, n + 1) / n
    if kind == "permutation":
        return rng.permutation(np.arange(1, n + 1) / n)
    if kind == "duplicates":
        copies = int(params.get("copies", n // 2))
        value = float(params.get("value", 0.5))
        if not 0 <= copies <= n:
            raise ValueError("copies must lie in [0, n]")
        rest_vals = rng.random(n - copies)
        while np.any(rest_vals == value):
            rest_vals = rng.random(n - copies)
        return rng.permutation(np.concatenate([np.full(copies, value), rest_vals]))
    if kind == "levels":
        levels = int(params.get("levels", 10))
        return rng.integers(0, levels, size=n) / max(levels - 1, 1)
    raise ValueError(f"unknown generator kind {kind!r}")


def rank_set(values: Sequence[float], i: int) -> RankBounds:
    """Rank set of ``values[i]`` computed directly (test oracle)."""
    v = values[i]
    less = sum(1 for x in values if x < v)
    leq = sum(1 for x in values if x <= v)
    return RankBounds(less + 1, leq)
