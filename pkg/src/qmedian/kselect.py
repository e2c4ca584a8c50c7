"""Approximate k-th smallest element by random-pivot search.

The driver keeps an open value interval ``(x_i, x_j)`` (initially
``(-inf, +inf)``), samples a uniform pivot strictly inside it, asks a
verdict routine whether the pivot's rank is close to ``k``, far below or far
above, and shrinks the interval accordingly. A stage is one sample plus one
verdict.

Two simulated quantum subroutines do the work:

* the sampler is a Grover search with a random iteration count drawn below
  ``ceil(sqrt(n / t))`` for a known lower bound ``t`` on the number of
  qualifying indices, repeated until it hits;
* the verdict asks the boosted distinguisher about the number of elements
  below the pivot, then about the number above it.

Both report their query use to the oracle's ledger under the labels
``"sampler"`` and ``"verdict"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import constants
from .distinguisher import DistinguisherConfig, distinguish_boosted, reps_for_error
from .oracle import CountView, NumberOracle, PredicateView, QueryLedger

YES, LESS, GREATER = "yes", "less", "greater"
SAMPLER, VERDICT = "sampler", "verdict"
SAMPLER_READS_PER_BIT = 2   # x_i < x_l and x_l < x_j
VERDICT_READS_PER_BIT = 1   # x_j against the pivot value
# single-call success of the distinguisher once its scale keeps the counting
# error inside half the gap: phase estimation hits one of the two nearest
# grid points with probability at least 8/pi^2
DISTINGUISHER_FLOOR = 8 / math.pi ** 2


@dataclass(frozen=True)
class SelectionParams:
    """``delta`` is rounded up to an integer unless ``round_delta=False``."""

    n: int
    k: int
    delta: float
    round_delta: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.k <= self.n:
            raise ValueError("k must lie in [1, n]")
        if not self.delta > 0.5:
            raise ValueError("delta must exceed 1/2")
        if self.round_delta:
            object.__setattr__(self, "delta", math.ceil(self.delta))

    @property
    def scale(self) -> float:
        """``sqrt(n/delta) + sqrt(k(n-k))/delta``."""
        n, k, d = self.n, self.k, self.delta
        return math.sqrt(n / d) + math.sqrt(k * (n - k)) / d

    @property
    def window(self) -> tuple[float, float]:
        return self.k - self.delta, self.k + self.delta

    def accepts(self, rank) -> bool:
        """Whether a rank set ``(lo, hi)`` meets the open window."""
        lo, hi = rank
        a, b = self.window
        return lo < b and hi > a


@dataclass
class RunTrace:
    pivots: list = field(default_factory=list)   # (index, verdict)
    result: int | None = None
    failure: str | None = None                    # "sampler" or "stage-cap"
    queries: dict = field(default_factory=dict)
    cap: int | None = None

    @property
    def stages(self) -> int:
        return len(self.pivots)

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass(frozen=True)
class SelectConfig:
    distinguisher_scale: float = field(default_factory=lambda: constants.get("distinguisher_scale"))
    stage_constant: float = field(default_factory=lambda: constants.get("stage_constant"))
    max_stages: int | None = None      # overrides the calibrated cap
    sampler_reps: int | None = None    # overrides the failure-target derivation
    verdict_reps: int | None = None
    counter: object = None

    def cap(self, params: SelectionParams) -> int:
        if self.max_stages is not None:
            return self.max_stages
        return math.ceil(self.stage_constant * max(1.0, math.log(params.scale)))

    def failure_target(self, params: SelectionParams) -> float:
        """Per-call error allowance for each of the two subroutines."""
        return 1.0 / (12 * self.cap(params))

    def sampler_lower_bound(self, params: SelectionParams) -> int:
        return max(1, math.ceil(params.delta / 2))

    def resolved_sampler_reps(self, params: SelectionParams) -> int:
        if self.sampler_reps is not None:
            return self.sampler_reps
        p = attempt_success_floor(params.n, self.sampler_lower_bound(params))
        target = self.failure_target(params)
        return max(1, math.ceil(math.log(target) / math.log1p(-p)))

    def resolved_verdict_reps(self, params: SelectionParams) -> int:
        if self.verdict_reps is not None:
            return self.verdict_reps
        # one verdict makes up to two boosted distinguisher calls
        return reps_for_error(DISTINGUISHER_FLOOR, self.failure_target(params) / 2)

    def distinguisher(self, params: SelectionParams) -> DistinguisherConfig:
        return DistinguisherConfig(self.distinguisher_scale, self.resolved_verdict_reps(params),
                                   self.counter)


def _iteration_cap(n: int, t: int) -> int:
    return math.ceil(math.sqrt(n / t))


@lru_cache(maxsize=256)
def attempt_success_floor(n: int, t: int) -> float:
    """Least success probability of one sampler attempt over all weights ``>= t``.

    One attempt runs ``r`` Grover iterations, ``r`` uniform below
    ``ceil(sqrt(n/t))``, and succeeds with probability ``sin^2((2r+1) theta)``.
    """
    m = _iteration_cap(n, t)
    s = np.arange(t, n + 1)
    theta = np.arcsin(np.sqrt(s / n))
    r = np.arange(m)
    mean = np.zeros(s.size)
    for rr in r:  # m is at most a few hundred
        mean += np.sin((2 * rr + 1) * theta) ** 2
    return float((mean / m).min())


def _bounds(oracle, i: int, j: int) -> tuple[float, float]:
    vals = oracle.hidden_values()
    lo = -math.inf if i < 0 else float(vals[i])
    hi = math.inf if j >= oracle.n else float(vals[j])
    return lo, hi


def sample_between(oracle, i: int, j: int, lower_bound: int, reps: int,
                   rng: np.random.Generator) -> int | None:
    """Uniform index ``l`` with ``x_i < x_l < x_j``, or ``None`` after ``reps`` misses.

    ``i = -1`` and ``j = n`` stand for minus and plus infinity.
    """
    n = oracle.n
    lo, hi = _bounds(oracle, i, j)
    view = PredicateView(oracle, lambda: oracle.hidden_between(lo, hi), SAMPLER_READS_PER_BIT,
                         SAMPLER, ledger=QueryLedger())
    ones = view.hidden_ones()
    theta = math.asin(math.sqrt(ones.size / n))
    m = _iteration_cap(n, lower_bound)
    for _ in range(reps):
        r = int(rng.integers(m))
        view.charge(r + 1)  # r iterations plus checking the measured index
        if ones.size and rng.random() < math.sin((2 * r + 1) * theta) ** 2:
            return int(ones[rng.integers(ones.size)])
    return None


def _pivot_cost(oracle, i: int) -> None:
    # value model: the pivot value itself is read once per verdict
    if isinstance(oracle, NumberOracle):
        oracle.charge_predicate(VERDICT, 1, 1)


def verdict_thresholds(n: int, k: int, delta: int) -> tuple[tuple[int, int] | None, tuple[int, int] | None]:
    """Distinguisher levels for the below-count and above-count questions.

    ``None`` marks a step that is skipped (``k + delta - 1 > n``) or
    short-circuits to "yes" (``k - delta < 0``).
    """
    first = None
    if k + delta - 1 <= n:
        first = (math.ceil(k + delta / 2) - 2, k + delta - 1)
    second = None
    if k - delta >= 0:
        second = (n - math.floor(k - delta / 2) - 1, n - k + delta)
    return first, second


def kprime_verdict(oracle, i: int, params: SelectionParams, cfg: SelectConfig | None = None,
                   rng: np.random.Generator | None = None) -> str:
    """Randomized three-way verdict on the rank of ``x_i``.

    Ranks meeting ``(k - delta/2, k + delta/2)`` get "yes", ranks at most
    ``k - delta`` get "less", ranks at least ``k + delta`` get "greater", each
    up to the distinguisher's error; ranks in between may get either
    neighbouring answer.
    """
    cfg = cfg or SelectConfig()
    rng = rng if rng is not None else np.random.default_rng()
    n, k, delta = params.n, params.k, int(params.delta)
    dcfg = cfg.distinguisher(params)
    value = float(oracle.hidden_values()[i])
    _pivot_cost(oracle, i)
    first, second = verdict_thresholds(n, k, delta)
    if first is not None:
        below = CountView(oracle, oracle.hidden_count_less(value), VERDICT_READS_PER_BIT, VERDICT)
        if distinguish_boosted(below, first[0], first[1], dcfg, rng) == 1:
            return GREATER
    if second is None:
        return YES
    above = CountView(oracle, n - oracle.hidden_count_leq(value), VERDICT_READS_PER_BIT, VERDICT)
    if distinguish_boosted(above, second[0], second[1], dcfg, rng) == 0:
        return YES
    return LESS


def _ledger_of(oracle) -> QueryLedger:
    return oracle.ledger


def _run(oracle, params: SelectionParams, rng, pick, judge, cap: int | None) -> tuple[int | None, RunTrace]:
    trace = RunTrace(cap=cap)
    i, j = -1, oracle.n
    before = _ledger_of(oracle).snapshot()
    while cap is None or trace.stages < cap:
        pivot = pick(i, j)
        if pivot is None:
            trace.failure = SAMPLER
            break
        verdict = judge(pivot)
        trace.pivots.append((pivot, verdict))
        if verdict == YES:
            trace.result = pivot
            break
        if verdict == LESS:
            i = pivot
        else:
            j = pivot
    else:
        trace.failure = "stage-cap"
    after = _ledger_of(oracle).snapshot()
    trace.queries = {key: after.get(key, 0) - before.get(key, 0) for key in after
                     if after.get(key, 0) != before.get(key, 0)}
    return trace.result, trace


def select(oracle, params: SelectionParams, cfg: SelectConfig | None = None,
           rng: np.random.Generator | None = None) -> tuple[int | None, RunTrace]:
    """Index of an element whose rank set meets ``(k - delta, k + delta)``.

    Returns ``(None, trace)`` when the sampler gives up or the stage cap is hit.
    """
    cfg = cfg or SelectConfig()
    rng = rng if rng is not None else np.random.default_rng()
    lower = cfg.sampler_lower_bound(params)
    reps = cfg.resolved_sampler_reps(params)
    return _run(
        oracle, params, rng,
        lambda i, j: sample_between(oracle, i, j, lower, reps, rng),
        lambda l: kprime_verdict(oracle, l, params, cfg, rng),
        cfg.cap(params),
    )


def ideal_verdict(rank, k: int, delta: float) -> str:
    lo, hi = rank
    if lo < k + delta and hi > k - delta:
        return YES
    return LESS if hi <= k - delta else GREATER


def model_verdict(rank, k: int, delta: float, coin: float, rng: np.random.Generator) -> str:
    """A verdict allowed for the randomized routine; in the two bands next
    to the core window it says "yes" with probability ``coin``."""
    lo, hi = rank
    if lo < k + delta / 2 and hi > k - delta / 2:
        return YES
    if hi <= k - delta:
        return LESS
    if lo >= k + delta:
        return GREATER
    if rng.random() < coin:
        return YES
    return LESS if hi <= k - delta / 2 else GREATER


def select_ideal(oracle, params: SelectionParams, mode: str = "exact",
                 rng: np.random.Generator | None = None, coin: float = 0.5,
                 max_stages: int | None = None) -> tuple[int, RunTrace]:
    """The same driver with an exact sampler and a simulator-side verdict.

    ``mode="exact"`` answers by the rank window itself; ``mode="banded"``
    answers "yes" only inside the half-width core and flips a coin with
    ``Pr["yes"] = coin`` in the two bands. Queries are not charged.
    """
    if mode not in ("exact", "banded"):
        raise ValueError("mode must be 'exact' or 'banded'")
    rng = rng if rng is not None else np.random.default_rng()
    k, delta = params.k, params.delta
    ranks = _rank_table(oracle)

    def pick(i, j):
        lo, hi = _bounds(oracle, i, j)
        ones = oracle.hidden_between(lo, hi)
        if ones.size == 0:
            return None
        return int(ones[rng.integers(ones.size)])

    def judge(l):
        if mode == "exact":
            return ideal_verdict(ranks[l], k, delta)
        return model_verdict(ranks[l], k, delta, coin, rng)

    return _run(oracle, params, rng, pick, judge, max_stages)


def _rank_table(oracle) -> np.ndarray:
    vals = oracle.hidden_values()
    s = np.sort(vals)
    lo = np.searchsorted(s, vals, side="left") + 1
    hi = np.searchsorted(s, vals, side="right")
    return np.stack([lo, hi], axis=1)


def median_params(n: int, epsilon: float) -> SelectionParams:
    """Rank and slack for an ``epsilon``-approximate median.

    Odd ``n``: ``k = (n+1)/2`` and ``delta = ceil((eps n + 1)/2)``. Even ``n``:
    ``k = n/2 + 1`` and ``delta = ceil(eps n / 2)``, which keeps both strict
    side counts below ``(1 + eps) n / 2``.
    """
    if not 1 / (2 * n) <= epsilon < 1:
        raise ValueError("epsilon must lie in [1/(2n), 1)")
    if n % 2:
        k = (n + 1) // 2
        delta = math.ceil((epsilon * n + 1) / 2)
    else:
        k = math.ceil((n + 1) / 2)
        delta = max(1, math.ceil(epsilon * n / 2))
    return SelectionParams(n, k, delta)


def is_approximate_median(oracle, i: int, epsilon: float) -> bool:
    """Both strict counts ``#{x_j < x_i}`` and ``#{x_j > x_i}`` below ``(1+eps) n/2``."""
    n = oracle.n
    v = float(oracle.hidden_values()[i])
    less = oracle.hidden_count_less(v)
    greater = n - oracle.hidden_count_leq(v)
    bound = (1 + epsilon) * n / 2
    return less < bound and greater < bound


def median(oracle, epsilon: float, cfg: SelectConfig | None = None,
           rng: np.random.Generator | None = None) -> tuple[int | None, RunTrace]:
    return select(oracle, median_params(oracle.n, epsilon), cfg, rng)


def stage_bound(n: int, k: int, delta: float) -> float:
    """``ln((k+delta-1)(n-k+delta)/(2 delta-1)^2) + 1`` for ``delta <= k <= n-delta``."""
    return math.log((k + delta - 1) * (n - k + delta) / (2 * delta - 1) ** 2) + 1


def expected_stages_exact(n: int, k: int, delta: float) -> float:
    """Expected stages of the exact-verdict driver on distinct values.

    A rank-``r`` element below the window is ever sampled iff it is the first
    pick among ranks ``r .. top of window``; likewise above. Exactly one
    stage answers "yes".
    """
    w_lo = math.floor(k - delta) + 1
    w_hi = math.ceil(k + delta) - 1
    w_lo, w_hi = max(w_lo, 1), min(w_hi, n)
    total = 1.0
    total += sum(1.0 / (w_hi - r + 1) for r in range(1, w_lo))
    total += sum(1.0 / (r - w_lo + 1) for r in range(w_hi + 1, n + 1))
    return total


def is_correct(oracle, params: SelectionParams, index: int | None) -> bool:
    if index is None:
        return False
    return params.accepts(oracle.rank_set(index))
