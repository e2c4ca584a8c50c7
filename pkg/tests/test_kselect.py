import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from qmedian import kselect as ks
from qmedian.kselect import SelectConfig, SelectionParams
from qmedian.oracle import ComparisonOracle, NumberOracle, generate_values
from qmedian.rng import trial_rng


def test_params_rounding_and_scale():
    p = SelectionParams(100, 30, 2.2)
    assert p.delta == 3
    assert p.scale == pytest.approx(math.sqrt(100 / 3) + math.sqrt(30 * 70) / 3)
    assert p.window == (27, 33)
    assert p.accepts((33, 40)) is False and p.accepts((32, 40)) is True
    with pytest.raises(ValueError):
        SelectionParams(10, 0, 1)
    with pytest.raises(ValueError):
        SelectionParams(10, 3, 0.5)


def test_verdict_thresholds_example():
    assert ks.verdict_thresholds(100, 10, 4) == ((10, 13), (91, 94))
    first, second = ks.verdict_thresholds(10, 9, 4)
    assert first is None and second is not None
    assert ks.verdict_thresholds(10, 2, 4)[1] is None


def test_sampler_uniform_with_sentinels():
    o = NumberOracle([0.1, 0.2, 0.3])
    rng = np.random.default_rng(0)
    draws = [ks.sample_between(o, -1, 3, 1, 50, rng) for _ in range(10_000)]
    counts = np.bincount(draws, minlength=3)
    assert chisquare(counts).pvalue > 0.01


def test_sampler_singleton_and_empty():
    o = NumberOracle([0.1, 0.2, 0.3, 0.4])
    rng = np.random.default_rng(1)
    res = [ks.sample_between(o, 0, 2, 1, 30, rng) for _ in range(500)]
    assert set(res) == {1}
    assert ks.sample_between(o, 1, 2, 1, 5, rng) is None


def test_sampler_charges_two_reads_per_bit():
    o = NumberOracle(np.arange(64) / 64)
    ks.sample_between(o, -1, 64, 4, 3, np.random.default_rng(2))
    assert o.ledger.total % ks.SAMPLER_READS_PER_BIT == 0 and o.ledger.total > 0


def test_attempt_floor_is_minimum():
    n, t = 50, 3
    m = math.ceil(math.sqrt(n / t))
    vals = []
    for s in range(t, n + 1):
        th = math.asin(math.sqrt(s / n))
        vals.append(np.mean([math.sin((2 * r + 1) * th) ** 2 for r in range(m)]))
    assert ks.attempt_success_floor(n, t) == pytest.approx(min(vals))


def test_select_exact_median_of_three():
    o = NumberOracle([0.3, 0.1, 0.2])
    for seed in range(20):
        idx, trace = ks.select(o, SelectionParams(3, 2, 1), rng=np.random.default_rng(seed))
        if trace.ok:
            assert idx == 2


def test_select_small_monte_carlo():
    ok = 0
    for trial in range(100):
        vals = generate_values("permutation:n=101", trial_rng(5, trial, 1))
        o = NumberOracle(vals)
        p = SelectionParams(101, 51, 6)
        idx, _ = ks.select(o, p, rng=trial_rng(5, trial))
        ok += ks.is_correct(o, p, idx)
    assert ok >= 80


def test_duplicates_rank_window():
    for trial in range(30):
        vals = generate_values("duplicates:n=101,copies=50,value=0.5", trial_rng(6, trial, 1))
        o = NumberOracle(vals)
        idx, trace = ks.select(o, SelectionParams(101, 51, 6), rng=trial_rng(6, trial))
        if trace.ok:
            lo, hi = o.rank_set(idx)
            assert lo < 57 and hi > 45


def test_trace_accounts_all_queries():
    o = NumberOracle(generate_values("permutation:n=200", 3))
    _, trace = ks.select(o, SelectionParams(200, 50, 4), rng=np.random.default_rng(4))
    assert sum(trace.queries.values()) == o.ledger.total
    assert set(trace.queries) <= {ks.SAMPLER, ks.VERDICT}


def test_verdict_core_and_far():
    vals = np.arange(1, 201) / 200
    o = NumberOracle(vals)
    p = SelectionParams(200, 100, 10)
    rng = np.random.default_rng(7)
    core = [ks.kprime_verdict(o, 99, p, rng=rng) for _ in range(200)]    # rank 100
    low = [ks.kprime_verdict(o, 49, p, rng=rng) for _ in range(200)]     # rank 50
    high = [ks.kprime_verdict(o, 179, p, rng=rng) for _ in range(200)]   # rank 180
    assert core.count(ks.YES) >= 195
    assert low.count(ks.LESS) >= 195
    assert high.count(ks.GREATER) >= 195


def test_verdict_band_outputs_are_legal():
    o = NumberOracle(np.arange(1, 201) / 200)
    p = SelectionParams(200, 100, 10)
    rng = np.random.default_rng(8)
    below_band = {ks.kprime_verdict(o, 92, p, rng=rng) for _ in range(100)}   # rank 93
    above_band = {ks.kprime_verdict(o, 106, p, rng=rng) for _ in range(100)}  # rank 107
    assert below_band <= {ks.YES, ks.LESS}
    assert above_band <= {ks.YES, ks.GREATER}


def test_stage_bound_examples():
    assert ks.stage_bound(101, 51, 5) == pytest.approx(math.log(55 * 55 / 81) + 1)
    assert ks.stage_bound(101, 51, 5) == pytest.approx(4.620, abs=5e-4)
    assert ks.stage_bound(3, 2, 1) == pytest.approx(math.log(4) + 1)


def test_exact_expected_stages():
    assert ks.expected_stages_exact(3, 2, 1) == pytest.approx(2.0)
    assert ks.expected_stages_exact(101, 51, 5) == pytest.approx(4.529, abs=1e-3)
    for n, k, d in [(50, 10, 3), (200, 100, 7), (31, 16, 1)]:
        assert ks.expected_stages_exact(n, k, d) <= ks.stage_bound(n, k, d)


def test_ideal_mean_matches_exact_formula():
    stages = []
    for trial in range(4000):
        o = NumberOracle(generate_values("permutation:n=31", trial_rng(9, trial, 1)))
        stages.append(ks.select_ideal(o, SelectionParams(31, 16, 2), "exact", trial_rng(9, trial))[1].stages)
    se = np.std(stages) / math.sqrt(len(stages))
    assert abs(np.mean(stages) - ks.expected_stages_exact(31, 16, 2)) < 4 * se


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 80), st.data())
def test_ideal_run_within_stage_limit(n, data):
    delta = data.draw(st.integers(1, max(1, n // 2)))
    k = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2 ** 16))
    o = NumberOracle(generate_values(f"levels:n={n},levels=7", seed))
    p = SelectionParams(n, k, delta)
    for mode in ("exact", "banded"):
        idx, trace = ks.select_ideal(o, p, mode, np.random.default_rng(seed), coin=0.3)
        assert trace.ok and p.accepts(o.rank_set(idx))
        if mode == "exact":
            assert trace.stages <= max(1, n - 2 * delta + 2)


def test_ideal_mode_validation():
    with pytest.raises(ValueError):
        ks.select_ideal(NumberOracle([0.1]), SelectionParams(1, 1, 1), "fuzzy")


def test_median_params():
    p = ks.median_params(101, 0.1)
    assert (p.k, p.delta) == (51, 6)
    even = ks.median_params(100, 0.1)
    assert (even.k, even.delta) == (51, 5)
    wide = ks.median_params(11, 0.9)
    assert wide.delta >= wide.k
    with pytest.raises(ValueError):
        ks.median_params(10, 0.01)


@pytest.mark.parametrize("n", [100, 101])
def test_median_params_keep_definition(n):
    # every index the window accepts is an approximate median
    for eps in (0.05, 0.1, 0.3):
        p = ks.median_params(n, eps)
        o = NumberOracle(np.arange(1, n + 1) / n)
        for i in range(n):
            if p.accepts(o.rank_set(i)):
                assert ks.is_approximate_median(o, i, eps)


def test_median_sorted_input():
    o = NumberOracle(np.arange(1, 102) / 101)
    for seed in range(20):
        idx, trace = ks.median(o, 0.1, rng=np.random.default_rng(seed))
        if trace.ok:
            assert 46 <= idx + 1 <= 57


def test_comparison_mode_same_path():
    vals = generate_values("permutation:n=120", 11)
    p = SelectionParams(120, 40, 4)
    a = ks.select(NumberOracle(vals), p, rng=np.random.default_rng(12))[1]
    c_oracle = ComparisonOracle(NumberOracle(vals), emulated=True)
    b = ks.select(c_oracle, p, rng=np.random.default_rng(12))[1]
    assert a.pivots == b.pivots
    assert c_oracle.backing.ledger.total == 4 * c_oracle.ledger.total
    assert c_oracle.ledger.total <= sum(a.queries.values())


def test_cap_and_failure_target():
    cfg = SelectConfig()
    p = SelectionParams(1000, 500, 10)
    cap = math.ceil(cfg.stage_constant * math.log(p.scale))
    assert cfg.cap(p) == cap
    assert cfg.failure_target(p) == pytest.approx(1 / (12 * cap))
    assert cfg.resolved_verdict_reps(p) % 2 == 1
    assert SelectConfig(max_stages=2).cap(p) == 2


def test_stage_cap_failure_recorded():
    o = NumberOracle(generate_values("permutation:n=500", 1))
    idx, trace = ks.select(o, SelectionParams(500, 250, 1), SelectConfig(max_stages=1),
                           np.random.default_rng(0))
    if idx is None:
        assert trace.failure in ("stage-cap", ks.SAMPLER)
