from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmedian.oracle import (BooleanOracle, ComparisonOracle, NumberOracle, QueryLedger,
                            compare, generate_values, load_values, rank_set, read_bit)


def test_read_bit_counts():
    o = BooleanOracle([1, 0, 1])
    assert read_bit(o, 0) == 1
    assert o.ledger.total == 1
    assert read_bit(BooleanOracle([0]), 0) == 0


def test_seven_reads():
    o = BooleanOracle([0, 1])
    for i in range(7):
        o.read_bit(i % 2)
    assert o.ledger.total == 7


@pytest.mark.parametrize("i", [-1, 3])
def test_read_out_of_range(i):
    with pytest.raises(IndexError):
        BooleanOracle([1, 0, 1]).read_bit(i)


def test_empty_oracles_rejected():
    with pytest.raises(ValueError):
        BooleanOracle([])
    with pytest.raises(ValueError):
        NumberOracle([])


def test_compare_strict():
    assert compare(ComparisonOracle(NumberOracle([0.2, 0.7])), 0, 1) == 1
    assert compare(ComparisonOracle(NumberOracle([0.5, 0.5])), 0, 1) == 0


def test_compare_out_of_range():
    with pytest.raises(IndexError):
        ComparisonOracle(NumberOracle([0.1])).compare(0, 1)


def test_emulated_compare_charges_at_most_four():
    base = NumberOracle([0.3, 0.1])
    c = ComparisonOracle(base, emulated=True)
    before = base.ledger.total
    c.compare(0, 1)
    assert c.ledger.total == 1
    assert 0 < base.ledger.total - before <= 4


@given(st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), st.integers(0, 50)), max_size=30))
def test_ledger_total_is_sum_and_monotone(charges):
    led = QueryLedger()
    last = 0
    for label, amount in charges:
        led.charge(label, amount)
        assert led.total >= last
        last = led.total
    assert led.total == sum(led.snapshot().values())


def test_ledger_rejects_negative():
    with pytest.raises(ValueError):
        QueryLedger().charge("x", -1)


def test_values_immutable():
    o = NumberOracle([0.1, 0.2])
    with pytest.raises(ValueError):
        o.hidden_values()[0] = 5.0


@given(st.lists(st.integers(0, 5), min_size=1, max_size=20), st.data())
def test_rank_set_matches_definition(vals, data):
    i = data.draw(st.integers(0, len(vals) - 1))
    lo, hi = rank_set(vals, i)
    assert lo == sum(v < vals[i] for v in vals) + 1
    assert hi == sum(v <= vals[i] for v in vals)
    assert NumberOracle(vals).rank_set(i) == (lo, hi)


def test_load_values(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("value\n# comment\n0.5\n1/3\n\n0.25,extra\n")
    assert load_values(f) == [0.5, Fraction(1, 3), 0.25]


def test_generate_values_seeded():
    a = generate_values("permutation:n=50", 3)
    b = generate_values("permutation:n=50", 3)
    assert np.array_equal(a, b)
    assert sorted(a) == sorted(np.arange(1, 51) / 50)
    d = generate_values("duplicates:n=101,copies=50,value=0.5", 1)
    assert (d == 0.5).sum() == 50 and len(d) == 101
    with pytest.raises(ValueError):
        generate_values("nope:n=3")
