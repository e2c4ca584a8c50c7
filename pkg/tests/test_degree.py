import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmedian import degree
from qmedian.degree import PartialFunction

from oracles import clarabel_min_degree, exact_min_degree

# computed once with the rational vertex-enumeration and interior-point oracles in tests/oracles.py
FROZEN_D_STAR = {(16, 1, 0): 3, (8, 5, 4): 3, (16, 9, 8): 5, (32, 17, 16): 7, (64, 33, 32): 13,
                 (4, 1, 0): 2, (64, 1, 0): 5, (256, 1, 0): 9}


def test_theory_bound_examples():
    assert degree.theory_bound(PartialFunction(4, 4, 0)) == pytest.approx(1)
    assert degree.theory_bound(PartialFunction(100, 51, 50)) == pytest.approx(10 + math.sqrt(51 * 49))
    # the far level is 0 here, so the second term vanishes
    assert degree.theory_bound(PartialFunction(16, 1, 0)) == pytest.approx(4)
    assert degree.theory_bound(PartialFunction(16, 15, 16)) == pytest.approx(4)


def test_partial_function_validation():
    with pytest.raises(ValueError):
        PartialFunction(4, 2, 2)
    with pytest.raises(ValueError):
        PartialFunction(4, 5, 0)
    with pytest.raises(ValueError):
        PartialFunction(4, 1, 0, c=0.5)


def test_far_level_and_gap():
    pf = PartialFunction(100, 51, 50)
    assert pf.delta == 1 and pf.m == 51
    assert PartialFunction(10, 2, 7).m == 2


@pytest.mark.parametrize("n,l,lp,expected", [(1, 1, 0, 1), (4, 4, 0, 1)])
def test_small_known_degrees(n, l, lp, expected):
    cert = degree.minimal_degree(PartialFunction(n, l, lp))
    assert cert.d_star == expected and cert.status == "certified"


def test_identity_witness():
    cert = degree.minimal_degree(PartialFunction(4, 4, 0))
    assert cert.min_residual >= -1e-7


@pytest.mark.parametrize("key", sorted(FROZEN_D_STAR))
def test_frozen_degrees(key):
    cert = degree.minimal_degree(PartialFunction(*key))
    assert cert.d_star == FROZEN_D_STAR[key]
    assert cert.min_residual >= -1e-7
    assert cert.infeasibility_margin > 0


def test_frozen_value_against_oracles():
    assert exact_min_degree(5, 1, 0) == degree.minimal_degree(PartialFunction(5, 1, 0)).d_star
    assert clarabel_min_degree(16, 1, 0) == FROZEN_D_STAR[(16, 1, 0)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_exhaustive_small_against_rational_oracle(n):
    for l in range(n + 1):
        for lp in range(n + 1):
            if l != lp:
                pf = PartialFunction(n, l, lp)
                assert degree.minimal_degree(pf).d_star == exact_min_degree(n, l, lp)


def test_exact_mode_matches_independent_oracle():
    for key in [(3, 2, 1), (4, 1, 0), (5, 3, 2)]:
        assert degree.exact_minimal_degree(PartialFunction(*key)) == exact_min_degree(*key)
    assert degree.exact_max_slack(PartialFunction(1, 1, 0), 1) == Fraction(1, 3)
    with pytest.raises(ValueError):
        degree.exact_minimal_degree(PartialFunction(7, 1, 0))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 24), st.data())
def test_symmetry_and_sandwich(n, data):
    l = data.draw(st.integers(0, n))
    lp = data.draw(st.integers(0, n).filter(lambda v: v != l))
    pf = PartialFunction(n, l, lp)
    a = degree.minimal_degree(pf)
    b = degree.minimal_degree(pf.complement())
    assert a.d_star == b.d_star
    assert 1 <= a.d_star <= n


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 20), st.data())
def test_monotone_in_error(n, data):
    l = data.draw(st.integers(0, n))
    lp = data.draw(st.integers(0, n).filter(lambda v: v != l))
    d = [degree.minimal_degree(PartialFunction(n, l, lp, c)).d_star for c in (0.1, 1 / 3, 0.49)]
    assert d[0] >= d[1] >= d[2]


def test_scaling_fit_needs_four_sizes():
    with pytest.raises(ValueError):
        degree.scaling_fit(degree.or_family, [16])


def test_ratio_band_families():
    for family, sizes in (("median", (8, 16, 32, 64)), ("or", (4, 16, 64, 256))):
        fit, _ = degree.scaling_fit(degree.FAMILIES[family], sizes)
        assert 0 < fit.ratio_min and fit.ratio_band < 10


def test_max_n_enforced():
    with pytest.raises(ValueError):
        degree.minimal_degree(PartialFunction(300, 1, 0))


def test_loglog_fit_exact_line():
    xs = [2, 4, 8, 16]
    fit = degree.loglog_fit(xs, [3 * x ** 0.5 for x in xs], [x ** 0.5 for x in xs])
    assert fit.slope == pytest.approx(0.5) and fit.r2 == pytest.approx(1)
    assert fit.ratio_band == pytest.approx(1)


def test_reduction_examples():
    r = degree.reduction_params("kth", 100, k=50, delta=10)
    assert (r.pf.l, r.pf.lprime, r.branch) == (60, 40, "interior")
    m = degree.reduction_params("median", 101, epsilon=0.1)
    assert (m.params["k"], m.params["delta"]) == (51, 6)
    c = degree.reduction_params("count", 100, t=20, delta=3)
    assert (c.pf.l, c.pf.lprime) == (20, 26)


def test_reduction_errors():
    with pytest.raises(degree.NoReductionError):
        degree.reduction_params("kth", 10, k=5, delta=5)
    with pytest.raises(degree.NoReductionError):
        degree.reduction_params("median", 100, epsilon=0.1)
    with pytest.raises(degree.NoReductionError):
        degree.reduction_params("sort", 10)


def test_certificate_json_fields():
    d = degree.minimal_degree(PartialFunction(16, 1, 0)).to_dict()
    assert d["d_star"] == 3 and d["status"] == "certified"
    assert len(d["witness_chebyshev_coefficients"]) <= 4
