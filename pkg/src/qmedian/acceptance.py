"""The acceptance suite: twelve numbered checks, each run at its stated scale.

Monte-Carlo checks compare against ``2/3 - 3 sigma`` with ``sigma`` the
binomial standard deviation at ``p = 2/3``; mean comparisons use the standard
error of the (paired, where applicable) sample mean.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import approxcount, degree, distinguisher, kselect, polytools, qcount
from .oracle import BooleanOracle, ComparisonOracle, NumberOracle, generate_values
from .rng import binomial_sigma, mean_sigma, trial_rng

TWO_THIRDS = 2 / 3


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s): {self.detail.get('summary', '')}"


def _floor(trials: int) -> float:
    return TWO_THIRDS - 3 * binomial_sigma(TWO_THIRDS, trials)


# degree certifier ------------------------------------------------------------

MEDIAN_SIZES = (8, 16, 32, 64)
OR_SIZES = (4, 16, 64, 256)


@lru_cache(maxsize=None)
def _family_fit(family: str, sizes: tuple) -> tuple:
    start = time.perf_counter()
    fit, certs = degree.scaling_fit(degree.FAMILIES[family], sizes)
    return fit, certs, time.perf_counter() - start


def criterion_1(seed: int = 0) -> CriterionResult:
    fit, certs, secs = _family_fit("median", MEDIAN_SIZES)
    slope_ok = abs(fit.slope - 1.0) <= 0.15
    band_ok = fit.ratio_band < 4
    time_ok = secs < 300
    return CriterionResult(1, "degree scaling, middle family", slope_ok and band_ok and time_ok, {
        "d_star": [c.d_star for c in certs], "slope": fit.slope, "ratio_band": fit.ratio_band,
        "summary": f"slope {fit.slope:.3f} (need 1.0+-0.15), ratio band {fit.ratio_band:.2f} (<4), "
                   f"d*={[c.d_star for c in certs]}",
    }, secs)


def criterion_2(seed: int = 0) -> CriterionResult:
    fit, certs, secs = _family_fit("or", OR_SIZES)
    slope_ok = abs(fit.slope - 0.5) <= 0.1
    return CriterionResult(2, "degree scaling, edge family", slope_ok and secs < 300, {
        "d_star": [c.d_star for c in certs], "slope": fit.slope,
        "summary": f"slope {fit.slope:.3f} (need 0.5+-0.1), d*={[c.d_star for c in certs]}",
    }, secs)


def criterion_3(seed: int = 0, small_n: int = 5) -> CriterionResult:
    start = time.perf_counter()
    certs = _family_fit("median", MEDIAN_SIZES)[1] + _family_fit("or", OR_SIZES)[1]
    worst_residual = min(c.min_residual for c in certs)
    infeasible = all(c.status == "certified" and c.infeasibility_margin > 0 for c in certs)
    mismatches = []
    checked = 0
    for n in range(1, small_n + 1):
        for l, lp in itertools.permutations(range(n + 1), 2):
            pf = degree.PartialFunction(n, l, lp)
            checked += 1
            lp_d = degree.minimal_degree(pf).d_star
            exact_d = degree.exact_minimal_degree(pf)
            if lp_d != exact_d:
                mismatches.append((n, l, lp, lp_d, exact_d))
    passed = worst_residual >= -1e-7 and infeasible and not mismatches
    return CriterionResult(3, "degree certificates", passed, {
        "worst_residual": worst_residual, "all_below_infeasible": infeasible,
        "exact_checked": checked, "mismatches": mismatches,
        "summary": f"min residual {worst_residual:.2e}, d*-1 infeasible: {infeasible}, "
                   f"{checked} small instances, {len(mismatches)} mismatches",
    }, time.perf_counter() - start)


# counting and distinguishing ---------------------------------------------------

def criterion_4(seed: int = 0, trials: int = 10_000) -> CriterionResult:
    start = time.perf_counter()
    floor = _floor(trials)
    worst = (2.0, ())
    cell = 0
    for n in (16, 100, 1024):
        for t in sorted({0, 1, n // 4, n // 2, n - 1, n}):
            for p in (4, 10, 32):
                oracle = BooleanOracle([1] * t + [0] * (n - t))
                est = qcount.count_many(oracle, p, trial_rng(seed, cell), trials)
                rate = float(np.mean(np.abs(est - t) <= qcount.error_budget(n, t, p)))
                if oracle.ledger.total != p * trials:
                    raise AssertionError("counting primitive charged the wrong number of queries")
                worst = min(worst, (rate, (n, t, p)))
                cell += 1
    secs = time.perf_counter() - start
    return CriterionResult(4, "counting primitive", worst[0] >= floor and secs < 120, {
        "worst_rate": worst[0], "worst_cell": worst[1], "floor": floor, "cells": cell,
        "summary": f"worst in-budget rate {worst[0]:.4f} at (n,t,P)={worst[1]} (floor {floor:.4f})",
    }, secs)


def _float_cost(n: int, low: int, high: int, scale: float) -> int:
    gap = high - low
    m = high if abs(n / 2 - high) >= abs(n / 2 - low) else low
    return math.ceil(scale * (math.sqrt(n / gap) + math.sqrt(m * (n - m)) / gap))


def criterion_5(seed: int = 0, trials: int = 10_000) -> CriterionResult:
    start = time.perf_counter()
    cfg = distinguisher.DistinguisherConfig()
    floor = _floor(trials)
    worst = (2.0, ())
    cost_errors = []
    for cell, (n, low, high) in enumerate(distinguisher.calibration_grid()):
        for side, t in enumerate((low, high)):
            oracle = BooleanOracle([1] * t + [0] * (n - t))
            answers = distinguisher.distinguish_many(oracle, low, high, trials, cfg,
                                                     trial_rng(seed, cell, side))
            rate = float(np.mean(answers == side))
            worst = min(worst, (rate, (n, low, high, t)))
            per_call = oracle.ledger.total / trials
            if per_call != _float_cost(n, low, high, cfg.scale):
                cost_errors.append((n, low, high, per_call))
    passed = worst[0] >= floor and not cost_errors
    return CriterionResult(5, "distinguisher", passed, {
        "scale": cfg.scale, "worst_rate": worst[0], "worst_cell": worst[1], "floor": floor,
        "cost_mismatches": cost_errors,
        "summary": f"scale {cfg.scale:g}: worst success {worst[0]:.4f} at (n,low,high,t)={worst[1]} "
                   f"(floor {floor:.4f}); {len(cost_errors)} query-count mismatches",
    }, time.perf_counter() - start)


# selection -----------------------------------------------------------------

def _ideal_stages(n: int, k: int, delta: float, trials: int, seed: int, mode: str = "exact",
                  coin: float = 0.5, stream: int = 0) -> np.ndarray:
    params = kselect.SelectionParams(n, k, delta)
    out = np.empty(trials)
    for trial in range(trials):
        values = generate_values(f"permutation:n={n}", trial_rng(seed, trial, stream + 1))
        rng = trial_rng(seed, trial, stream)
        out[trial] = kselect.select_ideal(NumberOracle(values), params, mode, rng, coin)[1].stages
    return out


def criterion_6(seed: int = 0, trials: int = 10_000, sweep_trials: int = 2000) -> CriterionResult:
    start = time.perf_counter()
    stages = _ideal_stages(101, 51, 5, trials, seed)
    mean, se = mean_sigma(stages)
    bound = kselect.stage_bound(101, 51, 5)
    ok_mean = mean <= bound + 3 * se
    xs, ys = [], []
    for n in (100, 1000, 10_000):
        params = kselect.SelectionParams(n, n // 2, 1)
        xs.append(math.log(params.scale))
        ys.append(_ideal_stages(n, n // 2, 1, sweep_trials, seed, stream=2 + n).mean())
    slope = float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
    return CriterionResult(6, "stage bound", ok_mean and slope <= 1.1, {
        "mean_stages": mean, "se": se, "bound": bound, "slope": slope, "sweep_means": ys,
        "summary": f"mean stages {mean:.3f} +- {se:.3f} vs bound {bound:.3f}; "
                   f"log-log slope vs ln N {slope:.3f} (<=1.1)",
    }, time.perf_counter() - start)


def criterion_7(seed: int = 0, trials: int = 5000) -> CriterionResult:
    start = time.perf_counter()
    rows = []
    passed = True
    for stream, ((n, k), delta) in enumerate(itertools.product(((101, 51), (1024, 256)), (8, 16))):
        base = _ideal_stages(n, k, delta / 2, trials, seed, "exact", stream=10 * stream)
        for coin in (0.0, 0.5, 1.0):
            banded = _ideal_stages(n, k, delta, trials, seed, "banded", coin, stream=10 * stream)
            diff_mean, diff_se = mean_sigma(banded - base)
            ok = diff_mean <= 3 * diff_se
            passed &= ok
            rows.append({"n": n, "k": k, "delta": delta, "coin": coin,
                         "banded": float(banded.mean()), "exact_half": float(base.mean()),
                         "diff": diff_mean, "se": diff_se, "ok": ok})
    worst = max(rows, key=lambda r: r["diff"] - 3 * r["se"])
    return CriterionResult(7, "stage domination", passed, {
        "rows": rows,
        "summary": f"worst cell (n,k,delta,coin)=({worst['n']},{worst['k']},{worst['delta']},"
                   f"{worst['coin']}): banded {worst['banded']:.3f} vs exact {worst['exact_half']:.3f}",
    }, time.perf_counter() - start)


SELECT_GRID = (
    ("permutation:n=101", 51, 6),
    ("duplicates:n=101,copies=50,value=0.5", 51, 6),
    ("levels:n=1000,levels=10", 500, 5),
    ("permutation:n=1000", 250, 10),
    ("permutation:n=1000", 1, 1),
)
SCALING_SIZES = tuple(4 ** e for e in range(4, 10))


def _select_cell(recipe: str, k: int, delta: int, trials: int, seed: int, stream: int,
                 model: str = "value") -> dict:
    successes = 0
    totals, comparisons, pivots = [], [], []
    for trial in range(trials):
        values = generate_values(recipe, trial_rng(seed, trial, stream + 1))
        backing = NumberOracle(values)
        oracle = ComparisonOracle(backing, emulated=True) if model == "comparison" else backing
        params = kselect.SelectionParams(len(values), k, delta)
        idx, trace = kselect.select(oracle, params, kselect.SelectConfig(), trial_rng(seed, trial, stream))
        successes += kselect.is_correct(oracle, params, idx)
        totals.append(oracle.ledger.total)
        pivots.append(tuple(trace.pivots))
        if model == "comparison":
            comparisons.append((oracle.ledger.total, backing.ledger.total))
    return {"rate": successes / trials, "totals": totals, "pivots": pivots,
            "comparisons": comparisons}


def criterion_8(seed: int = 0, trials: int = 1000, sweep_trials: int = 100) -> CriterionResult:
    start = time.perf_counter()
    floor = _floor(trials)
    rates = {}
    for stream, (recipe, k, delta) in enumerate(SELECT_GRID):
        rates[(recipe, k, delta)] = _select_cell(recipe, k, delta, trials, seed, 100 * stream)["rate"]
    worst_cell = min(rates, key=rates.get)
    xs, ys, theory = [], [], []
    sweep_rates = []
    for n in SCALING_SIZES:
        params = kselect.SelectionParams(n, (n + 1) // 2, 2)
        cell = _select_cell(f"permutation:n={n}", params.k, 2, sweep_trials, seed, 7000 + n)
        big = params.scale
        xs.append(big)
        ys.append(float(np.mean(cell["totals"])))
        theory.append(big * math.log(big) * math.log(math.log(big)))
        sweep_rates.append(cell["rate"])
    fit = degree.loglog_fit(xs, ys, theory, "N ln N ln ln N")
    secs = time.perf_counter() - start
    passed = (rates[worst_cell] >= floor and abs(fit.slope - 1.0) <= 0.2 and fit.ratio_band < 10
              and secs < 900)
    return CriterionResult(8, "selection correctness and scaling", passed, {
        "rates": {f"{r}|k={k}|delta={d}": v for (r, k, d), v in rates.items()},
        "floor": floor, "slope": fit.slope, "ratio_band": fit.ratio_band, "sweep_rates": sweep_rates,
        "summary": f"worst success {rates[worst_cell]:.3f} (floor {floor:.3f}); query slope "
                   f"{fit.slope:.3f} (1.0+-0.2), ratio band {fit.ratio_band:.2f} (<10)",
    }, secs)


def criterion_9(seed: int = 0, trials: int = 1000, n: int = 1001) -> CriterionResult:
    start = time.perf_counter()
    floor = _floor(trials)
    rates = {}
    for stream, eps in enumerate((0.05, 0.1, 0.2)):
        ok = 0
        for trial in range(trials):
            values = generate_values(f"permutation:n={n}", trial_rng(seed, trial, 2 * stream + 1))
            oracle = NumberOracle(values)
            idx, _ = kselect.median(oracle, eps, rng=trial_rng(seed, trial, 2 * stream))
            ok += idx is not None and kselect.is_approximate_median(oracle, idx, eps)
        rates[eps] = ok / trials
    worst = min(rates.values())
    return CriterionResult(9, "approximate median", worst >= floor, {
        "rates": rates, "floor": floor,
        "summary": f"success by epsilon {rates} (floor {floor:.3f})",
    }, time.perf_counter() - start)


# two-phase counting ----------------------------------------------------------

def criterion_10(seed: int = 0, trials: int = 10_000) -> CriterionResult:
    start = time.perf_counter()
    floor = _floor(trials)
    rows = {}
    for cell, (n, t, delta) in enumerate(approxcount.default_grid()):
        bits = [1] * t + [0] * (n - t)
        ok, queries = 0, 0
        for trial in range(trials):
            est = approxcount.approx_count(BooleanOracle(bits), delta, rng=trial_rng(seed, trial, cell))
            ok += abs(est.t - t) < delta
            queries += est.queries
        mean_q = queries / trials
        rows[(n, t, delta)] = (ok / trials, mean_q / approxcount.expected_query_bound(n, t, delta), mean_q)
    worst = min(rows, key=lambda c: rows[c][0])
    ratios = [r[1] for r in rows.values()]
    band = max(ratios) / min(ratios)
    cheap, dear = rows[(1024, 16, 32)][2], rows[(1024, 512, 32)][2]
    passed = rows[worst][0] >= floor and band < 10 and cheap < dear
    return CriterionResult(10, "two-phase counter", passed, {
        "worst_cell": worst, "worst_rate": rows[worst][0], "floor": floor, "ratio_band": band,
        "mean_queries_t16": cheap, "mean_queries_t512": dear,
        "summary": f"worst success {rows[worst][0]:.4f} at {worst} (floor {floor:.4f}); ratio band "
                   f"{band:.2f} (<10); mean queries t=16 {cheap:.1f} < t=512 {dear:.1f}",
    }, time.perf_counter() - start)


# polynomial inequalities -------------------------------------------------------

def _symmetrization_exact(max_n: int, rng: np.random.Generator) -> bool:
    for n in range(1, max_n + 1):
        for d in sorted({1, n // 2, n}):
            terms = {}
            for size in range(d + 1):
                for s in itertools.combinations(range(n), size):
                    terms[frozenset(s)] = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
            terms[frozenset(range(d))] = Fraction(1)
            p = polytools.MultilinearPolynomial(n, terms)
            q = polytools.symmetrize(p)
            if q.degree > p.degree:
                return False
            for x in itertools.product((0, 1), repeat=n):
                if q(Fraction(sum(x))) != polytools.symmetrize_by_permutations(p, x):
                    return False
    return True


def _growth_examples() -> list:
    n = 8
    spikes = [(-1) ** i for i in range(n + 1)]
    return [
        polytools.check_growth(polytools.Polynomial((0.5, 0.25), "monomial", (0.0, 10.0)), 10),
        polytools.check_growth(polytools.lagrange_through(range(n + 1), spikes, (0.0, float(n))), n),
        polytools.check_growth(polytools.Polynomial((0, 0, 0, 1), "chebyshev", (0.0, 4.0)), 4),
    ]


def _cheb_examples(rng: np.random.Generator, count: int) -> list:
    reports = [
        polytools.check_cheb_bound(polytools.chebyshev(d), 1.0) for d in range(1, 8)
    ]
    reports.append(polytools.check_cheb_bound(polytools.Polynomial((0, 0, 1), "monomial"), 0.5))
    for _ in range(count):
        reports.append(polytools.check_cheb_bound(polytools.random_polynomial(rng),
                                                  float(rng.uniform(0.1, 0.95))))
    return reports


def criterion_11(seed: int = 0, count: int = 100) -> CriterionResult:
    start = time.perf_counter()
    rng = trial_rng(seed, 0, 11)
    worst = {}
    polys = [polytools.random_polynomial(rng) for _ in range(count)]
    trigs = [polytools.random_trig_polynomial(rng) for _ in range(count)]
    for name, reports in (
        ("markov", [polytools.check_markov(p) for p in polys]),
        ("bernstein", [polytools.check_bernstein(p) for p in polys]),
        ("trig_bernstein", [polytools.check_trig_bernstein(t) for t in trigs]),
        ("cheb_bound", _cheb_examples(rng, count)),
        ("growth", _growth_examples()),
    ):
        if any(r.status != "ok" for r in reports):
            worst[name] = math.inf
        else:
            worst[name] = max(r.ratio for r in reports)
    sym_ok = _symmetrization_exact(6, rng)
    passed = sym_ok and all(v <= 1 + 1e-9 for v in worst.values())
    return CriterionResult(11, "polynomial inequality suite", passed, {
        "worst_ratio": worst, "symmetrization_exact": sym_ok,
        "summary": "worst ratios " + ", ".join(f"{k} {v:.6f}" for k, v in worst.items())
                   + f"; symmetrization exact for n<=6: {sym_ok}",
    }, time.perf_counter() - start)


def criterion_12(seed: int = 0, trials: int = 1000) -> CriterionResult:
    start = time.perf_counter()
    floor = _floor(trials)
    rates, ratio_worst, emulation_ok, same_path = {}, 0.0, True, True
    for stream, (recipe, k, delta) in enumerate(SELECT_GRID):
        value = _select_cell(recipe, k, delta, trials, seed, 100 * stream)
        comp = _select_cell(recipe, k, delta, trials, seed, 100 * stream, model="comparison")
        rates[(recipe, k, delta)] = comp["rate"]
        same_path &= value["pivots"] == comp["pivots"]
        for v_total, (c_total, emulated) in zip(value["totals"], comp["comparisons"]):
            ratio_worst = max(ratio_worst, c_total / v_total)
            emulation_ok &= emulated <= 4 * c_total
    worst = min(rates.values())
    passed = worst >= floor and ratio_worst <= 4 and emulation_ok
    return CriterionResult(12, "comparison-model parity", passed, {
        "rates": {f"{r}|k={k}|delta={d}": v for (r, k, d), v in rates.items()},
        "max_comparisons_per_value_query": ratio_worst, "same_pivots": same_path,
        "emulation_within_four": emulation_ok,
        "summary": f"worst success {worst:.3f} (floor {floor:.3f}); comparisons/value queries "
                   f"<= {ratio_worst:.3f} (<=4); identical pivot paths: {same_path}",
    }, time.perf_counter() - start)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


def run_criteria(numbers=None, seed: int = 0) -> list[CriterionResult]:
    numbers = numbers or sorted(CRITERIA)
    return [CRITERIA[i](seed) for i in numbers]
