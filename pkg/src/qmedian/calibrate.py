"""Calibration of the package's free constants.

* ``distinguisher_scale``: smallest integer in ``1..32`` whose worst exact
  success over the adversarial grid is at least 0.70 and whose counting error
  bound stays inside half the gap on a broad scan of ``(n, low, high)``.
* ``twophase_first_scale``, ``twophase_second_scale``: smallest integer pair
  (by sum, then by first) with worst exact success at least 0.70 on the
  two-phase grid.
* ``twophase_concentration``: least multiple of 0.25 with
  ``Pr[|t_tilde - t| <= factor (min(t, n-t) + delta)] >= 0.9`` on that grid.
* ``stage_constant``: 11/12 quantile of ``stages / max(1, ln N)`` for the
  banded verdict (coin 0, the slowest legal choice) at ``n = 1000``, rounded
  up to a multiple of 0.25.

Everything except the stage constant is computed from exact laws, so only
``stage_constant`` depends on the seed.
"""

from __future__ import annotations

import json
import math
from datetime import date
from pathlib import Path

import numpy as np

from .approxcount import ExactTwoPhase, TwoPhaseConfig, default_grid
from .distinguisher import calibration_grid, query_cost, worst_success
from .kselect import SelectionParams, select_ideal
from .oracle import NumberOracle
from .qcount import ContractCounter
from .rng import trial_rng

VERSION = 1
TARGET = 0.70


class CalibrationError(RuntimeError):
    def __init__(self, message: str, table: list):
        super().__init__(message)
        self.table = table


def scan_cells(seed: int = 0, per_size: int = 150) -> list[tuple[int, int, int]]:
    rng = np.random.default_rng(seed)
    cells = []
    for n in (2, 3, 5, 8, 16, 50, 64, 101, 256, 1000, 1001, 4096, 16384):
        for _ in range(per_size):
            if rng.random() < 0.3:
                gap = int(rng.integers(1, n + 1))
            else:
                gap = int(rng.integers(1, min(n, 8) + 1))
            low = int(rng.integers(0, n - gap + 1))
            cells.append((n, low, low + gap))
        cells += [(n, 0, 1), (n, n - 1, n), (n, n // 2, n // 2 + 1)]
    return cells


def error_inside_gap(scale: float, n: int, low: int, high: int) -> bool:
    """Whether every count outside ``(low, high)`` has its error bound on the
    correct side of the midpoint."""
    queries = query_cost(n, low, high, scale)
    mid = low + (high - low) / 2
    t = np.arange(n + 1)
    b = np.sqrt(t * (n - t)) / queries + np.abs(n - 2 * t) / (4 * queries * queries)
    below, above = t <= low, t >= high
    return bool(np.all(t[below] + b[below] < mid) and np.all(t[above] - b[above] > mid))


def calibrate_distinguisher(counter=None, max_scale: int = 32, check_gap: bool = True,
                            target: float = TARGET) -> dict:
    cells = scan_cells() if check_gap else []
    table = []
    for scale in range(1, max_scale + 1):
        worst, arg = worst_success(scale, calibration_grid(), counter)
        gap_ok = all(error_inside_gap(scale, *c) for c in cells)
        table.append({"scale": scale, "worst": worst, "cell": arg, "error_inside_gap": gap_ok})
        if worst >= target - 1e-12 and gap_ok:
            return {"scale": scale, "worst": worst, "cell": arg, "table": table}
    raise CalibrationError("no distinguisher scale reaches the target", table)


def contract_success(scale: float) -> float:
    """Worst grid success with the contract-model counter."""
    return worst_success(scale, calibration_grid(), ContractCounter())[0]


def calibrate_twophase(max_total: int = 24) -> dict:
    grid = default_grid()
    table = []
    for total in range(2, max_total + 1):
        for first in range(1, total):
            ex = ExactTwoPhase(TwoPhaseConfig(first, total - first))
            worst, cell = min((ex.evaluate(*c)["success"], c) for c in grid)
            table.append({"first": first, "second": total - first, "worst": worst, "cell": cell})
            if worst >= TARGET:
                conc = concentration_factor(ex, grid)
                return {"first": first, "second": total - first, "worst": worst, "cell": cell,
                        "concentration": conc, "table": table}
    raise CalibrationError("no two-phase scales reach the target", table)


def concentration_factor(ex: ExactTwoPhase, grid, level: float = 0.9, step: float = 0.25) -> float:
    factor = step
    while factor < 64:
        if all(ex.concentration(n, t, d, factor) >= level for n, t, d in grid):
            return factor
        factor += step
    raise CalibrationError("phase-one concentration factor above 64", [])


def stage_cells(n: int = 1000):
    """Ranks from the edges to the middle and slacks up to ``n/10``
    (at ``n = 1000``: ``k`` in 1, 10, 100, 250, 500, 750, 990, 1000)."""
    ks = sorted({1, max(1, n // 100), n // 10, n // 4, n // 2, 3 * n // 4, n - n // 100, n})
    deltas = sorted({d for d in (1, 2, 5, 10, 30, 100) if d <= max(1, n // 10)})
    for k in ks:
        for delta in deltas:
            yield n, k, delta


def calibrate_stage_constant(trials: int = 2000, seed: int = 0, n: int = 1000,
                             quantile: float = 11 / 12) -> dict:
    values = np.arange(1, n + 1) / n
    rows = []
    for cell, (nn, k, delta) in enumerate(stage_cells(n)):
        params = SelectionParams(nn, k, delta)
        denom = max(1.0, math.log(params.scale))
        stages = np.empty(trials)
        for trial in range(trials):
            rng = trial_rng(seed, trial, cell)
            oracle = NumberOracle(rng.permutation(values))
            stages[trial] = select_ideal(oracle, params, "banded", rng, coin=0.0)[1].stages
        q = float(np.quantile(stages / denom, quantile, method="higher"))
        rows.append({"n": nn, "k": k, "delta": delta, "ln_scale": denom, "quantile_ratio": q,
                     "mean_stages": float(stages.mean())})
    worst = max(r["quantile_ratio"] for r in rows)
    return {"stage_constant": math.ceil(worst * 4) / 4, "raw": worst, "table": rows}


def repetition_table(sizes=(100, 1000, 10_000, 100_000)) -> list[dict]:
    """Sampler and verdict repetitions derived from the per-call failure
    target, with the implied factor ``reps / ln ln N`` for reference."""
    from .kselect import SelectConfig

    cfg = SelectConfig()
    rows = []
    for n in sizes:
        params = SelectionParams(n, n // 2, 1)
        lnln = math.log(max(math.e, math.log(params.scale)))
        s, v = cfg.resolved_sampler_reps(params), cfg.resolved_verdict_reps(params)
        rows.append({"n": n, "scale": params.scale, "cap": cfg.cap(params), "sampler_reps": s,
                     "verdict_reps": v, "sampler_factor": s / lnln, "verdict_factor": v / lnln})
    return rows


def run_all(out: str | Path | None = None, trials: int = 2000, seed: int = 0) -> dict:
    dist = calibrate_distinguisher()
    two = calibrate_twophase()
    stage = calibrate_stage_constant(trials, seed)
    values = {
        "distinguisher_scale": float(dist["scale"]),
        "distinguisher_worst_success": dist["worst"],
        "twophase_first_scale": float(two["first"]),
        "twophase_second_scale": float(two["second"]),
        "twophase_concentration": two["concentration"],
        "stage_constant": stage["stage_constant"],
    }
    doc = {
        "version": VERSION,
        "created": date.today().isoformat(),
        "seed": seed,
        "stage_trials": trials,
        "values": values,
        "contract_model": {
            "worst_at_scale_1": contract_success(1.0),
            "scale_for_two_thirds": calibrate_distinguisher(ContractCounter(), check_gap=False,
                                                            target=2 / 3)["scale"],
        },
        "distinguisher": {k: v for k, v in dist.items() if k != "table"},
        "distinguisher_table": dist["table"],
        "twophase": {k: v for k, v in two.items() if k != "table"},
        "stage_table": stage["table"],
        "repetitions": repetition_table(),
    }
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(json.dumps(doc, indent=2, default=_jsonable) + "\n")
    return doc


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(type(obj))

