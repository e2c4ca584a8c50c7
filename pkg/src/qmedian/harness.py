"""Config-driven experiment runner.

An :class:`ExperimentConfig` names an experiment kind, a parameter grid
(cartesian product of lists), a trial count and a seed. :func:`run` executes
every cell, writes one CSV row per trial (or per cell for deterministic
kinds) carrying the full parameter tuple, and a JSON summary with means,
Clopper-Pearson intervals and a log-log fit where the kind has one.

Trial ``r`` of every cell draws from ``trial_rng(seed, r)`` for the algorithm
and ``trial_rng(seed, r, stream=1)`` for generated inputs, so cells share
random numbers and outputs are byte-identical for a fixed seed regardless of
``workers``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import approxcount, degree, distinguisher, kselect, qcount
from .oracle import BooleanOracle, ComparisonOracle, NumberOracle, generate_values, load_values
from .rng import binomial_sigma, clopper_pearson, trial_rng

SCHEMA_VERSION = 1
KINDS = ("degree", "sweep", "count-primitive", "distinguish", "select", "median", "count",
         "calibrate")
# boolean column that defines success for each Monte-Carlo kind
SUCCESS_COLUMN = {
    "count-primitive": "within_budget",
    "distinguish": "correct",
    "select": "success",
    "median": "success",
    "count": "success",
}


@dataclass
class ExperimentConfig:
    kind: str
    grid: dict = field(default_factory=dict)
    trials: int = 100
    seed: int = 0
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        for key, vals in self.grid.items():
            if not isinstance(vals, (list, tuple)):
                self.grid[key] = [vals]
        if self.kind != "calibrate" and not self.cells():
            raise ValueError("the parameter grid is empty")

    def cells(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


# per-kind cell runners -------------------------------------------------------

def _values_for(cell: dict, trial: int, seed: int) -> np.ndarray:
    if "input" in cell and cell["input"]:
        return np.asarray([float(v) for v in load_values(cell["input"])])
    recipe = cell.get("gen") or f"permutation:n={cell['n']}"
    return generate_values(recipe, trial_rng(seed, trial, stream=1))


def _list_oracle(values, model: str):
    base = NumberOracle(values)
    if model == "comparison":
        return ComparisonOracle(base)
    if model != "value":
        raise ValueError("model must be 'value' or 'comparison'")
    return base


def _run_degree(cell: dict, trials: int, seed: int) -> list[dict]:
    pf = degree.PartialFunction(int(cell["n"]), int(cell["l"]), int(cell["lprime"]),
                                float(cell.get("c", degree.DEFAULT_C)))
    cert = degree.minimal_degree(pf, cell.get("max_degree"))
    return [_degree_row(cert)]


def _degree_row(cert) -> dict:
    bound = degree.theory_bound(cert.pf)
    return {"d_star": cert.d_star, "theory_bound": bound, "ratio": cert.d_star / bound,
            "status": cert.status, "min_residual": cert.min_residual,
            "infeasibility_margin": cert.infeasibility_margin}


def _run_sweep(cell: dict, trials: int, seed: int) -> list[dict]:
    family = degree.FAMILIES[cell["family"]]
    cert = degree.minimal_degree(family(int(cell["n"]), float(cell.get("c", degree.DEFAULT_C))))
    return [{"l": cert.pf.l, "lprime": cert.pf.lprime, **_degree_row(cert)}]


def _run_count_primitive(cell: dict, trials: int, seed: int) -> list[dict]:
    n, t, p = int(cell["n"]), int(cell["t"]), int(cell["p"])
    oracle = BooleanOracle([1] * t + [0] * (n - t))
    budget = qcount.error_budget(n, t, p)
    rows = []
    for trial in range(trials):
        est = qcount.count(oracle, p, trial_rng(seed, trial))
        rows.append({"trial": trial, "y": est.y, "t_hat": est.t,
                     "within_budget": abs(est.t - t) <= budget})
    return rows


def _run_distinguish(cell: dict, trials: int, seed: int) -> list[dict]:
    n, low, high, t = int(cell["n"]), int(cell["lprime"]), int(cell["l"]), int(cell["t_true"])
    cfg = distinguisher.DistinguisherConfig(
        float(cell.get("scale", distinguisher.DistinguisherConfig().scale)), int(cell.get("reps", 1)))
    rows = []
    for trial in range(trials):
        oracle = BooleanOracle([1] * t + [0] * (n - t))
        out = distinguisher.distinguish_boosted(oracle, low, high, cfg, trial_rng(seed, trial))
        correct = "" if low < t < high else bool(out == (1 if t >= high else 0))
        rows.append({"trial": trial, "output": out, "correct": correct,
                     "queries": oracle.ledger.total})
    return rows


def _selection_rows(cell: dict, trials: int, seed: int, params_for) -> list[dict]:
    model = cell.get("model", "value")
    rows = []
    for trial in range(trials):
        values = _values_for(cell, trial, seed)
        oracle = _list_oracle(values, model)
        params = params_for(len(values))
        idx, trace = kselect.select(oracle, params, kselect.SelectConfig(), trial_rng(seed, trial))
        ok = kselect.is_correct(oracle, params, idx)
        if "epsilon" in cell and idx is not None:
            ok = kselect.is_approximate_median(oracle, idx, float(cell["epsilon"]))
        rows.append({
            "trial": trial, "k": params.k, "delta": params.delta,
            "stages": trace.stages, "queries_S": trace.queries.get(kselect.SAMPLER, 0),
            "queries_K": trace.queries.get(kselect.VERDICT, 0),
            "total": sum(trace.queries.values()), "success": ok,
            "failure": trace.failure or "", "scale": params.scale,
        })
    return rows


def _run_select(cell: dict, trials: int, seed: int) -> list[dict]:
    return _selection_rows(cell, trials, seed,
                           lambda n: kselect.SelectionParams(n, int(cell["k"]), float(cell["delta"])))


def _run_median(cell: dict, trials: int, seed: int) -> list[dict]:
    eps = float(cell["epsilon"])
    return _selection_rows(cell, trials, seed, lambda n: kselect.median_params(n, eps))


def _run_count(cell: dict, trials: int, seed: int) -> list[dict]:
    delta = float(cell["delta"])
    if cell.get("input"):
        bits = [int(float(v)) for v in load_values(cell["input"])]
    else:
        n, t = int(cell["n"]), int(cell["t"])
        bits = [1] * t + [0] * (n - t)
    t_true = sum(bits)
    rows = []
    for trial in range(trials):
        oracle = BooleanOracle(bits)
        est = approxcount.approx_count(oracle, delta, rng=trial_rng(seed, trial))
        rows.append({"trial": trial, "t_tilde": est.t_tilde, "t_hat": est.t,
                     "queries": est.queries, "success": abs(est.t - t_true) < delta,
                     "bound": approxcount.expected_query_bound(len(bits), t_true, delta)})
    return rows


RUNNERS = {
    "degree": _run_degree,
    "sweep": _run_sweep,
    "count-primitive": _run_count_primitive,
    "distinguish": _run_distinguish,
    "select": _run_select,
    "median": _run_median,
    "count": _run_count,
}


def _run_cell(args) -> list[dict]:
    kind, index, cell, trials, seed = args
    try:
        rows = RUNNERS[kind](cell, trials, seed)
    except Exception as exc:  # recorded per row; the sweep continues
        rows = [{"error": f"{type(exc).__name__}: {exc}"}]
    return [{"cell": index, **cell, **row} for row in rows]


# summaries -----------------------------------------------------------------

def _summarize_cell(kind: str, rows: list[dict]) -> dict:
    out = {key: rows[0][key] for key in rows[0] if key not in _row_only(rows)}
    out["rows"] = len(rows)
    errors = [r["error"] for r in rows if r.get("error")]
    if errors:
        out["errors"] = errors
        return out
    numeric = sorted({k for r in rows for k, v in r.items()
                      if isinstance(v, (int, float)) and not isinstance(v, bool)
                      and k not in ("trial", "cell")})
    for key in numeric:
        if key in out:
            continue
        vals = np.array([r[key] for r in rows if isinstance(r.get(key), (int, float))], float)
        out[f"mean_{key}"] = float(vals.mean())
    col = SUCCESS_COLUMN.get(kind)
    if col is not None:
        flags = [r[col] for r in rows if isinstance(r[col], bool)]
        if flags:
            s = int(sum(flags))
            lo, hi = clopper_pearson(s, len(flags))
            rate = s / len(flags)
            out.update({"success_rate": rate, "ci95": [lo, hi], "trials": len(flags),
                        "meets_two_thirds": rate >= 2 / 3 - 3 * binomial_sigma(2 / 3, len(flags))})
    return out


def _row_only(rows: list[dict]) -> set:
    """Keys whose value varies across rows of one cell."""
    keys = set().union(*rows)
    return {k for k in keys if len({json.dumps(r.get(k), default=str) for r in rows}) > 1}


def _val(cell: dict, key: str):
    """Per-cell mean of ``key``, or its value when constant across rows."""
    return cell.get(f"mean_{key}", cell.get(key))


def _n_log_loglog(scale: float) -> float:
    return scale * math.log(scale) * math.log(max(math.e, math.log(scale)))


def _fit(kind: str, cells: list[dict]):
    if kind == "sweep":
        pts = [(c["n"], _val(c, "d_star"), _val(c, "theory_bound")) for c in cells
               if _val(c, "d_star") is not None]
        name = "sqrt(n/delta) + sqrt(m(n-m))/delta"
    elif kind in ("select", "median"):
        pts = [(_val(c, "scale"), _val(c, "total"), _n_log_loglog(_val(c, "scale")))
               for c in cells if _val(c, "total") is not None and _val(c, "scale") > math.e]
        name = "N ln N ln ln N"
    else:
        return None
    if len(pts) < 4:
        return None
    xs, ys, th = zip(*pts)
    return degree.loglog_fit(xs, ys, th, name).to_dict()


def _csv_text(rows: list[dict]) -> str:
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    buf.write(f"# schema qmedian-csv v{SCHEMA_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(r.get(k, "")) for k in keys})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def run(config: ExperimentConfig) -> dict:
    """Execute ``config``; returns the summary and writes ``<out>.csv`` and
    ``<out>.json`` when ``config.out`` is set."""
    if config.kind == "calibrate":
        from .calibrate import run_all

        # <out>.json is a constants file, loadable through QMEDIAN_CONSTANTS
        out = Path(config.out).with_suffix(".json") if config.out else None
        doc = run_all(out, trials=config.trials, seed=config.seed)
        return {"schema": SCHEMA_VERSION, "config": asdict(config), "calibration": doc}
    jobs = [(config.kind, i, cell, config.trials, config.seed) for i, cell in enumerate(config.cells())]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]
    rows = sorted((r for res in results for r in res),
                  key=lambda r: (r["cell"], r.get("trial", 0)))
    cells = [_summarize_cell(config.kind, res) for res in results]
    summary = {"schema": SCHEMA_VERSION, "config": asdict(config), "cells": cells,
               "fit": _fit(config.kind, cells)}
    if config.out:
        base = Path(config.out)
        base.parent.mkdir(parents=True, exist_ok=True)
        base.with_suffix(".csv").write_text(_csv_text(rows))
        base.with_suffix(".json").write_text(
            json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    summary["rows"] = rows
    return summary


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (tuple, np.ndarray)):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def csv_text(rows: list[dict]) -> str:
    return _csv_text(rows)
