import json

import pytest

from qmedian import harness
from qmedian.harness import ExperimentConfig


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("nope", {"n": [1]})
    with pytest.raises(ValueError):
        ExperimentConfig("select", {"n": []})
    with pytest.raises(ValueError):
        ExperimentConfig("select", {"n": [10]}, trials=0)


def test_cells_cartesian_and_scalars():
    cfg = ExperimentConfig("count", {"n": [16, 64], "t": 3, "delta": [1, 2]})
    cells = cfg.cells()
    assert len(cells) == 4 and all(c["t"] == 3 for c in cells)


def test_from_json(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"kind": "count", "grid": {"n": [16], "t": [4], "delta": [1]}, "trials": 5}))
    cfg = ExperimentConfig.from_json(f)
    assert cfg.trials == 5 and cfg.seed == 0


def test_edge_family_sweep_fit(tmp_path):
    s = harness.run(ExperimentConfig("sweep", {"family": ["or"], "n": [4, 16, 64, 256]}, 1, 0,
                                     str(tmp_path / "sw")))
    assert len(s["rows"]) == 4
    assert s["fit"]["slope"] == pytest.approx(0.362, abs=1e-3)
    lines = (tmp_path / "sw.csv").read_text().splitlines()
    assert lines[0].startswith("# schema") and len(lines) == 6
    for col in ("n", "d_star", "theory_bound", "ratio"):
        assert col in lines[1].split(",")


def test_select_success_mean(tmp_path):
    s = harness.run(ExperimentConfig("select", {"n": [101], "k": [51], "delta": [6]}, 1000, 0))
    assert s["cells"][0]["success_rate"] >= 2 / 3


def _files(tmp_path, name, workers=1):
    cfg = ExperimentConfig("count", {"n": [64, 256], "t": [5, 32], "delta": [2]}, 30, 7,
                           str(tmp_path / name), workers)
    harness.run(cfg)
    return [(tmp_path / f"{name}.{ext}").read_bytes() for ext in ("csv", "json")]


def test_byte_identical_reruns(tmp_path):
    first = _files(tmp_path, "a")
    second = _files(tmp_path, "a")
    assert first == second


def test_parallel_matches_serial(tmp_path):
    serial = _files(tmp_path, "s")[0]
    parallel = _files(tmp_path, "p", workers=2)[0]
    assert serial == parallel


def test_rows_carry_parameters():
    s = harness.run(ExperimentConfig("count-primitive", {"n": [100], "t": [25], "p": [10, 20]}, 3, 1))
    for row in s["rows"]:
        assert {"n", "t", "p", "trial", "y", "t_hat", "within_budget"} <= set(row)


def test_errors_recorded_per_row():
    s = harness.run(ExperimentConfig("distinguish",
                                     {"n": [10], "l": [3, 5], "lprime": [4], "t_true": [4]}, 2, 0))
    errs = [c for c in s["cells"] if c.get("errors")]
    assert len(errs) == 1 and "ValueError" in errs[0]["errors"][0]
    assert any(r.get("error") for r in s["rows"])


def test_output_io_error_surfaces(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        harness.run(ExperimentConfig("count", {"n": [16], "t": [2], "delta": [1]}, 2, 0,
                                     str(blocker / "sub" / "out")))


def test_summary_has_intervals():
    s = harness.run(ExperimentConfig("count", {"n": [64], "t": [10], "delta": [2]}, 50, 0))
    cell = s["cells"][0]
    lo, hi = cell["ci95"]
    assert lo <= cell["success_rate"] <= hi
