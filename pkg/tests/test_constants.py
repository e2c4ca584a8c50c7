import json

import pytest

from qmedian import constants
from qmedian.calibrate import calibrate_stage_constant, calibrate_twophase
from qmedian.rng import clopper_pearson, trial_rng


def test_shipped_constants():
    vals = constants.load()
    assert vals["distinguisher_scale"] == 3
    assert vals["twophase_first_scale"] == 1 and vals["twophase_second_scale"] == 1
    assert vals["stage_constant"] == 5.25


def test_override_file(tmp_path, monkeypatch):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"version": 1, "values": {"stage_constant": 7.0}}))
    monkeypatch.setenv("QMEDIAN_CONSTANTS", str(f))
    constants.load.cache_clear()
    try:
        assert constants.get("stage_constant") == 7.0
        assert constants.get("distinguisher_scale") == 3
    finally:
        monkeypatch.delenv("QMEDIAN_CONSTANTS")
        constants.load.cache_clear()


def test_twophase_calibration_frozen():
    out = calibrate_twophase()
    assert (out["first"], out["second"]) == (1, 1)
    assert out["worst"] == pytest.approx(0.898, abs=1e-3)
    assert out["concentration"] == 0.25


def test_stage_calibration_small_run_is_deterministic():
    a = calibrate_stage_constant(trials=40, seed=3, n=100)
    b = calibrate_stage_constant(trials=40, seed=3, n=100)
    assert a == b and a["stage_constant"] % 0.25 == 0


def test_trial_streams_independent_of_order():
    x = trial_rng(1, 5).random()
    trial_rng(1, 4).random()
    assert trial_rng(1, 5).random() == x
    assert trial_rng(1, 5, 1).random() != x


def test_clopper_pearson_edges():
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    lo, hi = clopper_pearson(5, 10)
    assert lo < 0.5 < hi
