"""Calibrated constants shipped with the package.

Values live in ``data/constants.json`` and are regenerated by
``qmedian calibrate``. Set ``QMEDIAN_CONSTANTS`` to a file whose values
override the shipped ones key by key.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from pathlib import Path

DATA_FILE = Path(__file__).with_name("data") / "constants.json"

# copy of the shipped calibration, used only if the data file goes missing
FALLBACK = {
    "distinguisher_scale": 3.0,
    "twophase_first_scale": 1.0,
    "twophase_second_scale": 1.0,
    "twophase_concentration": 0.25,
    "stage_constant": 5.25,
}


def _values(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh).get("values", {})
    except FileNotFoundError:
        return {}


@lru_cache(maxsize=None)
def load(path: str | None = None) -> dict:
    override = path or os.environ.get("QMEDIAN_CONSTANTS")
    vals = {**FALLBACK, **_values(DATA_FILE)}
    if override:
        if not Path(override).exists():
            raise FileNotFoundError(f"constants file {override} not found")
        vals.update(_values(override))
    return vals


def get(name: str) -> float:
    return load()[name]
