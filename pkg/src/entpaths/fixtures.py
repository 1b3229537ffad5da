"""Reference states shipped with the package (Bell pair, 3-qubit GHZ, 3-qubit W)."""
from __future__ import annotations

import json
from importlib import resources

from .core import StateVector, state_from_dict

FIXTURE_NAMES = ("bell", "ghz3", "w3")


def fixture_state(name: str) -> StateVector:
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; choose one of {FIXTURE_NAMES}")
    text = resources.files("entpaths").joinpath("fixtures", f"{name}.json").read_text("utf-8")
    return state_from_dict(json.loads(text))
