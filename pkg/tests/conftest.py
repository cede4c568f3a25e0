from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from floorbench.model import Floorplan, parse_strict

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def sample_plan_text() -> str:
    return (DATA_DIR / "sample_plan.json").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_plan(sample_plan_text: str) -> Floorplan:
    outcome = parse_strict(sample_plan_text)
    assert outcome.floorplan is not None, [str(d) for d in outcome.diagnostics]
    return outcome.floorplan


@pytest.fixture(scope="session")
def reference_prompt_text() -> str:
    return (DATA_DIR / "reference_prompt.txt").read_text(encoding="utf-8")


def strip_ws(text: str) -> str:
    """Whitespace normalization for byte-level template comparisons."""
    return "".join(text.split())
