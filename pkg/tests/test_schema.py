"""The published JSON schema must accept canonical documents and reject
structurally broken ones."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

from floorbench.model import floorplan_to_obj

from synth import random_plan

SCHEMA_PATH = Path(__file__).parent.parent / "docs" / "floorplan.schema.json"


@pytest.fixture(scope="module")
def validator():
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def test_sample_plan_validates(validator, sample_plan_text):
    assert list(validator.iter_errors(json.loads(sample_plan_text))) == []


def test_empty_plan_validates(validator):
    doc = {"room_count": 0, "total_area": 0, "room_types": [], "rooms": []}
    assert list(validator.iter_errors(doc)) == []


def test_serialized_plans_validate(validator):
    rng = random.Random(64)
    for _ in range(20):
        obj = floorplan_to_obj(random_plan(rng))
        assert list(validator.iter_errors(obj)) == []


def test_missing_field_rejected(validator, sample_plan_text):
    doc = json.loads(sample_plan_text)
    del doc["rooms"][0]["area"]
    assert any("area" in e.message for e in validator.iter_errors(doc))


def test_short_polygon_rejected(validator, sample_plan_text):
    doc = json.loads(sample_plan_text)
    doc["rooms"][0]["floor_polygon"] = doc["rooms"][0]["floor_polygon"][:2]
    assert list(validator.iter_errors(doc)) != []
