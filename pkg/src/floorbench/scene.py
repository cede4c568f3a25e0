"""Scene-record conversion: metric room polygons to canonical floorplans.

A scene record is one JSON object per line with the shape::

    {"rooms": [{"id": "room|4", "room_type": "Bedroom",
                "floor_polygon": [{"x": 0, "z": 0}, ...]}, ...]}

Coordinates are meters. The second coordinate may be named ``z`` (scene
convention) or ``y``; it maps to the canonical ``y``. The camelCase aliases
``roomType`` and ``floorPolygon`` are accepted as a convenience for raw scene
dumps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Mapping, Sequence, Tuple

from . import geometry, model
from .bubble import extract_bubble
from .geometry import Point
from .model import Diagnostic, Floorplan, round1

DEFAULT_ADJACENCY_THRESHOLD = 2.0


@dataclass(frozen=True)
class SceneRoom:
    id: str
    room_type: str
    raw_polygon: Tuple[Point, ...]


@dataclass(frozen=True)
class SceneRecord:
    rooms: Tuple[SceneRoom, ...]


def parse_scene_record(obj: Mapping[str, Any]) -> SceneRecord:
    """Read one scene record, validating shape and coordinate types."""
    rooms_raw = obj.get("rooms")
    if not isinstance(rooms_raw, list):
        raise ValueError('scene record must carry a "rooms" list')
    rooms: List[SceneRoom] = []
    for i, rraw in enumerate(rooms_raw):
        if not isinstance(rraw, Mapping):
            raise ValueError(f"rooms[{i}] must be an object")
        rid = rraw.get("id")
        rtype = rraw.get("room_type", rraw.get("roomType"))
        poly = rraw.get("floor_polygon", rraw.get("floorPolygon"))
        if not isinstance(rid, str) or not isinstance(rtype, str):
            raise ValueError(f"rooms[{i}] needs string id and room_type")
        if not isinstance(poly, list) or len(poly) < 3:
            raise ValueError(f"rooms[{i}] needs a polygon of at least 3 points")
        points = []
        for j, vraw in enumerate(poly):
            if not isinstance(vraw, Mapping) or "x" not in vraw:
                raise ValueError(f"rooms[{i}].floor_polygon[{j}] needs x and z (or y)")
            second = vraw.get("z", vraw.get("y"))
            if second is None:
                raise ValueError(f"rooms[{i}].floor_polygon[{j}] needs x and z (or y)")
            points.append((float(vraw["x"]), float(second)))
        rooms.append(SceneRoom(id=rid, room_type=rtype, raw_polygon=tuple(points)))
    return SceneRecord(rooms=tuple(rooms))


def convert_scene(
    record: SceneRecord,
    adjacency_threshold: float = DEFAULT_ADJACENCY_THRESHOLD,
) -> Tuple[Floorplan, List[Diagnostic]]:
    """Convert a scene record into a canonical floorplan.

    Per room: coordinates are rounded to one decimal, then redundant
    collinear points (which rounding can create) are removed, then all
    derived fields are filled. Rooms that degenerate after rounding are
    skipped and reported as diagnostics. Adjacency uses a 2-unit threshold by
    default.
    """
    diagnostics: List[Diagnostic] = []
    prepared: List[Tuple[str, str, Sequence[Point]]] = []
    for i, room in enumerate(record.rooms):
        rounded = [(round1(x), round1(y)) for x, y in room.raw_polygon]
        try:
            ring = geometry.simplify_collinear(rounded)
            if geometry.shoelace_area(ring) <= geometry.EPS:
                raise ValueError("zero-area polygon")
        except ValueError as exc:
            diagnostics.append(
                Diagnostic(model.WARNING, f"$.rooms[{i}]", f"room {room.id!r} skipped: {exc}")
            )
            continue
        prepared.append((room.id, room.room_type, ring))
    fp = model.derive_fields(prepared)
    diagram = extract_bubble(fp, adjacency_threshold)
    return model.with_edges(fp, diagram.edges), diagnostics
