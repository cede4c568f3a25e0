"""Canonical floorplan document model: parsing, serialization, derivation.

A floorplan document is a JSON object with the top-level fields
``room_count``, ``total_area``, ``room_types``, ``rooms`` and (optionally)
``edges``. Each room carries ``area``, ``floor_polygon``, ``height``, ``id``,
``is_regular``, ``room_type`` and ``width``. Vertices accept both ``y`` and
``z`` as the second coordinate key; the canonical internal name is ``y``.

Parsed values are kept verbatim: a document may state an area that disagrees
with its polygon, declare a wrong room count, or reuse ids. Such defects are
deliberately representable because the metrics module scores exactly these
inconsistencies. Only structural problems (missing fields, malformed
polygons) are parse errors.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from . import geometry
from .geometry import Point

ERROR = "error"
WARNING = "warning"

ROOM_FIELDS = ("area", "floor_polygon", "height", "id", "is_regular", "room_type", "width")
TOP_FIELDS = ("room_count", "total_area", "room_types", "rooms", "edges")


def round1(value: float) -> float:
    """Round to one decimal place, half away from zero.

    The value is first snapped to 6 decimals so that float noise from grid
    arithmetic (e.g. 36.549999999999997 for 36.55) does not flip the result.
    """
    snapped = round(float(value), 6)
    return float(Decimal(repr(snapped)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def json_number(value: float) -> Any:
    """Canonical numeric form: integral values as int, else one decimal."""
    v = round1(value)
    if v == int(v):
        return int(v)
    return v


@dataclass(frozen=True)
class Vertex:
    x: float
    y: float

    def as_point(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class Room:
    id: str
    room_type: str
    floor_polygon: Tuple[Vertex, ...]
    area: float
    height: float
    width: float
    is_regular: bool

    def points(self) -> Tuple[Point, ...]:
        return tuple(v.as_point() for v in self.floor_polygon)


@dataclass(frozen=True)
class Floorplan:
    room_count: int
    total_area: float
    room_types: Tuple[str, ...]
    rooms: Tuple[Room, ...]
    edges: Tuple[Tuple[str, str], ...] = ()

    def room_by_id(self, room_id: str) -> Optional[Room]:
        for room in self.rooms:
            if room.id == room_id:
                return room
        return None


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    path: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - display helper
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass(frozen=True)
class ParseOutcome:
    floorplan: Optional[Floorplan]
    diagnostics: Tuple[Diagnostic, ...] = ()
    recovered: bool = False

    @property
    def ok(self) -> bool:
        return self.floorplan is not None

    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]


class _Collector:
    def __init__(self) -> None:
        self.items: List[Diagnostic] = []

    def error(self, path: str, message: str) -> None:
        self.items.append(Diagnostic(ERROR, path, message))

    def warning(self, path: str, message: str) -> None:
        self.items.append(Diagnostic(WARNING, path, message))

    @property
    def failed(self) -> bool:
        return any(d.severity == ERROR for d in self.items)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _parse_vertex(obj: Any, path: str, diags: _Collector) -> Optional[Vertex]:
    if not isinstance(obj, dict):
        diags.error(path, f"vertex must be an object, got {type(obj).__name__}")
        return None
    if not _is_number(obj.get("x")):
        diags.error(f"{path}.x", "missing or non-numeric x coordinate")
        return None
    has_y = _is_number(obj.get("y"))
    has_z = _is_number(obj.get("z"))
    if has_y and has_z:
        diags.warning(path, 'vertex carries both "y" and "z"; using "y"')
    if has_y:
        second = obj["y"]
    elif has_z:
        second = obj["z"]
    else:
        diags.error(f"{path}.y", 'missing or non-numeric "y" (or "z") coordinate')
        return None
    for key in obj:
        if key not in ("x", "y", "z"):
            diags.warning(f"{path}.{key}", "unknown vertex field")
    return Vertex(float(obj["x"]), float(second))


def _parse_room(obj: Any, path: str, diags: _Collector, lenient: bool) -> Optional[Room]:
    if not isinstance(obj, dict):
        diags.error(path, f"room must be an object, got {type(obj).__name__}")
        return None
    ok = True
    for name in ("id", "room_type"):
        if not isinstance(obj.get(name), str):
            diags.error(f"{path}.{name}", "missing or non-string field")
            ok = False
    for name in ("area", "height", "width"):
        if not _is_number(obj.get(name)):
            diags.error(f"{path}.{name}", "missing or non-numeric field")
            ok = False
    raw_flag = obj.get("is_regular")
    if isinstance(raw_flag, bool):
        is_regular = raw_flag
    elif raw_flag in (0, 1):
        is_regular = bool(raw_flag)
    else:
        diags.error(f"{path}.is_regular", "missing flag; expected true/false or 1/0")
        ok = False
        is_regular = False

    poly_raw = obj.get("floor_polygon")
    vertices: List[Vertex] = []
    if not isinstance(poly_raw, list):
        diags.error(f"{path}.floor_polygon", "missing or non-list polygon")
        ok = False
    else:
        for i, vraw in enumerate(poly_raw):
            v = _parse_vertex(vraw, f"{path}.floor_polygon[{i}]", diags)
            if v is None:
                ok = False
            else:
                vertices.append(v)
        if ok and len(vertices) < 3:
            diags.error(f"{path}.floor_polygon", f"polygon has {len(vertices)} vertices, need at least 3")
            ok = False

    for key in obj:
        if key not in ROOM_FIELDS:
            diags.warning(f"{path}.{key}", "unknown room field")

    if not ok:
        return None

    # Degenerate geometry (repeated points, zero area) is an error in strict
    # mode; lenient callers skip the room so the rest stays scoreable.
    points = [v.as_point() for v in vertices]
    degenerate = len({(round(x, 9), round(y, 9)) for x, y in points}) < 3
    if not degenerate:
        try:
            degenerate = geometry.shoelace_area(points) <= geometry.EPS
        except ValueError:
            degenerate = True
    if degenerate:
        severity = diags.warning if lenient else diags.error
        severity(f"{path}.floor_polygon", "degenerate polygon (zero area or fewer than 3 distinct points)")
        return None

    return Room(
        id=obj["id"],
        room_type=obj["room_type"],
        floor_polygon=tuple(vertices),
        area=float(obj["area"]),
        height=float(obj["height"]),
        width=float(obj["width"]),
        is_regular=is_regular,
    )


def _parse_object(obj: Any, diags: _Collector, lenient: bool) -> Optional[Floorplan]:
    if not isinstance(obj, dict):
        diags.error("$", f"document root must be an object, got {type(obj).__name__}")
        return None

    rc_raw = obj.get("room_count")
    if isinstance(rc_raw, bool) or not _is_number(rc_raw) or rc_raw != int(rc_raw) or rc_raw < 0:
        diags.error("$.room_count", "missing or invalid room count (nonnegative integer required)")
    if not _is_number(obj.get("total_area")):
        diags.error("$.total_area", "missing or non-numeric total_area")

    types_raw = obj.get("room_types")
    room_types: List[str] = []
    if not isinstance(types_raw, list) or not all(isinstance(t, str) for t in types_raw):
        diags.error("$.room_types", "missing or invalid room_types (list of strings required)")
    else:
        room_types = list(types_raw)

    rooms_raw = obj.get("rooms")
    rooms: List[Room] = []
    skipped = 0
    if not isinstance(rooms_raw, list):
        diags.error("$.rooms", "missing or non-list rooms")
    else:
        for i, rraw in enumerate(rooms_raw):
            room = _parse_room(rraw, f"$.rooms[{i}]", diags, lenient)
            if room is None:
                skipped += 1
            else:
                rooms.append(room)

    ids = [r.id for r in rooms]
    if len(set(ids)) != len(ids):
        diags.warning("$.rooms", "duplicate room ids present")

    edges: List[Tuple[str, str]] = []
    edges_raw = obj.get("edges")
    if edges_raw is not None:
        if not isinstance(edges_raw, list):
            diags.error("$.edges", "edges must be a list of id pairs")
        else:
            known = set(ids)
            for i, eraw in enumerate(edges_raw):
                epath = f"$.edges[{i}]"
                if (
                    not isinstance(eraw, (list, tuple))
                    or len(eraw) != 2
                    or not all(isinstance(e, str) for e in eraw)
                ):
                    diags.error(epath, "edge must be a pair of room id strings")
                    continue
                a, b = eraw
                if a not in known or b not in known:
                    if lenient:
                        diags.warning(epath, f"edge references unknown room id ({a!r}, {b!r}); dropped")
                        continue
                    diags.error(epath, f"edge references unknown room id ({a!r}, {b!r})")
                    continue
                edges.append((a, b) if a <= b else (b, a))

    for key in obj:
        if key not in TOP_FIELDS:
            diags.warning(f"$.{key}", "unknown field")

    if diags.failed:
        return None
    return Floorplan(
        room_count=int(rc_raw),
        total_area=float(obj["total_area"]),
        room_types=tuple(room_types),
        rooms=tuple(rooms),
        edges=tuple(sorted(set(edges))),
    )


def parse_strict(text: str) -> ParseOutcome:
    """Parse a canonical floorplan JSON document.

    Unknown fields are reported as warnings; structural problems (malformed
    JSON, missing required fields, polygons with fewer than 3 vertices) are
    errors and leave the outcome without a floorplan.
    """
    diags = _Collector()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        diags.error("$", f"malformed JSON at byte offset {exc.pos}: {exc.msg}")
        return ParseOutcome(None, tuple(diags.items), recovered=False)
    fp = _parse_object(obj, diags, lenient=False)
    return ParseOutcome(fp, tuple(diags.items), recovered=False)


def extract_json_object(text: str) -> Optional[str]:
    """Return the first balanced top-level ``{...}`` region of ``text``.

    Brace counting honours double- and single-quoted strings with backslash
    escapes, so braces inside string values do not confuse the scan. Returns
    None when no balanced object exists.
    """
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    quote: Optional[str] = None
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if quote is not None:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
            continue
        if ch in ('"', "'"):
            quote = ch
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def _loads_relaxed(text: str) -> Any:
    """json.loads with a Python-literal fallback for single-quoted payloads."""
    try:
        return json.loads(text), False
    except json.JSONDecodeError:
        pass
    try:
        return ast.literal_eval(text), True
    except (ValueError, SyntaxError):
        raise json.JSONDecodeError("not valid JSON nor a Python literal", text, 0)


def parse_lenient(text: str) -> ParseOutcome:
    """Parse free-form model output containing a floorplan document.

    Extracts the first balanced top-level object, stripping surrounding prose
    and template tokens, then applies the strict field rules. Single-quoted
    (Python repr style) payloads are accepted. Rooms with degenerate polygons
    are skipped with a warning instead of failing the parse. ``recovered`` is
    true whenever any such recovery was applied.
    """
    diags = _Collector()
    region = extract_json_object(text)
    if region is None:
        diags.error("$", "no balanced JSON object found in text")
        return ParseOutcome(None, tuple(diags.items), recovered=False)
    recovered = region.strip() != text.strip()
    try:
        obj, relaxed = _loads_relaxed(region)
    except json.JSONDecodeError as exc:
        diags.error("$", f"malformed JSON at byte offset {exc.pos}: {exc.msg}")
        return ParseOutcome(None, tuple(diags.items), recovered=recovered)
    recovered = recovered or relaxed
    fp = _parse_object(obj, diags, lenient=True)
    if fp is not None and any(d.severity == WARNING and "degenerate polygon" in d.message for d in diags.items):
        recovered = True
    return ParseOutcome(fp, tuple(diags.items), recovered=recovered)


def _vertex_obj(v: Vertex, vertex_key: str) -> Dict[str, Any]:
    return {"x": json_number(v.x), vertex_key: json_number(v.y)}


def floorplan_to_obj(fp: Floorplan, vertex_key: str = "y") -> Dict[str, Any]:
    """Plain-dict form of a floorplan in canonical field order."""
    if vertex_key not in ("y", "z"):
        raise ValueError(f'vertex_key must be "y" or "z", got {vertex_key!r}')
    obj: Dict[str, Any] = {
        "room_count": fp.room_count,
        "total_area": json_number(fp.total_area),
        "room_types": list(fp.room_types),
        "rooms": [
            {
                "area": json_number(r.area),
                "floor_polygon": [_vertex_obj(v, vertex_key) for v in r.floor_polygon],
                "height": json_number(r.height),
                "id": r.id,
                "is_regular": 1 if r.is_regular else 0,
                "room_type": r.room_type,
                "width": json_number(r.width),
            }
            for r in fp.rooms
        ],
    }
    if fp.edges:
        obj["edges"] = [list(e) for e in fp.edges]
    return obj


def serialize(fp: Floorplan, vertex_key: str = "y", compact: bool = False) -> str:
    """Render a floorplan as canonical JSON.

    Field order follows the canonical document layout; numbers print with at
    most one decimal, integral values without a decimal point, and the
    regularity flag as 1/0. ``edges`` is omitted when empty. With
    ``compact=True`` the output is a single line suitable for JSON lines.
    """
    obj = floorplan_to_obj(fp, vertex_key)
    if compact:
        return json.dumps(obj)
    return json.dumps(obj, indent=2)


def canonical_ring(points: Sequence[Point]) -> Tuple[Point, ...]:
    """Canonicalize a vertex ring: drop collinear points, orient
    counterclockwise, start at the lexicographically smallest vertex."""
    ring = geometry.simplify_collinear(points)
    if geometry.signed_area(ring) < 0:
        ring = tuple(reversed(ring))
    start = min(range(len(ring)), key=lambda i: ring[i])
    return ring[start:] + ring[:start]


def _bbox_regular(ring: Sequence[Point]) -> bool:
    if len(ring) != 4:
        return False
    box = geometry.bounding_box(ring)
    corners = {(round(x, 9), round(y, 9)) for x, y in box.corners()}
    return {(round(x, 9), round(y, 9)) for x, y in ring} == corners


def derive_room(room_id: str, room_type: str, points: Sequence[Point]) -> Room:
    """Build a room from its polygon, deriving all numeric fields."""
    ring = canonical_ring(points)
    box = geometry.bounding_box(ring)
    return Room(
        id=room_id,
        room_type=room_type,
        floor_polygon=tuple(Vertex(x, y) for x, y in ring),
        area=round1(geometry.shoelace_area(ring)),
        height=round1(box.height),
        width=round1(box.width),
        is_regular=_bbox_regular(ring),
    )


def derive_fields(rooms: Sequence[Tuple[str, str, Sequence[Point]]]) -> Floorplan:
    """Assemble a floorplan from (id, room_type, polygon) triples.

    Fills per-room area (shoelace, one decimal), bounding-box height/width,
    the regularity flag, and the top-level count, type list and total area
    (the rounded sum of the rounded room areas). Edges are left empty; use
    the bubble module to attach adjacency.
    """
    derived = [derive_room(rid, rtype, pts) for rid, rtype, pts in rooms]
    ids = [r.id for r in derived]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate room ids: {dupes}")
    return Floorplan(
        room_count=len(derived),
        total_area=round1(math.fsum(r.area for r in derived)),
        room_types=tuple(r.room_type for r in derived),
        rooms=tuple(derived),
        edges=(),
    )


def with_edges(fp: Floorplan, edges: Iterable[Tuple[str, str]]) -> Floorplan:
    """Copy of ``fp`` with a canonically ordered edge list."""
    known = {r.id for r in fp.rooms}
    normalized = set()
    for a, b in edges:
        if a not in known or b not in known:
            raise ValueError(f"edge references unknown room id ({a!r}, {b!r})")
        if a == b:
            raise ValueError(f"self-loop edge on {a!r}")
        normalized.add((a, b) if a <= b else (b, a))
    return replace(fp, edges=tuple(sorted(normalized)))


# Drift beyond one-decimal rounding between a stated number and its derived
# counterpart. Used by consistency validation, not by parsing.
ROUNDING_TOL = 0.05 + 1e-9


def validate_floorplan(fp: Floorplan) -> List[Diagnostic]:
    """Check the self-consistency invariants of a parsed floorplan.

    Returns diagnostics: errors for violations that break downstream
    processing (duplicate ids), warnings for numeric drift between stated and
    derived values, count mismatches, type-list mismatches and overlaps.
    """
    diags = _Collector()
    ids = [r.id for r in fp.rooms]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        diags.error("$.rooms", f"duplicate room ids: {dupes}")

    if fp.room_count != len(fp.rooms):
        diags.warning("$.room_count", f"states {fp.room_count} rooms but {len(fp.rooms)} are present")

    if sorted(fp.room_types) != sorted(r.room_type for r in fp.rooms):
        diags.warning("$.room_types", "room_types does not match the multiset of room types")

    stated_sum = round1(math.fsum(r.area for r in fp.rooms))
    if abs(stated_sum - fp.total_area) > ROUNDING_TOL:
        diags.warning("$.total_area", f"stated total {fp.total_area} differs from room-area sum {stated_sum}")

    polys = {}
    for i, room in enumerate(fp.rooms):
        path = f"$.rooms[{i}]"
        try:
            area = geometry.shoelace_area(room.points())
            box = geometry.bounding_box(room.points())
        except ValueError as exc:
            diags.error(f"{path}.floor_polygon", str(exc))
            continue
        if geometry.is_rectilinear(room.points()):
            polys[i] = room.points()
        else:
            diags.warning(f"{path}.floor_polygon", "polygon is not rectilinear")
        if abs(area - room.area) > ROUNDING_TOL:
            diags.warning(f"{path}.area", f"stated area {room.area} differs from polygon area {round1(area)}")
        if abs(box.height - room.height) > ROUNDING_TOL:
            diags.warning(f"{path}.height", f"stated height {room.height} differs from bounding box {round1(box.height)}")
        if abs(box.width - room.width) > ROUNDING_TOL:
            diags.warning(f"{path}.width", f"stated width {room.width} differs from bounding box {round1(box.width)}")
        if room.is_regular != _bbox_regular(canonical_ring(room.points())):
            diags.warning(f"{path}.is_regular", "regularity flag disagrees with polygon shape")

    keys = sorted(polys)
    for i_pos, i in enumerate(keys):
        for j in keys[i_pos + 1 :]:
            if geometry.polygons_overlap(polys[i], polys[j]):
                diags.warning("$.rooms", f"rooms {fp.rooms[i].id!r} and {fp.rooms[j].id!r} overlap")
    return diags.items
