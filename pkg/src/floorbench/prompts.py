"""Constraint strings, adjacency strings, masking regimes and full prompts.

The generation prompt has three text layers:

* the constraint string, a single-quoted dict literal mirroring the canonical
  field names and order (``{'room_count': 4, 'total_area': 146.8, ...}``);
* the adjacency string, comma-separated ``(Type/"id", Type/"id")`` tuples in
  sorted id order;
* the chat template wrapping both with configurable header tokens and a fixed
  instruction phrase.

Every masking and selection step is a pure function of its inputs and a seed,
so identical seeds always give identical prompts.
"""

from __future__ import annotations

import ast
import enum
import hashlib
import random
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .bubble import BubbleDiagram, extract_bubble
from .model import Floorplan, extract_json_object, json_number

DEFAULT_SEED = 12345


class PromptType(str, enum.Enum):
    SPECIFIC = "specific"
    ALL_ROOM_AREA = "all-room-area"
    PARTIAL_ROOM_AREA = "partial-room-area"
    TOTAL_AREA = "total-area"


@dataclass(frozen=True)
class RoomConstraint:
    """Constraints on one room; absent fields are unconstrained."""

    id: Optional[str] = None
    room_type: Optional[str] = None
    area: Optional[float] = None
    height: Optional[float] = None
    width: Optional[float] = None

    def is_empty(self) -> bool:
        return all(v is None for v in (self.id, self.room_type, self.area, self.height, self.width))

    def triple(self) -> "RoomConstraint":
        """The (area, id, room_type) projection used by preset masking."""
        return RoomConstraint(id=self.id, room_type=self.room_type, area=self.area)


@dataclass(frozen=True)
class ConstraintSet:
    """The floorplan attributes exposed in a prompt, possibly masked."""

    room_count: Optional[int] = None
    total_area: Optional[float] = None
    room_types: Optional[Tuple[str, ...]] = None
    rooms: Tuple[RoomConstraint, ...] = ()

    def is_empty(self) -> bool:
        return (
            self.room_count is None
            and self.total_area is None
            and self.room_types is None
            and not self.rooms
        )


@dataclass(frozen=True)
class PromptTemplate:
    """Chat header tokens; defaults follow the instruct-style convention."""

    system_header: str = "<|start_header_id|>system<|end_header_id|>"
    user_header: str = "<|start_header_id|>user<|end_header_id|>"
    assistant_header: str = "<|start_header_id|>assistant<|end_header_id|>"
    eot: str = "<|eot_id|>"

    @classmethod
    def from_obj(cls, obj: Mapping[str, str]) -> "PromptTemplate":
        known = {"system_header", "user_header", "assistant_header", "eot"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown template keys: {sorted(unknown)}")
        return cls(**obj)


DEFAULT_TEMPLATE = PromptTemplate()

_INSTRUCTION_OPEN = (
    "you are to generate a floor plan in a JSON structure where each room is "
    "defined by polygon vertices, make sure to not overlap the polygons."
)
_INSTRUCTION_ADJACENCY = (
    "you have to satisfy the adjacency constraints given as pairs of "
    "neighboring rooms; two connecting rooms, room1 and room2, are presented "
    'as (room1_type/"room1_id", room2_type/"room2_id").'
)
_INSTRUCTION_CLOSE = (
    "you have to also match the specifications passed by the user in a JSON "
    "structure when they exist. when room area and total area requirements "
    "exist, make sure the polygon areas add up to the required number."
)


@dataclass(frozen=True)
class PromptSpec:
    constraint_set: ConstraintSet
    adjacency: Optional[BubbleDiagram]
    prompt_type: PromptType
    seed: int


def full_constraints(fp: Floorplan) -> ConstraintSet:
    """Every promptable attribute of a floorplan."""
    return ConstraintSet(
        room_count=fp.room_count,
        total_area=fp.total_area,
        room_types=tuple(fp.room_types),
        rooms=tuple(
            RoomConstraint(id=r.id, room_type=r.room_type, area=r.area, height=r.height, width=r.width)
            for r in fp.rooms
        ),
    )


def _literal(value: Any) -> str:
    if isinstance(value, str):
        return repr(value)
    if isinstance(value, (int, float)):
        return repr(json_number(value))
    raise TypeError(f"unsupported constraint value: {value!r}")


def _room_entry_string(rc: RoomConstraint) -> str:
    parts = []
    for name in ("area", "height", "id", "room_type", "width"):
        value = getattr(rc, name)
        if value is not None:
            parts.append(f"'{name}': {_literal(value)}")
    return "{" + ", ".join(parts) + "}"


def build_constraint_string(cs: ConstraintSet) -> str:
    """Render a constraint set as the single-quoted specifications block."""
    if cs.is_empty():
        raise ValueError("constraint set is empty; at least one constraint is required")
    parts: List[str] = []
    if cs.room_count is not None:
        parts.append(f"'room_count': {cs.room_count}")
    if cs.total_area is not None:
        parts.append(f"'total_area': {_literal(cs.total_area)}")
    if cs.room_types is not None:
        types = ", ".join(repr(t) for t in cs.room_types)
        parts.append(f"'room_types': [{types}]")
    if cs.rooms:
        entries = ", ".join(_room_entry_string(rc) for rc in cs.rooms)
        parts.append(f"'rooms': [{entries}]")
    return "{" + ", ".join(parts) + "}"


def build_adjacency_string(bd: BubbleDiagram) -> str:
    """Render adjacency edges as ``(Type/"id", Type/"id")`` tuples.

    Edges are sorted by their id pair so the output is deterministic; an
    edgeless diagram yields an empty string.
    """
    parts = []
    for a, b in bd.sorted_edges():
        parts.append(f'({bd.node_type(a)}/"{a}", {bd.node_type(b)}/"{b}")')
    return ", ".join(parts)


def render_full_prompt(ps: PromptSpec, template: PromptTemplate = DEFAULT_TEMPLATE) -> str:
    """Emit the complete chat prompt for a prompt spec.

    When adjacency edges are present the system instruction includes the
    adjacency sentence and the user turn opens with the adjacency clause;
    otherwise both are omitted.
    """
    adjacency = ""
    if ps.adjacency is not None and ps.adjacency.edges:
        adjacency = build_adjacency_string(ps.adjacency)
    sentences = [_INSTRUCTION_OPEN]
    if adjacency:
        sentences.append(_INSTRUCTION_ADJACENCY)
    sentences.append(_INSTRUCTION_CLOSE)
    instruction = " ".join(sentences)

    user_line = ""
    if adjacency:
        user_line += f"adjacency constraints: {adjacency}. "
    user_line += f"specifications: {build_constraint_string(ps.constraint_set)}"

    return (
        f"{template.system_header}\n"
        f"{instruction}\n"
        f"{template.eot}{template.user_header}\n"
        f"{user_line}\n"
        f"{template.eot}{template.assistant_header}"
    )


def _mask_items(cs: ConstraintSet) -> List[str]:
    items = [name for name in ("room_count", "total_area", "room_types") if getattr(cs, name) is not None]
    items.extend(f"rooms[{i}]" for i in range(len(cs.rooms)))
    return items


def apply_random_mask(cs: ConstraintSet, seed: int) -> ConstraintSet:
    """Keep each constraint independently with probability one half.

    Top-level constraints and individual room entries are masked as units, in
    a fixed order (room_count, total_area, room_types, then room entries), so
    the outcome is a pure function of the seed. The rooms list is dropped
    only when every entry is masked. When everything is masked, one uniformly
    chosen constraint is restored so the set is never empty.
    """
    items = _mask_items(cs)
    if not items:
        raise ValueError("constraint set is empty; nothing to mask")
    rng = random.Random(seed)
    kept = {name for name in items if rng.random() < 0.5}
    if not kept:
        kept = {items[rng.randrange(len(items))]}
    return ConstraintSet(
        room_count=cs.room_count if "room_count" in kept else None,
        total_area=cs.total_area if "total_area" in kept else None,
        room_types=cs.room_types if "room_types" in kept else None,
        rooms=tuple(rc for i, rc in enumerate(cs.rooms) if f"rooms[{i}]" in kept),
    )


def apply_preset_mask(cs: ConstraintSet, seed: int) -> ConstraintSet:
    """Reduce a full constraint set to one of four fixed attribute presets.

    The first draw from the seeded generator picks the preset uniformly:

    1. room_count, room_types, total_area
    2. preset 1 plus a partial room list
    3. room_count, room_types plus a partial room list
    4. room_count, room_types plus the full room list

    Room entries in presets 2-4 carry only (area, id, room_type); a partial
    list keeps each entry independently with probability one half.
    """
    rng = random.Random(seed)
    preset = rng.randrange(4) + 1
    triples = tuple(rc.triple() for rc in cs.rooms)

    def partial() -> Tuple[RoomConstraint, ...]:
        return tuple(rc for rc in triples if rng.random() < 0.5)

    if preset == 1:
        return ConstraintSet(room_count=cs.room_count, total_area=cs.total_area, room_types=cs.room_types)
    if preset == 2:
        return ConstraintSet(
            room_count=cs.room_count,
            total_area=cs.total_area,
            room_types=cs.room_types,
            rooms=partial(),
        )
    if preset == 3:
        return ConstraintSet(room_count=cs.room_count, room_types=cs.room_types, rooms=partial())
    return ConstraintSet(room_count=cs.room_count, room_types=cs.room_types, rooms=triples)


def make_generation_prompt(
    fp: Floorplan,
    prompt_type: PromptType,
    seed: int,
    with_bd: bool = False,
    bd_threshold: float = 2.0,
) -> PromptSpec:
    """Build the constraint set for one of the four generation prompt types.

    Specific uses every available constraint. AllRoomArea passes the (area,
    id, room_type) triple of every room and nothing else, the total being
    inferable. PartialRoomArea passes the total area plus a seeded nonempty
    proper subset of room triples (a single-room plan degenerates to that one
    room). TotalArea passes only the total area.
    """
    full = full_constraints(fp)
    triples = tuple(rc.triple() for rc in full.rooms)
    prompt_type = PromptType(prompt_type)
    if prompt_type is PromptType.SPECIFIC:
        cs = full
    elif prompt_type is PromptType.ALL_ROOM_AREA:
        cs = ConstraintSet(rooms=triples)
    elif prompt_type is PromptType.PARTIAL_ROOM_AREA:
        rng = random.Random(seed)
        n = len(triples)
        if n <= 1:
            chosen = triples
        else:
            k = rng.randint(1, n - 1)
            indices = sorted(rng.sample(range(n), k))
            chosen = tuple(triples[i] for i in indices)
        cs = ConstraintSet(total_area=full.total_area, rooms=chosen)
    elif prompt_type is PromptType.TOTAL_AREA:
        cs = ConstraintSet(total_area=full.total_area)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown prompt type: {prompt_type}")

    adjacency = extract_bubble(fp, bd_threshold) if with_bd else None
    return PromptSpec(constraint_set=cs, adjacency=adjacency, prompt_type=prompt_type, seed=seed)


def derive_seed(global_seed: int, index: int) -> int:
    """Per-item seed from the run seed and the item index, hash-mixed so that
    neighbouring indices do not produce correlated generator streams."""
    digest = hashlib.sha256(f"{global_seed}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


_ROOM_KEYS = {"area", "height", "id", "room_type", "width"}
_TUPLE_RE = re.compile(r'\(\s*([^/()]+?)\s*/\s*"([^"]+)"\s*,\s*([^/()]+?)\s*/\s*"([^"]+)"\s*\)')


def parse_constraint_string(text: str) -> ConstraintSet:
    """Recover a constraint set from a specifications block.

    Accepts the single-quoted dict-literal form emitted by
    :func:`build_constraint_string` (and plain JSON). Inverse of the builder:
    parse(build(cs)) equals cs.
    """
    region = extract_json_object(text)
    if region is None:
        raise ValueError("no constraint block found")
    obj = ast.literal_eval(region)
    if not isinstance(obj, dict):
        raise ValueError("constraint block is not an object")
    unknown = set(obj) - {"room_count", "total_area", "room_types", "rooms"}
    if unknown:
        raise ValueError(f"unknown constraint keys: {sorted(unknown)}")
    rooms = []
    for entry in obj.get("rooms", ()):
        bad = set(entry) - _ROOM_KEYS
        if bad:
            raise ValueError(f"unknown room constraint keys: {sorted(bad)}")
        rooms.append(RoomConstraint(**{k: entry[k] for k in _ROOM_KEYS & set(entry)}))
    room_types = obj.get("room_types")
    cs = ConstraintSet(
        room_count=obj.get("room_count"),
        total_area=obj.get("total_area"),
        room_types=tuple(room_types) if room_types is not None else None,
        rooms=tuple(rooms),
    )
    if cs.is_empty():
        raise ValueError("constraint block is empty")
    return cs


def parse_adjacency_string(text: str) -> Optional[BubbleDiagram]:
    """Recover a bubble diagram from an adjacency clause.

    Nodes are reconstructed from the edge tuples, so rooms without any edge
    are not represented. Returns None when no tuples are present.
    """
    matches = _TUPLE_RE.findall(text)
    if not matches:
        return None
    nodes: Dict[str, str] = {}
    edges = []
    for type_a, id_a, type_b, id_b in matches:
        nodes.setdefault(id_a, type_a.strip())
        nodes.setdefault(id_b, type_b.strip())
        edges.append((id_a, id_b))
    return BubbleDiagram.build(sorted(nodes.items()), edges)


def parse_prompt(text: str) -> Tuple[ConstraintSet, Optional[BubbleDiagram]]:
    """Split a rendered prompt back into its constraint set and diagram."""
    marker = "specifications:"
    pos = text.find(marker)
    if pos < 0:
        raise ValueError("prompt has no specifications clause")
    cs = parse_constraint_string(text[pos + len(marker) :])
    bd = None
    adj_marker = "adjacency constraints:"
    apos = text.find(adj_marker)
    if 0 <= apos < pos:
        bd = parse_adjacency_string(text[apos + len(adj_marker) : pos])
    return cs, bd
