"""Raster floorplan conversion: 4-channel images to canonical documents.

Input rasters carry four 8-bit planes per pixel: channel 1 interior boundary,
channel 2 exterior boundary, channel 3 the room-category value, channel 4 an
instance value disambiguating rooms that share a category. Two containers are
supported: PNG with RGBA channel order ch1..ch4, and headerless ``.raw``
files (row-major, 4 bytes per pixel). The conforming dataset size is 256x256
but any size converts.

Pixels are treated as unit cells: pixel (row r, col c) covers the square
[c, c+1] x [r, r+1], so traced polygon areas equal pixel counts exactly and
raster round-trips are lossless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

import numpy as np
from PIL import Image

from . import geometry, model
from .bubble import extract_bubble
from .geometry import Point
from .model import Floorplan

Pixel = Tuple[int, int]  # (row, col)

DEFAULT_ADJACENCY_THRESHOLD = 8.0


@dataclass(frozen=True)
class RasterPlan:
    """A 4-channel raster floorplan, shape (height, width, 4), dtype uint8."""

    planes: np.ndarray

    def __post_init__(self) -> None:
        if self.planes.ndim != 3 or self.planes.shape[2] != 4 or self.planes.dtype != np.uint8:
            raise ValueError(f"expected (H, W, 4) uint8 array, got {self.planes.shape} {self.planes.dtype}")
        self.planes.setflags(write=False)

    @property
    def height(self) -> int:
        return int(self.planes.shape[0])

    @property
    def width(self) -> int:
        return int(self.planes.shape[1])

    def channel(self, index: int) -> np.ndarray:
        """One plane by 1-based channel number."""
        if index not in (1, 2, 3, 4):
            raise ValueError(f"channel index must be 1..4, got {index}")
        return self.planes[:, :, index - 1]

    @classmethod
    def from_array(cls, planes: np.ndarray) -> "RasterPlan":
        return cls(np.array(planes, dtype=np.uint8, copy=True))

    @classmethod
    def from_png(cls, path: str) -> "RasterPlan":
        with Image.open(path) as img:
            if img.mode != "RGBA":
                raise ValueError(f"{path}: expected RGBA image (ch1..ch4), got mode {img.mode}")
            return cls.from_array(np.asarray(img))

    def to_png(self, path: str) -> None:
        Image.fromarray(np.asarray(self.planes), "RGBA").save(path, format="PNG")

    @classmethod
    def from_raw(cls, path: str, size: Optional[Tuple[int, int]] = None) -> "RasterPlan":
        """Load a headerless row-major 4-bytes-per-pixel file.

        Without an explicit (height, width) the file must be a square raster.
        """
        data = np.fromfile(path, dtype=np.uint8)
        if size is None:
            side = math.isqrt(data.size // 4)
            if side * side * 4 != data.size:
                raise ValueError(f"{path}: cannot infer raster size from {data.size} bytes")
            size = (side, side)
        h, w = size
        if data.size != h * w * 4:
            raise ValueError(f"{path}: expected {h * w * 4} bytes for {h}x{w}x4, got {data.size}")
        return cls.from_array(data.reshape(h, w, 4))

    def to_raw(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.planes.tobytes())


@dataclass(frozen=True)
class CategoryMap:
    """Mapping from channel-3 values to room type names.

    Values listed in ``non_room`` (walls, exterior, doors) are excluded from
    room extraction. Every other value occurring in an input raster must be
    mapped, otherwise conversion fails naming the offending value.
    """

    values: Mapping[int, str]
    non_room: FrozenSet[int] = frozenset()

    @classmethod
    def from_obj(cls, obj: Mapping) -> "CategoryMap":
        values = {int(k): str(v) for k, v in obj.get("values", {}).items()}
        non_room = frozenset(int(v) for v in obj.get("non_room", []))
        return cls(values=values, non_room=non_room)

    @classmethod
    def from_json(cls, path: str) -> "CategoryMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_obj(json.load(fh))

    @classmethod
    def load_default(cls) -> "CategoryMap":
        """The bundled category map following common RPLAN conventions.

        Shipped for convenience only; the upstream dataset does not publish a
        normative table, so always prefer an explicit map when available.
        """
        text = resources.files("floorbench.data").joinpath("rplan_categories.json").read_text("utf-8")
        return cls.from_obj(json.loads(text))

    def room_type_for(self, value: int) -> str:
        try:
            return self.values[value]
        except KeyError:
            raise ValueError(f"room category value {value} missing from category map") from None


@dataclass(frozen=True)
class RoomMask:
    """One room instance: its (ch3, ch4) key and its pixel set."""

    key: Tuple[int, int]
    pixels: FrozenSet[Pixel]

    @property
    def category(self) -> int:
        return self.key[0]

    @property
    def first_pixel(self) -> Pixel:
        return min(self.pixels)


def _components(pixels: Set[Pixel]) -> List[Set[Pixel]]:
    """Split a pixel set into 4-connected components, in scan order."""
    remaining = set(pixels)
    out: List[Set[Pixel]] = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        frontier = [seed]
        remaining.discard(seed)
        while frontier:
            r, c = frontier.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in remaining:
                    remaining.discard(nb)
                    comp.add(nb)
                    frontier.append(nb)
        out.append(comp)
    return sorted(out, key=min)


def extract_room_masks(raster: RasterPlan, cmap: CategoryMap) -> List[RoomMask]:
    """Collect one mask per 4-connected component of each (ch3, ch4) key.

    Non-room category values are skipped; unmapped values raise. Masks come
    back ordered by their first pixel in raster scan order.
    """
    ch3 = raster.channel(3)
    ch4 = raster.channel(4)
    present = np.unique(ch3)
    for value in present:
        v = int(value)
        if v not in cmap.non_room:
            cmap.room_type_for(v)  # raises with the offending value

    groups: Dict[Tuple[int, int], Set[Pixel]] = {}
    rows, cols = np.nonzero(~np.isin(ch3, sorted(cmap.non_room)))
    for r, c in zip(rows.tolist(), cols.tolist()):
        key = (int(ch3[r, c]), int(ch4[r, c]))
        groups.setdefault(key, set()).add((r, c))

    masks = [
        RoomMask(key=key, pixels=frozenset(comp))
        for key, pixels in groups.items()
        for comp in _components(pixels)
    ]
    return sorted(masks, key=lambda m: m.first_pixel)


def _has_hole(pixels: FrozenSet[Pixel]) -> bool:
    """True when background cells are enclosed by the mask.

    Flood-fills the complement of the mask inside a 1-cell margin around its
    bounding box; anything unreached is enclosed.
    """
    rows = [p[0] for p in pixels]
    cols = [p[1] for p in pixels]
    r0, r1 = min(rows) - 1, max(rows) + 1
    c0, c1 = min(cols) - 1, max(cols) + 1
    seen = {(r0, c0)}
    frontier = [(r0, c0)]
    while frontier:
        r, c = frontier.pop()
        for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if r0 <= nb[0] <= r1 and c0 <= nb[1] <= c1 and nb not in seen and nb not in pixels:
                seen.add(nb)
                frontier.append(nb)
    background = (r1 - r0 + 1) * (c1 - c0 + 1) - len(pixels)
    return len(seen) != background


def trace_perimeter(mask: RoomMask) -> Tuple[Point, ...]:
    """Trace the cell-boundary outline of a mask into a vertex ring.

    Starts at the top-left boundary corner and follows the boundary with the
    mask kept on the same side throughout, emitting one vertex per direction
    change. The resulting polygon covers exactly the mask's unit cells, so
    its area equals the pixel count. Masks with interior holes are rejected:
    rooms are simply connected.
    """
    if not mask.pixels:
        raise ValueError("empty mask")
    if _has_hole(mask.pixels):
        raise ValueError("room mask has an interior hole")

    pixels = mask.pixels
    # Directed boundary edges on the lattice; (x, y) = (col, row).
    step: Dict[Point, Point] = {}
    for r, c in pixels:
        if (r, c - 1) not in pixels:
            step[(c, r)] = (c, r + 1)
        if (r + 1, c) not in pixels:
            step[(c, r + 1)] = (c + 1, r + 1)
        if (r, c + 1) not in pixels:
            step[(c + 1, r + 1)] = (c + 1, r)
        if (r - 1, c) not in pixels:
            step[(c + 1, r)] = (c, r)

    top_r, top_c = min(pixels, key=lambda p: (p[0], p[1]))
    start: Point = (float(top_c), float(top_r))
    start_i = (top_c, top_r)

    ring: List[Point] = []
    pos = start_i
    heading = (0, 0)
    for _ in range(len(step) + 1):
        nxt = step[pos]
        direction = (nxt[0] - pos[0], nxt[1] - pos[1])
        if direction != heading:
            ring.append((float(pos[0]), float(pos[1])))
            heading = direction
        pos = nxt
        if pos == start_i:
            break
    else:
        raise ValueError("perimeter trace did not close; mask is not simply connected")

    return geometry.simplify_collinear(ring)


def convert_raster(
    raster: RasterPlan,
    cmap: CategoryMap,
    adjacency_threshold: float = DEFAULT_ADJACENCY_THRESHOLD,
) -> Floorplan:
    """Convert a raster into a canonical floorplan.

    Rooms get ids ``room|k`` numbered by the scan order of their first pixel;
    adjacency edges connect rooms whose boundaries lie within the threshold
    (inclusive), 8 pixels by convention for raster sources.
    """
    masks = extract_room_masks(raster, cmap)
    rooms = []
    for k, mask in enumerate(masks):
        ring = trace_perimeter(mask)
        rooms.append((f"room|{k}", cmap.room_type_for(mask.category), ring))
    fp = model.derive_fields(rooms)
    diagram = extract_bubble(fp, adjacency_threshold)
    return model.with_edges(fp, diagram.edges)


def rasterize_floorplan(
    fp: Floorplan,
    cmap: CategoryMap,
    shape: Optional[Tuple[int, int]] = None,
    background: Optional[int] = None,
) -> RasterPlan:
    """Render a floorplan with integer-grid polygons back into a raster.

    The inverse of :func:`convert_raster` for true data: room polygons must
    lie on the unit-cell lattice and be disjoint. Channel 3 takes the
    smallest category value mapping to each room's type, channel 4 the room
    index, channels 1 and 2 stay zero. Intended for round-trip checks and
    synthetic fixture generation.
    """
    by_type: Dict[str, int] = {}
    for value in sorted(cmap.values):
        by_type.setdefault(cmap.values[value], value)
    if background is None:
        if not cmap.non_room:
            raise ValueError("category map has no non-room value to use as background")
        background = min(cmap.non_room)

    if shape is None:
        max_x = max((v.x for room in fp.rooms for v in room.floor_polygon), default=0.0)
        max_y = max((v.y for room in fp.rooms for v in room.floor_polygon), default=0.0)
        shape = (int(round(max_y)) + 1, int(round(max_x)) + 1)
    planes = np.zeros((shape[0], shape[1], 4), dtype=np.uint8)
    planes[:, :, 2] = background

    for idx, room in enumerate(fp.rooms):
        if room.room_type not in by_type:
            raise ValueError(f"room type {room.room_type!r} missing from category map")
        value = by_type[room.room_type]
        for rect in geometry.rect_decompose(room.points()):
            coords = (rect.x0, rect.y0, rect.x1, rect.y1)
            snapped = [int(round(c)) for c in coords]
            if any(abs(c - s) > 1e-9 for c, s in zip(coords, snapped)):
                raise ValueError(f"room {room.id!r} is not on the integer grid")
            x0, y0, x1, y1 = snapped
            planes[y0:y1, x0:x1, 2] = value
            planes[y0:y1, x0:x1, 3] = idx
    return RasterPlan.from_array(planes)
