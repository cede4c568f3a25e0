"""Deterministic SVG rendering of floorplans for figures.

Rooms are drawn as filled polygons colored by room type with the room id as
a label; an optional bubble-diagram overlay places a node at each room
centroid and a line per adjacency edge. Rendering the same floorplan twice
produces identical bytes: colors come from a fixed palette keyed by a stable
hash of the type name, and no timestamps or random state enter the output.
"""

from __future__ import annotations

import hashlib
from typing import Dict, Optional, Sequence

from . import geometry
from .bubble import extract_bubble
from .geometry import Point
from .model import Floorplan

_PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
)

_WELL_KNOWN = {
    "LivingRoom": "#80b1d3",
    "Bedroom": "#8dd3c7",
    "Kitchen": "#fdb462",
    "Bathroom": "#bebada",
    "DiningRoom": "#b3de69",
    "Balcony": "#ccebc5",
    "Storage": "#d9d9d9",
}


def color_for_type(room_type: str) -> str:
    """Stable room-type color: fixed for common types, hashed otherwise."""
    if room_type in _WELL_KNOWN:
        return _WELL_KNOWN[room_type]
    digest = hashlib.sha256(room_type.encode("utf-8")).digest()
    return _PALETTE[digest[0] % len(_PALETTE)]


def _fmt(value: float) -> str:
    text = f"{value:.2f}"
    return text.rstrip("0").rstrip(".") if "." in text else text


def centroid(ring: Sequence[Point]) -> Point:
    """Area-weighted polygon centroid."""
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for i, (x0, y0) in enumerate(ring):
        x1, y1 = ring[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        area2 += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if abs(area2) < geometry.EPS:
        box = geometry.bounding_box(ring)
        return ((box.x0 + box.x1) / 2.0, (box.y0 + box.y1) / 2.0)
    return (cx / (3.0 * area2), cy / (3.0 * area2))


def render_svg(
    fp: Floorplan,
    with_bubble: bool = False,
    threshold: float = 2.0,
    scale: float = 40.0,
    seed: Optional[int] = None,
) -> str:
    """Render one floorplan as an SVG document string.

    The drawing is scaled so one length unit maps to ``scale`` SVG pixels.
    With ``with_bubble`` the adjacency diagram extracted at ``threshold`` is
    drawn over the rooms. A seed, when given, is recorded in a header comment
    so artifacts identify the run configuration that produced them.
    """
    margin = 0.5
    if fp.rooms:
        boxes = [geometry.bounding_box(r.points()) for r in fp.rooms]
        x0 = min(b.x0 for b in boxes) - margin
        y0 = min(b.y0 for b in boxes) - margin
        x1 = max(b.x1 for b in boxes) + margin
        y1 = max(b.y1 for b in boxes) + margin
    else:
        x0, y0, x1, y1 = 0.0, 0.0, 1.0, 1.0

    def sx(x: float) -> str:
        return _fmt((x - x0) * scale)

    def sy(y: float) -> str:
        return _fmt((y - y0) * scale)

    width = _fmt((x1 - x0) * scale)
    height = _fmt((y1 - y0) * scale)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if seed is not None:
        lines.append(f"<!-- seed: {seed} -->")

    font = max(8.0, scale * 0.3)
    for room in fp.rooms:
        pts = " ".join(f"{sx(x)},{sy(y)}" for x, y in room.points())
        lines.append(
            f'<polygon points="{pts}" fill="{color_for_type(room.room_type)}" '
            'stroke="#333333" stroke-width="2"/>'
        )
    for room in fp.rooms:
        cx, cy = centroid(room.points())
        lines.append(
            f'<text x="{sx(cx)}" y="{sy(cy)}" font-size="{_fmt(font)}" '
            f'font-family="sans-serif" text-anchor="middle">{room.id}</text>'
        )

    if with_bubble and fp.rooms:
        diagram = extract_bubble(fp, threshold)
        centers: Dict[str, Point] = {r.id: centroid(r.points()) for r in fp.rooms}
        for a, b in diagram.sorted_edges():
            (ax, ay), (bx, by) = centers[a], centers[b]
            lines.append(
                f'<line x1="{sx(ax)}" y1="{sy(ay)}" x2="{sx(bx)}" y2="{sy(by)}" '
                'stroke="#d62728" stroke-width="3" class="bubble-edge"/>'
            )
        radius = _fmt(scale * 0.18)
        for room in fp.rooms:
            cx, cy = centers[room.id]
            lines.append(
                f'<circle cx="{sx(cx)}" cy="{sy(cy)}" r="{radius}" '
                f'fill="{color_for_type(room.room_type)}" stroke="#d62728" '
                'stroke-width="2" class="bubble-node"/>'
            )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
