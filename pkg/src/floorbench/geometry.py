"""Polygon and rectangle primitives for axis-aligned (rectilinear) floorplans.

All functions operate on vertex rings given as sequences of ``(x, y)`` pairs.
Rings are implicitly closed: the last vertex connects back to the first, and
the first vertex is not repeated at the end. All inputs are expected to be
simple polygons; rectilinear-only operations verify axis alignment and raise
``ValueError`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

Point = Tuple[float, float]

# Absolute tolerance for collinearity, rectilinearity and zero-area tests.
EPS = 1e-9


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with positive area (x0 < x1, y0 < y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rectangle: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners(self) -> List[Point]:
        return [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ]


def _as_points(ring: Iterable[Sequence[float]]) -> List[Point]:
    pts = [(float(p[0]), float(p[1])) for p in ring]
    for x, y in pts:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinate in polygon: ({x}, {y})")
    return pts


def signed_area(ring: Sequence[Point]) -> float:
    """Signed shoelace area; positive for counterclockwise rings."""
    pts = _as_points(ring)
    if len(pts) < 3:
        raise ValueError(f"polygon needs at least 3 vertices, got {len(pts)}")
    acc = 0.0
    for i, (x0, y0) in enumerate(pts):
        x1, y1 = pts[(i + 1) % len(pts)]
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def shoelace_area(ring: Sequence[Point]) -> float:
    """Absolute polygon area via the shoelace formula.

    Orientation-independent and exact up to float rounding for grid-aligned
    coordinates.
    """
    return abs(signed_area(ring))


def bounding_box(ring: Sequence[Point]) -> Rect:
    """Tight axis-aligned bounding box of a vertex ring."""
    pts = _as_points(ring)
    if not pts:
        raise ValueError("empty polygon")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return Rect(min(xs), min(ys), max(xs), max(ys))


def _on_segment(p: Point, a: Point, b: Point, tol: float = EPS) -> bool:
    """True when p lies on the closed segment a-b (within tol)."""
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > tol:
        return False
    return (
        min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol
        and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol
    )


def simplify_collinear(ring: Sequence[Point], tol: float = EPS) -> Tuple[Point, ...]:
    """Drop redundant ring vertices: duplicates and points on the segment
    joining their neighbours.

    The polygon's area is unchanged. Raises ``ValueError`` when fewer than 3
    vertices survive (fully collinear or otherwise degenerate input).
    """
    pts = _as_points(ring)
    # Remove consecutive duplicates first (including the wrap-around pair).
    dedup: List[Point] = []
    for p in pts:
        if not dedup or abs(p[0] - dedup[-1][0]) > tol or abs(p[1] - dedup[-1][1]) > tol:
            dedup.append(p)
    while len(dedup) > 1 and abs(dedup[0][0] - dedup[-1][0]) <= tol and abs(dedup[0][1] - dedup[-1][1]) <= tol:
        dedup.pop()

    changed = True
    while changed and len(dedup) >= 3:
        changed = False
        for i in range(len(dedup)):
            prev = dedup[i - 1]
            cur = dedup[i]
            nxt = dedup[(i + 1) % len(dedup)]
            if _on_segment(cur, prev, nxt, tol):
                del dedup[i]
                changed = True
                break
    if len(dedup) < 3:
        raise ValueError("polygon degenerates to fewer than 3 vertices")
    return tuple(dedup)


def is_rectilinear(ring: Sequence[Point], tol: float = EPS) -> bool:
    """True when every edge of the ring is axis-aligned."""
    pts = _as_points(ring)
    if len(pts) < 3:
        return False
    for i, (x0, y0) in enumerate(pts):
        x1, y1 = pts[(i + 1) % len(pts)]
        if abs(x1 - x0) > tol and abs(y1 - y0) > tol:
            return False
    return True


def _require_rectilinear(ring: Sequence[Point]) -> List[Point]:
    pts = _as_points(ring)
    if not is_rectilinear(pts):
        raise ValueError("polygon is not rectilinear (axis-aligned edges required)")
    return pts


def rect_decompose(ring: Sequence[Point]) -> List[Rect]:
    """Split a rectilinear polygon into disjoint rectangles covering it.

    Uses a vertical slab sweep: within each span between consecutive distinct
    x coordinates, covered y intervals are delimited by the horizontal edges
    spanning the slab. The rectangle areas sum to the shoelace area.
    """
    pts = _require_rectilinear(ring)
    n = len(pts)
    xs = sorted({p[0] for p in pts})
    # Horizontal edges as (y, xmin, xmax).
    hedges = []
    for i in range(n):
        (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % n]
        if abs(y1 - y0) <= EPS and abs(x1 - x0) > EPS:
            hedges.append((y0, min(x0, x1), max(x0, x1)))
    rects: List[Rect] = []
    for xa, xb in zip(xs, xs[1:]):
        span_ys = sorted(y for y, lo, hi in hedges if lo <= xa + EPS and hi >= xb - EPS)
        if len(span_ys) % 2 != 0:
            raise ValueError("inconsistent rectilinear polygon (odd edge parity)")
        for ya, yb in zip(span_ys[0::2], span_ys[1::2]):
            if yb - ya > EPS:
                rects.append(Rect(xa, ya, xb, yb))
    return rects


def _rect_overlap_area(a: Rect, b: Rect) -> float:
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def polygons_overlap(a: Sequence[Point], b: Sequence[Point]) -> bool:
    """True when two rectilinear polygons intersect with positive area.

    Shared edges and corners do not count as overlap.
    """
    ra = rect_decompose(a)
    rb = rect_decompose(b)
    total = 0.0
    for p in ra:
        for q in rb:
            total += _rect_overlap_area(p, q)
            if total > EPS:
                return True
    return total > EPS


def _interval_gap(lo0: float, hi0: float, lo1: float, hi1: float) -> float:
    return max(0.0, max(lo1 - hi0, lo0 - hi1))


def boundary_manhattan_distance(a: Sequence[Point], b: Sequence[Point]) -> float:
    """Minimum Manhattan distance between the boundaries of two rectilinear
    polygons.

    For axis-aligned segments the minimum over point pairs decomposes into
    independent x and y interval gaps, so the exact value is the minimum of
    gap(x ranges) + gap(y ranges) over all segment pairs. Touching polygons
    (shared edge or corner) yield 0.
    """
    pa = _require_rectilinear(a)
    pb = _require_rectilinear(b)
    ea = [(pa[i], pa[(i + 1) % len(pa)]) for i in range(len(pa))]
    eb = [(pb[i], pb[(i + 1) % len(pb)]) for i in range(len(pb))]
    best = math.inf
    for (a0, a1) in ea:
        ax0, ax1 = min(a0[0], a1[0]), max(a0[0], a1[0])
        ay0, ay1 = min(a0[1], a1[1]), max(a0[1], a1[1])
        for (b0, b1) in eb:
            bx0, bx1 = min(b0[0], b1[0]), max(b0[0], b1[0])
            by0, by1 = min(b0[1], b1[1]), max(b0[1], b1[1])
            d = _interval_gap(ax0, ax1, bx0, bx1) + _interval_gap(ay0, ay1, by0, by1)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best
