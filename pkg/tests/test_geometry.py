from __future__ import annotations

import math
import random

import pytest

from floorbench.geometry import (
    Rect,
    boundary_manhattan_distance,
    bounding_box,
    polygons_overlap,
    rect_decompose,
    shoelace_area,
    simplify_collinear,
)

from synth import blob_ring, random_blob

UNIT_SQUARE = [(0, 0), (0, 1), (1, 1), (1, 0)]
# The L-shaped kitchen from the five-room sample plan.
L_ROOM = [(12.8, 4.3), (12.8, 10.6), (17.1, 10.6), (17.1, 0), (14.9, 0), (14.9, 4.3)]
RECT_ROOM_5 = [(0, 6.4), (0, 10.6), (6.4, 10.6), (6.4, 6.4)]


def square(x0: float, y0: float, x1: float, y1: float):
    return [(x0, y0), (x0, y1), (x1, y1), (x1, y0)]


class TestShoelace:
    def test_unit_square(self):
        assert shoelace_area(UNIT_SQUARE) == 1.0

    def test_l_room(self):
        # Oracle: rectangle decomposition by hand, 2.2*10.6 + 2.1*6.3.
        assert shoelace_area(L_ROOM) == pytest.approx(36.55, abs=1e-9)

    def test_rectangle_room(self):
        assert shoelace_area(RECT_ROOM_5) == pytest.approx(26.88, abs=1e-9)

    def test_orientation_and_rotation_invariance(self):
        base = shoelace_area(L_ROOM)
        assert shoelace_area(list(reversed(L_ROOM))) == pytest.approx(base, abs=1e-12)
        for k in range(len(L_ROOM)):
            rotated = L_ROOM[k:] + L_ROOM[:k]
            assert shoelace_area(rotated) == pytest.approx(base, abs=1e-12)
        shifted = [(x + 3.7, y - 1.2) for x, y in L_ROOM]
        assert shoelace_area(shifted) == pytest.approx(base, abs=1e-9)

    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            shoelace_area([(0, 0), (1, 1)])


class TestBoundingBox:
    def test_sample_rectangle(self):
        box = bounding_box(RECT_ROOM_5)
        assert box.width == pytest.approx(6.4)
        assert box.height == pytest.approx(4.2)

    def test_unit_square(self):
        box = bounding_box(UNIT_SQUARE)
        assert (box.width, box.height) == (1.0, 1.0)

    def test_l_room(self):
        box = bounding_box(L_ROOM)
        assert box.width == pytest.approx(4.3)
        assert box.height == pytest.approx(10.6)


class TestSimplifyCollinear:
    def test_removes_mid_edge_point(self):
        ring = [(0, 0), (0, 1), (0, 2), (2, 2), (2, 0)]
        assert simplify_collinear(ring) == ((0, 0), (0, 2), (2, 2), (2, 0))

    def test_minimal_square_unchanged(self):
        assert simplify_collinear(UNIT_SQUARE) == tuple((float(x), float(y)) for x, y in UNIT_SQUARE)

    def test_all_collinear_is_degenerate(self):
        with pytest.raises(ValueError):
            simplify_collinear([(0, 0), (1, 0), (2, 0), (3, 0)])

    def test_consecutive_duplicates_removed(self):
        ring = [(0, 0), (0, 0), (0, 1), (1, 1), (1, 0), (1, 0)]
        assert simplify_collinear(ring) == ((0, 0), (0, 1), (1, 1), (1, 0))

    def test_area_preserved(self):
        ring = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)]
        assert shoelace_area(simplify_collinear(ring)) == shoelace_area(ring)


class TestRectDecompose:
    def test_l_room_two_rects(self):
        rects = rect_decompose(L_ROOM)
        areas = sorted(round(r.area, 2) for r in rects)
        assert areas == [13.23, 23.32]

    def test_rectangle_is_itself(self):
        rects = rect_decompose(UNIT_SQUARE)
        assert len(rects) == 1
        assert rects[0] == Rect(0, 0, 1, 1)

    def test_random_rectilinear_matches_shoelace(self):
        rng = random.Random(7)
        for _ in range(10):
            ring = blob_ring(random_blob(rng, rng.randint(4, 30)))
            total = math.fsum(r.area for r in rect_decompose(ring))
            assert total == pytest.approx(shoelace_area(ring), abs=1e-9)

    def test_rejects_non_rectilinear(self):
        with pytest.raises(ValueError):
            rect_decompose([(0, 0), (2, 1), (0, 2)])


class TestPolygonsOverlap:
    def test_shared_edge_is_not_overlap(self):
        a = square(0, 0, 6.4, 6.4)
        b = RECT_ROOM_5
        assert not polygons_overlap(a, b)

    def test_positive_intersection(self):
        assert polygons_overlap(square(0, 0, 2, 2), square(1, 1, 3, 3))

    def test_sample_rooms_pairwise_disjoint(self, sample_plan):
        rooms = [r.points() for r in sample_plan.rooms]
        for i in range(len(rooms)):
            for j in range(i + 1, len(rooms)):
                assert not polygons_overlap(rooms[i], rooms[j])

    def test_symmetric_and_self_overlap(self):
        a = square(0, 0, 2, 2)
        b = square(1, 1, 3, 3)
        assert polygons_overlap(a, b) == polygons_overlap(b, a)
        assert polygons_overlap(a, a)

    def test_corner_touch_is_not_overlap(self):
        assert not polygons_overlap(square(0, 0, 1, 1), square(1, 1, 2, 2))


class TestBoundaryManhattanDistance:
    def test_shared_edge_rooms(self):
        assert boundary_manhattan_distance(square(0, 0, 6.4, 6.4), RECT_ROOM_5) == 0.0

    def test_pure_x_gap(self):
        assert boundary_manhattan_distance(UNIT_SQUARE, square(4, 0, 5, 1)) == 3.0

    def test_diagonal_gap(self):
        assert boundary_manhattan_distance(UNIT_SQUARE, square(3, 3, 4, 4)) == 4.0

    def test_symmetry_and_nonnegativity(self):
        rng = random.Random(11)
        for _ in range(20):
            a = blob_ring(random_blob(rng, rng.randint(3, 12)))
            off = rng.randint(-6, 6)
            b = tuple((x + 9, y + off) for x, y in blob_ring(random_blob(rng, rng.randint(3, 12))))
            d_ab = boundary_manhattan_distance(a, b)
            d_ba = boundary_manhattan_distance(b, a)
            assert d_ab == d_ba >= 0.0

    def test_nested_boundaries_have_positive_distance(self):
        outer = square(0, 0, 5, 5)
        inner = square(2, 2, 3, 3)
        assert boundary_manhattan_distance(outer, inner) == 2.0

    def test_matches_sampled_oracle(self):
        # Dense boundary sampling at 0.01 resolution, agreement within 0.02.
        rng = random.Random(23)
        for _ in range(5):
            a = blob_ring(random_blob(rng, 5))
            ox, oy = rng.randint(4, 7), rng.randint(-2, 2)
            b = tuple((x + ox, y + oy) for x, y in blob_ring(random_blob(rng, 5)))
            exact = boundary_manhattan_distance(a, b)
            assert exact == pytest.approx(_sampled_distance(a, b), abs=0.02)


def _sample_boundary(ring, step=0.01):
    points = []
    n = len(ring)
    for i in range(n):
        (x0, y0), (x1, y1) = ring[i], ring[(i + 1) % n]
        length = abs(x1 - x0) + abs(y1 - y0)
        k = max(1, int(length / step))
        for t in range(k + 1):
            f = t / k
            points.append((x0 + (x1 - x0) * f, y0 + (y1 - y0) * f))
    return points


def _sampled_distance(a, b):
    import numpy as np

    pa = np.array(_sample_boundary(a))
    pb = np.array(_sample_boundary(b))
    d = np.abs(pa[:, None, 0] - pb[None, :, 0]) + np.abs(pa[:, None, 1] - pb[None, :, 1])
    return float(d.min())
