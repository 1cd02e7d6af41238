import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from farseg.geometry import (
    EPS,
    Bisector,
    OverlappingSegments,
    PointOnSite,
    angle_in,
    bisector_segments,
    chain_intersections,
    dist_point_segment,
    equidistance_error,
    foot_on_segment,
    intersect_pieces,
    line_piece,
    make_segment,
    parabola_piece,
    ray_away,
    segments_properly_cross,
    solve_quadratic,
)


def seg(sid, a, b):
    return make_segment(sid, a, b)


class TestDistPointSegment:
    def test_perpendicular_foot(self):
        r = dist_point_segment((0, 0), seg("s", (1, -1), (1, 1)))
        assert r.distance == pytest.approx(1.0)
        assert r.foot == pytest.approx((1.0, 0.0))
        assert r.region == "interior"

    def test_beyond_endpoint(self):
        r = dist_point_segment((3, 0), seg("s", (0, 0), (1, 0)))
        assert r.distance == pytest.approx(2.0)
        assert r.foot == pytest.approx((1.0, 0.0))
        assert r.region == "endpoint-b"

    def test_perpendicular_drop(self):
        r = dist_point_segment((2, 3), seg("s", (0, 0), (4, 0)))
        assert r.distance == pytest.approx(3.0)
        assert r.foot == pytest.approx((2.0, 0.0))

    @given(st.floats(-50, 50), st.floats(-50, 50),
           st.floats(-10, 10), st.floats(-10, 10),
           st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=200, deadline=None)
    def test_matches_bruteforce_min(self, qx, qy, ax, ay, bx, by):
        s = seg("s", (ax, ay), (bx, by))
        r = dist_point_segment((qx, qy), s)
        best = min(
            math.hypot(qx - (ax + t * (bx - ax)), qy - (ay + t * (by - ay)))
            for t in [i / 200.0 for i in range(201)]
        )
        assert r.distance <= best + 1e-7
        assert abs(r.distance - math.hypot(qx - r.foot[0], qy - r.foot[1])) < 1e-9


class TestRayAway:
    def test_vertical(self):
        o, d = ray_away((0, 5), seg("s", (-1, 0), (1, 0)))
        assert o == (0, 5)
        assert d == pytest.approx((0.0, 1.0))

    def test_point_site(self):
        _, d = ray_away((3, 4), seg("s", (0, 0), (0, 0)))
        assert d == pytest.approx((0.6, 0.8))

    def test_from_endpoint_recompute(self):
        s = seg("s", (0, 0), (1, 0))
        _, d = ray_away((5, 1), s)
        n = math.sqrt(17.0)
        assert d == pytest.approx((4.0 / n, 1.0 / n))

    def test_on_site_raises(self):
        with pytest.raises(PointOnSite):
            ray_away((0.5, 0.0), seg("s", (0, 0), (1, 0)))


class TestIntersections:
    def test_line_line(self):
        l1 = line_piece((1, 0), (0, 1))
        l2 = line_piece((0, 1), (1, 0))
        hits = intersect_pieces(l1, l2)
        assert len(hits) == 1
        assert hits[0][2:] == pytest.approx((1.0, 1.0))

    def test_parabola_line(self):
        # focus (0,1), directrix y=-1  ->  y = x^2/4; cut with y=1 at x=+-2
        par = parabola_piece((0, 1), (0, -1), (1, 0),
                             fA=("pt", "p", 0.0, 1.0),
                             fB=("ln", "q", 0.0, -1.0, 1.0, 0.0))
        ln = line_piece((0, 1), (1, 0))
        xs = sorted(h[2] for h in intersect_pieces(par, ln))
        assert xs == pytest.approx([-2.0, 2.0])

    def test_parallel_disjoint(self):
        l1 = line_piece((0, 0), (1, 0))
        l2 = line_piece((0, 1), (1, 0))
        assert intersect_pieces(l1, l2) == []

    def test_parabola_parabola_shared_directrix(self):
        f1 = ("pt", "p", 0.0, 2.0)
        f2 = ("pt", "q", 3.0, 1.0)
        fl = ("ln", "g", 0.0, -1.0, 1.0, 0.0)
        p1 = parabola_piece((0, 2), (0, -1), (1, 0), fA=f1, fB=fl)
        p2 = parabola_piece((3, 1), (0, -1), (1, 0), fA=f2, fB=fl)
        hits = intersect_pieces(p1, p2)
        assert hits
        for (_, _, x, y) in hits:
            d1 = math.hypot(x - 0, y - 2)
            d2 = math.hypot(x - 3, y - 1)
            assert abs(d1 - d2) < 1e-7
            assert abs(d1 - (y + 1)) < 1e-7

    def test_quadratic_solver(self):
        assert solve_quadratic(1, -3, 2) == pytest.approx([1.0, 2.0])
        assert solve_quadratic(0, 2, -4) == pytest.approx([2.0])
        assert solve_quadratic(1, 0, 1) == []


def sample_equidistant(bis, s1, s2, n=100):
    worst = 0.0
    for ch in bis.branches:
        for (x, y) in ch.sample(n):
            d1, _, _, _ = foot_on_segment(x, y, s1)
            d2, _, _, _ = foot_on_segment(x, y, s2)
            worst = max(worst, abs(d1 - d2) / (1.0 + d1))
    return worst


class TestBisector:
    def test_parallel_horizontal(self):
        s1 = seg("s1", (0, 0), (1, 0))
        s2 = seg("s2", (0, 2), (1, 2))
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 1
        ch = bis.branches[0]
        assert ch.start_unbounded() and ch.end_unbounded()
        for (x, y) in ch.sample(100):
            assert abs(y - 1.0) < 1e-9
        assert sample_equidistant(bis, s1, s2) < 1e-9

    def test_crossing_x(self):
        s1 = seg("s1", (-1, -1), (1, 1))
        s2 = seg("s2", (-1, 1), (1, -1))
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 2
        for ch in bis.branches:
            for (x, y) in ch.sample(60):
                assert min(abs(x), abs(y)) < 1e-9
        assert sample_equidistant(bis, s1, s2) < 1e-9

    def test_point_sites(self):
        s1 = seg("s1", (0, 0), (0, 0))
        s2 = seg("s2", (2, 0), (2, 0))
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 1
        for (x, y) in bis.branches[0].sample(50):
            assert abs(x - 1.0) < 1e-9

    def test_overlapping_rejected(self):
        s1 = seg("s1", (0, 0), (2, 0))
        s2 = seg("s2", (1, 0), (3, 0))
        with pytest.raises(OverlappingSegments):
            bisector_segments(s1, s2)

    def test_collinear_disjoint_ok(self):
        s1 = seg("s1", (0, 0), (1, 0))
        s2 = seg("s2", (3, 0), (4, 0))
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 1
        assert sample_equidistant(bis, s1, s2) < 1e-9

    def test_piece_continuity(self):
        s1 = seg("s1", (0, 0), (2, 1))
        s2 = seg("s2", (4, 5), (6, 4))
        bis = bisector_segments(s1, s2)
        for ch in bis.branches:
            for p, q in zip(ch.pieces, ch.pieces[1:]):
                a = p.eval(p.t1)
                b = q.eval(q.t0)
                assert math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-7

    def test_orientation_s1_left(self):
        s1 = seg("s1", (0, 0), (1, 0))
        s2 = seg("s2", (0, 2), (1, 2))
        ch = bisector_segments(s1, s2).branches[0]
        p = ch.pieces[len(ch.pieces) // 2]
        x, y = p.midpoint()
        t = 0.5 * (max(p.t0, -100), min(p.t1, 100))[0] + 0.0
        tx, ty = p.tangent(0.5 * (max(p.t0, -100) + min(p.t1, 100)))
        _, fx, fy, _ = foot_on_segment(x, y, s1)
        assert tx * (fy - y) - ty * (fx - x) > 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_disjoint_equidistance(self, seed):
        rng = random.Random(seed)
        while True:
            pts = [(rng.uniform(-10, 10), rng.uniform(-10, 10)) for _ in range(4)]
            s1 = seg("s1", pts[0], pts[1])
            s2 = seg("s2", pts[2], pts[3])
            if s1.length < 0.2 or s2.length < 0.2:
                continue
            if not segments_properly_cross(s1, s2):
                d, _, _, _ = foot_on_segment(s2.ax, s2.ay, s1)
                d2, _, _, _ = foot_on_segment(s2.bx, s2.by, s1)
                if min(d, d2) > 0.05:
                    break
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 1
        assert equidistance_error(bis, 50) < 1e-7

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_crossing_two_branches(self, seed):
        rng = random.Random(seed)
        while True:
            s1 = seg("s1", (rng.uniform(-5, -1), rng.uniform(-5, 5)),
                     (rng.uniform(1, 5), rng.uniform(-5, 5)))
            s2 = seg("s2", (rng.uniform(-5, 5), rng.uniform(-5, -1)),
                     (rng.uniform(-5, 5), rng.uniform(1, 5)))
            if segments_properly_cross(s1, s2):
                break
        bis = bisector_segments(s1, s2)
        assert len(bis.branches) == 2
        assert equidistance_error(bis, 50) < 1e-7


class TestChainUtilities:
    def test_chain_intersections_sorted(self):
        s1 = seg("s1", (0, 0), (1, 0))
        s2 = seg("s2", (0, 2), (1, 2))
        ch = bisector_segments(s1, s2).branches[0]
        probe = line_piece((0.5, -5), (0, 1))
        from farseg.geometry import Chain
        hits = chain_intersections(ch, Chain([probe]))
        assert len(hits) == 1
        assert hits[0][2] == pytest.approx(0.5)
        assert hits[0][3] == pytest.approx(1.0)

    def test_angle_in(self):
        assert angle_in(0.1, 6.0, 0.5)
        assert not angle_in(3.0, 6.0, 0.5)
        assert angle_in(6.2, 6.0, 0.5)
