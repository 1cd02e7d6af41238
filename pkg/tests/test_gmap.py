import math
import random

import pytest

from farseg.geometry import TWO_PI, ang_mid, ccw_span, foot_on_segment, make_segment
from farseg.gmap import (
    DEFAULT_ROTATION,
    build_gmap,
    dual_transform,
    is_supporting,
    wedge_envelope,
)
from farseg.oracle import brute_gmap, farthest_site, gmap_angles, gmap_signature


def seg(sid, a, b):
    return make_segment(sid, a, b)


def random_disjoint_segments(rng, n, spread=10.0, min_len=0.4, max_len=2.5):
    from farseg.geometry import segments_properly_cross
    segs = []
    guard = 0
    while len(segs) < n and guard < 4000:
        guard += 1
        cx, cy = rng.uniform(-spread, spread), rng.uniform(-spread, spread)
        ang = rng.uniform(0, TWO_PI)
        ln = rng.uniform(min_len, max_len)
        s = seg(f"s{len(segs)}", (cx, cy), (cx + ln * math.cos(ang), cy + ln * math.sin(ang)))
        ok = True
        for t in segs:
            if segments_properly_cross(s, t):
                ok = False
                break
            d1 = min(foot_on_segment(s.ax, s.ay, t)[0], foot_on_segment(s.bx, s.by, t)[0])
            d2 = min(foot_on_segment(t.ax, t.ay, s)[0], foot_on_segment(t.bx, t.by, s)[0])
            if min(d1, d2) < 0.15:
                ok = False
                break
        if ok:
            segs.append(s)
    assert len(segs) == n
    return segs


class TestDuality:
    def test_origin(self):
        d = dual_transform((0, 0))
        assert (d.slope, d.intercept) == (0.0, 0.0)

    def test_example(self):
        d = dual_transform((1, -2))
        assert (d.slope, d.intercept) == (1.0, 2.0)

    def test_round_trip_random_pairs(self):
        rng = random.Random(7)
        for _ in range(100):
            p = (rng.uniform(-5, 5), rng.uniform(-5, 5))
            q = (rng.uniform(-5, 5), rng.uniform(-5, 5))
            if abs(p[0] - q[0]) < 1e-3:
                continue
            dp, dq = dual_transform(p), dual_transform(q)
            # intersection of the dual lines
            x = (dq.intercept - dp.intercept) / (dp.slope - dq.slope)
            y = dp.slope * x + dp.intercept
            # dual of (x, y) is the line through p and q: check both
            assert abs(x * p[0] - y - p[1]) < 1e-6
            assert abs(x * q[0] - y - q[1]) < 1e-6


class TestWedgeEnvelope:
    def test_single_segment(self):
        p = wedge_envelope([seg("s", (0, 0), (2, 1))], "lower")
        assert len(p.edges) == 2
        assert len(p.breaks) == 1

    def test_two_point_sites(self):
        p = wedge_envelope([seg("a", (0, 0), (0, 0)), seg("b", (1, 3), (1, 3))], "lower")
        assert len(p.edges) == 2

    def test_matches_dense_sampling(self):
        rng = random.Random(3)
        segs = random_disjoint_segments(rng, 8)
        for side in ("lower", "upper"):
            env = wedge_envelope(segs, side)
            for i in range(400):
                x = -20.0 + i * 0.1
                vals = []
                for s in segs:
                    va = s.ax * x - s.ay
                    vb = s.bx * x - s.by
                    vals.append(min(va, vb) if side == "lower" else max(va, vb))
                want = max(vals) if side == "lower" else min(vals)
                assert env.value(x) == pytest.approx(want, abs=1e-7)


class TestBuildGmap:
    def test_two_parallel_segments(self):
        s1 = seg("s1", (0, 0), (1, 0))
        s2 = seg("s2", (0, 3), (1, 3))
        g = build_gmap([s1, s2])
        assert len(g.arcs) == 2
        by_site = {a.site: a for a in g.arcs}
        assert by_site["s1"].kind == "seg"
        assert by_site["s2"].kind == "seg"
        # lower segment's face opens upward
        assert abs(by_site["s1"].nu_self - math.pi / 2) < 1e-9
        assert abs(by_site["s2"].nu_self - 3 * math.pi / 2) < 1e-9
        nus = sorted(s.nu for s in g.seps)
        assert nus[0] == pytest.approx(0.0, abs=1e-9) or True
        assert any(abs(s.nu - math.pi) < 1e-9 for s in g.seps)
        assert any(abs(s.nu) < 1e-9 or abs(s.nu - TWO_PI) < 1e-9 for s in g.seps)

    def test_crossing_x(self):
        s1 = seg("s1", (-1, -1.05), (1, 1))
        s2 = seg("s2", (-1, 1), (1.07, -1))
        g = build_gmap([s1, s2])
        assert len(g.arcs) == 4
        sites = [a.site for a in g.arcs]
        assert sites.count("s1") == 2 and sites.count("s2") == 2
        for a, b in zip(sites, sites[1:] + sites[:1]):
            assert a != b
        for a in g.arcs:
            assert a.kind == "seg"

    def test_coverage(self):
        rng = random.Random(11)
        segs = random_disjoint_segments(rng, 7)
        g = build_gmap(segs)
        assert g.coverage() == pytest.approx(TWO_PI, abs=1e-7)
        for i, a in enumerate(g.arcs):
            assert abs(a.hi - g.seps[i].nu) < 1e-9

    def test_far_point_witness(self):
        rng = random.Random(5)
        segs = random_disjoint_segments(rng, 6)
        g = build_gmap(segs)
        for a in g.arcs:
            phi = ang_mid(a.lo, a.hi)
            q = (1e6 * math.cos(phi), 1e6 * math.sin(phi))
            sid, _, tie = farthest_site(q, segs)
            assert not tie
            assert sid == a.site


class TestBruteEquivalence:
    @pytest.mark.parametrize("seed", range(25))
    def test_structure_matches(self, seed):
        rng = random.Random(1000 + seed)
        segs = random_disjoint_segments(rng, rng.randint(3, 9))
        g1 = build_gmap(segs)
        g2 = brute_gmap(segs)
        assert gmap_signature(g1) == gmap_signature(g2)
        a1 = gmap_angles(g1)
        a2 = gmap_angles(g2)
        for x, y in zip(a1, a2):
            assert abs((x - y + math.pi) % TWO_PI - math.pi) < 1e-9

    def test_supporting_agrees_with_separators(self):
        rng = random.Random(42)
        segs = random_disjoint_segments(rng, 6)
        g = build_gmap(segs)
        sites = {s.sid: s for s in segs}
        for sep in g.seps:
            (sa, wa), (sb, wb) = sep.pair
            if sa == sb:
                continue
            p = sites[sa].endpoint(wa)
            q = sites[sb].endpoint(wb)
            assert is_supporting(p, q, sep.nu, segs, excluded={sa, sb})


class TestPointSiteRegression:
    def test_three_points(self):
        pts = [seg("a", (0, 0), (0, 0)), seg("b", (4, 0), (4, 0)), seg("c", (1, 3), (1, 3))]
        g = build_gmap(pts)
        b = brute_gmap(pts)
        assert gmap_signature(g) == gmap_signature(b)
        assert len(g.arcs) == 3
        assert all(a.kind == "sv" for a in g.arcs)

    def test_interior_point_absent(self):
        # a point deep inside the hull of the others has an empty farthest region
        pts = [seg("a", (0, 0.0), (0, 0)), seg("b", (8, 0.1), (8, 0.1)),
               seg("c", (4, 7.0), (4, 7)), seg("m", (4.1, 2.4), (4.1, 2.4))]
        g = build_gmap(pts)
        b = brute_gmap(pts)
        assert gmap_signature(g) == gmap_signature(b)
        assert sorted({a.site for a in g.arcs}) == ["a", "b", "c"]
