"""Brute-force ground truth, kept independent of the diagram structures.

Classification reads only point/segment distances; the O(n^3) Gaussian-map
construction enumerates candidate supporting pairs and tests each one
against the whole site set; region boundaries come from a small curve
arrangement inside a bounding box, filtered by midpoint dominance tests.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .geometry import (
    EPS,
    Chain,
    GeneralPositionViolation,
    Segment,
    angle_in,
    angle_of,
    bisector_segments,
    chain_intersections,
    foot_on_segment,
    line_piece,
)
from .gmap import Arc, GaussianMap, Sep, is_supporting


def farthest_site(q, segments, tol: float = EPS):
    """(site id, margin to runner-up, tie flag) under plain farthest distance."""
    best = []
    for s in segments:
        d, _, _, _ = foot_on_segment(q[0], q[1], s)
        best.append((d, s.sid))
    best.sort(reverse=True)
    margin = best[0][0] - best[1][0]
    tie = margin <= tol * (1.0 + best[0][0])
    return best[0][1], margin, tie


def k_nearest_set(q, segments, k: int, tol: float = EPS):
    """(frozenset of the k nearest site ids, margin, tie flag)."""
    if not 1 <= k <= len(segments) - 1:
        raise ValueError("k out of range")
    ds = sorted((foot_on_segment(q[0], q[1], s)[0], s.sid) for s in segments)
    margin = ds[k][0] - ds[k - 1][0]
    tie = margin <= tol * (1.0 + ds[k][0])
    return frozenset(sid for _, sid in ds[:k]), margin, tie


# ---------------------------------------------------------------------------
# brute-force Gaussian map

def brute_gmap(segments, tol: float = EPS) -> GaussianMap:
    """O(n^3) Gaussian map via explicit supporting-pair enumeration."""
    if len(segments) < 2:
        raise ValueError("need at least two segments")
    scale = 1.0 + max(max(abs(s.ax), abs(s.ay), abs(s.bx), abs(s.by)) for s in segments)
    seps = []       # (nu, cw (site, which), ccw (site, which))
    markers = []    # (nu, site): hull-segment directions
    sites = {s.sid: s for s in segments}
    for s1 in segments:
        for s2 in segments:
            if s1.sid >= s2.sid:
                continue
            for w1 in ((0,) if s1.is_point else (0, 1)):
                for w2 in ((0,) if s2.is_point else (0, 1)):
                    p = s1.endpoint(w1)
                    q = s2.endpoint(w2)
                    dx, dy = q[0] - p[0], q[1] - p[1]
                    if math.hypot(dx, dy) <= tol * scale:
                        continue
                    for nu in (angle_of(dy, -dx), angle_of(-dy, dx)):
                        if is_supporting(p, q, nu, segments,
                                         excluded={s1.sid, s2.sid}, tol=tol):
                            px, py = -math.sin(nu), math.cos(nu)
                            if p[0] * px + p[1] * py > q[0] * px + q[1] * py:
                                cw, ccw = (s1.sid, w1), (s2.sid, w2)
                            else:
                                cw, ccw = (s2.sid, w2), (s1.sid, w1)
                            seps.append((nu, cw, ccw))
    for s in segments:
        if s.is_point:
            continue
        for nu in (angle_of(s.uy, -s.ux), angle_of(-s.uy, s.ux)):
            if is_supporting(s.a, s.b, nu, segments, excluded={s.sid}, tol=tol):
                markers.append((nu, s.sid))
    seps.sort()
    uniq = []
    for rec in seps:
        if uniq and abs(rec[0] - uniq[-1][0]) <= 1e-9 and rec[1:] == uniq[-1][1:]:
            continue
        uniq.append(rec)
    seps = uniq
    if len(seps) < 2:
        raise GeneralPositionViolation("fewer than two supporting pairs found")
    arcs = []
    out_seps = []
    m = len(seps)
    for k in range(m):
        nu_lo, cw_lo, ccw_lo = seps[k]
        nu_hi, cw_hi, ccw_hi = seps[(k + 1) % m]
        site = ccw_lo[0]
        if site != cw_hi[0]:
            raise GeneralPositionViolation(
                f"inconsistent owners around arc {k}: {site} vs {cw_hi[0]}")
        inside = [nu for (nu, sid) in markers
                  if sid == site and angle_in(nu, nu_lo, nu_hi, 1e-12)]
        if inside:
            arcs.append(Arc(k, site, "seg", None, nu_lo, nu_hi, nu_self=inside[0]))
        else:
            arcs.append(Arc(k, site, "sv", ccw_lo[1], nu_lo, nu_hi))
        out_seps.append(Sep(nu_hi, "support", (cw_hi, ccw_hi)))
    return GaussianMap(arcs, out_seps, 0.0, sites)


def _canonical_rotation(g: GaussianMap):
    n = len(g.arcs)
    items = [(g.arcs[i].site, g.arcs[i].kind,
              g.arcs[i].anchor if g.arcs[i].kind == "sv" else -1,
              g.seps[i].pair) for i in range(n)]
    best, best_r = None, 0
    for r in range(n):
        cand = tuple(items[(r + k) % n] for k in range(n))
        if best is None or cand < best:
            best, best_r = cand, r
    return best, best_r


def gmap_signature(g: GaussianMap):
    """Rotation-invariant structural signature used to compare maps."""
    return _canonical_rotation(g)[0]


def gmap_angles(g: GaussianMap):
    """Separator directions listed in canonical rotation order."""
    _, r = _canonical_rotation(g)
    n = len(g.arcs)
    return [g.seps[(r + k) % n].nu for k in range(n)]


# ---------------------------------------------------------------------------
# region boundaries from a local curve arrangement

@dataclass
class BoundaryArc:
    """Maximal boundary stretch of a region induced by one outside segment."""
    site: str              # outside segment owning this stretch (None on box)
    inner: str             # cluster segment realizing the boundary here
    chain: Chain           # directed with the region on the left
    on_box: bool = False


@dataclass
class FaceBoundary:
    label: frozenset       # the k nearest sites inside the face
    arcs: list             # ccw order around the face
    unbounded: bool = False
    component_count: int = 1


class EmptyRegion(Exception):
    pass


def _inside_region(x, y, segs_in, segs_out, tol=0.0):
    din = max(foot_on_segment(x, y, s)[0] for s in segs_in)
    dout = min(foot_on_segment(x, y, s)[0] for s in segs_out)
    return din < dout - tol


def region_components(segments, H, box_center=(0.0, 0.0), box_radius=None):
    """Faces of {x : every site of H is nearer than every site outside H}.

    Returns a list of FaceBoundary loops traced inside a clipping box.
    Boundary pieces on the box are tagged so callers can treat those faces
    as unbounded.
    """
    H = frozenset(H)
    segs_in = [s for s in segments if s.sid in H]
    segs_out = [s for s in segments if s.sid not in H]
    if not segs_in or not segs_out:
        raise ValueError("cluster must be a proper nonempty subset")
    if box_radius is None:
        xs = [v for s in segments for v in (s.ax, s.bx)]
        ys = [v for s in segments for v in (s.ay, s.by)]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
        box_center = (0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys)))
        box_radius = 4.0 * span
    scale = box_radius

    curves = []  # (chain, outer site or None, inner site or None)
    for h in segs_in:
        for t in segs_out:
            bis = bisector_segments(h, t)
            for br in bis.branches:
                curves.append((br, t.sid, h.sid))
    cx, cy = box_center
    r = box_radius
    corners = [(cx - r, cy - r), (cx + r, cy - r), (cx + r, cy + r), (cx - r, cy + r)]
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        d = (b[0] - a[0], b[1] - a[1])
        ln = math.hypot(*d)
        curves.append((Chain([line_piece(a, d, 0.0, ln)]), None, None))

    # split every curve at its intersections with every other curve
    cut_params = [set() for _ in curves]
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            for (la, lb, x, y) in chain_intersections(curves[i][0], curves[j][0]):
                cut_params[i].add(la)
                cut_params[j].add(lb)
    edges = []  # (chain piece run, outer, inner)
    for idx, (ch, outer, inner) in enumerate(curves):
        locs = sorted(cut_params[idx])
        frags = []
        prev = None
        pieces = ch.pieces
        bounds = [(i, p.t0) for i, p in enumerate(pieces)]
        # build fragment list by walking pieces and cutting at locs
        cur = []
        loc_iter = [l for l in locs]
        for i, p in enumerate(pieces):
            ts = sorted(t for (pi, t) in loc_iter if pi == i and p.t0 + 1e-12 < t < p.t1 - 1e-12)
            t0 = p.t0
            for t in ts:
                cur.append(p.clipped(t0, t))
                frags.append(cur)
                cur = []
                t0 = t
            cur.append(p.clipped(t0, p.t1))
        if cur:
            frags.append(cur)
        for fr in frags:
            edges.append((Chain(fr), outer, inner))

    # keep fragments on the region boundary (midpoint dominance tests)
    kept = []
    postol = 1e-9 * scale
    for (ch, outer, inner) in edges:
        mp = ch.pieces[len(ch.pieces) // 2]
        if not mp.finite:
            continue
        x, y = mp.midpoint()
        if abs(x - cx) > r + postol or abs(y - cy) > r + postol:
            continue
        din = max(foot_on_segment(x, y, s)[0] for s in segs_in)
        dout = min(foot_on_segment(x, y, s)[0] for s in segs_out)
        if outer is None:
            if din < dout - postol:
                kept.append((ch, outer, inner))
            continue
        if abs(din - dout) > 1e-6 * (1.0 + din):
            continue
        d_h = foot_on_segment(x, y, {s.sid: s for s in segs_in}[inner])[0]
        d_t = foot_on_segment(x, y, {s.sid: s for s in segs_out}[outer])[0]
        if abs(d_h - din) > 1e-6 * (1.0 + din) or abs(d_t - dout) > 1e-6 * (1.0 + dout):
            continue
        kept.append((ch, outer, inner))
    if not kept:
        raise EmptyRegion(f"region of {sorted(H)} is empty in the box")

    # orient every kept fragment with the region on its left
    directed = []
    for (ch, outer, inner) in kept:
        mp = ch.pieces[len(ch.pieces) // 2]
        t = 0.5 * (mp.t0 + mp.t1)
        x, y = mp.eval(t)
        tx, ty = mp.tangent(t)
        off = 1e-5 * scale
        lx, ly = x - ty * off, y + tx * off
        if _inside_region(lx, ly, segs_in, segs_out):
            directed.append((ch, outer, inner))
        else:
            directed.append((ch.reversed(), outer, inner))

    # walk closed loops, matching fragment endpoints
    ntol = 1e-6 * scale
    unused = list(range(len(directed)))
    loops = []
    starts = [d[0].start_point() for d in directed]
    ends = [d[0].end_point() for d in directed]

    def find_next(pt, incoming_dir, skip):
        best, bestang = None, None
        for k in unused:
            if k == skip:
                continue
            sp = starts[k]
            if sp is None or math.hypot(sp[0] - pt[0], sp[1] - pt[1]) > ntol:
                continue
            dx, dy = directed[k][0].pieces[0].tangent(directed[k][0].pieces[0].t0)
            ang = (math.atan2(dy, dx) - math.atan2(-incoming_dir[1], -incoming_dir[0])) % (2 * math.pi)
            if ang < 1e-9:
                ang = 2 * math.pi
            if bestang is None or ang > bestang:
                bestang, best = ang, k
        return best

    while unused:
        k0 = unused[0]
        loop = [k0]
        unused.remove(k0)
        guard = 0
        while guard < 10000:
            guard += 1
            last = loop[-1]
            ep = ends[last]
            lp = directed[last][0].pieces[-1]
            indir = lp.tangent(lp.t1)
            sp0 = starts[loop[0]]
            if ep is None or sp0 is None:
                break
            if math.hypot(ep[0] - sp0[0], ep[1] - sp0[1]) <= ntol and len(loop) > 1:
                break
            nxt = find_next(ep, indir, skip=None)
            if nxt is None:
                if math.hypot(ep[0] - sp0[0], ep[1] - sp0[1]) <= ntol:
                    break
                loop = None
                break
            loop.append(nxt)
            unused.remove(nxt)
        if loop:
            loops.append(loop)

    faces = []
    for loop in loops:
        arcs = []
        for k in loop:
            ch, outer, inner = directed[k]
            if arcs and arcs[-1].site == outer and arcs[-1].inner == inner:
                arcs[-1] = BoundaryArc(outer, inner,
                                       Chain(arcs[-1].chain.pieces + ch.pieces),
                                       arcs[-1].on_box)
            else:
                arcs.append(BoundaryArc(outer, inner, ch, outer is None))
        # merge wrap-around
        if len(arcs) > 1 and arcs[0].site == arcs[-1].site and arcs[0].inner == arcs[-1].inner:
            arcs[0] = BoundaryArc(arcs[0].site, arcs[0].inner,
                                  Chain(arcs[-1].chain.pieces + arcs[0].chain.pieces),
                                  arcs[0].on_box)
            arcs.pop()
        unbounded = any(a.on_box for a in arcs)
        faces.append(FaceBoundary(H, arcs, unbounded))
    return faces


def nearest_diagram(segments, box_radius=None):
    """Order-1 diagram as {site id: FaceBoundary} (regions are connected)."""
    out = {}
    for s in segments:
        faces = region_components(segments, {s.sid}, box_radius=box_radius)
        if len(faces) != 1:
            raise GeneralPositionViolation(
                f"nearest region of {s.sid} has {len(faces)} components")
        out[s.sid] = faces[0]
    return out


def order_k_faces(segments, k, box_radius=None):
    """All faces of the order-k subdivision, labeled by their k-sets."""
    from itertools import combinations
    faces = []
    for H in combinations(sorted(s.sid for s in segments), k):
        try:
            faces.extend(region_components(segments, H, box_radius=box_radius))
        except EmptyRegion:
            continue
    return faces


# ---------------------------------------------------------------------------
# sampling verification

@dataclass
class SampleVerdict:
    point: tuple
    expected: object
    observed: object
    agree: bool


@dataclass
class VerifyReport:
    total: int
    checked: int
    disagreements: int
    ties_skipped: int
    samples: list = field(default_factory=list)

    @property
    def ok(self):
        return self.disagreements == 0


def sample_box(segments, inflate=3.0):
    xs = [v for s in segments for v in (s.ax, s.bx)]
    ys = [v for s in segments for v in (s.ay, s.by)]
    cx, cy = 0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys))
    half = 0.5 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0) * inflate
    return cx, cy, half


def verify_diagram(locate, segments, num_samples=1000, mode="farthest", k=None,
                   seed=0, edge_jitter_points=None, keep_failures=20):
    """Compare a point-location callable against distance-only classification.

    `locate(q)` must return a site id (mode 'farthest') or a frozenset of k
    site ids (mode 'k-nearest'), or None for boundary/undecided points.
    """
    rng = random.Random(seed)
    cx, cy, half = sample_box(segments)
    pts = [(rng.uniform(cx - half, cx + half), rng.uniform(cy - half, cy + half))
           for _ in range(num_samples)]
    if edge_jitter_points:
        pts.extend(edge_jitter_points)
    rel_tol = 1e-7
    report = VerifyReport(len(pts), 0, 0, 0)
    for q in pts:
        if mode == "farthest":
            exp, margin, tie = farthest_site(q, segments)
        else:
            exp, margin, tie = k_nearest_set(q, segments, k)
        if tie or margin <= rel_tol * (1.0 + abs(q[0]) + abs(q[1])):
            report.ties_skipped += 1
            continue
        obs = locate(q)
        if obs is None:
            report.ties_skipped += 1
            continue
        report.checked += 1
        if obs != exp:
            report.disagreements += 1
            if len(report.samples) < keep_failures:
                report.samples.append(SampleVerdict(q, exp, obs, False))
    return report
