"""Gaussian map of a segment set via point-line duality and wedge envelopes.

Each direction on the circle K is owned by the site whose support function
is smallest there; the cyclic ownership structure (one arc per unbounded
face of the farthest-segment Voronoi diagram) is computed from the two
envelopes of dual wedges, glued along the horizontal diameter of K.  A
fixed small rotation of the input keeps hull directions away from the
gluing seam and all dual slopes finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .geometry import (
    EPS,
    TWO_PI,
    GeneralPositionViolation,
    Segment,
    angle_in,
    ang_mid,
    ccw_span,
    norm_angle,
)

# Fixed input rotation, recorded in the output and inverted when reporting
# directions; keeps supporting segments off the seam orientation.
DEFAULT_ROTATION = 0.007391288149792513


@dataclass(frozen=True)
class DualLine:
    """y = slope*x + intercept, dual of an endpoint under (a,b) -> y = a x - b."""
    slope: float
    intercept: float
    site: str
    which: int  # 0 = first endpoint, 1 = second


def dual_transform(p, site: str = "", which: int = 0) -> DualLine:
    return DualLine(p[0], -p[1], site, which)


@dataclass
class WedgePath:
    """x-monotone piecewise-linear path; edges[i] spans (breaks[i-1], breaks[i])."""
    edges: list  # list[DualLine]
    breaks: list  # len(edges) - 1 ascending x values

    def value(self, x: float) -> float:
        i = 0
        while i < len(self.breaks) and x > self.breaks[i]:
            i += 1
        e = self.edges[i]
        return e.slope * x + e.intercept


def _leaf_path(s: Segment, side: str) -> WedgePath:
    la = dual_transform(s.a, s.sid, 0)
    lb = dual_transform(s.b, s.sid, 1)
    if s.is_point:
        return WedgePath([la], [])
    if abs(la.slope - lb.slope) <= 1e-15 * (1.0 + abs(la.slope)):
        # vertical segment: dual lines parallel
        if side == "lower":
            e = la if la.intercept < lb.intercept else lb
        else:
            e = la if la.intercept > lb.intercept else lb
        return WedgePath([e], [])
    x_apex = (lb.intercept - la.intercept) / (la.slope - lb.slope)
    if side == "lower":
        # boundary of the lower wedge: min of the two lines
        left, right = (la, lb) if la.slope > lb.slope else (lb, la)
    else:
        # boundary of the upper wedge: max of the two lines
        left, right = (la, lb) if la.slope < lb.slope else (lb, la)
    return WedgePath([left, right], [x_apex])


def _merge_paths(p1: WedgePath, p2: WedgePath, take: str) -> WedgePath:
    """Pointwise max (take='max') or min of two piecewise-linear paths."""
    pieces = []  # (edge, x_end)
    i = j = 0
    xs = -math.inf
    sgn = 1.0 if take == "max" else -1.0
    while True:
        e1 = p1.edges[i]
        e2 = p2.edges[j]
        b1 = p1.breaks[i] if i < len(p1.breaks) else math.inf
        b2 = p2.breaks[j] if j < len(p2.breaks) else math.inf
        xe = min(b1, b2)
        ds = e1.slope - e2.slope
        cross = None
        if abs(ds) > 1e-15:
            xc = (e2.intercept - e1.intercept) / ds
            lo_ok = xs == -math.inf or xc > xs + 1e-13 * (1 + abs(xs))
            hi_ok = xe == math.inf or xc < xe - 1e-13 * (1 + abs(xe))
            if lo_ok and hi_ok:
                cross = xc
        stop1 = cross if cross is not None else xe
        if xs > -math.inf and stop1 < math.inf:
            probe = 0.5 * (xs + stop1)
        elif stop1 < math.inf:
            probe = stop1 - 1.0
        elif xs > -math.inf:
            probe = xs + 1.0
        else:
            probe = 0.0
        v1 = e1.slope * probe + e1.intercept
        v2 = e2.slope * probe + e2.intercept
        first = e1 if sgn * (v1 - v2) >= 0.0 else e2
        if cross is not None:
            pieces.append((first, cross))
            pieces.append((e2 if first is e1 else e1, xe))
        else:
            pieces.append((first, xe))
        if xe == math.inf:
            break
        xs = xe
        if b1 <= xe:
            i += 1
        if b2 <= xe:
            j += 1
    # coalesce consecutive pieces of the same dual line
    out_e = [pieces[0][0]]
    out_b = []
    last_end = pieces[0][1]
    for (e, xend) in pieces[1:]:
        prev = out_e[-1]
        if (e.site == prev.site and e.which == prev.which
                and abs(e.slope - prev.slope) < 1e-12
                and abs(e.intercept - prev.intercept) < 1e-9):
            last_end = xend
            continue
        out_b.append(last_end)
        out_e.append(e)
        last_end = xend
    return WedgePath(out_e, out_b)


def wedge_envelope(segments, side: str) -> WedgePath:
    """Boundary of the union of lower (side='lower') or upper wedges.

    Balanced divide-and-conquer merge; the result is the pointwise max of
    per-segment lower-wedge boundaries resp. min of upper-wedge boundaries.
    """
    if not segments:
        raise ValueError("need at least one segment")
    take = "max" if side == "lower" else "min"
    paths = [_leaf_path(s, side) for s in segments]
    while len(paths) > 1:
        nxt = []
        for k in range(0, len(paths) - 1, 2):
            nxt.append(_merge_paths(paths[k], paths[k + 1], take))
        if len(paths) % 2:
            nxt.append(paths[-1])
        paths = nxt
    return paths[0]


# ---------------------------------------------------------------------------
# arcs on the circle of directions

@dataclass
class Arc:
    aid: int
    site: str
    kind: str              # 'sv' single-vertex | 'seg' segment arc
    anchor: Optional[int]  # endpoint index for 'sv'
    lo: float              # original ccw interval start
    hi: float
    nu_self: Optional[float] = None  # hull direction inside a segment arc
    origin: str = "original"


@dataclass
class Sep:
    """Separator between consecutive arcs: a hull direction."""
    nu: float
    kind: str = "support"            # 'support' | 'artificial'
    pair: Optional[tuple] = None     # ((site, which), (site, which)) for support


@dataclass
class GaussianMap:
    arcs: list          # ccw cyclic
    seps: list          # seps[i] between arcs[i] and arcs[(i+1) % n]
    rotation: float = 0.0
    sites: dict = None  # sid -> Segment

    def __len__(self):
        return len(self.arcs)

    def coverage(self) -> float:
        return sum(ccw_span(a.lo, a.hi) for a in self.arcs)


def _x_to_theta_upper(x: float) -> float:
    # direction angle for the lower-wedge envelope (upper half of K)
    return math.atan2(1.0, -x) if x > -math.inf else 0.0


def _rot_segment(s: Segment, rho: float) -> Segment:
    c, sn = math.cos(-rho), math.sin(-rho)
    return Segment(s.sid,
                   c * s.ax - sn * s.ay, sn * s.ax + c * s.ay,
                   c * s.bx - sn * s.by, sn * s.bx + c * s.by)


def build_gmap(segments, rotation: float = DEFAULT_ROTATION, tol: float = EPS) -> GaussianMap:
    """Cyclic arc structure of the farthest diagram's faces at infinity."""
    if len(segments) < 2:
        raise ValueError("need at least two segments")
    seen = {}
    for s in segments:
        if s.sid in seen:
            raise ValueError(f"duplicate site id {s.sid}")
        seen[s.sid] = s
    rho = rotation
    rot = [_rot_segment(s, rho) for s in segments]
    env_low = wedge_envelope(rot, "lower")   # upper half of K
    env_up = wedge_envelope(rot, "upper")    # lower half of K

    # (key, theta_lo, theta_hi) runs in ccw order over the full circle
    runs = []

    def push(site, which, tlo, thi):
        runs.append([site, which, tlo, thi])

    th = 0.0
    for k, e in enumerate(env_low.edges):
        nxt = _x_to_theta_upper(env_low.breaks[k]) if k < len(env_low.breaks) else math.pi
        push(e.site, e.which, th, nxt)
        th = nxt
    th = math.pi
    for k, e in enumerate(env_up.edges):
        nxt = (_x_to_theta_upper(env_up.breaks[k]) + math.pi
               if k < len(env_up.breaks) else TWO_PI)
        push(e.site, e.which, th, nxt)
        th = nxt

    # seam consistency and gluing at theta = pi and theta = 0
    if len(runs) >= 2 and runs[0][0] != runs[-1][0]:
        raise GeneralPositionViolation("seam mismatch at direction 0")
    # merge across the pi seam
    glued = []
    for r in runs:
        if glued and glued[-1][0] == r[0] and glued[-1][1] == r[1] \
                and abs(glued[-1][3] - r[2]) < 1e-12:
            glued[-1][3] = r[3]
        else:
            glued.append(r)
    # merge across the 0/2pi seam
    if len(glued) >= 2 and glued[0][0] == glued[-1][0] and glued[0][1] == glued[-1][1]:
        glued[0][2] = glued[-1][2] - TWO_PI
        glued.pop()

    # group same-site neighboring runs into arcs (apex inside -> segment arc)
    arcs = []
    seps = []
    groups = []
    for r in glued:
        if groups and groups[-1][-1][0] == r[0]:
            groups[-1].append(r)
        else:
            groups.append([r])
    if len(groups) >= 2 and groups[0][0][0] == groups[-1][-1][0]:
        last = groups.pop()
        for r in last:
            r[2] -= TWO_PI
            r[3] -= TWO_PI
        groups[0] = last + groups[0]
    if len(groups) < 2:
        raise GeneralPositionViolation("degenerate Gaussian map: one owner")

    aid = 0
    for g in groups:
        site = g[0][0]
        lo = g[0][2]
        hi = g[-1][3]
        if len(g) == 1:
            arcs.append(Arc(aid, site, "sv", g[0][1],
                            norm_angle(lo + rho), norm_angle(hi + rho)))
        elif len(g) == 2:
            arcs.append(Arc(aid, site, "seg", None,
                            norm_angle(lo + rho), norm_angle(hi + rho),
                            nu_self=norm_angle(g[0][3] + rho)))
        else:
            raise GeneralPositionViolation(
                f"site {site} owns {len(g)} adjacent envelope edges")
        aid += 1
    m = len(arcs)
    for i in range(m):
        a = arcs[i]
        b = arcs[(i + 1) % m]
        nu = a.hi
        ga = seen[a.site]
        gb = seen[b.site]
        wa = a.anchor if a.kind == "sv" else ga.support_realizer(nu)
        wb = b.anchor if b.kind == "sv" else gb.support_realizer(nu)
        if wa == 2:
            wa = ga.support_realizer(nu - 1e-7)
        if wb == 2:
            wb = gb.support_realizer(nu + 1e-7)
        seps.append(Sep(nu, "support", ((a.site, wa), (b.site, wb))))
    return GaussianMap(arcs, seps, rho, dict(seen))


# ---------------------------------------------------------------------------
# the supporting-line predicate

def is_supporting(pa, pb, nu, segments, excluded=frozenset(), tol: float = EPS) -> bool:
    """Supporting test for a candidate line through pa (and pb), side of nu.

    The open halfplane beyond the line must meet every segment that is not
    excluded, and must miss the excluded (defining) sites themselves;
    segments incident to pa/pb are exempt from both requirements.
    """
    nx, ny = math.cos(nu), math.sin(nu)
    c = pa[0] * nx + pa[1] * ny
    scale = 1.0 + abs(c)
    if pb is not None and abs(pb[0] * nx + pb[1] * ny - c) > 1e-7 * scale:
        return False  # nu is not normal to the candidate
    for s in segments:
        h = max(s.ax * nx + s.ay * ny, s.bx * nx + s.by * ny)
        if s.sid in excluded:
            if h > c + tol * scale:
                return False  # a defining site pokes into the halfplane
            continue
        incident = False
        for e in (s.a, s.b):
            for p in (pa, pb):
                if p is not None and abs(e[0] - p[0]) <= tol * scale \
                        and abs(e[1] - p[1]) <= tol * scale:
                    incident = True
        if incident:
            continue
        if h <= c + tol * scale:
            return False      # a non-excluded site misses the halfplane
    return True
