"""Planar kernel: segments, distance feet, and piecewise bisector curves.

All coordinates are plain floats; coincidence predicates use a single
relative tolerance EPS.  Curve pieces are parameterized quadratically,
point(t) = P0 + P1*t + P2*t**2, which covers line pieces (P2 = 0) and
parabolic arcs (t = foot position on the directrix).  Intersections
therefore reduce to quadratics, except parabola/parabola pairs without a
shared feature, which fall back to a quartic root finder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

EPS = 1e-9
TWO_PI = 2.0 * math.pi
INF = math.inf


class GeometryError(Exception):
    pass


class OverlappingSegments(GeometryError):
    pass


class PointOnSite(GeometryError):
    pass


class GeneralPositionViolation(GeometryError):
    pass


# ---------------------------------------------------------------------------
# angles

def norm_angle(t: float) -> float:
    t = t % TWO_PI
    return t if t >= 0.0 else t + TWO_PI


def angle_of(dx: float, dy: float) -> float:
    return math.atan2(dy, dx) % TWO_PI


def ccw_span(lo: float, hi: float) -> float:
    """Width of the ccw interval from lo to hi, in [0, 2*pi)."""
    return (hi - lo) % TWO_PI


def angle_in(theta: float, lo: float, hi: float, tol: float = 0.0) -> bool:
    """theta inside the closed ccw interval [lo, hi] (cyclic), widened by tol."""
    w = (hi - lo) % TWO_PI
    if w >= TWO_PI - 1e-15 and abs(hi - lo) > 1e-15:
        return True
    a = (theta - lo) % TWO_PI
    return a <= w + tol or a >= TWO_PI - tol


def ang_mid(lo: float, hi: float) -> float:
    return norm_angle(lo + 0.5 * ccw_span(lo, hi))


# ---------------------------------------------------------------------------
# sites

@dataclass(frozen=True)
class Segment:
    sid: str
    ax: float
    ay: float
    bx: float
    by: float

    def __post_init__(self):
        dx = self.bx - self.ax
        dy = self.by - self.ay
        ln = math.hypot(dx, dy)
        object.__setattr__(self, "length", ln)
        if ln > 0.0:
            object.__setattr__(self, "ux", dx / ln)
            object.__setattr__(self, "uy", dy / ln)
        else:
            object.__setattr__(self, "ux", 0.0)
            object.__setattr__(self, "uy", 0.0)

    @property
    def is_point(self) -> bool:
        return self.length <= 0.0

    @property
    def a(self):
        return (self.ax, self.ay)

    @property
    def b(self):
        return (self.bx, self.by)

    def endpoint(self, which: int):
        return (self.ax, self.ay) if which == 0 else (self.bx, self.by)

    def support(self, theta: float) -> float:
        """max over the segment of <p, (cos t, sin t)>."""
        c = math.cos(theta)
        s = math.sin(theta)
        return max(self.ax * c + self.ay * s, self.bx * c + self.by * s)

    def support_realizer(self, theta: float, tol: float = EPS):
        """Endpoint index attaining the support in direction theta (0, 1, or 2 for a tie)."""
        c = math.cos(theta)
        s = math.sin(theta)
        ha = self.ax * c + self.ay * s
        hb = self.bx * c + self.by * s
        if self.is_point or abs(ha - hb) <= tol * (1.0 + abs(ha) + abs(hb)):
            return 2 if not self.is_point else 0
        return 0 if ha > hb else 1


def make_segment(sid, a, b) -> Segment:
    return Segment(sid, float(a[0]), float(a[1]), float(b[0]), float(b[1]))


class FootResult(NamedTuple):
    distance: float
    foot: tuple
    region: str  # 'endpoint-a' | 'interior' | 'endpoint-b'


def foot_on_segment(qx: float, qy: float, s: Segment):
    """(distance, fx, fy, t) where t is the clamped projection parameter."""
    if s.is_point:
        return math.hypot(qx - s.ax, qy - s.ay), s.ax, s.ay, 0.0
    t = (qx - s.ax) * s.ux + (qy - s.ay) * s.uy
    if t <= 0.0:
        t = 0.0
    elif t >= s.length:
        t = s.length
    fx = s.ax + t * s.ux
    fy = s.ay + t * s.uy
    return math.hypot(qx - fx, qy - fy), fx, fy, t


def dist_point_segment(q, s: Segment, tol: float = EPS) -> FootResult:
    d, fx, fy, t = foot_on_segment(q[0], q[1], s)
    scale = tol * (1.0 + s.length)
    if s.is_point or t <= scale:
        region = "endpoint-a"
    elif t >= s.length - scale:
        region = "endpoint-b"
    else:
        region = "interior"
    return FootResult(d, (fx, fy), region)


def away_dir(qx: float, qy: float, s: Segment, tol: float = EPS):
    """Unit direction from the nearest point of s toward q. None if q is on s."""
    d, fx, fy, _ = foot_on_segment(qx, qy, s)
    if d <= tol:
        return None
    return (qx - fx) / d, (qy - fy) / d


def ray_away(x, s: Segment, tol: float = EPS):
    """Ray from x extending to infinity away from s: ((ox, oy), (dx, dy))."""
    v = away_dir(x[0], x[1], s, tol)
    if v is None:
        raise PointOnSite(f"point {x} lies on site {s.sid}")
    return (x[0], x[1]), v


# ---------------------------------------------------------------------------
# curve pieces

LINE = "line"
PAR = "parabola"


class Piece:
    """One quadratic-parameterized curve piece over t in [t0, t1].

    ox/oy/ux/uy give the parameter frame: for lines the origin and unit
    direction, for parabolas the directrix origin and unit direction, so
    param_of_point is a plain dot product in both cases.
    """

    __slots__ = ("kind", "px", "py", "qx", "qy", "rx", "ry",
                 "ox", "oy", "ux", "uy", "t0", "t1", "fA", "fB")

    def __init__(self, kind, px, py, qx, qy, rx, ry, ox, oy, ux, uy, t0, t1, fA, fB):
        self.kind = kind
        self.px = px
        self.py = py
        self.qx = qx
        self.qy = qy
        self.rx = rx
        self.ry = ry
        self.ox = ox
        self.oy = oy
        self.ux = ux
        self.uy = uy
        self.t0 = t0
        self.t1 = t1
        self.fA = fA
        self.fB = fB

    def eval(self, t: float):
        return (self.px + t * (self.qx + t * self.rx),
                self.py + t * (self.qy + t * self.ry))

    def tangent(self, t: float):
        dx = self.qx + 2.0 * t * self.rx
        dy = self.qy + 2.0 * t * self.ry
        n = math.hypot(dx, dy)
        if n == 0.0:
            return (0.0, 0.0)
        return (dx / n, dy / n)

    def param_of_point(self, x: float, y: float) -> float:
        return (x - self.ox) * self.ux + (y - self.oy) * self.uy

    def clipped(self, lo: float, hi: float) -> "Piece":
        p = Piece(self.kind, self.px, self.py, self.qx, self.qy, self.rx, self.ry,
                  self.ox, self.oy, self.ux, self.uy, lo, hi, self.fA, self.fB)
        return p

    def reversed(self) -> "Piece":
        """Reparameterize t -> -t so walking order flips."""
        p = Piece(self.kind, self.px, self.py, -self.qx, -self.qy, self.rx, self.ry,
                  self.ox, self.oy, -self.ux, -self.uy,
                  -self.t1, -self.t0, self.fA, self.fB)
        return p

    @property
    def finite(self) -> bool:
        return self.t0 > -INF and self.t1 < INF

    def midpoint(self):
        if self.finite:
            return self.eval(0.5 * (self.t0 + self.t1))
        if self.t0 > -INF:
            return self.eval(self.t0 + 1.0)
        if self.t1 < INF:
            return self.eval(self.t1 - 1.0)
        return self.eval(0.0)

    def __repr__(self):
        return f"Piece({self.kind},[{self.t0:.4g},{self.t1:.4g}])"


def line_piece(o, d, t0=-INF, t1=INF, fA=None, fB=None) -> Piece:
    n = math.hypot(d[0], d[1])
    ux, uy = d[0] / n, d[1] / n
    return Piece(LINE, o[0], o[1], ux, uy, 0.0, 0.0,
                 o[0], o[1], ux, uy, t0, t1, fA, fB)


def parabola_piece(focus, dir_origin, dir_u, t0=-INF, t1=INF, fA=None, fB=None) -> Piece:
    """Parabola equidistant from focus and the directrix line (origin, unit u)."""
    n = math.hypot(dir_u[0], dir_u[1])
    ux, uy = dir_u[0] / n, dir_u[1] / n
    mx, my = -uy, ux
    c = (focus[0] - dir_origin[0]) * mx + (focus[1] - dir_origin[1]) * my
    if c < 0.0:
        mx, my, c = -mx, -my, -c
    if c <= EPS:
        raise GeometryError("parabola focus on directrix")
    wx = dir_origin[0] - focus[0]
    wy = dir_origin[1] - focus[1]
    w2 = wx * wx + wy * wy
    wu = wx * ux + wy * uy
    inv2c = 0.5 / c
    # point(t) = o + t*u + h(t)*m,  h(t) = (w2 + 2 wu t + t^2) / (2c)
    px = dir_origin[0] + w2 * inv2c * mx
    py = dir_origin[1] + w2 * inv2c * my
    qx = ux + 2.0 * wu * inv2c * mx
    qy = uy + 2.0 * wu * inv2c * my
    rx = inv2c * mx
    ry = inv2c * my
    return Piece(PAR, px, py, qx, qy, rx, ry,
                 dir_origin[0], dir_origin[1], ux, uy, t0, t1, fA, fB)


# ---------------------------------------------------------------------------
# small polynomial helpers

def solve_quadratic(a: float, b: float, c: float, tol: float = 1e-13):
    """Real roots of a t^2 + b t + c = 0, ascending."""
    scale = abs(a) + abs(b) + abs(c)
    if scale == 0.0:
        return []
    if abs(a) <= tol * scale:
        if abs(b) <= tol * scale:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc > -tol * scale * scale:
            return [-b / (2.0 * a)]
        return []
    sq = math.sqrt(disc)
    if b >= 0.0:
        q = -(b + sq) / 2.0
    else:
        q = -(b - sq) / 2.0
    roots = []
    if q != 0.0:
        roots.append(c / q)
    roots.append(q / a)
    if len(roots) == 2 and roots[0] > roots[1]:
        roots.reverse()
    return roots


def poly_real_roots(coeffs, tol=1e-9):
    """Real roots of sum coeffs[i] * t**i (low degree; Durand-Kerner)."""
    c = list(coeffs)
    while c and abs(c[-1]) <= 1e-300:
        c.pop()
    n = len(c) - 1
    if n <= 0:
        return []
    if n == 1:
        return [-c[0] / c[1]]
    if n == 2:
        return solve_quadratic(c[2], c[1], c[0])
    lead = c[-1]
    c = [x / lead for x in c]
    roots = []
    z = complex(0.4, 0.9)
    cur = [z ** k for k in range(n)]
    for _ in range(120):
        done = True
        for i in range(n):
            p = 1.0
            for j in range(n):
                if j != i:
                    p *= cur[i] - cur[j]
            val = 0j
            for k in range(n, -1, -1):
                val = val * cur[i] + c[k]
            if p == 0:
                continue
            step = val / p
            cur[i] = cur[i] - step
            if abs(step) > 1e-13 * (1.0 + abs(cur[i])):
                done = False
        if done:
            break
    for r in cur:
        if abs(r.imag) <= 1e-7 * (1.0 + abs(r.real)):
            roots.append(r.real)
    roots.sort()
    dedup = []
    for r in roots:
        if not dedup or abs(r - dedup[-1]) > tol * (1.0 + abs(r)):
            dedup.append(r)
    return dedup


# ---------------------------------------------------------------------------
# piece/piece intersection

def _same_line_feature(f1, f2, tol):
    if f1 is None or f2 is None:
        return False
    if f1[0] != "ln" or f2[0] != "ln":
        return False
    _, _, ox1, oy1, ux1, uy1 = f1
    _, _, ox2, oy2, ux2, uy2 = f2
    if abs(ux1 * uy2 - uy1 * ux2) > tol:
        return False
    return abs((ox2 - ox1) * uy1 - (oy2 - oy1) * ux1) <= tol * (1.0 + abs(ox1) + abs(ox2))


def _same_point_feature(f1, f2, tol):
    if f1 is None or f2 is None:
        return False
    if f1[0] != "pt" or f2[0] != "pt":
        return False
    return abs(f1[2] - f2[2]) <= tol and abs(f1[3] - f2[3]) <= tol


def _piece_line_params(piece: Piece, nx, ny, c, tol=1e-13):
    """Params t with <piece(t), n> = c."""
    A = piece.rx * nx + piece.ry * ny
    B = piece.qx * nx + piece.qy * ny
    C = piece.px * nx + piece.py * ny - c
    return solve_quadratic(A, B, C, tol)


def _pt_range(t, lo, hi, tol):
    return lo - tol <= t <= hi + tol


def intersect_pieces(a: Piece, b: Piece, tol: float = 1e-9):
    """Transversal/tangential intersection points of two pieces.

    Returns list of (ta, tb, x, y).  Reduces parabola pairs via shared
    focus/directrix when possible; otherwise a quartic fallback.
    """
    out = []
    if a.kind == LINE and b.kind == LINE:
        det = a.ux * (-b.uy) - a.uy * (-b.ux)
        # solve a.o + ta*a.u = b.o + tb*b.u
        det = b.ux * a.uy - b.uy * a.ux
        if abs(det) <= 1e-14:
            return []
        dx = b.ox - a.ox
        dy = b.oy - a.oy
        ta = (b.ux * dy - b.uy * dx) / det
        tb = (a.ux * dy - a.uy * dx) / det
        if _pt_range(ta, a.t0, a.t1, tol) and _pt_range(tb, b.t0, b.t1, tol):
            x, y = a.eval(ta)
            out.append((ta, tb, x, y))
        return out
    if a.kind == LINE:
        res = intersect_pieces(b, a, tol)
        return [(ta, tb, x, y) for (tb, ta, x, y) in res]
    if b.kind == LINE:
        nx, ny = -b.uy, b.ux
        c = b.ox * nx + b.oy * ny
        for t in _piece_line_params(a, nx, ny, c):
            if not _pt_range(t, a.t0, a.t1, tol):
                continue
            x, y = a.eval(t)
            tb = b.param_of_point(x, y)
            if _pt_range(tb, b.t0, b.t1, tol):
                out.append((t, tb, x, y))
        return out

    # parabola / parabola
    lines = []
    fa_pt = a.fA if a.fA and a.fA[0] == "pt" else (a.fB if a.fB and a.fB[0] == "pt" else None)
    fb_pt = b.fA if b.fA and b.fA[0] == "pt" else (b.fB if b.fB and b.fB[0] == "pt" else None)
    fa_ln = a.fA if a.fA and a.fA[0] == "ln" else (a.fB if a.fB and a.fB[0] == "ln" else None)
    fb_ln = b.fA if b.fA and b.fA[0] == "ln" else (b.fB if b.fB and b.fB[0] == "ln" else None)
    if fa_ln and fb_ln and _same_line_feature(fa_ln, fb_ln, tol) and fa_pt and fb_pt:
        # shared directrix: intersections lie on the perpendicular bisector of foci
        p1x, p1y = fa_pt[2], fa_pt[3]
        p2x, p2y = fb_pt[2], fb_pt[3]
        if abs(p1x - p2x) <= tol and abs(p1y - p2y) <= tol:
            return []
        mx, my = 0.5 * (p1x + p2x), 0.5 * (p1y + p2y)
        dxx, dyy = p2x - p1x, p2y - p1y
        lines.append((dxx, dyy, mx * dxx + my * dyy))
    elif fa_pt and fb_pt and _same_point_feature(fa_pt, fb_pt, tol) and fa_ln and fb_ln:
        # shared focus: intersections are equidistant from both directrices
        _, _, o1x, o1y, u1x, u1y = fa_ln
        _, _, o2x, o2y, u2x, u2y = fb_ln
        n1x, n1y = -u1y, u1x
        n2x, n2y = -u2y, u2x
        c1 = o1x * n1x + o1y * n1y
        c2 = o2x * n2x + o2y * n2y
        # |<x,n1>-c1| = |<x,n2>-c2| -> two lines
        lines.append((n1x - n2x, n1y - n2y, c1 - c2))
        lines.append((n1x + n2x, n1y + n2y, c1 + c2))
    if lines:
        for (nx, ny, c) in lines:
            if abs(nx) + abs(ny) <= 1e-14:
                continue
            for t in _piece_line_params(a, nx, ny, c):
                if not _pt_range(t, a.t0, a.t1, tol):
                    continue
                x, y = a.eval(t)
                tb = b.param_of_point(x, y)
                if _pt_range(tb, b.t0, b.t1, tol):
                    xb, yb = b.eval(tb)
                    if math.hypot(x - xb, y - yb) <= 1e-6 * (1.0 + abs(x) + abs(y)):
                        out.append((t, tb, x, y))
        return out

    # generic quartic fallback: substitute a(t) into implicit quadratic of b
    fb_pt = fb_pt or (b.fA if b.fA and b.fA[0] == "pt" else b.fB)
    if fb_pt is None or fb_ln is None:
        return []
    fx, fy = fb_pt[2], fb_pt[3]
    _, _, ox, oy, ux, uy = fb_ln
    nx, ny = -uy, ux
    cl = ox * nx + oy * ny
    # implicit: (x-fx)^2 + (y-fy)^2 - (<x,n>-cl)^2 = 0
    # x(t), y(t) quadratics -> quartic in t
    def poly_mul(p, q):
        r = [0.0] * (len(p) + len(q) - 1)
        for i, pi in enumerate(p):
            for j, qj in enumerate(q):
                r[i + j] += pi * qj
        return r

    X = [a.px - fx, a.qx, a.rx]
    Y = [a.py - fy, a.qy, a.ry]
    L = [a.px * nx + a.py * ny - cl, a.qx * nx + a.qy * ny, a.rx * nx + a.ry * ny]
    quart = [0.0] * 5
    for arr in (poly_mul(X, X), poly_mul(Y, Y)):
        for i, v in enumerate(arr):
            quart[i] += v
    for i, v in enumerate(poly_mul(L, L)):
        quart[i] -= v
    for t in poly_real_roots(quart):
        if not _pt_range(t, a.t0, a.t1, tol):
            continue
        x, y = a.eval(t)
        tb = b.param_of_point(x, y)
        if _pt_range(tb, b.t0, b.t1, tol):
            xb, yb = b.eval(tb)
            if math.hypot(x - xb, y - yb) <= 1e-6 * (1.0 + abs(x) + abs(y)):
                out.append((t, tb, x, y))
    return out


# ---------------------------------------------------------------------------
# chains

class Chain:
    """Directed curve made of consecutive pieces sharing endpoints."""

    __slots__ = ("pieces",)

    def __init__(self, pieces):
        self.pieces = pieces

    def __len__(self):
        return len(self.pieces)

    def eval(self, loc):
        i, t = loc
        return self.pieces[i].eval(t)

    def start_unbounded(self):
        return self.pieces[0].t0 == -INF

    def end_unbounded(self):
        return self.pieces[-1].t1 == INF

    def start_point(self):
        p = self.pieces[0]
        return p.eval(p.t0) if p.t0 > -INF else None

    def end_point(self):
        p = self.pieces[-1]
        return p.eval(p.t1) if p.t1 < INF else None

    def start_dir(self):
        """Unit direction of travel toward the start at infinity (outward)."""
        p = self.pieces[0]
        tx, ty = p.tangent(p.t0 if p.t0 > -INF else min(p.t1, 0.0) - 1.0)
        return (-tx, -ty)

    def end_dir(self):
        p = self.pieces[-1]
        tx, ty = p.tangent(p.t1 if p.t1 < INF else max(p.t0, 0.0) + 1.0)
        return (tx, ty)

    def reversed(self):
        return Chain([p.reversed() for p in reversed(self.pieces)])

    def point_at_arc(self, s: float):
        """Point at crude arclength s from the finite start (sampling helper)."""
        rem = s
        for p in self.pieces:
            t0 = p.t0 if p.t0 > -INF else p.t1 - 64.0
            t1 = p.t1 if p.t1 < INF else p.t0 + 64.0
            seg = t1 - t0
            if rem <= seg:
                return p.eval(t0 + rem)
            rem -= seg
        return self.pieces[-1].eval(t1)

    def sample(self, n: int, pad: float = 8.0):
        """n points spread over the chain (pads unbounded ends by `pad`)."""
        pts = []
        for p in self.pieces:
            t0 = p.t0 if p.t0 > -INF else (p.t1 if p.t1 < INF else 0.0) - pad
            t1 = p.t1 if p.t1 < INF else (p.t0 if p.t0 > -INF else 0.0) + pad
            k = max(2, n // max(1, len(self.pieces)))
            for j in range(k):
                pts.append(p.eval(t0 + (t1 - t0) * (j + 0.5) / k))
        return pts

    def split_at(self, loc):
        """Two chains: [..loc], [loc..]. loc = (piece index, t)."""
        i, t = loc
        p = self.pieces[i]
        left = self.pieces[:i]
        right = self.pieces[i + 1:]
        if t > p.t0 + 1e-15:
            left = left + [p.clipped(p.t0, t)]
        if t < p.t1 - 1e-15:
            right = [p.clipped(t, p.t1)] + right
        return Chain(left) if left else None, Chain(right) if right else None

    def slice(self, loc0, loc1):
        """Sub-chain between two locations (None = chain start / end)."""
        (i0, t0) = loc0 if loc0 is not None else (0, self.pieces[0].t0)
        (i1, t1) = loc1 if loc1 is not None else (len(self.pieces) - 1,
                                                  self.pieces[-1].t1)
        if (i0, t0) > (i1, t1):
            raise ValueError("slice locations out of order")
        if i0 == i1:
            return Chain([self.pieces[i0].clipped(t0, t1)])
        out = []
        p = self.pieces[i0]
        if p.t1 > t0 + 1e-15:
            out.append(p.clipped(t0, p.t1))
        out.extend(self.pieces[i0 + 1:i1])
        p = self.pieces[i1]
        if t1 > p.t0 + 1e-15:
            out.append(p.clipped(p.t0, t1))
        return Chain(out if out else [self.pieces[i0].clipped(t0, t1)])

    def advance(self, loc, ds):
        """Location moved ds (signed, arclength-ish) along the chain."""
        i, t = loc
        while True:
            p = self.pieces[i]
            nt = t + ds
            if nt < p.t0:
                if i == 0:
                    return (0, p.t0)
                ds = nt - p.t0
                i -= 1
                t = self.pieces[i].t1
                continue
            if nt > p.t1:
                if i == len(self.pieces) - 1:
                    return (i, p.t1)
                ds = nt - p.t1
                i += 1
                t = self.pieces[i].t0
                continue
            return (i, nt)

    def locate_point(self, x, y, tol=1e-7):
        """(i, t) for a point assumed on the chain, else None."""
        best = None
        bestd = INF
        for i, p in enumerate(self.pieces):
            t = p.param_of_point(x, y)
            t = min(max(t, p.t0), p.t1)
            qx, qy = p.eval(t)
            d = math.hypot(qx - x, qy - y)
            if d < bestd:
                bestd = d
                best = (i, t)
        if bestd <= tol * (1.0 + abs(x) + abs(y)):
            return best
        return None

    def __repr__(self):
        return f"Chain({self.pieces})"


def chain_intersections(ca: Chain, cb: Chain, tol=1e-9):
    """All crossings [(locA, locB, x, y)] sorted along ca, deduped at joints."""
    hits = []
    for i, pa in enumerate(ca.pieces):
        for j, pb in enumerate(cb.pieces):
            for (ta, tb, x, y) in intersect_pieces(pa, pb, tol):
                hits.append(((i, ta), (j, tb), x, y))
    hits.sort(key=lambda h: (h[0][0], h[0][1]))
    dedup = []
    for h in hits:
        if dedup:
            _, _, x0, y0 = dedup[-1]
            if math.hypot(h[2] - x0, h[3] - y0) <= tol * 10 * (1.0 + abs(x0) + abs(y0)):
                continue
        dedup.append(h)
    return dedup


# ---------------------------------------------------------------------------
# bisector of two segments

def _features(s: Segment):
    if s.is_point:
        return [("pt", s.sid, s.ax, s.ay, None)]
    return [
        ("pt", s.sid, s.ax, s.ay, 0),
        ("ln", s.sid, s.ax, s.ay, 1),   # interior; frame filled later
        ("pt", s.sid, s.bx, s.by, 1 if False else 1),
    ]


def _dominance_constraints(s: Segment, which):
    """Halfplane constraints (nx, ny, c, sense<=) bounding the feature cell."""
    if s.is_point:
        return []
    ca = s.ax * s.ux + s.ay * s.uy
    cb = s.bx * s.ux + s.by * s.uy
    if which == "a":
        return [(s.ux, s.uy, ca, +1)]          # <x,u> <= ca
    if which == "b":
        return [(s.ux, s.uy, cb, -1)]          # <x,u> >= cb
    return [(s.ux, s.uy, ca, -1), (s.ux, s.uy, cb, +1)]


def _allowed_intervals(piece: Piece, constraints, tol):
    """Sub-intervals of [t0,t1] where all halfplane constraints hold."""
    ivs = [(piece.t0, piece.t1)]
    for (nx, ny, c, sense) in constraints:
        A = piece.rx * nx + piece.ry * ny
        B = piece.qx * nx + piece.qy * ny
        C = piece.px * nx + piece.py * ny - c
        if sense < 0:
            A, B, C = -A, -B, -C
        # keep {t : A t^2 + B t + C <= tol}
        keep = []
        if abs(A) <= 1e-14:
            if abs(B) <= 1e-14:
                if C <= tol:
                    keep = [(-INF, INF)]
            else:
                r = (tol - C) / B
                keep = [(-INF, r)] if B > 0 else [(r, INF)]
        else:
            roots = solve_quadratic(A, B, C - tol)
            if A > 0:
                if len(roots) == 2:
                    keep = [(roots[0], roots[1])]
                elif len(roots) == 1:
                    keep = [(roots[0], roots[0])]
            else:
                if len(roots) == 2:
                    keep = [(-INF, roots[0]), (roots[1], INF)]
                else:
                    keep = [(-INF, INF)]
        nxt = []
        for (lo, hi) in ivs:
            for (kl, kh) in keep:
                l, h = max(lo, kl), min(hi, kh)
                if l < h:
                    nxt.append((l, h))
        ivs = nxt
        if not ivs:
            break
    return ivs


def _candidate_pieces(s1: Segment, s2: Segment, tol):
    """Raw elementary-bisector pieces clipped to their feature cells."""
    scale = 1.0 + max(abs(v) for v in (s1.ax, s1.ay, s1.bx, s1.by,
                                       s2.ax, s2.ay, s2.bx, s2.by))
    ptol = tol * scale
    feats1 = ([("pt", "a")] if s1.is_point else [("pt", "a"), ("ln", "i"), ("pt", "b")])
    feats2 = ([("pt", "a")] if s2.is_point else [("pt", "a"), ("ln", "i"), ("pt", "b")])
    out = []
    for f1 in feats1:
        for f2 in feats2:
            cons = _dominance_constraints(s1, "i" if f1[0] == "ln" else f1[1]) + \
                   _dominance_constraints(s2, "i" if f2[0] == "ln" else f2[1])
            cands = []
            if f1[0] == "pt" and f2[0] == "pt":
                p = s1.endpoint(0 if f1[1] == "a" else 1)
                q = s2.endpoint(0 if f2[1] == "a" else 1)
                fa = ("pt", s1.sid, p[0], p[1])
                fb = ("pt", s2.sid, q[0], q[1])
                d = math.hypot(q[0] - p[0], q[1] - p[1])
                if d <= ptol:
                    # shared endpoint: 2-d tie region; use the outer wedge bisector ray
                    dirs = []
                    if not s1.is_point:
                        sgn = -1.0 if f1[1] == "a" else 1.0
                        dirs.append((sgn * s1.ux, sgn * s1.uy))
                    if not s2.is_point:
                        sgn = -1.0 if f2[1] == "a" else 1.0
                        dirs.append((sgn * s2.ux, sgn * s2.uy))
                    if len(dirs) == 2:
                        bx = dirs[0][0] + dirs[1][0]
                        by = dirs[0][1] + dirs[1][1]
                        if math.hypot(bx, by) <= ptol:
                            bx, by = -dirs[0][1], dirs[0][0]
                        cands.append(line_piece(p, (bx, by), 0.0, INF, fa, fb))
                else:
                    mid = (0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]))
                    cands.append(line_piece(mid, (-(q[1] - p[1]), q[0] - p[0]),
                                            -INF, INF, fa, fb))
            elif f1[0] == "pt" or f2[0] == "pt":
                if f1[0] == "pt":
                    p = s1.endpoint(0 if f1[1] == "a" else 1)
                    g = s2
                    fa = ("pt", s1.sid, p[0], p[1])
                    fb = ("ln", s2.sid, g.ax, g.ay, g.ux, g.uy)
                else:
                    p = s2.endpoint(0 if f2[1] == "a" else 1)
                    g = s1
                    fa = ("pt", s2.sid, p[0], p[1])
                    fb = ("ln", s1.sid, g.ax, g.ay, g.ux, g.uy)
                off = (p[0] - g.ax) * (-g.uy) + (p[1] - g.ay) * g.ux
                if abs(off) <= ptol:
                    # focus on the directrix: degenerate to the normal line at p
                    cands.append(line_piece(p, (-g.uy, g.ux), -INF, INF, fa, fb))
                else:
                    cands.append(parabola_piece(p, (g.ax, g.ay), (g.ux, g.uy),
                                                -INF, INF, fa, fb))
            else:
                fa = ("ln", s1.sid, s1.ax, s1.ay, s1.ux, s1.uy)
                fb = ("ln", s2.sid, s2.ax, s2.ay, s2.ux, s2.uy)
                cr = s1.ux * s2.uy - s1.uy * s2.ux
                if abs(cr) <= 1e-12:
                    n1x, n1y = -s1.uy, s1.ux
                    d1 = s1.ax * n1x + s1.ay * n1y
                    d2 = s2.ax * n1x + s2.ay * n1y
                    if abs(d2 - d1) <= ptol:
                        continue  # collinear supporting lines: no midline
                    mid = (s1.ax + 0.5 * (d2 - d1) * n1x,
                           s1.ay + 0.5 * (d2 - d1) * n1y)
                    cands.append(line_piece(mid, (s1.ux, s1.uy), -INF, INF, fa, fb))
                else:
                    dx = s2.ax - s1.ax
                    dy = s2.ay - s1.ay
                    t1 = (dx * s2.uy - dy * s2.ux) / cr
                    X = (s1.ax + t1 * s1.ux, s1.ay + t1 * s1.uy)
                    for (wx, wy) in ((s1.ux + s2.ux, s1.uy + s2.uy),
                                     (s1.ux - s2.ux, s1.uy - s2.uy)):
                        if math.hypot(wx, wy) <= 1e-12:
                            continue
                        cands.append(line_piece(X, (wx, wy), -INF, INF, fa, fb))
            for cp in cands:
                for (lo, hi) in _allowed_intervals(cp, cons, tol * scale):
                    if hi - lo <= tol * scale:
                        continue
                    out.append(cp.clipped(lo, hi))
    return out, scale


def _validate_piece(piece: Piece, s1, s2, tol, scale):
    x, y = piece.midpoint()
    d1, _, _, _ = foot_on_segment(x, y, s1)
    d2, _, _, _ = foot_on_segment(x, y, s2)
    return abs(d1 - d2) <= 1e-6 * (1.0 + d1 + abs(x) + abs(y))


class Bisector:
    """Full bisector of two segments: one branch, or two crossing branches."""

    def __init__(self, s1: Segment, s2: Segment, branches):
        self.s1 = s1
        self.s2 = s2
        self.branches = branches  # list[Chain], oriented with s1 on the left

    @property
    def crossing(self):
        return len(self.branches) == 2


def _orient_chain_s1_left(chain: Chain, s1: Segment):
    votes = 0.0
    for p in chain.pieces:
        x, y = p.midpoint()
        t = 0.5 * (max(p.t0, -1e6) + min(p.t1, 1e6))
        tx, ty = p.tangent(t)
        _, fx, fy, _ = foot_on_segment(x, y, s1)
        wx, wy = fx - x, fy - y
        votes += tx * wy - ty * wx
    if votes >= 0.0:
        return chain
    return chain.reversed()


def _assemble_chains(pieces, scale):
    """Stitch pieces into chains; robust rewrite of _stitch."""
    ptol = 1e-6 * scale
    n = len(pieces)
    starts = [None] * n
    ends = [None] * n
    pts = []
    for k, p in enumerate(pieces):
        if p.t0 > -INF:
            starts[k] = p.eval(p.t0)
            pts.append((starts[k], k, 0))
        if p.t1 < INF:
            ends[k] = p.eval(p.t1)
            pts.append((ends[k], k, 1))
    nodes = []
    assign = {}
    for (xy, k, e) in pts:
        hit = None
        for ni, node in enumerate(nodes):
            if math.hypot(node[0][0] - xy[0], node[0][1] - xy[1]) <= ptol:
                hit = ni
                break
        if hit is None:
            nodes.append((xy, []))
            hit = len(nodes) - 1
        nodes[hit][1].append((k, e))
        assign[(k, e)] = hit

    used = [False] * n

    def leave_dir(k, e):
        p = pieces[k]
        t = p.t0 if e == 0 else p.t1
        tx, ty = p.tangent(t)
        return (tx, ty) if e == 0 else (-tx, -ty)

    def pick_next(ni, arrive_dir, exclude):
        cands = [(k, e) for (k, e) in nodes[ni][1] if not used[k] and k != exclude]
        if not cands:
            return None
        best, bestdot = None, -2.0
        for (k, e) in cands:
            dx, dy = leave_dir(k, e)
            dot = dx * arrive_dir[0] + dy * arrive_dir[1]
            if dot > bestdot:
                bestdot, best = dot, (k, e)
        return best

    chains = []
    seeds = [k for k, p in enumerate(pieces) if p.t0 == -INF or p.t1 == INF]
    seeds += [k for k in range(n) if k not in seeds]
    for k0 in seeds:
        if used[k0]:
            continue
        p0 = pieces[k0]
        used[k0] = True
        if p0.t0 == -INF and p0.t1 == INF:
            chains.append(Chain([p0]))
            continue
        if p0.t1 == INF:
            p0 = p0.reversed()  # walk so the unbounded end is first... keep start at -inf
        # build forward list from p0 walking toward increasing t
        seq = [p0]
        while seq[-1].t1 < INF:
            k = None
            last = seq[-1]
            # identify original index/end for the node lookup
            # we track by geometry: find node at the end point
            ex, ey = last.eval(last.t1)
            ni = None
            for cand_ni, node in enumerate(nodes):
                if math.hypot(node[0][0] - ex, node[0][1] - ey) <= ptol:
                    ni = cand_ni
                    break
            if ni is None:
                break
            tx, ty = last.tangent(last.t1)
            nxt = pick_next(ni, (tx, ty), exclude=None)
            if nxt is None:
                break
            nk, ne = nxt
            used[nk] = True
            np_ = pieces[nk] if ne == 0 else pieces[nk].reversed()
            seq.append(np_)
        # also extend backward from the start if it is finite
        while seq[0].t0 > -INF:
            first = seq[0]
            sx, sy = first.eval(first.t0)
            ni = None
            for cand_ni, node in enumerate(nodes):
                if math.hypot(node[0][0] - sx, node[0][1] - sy) <= ptol:
                    ni = cand_ni
                    break
            if ni is None:
                break
            tx, ty = first.tangent(first.t0)
            nxt = pick_next(ni, (-tx, -ty), exclude=None)
            if nxt is None:
                break
            nk, ne = nxt
            used[nk] = True
            # the inserted piece must end at this node
            np_ = pieces[nk] if ne == 1 else pieces[nk].reversed()
            seq.insert(0, np_)
        chains.append(Chain(seq))
    return chains


def segments_properly_cross(s1: Segment, s2: Segment, tol=1e-12):
    def orient(ax, ay, bx, by, cx, cy):
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if s1.is_point or s2.is_point:
        return False
    o1 = orient(s1.ax, s1.ay, s1.bx, s1.by, s2.ax, s2.ay)
    o2 = orient(s1.ax, s1.ay, s1.bx, s1.by, s2.bx, s2.by)
    o3 = orient(s2.ax, s2.ay, s2.bx, s2.by, s1.ax, s1.ay)
    o4 = orient(s2.ax, s2.ay, s2.bx, s2.by, s1.bx, s1.by)
    return (o1 * o2 < -tol) and (o3 * o4 < -tol)


def _collinear_overlap(s1: Segment, s2: Segment, tol):
    if s1.is_point or s2.is_point:
        if s1.is_point and s2.is_point:
            return math.hypot(s1.ax - s2.ax, s1.ay - s2.ay) <= tol
        return False
    cr = s1.ux * s2.uy - s1.uy * s2.ux
    if abs(cr) > 1e-9:
        return False
    off = (s2.ax - s1.ax) * (-s1.uy) + (s2.ay - s1.ay) * s1.ux
    if abs(off) > tol:
        return False
    ta = (s2.ax - s1.ax) * s1.ux + (s2.ay - s1.ay) * s1.uy
    tb = (s2.bx - s1.ax) * s1.ux + (s2.by - s1.ay) * s1.uy
    lo, hi = min(ta, tb), max(ta, tb)
    return hi > tol and lo < s1.length - tol


def bisector_segments(s1: Segment, s2: Segment, tol: float = EPS) -> Bisector:
    """Full bisector curve(s) of two segment sites."""
    if s1.sid == s2.sid:
        raise GeometryError("bisector of a site with itself")
    scale = 1.0 + max(abs(v) for v in (s1.ax, s1.ay, s1.bx, s1.by,
                                       s2.ax, s2.ay, s2.bx, s2.by))
    if _collinear_overlap(s1, s2, tol * scale):
        raise OverlappingSegments(f"{s1.sid} and {s2.sid} overlap")
    pieces, scale = _candidate_pieces(s1, s2, tol)
    pieces = [p for p in pieces if _validate_piece(p, s1, s2, tol, scale)]
    chains = _assemble_chains(pieces, scale)
    # drop stray micro-chains (both ends finite and tiny)
    keep = []
    for ch in chains:
        if ch.start_unbounded() or ch.end_unbounded():
            keep.append(ch)
            continue
        a = ch.start_point()
        b = ch.end_point()
        if a and b and math.hypot(a[0] - b[0], a[1] - b[1]) > 1e-6 * scale:
            keep.append(ch)
    chains = keep
    chains = [_orient_chain_s1_left(ch, s1) for ch in chains]
    return Bisector(s1, s2, chains)


def equidistance_error(bis: Bisector, samples: int = 64):
    """Max relative equidistance violation over sampled points."""
    worst = 0.0
    for ch in bis.branches:
        for (x, y) in ch.sample(samples):
            d1, _, _, _ = foot_on_segment(x, y, bis.s1)
            d2, _, _, _ = foot_on_segment(x, y, bis.s2)
            err = abs(d1 - d2) / (1.0 + d1)
            worst = max(worst, err)
    return worst
