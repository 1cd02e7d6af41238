"""Cyclic arc sequences: attainable regions, arc and artificial bisectors,
and the deletion/insertion bookkeeping used by both builders.

A sequence is a doubly-linked circular list of arcs.  Each link carries the
separator direction between its two arcs.  Arc identity is stable: original
arcs keep their Gaussian-map interval (used for re-entry tests) while their
current interval is implied by the neighboring separators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .geometry import (
    EPS,
    INF,
    TWO_PI,
    Chain,
    GeometryError,
    Segment,
    angle_in,
    ang_mid,
    angle_of,
    away_dir,
    bisector_segments,
    ccw_span,
    chain_intersections,
    foot_on_segment,
    line_piece,
    norm_angle,
)
from .gmap import Arc, GaussianMap, Sep


class SequenceError(GeometryError):
    pass


class TooFewArcs(SequenceError):
    pass


class EntryNotFound(SequenceError):
    pass


class UndefinedBisector(SequenceError):
    pass


class ArcNode:
    __slots__ = ("aid", "site", "kind", "anchor", "lo", "hi", "nu_self",
                 "origin", "prv", "nxt", "sep", "sub_ids")

    def __init__(self, aid, site, kind, anchor, lo, hi, nu_self, origin):
        self.aid = aid
        self.site = site
        self.kind = kind
        self.anchor = anchor
        self.lo = lo          # original interval (meaningful for originals)
        self.hi = hi
        self.nu_self = nu_self
        self.origin = origin
        self.prv = None
        self.nxt = None
        self.sep = None       # separator between self and nxt
        self.sub_ids = None   # ids united into this node (deterministic builder)

    def cur_lo(self):
        return self.prv.sep.nu

    def cur_hi(self):
        return self.sep.nu

    def __repr__(self):
        return f"ArcNode({self.aid}:{self.site}:{self.origin[0]})"


@dataclass
class SeqSep:
    nu: float
    kind: str = "support"        # 'support' | 'artificial'
    pair: Optional[tuple] = None
    edge: Optional[int] = None   # unbounded diagram edge at this separator


class ArcSequence:
    """Circular sequence of arcs with one separator per adjacency."""

    def __init__(self, sites):
        self.sites = sites        # sid -> Segment
        self.head = None
        self.n = 0
        self.next_aid = 0
        self.proper = False

    # -- construction -----------------------------------------------------

    @classmethod
    def from_gmap(cls, g: GaussianMap) -> "ArcSequence":
        seq = cls(dict(g.sites))
        nodes = [ArcNode(a.aid, a.site, a.kind, a.anchor, a.lo, a.hi,
                         a.nu_self, "original") for a in g.arcs]
        m = len(nodes)
        for i, node in enumerate(nodes):
            node.nxt = nodes[(i + 1) % m]
            node.prv = nodes[(i - 1) % m]
            s = g.seps[i]
            node.sep = SeqSep(s.nu, s.kind, s.pair)
        seq.head = nodes[0]
        seq.n = m
        seq.next_aid = max(n.aid for n in nodes) + 1
        seq.proper = True
        return seq

    def fresh_aid(self):
        aid = self.next_aid
        self.next_aid += 1
        return aid

    def nodes(self):
        out = []
        node = self.head
        for _ in range(self.n):
            out.append(node)
            node = node.nxt
        return out

    def find(self, aid):
        node = self.head
        for _ in range(self.n):
            if node.aid == aid:
                return node
            node = node.nxt
        return None

    def segment(self, node_or_site):
        sid = node_or_site.site if isinstance(node_or_site, ArcNode) else node_or_site
        return self.sites[sid]

    def check_coverage(self, tol=1e-7):
        total = sum(ccw_span(nd.cur_lo(), nd.cur_hi()) for nd in self.nodes())
        return abs(total - TWO_PI) <= tol

    # -- splicing ----------------------------------------------------------

    def unlink(self, node: ArcNode):
        if self.n <= 1:
            raise TooFewArcs("cannot empty the sequence")
        node.prv.nxt = node.nxt
        node.nxt.prv = node.prv
        if self.head is node:
            self.head = node.nxt
        self.n -= 1

    def link_after(self, anchor: ArcNode, node: ArcNode, sep: SeqSep):
        """Insert node after anchor; `sep` becomes the separator anchor->node,
        the old anchor separator moves to node->anchor.nxt."""
        node.sep = anchor.sep
        anchor.sep = sep
        node.nxt = anchor.nxt
        node.prv = anchor
        anchor.nxt.prv = node
        anchor.nxt = node
        self.n += 1


# ---------------------------------------------------------------------------
# support-function ties

def support_ties(sa: Segment, sb: Segment, tol: float = EPS):
    """Directions where the two support functions tie, with realizers.

    Returns [(nu, (sid_a, which_a), (sid_b, which_b), cw_is_a)] where
    cw_is_a means sa has the smaller support just clockwise of nu.
    """
    out = []
    ea = ((0,) if sa.is_point else (0, 1))
    eb = ((0,) if sb.is_point else (0, 1))
    scale = 1.0 + max(abs(sa.ax), abs(sa.ay), abs(sa.bx), abs(sa.by),
                      abs(sb.ax), abs(sb.ay), abs(sb.bx), abs(sb.by))
    for wa in ea:
        p = sa.endpoint(wa)
        for wb in eb:
            q = sb.endpoint(wb)
            dx, dy = q[0] - p[0], q[1] - p[1]
            if math.hypot(dx, dy) <= tol * scale:
                continue
            for nu in (angle_of(dy, -dx), angle_of(-dy, dx)):
                c, s = math.cos(nu), math.sin(nu)
                hp = p[0] * c + p[1] * s
                if sa.support(nu) > hp + tol * scale:
                    continue
                if sb.support(nu) > hp + tol * scale:
                    continue
                px, py = -s, c
                side_p = p[0] * px + p[1] * py
                side_q = q[0] * px + q[1] * py
                cw_is_a = side_p > side_q
                out.append((nu, (sa.sid, wa), (sb.sid, wb), cw_is_a))
    return out


# ---------------------------------------------------------------------------
# attainability

def arc_attainable(node: ArcNode, seg: Segment, x, y, ang_tol=1e-9):
    """Is (x, y) attainable from the arc's current interval?"""
    v = away_dir(x, y, seg)
    if v is None:
        return True
    th = angle_of(v[0], v[1])
    return angle_in(th, node.cur_lo(), node.cur_hi(), ang_tol)


def interval_attainable(lo, hi, seg: Segment, x, y, ang_tol=1e-9):
    v = away_dir(x, y, seg)
    if v is None:
        return True
    return angle_in(angle_of(v[0], v[1]), lo, hi, ang_tol)


@dataclass
class AttainableRegion:
    site: str
    lo: float
    hi: float
    ray_lo: tuple   # ((ox, oy), (dx, dy))
    ray_hi: tuple

    def contains(self, seg: Segment, x, y, ang_tol=1e-9):
        return interval_attainable(self.lo, self.hi, seg, x, y, ang_tol)


def boundary_ray(seg: Segment, theta: float):
    """The attainability-limit ray at direction theta: from the endpoint
    realizing the support in that direction."""
    w = seg.support_realizer(theta)
    if w == 2:
        w = 0
    o = seg.endpoint(w)
    return (o, (math.cos(theta), math.sin(theta)))


def attainable_region(lo, hi, seg: Segment) -> AttainableRegion:
    return AttainableRegion(seg.sid, lo, hi, boundary_ray(seg, lo), boundary_ray(seg, hi))


# ---------------------------------------------------------------------------
# arc bisectors: full bisectors clipped to attainable regions

def clip_chains_to_intervals(branches, s1: Segment, lo1, hi1, s2: Segment, lo2, hi2,
                             ang_tol=1e-9):
    """Portions of the bisector branches attainable from both intervals.

    Passing lo=None for a side skips that side's clipping entirely.
    """
    rays = []
    for (seg, lo, hi) in ((s1, lo1, hi1), (s2, lo2, hi2)):
        if lo is None:
            continue
        # the away direction flips across the segment itself, so the site is
        # part of the attainable-region boundary as well
        if not seg.is_point:
            rays.append(Chain([line_piece(seg.a, (seg.ux, seg.uy), 0.0, seg.length)]))
        if ccw_span(lo, hi) >= TWO_PI - 1e-12 and abs(hi - lo) > 1e-12:
            continue
        for th in (lo, hi):
            (ox, oy), (dx, dy) = boundary_ray(seg, th)
            rays.append(Chain([line_piece((ox, oy), (dx, dy), 0.0, INF)]))
    pieces_out = []
    for br in branches:
        cuts = []
        for ray in rays:
            for (la, lb, x, y) in chain_intersections(br, ray):
                cuts.append(la)
        cuts = sorted(set(cuts))
        jtol = 1e-9
        joint_breaks = set()
        interior = []
        for (pi, t) in cuts:
            p = br.pieces[pi]
            if t <= p.t0 + jtol:
                joint_breaks.add(pi)
            elif t >= p.t1 - jtol:
                joint_breaks.add(pi + 1)
            else:
                interior.append((pi, t))
        fragments = []
        cur = []
        for i, p in enumerate(br.pieces):
            if i in joint_breaks and cur:
                fragments.append(cur)
                cur = []
            ts = sorted(t for (pi, t) in interior if pi == i)
            t0 = p.t0
            for t in ts:
                cur.append(p.clipped(t0, t))
                fragments.append(cur)
                cur = []
                t0 = t
            cur.append(p.clipped(t0, p.t1))
        if cur:
            fragments.append(cur)
        scale = 1.0 + max(abs(s1.ax), abs(s1.ay), abs(s2.ax), abs(s2.ay))
        for fr in fragments:
            span = sum(min(p.t1, 1e30) - max(p.t0, -1e30) for p in fr)
            if span <= 1e-7 * scale:
                continue
            mp = fr[len(fr) // 2]
            x, y = mp.midpoint()
            ok1 = lo1 is None or interval_attainable(lo1, hi1, s1, x, y, ang_tol)
            ok2 = lo2 is None or interval_attainable(lo2, hi2, s2, x, y, ang_tol)
            if ok1 and ok2:
                pieces_out.append(Chain(fr))
    # restitch fragments that share endpoints (e.g. across a crossing point)
    return _merge_touching(pieces_out)


def _merge_touching(chains, tol=1e-7):
    if len(chains) <= 1:
        return chains

    def close(p, q):
        return p is not None and q is not None and \
            math.hypot(p[0] - q[0], p[1] - q[1]) <= tol * (1 + abs(p[0]) + abs(p[1]))

    chains = list(chains)
    merged = True
    while merged:
        merged = False
        for i in range(len(chains)):
            for j in range(len(chains)):
                if i == j:
                    continue
                a, b = chains[i], chains[j]
                if close(a.end_point(), b.start_point()):
                    chains[i] = Chain(a.pieces + b.pieces)
                elif close(a.end_point(), b.end_point()):
                    chains[i] = Chain(a.pieces + b.reversed().pieces)
                elif close(a.start_point(), b.end_point()):
                    chains[i] = Chain(b.pieces + a.pieces)
                elif close(a.start_point(), b.start_point()):
                    chains[i] = Chain(b.reversed().pieces + a.pieces)
                else:
                    continue
                chains.pop(j)
                merged = True
                break
            if merged:
                break
    return chains


class BisectorCache:
    """Full bisectors keyed by site pair; shared across one build."""

    def __init__(self, sites):
        self.sites = sites
        self.store = {}

    def get(self, sid1, sid2):
        key = (sid1, sid2) if sid1 < sid2 else (sid2, sid1)
        bis = self.store.get(key)
        if bis is None:
            bis = bisector_segments(self.sites[key[0]], self.sites[key[1]])
            self.store[key] = bis
        return bis


def arc_bisector(node_a: ArcNode, node_b: ArcNode, seq: ArcSequence,
                 cache: BisectorCache):
    """Connected component(s) of the two arcs' bisector within both
    attainable regions.  Raises UndefinedBisector for same-site arcs that
    are not consecutive."""
    if node_a.site == node_b.site:
        if node_b is node_a.nxt or node_b is node_a.prv:
            raise UndefinedBisector("consecutive same-site arcs: artificial bisector")
        raise UndefinedBisector("same-site arcs are not adjacent")
    bis = cache.get(node_a.site, node_b.site)
    s1 = seq.segment(node_a)
    s2 = seq.segment(node_b)
    return clip_chains_to_intervals(bis.branches, s1, node_a.cur_lo(), node_a.cur_hi(),
                                    s2, node_b.cur_lo(), node_b.cur_hi())


def artificial_bisector_chain(seg: Segment, nu: float):
    """Separator geometry between consecutive same-site arcs: the ray in
    direction nu from the realizing endpoint, optionally extendable along
    the segment itself toward the other endpoint."""
    w = seg.support_realizer(nu)
    if w == 2:
        w = 0
    p = seg.endpoint(w)
    ray = line_piece(p, (math.cos(nu), math.sin(nu)), 0.0, INF)
    if seg.is_point:
        return Chain([ray]), None
    q = seg.endpoint(1 - w)
    prefix = line_piece(q, (p[0] - q[0], p[1] - q[1]), 0.0, seg.length)
    return Chain([prefix, ray]), q


# ---------------------------------------------------------------------------
# deletion

@dataclass
class DeletionRecord:
    arc: ArcNode                 # the removed node (unlinked, keeps payload)
    pred_aid: int
    succ_aid: int
    position_label: str          # 'within' | 'counterclockwise' | 'clockwise'
    stored_nu: Optional[float] = None   # separator from the same-site neighbor
    stored_side: Optional[str] = None   # 'pred' | 'succ'
    removed_seps: tuple = ()


def _new_separator(seq: ArcSequence, alpha: ArcNode, gamma: ArcNode,
                   zone_lo: float, zone_hi: float, full_zone: bool = False):
    """Separator direction between distinct-site neighbors after a deletion."""
    sa = seq.segment(alpha)
    sg = seq.segment(gamma)
    cands = []
    for (nu, ka, kb, cw_is_a) in support_ties(sa, sg, EPS):
        if not cw_is_a:
            continue
        if not full_zone and not angle_in(nu, zone_lo, zone_hi, 1e-9):
            continue
        cands.append((nu, ka, kb))
    if not cands:
        raise SequenceError(
            f"no support tie between {sa.sid} and {sg.sid} in zone "
            f"[{zone_lo:.4f},{zone_hi:.4f}]")
    if len(cands) > 1:
        # prefer a tie inside the vacated span between the old intervals
        span_lo = alpha.cur_hi()
        span_hi = gamma.cur_lo()
        inside = [c for c in cands if angle_in(c[0], span_lo, span_hi, 1e-9)]
        if inside:
            cands = inside
        if len(cands) > 1:
            mid = ang_mid(span_lo, span_hi)
            cands.sort(key=lambda c: abs((c[0] - mid + math.pi) % TWO_PI - math.pi))
    nu, ka, kb = cands[0]
    return SeqSep(nu, "support", (ka, kb))


def delete_arc(seq: ArcSequence, node: ArcNode) -> DeletionRecord:
    """Remove an arc; neighbors expand per the sequence-deletion rules."""
    if seq.n < 3:
        raise TooFewArcs("deletion needs at least three arcs")
    alpha = node.prv
    gamma = node.nxt
    sep_ab = alpha.sep     # alpha | node
    sep_bg = node.sep      # node | gamma
    b_lo, b_hi = node.cur_lo(), node.cur_hi()
    stored_nu = None
    stored_side = None
    label = "within"
    if alpha.site == node.site:
        # alpha expands over all of node; the node->gamma separator survives
        stored_nu = sep_ab.nu
        stored_side = "pred"
        new_sep = node.sep
        label = "within"
    elif gamma.site == node.site:
        stored_nu = sep_bg.nu
        stored_side = "succ"
        new_sep = alpha.sep
        label = "within"
    elif alpha.site == gamma.site:
        if node.nu_self is None:
            raise SequenceError(
                f"deleted arc {node.aid} between same-site neighbors must be "
                "a segment arc")
        new_sep = SeqSep(node.nu_self, "artificial", None)
        label = "within"
    else:
        zone_lo = alpha.cur_lo()
        zone_hi = gamma.cur_hi()
        new_sep = _new_separator(seq, alpha, gamma, zone_lo, zone_hi,
                                 full_zone=(gamma.nxt is alpha))
        if angle_in(new_sep.nu, b_lo, b_hi, 1e-9):
            label = "within"
        elif angle_in(new_sep.nu, zone_lo, b_lo, 1e-9):
            label = "counterclockwise"   # alpha shrank
        else:
            label = "clockwise"          # gamma shrank
    rec = DeletionRecord(node, alpha.aid, gamma.aid, label,
                         stored_nu, stored_side, (sep_ab, sep_bg))
    seq.unlink(node)
    alpha.sep = new_sep
    return rec


# ---------------------------------------------------------------------------
# insertion planning (the scan; the geometric surgery lives in diagram.py)

@dataclass
class InsertionPlan:
    kind: str                       # 'pair' | 'split' | 'samesite'
    arc: ArcNode                    # the original arc to insert
    left: Optional[ArcNode] = None  # pair: left of the entry separator
    container: Optional[ArcNode] = None  # split: arc containing the new one
    neighbor: Optional[ArcNode] = None   # samesite: arc to split
    nu: Optional[float] = None           # samesite split direction
    side: Optional[str] = None           # samesite: 'pred' or 'succ'
    scanned_new_arcs: int = 0
    deleted_new_arcs: list = field(default_factory=list)  # filled by surgery


def find_entry(seq: ArcSequence, rec: DeletionRecord) -> InsertionPlan:
    """Locate the re-entry position for a recorded arc.

    Walks simultaneously clockwise and counterclockwise from the recorded
    neighbors over intervening new arcs, per the re-entry scan.
    """
    beta = rec.arc
    if rec.stored_nu is not None:
        nbr_aid = rec.pred_aid if rec.stored_side == "pred" else rec.succ_aid
        nbr = seq.find(nbr_aid)
        if nbr is None:
            raise EntryNotFound(f"recorded neighbor {nbr_aid} missing")
        return InsertionPlan("samesite", beta, neighbor=nbr, nu=rec.stored_nu,
                             side=rec.stored_side)
    pred = seq.find(rec.pred_aid)
    succ = seq.find(rec.succ_aid)
    if pred is None or succ is None:
        raise EntryNotFound("recorded neighbors missing from sequence")

    def pair_ok(left):
        return angle_in(left.sep.nu, beta.lo, beta.hi, 1e-9)

    def split_ok(nd):
        w = ccw_span(nd.cur_lo(), nd.cur_hi())
        if w <= 1e-12:
            return False
        a = ccw_span(nd.cur_lo(), beta.lo)
        b = ccw_span(nd.cur_lo(), beta.hi)
        return a <= w + 1e-9 and b <= w + 1e-9 and a <= b

    # candidate pairs between pred and succ (ccw): walk from both sides
    fwd = pred
    bwd = succ
    scanned = 0
    guard = 0
    while guard <= seq.n + 2:
        guard += 1
        if pair_ok(fwd):
            plan = InsertionPlan("pair", beta, left=fwd)
            plan.scanned_new_arcs = scanned
            return plan
        if fwd is not succ and split_ok(fwd) and fwd is not pred:
            plan = InsertionPlan("split", beta, container=fwd)
            plan.scanned_new_arcs = scanned
            return plan
        if bwd is not pred and bwd is not succ and split_ok(bwd):
            plan = InsertionPlan("split", beta, container=bwd)
            plan.scanned_new_arcs = scanned
            return plan
        if bwd.prv is not fwd and bwd is not fwd:
            if pair_ok(bwd.prv):
                plan = InsertionPlan("pair", beta, left=bwd.prv)
                plan.scanned_new_arcs = scanned
                return plan
        progressed = False
        if fwd is not succ and fwd.nxt is not succ:
            fwd = fwd.nxt
            scanned += 1
            progressed = True
        if bwd is not pred and bwd.prv is not pred and bwd.prv is not fwd:
            bwd = bwd.prv
            scanned += 1
            progressed = True
        if not progressed:
            break
    # last resort: scan the whole sequence (covers containers that absorbed
    # the recorded neighbors themselves)
    for nd in seq.nodes():
        if pair_ok(nd):
            plan = InsertionPlan("pair", beta, left=nd)
            plan.scanned_new_arcs = scanned
            return plan
    for nd in seq.nodes():
        if split_ok(nd):
            plan = InsertionPlan("split", beta, container=nd)
            plan.scanned_new_arcs = scanned
            return plan
    raise EntryNotFound(f"no entry for arc {beta.aid}")
