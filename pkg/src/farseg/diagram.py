"""Tree-structured farthest diagram of an arc sequence.

The diagram is a planar tree whose faces correspond one-to-one to the arcs
of the sequence; every face is unbounded over its arc's angular gap.  The
incremental step carves one arc's region by walking its boundary from its
counterclockwise terminal direction inward, crossing existing edges until
it escapes back to infinity on the clockwise side; everything strictly
inside the walked boundary is removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (
    EPS,
    INF,
    TWO_PI,
    Chain,
    GeometryError,
    angle_in,
    angle_of,
    ang_mid,
    away_dir,
    ccw_span,
    chain_intersections,
    foot_on_segment,
    line_piece,
    norm_angle,
)
from .arcs import (
    ArcNode,
    ArcSequence,
    BisectorCache,
    InsertionPlan,
    SeqSep,
    artificial_bisector_chain,
    clip_chains_to_intervals,
)

INFV = -1  # vertex id standing for the point at infinity


class DiagramError(GeometryError):
    pass


class BadBaseCase(DiagramError):
    pass


class TraceDiverged(DiagramError):
    pass


class Vertex:
    __slots__ = ("vid", "x", "y", "edges")

    def __init__(self, vid, x, y):
        self.vid = vid
        self.x = x
        self.y = y
        self.edges = []


class DEdge:
    __slots__ = ("eid", "chain", "va", "vb", "fa", "fb", "kind", "seps")

    def __init__(self, eid, chain, va, vb, fa, fb, kind):
        self.eid = eid
        self.chain = chain   # directed va -> vb
        self.va = va
        self.vb = vb
        self.fa = fa         # arc id on the left of the chain direction
        self.fb = fb         # arc id on the right
        self.kind = kind     # 'bis' | 'art'
        self.seps = []       # SeqSep records whose unbounded edge this is

    def other_face(self, aid):
        return self.fb if self.fa == aid else self.fa

    def __repr__(self):
        return f"DEdge({self.eid},{self.fa}|{self.fb},{self.kind})"


def _ang_close(a, b, tol=1e-5):
    return abs((a - b + math.pi) % TWO_PI - math.pi) <= tol


class Diagram:
    def __init__(self, seq: ArcSequence, cache: BisectorCache = None):
        self.seq = seq
        self.cache = cache if cache is not None else BisectorCache(seq.sites)
        self.verts = {}
        self.edges = {}
        self.face_edges = {}
        self.next_vid = 0
        self.next_eid = 0
        self.scale = self._scale()
        self.stats = {"crossings": 0, "new_arcs": 0, "deleted_new_arcs": 0,
                      "scanned_new_arcs": 0, "insertions": 0, "max_ratio_2i": 0.0}

    def _scale(self):
        vals = [1.0]
        for s in self.seq.sites.values():
            vals += [abs(s.ax), abs(s.ay), abs(s.bx), abs(s.by)]
        return max(vals)

    # -- primitives ---------------------------------------------------------

    def new_vertex(self, x, y) -> Vertex:
        v = Vertex(self.next_vid, x, y)
        self.next_vid += 1
        self.verts[v.vid] = v
        return v

    def add_edge(self, chain, va, vb, fa, fb, kind) -> DEdge:
        e = DEdge(self.next_eid, chain, va, vb, fa, fb, kind)
        self.next_eid += 1
        self.edges[e.eid] = e
        for v in (va, vb):
            if v != INFV:
                self.verts[v].edges.append(e.eid)
        for f in (fa, fb):
            self.face_edges.setdefault(f, set()).add(e.eid)
        return e

    def drop_edge(self, e: DEdge):
        for v in (e.va, e.vb):
            if v != INFV and v in self.verts:
                ve = self.verts[v].edges
                if e.eid in ve:
                    ve.remove(e.eid)
        for f in (e.fa, e.fb):
            s = self.face_edges.get(f)
            if s is not None:
                s.discard(e.eid)
        self.edges.pop(e.eid, None)

    def vertex_near(self, x, y, tol=None):
        tol = tol if tol is not None else 1e-7 * self.scale
        for v in self.verts.values():
            if abs(v.x - x) <= tol and abs(v.y - y) <= tol:
                return v
        return None

    def seg(self, node_or_sid):
        return self.seq.segment(node_or_sid)

    def d_att(self, node: ArcNode, x, y):
        """Distance to the arc; -inf when unattainable from its interval."""
        s = self.seg(node)
        d, fx, fy, _ = foot_on_segment(x, y, s)
        if d <= EPS * self.scale:
            return d
        th = angle_of(x - fx, y - fy)
        if angle_in(th, node.cur_lo(), node.cur_hi(), 1e-9):
            return d
        return -INF

    # -- point location -------------------------------------------------------

    def farthest_arc_at(self, q, retries=7):
        """Arc of the face containing q, walking in from an unbounded face."""
        if not self.edges:
            return self.seq.head.aid
        starts = sorted(self.seq.nodes(),
                        key=lambda nd: -ccw_span(nd.cur_lo(), nd.cur_hi()))
        shift = 0.0
        for attempt in range(retries):
            node = starts[attempt % min(3, len(starts))]
            width = ccw_span(node.cur_lo(), node.cur_hi())
            phi = norm_angle(node.cur_lo() + width * (0.5 + 0.31 * shift))
            if not angle_in(phi, node.cur_lo(), node.cur_hi()):
                phi = ang_mid(node.cur_lo(), node.cur_hi())
            R = 64.0 * self.scale * (1 + attempt) + abs(q[0]) + abs(q[1])
            sx, sy = R * math.cos(phi), R * math.sin(phi)
            dx, dy = q[0] - sx, q[1] - sy
            ln = math.hypot(dx, dy)
            probe = Chain([line_piece((sx, sy), (dx, dy), 0.0, ln)])
            hits = []
            for e in self.edges.values():
                for (lp, le, x, y) in chain_intersections(probe, e.chain):
                    hits.append((lp, e, x, y))
            hits.sort(key=lambda h: h[0])
            cur = node.aid
            ok = True
            for (lp, e, x, y) in hits:
                if math.hypot(x - q[0], y - q[1]) <= 1e-9 * self.scale:
                    return cur
                if cur not in (e.fa, e.fb):
                    ok = False
                    break
                cur = e.other_face(cur)
            if ok:
                return cur
            shift += 0.0137 + attempt * 0.011
        raise TraceDiverged("point location failed")

    def locate_site(self, q):
        nd = self.seq.find(self.farthest_arc_at(q))
        return nd.site if nd is not None else None

    def edge_jitter_points(self, per_edge=2, offsets=(1e-5, 1e-4)):
        pts = []
        for e in self.edges.values():
            for (x, y) in e.chain.sample(per_edge, pad=2.0):
                p = e.chain.pieces[0]
                tx, ty = p.tangent(0.5 * (max(p.t0, -8) + min(p.t1, 8)))
                for off in offsets:
                    d = off * self.scale
                    pts.append((x - ty * d, y + tx * d))
                    pts.append((x + ty * d, y - tx * d))
        return pts

    # -- validation ----------------------------------------------------------

    def validate(self, samples_per_edge=3):
        report = {"ok": True, "errors": []}

        def fail(msg):
            report["ok"] = False
            report["errors"].append(msg)

        nodes = self.seq.nodes()
        aids = {nd.aid for nd in nodes}
        for f in self.face_edges:
            if self.face_edges[f] and f not in aids:
                fail(f"face {f} has no arc")
        for nd in nodes:
            if not self.face_edges.get(nd.aid):
                fail(f"arc {nd.aid} has no face boundary")
        parent = {v: v for v in self.verts}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges.values():
            if e.va != INFV and e.vb != INFV:
                ra, rb = find(e.va), find(e.vb)
                if ra == rb:
                    fail(f"cycle through edge {e.eid}")
                else:
                    parent[ra] = rb
        if self.verts and len({find(v) for v in self.verts}) > 1:
            fail("finite graph disconnected")
        nE, nV, nF = len(self.edges), len(self.verts), len(nodes)
        if nE != nV + nF - 1:
            fail(f"count mismatch: E={nE} V={nV} F={nF}")
        n_art = sum(1 for e in self.edges.values() if e.kind == "art")
        if nE > 2 * nF - 3 + n_art and nF > 2:
            fail(f"edge bound violated: E={nE} F={nF} art={n_art}")
        for v in self.verts.values():
            if len(v.edges) < 3:
                kinds = {self.edges[e].kind for e in v.edges if e in self.edges}
                if "art" not in kinds:
                    fail(f"vertex {v.vid} degree {len(v.edges)} without artificial edge")
        for nd in nodes:
            sep = nd.sep
            if sep.edge is None or sep.edge not in self.edges:
                fail(f"separator {sep.nu:.4f} lacks an unbounded edge")
                continue
            e = self.edges[sep.edge]
            dirs = []
            if e.va == INFV:
                dirs.append(angle_of(*e.chain.start_dir()))
            if e.vb == INFV:
                dirs.append(angle_of(*e.chain.end_dir()))
            if not dirs:
                fail(f"separator edge {e.eid} has no unbounded end")
            elif not any(_ang_close(d, sep.nu, 1e-4) for d in dirs):
                fail(f"separator {sep.nu:.4f} direction mismatch on edge {e.eid}")
        for e in self.edges.values():
            if e.fa == e.fb:
                fail(f"edge {e.eid} separates a face from itself")
            for f in (e.fa, e.fb):
                if f not in aids:
                    fail(f"edge {e.eid} borders removed arc {f}")
        # away-ray containment on sampled boundary points
        for e in self.edges.values():
            if e.kind != "bis":
                continue
            nd_a = self.seq.find(e.fa)
            nd_b = self.seq.find(e.fb)
            if nd_a is None or nd_b is None:
                continue
            for (x, y) in e.chain.sample(samples_per_edge, pad=2.0):
                for nd, other in ((nd_a, nd_b), (nd_b, nd_a)):
                    s = self.seg(nd)
                    v = away_dir(x, y, s)
                    if v is None:
                        continue
                    zx = x + v[0] * 2.0 * self.scale
                    zy = y + v[1] * 2.0 * self.scale
                    d_f = foot_on_segment(zx, zy, s)[0]
                    d_o = self.d_att(other, zx, zy)
                    if d_o > d_f * (1 + 1e-6) + 1e-6:
                        fail(f"away-ray exits face {nd.aid} across edge {e.eid}")
                        break
        return report


# ---------------------------------------------------------------------------
# shared helpers

def _left_face_probe(diag: Diagram, chain: Chain, cand_a: ArcNode, cand_b: ArcNode):
    """Order the two candidate arcs as (left, right) of the directed chain."""
    for p in chain.pieces:
        t0 = p.t0 if p.t0 > -INF else min(p.t1, 0.0) - 4.0 * diag.scale
        t1 = p.t1 if p.t1 < INF else max(p.t0, 0.0) + 4.0 * diag.scale
        for frac in (0.5, 0.25, 0.75):
            t = t0 + (t1 - t0) * frac
            x, y = p.eval(t)
            tx, ty = p.tangent(t)
            off = 1e-5 * diag.scale
            lx, ly = x - ty * off, y + tx * off
            rx, ry = x + ty * off, y - tx * off
            da = diag.d_att(cand_a, lx, ly)
            db = diag.d_att(cand_b, lx, ly)
            if da > db:
                return cand_a, cand_b
            if db > da:
                return cand_b, cand_a
            da = diag.d_att(cand_a, rx, ry)
            db = diag.d_att(cand_b, rx, ry)
            if da > db:
                return cand_b, cand_a
            if db > da:
                return cand_a, cand_b
    raise TraceDiverged("side probe failed")


def _split_edge_at(diag: Diagram, e: DEdge, loc, v: Vertex):
    """Split an edge at a chain location; both halves become new edges."""
    left, right = e.chain.split_at(loc)
    if left is None or right is None:
        raise TraceDiverged("edge split at its own end")
    seps = list(e.seps)
    diag.drop_edge(e)
    e1 = diag.add_edge(left, e.va, v.vid, e.fa, e.fb, e.kind)
    e2 = diag.add_edge(right, v.vid, e.vb, e.fa, e.fb, e.kind)
    for sp in seps:
        if e1.va == INFV and _ang_close(angle_of(*e1.chain.start_dir()), sp.nu, 1e-4):
            sp.edge = e1.eid
            e1.seps.append(sp)
        elif e2.vb == INFV and _ang_close(angle_of(*e2.chain.end_dir()), sp.nu, 1e-4):
            sp.edge = e2.eid
            e2.seps.append(sp)
        elif e1.va == INFV:
            sp.edge = e1.eid
            e1.seps.append(sp)
        elif e2.vb == INFV:
            sp.edge = e2.eid
            e2.seps.append(sp)
    return e1, e2


def _replace_face_ref(diag: Diagram, e: DEdge, old_aid, new_aid):
    if e.fa == old_aid:
        e.fa = new_aid
    elif e.fb == old_aid:
        e.fb = new_aid
    else:
        return
    diag.face_edges.get(old_aid, set()).discard(e.eid)
    diag.face_edges.setdefault(new_aid, set()).add(e.eid)


# ---------------------------------------------------------------------------
# artificial split of one face into two same-site sub-faces

def split_face_artificial(diag: Diagram, host: ArcNode, part: ArcNode, nu: float,
                          part_side: str, splice: bool):
    """Divide host's face by the artificial separator at nu.

    part_side 'cw': part takes the clockwise side (angles in (host_lo, nu));
    'ccw': part takes (nu, host_hi).  With splice=True, part is first linked
    into the sequence on that side of host.
    """
    seq = diag.seq
    if splice:
        if part_side == "ccw":
            sep = SeqSep(nu, "artificial", None)
            seq.link_after(host, part, sep)
            # link_after put the new sep at host->part; correct: swap so the
            # artificial separator sits between host and part
        else:
            sep = SeqSep(nu, "artificial", None)
            seq.link_after(host.prv, part, sep)
            # now order is [.., part, host, ..] with sep at prv->part and the
            # old separator at part->host; we need the artificial at part->host
            part.prv.sep, part.sep = part.sep, part.prv.sep
    host_lo, host_hi = None, None
    if part_side == "cw":
        lo, hi = part.cur_lo(), nu
    else:
        lo, hi = nu, part.cur_hi()
    s = diag.seg(host)
    full, _ = artificial_bisector_chain(s, nu)
    best = None
    for eid in list(diag.face_edges.get(host.aid, ())):
        e = diag.edges[eid]
        for (lc, le, x, y) in chain_intersections(full, e.chain):
            if best is None or lc > best[0]:
                best = (lc, e, le, x, y)
    if best is None:
        raise TraceDiverged(f"artificial split at {nu:.4f} misses the boundary")
    lc, e, le, x, y = best
    v = diag.vertex_near(x, y)
    if v is None:
        v = diag.new_vertex(x, y)
        _split_edge_at(diag, e, le, v)
    _, tail = full.split_at(lc)
    if tail is None:
        raise TraceDiverged("empty artificial edge")
    art = diag.add_edge(tail, v.vid, INFV, part.aid, host.aid, "art")
    fa, fb = _left_face_probe(diag, tail, part, host)
    art.fa, art.fb = fa.aid, fb.aid
    # separator linkage: the artificial separator between part and host
    sep_obj = part.sep if part_side == "cw" else host.sep
    sep_obj.edge = art.eid
    art.seps = [sep_obj]
    # move host's boundary edges on the part side over to part
    for eid in list(diag.face_edges.get(host.aid, ())):
        if eid == art.eid:
            continue
        e2 = diag.edges[eid]
        mx, my = e2.chain.pieces[len(e2.chain.pieces) // 2].midpoint()
        vdir = away_dir(mx, my, s)
        if vdir is None:
            continue
        th = angle_of(vdir[0], vdir[1])
        if angle_in(th, lo, hi, 0.0):
            _replace_face_ref(diag, e2, host.aid, part.aid)
    diag.face_edges.setdefault(part.aid, set()).add(art.eid)
    diag.face_edges.setdefault(host.aid, set()).add(art.eid)
    return art


# ---------------------------------------------------------------------------
# base case

def base_case(seq: ArcSequence, cache: BisectorCache = None) -> Diagram:
    """Diagram of a sequence forming exactly two maximal (same-site) arcs."""
    diag = Diagram(seq, cache)
    nodes = seq.nodes()
    runs = [[nodes[0]]]
    for nd in nodes[1:]:
        if runs[-1][-1].site == nd.site:
            runs[-1].append(nd)
        else:
            runs.append([nd])
    if len(runs) > 2 and runs[0][0].site == runs[-1][-1].site:
        runs[0] = runs.pop() + runs[0]
    if len(runs) != 2:
        raise BadBaseCase(f"{len(runs)} maximal arcs (need 2)")
    run1, run2 = runs
    s1 = diag.seg(run1[0])
    s2 = diag.seg(run2[0])
    lo1, hi1 = run1[0].cur_lo(), run1[-1].cur_hi()
    lo2, hi2 = run2[0].cur_lo(), run2[-1].cur_hi()
    bis = diag.cache.get(s1.sid, s2.sid)
    chains = clip_chains_to_intervals(bis.branches, s1, lo1, hi1, s2, lo2, hi2)
    if len(chains) != 1:
        raise BadBaseCase(f"expected one boundary chain, got {len(chains)}")
    ch = chains[0]
    if not (ch.start_unbounded() and ch.end_unbounded()):
        raise BadBaseCase("boundary chain must reach infinity at both ends")
    fa, fb = _left_face_probe(diag, ch, run1[-1], run2[-1])
    e = diag.add_edge(ch, INFV, INFV, fa.aid, fb.aid, "bis")
    sep1 = run1[-1].sep
    sep2 = run2[-1].sep
    sep1.edge = e.eid
    sep2.edge = e.eid
    e.seps = [sep1, sep2]
    for run in runs:
        host = run[-1]
        for nd in run[:-1]:
            split_face_artificial(diag, host, nd, nd.sep.nu, "cw", splice=False)
    seq.proper = True
    return diag


# ---------------------------------------------------------------------------
# region insertion: the boundary walk

def _face_chains(diag: Diagram, beta: ArcNode, f: ArcNode):
    """Candidate boundary pieces against face f: the full bisector clipped
    to f's current interval (the inserted arc's side is left unclipped, as
    its final interval is only known after the walk)."""
    sb = diag.seg(beta)
    sf = diag.seg(f)
    bis = diag.cache.get(sb.sid, sf.sid)
    return clip_chains_to_intervals(bis.branches, sb, None, None,
                                    sf, f.cur_lo(), f.cur_hi())


def _beta_wins_cw(diag: Diagram, beta: ArcNode, f: ArcNode, th: float) -> bool:
    """Does the inserted arc own the far field just clockwise of th?"""
    sb = diag.seg(beta)
    sf = diag.seg(f)
    px, py = -math.sin(th), math.cos(th)
    wb = sb.support_realizer(th)
    wf = sf.support_realizer(th)
    pb = sb.endpoint(0 if wb == 2 else wb)
    pf = sf.endpoint(0 if wf == 2 else wf)
    return pb[0] * px + pb[1] * py > pf[0] * px + pf[1] * py


def _stub_for_face(diag: Diagram, beta: ArcNode, f: ArcNode, entry_nu: float):
    """Unbounded start of the new region's ccw boundary against face f.

    Returns (chain oriented from infinity inward, start loc, direction) or
    None when the new region's ccw end does not border f.
    """
    if f.site == beta.site:
        return None
    best = None
    for ch in _face_chains(diag, beta, f):
        ends = []
        if ch.start_unbounded():
            ends.append((0, angle_of(*ch.start_dir())))
        if ch.end_unbounded():
            ends.append((1, angle_of(*ch.end_dir())))
        for (endsel, th) in ends:
            if not angle_in(th, f.cur_lo(), f.cur_hi(), 1e-9):
                continue
            if not _beta_wins_cw(diag, beta, f, th):
                continue
            rank = ccw_span(entry_nu, th)
            oriented = ch if endsel == 0 else ch.reversed()
            if best is None or rank < best[0]:
                best = (rank, oriented, th)
    if best is None:
        return None
    _, oriented, th = best
    p0 = oriented.pieces[0]
    return oriented, (0, p0.t0), th


def _forward_orient(diag: Diagram, chains, x, y, into_node: ArcNode,
                    from_node: ArcNode, walk_dir=None, edge_tangent=None):
    """Chain+location through (x, y), oriented so the walk proceeds into
    into_node's old region.

    Primary test probes attainable distances a small step ahead; when those
    tie (everything near a segment crossing point is equidistant) the
    crossing orientation decides: the continuation leaves on the same side
    of the crossed edge the walk was heading to.
    """
    step = 1e-4 * diag.scale
    fallback = None
    for ch in chains:
        loc = ch.locate_point(x, y, 1e-6)
        if loc is None:
            continue
        for flip in (False, True):
            cur = ch.reversed() if flip else ch
            l2 = cur.locate_point(x, y, 1e-6)
            if l2 is None:
                continue
            adv = cur.advance(l2, step)
            if adv == l2:
                continue
            zx, zy = cur.eval(adv)
            if math.hypot(zx - x, zy - y) <= 0.25 * step:
                continue
            d_in = diag.d_att(into_node, zx, zy)
            d_from = diag.d_att(from_node, zx, zy) if from_node is not None else -INF
            if d_in > d_from + 1e-9 * (1 + abs(d_in)):
                return cur, l2
            if abs(d_in - d_from) <= 1e-9 * (1 + abs(d_in)) and \
                    walk_dir is not None and edge_tangent is not None:
                nrm = math.hypot(zx - x, zy - y)
                tx, ty = (zx - x) / nrm, (zy - y) / nrm
                side_in = edge_tangent[0] * walk_dir[1] - edge_tangent[1] * walk_dir[0]
                side_out = edge_tangent[0] * ty - edge_tangent[1] * tx
                if side_in * side_out > 0:
                    fallback = (cur, l2)
    if fallback is not None:
        return fallback
    return None, None


def insert_region(diag: Diagram, plan: InsertionPlan):
    """Carve the region of plan.arc into the diagram (all plan kinds)."""
    seq = diag.seq
    beta = plan.arc
    diag.stats["insertions"] += 1
    diag.stats["scanned_new_arcs"] += plan.scanned_new_arcs
    if plan.kind == "samesite":
        side = "ccw" if plan.side == "pred" else "cw"
        split_face_artificial(diag, plan.neighbor, beta, plan.nu, side, splice=True)
        return

    if plan.kind == "pair":
        start = plan.left.nxt
        entry_nu = plan.left.sep.nu
    else:
        start = plan.container
        entry_nu = beta.lo

    # --- locate the counterclockwise terminal stub
    sb_seg = diag.seg(beta)
    f = start
    stub = None
    for _ in range(seq.n):
        stub = _stub_for_face(diag, beta, f, entry_nu)
        if stub is not None:
            break
        # f has no boundary with the new arc: it must be fully dominated
        gap_mid = ang_mid(f.cur_lo(), f.cur_hi())
        if sb_seg.support(gap_mid) >= diag.seg(f).support(gap_mid):
            raise TraceDiverged(
                f"face {f.aid} neither borders nor is dominated by arc {beta.aid}")
        f = f.nxt
    if stub is None:
        raise TraceDiverged(f"no boundary stub for arc {beta.aid}")
    P = f
    curve, pos, w_ccw = stub

    # --- the walk
    ptol = 1e-7 * diag.scale
    visits = []
    walk_pieces = []   # (chain piece, face node, va, vb)
    crossings = {}     # eid -> [(loc_on_edge, vid)]
    cur = P
    prev_vid = INFV
    skip_pt = None
    w_cw = None
    Q = None
    guard = 0
    while True:
        guard += 1
        if guard > 4 * seq.n + 64:
            raise TraceDiverged(f"walk did not terminate for arc {beta.aid}")
        events = []
        for eid in diag.face_edges.get(cur.aid, ()):
            e = diag.edges[eid]
            for (lc, le, x, y) in chain_intersections(curve, e.chain):
                if lc <= pos:
                    continue
                if lc[0] == pos[0] and lc[1] <= pos[1] + ptol:
                    continue
                if skip_pt is not None and \
                        math.hypot(x - skip_pt[0], y - skip_pt[1]) <= 4 * ptol:
                    continue
                events.append((lc, eid, le, x, y))
        if not events:
            if pos[0] == 0 and pos[1] == curve.pieces[0].t0:
                tail = curve
            else:
                tail = curve.split_at(pos)[1]
            if tail is None or not tail.end_unbounded():
                raise TraceDiverged(f"walk ended inside face {cur.aid}")
            w_cw = angle_of(*tail.end_dir())
            walk_pieces.append((tail, cur, prev_vid, INFV))
            visits.append(cur)
            Q = cur
            break
        lc, eid, le, x, y = min(events)
        e = diag.edges[eid]
        diag.stats["crossings"] += 1
        vnear = None
        for vid in (e.va, e.vb):
            if vid != INFV:
                vv = diag.verts[vid]
                if math.hypot(vv.x - x, vv.y - y) <= 4 * ptol:
                    vnear = vv
        piece = curve.slice(None if (pos[0] == 0 and pos[1] == curve.pieces[0].t0)
                            else pos, lc)
        if vnear is None:
            v = diag.new_vertex(x, y)
            # the walked region stays on the left of the walk direction, so
            # the crossed edge dies on the side its tangent turns left into
            twx, twy = curve.pieces[lc[0]].tangent(lc[1])
            tex, tey = e.chain.pieces[le[0]].tangent(le[1])
            inc_dead = (twx * tey - twy * tex) > 0.0
            crossings.setdefault(eid, []).append((le, v.vid, inc_dead))
            nxt = seq.find(e.other_face(cur.aid))
            if nxt is None:
                raise TraceDiverged(f"crossed edge {eid} into missing face")
        else:
            v = vnear
            nxt = None
        t_in = curve.pieces[lc[0]].tangent(lc[1])
        walk_pieces.append((piece, cur, prev_vid, v.vid))
        visits.append(cur)
        prev_vid = v.vid
        skip_pt = (x, y)
        if nxt is None:
            # arrived at an existing vertex: among all candidate boundary
            # stubs through it, continue along the most counterclockwise
            # turn from the reversed arrival direction (the carved region
            # stays on the left, exactly as in a face walk)
            cand_aids = set()
            for eid2 in diag.verts[v.vid].edges:
                e2 = diag.edges.get(eid2)
                if e2 is not None:
                    cand_aids.update((e2.fa, e2.fb))
            rev = math.atan2(-t_in[1], -t_in[0])
            best = None
            step = 1e-4 * diag.scale
            for aid in cand_aids:
                g = seq.find(aid)
                if g is None or g.site == beta.site:
                    continue
                for ch in _face_chains(diag, beta, g):
                    loc = ch.locate_point(x, y, 1e-6)
                    if loc is None:
                        continue
                    for flip in (False, True):
                        cc = ch.reversed() if flip else ch
                        l2 = cc.locate_point(x, y, 1e-6)
                        if l2 is None:
                            continue
                        adv = cc.advance(l2, step)
                        zx, zy = cc.eval(adv)
                        dd = math.hypot(zx - x, zy - y)
                        if dd <= 0.25 * step:
                            continue
                        # chord direction: robust at chain bends
                        ang = (math.atan2((zy - y) / dd, (zx - x) / dd) - rev) % TWO_PI
                        if ang < 1e-7 or ang > TWO_PI - 1e-7:
                            continue
                        if best is None or ang > best[0]:
                            best = (ang, g, cc, l2)
            if best is None:
                raise TraceDiverged(
                    f"no continuation at vertex {v.vid} for arc {beta.aid}")
            _, cur, curve, pos = best
            continue
        if nxt.site == beta.site:
            raise TraceDiverged(
                f"walk for arc {beta.aid} ran into same-site face {nxt.aid}")
        chains = _face_chains(diag, beta, nxt)
        tex, tey = e.chain.pieces[le[0]].tangent(le[1])
        c2, l2 = _forward_orient(diag, chains, x, y, nxt, cur,
                                 walk_dir=t_in, edge_tangent=(tex, tey))
        if c2 is None:
            raise TraceDiverged(
                f"cannot continue into face {nxt.aid} for arc {beta.aid}")
        cur, curve, pos = nxt, c2, l2

    # --- surgery
    split_case = Q is P
    dead = []
    if not split_case:
        nd = Q.nxt
        while nd is not P:
            dead.append(nd)
            nd = nd.nxt
            if len(dead) > seq.n:
                raise TraceDiverged("terminal faces not found in sequence")
    sb = diag.seg(beta)

    def conflict_margin(x, y, ref_seg):
        """Positive when (x, y) belongs to the inserted region."""
        db, fx, fy, _ = foot_on_segment(x, y, sb)
        dr = foot_on_segment(x, y, ref_seg)[0]
        if db > EPS * diag.scale:
            th = angle_of(x - fx, y - fy)
            if not angle_in(th, w_cw, w_ccw, 1e-9):
                return -max(db, 1.0)
        return db - dr

    def conflicted_chain(sub, ref_seg):
        best = 0.0
        for p in sub.pieces:
            t0 = p.t0 if p.t0 > -INF else min(p.t1, 0.0) - 8.0 * diag.scale
            t1 = p.t1 if p.t1 < INF else max(p.t0, 0.0) + 8.0 * diag.scale
            for frac in (0.5, 0.2, 0.8):
                x, y = p.eval(t0 + (t1 - t0) * frac)
                m = conflict_margin(x, y, ref_seg)
                if abs(m) > abs(best):
                    best = m
        return best > 0.0

    affected = {nd.aid for nd in visits} | {nd.aid for nd in dead}
    edge_ids = set()
    for aid in affected:
        edge_ids |= diag.face_edges.get(aid, set())
    for eid in edge_ids:
        e = diag.edges.get(eid)
        if e is None:
            continue
        crs = sorted(crossings.get(eid, []), key=lambda c: c[0])
        stations = [(None, e.va, None)] + list(crs) + [(None, e.vb, None)]
        ref = diag.seg(seq.find(e.fa) or seq.find(e.fb))
        seps = list(e.seps)
        frags = []
        nfrag = len(stations) - 1
        flags = [None] * nfrag
        for j, (_, _, inc_dead) in enumerate(crs, start=1):
            # fragment j (after crossing j) dead iff inc_dead
            if flags[j] is None:
                flags[j] = inc_dead
            if flags[j - 1] is None:
                flags[j - 1] = not inc_dead
        for k in range(nfrag):
            loc0 = stations[k][0]
            loc1 = stations[k + 1][0]
            sub = e.chain.slice(loc0, loc1)
            dead_frag = flags[k]
            if dead_frag is None:
                dead_frag = conflicted_chain(sub, ref)
            if not dead_frag:
                frags.append((sub, stations[k][1], stations[k + 1][1]))
        diag.drop_edge(e)
        for (sub, va, vb) in frags:
            ne = diag.add_edge(sub, va, vb, e.fa, e.fb, e.kind)
            for sp in seps:
                if ne.va == INFV and sub.start_unbounded() and \
                        _ang_close(angle_of(*sub.start_dir()), sp.nu, 1e-4):
                    sp.edge = ne.eid
                    ne.seps.append(sp)
                elif ne.vb == INFV and sub.end_unbounded() and \
                        _ang_close(angle_of(*sub.end_dir()), sp.nu, 1e-4):
                    sp.edge = ne.eid
                    ne.seps.append(sp)

    for nd in dead:
        if nd.origin == "original":
            raise TraceDiverged(f"insertion of {beta.aid} would delete original {nd.aid}")
        leftover = diag.face_edges.get(nd.aid)
        if leftover:
            raise TraceDiverged(f"dead arc {nd.aid} retains boundary {leftover}")
        diag.face_edges.pop(nd.aid, None)
        seq.unlink(nd)
        plan.deleted_new_arcs.append(nd.aid)
        diag.stats["deleted_new_arcs"] += 1

    sigma2 = None
    cw_part = None
    ccw_part = None
    if split_case:
        sigma = Q
        orig_aid = sigma.aid
        s_sig = diag.seg(sigma)
        sigma2 = ArcNode(seq.fresh_aid(), sigma.site, "sv", None,
                         0.0, 0.0, None, "new")
        diag.stats["new_arcs"] += 1
        seq.link_after(sigma, beta, _support_tie_sep(seq, sigma, beta, w_cw))
        seq.link_after(beta, sigma2, _support_tie_sep(seq, beta, sigma2, w_ccw))
        cw_part, ccw_part = sigma, sigma2
        keep_cw = True
        if sigma.origin == "original":
            keep_cw = angle_in(ang_mid(sigma.lo, sigma.hi),
                               sigma.cur_lo(), sigma.cur_hi(), 1e-9)
        if not keep_cw:
            _swap_arc_payload(sigma, sigma2)
        new_node = ccw_part if keep_cw else cw_part
        orig_node = cw_part if keep_cw else ccw_part
        new_node.origin = "new"
        new_node.lo = new_node.cur_lo()
        new_node.hi = new_node.cur_hi()
        new_node.kind = "sv"
        new_node.nu_self = None
        new_node.sub_ids = None
        if not s_sig.is_point:
            for cand in (angle_of(s_sig.uy, -s_sig.ux),
                         angle_of(-s_sig.uy, s_sig.ux)):
                if angle_in(cand, new_node.lo, new_node.hi, 0.0):
                    new_node.nu_self = cand
                    new_node.kind = "seg"
        if new_node.kind == "sv":
            w = s_sig.support_realizer(ang_mid(new_node.lo, new_node.hi))
            new_node.anchor = 0 if w == 2 else w
        # surviving edges are keyed under the original aid (on orig_node now);
        # those angularly inside the new part move over
        assert orig_node.aid == orig_aid
        for eid in list(diag.face_edges.get(orig_aid, ())):
            e2 = diag.edges[eid]
            mx, my = e2.chain.pieces[len(e2.chain.pieces) // 2].midpoint()
            vdir = away_dir(mx, my, s_sig)
            if vdir is None:
                continue
            th = angle_of(vdir[0], vdir[1])
            if angle_in(th, new_node.cur_lo(), new_node.cur_hi(), 0.0):
                _replace_face_ref(diag, e2, orig_aid, new_node.aid)
        Q_node = cw_part
    else:
        seq.link_after(Q, beta, _support_tie_sep(seq, Q, beta, w_cw))
        beta.sep = _support_tie_sep(seq, beta, P, w_ccw)
        Q_node = Q

    # --- new boundary edges
    first_eid = None
    last_eid = None
    dead_set = set(id(nd) for nd in dead)
    for idx, (piece, other, va, vb) in enumerate(walk_pieces):
        if id(other) in dead_set:
            raise TraceDiverged("walk piece borders a deleted arc")
        oth = other
        if split_case and other is Q:
            mx, my = piece.pieces[len(piece.pieces) // 2].midpoint()
            vdir = away_dir(mx, my, diag.seg(Q))
            th = angle_of(vdir[0], vdir[1]) if vdir else None
            if th is not None and angle_in(th, ccw_part.cur_lo(),
                                           ccw_part.cur_hi(), 0.0):
                oth = ccw_part
            else:
                oth = cw_part
        fa, fb = _left_face_probe(diag, piece, beta, oth)
        kind = "art" if oth.site == beta.site else "bis"
        ne = diag.add_edge(piece, va, vb, fa.aid, fb.aid, kind)
        if idx == 0:
            first_eid = ne.eid
        if idx == len(walk_pieces) - 1:
            last_eid = ne.eid
    beta.sep.edge = first_eid
    self_sep = Q_node.sep
    self_sep.edge = last_eid
    e_first = diag.edges[first_eid]
    e_last = diag.edges[last_eid]
    e_first.seps.append(beta.sep)
    if e_last is not e_first:
        e_last.seps.append(self_sep)
    else:
        e_first.seps.append(self_sep)

    # prune isolated vertices
    for vid in [v for v, vv in diag.verts.items() if not vv.edges]:
        diag.verts.pop(vid)


def _swap_arc_payload(a: ArcNode, b: ArcNode):
    for attr in ("aid", "kind", "anchor", "lo", "hi", "nu_self", "origin", "sub_ids"):
        va, vb = getattr(a, attr), getattr(b, attr)
        setattr(a, attr, vb)
        setattr(b, attr, va)


def _support_tie_sep(seq: ArcSequence, cw_node: ArcNode, ccw_node: ArcNode,
                     nu: float) -> SeqSep:
    if cw_node.site == ccw_node.site:
        return SeqSep(nu, "artificial", None)
    sa = seq.segment(cw_node)
    sb = seq.segment(ccw_node)
    wa = sa.support_realizer(nu)
    wb = sb.support_realizer(nu)
    wa = 0 if wa == 2 else wa
    wb = 0 if wb == 2 else wb
    return SeqSep(nu, "support", ((sa.sid, wa), (sb.sid, wb)))
