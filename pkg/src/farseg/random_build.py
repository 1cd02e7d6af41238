"""Two-phase randomized construction: delete arcs in random order down to a
two-maximal-arc base, then re-insert them, tracing each region's boundary.

Expected linear time once the Gaussian map is known; instrumentation
counters record the sequence-size bound and the per-step entry scans.
"""

from __future__ import annotations

import random

from .arcs import ArcSequence, DeletionRecord, delete_arc, find_entry
from .diagram import Diagram, base_case, insert_region
from .gmap import GaussianMap

RNG_ALGORITHM = "python-random-mt19937"


def find_base_index(order, seq_template: ArcSequence) -> int:
    """Largest t such that the first t arcs span at most two sites and form
    exactly two maximal arcs in cyclic order."""
    nodes = seq_template.nodes()
    pos_of = {nd.aid: i for i, nd in enumerate(nodes)}
    cyc = [nd.site for nd in nodes]
    m = len(cyc)
    chosen = []
    sites = set()
    best = 2
    for t, nd in enumerate(order, start=1):
        sites.add(nd.site)
        if len(sites) > 2:
            break
        chosen.append(pos_of[nd.aid])
        if t < 2:
            continue
        sel = sorted(chosen)
        runs = 0
        k = len(sel)
        for i in range(k):
            if cyc[sel[i]] != cyc[sel[(i - 1) % k]]:
                runs += 1
        if runs == 0:
            runs = 1  # all one site
        if runs == 2 and len(sites) == 2:
            best = t
    return max(best, 2)


def build_randomized(gmap: GaussianMap, seed: int = 0, instrument: bool = True,
                     validate_steps: bool = False):
    """FVD of the full map: returns (Diagram, stats dict)."""
    seq = ArcSequence.from_gmap(gmap)
    if seq.n < 2:
        raise ValueError("need at least two arcs")
    rng = random.Random(seed)
    order = seq.nodes()
    rng.shuffle(order)
    t = find_base_index(order, seq)
    records = []
    # phase 1: delete arcs from position h-1 down to t (0-based)
    for i in range(len(order) - 1, t - 1, -1):
        records.append(delete_arc(seq, order[i]))
    diag = base_case(seq)
    stats = {
        "rng": RNG_ALGORITHM,
        "seed": seed,
        "arcs": len(order),
        "base_index": t,
        "scan_total": 0,
        "scan_max": 0,
        "size_bound_ok": True,
        "max_size_ratio": 0.0,
        "steps": 0,
    }
    # phase 2: re-insert in reverse deletion order
    i = t
    while records:
        rec = records.pop()
        plan = find_entry(seq, rec)
        insert_region(diag, plan)
        i += 1
        stats["steps"] += 1
        stats["scan_total"] += plan.scanned_new_arcs
        stats["scan_max"] = max(stats["scan_max"], plan.scanned_new_arcs)
        ratio = seq.n / (2.0 * i)
        stats["max_size_ratio"] = max(stats["max_size_ratio"], ratio)
        if seq.n > 2 * i:
            stats["size_bound_ok"] = False
        if validate_steps:
            rep = diag.validate()
            if not rep["ok"]:
                raise AssertionError(f"step {i}: {rep['errors']}")
    stats["scan_mean"] = (stats["scan_total"] / stats["steps"]) if stats["steps"] else 0.0
    stats["final_arcs"] = seq.n
    stats["pure"] = all(nd.origin == "original" for nd in seq.nodes())
    diag.stats.update({"random": stats})
    return diag, stats
