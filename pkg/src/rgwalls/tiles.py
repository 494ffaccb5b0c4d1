"""Cell overlaps, tile recognition and the two-step tile assignment.

Tiles are kept as orbit representatives: a folded labelled graph plus
cells ``(relator_id, anchor)`` where the anchor is the vertex at relator
position 0.  A translate gT' of a representative is fixed by one vertex
correspondence, which is read off a common run of two relator words.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .complex import Complex2, LabelledGraph
from .words import inverse_word, primitive_period, rotate


# ---------------------------------------------------------------------
# overlaps between relators

@dataclass(frozen=True)
class Overlap:
    left: int  # relator i
    right: int  # relator j
    p: int  # start position in r_i
    q: int  # start position in r_j (orientation +1) or in r_j^-1 (orientation -1)
    orientation: int
    size: int


def relator_matrix(relators) -> np.ndarray:
    return np.array([list(r) for r in relators], dtype=np.int64).reshape(len(relators), -1)


def inverse_matrix(relators) -> np.ndarray:
    return np.array([list(inverse_word(r)) for r in relators], dtype=np.int64).reshape(len(relators), -1)


def overlap_runs(relators, rows_i: Sequence[int], rows_j: Sequence[int] | None = None, min_len: int = 1) -> list:
    """Maximal common runs between relators ``rows_i`` and translates/inverses of ``rows_j``.

    The trivial match of a relator with itself at zero shift is excluded.
    """
    R = relator_matrix(relators)
    Rinv = inverse_matrix(relators)
    rows_i = np.asarray(list(rows_i), dtype=np.int64)
    rows_j = np.arange(len(relators)) if rows_j is None else np.asarray(list(rows_j), dtype=np.int64)
    if rows_i.size == 0 or rows_j.size == 0:
        return []
    A = R[rows_i]
    out = []
    for orient, M in ((1, R), (-1, Rinv)):
        runs = K.cyclic_runs(A, M[rows_j], min_len, False)
        for i, j, p, q, k in runs:
            ri, rj = int(rows_i[i]), int(rows_j[j])
            if orient == 1 and ri == rj and p == q and k == R.shape[1]:
                continue
            out.append(Overlap(ri, rj, int(p), int(q), orient, int(k)))
    return out


class RunTable:
    """All runs of length >= floor between relators, filtered on demand."""

    def __init__(self, relators, floor: int):
        self.relators = relators
        self.floor = floor
        n = len(relators)
        R, Rinv = relator_matrix(relators), inverse_matrix(relators)
        parts = []
        for orient, M in ((1, R), (-1, Rinv)):
            r = K.cyclic_runs(R, M, floor, False)
            if orient == 1 and len(r):
                trivial = (r[:, 0] == r[:, 1]) & (r[:, 2] == r[:, 3]) & (r[:, 4] == R.shape[1])
                r = r[~trivial]
            parts.append(np.column_stack([r, np.full(len(r), orient, dtype=np.int64)]))
        arr = np.concatenate(parts) if parts else np.empty((0, 6), dtype=np.int64)
        arr = arr[np.lexsort((arr[:, 5], arr[:, 3], arr[:, 2], arr[:, 1], arr[:, 0]))]
        self.arr = arr
        self.start = np.searchsorted(arr[:, 0], np.arange(n + 1))

    def query(self, rows_i, rows_j=None, min_len: int = 1) -> list:
        if min_len < self.floor:
            return overlap_runs(self.relators, rows_i, rows_j, min_len)
        chunks = [self.arr[self.start[i]:self.start[i + 1]] for i in rows_i]
        if not chunks:
            return []
        a = np.concatenate(chunks)
        keep = a[:, 4] >= min_len
        if rows_j is not None:
            keep &= np.isin(a[:, 1], np.asarray(list(rows_j), dtype=np.int64))
        a = a[keep]
        return [Overlap(int(i), int(j), int(p), int(q), int(o), int(k)) for i, j, p, q, k, o in a]


def find_cell_overlaps(P, min_len: int = 1) -> list:
    """All maximal common runs between distinct relators (i < j) and nontrivial self-overlaps."""
    n = len(P.relators)
    out = []
    for o in overlap_runs(P.relators, range(n), range(n), min_len):
        if o.left < o.right or o.left == o.right:
            out.append(o)
    out.sort(key=lambda o: (o.left, o.right, o.p, o.orientation, -o.size, o.q))
    return out


# ---------------------------------------------------------------------
# tiles on complexes

def is_tile(T: Complex2, cells: Sequence[int] | None = None) -> bool:
    """Recursive tile check over 2-colourings of the cells."""
    cells = tuple(range(len(T.cells))) if cells is None else tuple(cells)
    n = len(cells)
    if n == 1:
        return True
    if 4 * T.cancel(cells) <= (n - 1) * T.l:
        return False
    first, rest = cells[0], cells[1:]
    # the first cell goes to side a; enumerate the others
    for mask in range(1 << (n - 1)):
        if mask == (1 << (n - 1)) - 1:
            continue
        a = (first,) + tuple(c for k, c in enumerate(rest) if mask >> k & 1)
        b = tuple(c for k, c in enumerate(rest) if not mask >> k & 1)
        if is_tile(T, a) and is_tile(T, b):
            return True
    return False


# ---------------------------------------------------------------------
# tile representatives

@dataclass
class TileRep:
    id: int
    graph: LabelledGraph
    cells: tuple  # ((relator_id, anchor), ...) anchors are graph roots
    l: int
    stage: int
    kind: str  # "cell", "step1", "step2"
    parts: tuple = ()
    core: int | None = None
    info: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def relators(self) -> tuple:
        return tuple(r for r, _ in self.cells)

    def complex(self, relators) -> Complex2:
        return self.graph.to_complex([(r, a, 0, 1) for r, a in self.cells], self.l, relators)

    def n_edges(self) -> int:
        if "_ne" not in self.info:
            self.info["_ne"] = self.graph.n_edges()
        return self.info["_ne"]

    def table(self) -> np.ndarray:
        """Dense transition table over compact vertex ids (graph must be compact)."""
        if "_tab" not in self.info:
            m = max((abs(x) for v in self.graph.out for x in v), default=1)
            m = max(m, self.info.get("_m", 1))
            n = len(self.graph.parent)
            tab = np.full((n, 2 * m), -1, dtype=np.int64)
            for v in range(n):
                for x, t in self.graph.out[v].items():
                    tab[v, x - 1 if x > 0 else m - x - 1] = self.graph.find(t)
            self.info["_tab"] = tab
        return self.info["_tab"]

    def positions(self, relators) -> dict:
        """relator_id -> vertex at each relator position of its cell."""
        if "_pos" not in self.info:
            self.info["_pos"] = {r: self.graph.read(a, relators[r][:-1]) for r, a in self.cells}
        return self.info["_pos"]


def _compact(g: LabelledGraph, anchors: Sequence[int]):
    """Renumber roots 0..n-1; returns (graph, new anchors)."""
    roots = g.roots()
    vid = {v: i for i, v in enumerate(roots)}
    h = LabelledGraph()
    for _ in roots:
        h.add_vertex()
    for v in roots:
        for x, t in g.out[v].items():
            h.out[vid[v]][x] = vid[g.find(t)]
    return h, [vid[g.find(a)] for a in anchors]


def single_cell_rep(tid: int, rid: int, relator, stage: int = 0) -> TileRep:
    g = LabelledGraph()
    v = g.add_vertex()
    g.attach_cycle(v, relator)
    g, (a,) = _compact(g, [v])
    return TileRep(tid, g, ((rid, a),), len(relator), stage, "cell", core=tid)


def cell_vertex(g: LabelledGraph, anchor: int, relator, pos: int) -> int:
    return g.read(anchor, relator[:pos])[-1]


@dataclass
class Alignment:
    """gB placed on A by identifying B-vertex ``vb`` with A-vertex ``va``."""

    va: int
    vb: int


def union_graph(A: TileRep, B: TileRep, al: Alignment, relators):
    """Folded union of A and gB; returns (graph, cells, b_offset, key, shared_cells)."""
    g = A.graph.copy()
    nA = len(g.parent)
    for _ in range(len(B.graph.parent)):
        g.add_vertex()
    for v in range(len(B.graph.parent)):
        for x, t in B.graph.out[v].items():
            g.out[v + nA][x] = t + nA
    g.merge(al.va, al.vb + nA)
    cells_a = [(r, g.find(a)) for r, a in A.cells]
    cells_b = [(r, g.find(a + nA)) for r, a in B.cells]
    # canonical alignment key: least B vertex identified with an A vertex
    key = None
    for b in range(len(B.graph.parent)):
        rb = g.find(b + nA)
        if rb < nA:
            key = (b, rb)
            break
    shared = _shared_cells(g, cells_a, cells_b, relators)
    return g, cells_a + cells_b, key, shared


def _cell_key(g, rid, anchor, relators):
    r = relators[rid]
    p = primitive_period(r)
    path = g.read(anchor, r)
    return (rid, min(path[k] for k in range(0, len(r), p)))


def _shared_cells(g, ca, cb, relators):
    ka = {_cell_key(g, r, a, relators) for r, a in ca}
    return [c for c in cb if _cell_key(g, c[0], c[1], relators) in ka]


def intersection_size(A: TileRep, B: TileRep, g: LabelledGraph) -> int:
    return A.n_edges() + B.n_edges() - g.n_edges()


def match_product(ga: LabelledGraph, gb: LabelledGraph, va: int, vb: int):
    """Vertex pairs identified when gb is glued to ga at (va, vb), by a joint walk.

    Returns (b -> a map, matched edge count), or None when the gluing would
    also fold ga or gb onto itself (then the full union must be computed).
    """
    va, vb = ga.find(va), gb.find(vb)
    amap = {vb: va}
    bmap = {va: vb}
    stack = [(va, vb)]
    edges = 0
    while stack:
        a, b = stack.pop()
        oa = ga.out[a]
        for x, tb in gb.out[b].items():
            ta = oa.get(x)
            if ta is None:
                continue
            ta, tb = ga.find(ta), gb.find(tb)
            if x > 0:
                edges += 1
            pa = amap.get(tb)
            pb = bmap.get(ta)
            if pa is None and pb is None:
                amap[tb] = ta
                bmap[ta] = tb
                stack.append((ta, tb))
            elif pa != ta or pb != tb:
                return None
    return amap, edges


def alignments_from_runs(A: TileRep, B: TileRep, relators, min_len: int, runs=None) -> list:
    """Candidate alignments of B onto A from cell runs of length >= min_len."""
    l = A.l
    pa = A.positions(relators)
    pb = B.positions(relators)
    if runs is None:
        runs = overlap_runs(relators, sorted(pa), sorted(pb), min_len)
    out = []
    for o in runs:
        if o.size < min_len or o.left not in pa or o.right not in pb:
            continue
        qpos = o.q if o.orientation == 1 else (l - o.q) % l
        out.append((o, Alignment(pa[o.left][o.p], pb[o.right][qpos])))
    return out


def _tables(A: TileRep, B: TileRep):
    ta, tb = A.table(), B.table()
    if ta.shape[1] != tb.shape[1]:
        m = max(ta.shape[1], tb.shape[1]) // 2
        for T in (A, B):
            T.info.pop("_tab", None)
            T.info["_m"] = m
        ta, tb = A.table(), B.table()
    return ta, tb


def scan_alignments(A: TileRep, B: TileRep, relators, min_len: int, runs=None) -> list:
    """Distinct translates gB meeting A, as (run, alignment, key, overlap, shares_cell)."""
    als = alignments_from_runs(A, B, relators, min_len, runs)
    if not als:
        return []
    ta, tb = _tables(A, B)
    va = np.array([al.va for _, al in als])
    vb = np.array([al.vb for _, al in als])
    anchors_b = np.array([b for _, b in B.cells])
    edges, keyb, keya, ok, img = K.match_batch(ta, tb, va, vb, anchors_b)
    anch_a = {r: a for r, a in A.cells}
    nA = len(A.graph.parent)
    best = {}

    def rank(o):
        return (o.left, o.p, -o.orientation, o.right, o.q)

    def offer(key, o, al, k, shared):
        cur = best.get(key)
        if cur is None or rank(o) < rank(cur[0]):
            best[key] = (o, al, key, k, shared)

    identity = set()
    for t, (o, al) in enumerate(als):
        if ok[t]:
            key = (int(keyb[t]), int(keya[t]))
            if key in identity:
                continue
            if key not in best:
                if A.id == B.id and all(img[t, i] == b for i, (_, b) in enumerate(B.cells)):
                    identity.add(key)
                    continue
            shared = any(r in anch_a and img[t, i] == anch_a[r] for i, (r, _) in enumerate(B.cells))
            offer(key, o, al, int(edges[t]), shared)
            continue
        g, cells, key, shared = union_graph(A, B, al, relators)
        if key is None or key in identity:
            continue
        if A.id == B.id and all(g.find(v + nA) == v for v in range(nA)):
            identity.add(key)
            continue
        offer(key, o, al, intersection_size(A, B, g), bool(shared))
    return [best[k] for k in sorted(best)]


# ---------------------------------------------------------------------
# the assignment

@dataclass
class Candidate:
    a: int
    b: int
    alignment: Alignment
    key: tuple
    overlap: int
    order: tuple


@dataclass
class TileAssignment:
    relators: tuple
    l: int
    tiles: dict  # id -> TileRep
    assign: dict  # relator -> tile id
    after_step1: dict  # relator -> tile id at the end of Step 1
    history: list  # stage records
    degenerate: list  # flagged events
    iterations: dict

    def tile_of(self, rid: int) -> TileRep:
        return self.tiles[self.assign[rid]]

    def core_of(self, tid: int) -> TileRep:
        t = self.tiles[tid]
        return self.tiles[t.core if t.core is not None else tid]

    def assigned_tiles(self) -> list:
        return sorted(set(self.assign.values()))

    def sizes(self) -> dict:
        out = {}
        for tid in self.assigned_tiles():
            s = self.tiles[tid].size
            out[s] = out.get(s, 0) + 1
        return out

    def to_json(self) -> dict:
        from .words import word_to_str

        doc = {"l": self.l, "relators": [word_to_str(r) for r in self.relators], "tiles": {}, "assign": {}}
        for tid in self.assigned_tiles():
            t = self.tiles[tid]
            cx = t.complex(self.relators)
            doc["tiles"][str(tid)] = {
                "cells": [[int(r), int(a)] for r, a in t.cells],
                "edges": [list(map(int, e)) for e in t.graph.edge_list()],
                "cancel": cx.cancel(),
                "bal_hu": cx.balance_hu(),
                "core": t.core,
                "kind": t.kind,
                "stage": t.stage,
                "parts": list(t.parts),
            }
        doc["assign"] = {str(r): int(t) for r, t in sorted(self.assign.items())}
        doc["degenerate"] = self.degenerate
        return doc


class _Builder:
    def __init__(self, P):
        self.rel = tuple(P.relators)
        self.l = P.l
        self.tiles = {}
        self.assign = {}
        self.history = []
        self.degenerate = []
        self.stage = 0
        self.skipped = set()
        for rid, r in enumerate(self.rel):
            t = single_cell_rep(rid, rid, r)
            self.tiles[rid] = t
            self.assign[rid] = rid
        self.live = set(self.assign.values())
        self.next_id = len(self.rel)
        self.runs = RunTable(self.rel, max(1, -(-(self.l // 4 + 1) // 4)))

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    # -- Step 1 --------------------------------------------------------
    def pair_candidates(self, A: TileRep, B: TileRep, runs=None) -> list:
        l = self.l
        need = l // 4 + 1
        t_min = -(-need // (A.size * B.size))
        out = []
        for o, al, key, k, shared in scan_alignments(A, B, self.rel, t_min, runs):
            if k < need or shared:
                continue
            order = (-(A.size + B.size), min(A.relators), min(B.relators), o.p, -o.orientation, -k, key)
            out.append(Candidate(A.id, B.id, al, key, k, order))
        return out

    def candidates_against_all(self, T: TileRep) -> list:
        """Candidates between T and every live tile (itself included) of admissible size."""
        need = self.l // 4 + 1
        by_size = {}
        for tid in sorted(self.live):
            B = self.tiles[tid]
            if B.size + T.size <= 4 and (tid != T.id or 2 * T.size <= 4):
                by_size.setdefault(B.size, []).extend(B.relators)
        by_tile = {}
        for size, rows in sorted(by_size.items()):
            t_min = -(-need // (T.size * size))
            for o in self.runs.query( sorted(T.relators), sorted(rows), t_min):
                by_tile.setdefault(self.assign[o.right], []).append(o)
        out = []
        for tid in sorted(by_tile):
            B = self.tiles[tid]
            if tid == T.id:
                out += self.pair_candidates(T, T, by_tile[tid])
            elif tid < T.id:
                flipped = [Overlap(o.right, o.left, *((o.q, o.p) if o.orientation == 1 else
                                                      ((self.l - o.q - o.size) % self.l, (self.l - o.p - o.size) % self.l)),
                                   o.orientation, o.size) for o in by_tile[tid]]
                out += self.pair_candidates(B, T, flipped)
            else:
                out += self.pair_candidates(T, B, by_tile[tid])
        return out

    def step1(self):
        need = self.l // 4 + 1
        cands = []
        runs = self.runs.query( range(len(self.rel)), None, need)
        by_pair = {}
        for o in runs:
            if o.left <= o.right:
                by_pair.setdefault((o.left, o.right), []).append(o)
        for (a, b), rs in sorted(by_pair.items()):
            cands += self.pair_candidates(self.tiles[a], self.tiles[b], rs)
        iters = 0
        while True:
            cands = [c for c in cands if (c.a, c.b, c.key) not in self.skipped
                     and self._live(c.a) and self._live(c.b)]
            if not cands:
                break
            iters += 1
            if iters > 5 * len(self.rel) + 10:
                raise RuntimeError("Step 1 failed to terminate")
            c = min(cands, key=lambda c: c.order)
            if c.a == c.b:
                self.degenerate.append({"kind": "orbit_collision", "step": 1, "tile": c.a,
                                        "relators": list(self.tiles[c.a].relators), "overlap": c.overlap})
                self.skipped.add((c.a, c.b, c.key))
                continue
            new = self.merge1(c)
            cands = [x for x in cands if x.a not in (c.a, c.b) and x.b not in (c.a, c.b)]
            cands += self.candidates_against_all(new)
        return iters

    def _live(self, tid):
        return tid in self.live

    def merge1(self, c: Candidate) -> TileRep:
        A, B = self.tiles[c.a], self.tiles[c.b]
        g, cells, key, shared = union_graph(A, B, c.alignment, self.rel)
        nA = len(A.graph.parent)
        anchors = [a for _, a in cells]
        g2, anchors = _compact(g, anchors)
        self.stage += 1
        tid = self.new_id()
        # older tile first: that is the one that keeps its structure
        older, newer = (A, B) if (A.stage, A.id) <= (B.stage, B.id) else (B, A)
        rep = TileRep(tid, g2, tuple((r, a) for (r, _), a in zip(cells, anchors)), self.l, self.stage,
                      "step1", parts=(older.id, newer.id), core=tid,
                      info={"older": older.id, "newer": newer.id,
                            "older_cells": [r for r in older.relators],
                            "overlap": c.overlap})
        self.tiles[tid] = rep
        for r in rep.relators:
            self.assign[r] = tid
        self.live = set(self.assign.values())
        self.history.append({"step": 1, "stage": self.stage, "tile": tid, "parts": [older.id, newer.id],
                             "overlap": c.overlap})
        return rep

    # -- Step 2 --------------------------------------------------------
    def step2_options(self, T: TileRep, cT: int, single_rows: list) -> list:
        """(|C cap T|, order, C tile id, alignment) for singletons C with T u C a tile."""
        l = self.l
        need = max(1, l // 2 - cT + 1)  # Cancel(T u C) = Cancel(T) + |C cap T| > l/2
        t_min = -(-need // T.size)
        runs = self.runs.query( sorted(T.relators), single_rows, t_min)
        by_tile = {}
        for o in runs:
            by_tile.setdefault(self.assign[o.right], []).append(o)
        out = []
        for cid in sorted(by_tile):
            C = self.tiles[cid]
            for o, al, key, k, shared in scan_alignments(T, C, self.rel, t_min, by_tile[cid]):
                if shared or cT + k <= l // 2:
                    continue
                out.append((k, (-k, cid, o.p, -o.orientation, key), cid, al))
        return out

    def step2(self):
        iters = 0
        l = self.l
        step1_tiles = sorted(tid for tid in set(self.assign.values()) if self.tiles[tid].size == 2)
        self.live = set(self.assign.values())
        while True:
            single_rows = sorted(self.tiles[t].relators[0] for t in set(self.assign.values())
                                 if self.tiles[t].size == 1)
            best = None
            for tid in step1_tiles:
                T = self.tiles[tid]
                cT = T.complex(self.rel).cancel()
                for k, order, cid, al in self.step2_options(T, cT, single_rows):
                    o = (order[0], tid) + order[1:]
                    if best is None or o < best[0]:
                        best = (o, tid, cid, al, k)
            if best is None:
                break
            iters += 1
            if iters > len(self.rel) + 5:
                raise RuntimeError("Step 2 failed to terminate")
            _, tid, cid, al, kC = best
            T, C = self.tiles[tid], self.tiles[cid]
            g, cells, key, _ = union_graph(T, C, al, self.rel)
            g, anchors = _compact(g, [a for _, a in cells])
            Tp = TileRep(-1, g, tuple((r, a) for (r, _), a in zip(cells, anchors)), l, self.stage, "tmp")
            # optional C' glued to T' = T u C along more than l/4
            rows2 = [r for r in single_rows if r != C.relators[0]]
            t2 = -(-(l // 4 + 1) // 3)
            runs2 = self.runs.query( sorted(Tp.relators), rows2, t2)
            by2 = {}
            for o in runs2:
                by2.setdefault(self.assign[o.right], []).append(o)
            cprime = None
            collided = [o for o in self.runs.query( sorted(Tp.relators), [C.relators[0]], t2)]
            for sid in sorted(by2):
                S = self.tiles[sid]
                for o, al2, key2, k2, shared2 in scan_alignments(Tp, S, self.rel, t2, by2[sid]):
                    if shared2 or 4 * k2 <= l:
                        continue
                    ordk = (-k2, sid, o.p, -o.orientation, key2)
                    if cprime is None or ordk < cprime[0]:
                        cprime = (ordk, S, al2, k2)
            # a second copy of C itself would be an orbit collision
            for o, al2, key2, k2, shared2 in scan_alignments(Tp, C, self.rel, t2, collided):
                if not shared2 and 4 * k2 > l:
                    self.degenerate.append({"kind": "orbit_collision", "step": 2, "tile": tid,
                                            "relators": [C.relators[0]], "overlap": k2})
                    break
            self.stage += 1
            nid = self.new_id()
            info = {"base": tid, "C": C.relators[0], "C_overlap": kC}
            if cprime is not None:
                _, S, al2, k2 = cprime
                g2, cells2, _, _ = union_graph(Tp, S, al2, self.rel)
                g2, anchors2 = _compact(g2, [a for _, a in cells2])
                rep = TileRep(nid, g2, tuple((r, a) for (r, _), a in zip(cells2, anchors2)), l, self.stage,
                              "step2", parts=(tid, cid, S.id), core=tid, info=dict(info, Cprime=S.relators[0],
                                                                                      Cprime_overlap=k2))
            else:
                rep = TileRep(nid, g, Tp.cells, l, self.stage, "step2", parts=(tid, cid), core=tid, info=info)
            self.tiles[nid] = rep
            for r in rep.relators:
                if r not in T.relators:
                    self.assign[r] = nid
            self.history.append({"step": 2, "stage": self.stage, "tile": nid, "parts": list(rep.parts)})
        return iters


def build_tile_assignment(P) -> TileAssignment:
    B = _Builder(P)
    it1 = B.step1()
    after1 = dict(B.assign)
    it2 = B.step2()
    return TileAssignment(B.rel, B.l, B.tiles, B.assign, after1, B.history, B.degenerate,
                          {"step1": it1, "step2": it2})


def check_tile_intersections(tiles: Sequence[tuple], cx: Complex2) -> list:
    """For tiles given as cell-index tuples on a complex: pairwise intersections sharing
    no cell must be connected trees with fewer than l/2 edges."""
    out = []
    l = cx.l
    edge_sets = [set(e for c in t for e in cx.cells[c].edges()) for t in tiles]
    for a, b in itertools.combinations(range(len(tiles)), 2):
        if set(tiles[a]) & set(tiles[b]):
            continue
        common = edge_sets[a] & edge_sets[b]
        if not common:
            continue
        es = sorted(common)
        verts = sorted({cx.edges[e][0] for e in es} | {cx.edges[e][1] for e in es})
        vid = {v: i for i, v in enumerate(verts)}
        lab = K.component_labels(len(verts), [vid[cx.edges[e][0]] for e in es], [vid[cx.edges[e][1]] for e in es])
        ncomp = len(set(lab.tolist()))
        if ncomp != 1:
            out.append({"kind": "disconnected", "tiles": [a, b], "components": ncomp})
        elif len(es) != len(verts) - 1:
            out.append({"kind": "not_a_tree", "tiles": [a, b], "edges": len(es), "vertices": len(verts)})
        if 2 * len(es) >= l:
            out.append({"kind": "too_large", "tiles": [a, b], "size": len(es)})
    return out
