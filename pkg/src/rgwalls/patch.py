"""Finite pieces of the Cayley complex around the identity.

Two builders share one output type.  ``build_ball`` is the literal
radius-r ball: a breadth-first enumeration of reduced words whose vertex
identifications come from relator deductions and word-problem oracle
calls.  It is exponential in the radius and meant for micro scale.
``build_overlap_patch`` grows a patch from one cell by attaching every
cell that overlaps a present cell in at least ``min_overlap`` edges,
closed under tiles of the assignment.  Every identification made by
either builder is forced by a relator, so the patch maps to X.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complex import Complex2, LabelledGraph
from .diagrams import Equal, SearchBudget, Unknown, word_problem
from .tiles import overlap_runs
from .words import free_reduce, inverse_word, primitive_period, rotate


@dataclass
class CayleyPatch:
    complex: Complex2
    base: int
    radius: int
    frontier: frozenset
    complete: np.ndarray  # per vertex
    dist: np.ndarray  # per vertex, from base
    words: list  # witness word per vertex
    kind: str = "ball"
    cell_depth: list = field(default_factory=list)
    depth: int = 0
    tiles: list = field(default_factory=list)  # (tile id, tuple of cell indices)
    tile_of_cell: dict = field(default_factory=dict)  # cell -> index into tiles
    flags: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    @property
    def n_cells(self) -> int:
        return len(self.complex.cells)

    def interior_cells(self) -> list:
        if self.kind == "overlap":
            return [c for c, k in enumerate(self.cell_depth) if k < self.depth]
        ok = self.complete
        return [c for c in range(self.n_cells)
                if all(ok[v] for v in self.complex.boundary_vertices(c))]

    def to_json(self) -> dict:
        d = self.complex.to_json()
        d.update({
            "kind": self.kind,
            "base": int(self.base),
            "radius": int(self.radius),
            "frontier": sorted(int(v) for v in self.frontier),
            "complete": [bool(x) for x in self.complete],
            "cell_depth": list(self.cell_depth),
            "tiles": [[int(t), list(map(int, cs))] for t, cs in self.tiles],
            "flags": self.flags,
        })
        return d


def cells_through_edge(patch, e: int) -> list:
    """All (cell index, boundary position) traversals of edge e."""
    cx = patch.complex if isinstance(patch, CayleyPatch) else patch
    idx = _traversal_index(cx)
    return list(idx.get(e, ()))


_TRAV: dict = {}


def _traversal_index(cx: Complex2) -> dict:
    key = id(cx)
    hit = _TRAV.get(key)
    if hit is not None and hit[0] is cx:
        return hit[1]
    idx = {}
    for c, cell in enumerate(cx.cells):
        for p, (e, _) in enumerate(cell.boundary):
            idx.setdefault(e, []).append((c, p))
    _TRAV[key] = (cx, idx)
    return idx


def _cell_keys(g: LabelledGraph, cells, relators):
    out = {}
    for rid, a in cells:
        r = relators[rid]
        per = primitive_period(r)
        path = g.read(a, r)
        key = (rid, min(path[k] for k in range(0, len(r), per)))
        if key not in out:
            out[key] = (rid, path[0])
    return out


def _letters(m: int) -> list:
    return [x for g in range(1, m + 1) for x in (g, -g)]


# ---------------------------------------------------------------------
# literal ball

def build_ball(P, radius: int, d=None, eps=Fraction(1, 100), budget: SearchBudget | None = None,
               max_vertices: int = 20000, oracle_pairs: int = 0) -> CayleyPatch:
    """Ball of the given radius around the identity.

    Reduced words are enumerated breadth first; relator deductions inside
    the ball identify vertices (each is a one-cell witness).  When
    ``oracle_pairs`` > 0, up to that many remaining vertex pairs are
    settled with the word-problem oracle; ``Unknown`` keeps them apart
    and flags both.
    """
    l = P.l
    d = P.d if d is None else d
    rel = P.relators
    g = LabelledGraph()
    base = g.add_vertex()
    words = {base: ()}
    frontier_q = deque([base])
    truncated = False
    letters = _letters(P.m)
    while frontier_q:
        v = frontier_q.popleft()
        w = words[v]
        if len(w) >= radius:
            continue
        for x in letters:
            if w and x == -w[-1]:
                continue
            if len(g.parent) >= max_vertices:
                truncated = True
                break
            u = g.add_vertex()
            g.add_edge(v, x, u)
            words[u] = w + (x,)
            frontier_q.append(u)
    # relator deductions: a relator read fully inside the ball from v must close
    _close_relators(g, rel)
    roots = g.roots()
    # shortest witness word per class
    best = {}
    for v, w in words.items():
        r = g.find(v)
        if r not in best or (len(w), w) < (len(best[r]), best[r]):
            best[r] = w
    split = set()
    witnesses = []
    calls = 0
    if oracle_pairs:
        rs = sorted(best, key=lambda r: (len(best[r]), best[r]))
        for i in range(len(rs)):
            for j in range(i + 1, len(rs)):
                if calls >= oracle_pairs:
                    break
                a, b = g.find(rs[i]), g.find(rs[j])
                if a == b:
                    continue
                calls += 1
                res = word_problem(list(best[rs[i]]), list(best[rs[j]]), P, d, eps, budget)
                if isinstance(res, Equal):
                    witnesses.append({"words": [list(best[rs[i]]), list(best[rs[j]])],
                                      "cells": len(res.diagram.complex.cells) if res.diagram else 0})
                    g.merge(a, b)
                    _close_relators(g, rel)
                elif isinstance(res, Unknown):
                    split.update((rs[i], rs[j]))
        best2 = {}
        for r, w in best.items():
            rr = g.find(r)
            if rr not in best2 or (len(w), w) < (len(best2[rr]), best2[rr]):
                best2[rr] = w
        best = best2
    cells = []
    for v in g.roots():
        for rid, r in enumerate(rel):
            path = g.read(v, r)
            if len(path) == l + 1 and path[-1] == path[0]:
                cells.append((rid, v))
    keyed = _cell_keys(g, cells, rel)
    cell_list = [(rid, a, 0, 1) for rid, a in keyed.values()]
    cx = g.to_complex(cell_list, l, rel)
    roots = g.roots()
    vid = {v: i for i, v in enumerate(roots)}
    n = len(roots)
    dist = _distances(cx, vid[g.find(base)])
    wl = [list(best.get(v, ())) for v in roots]
    frontier = frozenset(i for i in range(n) if dist[i] >= radius)
    thr = radius - l
    complete = np.array([dist[i] < thr and not truncated for i in range(n)], dtype=bool)
    for v in split:
        r = g.find(v)
        if r in vid:
            complete[vid[r]] = False
    flags = {"truncated": truncated, "oracle_calls": calls, "split_vertices": len(split)}
    return CayleyPatch(cx, vid[g.find(base)], radius, frontier, complete, dist, wl, "ball",
                       flags=flags, witnesses=witnesses)


def _close_relators(g: LabelledGraph, rel) -> None:
    """Relator deductions: close every relator path that fits, merging endpoints."""
    changed = True
    while changed:
        changed = False
        for v in g.roots():
            if g.parent[v] != v:
                continue
            for r in rel:
                for w in (r, inverse_word(r)):
                    fwd = g.read(v, w)
                    if len(fwd) == len(w) + 1:
                        if fwd[-1] != g.find(v):
                            g.merge(fwd[-1], v)
                            changed = True
                        continue
                    back = g.read(v, inverse_word(w))
                    kf, kb = len(fwd) - 1, len(back) - 1
                    if kf + kb >= len(w):
                        a, b = fwd[kf], back[len(w) - kf]
                        if g.find(a) != g.find(b):
                            g.merge(a, b)
                            changed = True
                    elif kf + kb == len(w) - 1:
                        # a single missing edge is a deduction
                        x = w[kf]
                        if g.step(fwd[-1], x) is None and g.step(back[-1], -x) is None:
                            g.add_edge(fwd[-1], x, back[-1])
                            changed = True


def _distances(cx: Complex2, src: int) -> np.ndarray:
    from . import _kernels as K
    indptr, indices, _ = cx.vertex_csr()
    return K.bfs(indptr, indices, src)


# ---------------------------------------------------------------------
# overlap closure patch

class _OverlapPatchBuilder:
    def __init__(self, P, A, min_overlap: int, max_cells: int):
        self.P = P
        self.A = A
        self.rel = P.relators
        self.l = P.l
        self.min_overlap = min_overlap
        self.max_cells = max_cells
        self.g = LabelledGraph()
        self.cells = []  # (rid, anchor)
        self.depth = []
        self.keys = {}
        self.truncated = False
        self._runs = {}
        self._tile_words = {}
        self._merges_seen = 0

    def runs(self, rid):
        if rid not in self._runs:
            rs = overlap_runs(self.rel, [rid], None, self.min_overlap)
            out = []
            for o in rs:
                j, p, q, orient = o.right, o.p, o.q, o.orientation
                if o.left != rid:
                    continue
                if j == rid and orient == 1 and (p - q) % self.l == 0:
                    continue
                qq = q if orient == 1 else (self.l - q) % self.l
                out.append((j, p, qq))
            self._runs[rid] = sorted(set(out))
        return self._runs[rid]

    def key(self, rid, a):
        r = self.rel[rid]
        per = primitive_period(r)
        path = self.g.read(a, r)
        return (rid, min(path[k] for k in range(0, len(r), per)))

    def lookup(self, rid, a):
        k = self.key(rid, a)
        c = self.keys.get(k)
        if c is None and self.g.merges != self._merges_seen:
            # stored keys name roots that merges may have retired
            self.rekey()
            c = self.keys.get(k)
        return c

    def rekey(self):
        old = self.keys
        self.keys = {}
        self._merges_seen = self.g.merges
        for c, (rid, a) in enumerate(self.cells):
            if self.depth[c] < 0:
                continue
            k = self.key(rid, a)
            if k in self.keys:
                c0 = self.keys[k]
                self.depth[c0] = min(self.depth[c0], self.depth[c])
                self.depth[c] = -1  # duplicate, dropped at the end
            else:
                self.keys[k] = c
        return old

    def add_cell(self, rid, v_at_pos, pos, depth):
        """Attach relator rid so that its position ``pos`` sits at vertex v."""
        r = self.rel[rid]
        rr = rotate(r, pos)
        if len(self.cells) >= self.max_cells:
            path = self.g.read(v_at_pos, rr)
            if len(path) != self.l + 1 or path[-1] != path[0]:
                self.truncated = True
                return None, False
        self.g.attach_cycle(v_at_pos, rr)
        a = self.g.read(v_at_pos, rr[: (self.l - pos) % self.l])[-1]
        c = self.lookup(rid, a)
        if c is not None and self.depth[c] >= 0:
            if depth < self.depth[c]:
                self.depth[c] = depth
            return c, False
        if len(self.cells) >= self.max_cells:
            self.truncated = True
            return None, False
        self.cells.append((rid, a))
        self.depth.append(depth)
        self.keys[self.key(rid, a)] = len(self.cells) - 1
        return len(self.cells) - 1, True

    def vertex(self, c, pos):
        rid, a = self.cells[c]
        return self.g.read(a, self.rel[rid][:pos])[-1]

    def tile_words(self, tid, rid):
        """Words from rid's anchor to every other cell anchor of the tile."""
        key = (tid, rid)
        if key not in self._tile_words:
            t = self.A.tiles[tid]
            g = t.graph
            src = dict(t.cells)[rid]
            prev = {g.find(src): None}
            q = deque([g.find(src)])
            while q:
                u = q.popleft()
                for x, w in sorted(g.out[u].items()):
                    w = g.find(w)
                    if w not in prev:
                        prev[w] = (u, x)
                        q.append(w)
            out = []
            for r2, a2 in t.cells:
                word = []
                v = g.find(a2)
                while prev[v] is not None:
                    u, x = prev[v]
                    word.append(x)
                    v = u
                out.append((r2, tuple(reversed(word))))
            self._tile_words[key] = out
        return self._tile_words[key]

    def place_tile(self, c, depth):
        rid, a = self.cells[c]
        tid = self.A.assign[rid]
        new = []
        for r2, word in self.tile_words(tid, rid):
            if r2 == rid and not word:
                continue
            v = a
            for x in word:
                w = self.g.step(v, x)
                if w is None:
                    w = self.g.add_vertex()
                    self.g.add_edge(v, x, w)
                v = self.g.find(w)
            c2, fresh = self.add_cell(r2, v, 0, depth)
            if fresh:
                new.append(c2)
        return new


def build_overlap_patch(P, A, base_relator: int = 0, depth: int = 2, min_overlap: int | None = None,
                        max_cells: int = 300) -> CayleyPatch:
    """Cells reachable from one cell through overlaps of >= min_overlap edges, closed under tiles."""
    l = P.l
    w = l // 4 + 1 if min_overlap is None else min_overlap
    B = _OverlapPatchBuilder(P, A, w, max_cells)
    v0 = B.g.add_vertex()
    c0, _ = B.add_cell(base_relator, v0, 0, 0)
    layer = [c0] + B.place_tile(c0, 0)
    for k in range(1, depth + 1):
        nxt = []
        for c in layer:
            if B.depth[c] < 0:
                continue
            if len(B.cells) >= B.max_cells:
                B.truncated = True
                break
            rid, _ = B.cells[c]
            for j, p, q in B.runs(rid):
                v = B.vertex(c, p)
                c2, fresh = B.add_cell(j, v, q, k)
                if fresh:
                    nxt.append(c2)
        for c in list(nxt):
            nxt.extend(B.place_tile(c, k))
        layer = nxt
    B.rekey()
    keep = [c for c in range(len(B.cells)) if B.depth[c] >= 0]
    cells = [B.cells[c] for c in keep]
    cell_depth = [B.depth[c] for c in keep]
    cx = B.g.to_complex([(r, a, 0, 1) for r, a in cells], l, P.relators)
    roots = B.g.roots()
    vid = {v: i for i, v in enumerate(roots)}
    base = vid[B.g.find(v0)]
    dist = _distances(cx, base)
    n = len(roots)
    complete = np.zeros(n, dtype=bool)
    interior = [c for c, dd in enumerate(cell_depth) if dd < depth]
    for c in interior:
        for v in cx.boundary_vertices(c):
            complete[v] = True
    frontier = frozenset(i for i in range(n) if not complete[i])
    patch = CayleyPatch(cx, base, int(dist.max()) if n else 0, frontier, complete, dist,
                        [[] for _ in range(n)], "overlap", cell_depth, depth,
                        flags={"truncated": B.truncated, "min_overlap": w, "max_cells": max_cells})
    instantiate_tiles(patch, P, A)
    return patch


def instantiate_tiles(patch: CayleyPatch, P, A) -> None:
    """Record, for every cell, the patch cells of its tile placed at that cell."""
    cx = patch.complex
    rel = P.relators
    l = P.l
    # vertex-level lookup: (relator, anchor vertex) -> cell
    key_of = {}
    for c, cell in enumerate(cx.cells):
        vs = cx.boundary_vertices(c)
        per = primitive_period(rel[cell.relator_id])
        key_of[(cell.relator_id, min(vs[k] for k in range(0, l, per)))] = c
    adj = {}
    for e, (t, h, x) in enumerate(cx.edges):
        adj.setdefault(t, {})[x] = h
        adj.setdefault(h, {})[-x] = t
    B = _OverlapPatchBuilder(P, A, 1, 0)
    seen = {}
    tiles, tile_of = [], {}
    for c, cell in enumerate(cx.cells):
        rid = cell.relator_id
        tid = A.assign[rid]
        a = cx.boundary_vertices(c)[0]
        members = [c]
        ok = True
        for r2, word in B.tile_words(tid, rid):
            if r2 == rid and not word:
                continue
            v = a
            for x in word:
                v = adj.get(v, {}).get(x)
                if v is None:
                    break
            if v is None:
                ok = False
                continue
            r = rel[r2]
            per = primitive_period(r)
            path = [v]
            for x in r[:-1]:
                nv = adj.get(path[-1], {}).get(x)
                if nv is None:
                    break
                path.append(nv)
            if len(path) != l:
                ok = False
                continue
            c2 = key_of.get((r2, min(path[k] for k in range(0, l, per))))
            if c2 is None:
                ok = False
            else:
                members.append(c2)
        key = (tid, tuple(sorted(set(members))))
        if key not in seen:
            seen[key] = len(tiles)
            tiles.append(key)
        tile_of[c] = seen[key]
        if not ok:
            patch.flags.setdefault("partial_tiles", 0)
            patch.flags["partial_tiles"] += 1
    patch.tiles = tiles
    patch.tile_of_cell = tile_of
