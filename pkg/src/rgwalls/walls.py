"""Walls on Cayley patches: pull-back, tracing, decompositions, checks."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .complex import Complex2
from .words import as_fraction


@dataclass
class WallStructureOnPatch:
    complex: Complex2
    pairings: list  # per cell, boundary coordinates
    interior: np.ndarray  # per cell
    patch: object = None
    consistency: list = field(default_factory=list)

    def __post_init__(self):
        self._inc = None
        self._class = {}

    @property
    def l(self) -> int:
        return self.complex.l

    def incidence(self) -> dict:
        """edge -> list of (cell, position)."""
        if self._inc is None:
            inc = {}
            for c, cell in enumerate(self.complex.cells):
                for p, (e, _) in enumerate(cell.boundary):
                    inc.setdefault(e, []).append((c, p))
            self._inc = inc
        return self._inc

    def edge(self, c: int, p: int) -> int:
        return self.complex.cells[c].boundary[p][0]

    def diagonals(self, cells: Sequence[int] | None = None) -> list:
        cells = range(len(self.complex.cells)) if cells is None else cells
        out = []
        for c in cells:
            sig = self.pairings[c]
            for p in range(self.l):
                q = int(sig[p])
                if p < q:
                    out.append((c, p, q, self.edge(c, p), self.edge(c, q)))
        return out

    def classes(self, interior_only: bool = True) -> np.ndarray:
        key = bool(interior_only)
        if key not in self._class:
            cells = [c for c in range(len(self.complex.cells)) if self.interior[c] or not interior_only]
            d = self.diagonals(cells)
            self._class[key] = (K.component_labels(len(self.complex.edges), [x[3] for x in d], [x[4] for x in d]), d)
        return self._class[key][0]


def from_complex(cx: Complex2, pairings: Sequence, interior: Sequence[bool] | None = None) -> WallStructureOnPatch:
    n = len(cx.cells)
    inter = np.ones(n, dtype=bool) if interior is None else np.asarray(interior, dtype=bool)
    return WallStructureOnPatch(cx, [np.asarray(s) for s in pairings], inter)


def instantiate_walls(patch, structures, A=None) -> WallStructureOnPatch:
    """Pull the relator pairings back to every cell of the patch."""
    cx = patch.complex
    pairings = [structures.sigma[cell.relator_id] for cell in cx.cells]
    inter = np.zeros(len(cx.cells), dtype=bool)
    inter[patch.interior_cells()] = True
    W = WallStructureOnPatch(cx, pairings, inter, patch)
    if A is not None:
        for tid, cells in patch.tiles:
            core = A.core_of(tid)
            if core.id == tid:
                continue
            snap = structures.snapshots.get(core.id)
            if snap is None:
                continue
            for c in cells:
                r = cx.cells[c].relator_id
                if r in snap and not np.array_equal(snap[r], pairings[c]):
                    W.consistency.append({"tile": tid, "core": core.id, "cell": c, "relator": r})
    return W


# ---------------------------------------------------------------------
# embedded trees

def check_embedded_trees(W: WallStructureOnPatch, max_report: int = 20) -> dict:
    """Cycles and repeated cells among walls built from interior cells only.

    Any violation found is a violation in X: the patch is a subcomplex
    obtained by forced identifications only.
    """
    lab = W.classes(True)
    diags = W._class[True][1]
    inc = W.incidence()
    nodes, ndiag, cells_seen = {}, {}, {}
    doubles = {}
    for c, p, q, a, b in diags:
        k = int(lab[a])
        ndiag[k] = ndiag.get(k, 0) + 1
        nodes.setdefault(k, set()).update((a, b))
        s = cells_seen.setdefault(k, {})
        s[c] = s.get(c, 0) + 1
        if s[c] == 2:
            doubles.setdefault(k, []).append(c)
    violations = []
    closed = 0
    for k in sorted(nodes):
        open_ = any(not all(W.interior[c] for c, _ in inc[e]) for e in nodes[k])
        closed += not open_
        cyc = ndiag[k] >= len(nodes[k])
        if cyc or k in doubles:
            if len(violations) < max_report:
                violations.append({"class": k, "cycle": bool(cyc), "repeated_cells": doubles.get(k, []),
                                   "diagonals": ndiag[k], "midpoints": len(nodes[k]), "closed": not open_})
            else:
                violations.append({"class": k})
    return {"components": len(nodes), "closed_components": closed,
            "violations": len(violations), "witnesses": violations[:max_report]}


# ---------------------------------------------------------------------
# tracing

@dataclass
class HypergraphSegment:
    diagonals: list  # (cell, entry position, exit position)
    x0: int
    xn: int
    truncated: bool = False
    midpoints: list = field(default_factory=list)  # edge ids, len(diagonals) + 1

    @property
    def cells(self) -> list:
        return [d[0] for d in self.diagonals]


@dataclass
class HypergraphComponent:
    diagonals: list  # (cell, p, q, edge_p, edge_q)
    midpoints: set
    truncated: bool

    def graph(self):
        adj = {}
        for i, (c, p, q, a, b) in enumerate(self.diagonals):
            adj.setdefault(a, []).append((b, i))
            adj.setdefault(b, []).append((a, i))
        return adj

    def segment(self, x: int, y: int) -> HypergraphSegment | None:
        """A shortest hypergraph path from midpoint x to midpoint y."""
        adj = self.graph()
        prev = {x: None}
        dq = deque([x])
        while dq:
            u = dq.popleft()
            if u == y:
                break
            for v, i in adj.get(u, ()):
                if v not in prev:
                    prev[v] = (u, i)
                    dq.append(v)
        if y not in prev:
            return None
        path, mids = [], [y]
        v = y
        while prev[v] is not None:
            u, i = prev[v]
            c, p, q, a, b = self.diagonals[i]
            path.append((c, p, q) if a == u else (c, q, p))
            mids.append(u)
            v = u
        return HypergraphSegment(list(reversed(path)), x, y, self.truncated, list(reversed(mids)))


def trace(W: WallStructureOnPatch, start: int, max_cells: int = 10000, interior_only: bool = False) -> HypergraphComponent:
    """Grow the hypergraph component through the midpoint of edge ``start``."""
    inc = W.incidence()
    seen = {start}
    dq = deque([start])
    diags = set()
    truncated = False
    used_cells = set()
    while dq:
        e = dq.popleft()
        for c, p in inc.get(e, ()):
            if interior_only and not W.interior[c]:
                truncated = True
                continue
            if not W.interior[c]:
                truncated = True
            q = int(W.pairings[c][p])
            key = (c, min(p, q), max(p, q))
            if key in diags:
                continue
            if len(used_cells | {c}) > max_cells:
                truncated = True
                continue
            used_cells.add(c)
            diags.add(key)
            f = W.edge(c, q)
            if f not in seen:
                seen.add(f)
                dq.append(f)
    out = [(c, p, q, W.edge(c, p), W.edge(c, q)) for c, p, q in sorted(diags)]
    return HypergraphComponent(out, seen, truncated)


# ---------------------------------------------------------------------
# decompositions

class TileOracle:
    """Augmented tiles of patch cells, as frozensets of patch cell indices."""

    def __init__(self, W: WallStructureOnPatch, A, structures=None):
        self.W = W
        self.A = A
        self.patch = W.patch
        self._memo = {}
        self._local = {}

    def tile_instance(self, c: int):
        if self.patch is None or not self.patch.tiles:
            return None, (c,)
        return self.patch.tiles[self.patch.tile_of_cell[c]]

    def _meets_core(self, ti: int, tid: int, cells: tuple, c: int, p: int) -> bool:
        if ti not in self._local:
            cx = self.W.complex
            core = self.A.core_of(tid)
            core_edges = {e for x in cells if cx.cells[x].relator_id in core.relators for e in cx.cells[x].edges()}
            d = self.W.diagonals(cells)
            lab = K.component_labels(len(cx.edges), [x[3] for x in d], [x[4] for x in d])
            self._local[ti] = (lab, {int(lab[e]) for e in core_edges})
        lab, good = self._local[ti]
        return int(lab[self.W.edge(c, p)]) in good

    def augmented(self, c: int, p: int) -> frozenset:
        """Augmented tile of cell c for the wall through its position p."""
        key = (c, min(p, int(self.W.pairings[c][p])))
        if key in self._memo:
            return self._memo[key]
        if self.patch is None or not self.patch.tiles or self.A is None:
            res = frozenset((c,))
        else:
            ti = self.patch.tile_of_cell[c]
            tid, cells = self.patch.tiles[ti]
            core = self.A.core_of(tid)
            if core.id == tid or self._meets_core(ti, tid, cells, c, p):
                res = frozenset(cells)
            else:
                res = frozenset((c,))
        self._memo[key] = res
        return res


@dataclass
class Factor:
    start: int  # index into segment diagonals
    end: int  # exclusive
    witness: int  # cell
    tile: frozenset


@dataclass
class Decomposition:
    segment: HypergraphSegment
    factors: list
    tight: bool = False
    nonunique: list = field(default_factory=list)
    exceptions: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.factors)

    def tiles(self) -> list:
        return [f.tile for f in self.factors]


@dataclass
class ReturningDecomposition:
    decomposition: Decomposition
    base_tile: frozenset
    reason: str = ""


def _extend(state, d, aug):
    """Greedy decomposition step; state is a tuple of (start, end, witness, tile, candidates)."""
    c, p, q = d
    t = aug(c, p)
    if state:
        start, end, wit, tile, cands = state[-1]
        if c in tile:
            return state[:-1] + ((start, end + 1, wit, tile, cands),)
        if t is not None and tile <= t:
            return state[:-1] + ((start, end + 1, c, t, cands | {t}),)
    pos = state[-1][1] if state else 0
    return state + ((pos, pos + 1, c, t, frozenset((t,))),)


def decompose(seg: HypergraphSegment, oracle: TileOracle) -> Decomposition:
    """Greedy maximal factorization into augmented-tile pieces."""
    state = ()
    for d in seg.diagonals:
        state = _extend(state, d, oracle.augmented)
    factors = [Factor(s, e, w, t) for s, e, w, t, _ in state]
    dec = Decomposition(seg, factors)
    # the tile of a factor is determined by the factor
    for i, f in enumerate(factors):
        cells = {seg.diagonals[k][0] for k in range(f.start, f.end)}
        cands = {oracle.augmented(seg.diagonals[k][0], seg.diagonals[k][1]) for k in range(f.start, f.end)}
        cands = {t for t in cands if cells <= t}
        if len(cands) > 1:
            dec.nonunique.append(i)
    return dec


def _sub(dec: Decomposition, i: int, j: int, last_end: int | None = None) -> Decomposition:
    """Factors i..j-1 as a decomposition of the corresponding subsegment."""
    fs = dec.factors[i:j]
    s0 = fs[0].start
    s1 = fs[-1].end if last_end is None else last_end
    seg = dec.segment
    diags = seg.diagonals[s0:s1]
    mids = seg.midpoints[s0:s1 + 1]
    nf = []
    for f in fs:
        e = min(f.end, s1)
        nf.append(Factor(f.start - s0, e - s0, f.witness, f.tile))
    return Decomposition(HypergraphSegment(diags, mids[0], mids[-1], seg.truncated, mids), nf)


def tighten(dec: Decomposition, base_tile: frozenset | None = None):
    """Merge nested neighbours, extract returning subsegments, shift at shared cores.

    Returns a Decomposition flagged tight, or a ReturningDecomposition.
    """
    n0 = dec.n
    fs = list(dec.factors)
    changed = True
    while changed:
        changed = False
        for i in range(len(fs) - 1):
            a, b = fs[i], fs[i + 1]
            if b.tile <= a.tile or a.tile <= b.tile:
                t = a.tile if b.tile <= a.tile else b.tile
                w = a.witness if t is a.tile else b.witness
                fs[i:i + 2] = [Factor(a.start, b.end, w, t)]
                changed = True
                break
    work = Decomposition(dec.segment, fs, nonunique=list(dec.nonunique))
    for i in range(len(fs)):
        for j in range(i + 2, len(fs)):
            ti, tj = fs[i].tile, fs[j].tile
            if not (ti & tj):
                continue
            if tj <= ti:
                return ReturningDecomposition(_sub(work, i + 1, j), ti, "nested later tile")
            if ti <= tj:
                return ReturningDecomposition(_sub(work, i + 1, j), tj, "nested earlier tile")
            # shared core: cut the later factor at its first diagonal reaching the core
            shared = ti & tj
            seg = dec.segment
            cut = None
            for k in range(fs[j].start, fs[j].end):
                if seg.diagonals[k][0] in shared:
                    cut = k + 1
                    break
            if cut is None:
                cut = fs[j].end
            return ReturningDecomposition(_sub(work, i + 1, j + 1, cut), ti, "shared core")
    exceptions = []
    for i in range(len(fs) - 1):
        a, b = fs[i], fs[i + 1]
        shared = a.tile & b.tile
        if not shared:
            continue
        seg = dec.segment
        k = b.start
        while k < b.end - 1 and seg.diagonals[k][0] in shared:
            k += 1
        if k != b.start:
            fs[i] = Factor(a.start, k, a.witness, a.tile)
            fs[i + 1] = Factor(k, b.end, b.witness, b.tile)
        if fs[i + 1].end - fs[i + 1].start != 1:
            exceptions.append(i + 1)
    out = Decomposition(dec.segment, fs, tight=not exceptions, nonunique=list(dec.nonunique), exceptions=exceptions)
    assert out.n <= n0
    return out


def is_returning(dec: Decomposition, base_tile: frozenset, edge_of_tile) -> bool:
    """Both ends in the base tile and no factor tile contains all the others."""
    if not dec.factors:
        return False
    union = frozenset().union(*dec.tiles())
    return (edge_of_tile(dec.segment.x0) and edge_of_tile(dec.segment.xn)
            and not any(union <= t for t in dec.tiles()))


@dataclass
class ReturningSearch:
    returning: list
    self_intersections: list
    segments: int
    truncated: bool
    qi: list
    nonunique: int = 0


def find_returning(W: WallStructureOnPatch, A, structures=None, N: int = 8, base_tiles: Sequence | None = None,
                   max_steps: int = 20000, d=None, c: float = 1.0, max_report: int = 10) -> ReturningSearch:
    """Search segments leaving a base tile and coming back within N factors.

    Segments start on a base tile, leave it through a cell outside it, run
    through interior cells only, and stop at their first return.
    """
    oracle = TileOracle(W, A, structures)
    cx = W.complex
    inc = W.incidence()
    patch = W.patch
    if base_tiles is None:
        base_tiles = []
        if patch is not None and patch.tiles:
            seen = set()
            for cc, dd in enumerate(patch.cell_depth):
                if dd == 0:
                    ti = patch.tile_of_cell[cc]
                    if ti not in seen:
                        seen.add(ti)
                        base_tiles.append(frozenset(patch.tiles[ti][1]))
        else:
            base_tiles = [frozenset((0,))]
    found, selfx, qi = [], [], []
    steps = 0
    nseg = 0
    truncated = False
    nonunique = 0
    dist_cache = {}
    dval = None if d is None else float(as_fraction(d))

    def distance(x, y):
        if x not in dist_cache:
            dist_cache[x] = cx.midpoint_distances([x])[0]
        return int(dist_cache[x][y])

    for T0 in base_tiles:
        t_edges = {e for cc in T0 for e in cx.cells[cc].edges()}
        for x0 in sorted(t_edges):
            for c0, p0 in inc[x0]:
                if c0 in T0 or not W.interior[c0]:
                    continue
                # depth-first over non-backtracking continuations
                stack = [(c0, p0, (), (), frozenset(), (x0,))]
                while stack:
                    if steps >= max_steps:
                        truncated = True
                        stack.clear()
                        break
                    c, p, path, state, visited, mids = stack.pop()
                    steps += 1
                    q = int(W.pairings[c][p])
                    d_ = (c, p, q)
                    if c in visited:
                        seg = HypergraphSegment(list(path) + [d_], x0, W.edge(c, q), False, list(mids) + [W.edge(c, q)])
                        if len(selfx) < max_report:
                            selfx.append({"cells": [x[0] for x in seg.diagonals], "x0": x0})
                        continue
                    state2 = _extend(state, d_, oracle.augmented)
                    if len(state2) > N:
                        continue
                    path2 = path + (d_,)
                    y = W.edge(c, q)
                    mids2 = mids + (y,)
                    if y in t_edges:
                        nseg += 1
                        seg = HypergraphSegment(list(path2), x0, y, False, list(mids2))
                        dec = Decomposition(seg, [Factor(s, e, w, t) for s, e, w, t, _ in state2])
                        union = frozenset().union(*dec.tiles())
                        if not any(union <= t for t in dec.tiles()):
                            found.append(ReturningDecomposition(dec, T0, "returns to base tile"))
                        continue
                    nxt = [(c2, p2) for c2, p2 in inc[y] if c2 != c and W.interior[c2]]
                    if not nxt:
                        nseg += 1
                        if dval is not None:
                            n = len(state2)
                            dist = distance(x0, y)
                            bound = (1 - 4 * dval) * n * cx.l - 2 * c * cx.l
                            qi.append((n, dist, bound, dist >= bound))
                        continue
                    for c2, p2 in reversed(nxt):
                        stack.append((c2, p2, path2, state2, visited | {c}, mids2))
    return ReturningSearch(found, selfx, nseg, truncated, qi, nonunique)


# ---------------------------------------------------------------------
# quasi-isometry check

def qi_check(seg: HypergraphSegment, W: WallStructureOnPatch, d, n: int | None = None, c: float = 1.0) -> dict:
    """Endpoint distance against (1-4d) * n * l/2 - c*l, all in half-edge units."""
    cx = W.complex
    n = len(seg.diagonals) if n is None else n
    dist = int(cx.midpoint_distances([seg.x0])[0][seg.xn])
    dv = float(as_fraction(d))
    bound = (1 - 4 * dv) * n * cx.l - 2 * c * cx.l
    return {"n": n, "endpoint_distance": dist, "bound": bound, "pass": dist >= bound}


# ---------------------------------------------------------------------
# wall-exchanging relators

def antipodal_letter_positions(r: Sequence[int]) -> list:
    """Positions p < l/2 where p and p + l/2 carry the same signed letter."""
    l = len(r)
    h = l // 2
    return [p for p in range(h) if r[p] == r[p + h]]


def antipodal_letter_fraction(P) -> float:
    rs = P.relators
    return sum(1 for r in rs if antipodal_letter_positions(r)) / len(rs) if rs else 0.0


def find_wall_exchanging_relator(P, A, structures=None):
    """First relator with an antipodal equal-letter pair whose cell forms a
    singleton tile (in no assigned tile of size >= 2) with antipodal pairing."""
    from .tilewalls import antipodal_pairing

    big = set()
    for tid in A.assigned_tiles():
        t = A.tiles[tid]
        if t.size >= 2:
            big.update(t.relators)
    anti = antipodal_pairing(P.l)
    for rid, r in enumerate(P.relators):
        pos = antipodal_letter_positions(r)
        if not pos or rid in big:
            continue
        if structures is not None and not np.array_equal(structures.sigma[rid], anti):
            continue
        return (rid, (pos[0], pos[0] + P.l // 2))
    return None
