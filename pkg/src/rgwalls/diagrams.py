"""Disc diagram search, the bounded word problem, and short-loop checks.

The search works on cyclic boundary words.  A move attaches one cell
along a common subword ``u`` of the boundary and a relator translate
``u v``, replacing ``u`` by ``v^-1`` and cyclically reducing.  States are
memoized on the least rotation over both orientations.  A successful
move sequence is replayed by :class:`_DiagramBuilder` into an explicit
diagram, so every ``Equal`` answer carries a checkable witness.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .complex import Cell, Complex2, _ParityUF
from .words import as_fraction, canonical_cyclic, cyclic_reduce, free_reduce, inverse_word, rotate


@dataclass(frozen=True)
class SearchBudget:
    max_cells: int = 4
    max_states: int = 200_000
    memo_capacity: int = 1_000_000
    use_memo: bool = True

    def __post_init__(self):
        if self.max_cells < 0 or self.max_states <= 0 or self.memo_capacity <= 0:
            raise ValueError("budget fields must be positive")


@dataclass
class DiscDiagram:
    complex: Complex2
    boundary_path: list  # ((edge, direction), ...) reading the input word
    word: tuple
    exhaustive: bool = True
    states: int = 0

    @property
    def n_cells(self) -> int:
        return len(self.complex.cells)

    def euler_characteristic(self) -> int:
        return self.complex.n_vertices - len(self.complex.edges) + len(self.complex.cells)

    def boundary_word(self) -> tuple:
        E = self.complex.edges
        return tuple(E[e][2] * s for e, s in self.boundary_path)

    def internal_edges(self) -> int:
        on_boundary = {e for e, _ in self.boundary_path}
        deg = self.complex.degrees()
        return int(sum(1 for e in range(len(self.complex.edges)) if e not in on_boundary and deg[e] > 0))


@dataclass
class NotFoundWithinBudget:
    word: tuple
    states: int
    exhaustive: bool
    depth_reached: int
    reason: str = ""


def translates(relators: Sequence[tuple]) -> list:
    """(relator_id, rotation, orientation, word) for every cyclic translate and inverse."""
    out = []
    seen = set()
    for rid, r in enumerate(relators):
        for orient, base in ((1, tuple(r)), (-1, inverse_word(r))):
            for k in range(len(r)):
                w = rotate(base, k)
                key = (rid, w)
                if key in seen:
                    continue
                seen.add(key)
                out.append((rid, k, orient, w))
    return out


def _index_by_first(trans):
    idx = {}
    for t, (_, _, _, w) in enumerate(trans):
        idx.setdefault(w[0], []).append(t)
    return idx


def _apply(w: tuple, i: int, t_word: tuple, k: int) -> tuple:
    wr = rotate(w, i)
    return cyclic_reduce(inverse_word(t_word[k:]) + wr[k:])


def _moves(w: tuple, trans, by_first):
    n = len(w)
    for i in range(n):
        for t in by_first.get(w[i], ()):
            tw = trans[t][3]
            lim = min(n, len(tw))
            k = 0
            while k < lim and w[(i + k) % n] == tw[k]:
                k += 1
            for kk in range(k, 0, -1):
                yield i, t, kk


def find_disc_diagram(word: Sequence[int], P, budget: SearchBudget = SearchBudget()):
    """Breadth-first search over boundary words by number of attached cells."""
    w0 = cyclic_reduce(tuple(word))
    trans = translates(P.relators)
    by_first = _index_by_first(trans)
    if not w0:
        return _DiagramBuilder(tuple(word), trans).finish(True, 1)
    l = P.l
    root = canonical_cyclic(w0)
    parent = {root: None}
    frontier = [(w0, root)]
    states = 1
    memo_full = False
    for depth in range(1, budget.max_cells + 1):
        remaining = budget.max_cells - depth
        nxt = []
        for w, key in frontier:
            for i, t, k in _moves(w, trans, by_first):
                w2 = _apply(w, i, trans[t][3], k)
                if not w2:
                    moves = _trace(parent, key) + [(w, i, t, k)]
                    return _replay(tuple(word), trans, moves, not memo_full, states)
                # every cell removes at most l letters
                if math.ceil(len(w2) / l) > remaining:
                    continue
                c = canonical_cyclic(w2)
                if budget.use_memo and c in parent:
                    continue
                states += 1
                if states > budget.max_states:
                    return NotFoundWithinBudget(w0, states, False, depth, "max_states")
                if len(parent) < budget.memo_capacity:
                    parent[c] = (key, w, i, t, k)
                else:
                    memo_full = True
                nxt.append((w2, c))
        frontier = nxt
        if not frontier:
            break
    return NotFoundWithinBudget(w0, states, not memo_full, budget.max_cells, "exhausted")


def _trace(parent, key):
    moves = []
    while parent[key] is not None:
        pk, w, i, t, k = parent[key]
        moves.append((w, i, t, k))
        key = pk
    return moves[::-1]


def _replay(word, trans, moves, exhaustive, states):
    B = _DiagramBuilder(word, trans)
    for w, i, t, k in moves:
        B.move(w, i, t, k)
    return B.finish(exhaustive, states)


class _DiagramBuilder:
    def __init__(self, word: tuple, trans):
        self.trans = trans
        self.vuf = _ParityUF()
        self.euf = _ParityUF()
        self.raw = []  # (tail, head, label > 0)
        self.cells = []
        n = len(word)
        vs = [self.vuf.add() for _ in range(n)] if n else [self.vuf.add()]
        cur = []
        for i, x in enumerate(word):
            cur.append(self._new_edge(vs[i], vs[(i + 1) % n], x))
        self.outer = list(cur)
        # reduce the input exactly as the search did
        self.cur = self._reduce([(x, tr) for x, tr in zip(word, cur)])

    def _new_edge(self, a, b, x):
        e = self.euf.add()
        if x > 0:
            self.raw.append((a, b, x))
            return (e, 1)
        self.raw.append((b, a, -x))
        return (e, -1)

    def _ends(self, tr):
        e, d = tr
        r, f = self.euf.find(e)
        t, h, _ = self.raw[e]
        return (t, h) if d > 0 else (h, t)

    def _fold(self, tr1, tr2):
        # tr2 runs back along tr1
        (e1, d1), (e2, d2) = tr1, tr2
        a, _ = self._ends(tr1)
        _, c = self._ends(tr2)
        self.vuf.union(a, c, 0)
        rel = 0 if d2 == -d1 else 1
        self.euf.union(e1, e2, rel)

    def _reduce(self, seq):
        stack = []
        for x, tr in seq:
            if stack and stack[-1][0] == -x:
                self._fold(stack[-1][1], tr)
                stack.pop()
            else:
                stack.append((x, tr))
        i, j = 0, len(stack)
        while j - i >= 2 and stack[i][0] == -stack[j - 1][0]:
            self._fold(stack[j - 1][1], stack[i][1])
            i += 1
            j -= 1
        return stack[i:j]

    def move(self, w, i, t, k):
        assert tuple(x for x, _ in self.cur) == tuple(w)
        rid, rot, orient, tw = self.trans[t]
        n = len(self.cur)
        cur = self.cur[i:] + self.cur[:i]
        u = cur[:k]
        s, _ = self._ends(u[0][1])
        _, e = self._ends(u[-1][1])
        l = len(tw)
        if k == l:
            self.vuf.union(s, e, 0)
            vtr = []
        else:
            vs = [e] + [self.vuf.add() for _ in range(l - k - 1)] + [s]
            vtr = [self._new_edge(vs[j], vs[j + 1], tw[k + j]) for j in range(l - k)]
        self.cells.append((rid, rot, orient, [tr for _, tr in u] + vtr))
        back = [(-tw[k + j], (vtr[j][0], -vtr[j][1])) for j in range(l - k - 1, -1, -1)]
        self.cur = self._reduce(back + cur[k:])

    def finish(self, exhaustive, states) -> DiscDiagram:
        vroot = {}
        for v in range(len(self.vuf.parent)):
            vroot.setdefault(self.vuf.find(v)[0], len(vroot))
        eroot, edges = {}, []
        for raw in range(len(self.euf.parent)):
            r, f = self.euf.find(raw)
            if r in eroot:
                continue
            t, h, x = self.raw[r]
            eroot[r] = len(edges)
            edges.append((vroot[self.vuf.find(t)[0]], vroot[self.vuf.find(h)[0]], x))

        def conv(tr):
            e, d = tr
            r, f = self.euf.find(e)
            return (eroot[r], -d if f else d)

        l = len(self.trans[0][3]) if self.trans else 0
        cells = [Cell(rid, rot, orient, tuple(conv(tr) for tr in trs)) for rid, rot, orient, trs in self.cells]
        cx = Complex2(len(vroot), edges, cells, l)
        word = tuple(self.raw[e][2] * d for e, d in self.outer)
        return DiscDiagram(cx, [conv(tr) for tr in self.outer], word, exhaustive, states)


# ---------------------------------------------------------------------
# word problem

@dataclass
class Equal:
    witness: DiscDiagram


@dataclass
class DistinctAssumingIso:
    """No diagram within the isoperimetric cell bound; holds only on that event."""

    cell_bound: int
    states: int
    conditional: bool = True


@dataclass
class Unknown:
    cell_bound: int
    states: int
    reason: str


def iso_cell_bound(length: int, l: int, d, eps) -> int:
    c = 1 - 2 * (as_fraction(d) + as_fraction(eps))
    if c <= 0:
        raise ValueError("d + eps must be below 1/2 for the isoperimetric bound")
    return math.ceil(Fraction(length) / (c * l))


def word_problem(w1, w2, P, d, eps=Fraction(1, 100), budget: SearchBudget | None = None):
    if as_fraction(d) + as_fraction(eps) >= Fraction(1, 2):
        raise ValueError("d + eps >= 1/2: the isoperimetric bound degenerates")
    w = tuple(w1) + inverse_word(tuple(w2))
    red = cyclic_reduce(w)
    kmax = iso_cell_bound(len(red), P.l, d, eps)
    b = budget or SearchBudget()
    b = SearchBudget(max_cells=kmax, max_states=b.max_states, memo_capacity=b.memo_capacity, use_memo=b.use_memo)
    res = find_disc_diagram(w, P, b)
    if isinstance(res, DiscDiagram):
        return Equal(res)
    if res.exhaustive and res.reason == "exhausted":
        return DistinctAssumingIso(kmax, res.states)
    return Unknown(kmax, res.states, res.reason or "budget")


# ---------------------------------------------------------------------
# short loops

def _short_cycles(Y: Complex2, cutoff: int, max_report: int) -> list:
    """Embedded cycles of length < cutoff, one per closing edge, as sorted edge lists."""
    adj = [[] for _ in range(Y.n_vertices)]
    for e, (t, h, _) in enumerate(Y.edges):
        adj[t].append((h, e))
        adj[h].append((t, e))
    found = []
    seen = set()
    for s in range(Y.n_vertices):
        dist = {s: 0}
        pe = {s: (-1, -1)}
        q = deque([s])
        while q and len(found) < max_report:
            u = q.popleft()
            if 2 * dist[u] + 1 >= cutoff:
                break
            for v, e in adj[u]:
                if e == pe[u][1]:
                    continue
                if v not in dist:
                    dist[v] = dist[u] + 1
                    pe[v] = (u, e)
                    q.append(v)
                elif dist[u] + dist[v] + 1 < cutoff:
                    cyc = _close(pe, u, v, e)
                    if cyc is not None:
                        key = frozenset(cyc)
                        if key not in seen:
                            seen.add(key)
                            found.append(sorted(cyc))
        if len(found) >= max_report:
            break
    return found


def _close(pe, u, v, e):
    def up(x):
        chain = []
        while pe[x][0] != -1:
            chain.append((x, pe[x][1]))
            x = pe[x][0]
        return chain

    cu, cv = up(u), up(v)
    su = [x for x, _ in cu] + [None]
    sv = [x for x, _ in cv] + [None]
    # strip the common tail to get an embedded cycle
    while cu and cv and cu[-1] == cv[-1]:
        cu.pop()
        cv.pop()
    edges = [x for _, x in cu] + [x for _, x in cv] + [e]
    if len(set(edges)) != len(edges):
        return None
    return edges


def short_embedded_loop_check(Y: Complex2, max_report: int = 50, geodesic_cells: Sequence[int] | None = None) -> list:
    """Violations of: no embedded loop shorter than l; cell boundaries embed;
    boundary subpaths of length <= l/2 are geodesics."""
    l = Y.l
    out = []
    ip, ix, ei = Y.vertex_csr()
    g = K.girth(ip, ix, ei, l)
    if g < l:
        for cyc in _short_cycles(Y, l, max_report):
            out.append({"kind": "short_loop", "length": len(cyc), "edges": cyc})
        if not any(v["kind"] == "short_loop" for v in out):
            out.append({"kind": "short_loop", "length": g, "edges": []})
    for c in range(len(Y.cells)):
        vs = Y.boundary_vertices(c)
        if len(set(vs)) != len(vs):
            out.append({"kind": "cell_not_embedded", "cell": c})
    cells = range(len(Y.cells)) if geodesic_cells is None else geodesic_cells
    srcs = sorted({v for c in cells for v in Y.boundary_vertices(c)})
    if srcs:
        D = K.multi_bfs(ip, ix, np.array(srcs))
        row = {v: i for i, v in enumerate(srcs)}
        for c in cells:
            vs = Y.boundary_vertices(c)
            for i in range(l):
                for k in range(1, l // 2 + 1):
                    j = (i + k) % l
                    if D[row[vs[i]], vs[j]] != k:
                        out.append({"kind": "not_geodesic", "cell": c, "start": i, "length": k,
                                    "distance": int(D[row[vs[i]], vs[j]])})
                        break
    return out


def marked_cell_check(Y: Complex2, marked: int) -> bool:
    """True iff Y is a witness against the single-marked-cell cancellation bound."""
    n = len(Y.cells)
    if n < 2:
        raise ValueError("need at least two cells")
    rid = Y.cells[marked].relator_id
    if sum(1 for c in Y.cells if c.relator_id == rid) != 1:
        raise ValueError("marked cell is not the unique cell of its relator")
    sets = Y.cell_edge_sets()
    a, b = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if sets[i] & sets[j]:
                a.append(i)
                b.append(j)
    lab = K.component_labels(n, a, b)
    if len(set(lab.tolist())) != 1:
        raise ValueError("cells do not form a connected union")
    return 4 * Y.cancel() > (n - 1) * Y.l
