"""Combinatorial 2-complexes with l-gon cells.

Two ways to get a :class:`Complex2`:

* :class:`ComplexBuilder` glues fresh l-gons along boundary subpaths and
  records every gluing (needed for boundedness checks).  Cells may be
  unlabelled, which gives the synthetic complexes used in unit tests.
* :class:`LabelledGraph` is a folded (deterministic) labelled graph;
  cells are attached by reading relator words from an anchor vertex.
  This is the picture of a subcomplex of the Cayley complex in which all
  label-forced identifications have been made.

All metric quantities are in half-edge units (hu): one edge is 2 hu.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .words import as_fraction, inverse_word, rotate

UNREACHABLE = -1


@dataclass(frozen=True)
class Cell:
    relator_id: int
    rotation: int
    orientation: int
    boundary: tuple  # ((edge, direction), ...); direction +1 = tail -> head

    @property
    def length(self) -> int:
        return len(self.boundary)

    def edges(self) -> list:
        return [e for e, _ in self.boundary]


@dataclass
class Complex2:
    n_vertices: int
    edges: list  # (tail, head, label); label 0 when unlabelled
    cells: list
    l: int
    gluings: list = field(default_factory=list)
    synthetic: bool = False
    label_conflicts: list = field(default_factory=list)
    self_folds: list = field(default_factory=list)
    vertex_words: dict | None = None

    # -- incidence -----------------------------------------------------
    def traversals(self) -> list:
        """For each edge, the list of (cell, boundary index, direction)."""
        out = [[] for _ in self.edges]
        for c, cell in enumerate(self.cells):
            for i, (e, s) in enumerate(cell.boundary):
                out[e].append((c, i, s))
        return out

    def degrees(self, cells: Iterable[int] | None = None) -> np.ndarray:
        deg = np.zeros(len(self.edges), dtype=np.int64)
        sel = range(len(self.cells)) if cells is None else cells
        for c in sel:
            for e, _ in self.cells[c].boundary:
                deg[e] += 1
        return deg

    def cancel(self, cells: Iterable[int] | None = None) -> int:
        deg = self.degrees(cells)
        return int((deg[deg > 0] - 1).sum())

    def balance_hu(self, cells: Sequence[int] | None = None) -> int:
        n = len(self.cells) if cells is None else len(list(cells))
        return (n + 1) * self.l // 2 - 2 * self.cancel(cells)

    def cell_edge_sets(self) -> list:
        return [frozenset(cell.edges()) for cell in self.cells]

    def intersection_edges(self, cells_a: Iterable[int], cells_b: Iterable[int]) -> set:
        ea = {e for c in cells_a for e in self.cells[c].edges()}
        eb = {e for c in cells_b for e in self.cells[c].edges()}
        return ea & eb

    def boundary_vertices(self, c: int) -> list:
        out = []
        for e, s in self.cells[c].boundary:
            t, h, _ = self.edges[e]
            out.append(t if s > 0 else h)
        return out

    def boundary_word(self, c: int) -> tuple:
        return tuple(self.edges[e][2] * s for e, s in self.cells[c].boundary)

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return True
        ip, ix, _ = self.vertex_csr()
        return bool((K.bfs(ip, ix, 0) >= 0).all())

    # -- metric --------------------------------------------------------
    def vertex_csr(self):
        u = [e[0] for e in self.edges]
        v = [e[1] for e in self.edges]
        return K.csr_from_edges(self.n_vertices, u, v)

    def halfedge_csr(self):
        """Subdivision graph: vertices 0..V-1 then one node per edge midpoint."""
        V = self.n_vertices
        u, v = [], []
        for e, (t, h, _) in enumerate(self.edges):
            u += [t, V + e]
            v += [V + e, h]
        return K.csr_from_edges(V + len(self.edges), u, v)

    def midpoint_distances(self, sources: Sequence[int]) -> np.ndarray:
        """hu distances from the given edge midpoints to every edge midpoint."""
        ip, ix, _ = self.halfedge_csr()
        V = self.n_vertices
        rows = K.multi_bfs(ip, ix, np.asarray(sources, dtype=np.int64) + V)
        return rows[:, V:]

    def midpoint_distance(self, x: int, y: int) -> int:
        return int(self.midpoint_distances([x])[0, y])

    # -- exports -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "l": self.l,
            "vertices": self.n_vertices,
            "edges": [list(map(int, e)) for e in self.edges],
            "cells": [
                {
                    "relator_id": int(c.relator_id),
                    "rotation": int(c.rotation),
                    "orientation": int(c.orientation),
                    "boundary": [[int(e), int(s)] for e, s in c.boundary],
                }
                for c in self.cells
            ],
            "gluings": [list(map(int, g)) for g in self.gluings],
            "synthetic": self.synthetic,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "Complex2":
        cells = [
            Cell(c["relator_id"], c["rotation"], c["orientation"], tuple((e, s) for e, s in c["boundary"]))
            for c in data["cells"]
        ]
        return cls(
            data["vertices"],
            [tuple(e) for e in data["edges"]],
            cells,
            data["l"],
            [tuple(g) for g in data["gluings"]],
            data["synthetic"],
        )

    def to_dot(self, diagonals: Sequence[tuple] = ()) -> str:
        """1-skeleton with midpoints; ``diagonals`` are (cell, i, j, class) tuples."""
        from .words import letter_to_char

        lines = ["graph complex {", "  node [shape=point];"]
        for v in range(self.n_vertices):
            lines.append(f"  v{v};")
        for e, (t, h, lab) in enumerate(self.edges):
            name = letter_to_char(lab) if lab else ""
            lines.append(f'  m{e} [shape=circle,width=0.1,label=""];')
            lines.append(f'  v{t} -- m{e} [label="{name}"];')
            lines.append(f"  m{e} -- v{h};")
        for c, i, j, w in diagonals:
            ei = self.cells[c].boundary[i][0]
            ej = self.cells[c].boundary[j][0]
            lines.append(f'  m{ei} -- m{ej} [style=dashed,color="/set19/{w % 9 + 1}"];')
        lines.append("}")
        return "\n".join(lines)


# ---------------------------------------------------------------------
# synthetic gluing builder

class _ParityUF:
    """Union-find with a relative orientation bit per element."""

    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.flip = [0] * n

    def add(self) -> int:
        self.parent.append(len(self.parent))
        self.flip.append(0)
        return len(self.parent) - 1

    def find(self, x: int):
        f = 0
        path = []
        while self.parent[x] != x:
            path.append(x)
            f ^= self.flip[x]
            x = self.parent[x]
        # path compression keeping parities
        acc = f
        for y in path:
            fy = self.flip[y]
            self.parent[y] = x
            self.flip[y] = acc
            acc ^= fy
        return x, f

    def union(self, a: int, b: int, rel: int) -> bool:
        """Join with orientation(a) = orientation(b) xor rel; False on a parity clash."""
        ra, fa = self.find(a)
        rb, fb = self.find(b)
        if ra == rb:
            return (fa ^ fb) == rel
        if rb < ra:
            ra, rb, fa, fb = rb, ra, fb, fa
        self.parent[rb] = ra
        self.flip[rb] = fa ^ fb ^ rel
        return True


class ComplexBuilder:
    """Glue l-gons along boundary subpaths, recording each gluing."""

    def __init__(self, l: int):
        self.l = l
        self.vuf = _ParityUF()
        self.euf = _ParityUF()
        self.cells = []  # (relator_id, rotation, orientation, labels, vertex ids, raw edge ids)
        self.raw_edges = []  # (tail, head, label)
        self.gluings = []
        self.self_folds = []

    def add_cell(self, labels: Sequence[int] | None = None, relator_id: int = -1,
                 rotation: int = 0, orientation: int = 1) -> int:
        l = self.l
        labels = tuple(labels) if labels is not None else (0,) * l
        if len(labels) != l:
            raise ValueError("cell boundary must have length l")
        vs = [self.vuf.add() for _ in range(l)]
        es = []
        for i in range(l):
            lab = labels[i]
            t, h = vs[i], vs[(i + 1) % l]
            # store positive labels; a traversal of an inverse letter runs the edge backwards
            if lab < 0:
                self.raw_edges.append((h, t, -lab, -1))
            else:
                self.raw_edges.append((t, h, lab, 1))
            es.append(self.euf.add())
        self.cells.append((relator_id, rotation, orientation, labels, vs, es))
        return len(self.cells) - 1

    def _edge_sense(self, c: int, i: int) -> int:
        return self.raw_edges[self.cells[c][5][i % self.l]][3]

    def glue(self, ca: int, pa: int, cb: int, pb: int, k: int, reverse: bool = False) -> None:
        """Identify k boundary edges of cell ca from vertex pa with cell cb.

        Forward: vertex pa+t of ca ~ vertex pb+t of cb.
        Reverse: vertex pa+t of ca ~ vertex pb-t of cb.
        """
        l = self.l
        va, vb = self.cells[ca][4], self.cells[cb][4]
        ea, eb = self.cells[ca][5], self.cells[cb][5]
        for t in range(k + 1):
            qb = (pb + t) % l if not reverse else (pb - t) % l
            self.vuf.union(va[(pa + t) % l], vb[qb], 0)
        for t in range(k):
            ia = (pa + t) % l
            ib = (pb + t) % l if not reverse else (pb - t - 1) % l
            # boundary traversal directions relative to stored raw edges
            sa = self._edge_sense(ca, ia)
            sb = self._edge_sense(cb, ib) * (-1 if reverse else 1)
            rel = 0 if sa == sb else 1
            if not self.euf.union(ea[ia], eb[ib], rel):
                self.self_folds.append((ca, ia, cb, ib))
        self.gluings.append((ca, pa, cb, pb, k, int(reverse)))

    def build(self) -> Complex2:
        vroot = {}
        for v in range(len(self.vuf.parent)):
            r, _ = self.vuf.find(v)
            vroot.setdefault(r, len(vroot))
        eroot = {}
        edges = []
        conflicts = []
        for raw in range(len(self.euf.parent)):
            r, f = self.euf.find(raw)
            t, h, lab, _ = self.raw_edges[raw]
            if f:
                t, h = h, t
            if r not in eroot:
                eroot[r] = len(edges)
                edges.append([vroot[self.vuf.find(t)[0]], vroot[self.vuf.find(h)[0]], lab])
            else:
                idx = eroot[r]
                if edges[idx][2] != lab:
                    conflicts.append(idx)
        cells = []
        synthetic = False
        for relator_id, rot, orient, labels, vs, es in self.cells:
            bd = []
            for i in range(self.l):
                r, f = self.euf.find(es[i])
                sense = self.raw_edges[es[i]][3]
                d = sense * (-1 if f else 1)
                bd.append((eroot[r], d))
            if all(x == 0 for x in labels):
                synthetic = True
            cells.append(Cell(relator_id, rot, orient, tuple(bd)))
        return Complex2(
            len(vroot), [tuple(e) for e in edges], cells, self.l, list(self.gluings),
            synthetic, sorted(set(conflicts)), list(self.self_folds),
        )


def glue_two(l: int, k: int, labels_a=None, labels_b=None) -> Complex2:
    """Two l-gons glued along a path of k edges (reversed orientation, as in a disc)."""
    B = ComplexBuilder(l)
    a = B.add_cell(labels_a)
    b = B.add_cell(labels_b)
    if k:
        B.glue(a, 0, b, k, k, reverse=True)
    return B.build()


# ---------------------------------------------------------------------
# folded labelled graphs

class LabelledGraph:
    """Deterministic labelled graph, folded on every merge (Stallings folding).

    ``out[v][x] = w`` for a signed letter x means an edge v -x-> w, always
    stored together with ``out[w][-x] = v``.
    """

    def __init__(self):
        self.parent: list = []
        self.out: list = []
        self.merges = 0

    def copy(self) -> "LabelledGraph":
        g = LabelledGraph()
        g.merges = self.merges
        g.parent = list(self.parent)
        g.out = [dict(d) for d in self.out]
        return g

    def add_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.out.append({})
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def step(self, v: int, x: int):
        v = self.find(v)
        w = self.out[v].get(x)
        return None if w is None else self.find(w)

    def add_edge(self, u: int, x: int, v: int) -> None:
        u, v = self.find(u), self.find(v)
        w = self.out[u].get(x)
        if w is not None:
            self.merge(w, v)
            return
        w2 = self.out[v].get(-x)
        if w2 is not None:
            self.merge(w2, u)
            return
        self.out[u][x] = v
        self.out[v][-x] = u

    def merge(self, a: int, b: int) -> None:
        work = [(a, b)]
        while work:
            a, b = work.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            self.merges += 1
            self.parent[b] = a
            ob = self.out[b]
            self.out[b] = {}
            oa = self.out[a]
            for x, t in ob.items():
                if x in oa:
                    work.append((oa[x], t))
                else:
                    oa[x] = t

    def read(self, v: int, word: Sequence[int]) -> list:
        """Vertices along ``word`` from v while edges exist."""
        path = [self.find(v)]
        for x in word:
            w = self.step(path[-1], x)
            if w is None:
                break
            path.append(w)
        return path

    def attach_cycle(self, v: int, word: Sequence[int]) -> int:
        """Make the closed path reading ``word`` from v exist; returns edges created."""
        n = len(word)
        inv = inverse_word(word)
        while True:
            fwd = self.read(v, word)
            kf = len(fwd) - 1
            if kf == n:
                if fwd[-1] != self.find(v):
                    self.merge(fwd[-1], v)
                return 0
            back = self.read(v, inv)
            kb = len(back) - 1
            if kf + kb >= n:
                # both reads reach position kf, so those vertices coincide
                self.merge(fwd[kf], back[n - kf])
                continue
            cur = fwd[-1]
            end = back[-1]
            for i in range(kf, n - kb):
                nxt = end if i == n - kb - 1 else self.add_vertex()
                self.add_edge(cur, word[i], nxt)
                cur = nxt
            return n - kb - kf

    def roots(self) -> list:
        return [v for v in range(len(self.parent)) if self.parent[v] == v]

    def edge_list(self) -> list:
        out = []
        for v in self.roots():
            for x, t in self.out[v].items():
                if x > 0:
                    out.append((v, self.find(t), x))
        return out

    def n_edges(self) -> int:
        return sum(1 for v in self.roots() for x in self.out[v] if x > 0)

    def to_complex(self, cells: Sequence[tuple], l: int, relators: Sequence[Sequence[int]]) -> Complex2:
        """Complex from cells (relator_id, anchor, rotation, orientation) read from anchors."""
        roots = self.roots()
        vid = {v: i for i, v in enumerate(roots)}
        elist = self.edge_list()
        eid = {(t, x): i for i, (t, h, x) in enumerate(elist)}
        edges = [(vid[t], vid[h], x) for t, h, x in elist]
        out_cells = []
        for rid, anchor, rot, orient in cells:
            w = rotate(relators[rid], rot)
            if orient < 0:
                w = rotate(inverse_word(relators[rid]), rot)
            path = self.read(anchor, w)
            if len(path) != l + 1:
                raise ValueError("cell boundary not present in graph")
            bd = []
            for i, x in enumerate(w):
                if x > 0:
                    bd.append((eid[(path[i], x)], 1))
                else:
                    bd.append((eid[(path[i + 1], -x)], -1))
            out_cells.append(Cell(rid, rot, orient, tuple(bd)))
        return Complex2(len(roots), edges, out_cells, l)


# ---------------------------------------------------------------------
# predicates

def cancel(Y: Complex2) -> int:
    return Y.cancel()


def balance(Y: Complex2) -> int:
    """Bal(Y) in hu: (|Y|+1) l / 2 - 2 Cancel(Y)."""
    return Y.balance_hu()


def midpoint_distance(Y: Complex2, x: int, y: int) -> int:
    """Shortest 1-skeleton distance between edge midpoints in hu (−1 if unreachable)."""
    return Y.midpoint_distance(x, y)


def is_kk_bounded(Y: Complex2, K_: int, K2: int) -> bool:
    return len(Y.cells) <= K_ and len(Y.gluings) <= K2


def _side_signature(cell: Cell, i: int, d: int, l: int) -> tuple:
    # which side of the presentation complex this traversal comes from
    if cell.orientation > 0:
        return (cell.relator_id, (cell.rotation + i) % l, d)
    return (cell.relator_id, (l - 1 - (cell.rotation + i)) % l, -d)


def check_fulfilled(Y: Complex2, P) -> bool:
    """Labels consistent, cells read their relators, locally injective around edges."""
    if Y.synthetic or Y.label_conflicts or Y.self_folds:
        return False
    l = Y.l
    for c, cell in enumerate(Y.cells):
        if not 0 <= cell.relator_id < len(P.relators):
            return False
        r = P.relators[cell.relator_id]
        want = rotate(r, cell.rotation) if cell.orientation > 0 else rotate(inverse_word(r), cell.rotation)
        if Y.boundary_word(c) != want:
            return False
    for trav in Y.traversals():
        sigs = [_side_signature(Y.cells[c], i, d, l) for c, i, d in trav]
        if len(set(sigs)) != len(sigs):
            return False
    return True


def isoperimetric_violation(Y: Complex2, d, eps) -> bool:
    bound = (as_fraction(d) + as_fraction(eps)) * len(Y.cells) * Y.l
    return Fraction(Y.cancel()) > bound
