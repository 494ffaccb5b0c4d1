"""Tile-wall structures: per-cell midpoint pairings, surgery, verification.

A pairing on a cell is an int array ``sigma`` of length l with
``sigma[sigma[p]] == p != sigma[p]``; position p is the midpoint of the
boundary edge from vertex p to vertex p+1.  For cells of a presentation
tile the boundary index is the relator position, so a pairing is a
property of the relator and can be pulled back to any cell of its orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .complex import Complex2


class SurgeryError(ValueError):
    """A gluing outside the range where the construction applies."""


def antipodal_pairing(l: int) -> np.ndarray:
    if l % 2:
        raise ValueError("antipodal pairing needs even l")
    return (np.arange(l) + l // 2) % l


def is_pairing(sigma: np.ndarray) -> bool:
    idx = np.arange(len(sigma))
    return bool(np.all(sigma[sigma] == idx) and np.all(sigma != idx))


def surgery(sigma: np.ndarray, alpha: Sequence[int]) -> np.ndarray:
    """Re-pair through the end-swapping symmetry s of the path ``alpha``.

    ``alpha`` lists consecutive boundary positions along the path.  Every
    pair x ~ y with y on alpha becomes x ~ s(y).
    """
    alpha = list(alpha)
    k = len(alpha)
    if k <= 1:
        return sigma.copy()
    on = set(alpha)
    partners = [int(sigma[y]) for y in alpha]
    if on & set(partners):
        raise SurgeryError("a pair has both ends on the surgery path")
    new = sigma.copy()
    for i, y in enumerate(alpha):
        x = partners[i]
        sy = alpha[k - 1 - i]
        new[x] = sy
        new[sy] = x
    return new


def ceil_excess(length: int, l: int) -> int:
    """ceil(length - l/4) as an integer."""
    return -(-(4 * length - l) // 4)


# ---------------------------------------------------------------------
# geometry helpers on complexes

def shared_positions(cx: Complex2, c: int, other_cells: Sequence[int]) -> list:
    other = {e for o in other_cells for e in cx.cells[o].edges()}
    return [p for p, (e, _) in enumerate(cx.cells[c].boundary) if e in other]


def cyclic_interval(positions: Sequence[int], l: int):
    """(start, length) when positions form one cyclic interval, else None."""
    ps = sorted(set(positions))
    n = len(ps)
    if n == 0:
        return None
    if n == l:
        return (0, l)
    s = set(ps)
    starts = [p for p in ps if (p - 1) % l not in s]
    if len(starts) != 1:
        return None
    return (starts[0], n)


def path_positions(start: int, length: int, l: int, reverse: bool = False) -> list:
    if not reverse:
        return [(start + t) % l for t in range(length)]
    return [(start + length - 1 - t) % l for t in range(length)]


def end_surgery(cx: Complex2, sigma: np.ndarray, c: int, rest: Sequence[int]) -> tuple:
    """Surgery on cell c glued to the cells ``rest`` along a path A, at both ends of A."""
    l = cx.l
    iv = cyclic_interval(shared_positions(cx, c, rest), l)
    if iv is None:
        raise SurgeryError("intersection with the tile is not a path")
    start, a = iv
    if not (4 * a > l and 2 * a < l):
        raise SurgeryError(f"|A| = {a} outside (l/4, l/2)")
    k = ceil_excess(a, l)
    plus = path_positions(start, k, l)
    minus = path_positions((start + a - k) % l, k, l, reverse=True)
    out = surgery(surgery(sigma, plus), minus)
    return out, {"A": [start, a], "alpha+": plus, "alpha-": minus}


# ---------------------------------------------------------------------
# structures

@dataclass
class TileWallStructure:
    complex: Complex2
    pairings: list  # per cell, np.ndarray in boundary coordinates
    core_cells: tuple = ()
    checked_cells: tuple = ()
    tile_id: int | None = None
    notes: dict = field(default_factory=dict)

    @property
    def l(self) -> int:
        return self.complex.l

    def midpoint(self, c: int, p: int) -> int:
        return self.complex.cells[c].boundary[p][0]

    def diagonals(self) -> list:
        """(cell, p, q, edge_p, edge_q) with p < q."""
        out = []
        for c, sig in enumerate(self.pairings):
            for p in range(self.l):
                q = int(sig[p])
                if p < q:
                    out.append((c, p, q, self.midpoint(c, p), self.midpoint(c, q)))
        return out

    def classes(self) -> np.ndarray:
        """Class label of every edge midpoint of the complex."""
        d = self.diagonals()
        n = len(self.complex.edges)
        return K.component_labels(n, [x[3] for x in d], [x[4] for x in d])

    def class_members(self) -> dict:
        lab = self.classes()
        used = {e for c in range(len(self.complex.cells)) for e in self.complex.cells[c].edges()}
        out = {}
        for e in sorted(used):
            out.setdefault(int(lab[e]), []).append(e)
        return out

    def to_json(self) -> dict:
        return {
            "tile": self.tile_id,
            "pairings": [list(map(int, s)) for s in self.pairings],
            "core_cells": list(self.core_cells),
            "classes": {str(k): v for k, v in self.class_members().items()},
        }

    def to_dot(self) -> str:
        lab = self.classes()
        diag = [(c, p, q, int(lab[ep])) for c, p, q, ep, _ in self.diagonals()]
        return self.complex.to_dot(diag)


def hypergraph_trees(S: TileWallStructure) -> list:
    """Classes whose diagonal graph is not a tree."""
    lab = S.classes()
    nodes, edges = {}, {}
    for c, p, q, ep, eq in S.diagonals():
        edges[int(lab[ep])] = edges.get(int(lab[ep]), 0) + 1
    for k, mem in S.class_members().items():
        nodes[k] = len(mem)
    return [k for k in nodes if edges.get(k, 0) != nodes[k] - 1]


def _tree_sides(diags, members):
    """For a tree class: for each diagonal, the set of midpoints on one side."""
    adj = {m: [] for m in members}
    for i, (c, p, q, a, b) in enumerate(diags):
        adj[a].append((b, i))
        adj[b].append((a, i))
    out = {}
    for i, (c, p, q, a, b) in enumerate(diags):
        side = {a}
        stack = [a]
        while stack:
            u = stack.pop()
            for v, j in adj[u]:
                if j != i and v not in side:
                    side.add(v)
                    stack.append(v)
        out[i] = side
    return out


def verify_balanced(S: TileWallStructure, cell: int, bal_hu: int | None = None) -> list:
    """Pairs x ~ x' whose hypergraph segment crosses ``cell`` and sit closer than Bal."""
    cx = S.complex
    bal = cx.balance_hu() if bal_hu is None else bal_hu
    lab = S.classes()
    diags = S.diagonals()
    members = S.class_members()
    bad_tree = set(hypergraph_trees(S))
    used = sorted({e for c in range(len(cx.cells)) for e in cx.cells[c].edges()})
    D = cx.midpoint_distances(used)
    row = {e: i for i, e in enumerate(used)}
    out = []
    by_class = {}
    for d in diags:
        by_class.setdefault(int(lab[d[3]]), []).append(d)
    for k, ds in by_class.items():
        if not any(d[0] == cell for d in ds):
            continue
        if k in bad_tree:
            out.append({"kind": "not_a_tree", "class": k})
            continue
        sides = _tree_sides(ds, members[k])
        mem = set(members[k])
        for i, d in enumerate(ds):
            if d[0] != cell:
                continue
            L = sides[i]
            Rr = mem - L
            for x in L:
                for y in Rr:
                    dist = int(D[row[x], y])
                    if dist < bal:
                        out.append({"kind": "unbalanced", "class": k, "x": int(x), "y": int(y),
                                    "distance_hu": dist, "bal_hu": int(bal), "diagonal": [d[0], d[1], d[2]]})
    return out


def crossing_min_distance(S: TileWallStructure, cell: int) -> int | None:
    """Least distance over related pairs whose segment crosses ``cell``."""
    cx = S.complex
    lab = S.classes()
    diags = S.diagonals()
    members = S.class_members()
    used = sorted({e for c in range(len(cx.cells)) for e in cx.cells[c].edges()})
    D = cx.midpoint_distances(used)
    row = {e: i for i, e in enumerate(used)}
    best = None
    by_class = {}
    for d in diags:
        by_class.setdefault(int(lab[d[3]]), []).append(d)
    for k, ds in by_class.items():
        if not any(d[0] == cell for d in ds):
            continue
        sides = _tree_sides(ds, members[k])
        mem = set(members[k])
        for i, d in enumerate(ds):
            if d[0] != cell:
                continue
            for x in sides[i]:
                for y in mem - sides[i]:
                    v = int(D[row[x], y])
                    best = v if best is None else min(best, v)
    return best


def two_cell_surgery(T: Complex2, inner: np.ndarray | None = None, target_cell: int = 1) -> TileWallStructure:
    """Balanced structure on a two-cell tile glued along a path A with l/4 < |A| < l/2."""
    l = T.l
    if len(T.cells) != 2:
        raise ValueError("two-cell tile expected")
    other = 1 - target_cell
    base = antipodal_pairing(l) if inner is None else np.asarray(inner)
    sig, info = end_surgery(T, antipodal_pairing(l), target_cell, [other])
    pairings = [None, None]
    pairings[other] = base.copy()
    pairings[target_cell] = sig
    return TileWallStructure(T, pairings, checked_cells=(0, 1), notes=info)


# ---------------------------------------------------------------------
# structures along the assignment history

@dataclass
class StructureSet:
    sigma: dict  # relator -> final pairing
    structures: dict  # tile id -> TileWallStructure
    snapshots: dict  # tile id -> {relator: pairing at creation}
    failures: dict  # tile id -> diagnosis
    surgeries: dict  # tile id -> surgery records

    def pairing(self, rid: int) -> np.ndarray:
        return self.sigma[rid]


def _structure_for(A, tid: int, sigma: dict) -> TileWallStructure:
    t = A.tiles[tid]
    cx = t.complex(A.relators)
    core = A.core_of(tid)
    core_cells = tuple(i for i, (r, _) in enumerate(t.cells) if r in core.relators)
    checked = tuple(i for i, (r, _) in enumerate(t.cells) if A.assign.get(r) == tid)
    return TileWallStructure(cx, [sigma[r].copy() for r, _ in t.cells], core_cells, checked, tid)


def build_structures(A) -> StructureSet:
    l = A.l
    sigma = {r: antipodal_pairing(l) for r in range(len(A.relators))}
    snaps = {r: {r: sigma[r].copy()} for r in range(len(A.relators))}
    failures = {}
    records = {}
    for h in A.history:
        tid = h["tile"]
        t = A.tiles[tid]
        cx = t.complex(A.relators)
        idx = {r: i for i, (r, _) in enumerate(t.cells)}
        bad = [p for p in t.parts if p in failures]
        if bad:
            failures[tid] = f"built on failed tile(s) {bad}"
            continue
        # tiles in X have Bal > l/4 by the isoperimetric inequality (d + eps < 1/4)
        if 2 * cx.balance_hu() <= l:
            failures[tid] = f"Bal = {cx.balance_hu()} hu <= l/4: tile violates the isoperimetric inequality"
            continue
        try:
            if h["step"] == 1:
                recs = _step1(A, t, cx, idx, sigma)
            else:
                recs = _step2(A, t, cx, idx, sigma)
        except SurgeryError as exc:
            failures[tid] = str(exc)
            continue
        records[tid] = recs
        snaps[tid] = {r: sigma[r].copy() for r in t.relators}
    structures = {}
    for tid in sorted(set(A.assign.values())):
        if tid in failures:
            continue
        structures[tid] = _structure_for(A, tid, sigma)
    return StructureSet(sigma, structures, snaps, failures, records)


def _step1(A, t, cx, idx, sigma):
    l = A.l
    older, newer = A.tiles[t.parts[0]], A.tiles[t.parts[1]]
    if newer.size == 1 or older.size == 1:
        C = newer if newer.size == 1 else older
        T = older if C is newer else newer
        (rc,) = C.relators
        c = idx[rc]
        rest = [idx[r] for r in T.relators]
        new, info = end_surgery(cx, sigma[rc], c, rest)
        sigma[rc] = new
        return {"case": "cell", "cell": rc, **info}
    if older.size == 2 and newer.size == 2:
        return _tripod(A, t, cx, idx, sigma, older, newer)
    raise SurgeryError(f"no construction for a {older.size}+{newer.size} gluing")


def _tripod(A, t, cx, idx, sigma, T, Tp):
    l = A.l
    rT = [idx[r] for r in T.relators]
    c1, c2 = (idx[r] for r in Tp.relators)
    ivs = []
    for c in (c1, c2):
        iv = cyclic_interval(shared_positions(cx, c, rT), l)
        if iv is None:
            raise SurgeryError("cell of T' meets T in a non-path")
        if 4 * iv[1] > l:
            raise SurgeryError("cell of T' meets T in more than l/4")
        ivs.append(iv)
    inter = sorted({cx.cells[c].boundary[p][0] for c, (s, a) in zip((c1, c2), ivs) for p in path_positions(s, a, l)})
    ends = []
    for c, (s, a) in zip((c1, c2), ivs):
        vs = cx.boundary_vertices(c)
        ends.append((vs[s % l], vs[(s + a) % l]))

    def path_vertices(c, s, a):
        vs = cx.boundary_vertices(c)
        return {vs[(s + k) % l] for k in range(a + 1)}

    v1 = path_vertices(c1, *ivs[0])
    v2 = path_vertices(c2, *ivs[1])
    # u1: end of alpha1 off alpha2, u2: end of alpha2 off alpha1
    u1s = [v for v in ends[0] if v not in v2]
    u2s = [v for v in ends[1] if v not in v1]
    if len(u1s) != 1 or len(u2s) != 1:
        raise SurgeryError("intersection is not a tripod of the expected form")
    u1, u2 = u1s[0], u2s[0]
    # tree distance inside T cap T'
    dist = _tree_distance(cx, inter, u1, u2)
    recs = {"case": "tripod", "intersection": len(inter), "d(u1,u2)": dist}
    for c, (s, a), u, key in ((c1, ivs[0], u1, "alpha+"), (c2, ivs[1], u2, "alpha-")):
        k = ceil_excess(dist, l)
        if k <= 0:
            recs[key] = []
            continue
        if k > a:
            raise SurgeryError("surgery path longer than the cell intersection")
        vs = cx.boundary_vertices(c)
        path = path_positions(s, k, l) if vs[s % l] == u else path_positions((s + a - k) % l, k, l, reverse=True)
        rid = t.cells[c][0]
        sigma[rid] = surgery(sigma[rid], path)
        recs[key] = path
    return recs


def _tree_distance(cx, edges, a, b):
    adj = {}
    for e in edges:
        x, y, _ = cx.edges[e]
        adj.setdefault(x, []).append(y)
        adj.setdefault(y, []).append(x)
    seen = {a: 0}
    stack = [a]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen[v] = seen[u] + 1
                stack.append(v)
    if b not in seen:
        raise SurgeryError("tripod ends not connected")
    return seen[b]


def _step2(A, t, cx, idx, sigma):
    l = A.l
    base = A.tiles[t.parts[0]]
    info = t.info
    recs = {"case": "step2", "C": info["C"]}
    if "Cprime" not in info:
        return recs
    rc, rcp = info["C"], info["Cprime"]
    cp = idx[rcp]
    tprime = [idx[r] for r in base.relators] + [idx[rc]]
    iv = cyclic_interval(shared_positions(cx, cp, tprime), l)
    if iv is None:
        raise SurgeryError("C' meets T' in a non-path")
    s, a = iv
    if not (4 * a > l and 2 * a < l):
        raise SurgeryError(f"|C' cap T'| = {a} outside (l/4, l/2)")
    k = ceil_excess(a, l)
    T_edges = {e for r in base.relators for e in cx.cells[idx[r]].edges()}
    C_edges = set(cx.cells[idx[rc]].edges())
    bd = cx.cells[cp].boundary
    first_in_T = bd[s][0] in T_edges and bd[s][0] not in C_edges
    last_in_T = bd[(s + a - 1) % l][0] in T_edges and bd[(s + a - 1) % l][0] not in C_edges
    if first_in_T == last_in_T:
        raise SurgeryError("cannot tell which end of A lies in T")
    path = path_positions(s, k, l) if first_in_T else path_positions((s + a - k) % l, k, l, reverse=True)
    sigma[rcp] = surgery(sigma[rcp], path)
    recs.update({"Cprime": rcp, "A": [s, a], "alpha": path})
    return recs


# ---------------------------------------------------------------------
# assertions about cores

def verify_assertions(S: TileWallStructure, core_structure: TileWallStructure | None = None) -> dict:
    """Core restriction, core membership of non-antipodal pairs, three-point condition."""
    cx = S.complex
    l = cx.l
    core = set(S.core_cells)
    rep = {"i": [], "ii": [], "iii": [], "antipodal_outside_core": []}
    if not core or core == set(range(len(cx.cells))):
        if core_structure is not None:
            rep["i"] += _restriction_mismatch(S, core_structure)
        return rep
    if core_structure is not None:
        rep["i"] += _restriction_mismatch(S, core_structure)
    core_edges = {e for c in core for e in cx.cells[c].edges()}
    cells_of_edge = {}
    for c, cell in enumerate(cx.cells):
        for e in cell.edges():
            cells_of_edge.setdefault(e, set()).add(c)
    lab = S.classes()
    class_has_core = {}
    for e in core_edges:
        class_has_core[int(lab[e])] = True
    anti = antipodal_pairing(l)
    for c in range(len(cx.cells)):
        if c in core:
            continue
        sig = S.pairings[c]
        for p in range(l):
            q = int(sig[p])
            if p > q:
                continue
            x, y = S.midpoint(c, p), S.midpoint(c, q)
            if q != anti[p]:
                # one of them lies in the core together with the antipode of the other
                ok = False
                for (a, pa), (b, pb) in (((x, p), (y, q)), ((y, q), (x, p))):
                    if b in core_edges and S.midpoint(c, int(anti[pa])) in core_edges:
                        ok = True
                if not ok:
                    rep["ii"].append({"cell": c, "pair": [p, q]})
            if class_has_core.get(int(lab[x])):
                ok = any(a in core_edges and cells_of_edge[b] == {c} for a, b in ((x, y), (y, x)))
                if not ok:
                    rep["iii"].append({"cell": c, "pair": [p, q]})
            else:
                if q != anti[p]:
                    rep["antipodal_outside_core"].append({"cell": c, "pair": [p, q]})
    return rep


def _restriction_mismatch(S, core_structure):
    out = []
    core_rel = [core_structure.complex.cells[i].relator_id for i in range(len(core_structure.complex.cells))]
    for i, c in enumerate(S.core_cells):
        r = S.complex.cells[c].relator_id
        j = core_rel.index(r) if r in core_rel else None
        if j is None or not np.array_equal(S.pairings[c], core_structure.pairings[j]):
            out.append({"cell": c, "relator": r})
    return out


def assertions_ok(rep: dict) -> bool:
    return not any(rep[k] for k in ("i", "ii", "iii", "antipodal_outside_core"))


_AUG_MEMO: dict = {}


def augmented_tile(A, structures: StructureSet, rid: int, cls_edges: Sequence[int]) -> tuple:
    """Augmented tile for the cell of relator ``rid`` and the wall class given by
    its midpoints (edges of the tile complex): the relators of the tile when the
    class meets the core, else ``(rid,)``."""
    tid = A.assign[rid]
    key = (id(A), tid, rid, tuple(sorted(cls_edges)))
    if key in _AUG_MEMO:
        return _AUG_MEMO[key]
    t = A.tiles[tid]
    core = A.core_of(tid)
    if core.id == tid:
        res = t.relators
    else:
        S = structures.structures.get(tid)
        cx = S.complex if S is not None else t.complex(A.relators)
        core_edges = {e for i, (r, _) in enumerate(t.cells) if r in core.relators for e in cx.cells[i].edges()}
        res = t.relators if core_edges & set(cls_edges) else (rid,)
    _AUG_MEMO[key] = res
    return res
