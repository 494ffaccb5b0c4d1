"""Hot loops with a numba path and a pure-numpy path.

Set ``RGWALLS_NO_NUMBA=1`` to force the numpy path (also used when numba
is not importable).  ``set_backend`` switches at runtime, for tests and
benchmarks.  Both paths return identical results.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return nb.njit(*args, **kwargs)
    return lambda f: f


_use_numba = HAVE_NUMBA and os.environ.get("RGWALLS_NO_NUMBA", "") not in ("1", "true", "yes")


def set_backend(name: str) -> None:
    global _use_numba
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba not available")
        _use_numba = True
    elif name == "numpy":
        _use_numba = False
    else:
        raise ValueError(name)


def backend() -> str:
    return "numba" if _use_numba else "numpy"


# ---------------------------------------------------------------------
# maximal cyclic common runs between rows of A and rows of B
#
# A run (i, j, p, q, k) means A[i, p+t] == B[j, q+t] for t < k (indices
# mod l), and the run cannot be extended backwards.  A full-cycle match
# is reported once per shift with p = 0 and k = l.

@njit(cache=True)
def _runs_nb(A, B, min_len, same):
    na, l = A.shape
    nb_ = B.shape[0]
    cap = 1024
    out = np.empty((cap, 5), dtype=np.int64)
    n = 0
    for i in range(na):
        for j in range(nb_):
            for s in range(l):
                if same and i == j and s == 0:
                    continue
                # eq[p] = A[i,p] == B[j,(p+s)%l]
                allmatch = True
                for p in range(l):
                    if A[i, p] != B[j, (p + s) % l]:
                        allmatch = False
                        break
                if allmatch:
                    if l >= min_len:
                        if n == cap:
                            cap *= 2
                            tmp = np.empty((cap, 5), dtype=np.int64)
                            tmp[:n] = out[:n]
                            out = tmp
                        out[n, 0] = i
                        out[n, 1] = j
                        out[n, 2] = 0
                        out[n, 3] = s
                        out[n, 4] = l
                        n += 1
                    continue
                for p in range(l):
                    pm = (p - 1) % l
                    if A[i, p] == B[j, (p + s) % l] and A[i, pm] != B[j, (pm + s) % l]:
                        k = 0
                        while k < l and A[i, (p + k) % l] == B[j, (p + k + s) % l]:
                            k += 1
                        if k >= min_len:
                            if n == cap:
                                cap *= 2
                                tmp = np.empty((cap, 5), dtype=np.int64)
                                tmp[:n] = out[:n]
                                out = tmp
                            out[n, 0] = i
                            out[n, 1] = j
                            out[n, 2] = p
                            out[n, 3] = (p + s) % l
                            out[n, 4] = k
                            n += 1
    return out[:n]


def _runs_np(A, B, min_len, same):
    na, l = A.shape
    nb_ = B.shape[0]
    rows = []
    idx = np.arange(l)
    for s in range(l):
        eq = A[:, None, :] == B[None, :, (idx + s) % l]  # (na, nb, l)
        if same and s == 0:
            k = min(na, nb_)
            eq[np.arange(k), np.arange(k), :] = False
        full = eq.all(axis=2)
        if l >= min_len:
            fi, fj = np.nonzero(full)
            for i, j in zip(fi, fj):
                rows.append((s, i, j, 0, s % l, l))
        eq[full] = False
        start = eq & ~np.roll(eq, 1, axis=2)
        # run length at each p: count consecutive Trues cyclically
        e2 = np.concatenate([eq, eq], axis=2).astype(np.int64)
        # lengths via reverse cumulative run counter
        run = np.zeros_like(e2)
        run[..., -1] = e2[..., -1]
        for t in range(2 * l - 2, -1, -1):
            run[..., t] = (run[..., t + 1] + 1) * e2[..., t]
        length = np.minimum(run[..., :l], l)
        si, sj, sp = np.nonzero(start & (length >= min_len))
        for i, j, p in zip(si, sj, sp):
            rows.append((s, i, j, p, (p + s) % l, length[i, j, p]))
    if not rows:
        return np.empty((0, 5), dtype=np.int64)
    arr = np.array(rows, dtype=np.int64)
    # match the numba ordering: by (i, j, s, p)
    order = np.lexsort((arr[:, 3], arr[:, 0], arr[:, 2], arr[:, 1]))
    return arr[order][:, 1:]


def cyclic_runs(A, B, min_len: int = 1, same: bool = False) -> np.ndarray:
    """All maximal cyclic common runs between rows of A and rows of B.

    Returns an int64 array with columns (i, j, p, q, length).  With
    ``same=True`` the trivial self-match of row i against row i at zero
    shift is skipped.
    """
    A = np.ascontiguousarray(A, dtype=np.int64)
    B = np.ascontiguousarray(B, dtype=np.int64)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.empty((0, 5), dtype=np.int64)
    if _use_numba:
        return _runs_nb(A, B, int(min_len), bool(same))
    return _runs_np(A, B, int(min_len), bool(same))


# ---------------------------------------------------------------------
# breadth-first search on CSR graphs

@njit(cache=True)
def _bfs_nb(indptr, indices, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1
    return dist


def _bfs_np(indptr, indices, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    dist[src] = 0
    frontier = np.array([src], dtype=np.int64)
    level = 0
    deg = np.diff(indptr)
    while frontier.size:
        level += 1
        starts = indptr[frontier]
        counts = deg[frontier]
        if counts.sum() == 0:
            break
        offs = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
        nbrs = indices[offs + np.arange(counts.sum())]
        nbrs = np.unique(nbrs)
        nbrs = nbrs[dist[nbrs] < 0]
        dist[nbrs] = level
        frontier = nbrs
    return dist


def bfs(indptr, indices, src: int) -> np.ndarray:
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if _use_numba:
        return _bfs_nb(indptr, indices, int(src))
    return _bfs_np(indptr, indices, int(src))


@njit(cache=True)
def _apsp_nb(indptr, indices, sources):
    n = indptr.shape[0] - 1
    out = np.empty((sources.shape[0], n), dtype=np.int64)
    for t in range(sources.shape[0]):
        out[t] = _bfs_nb(indptr, indices, sources[t])
    return out


def multi_bfs(indptr, indices, sources) -> np.ndarray:
    """Distance rows from each source (−1 where unreachable)."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if _use_numba:
        return _apsp_nb(indptr, indices, sources)
    n = indptr.shape[0] - 1
    out = np.empty((sources.shape[0], n), dtype=np.int64)
    for t, s in enumerate(sources):
        out[t] = _bfs_np(indptr, indices, int(s))
    return out


# ---------------------------------------------------------------------
# girth with edge ids (handles loops and multi-edges)

@njit(cache=True)
def _girth_nb(indptr, indices, eids, cutoff):
    n = indptr.shape[0] - 1
    best = cutoff
    dist = np.full(n, -1, dtype=np.int64)
    pedge = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        for v in range(n):
            dist[v] = -1
            pedge[v] = -1
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                e = eids[k]
                if e == pedge[u]:
                    continue
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    pedge[v] = e
                    queue[tail] = v
                    tail += 1
                else:
                    c = dist[u] + dist[v] + 1
                    if c < best:
                        best = c
    return best


def _girth_np(indptr, indices, eids, cutoff):
    n = indptr.shape[0] - 1
    best = cutoff
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        pedge = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = [s]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            lo, hi = indptr[u], indptr[u + 1]
            vs = indices[lo:hi]
            es = eids[lo:hi]
            keep = es != pedge[u]
            vs, es = vs[keep], es[keep]
            fresh = dist[vs] < 0
            # cycles closed by already-seen neighbours
            seen = vs[~fresh]
            if seen.size:
                c = int(dist[u] + dist[seen].min() + 1)
                best = min(best, c)
            for v, e in zip(vs[fresh], es[fresh]):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    pedge[v] = e
                    queue.append(int(v))
                else:
                    best = min(best, int(dist[u] + dist[v] + 1))
    return best


def girth(indptr, indices, eids, cutoff: int) -> int:
    """Length of a shortest cycle if it is below ``cutoff``, else ``cutoff``."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    eids = np.ascontiguousarray(eids, dtype=np.int64)
    if _use_numba:
        return int(_girth_nb(indptr, indices, eids, int(cutoff)))
    return int(_girth_np(indptr, indices, eids, int(cutoff)))


# ---------------------------------------------------------------------
# union-find labelling

@njit(cache=True)
def _uf_nb(n, a, b):
    parent = np.arange(n)
    for t in range(a.shape[0]):
        x = a[t]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = b[t]
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            if x < y:
                parent[y] = x
            else:
                parent[x] = y
    lab = np.empty(n, dtype=np.int64)
    for v in range(n):
        x = v
        while parent[x] != x:
            x = parent[x]
        lab[v] = x
    return lab


def _uf_np(n, a, b):
    # label propagation to a fixed point: min label over each component
    lab = np.arange(n, dtype=np.int64)
    if a.size == 0:
        return lab
    while True:
        m = np.minimum(lab[a], lab[b])
        new = lab.copy()
        np.minimum.at(new, a, m)
        np.minimum.at(new, b, m)
        new = new[new]
        if np.array_equal(new, lab):
            return lab
        lab = new


def component_labels(n: int, a, b) -> np.ndarray:
    """Component representative (least member) for each of n items joined by pairs."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if _use_numba:
        return _uf_nb(int(n), a, b)
    return _uf_np(int(n), a, b)


def csr_from_edges(n: int, u, v, eid=None):
    """Undirected CSR adjacency; returns (indptr, indices, eids)."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if eid is None:
        eid = np.arange(u.size, dtype=np.int64)
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    ids = np.concatenate([eid, eid])
    # a loop appears twice from the same vertex; keep both so it closes a cycle
    order = np.lexsort((ids, dst, src))
    src, dst, ids = src[order], dst[order], ids[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst, ids


# ---------------------------------------------------------------------
# joint walks on deterministic labelled graphs
#
# A graph is a dense table G[v, s] of targets (−1 = no edge), with slot s
# for letter x at x−1 (x > 0) or m−x−1 (x < 0).  Gluing gb to ga at
# (va, vb) identifies every pair reachable by reading the same word in
# both; we report the identified edges, the least identified B vertex and
# its image, and whether the identification stays a partial bijection.

@njit(cache=True)
def _match_nb(GA, GB, va, vb, anchors_b):
    na = GA.shape[0]
    nbv = GB.shape[0]
    ns = GA.shape[1]
    k = va.shape[0]
    edges = np.zeros(k, dtype=np.int64)
    keyb = np.full(k, -1, dtype=np.int64)
    keya = np.full(k, -1, dtype=np.int64)
    ok = np.ones(k, dtype=np.bool_)
    img = np.full((k, anchors_b.shape[0]), -1, dtype=np.int64)
    amap = np.full(nbv, -1, dtype=np.int64)
    bmap = np.full(na, -1, dtype=np.int64)
    stack = np.empty(nbv + 1, dtype=np.int64)
    touched = np.empty(nbv + 1, dtype=np.int64)
    half = ns // 2
    for t in range(k):
        ntouch = 0
        amap[vb[t]] = va[t]
        bmap[va[t]] = vb[t]
        touched[0] = vb[t]
        ntouch = 1
        stack[0] = vb[t]
        top = 1
        e = 0
        good = True
        while top > 0 and good:
            top -= 1
            b = stack[top]
            a = amap[b]
            for s in range(ns):
                tb = GB[b, s]
                ta = GA[a, s]
                if tb < 0 or ta < 0:
                    continue
                if s < half:
                    e += 1
                pa = amap[tb]
                pb = bmap[ta]
                if pa < 0 and pb < 0:
                    amap[tb] = ta
                    bmap[ta] = tb
                    touched[ntouch] = tb
                    ntouch += 1
                    stack[top] = tb
                    top += 1
                elif pa != ta or pb != tb:
                    good = False
                    break
        ok[t] = good
        edges[t] = e
        mb = nbv
        for i in range(ntouch):
            if touched[i] < mb:
                mb = touched[i]
        keyb[t] = mb
        keya[t] = amap[mb]
        for i in range(anchors_b.shape[0]):
            img[t, i] = amap[anchors_b[i]]
        for i in range(ntouch):
            bmap[amap[touched[i]]] = -1
            amap[touched[i]] = -1
    return edges, keyb, keya, ok, img


def _match_np(GA, GB, va, vb, anchors_b):
    k = va.shape[0]
    ns = GA.shape[1]
    half = ns // 2
    edges = np.zeros(k, dtype=np.int64)
    keyb = np.full(k, -1, dtype=np.int64)
    keya = np.full(k, -1, dtype=np.int64)
    ok = np.ones(k, dtype=bool)
    img = np.full((k, anchors_b.shape[0]), -1, dtype=np.int64)
    for t in range(k):
        amap = {int(vb[t]): int(va[t])}
        bmap = {int(va[t]): int(vb[t])}
        stack = [int(vb[t])]
        e = 0
        good = True
        while stack and good:
            b = stack.pop()
            a = amap[b]
            rowb, rowa = GB[b], GA[a]
            both = np.nonzero((rowb >= 0) & (rowa >= 0))[0]
            e += int((both < half).sum())
            for s in both:
                tb, ta = int(rowb[s]), int(rowa[s])
                pa, pb = amap.get(tb), bmap.get(ta)
                if pa is None and pb is None:
                    amap[tb] = ta
                    bmap[ta] = tb
                    stack.append(tb)
                elif pa != ta or pb != tb:
                    good = False
                    break
        ok[t] = good
        edges[t] = e
        mb = min(amap)
        keyb[t], keya[t] = mb, amap[mb]
        for i, x in enumerate(anchors_b):
            img[t, i] = amap.get(int(x), -1)
    return edges, keyb, keya, ok, img


def match_batch(GA, GB, va, vb, anchors_b):
    GA = np.ascontiguousarray(GA, dtype=np.int64)
    GB = np.ascontiguousarray(GB, dtype=np.int64)
    va = np.ascontiguousarray(va, dtype=np.int64)
    vb = np.ascontiguousarray(vb, dtype=np.int64)
    anchors_b = np.ascontiguousarray(anchors_b, dtype=np.int64)
    if _use_numba:
        return _match_nb(GA, GB, va, vb, anchors_b)
    return _match_np(GA, GB, va, vb, anchors_b)
