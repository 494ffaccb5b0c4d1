"""Time the numba and numpy backends of the hot kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--l 16]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rgwalls import _kernels as K
from rgwalls.patch import build_overlap_patch
from rgwalls.tiles import build_tile_assignment, inverse_matrix, relator_matrix
from rgwalls.tilewalls import build_structures
from rgwalls.words import sample_presentation


def _time(fn, repeat):
    fn()  # warm up (compilation for numba)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(l: int):
    P = sample_presentation(3, 0.2, l, seed=0)
    R, Ri = relator_matrix(P.relators), inverse_matrix(P.relators)
    A = build_tile_assignment(P)
    S = build_structures(A)
    patch = build_overlap_patch(P, A, 0, 2)
    cx = patch.complex
    ip, ix, ei = cx.vertex_csr()
    hp, hx, _ = cx.halfedge_csr()
    srcs = np.arange(min(64, len(cx.edges)), dtype=np.int64) + cx.n_vertices
    d = [(c, p, int(S.sigma[cell.relator_id][p])) for c, cell in enumerate(cx.cells) for p in range(l)]
    a = [cx.cells[c].boundary[p][0] for c, p, q in d]
    b = [cx.cells[c].boundary[q][0] for c, p, q in d]
    return {
        "cyclic_runs": lambda: K.cyclic_runs(R, Ri, l // 4 + 1),
        "multi_bfs": lambda: K.multi_bfs(hp, hx, srcs),
        "girth": lambda: K.girth(ip, ix, ei, l),
        "component_labels": lambda: K.component_labels(len(cx.edges), a, b),
        "tile_assignment": lambda: build_tile_assignment(P).sizes(),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--l", type=int, default=14)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba not installed; only the numpy backend is available")
    rows = []
    for name in cases(args.l):
        res = {}
        outs = {}
        for be in ("numba", "numpy") if K.HAVE_NUMBA else ("numpy",):
            K.set_backend(be)
            fn = cases(args.l)[name] if name == "tile_assignment" else _CACHE.setdefault(args.l, cases(args.l))[name]
            res[be], outs[be] = _time(fn, args.repeat)
        same = len({repr(o.tolist() if hasattr(o, "tolist") else o) for o in outs.values()}) == 1
        rows.append((name, res.get("numba"), res["numpy"], same))
    K.set_backend("numba" if K.HAVE_NUMBA else "numpy")
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  same")
    for name, t_nb, t_np, same in rows:
        sp = f"{t_np / t_nb:8.1f}x" if t_nb else "      -"
        nb_s = f"{t_nb:10.4f}" if t_nb is not None else "         -"
        print(f"{name:<18}{nb_s}{t_np:10.4f}{sp}  {same}")


_CACHE: dict = {}

if __name__ == "__main__":
    main()
