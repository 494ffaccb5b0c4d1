"""Experiment orchestration: configuration, trials, aggregation, reports."""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .diagrams import short_embedded_loop_check
from .patch import build_overlap_patch
from .tiles import build_tile_assignment, check_tile_intersections
from .tilewalls import _structure_for, assertions_ok, build_structures, verify_assertions, verify_balanced
from .walls import (antipodal_letter_fraction, check_embedded_trees, find_returning,
                    find_wall_exchanging_relator, instantiate_walls)
from .words import as_fraction, child_seed, relator_count, sample_presentation

ALL_SUITES = ("structures", "loops", "trees", "returning", "qi", "exchange", "intersections")
DETERMINISTIC = ("balance_violations", "assertion_failures", "pullback_mismatches")


def euler_characteristic(m: int, d, l: int) -> int:
    return 1 - m + relator_count(m, d, l)


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 3
    d: Fraction = Fraction(1, 5)
    l_values: tuple = (8, 10, 12, 14, 16)
    seed: int = 0
    trials: int = 50
    eps: Fraction = Fraction(1, 100)
    patch_depth: int = 2
    patch_max_cells: int = 300
    min_overlap: int | None = None
    returning_bound: int = 8
    max_steps: int = 20000
    qi_c: float = 1.0
    suites: tuple = ALL_SUITES
    max_report: int = 3
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "d", as_fraction(self.d))
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "l_values", tuple(int(x) for x in self.l_values))
        unknown = set(self.suites) - set(ALL_SUITES)
        if unknown:
            raise ValueError(f"unknown suites {sorted(unknown)}")
        object.__setattr__(self, "suites", tuple(s for s in ALL_SUITES if s in set(self.suites)))
        bad = [x for x in self.l_values if x % 2]
        if bad:
            raise ValueError(f"relator lengths must be even, got {bad}")
        if not (0 < self.d < Fraction(5, 24)):
            warnings.warn(f"density {self.d} outside (0, 5/24): results are outside the proven range")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")

    def to_json(self) -> dict:
        d = asdict(self)
        d["d"] = str(self.d)
        d["eps"] = str(self.eps)
        d["l_values"] = list(self.l_values)
        d["suites"] = list(self.suites)
        d.pop("workers")
        return d


def trial_seed(master: int, l: int, index: int) -> int:
    return child_seed(child_seed(master, l), index)


def run_trial(cfg: ExperimentConfig, l: int, index: int) -> dict:
    """One sampled presentation through the full pipeline; never raises on degeneracy."""
    seed = trial_seed(cfg.seed, l, index)
    rep = {"l": l, "index": index, "seed": seed}
    t0 = time.perf_counter()
    try:
        P = sample_presentation(cfg.m, cfg.d, l, seed)
        A = build_tile_assignment(P)
        rep["relators"] = len(P.relators)
        rep["tile_sizes"] = {str(k): v for k, v in sorted(A.sizes().items())}
        rep["degenerate"] = len(A.degenerate)
        S = build_structures(A)
        rep["structure_failures"] = len(S.failures)
        suites = set(cfg.suites)
        if "structures" in suites:
            rep.update(_structure_suite(A, S, cfg.max_report))
        need_patch = suites & {"loops", "trees", "returning", "qi", "intersections"}
        if need_patch:
            patch = build_overlap_patch(P, A, 0, cfg.patch_depth, cfg.min_overlap, cfg.patch_max_cells)
            rep["patch_cells"] = patch.n_cells
            rep["patch_truncated"] = bool(patch.flags.get("truncated"))
            W = instantiate_walls(patch, S, A)
            rep["pullback_mismatches"] = len(W.consistency)
            if "loops" in suites:
                loops = short_embedded_loop_check(patch.complex, max_report=cfg.max_report)
                rep["short_loops"] = len(loops)
                rep["event_short_loop"] = bool(loops)
                if loops:
                    rep["short_loop_witness"] = _jsonable(loops[0])
            if "trees" in suites:
                emb = check_embedded_trees(W, cfg.max_report)
                rep["wall_components"] = emb["components"]
                rep["tree_violations"] = emb["violations"]
                rep["event_self_intersection"] = emb["violations"] > 0
                if emb["witnesses"]:
                    w = dict(emb["witnesses"][0])
                    w["relators"] = sorted({patch.complex.cells[c].relator_id for c in w.get("repeated_cells", [])})
                    rep["tree_witness"] = _jsonable(w)
            if suites & {"returning", "qi"}:
                R = find_returning(W, A, S, cfg.returning_bound, max_steps=cfg.max_steps, d=cfg.d, c=cfg.qi_c,
                                   max_report=cfg.max_report)
                rep["returning"] = len(R.returning)
                rep["event_returning"] = bool(R.returning)
                rep["segments"] = R.segments
                rep["search_truncated"] = R.truncated
                rep["segment_self_intersections"] = len(R.self_intersections)
                if R.returning:
                    dec = R.returning[0].decomposition
                    rep["returning_witness"] = {
                        "n": dec.n,
                        "cells": [x[0] for x in dec.segment.diagonals],
                        "relators": [patch.complex.cells[x[0]].relator_id for x in dec.segment.diagonals],
                        "tiles": [sorted(t) for t in dec.tiles()],
                    }
                if "qi" in suites:
                    rep["qi_segments"] = len(R.qi)
                    rep["qi_violations"] = sum(1 for r in R.qi if not r[3])
                    rep["qi_min_slack"] = min((r[1] - r[2] for r in R.qi), default=None)
            if "intersections" in suites:
                groups = [cs for _, cs in patch.tiles]
                rep["tile_intersection_issues"] = len(check_tile_intersections(groups, patch.complex))
        if "exchange" in suites:
            rep["antipodal_letter_fraction"] = antipodal_letter_fraction(P)
            w = find_wall_exchanging_relator(P, A, S)
            rep["exchange_witness"] = None if w is None else [w[0], list(w[1])]
    except Exception as exc:  # isolate the trial
        rep["error"] = f"{type(exc).__name__}: {exc}"
    rep["_seconds"] = time.perf_counter() - t0
    return rep


def _structure_suite(A, S, max_report):
    viol, fails, checked = 0, 0, 0
    witness = None
    for tid, st in sorted(S.structures.items()):
        checked += 1
        for c in st.checked_cells:
            v = verify_balanced(st, c)
            viol += len(v)
            if v and witness is None:
                witness = {"tile": tid, "cell": c, "violation": v[0]}
        core = A.core_of(tid)
        if core.id != tid:
            cs = _structure_for(A, core.id, S.snapshots[core.id])
            r = verify_assertions(st, cs)
            if not assertions_ok(r):
                fails += 1
                if witness is None:
                    witness = {"tile": tid, "assertions": {k: v[:max_report] for k, v in r.items() if v}}
    out = {"structures_checked": checked, "balance_violations": viol, "assertion_failures": fails}
    if witness is not None:
        out["structure_witness"] = _jsonable(witness)
    return out


def _jsonable(x):
    return json.loads(json.dumps(x, default=lambda o: o.tolist() if hasattr(o, "tolist") else str(o)))


def _binom(k: int, n: int) -> dict:
    p = k / n if n else 0.0
    return {"count": k, "n": n, "freq": p, "sigma": math.sqrt(p * (1 - p) / n) if n else 0.0}


def trend_ok(freqs: Sequence[float], ns: Sequence[int], max_inversions: int = 1) -> dict:
    """Non-increasing up to ``max_inversions`` increases beyond 2 sigma of the difference."""
    bad = []
    for i in range(len(freqs) - 1):
        a, b = freqs[i], freqs[i + 1]
        if b <= a:
            continue
        n1, n2 = max(ns[i], 1), max(ns[i + 1], 1)
        pbar = (a * n1 + b * n2) / (n1 + n2)
        s = math.sqrt(max(pbar * (1 - pbar), 0.0) * (1 / n1 + 1 / n2))
        if b - a > 2 * s:
            bad.append(i)
    return {"inversions": bad, "ok": len(bad) <= max_inversions}


def aggregate(cfg: ExperimentConfig, trials: list) -> dict:
    per_l = {}
    for l in cfg.l_values:
        rows = [t for t in trials if t["l"] == l]
        ok = [t for t in rows if "error" not in t]
        n = len(ok)
        agg = {"trials": len(rows), "errors": len(rows) - n,
               "degenerate_trials": sum(1 for t in ok if t.get("degenerate")),
               "euler_characteristic": euler_characteristic(cfg.m, cfg.d, l),
               "relators": relator_count(cfg.m, cfg.d, l)}
        for key in ("short_loop", "self_intersection", "returning"):
            k = sum(1 for t in ok if t.get("event_" + key))
            m_ = sum(1 for t in ok if "event_" + key in t)
            agg[key] = _binom(k, m_)
        for key in ("balance_violations", "assertion_failures", "pullback_mismatches", "structure_failures",
                    "structures_checked", "qi_segments", "qi_violations", "tile_intersection_issues",
                    "segments", "patch_cells"):
            vals = [t[key] for t in ok if key in t]
            if vals:
                agg[key] = sum(vals)
        ex = [t for t in ok if "exchange_witness" in t]
        if ex:
            agg["exchange_witnesses"] = sum(1 for t in ex if t["exchange_witness"] is not None)
            agg["antipodal_letter_fraction"] = sum(t["antipodal_letter_fraction"] for t in ex) / len(ex)
        sizes = {}
        for t in ok:
            for k, v in t.get("tile_sizes", {}).items():
                sizes[k] = sizes.get(k, 0) + v
        agg["tile_sizes"] = dict(sorted(sizes.items()))
        per_l[str(l)] = agg
    trends = {}
    for key in ("short_loop", "self_intersection", "returning"):
        fr = [per_l[str(l)][key]["freq"] for l in cfg.l_values]
        ns = [per_l[str(l)][key]["n"] for l in cfg.l_values]
        if any(ns):
            trends[key] = trend_ok(fr, ns)
    det_fail = sum(per_l[str(l)].get(k, 0) for l in cfg.l_values for k in DETERMINISTIC)
    return {"config": cfg.to_json(), "per_l": per_l, "trends": trends,
            "deterministic_failures": det_fail}


def run_experiment(cfg: ExperimentConfig, keep_trials: bool = True) -> dict:
    jobs = [(l, i) for l in cfg.l_values for i in range(cfg.trials)]
    if cfg.workers > 1 and jobs:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(cfg.workers) as ex:
            trials = list(ex.map(_run_job, [(cfg, l, i) for l, i in jobs]))
    else:
        trials = [run_trial(cfg, l, i) for l, i in jobs]
    trials.sort(key=lambda t: (t["l"], t["index"]))
    timings = {f"{t['l']}:{t['index']}": t.pop("_seconds") for t in trials}
    report = aggregate(cfg, trials)
    if keep_trials:
        report["trials"] = trials
    report_timings = {"per_trial_seconds": timings, "total_seconds": sum(timings.values())}
    return report, report_timings


def _run_job(args):
    return run_trial(*args)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def summary_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["l", "suite", "count", "n", "freq", "sigma"])
    for l, agg in report["per_l"].items():
        for key in ("short_loop", "self_intersection", "returning"):
            b = agg[key]
            w.writerow([l, key, b["count"], b["n"], f"{b['freq']:.4f}", f"{b['sigma']:.4f}"])
        for key in ("balance_violations", "assertion_failures", "pullback_mismatches", "qi_violations",
                    "exchange_witnesses"):
            if key in agg:
                w.writerow([l, key, agg[key], agg["trials"], "", ""])
    return buf.getvalue()
