"""Command line: diagram, ball, tiles, run."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .words import Presentation, parse_word, sample_presentation


def _presentation(args) -> Presentation:
    if getattr(args, "presentation", None):
        return Presentation.from_text(Path(args.presentation).read_text())
    if getattr(args, "relators", None):
        return Presentation.from_strings(args.relators.split(","), m=args.m, d=args.d, seed=args.seed)
    return sample_presentation(args.m or 3, Fraction(args.d), args.l, args.seed)


def _add_presentation_args(p, l=12):
    p.add_argument("--presentation", help="file with a presentation in text form")
    p.add_argument("--relators", help="comma separated relators, e.g. abAB,aaaa")
    p.add_argument("--m", type=int, default=None, help="generators (default 3, or inferred from --relators)")
    p.add_argument("--d", default="1/5")
    p.add_argument("--l", type=int, default=l)
    p.add_argument("--seed", type=int, default=0)


def cmd_diagram(args) -> int:
    from .diagrams import DiscDiagram, SearchBudget, find_disc_diagram

    P = _presentation(args)
    budget = SearchBudget(max_cells=args.max_cells, max_states=args.max_states)
    res = find_disc_diagram(parse_word(args.word), P, budget)
    if isinstance(res, DiscDiagram):
        out = {"found": True, "cells": res.n_cells, "euler_characteristic": res.euler_characteristic(),
               "complex": res.complex.to_json()}
    else:
        out = {"found": False, "states": res.states, "exhaustive": res.exhaustive,
               "depth_reached": res.depth_reached, "reason": res.reason}
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_ball(args) -> int:
    from .patch import build_ball

    P = _presentation(args)
    B = build_ball(P, args.radius, max_vertices=args.max_vertices, oracle_pairs=args.oracle_pairs)
    if args.out:
        Path(args.out).write_text(json.dumps(B.to_json(), sort_keys=True))
    print(json.dumps({"vertices": B.complex.n_vertices, "edges": len(B.complex.edges),
                      "cells": B.n_cells, "flags": B.flags}, sort_keys=True))
    return 0


def cmd_tiles(args) -> int:
    from .tiles import build_tile_assignment

    P = _presentation(args)
    A = build_tile_assignment(P)
    data = A.to_json()
    if args.out:
        Path(args.out).write_text(json.dumps(data, sort_keys=True))
    print(json.dumps({"relators": len(P.relators), "sizes": {str(k): v for k, v in sorted(A.sizes().items())},
                      "degenerate": len(A.degenerate)}, sort_keys=True))
    return 0


def cmd_run(args) -> int:
    from .harness import ExperimentConfig, dumps, run_experiment, summary_csv

    l_max = args.l_max if args.l_max is not None else args.l
    cfg = ExperimentConfig(m=args.m, d=Fraction(args.d), l_values=tuple(range(args.l, l_max + 1, 2)),
                           seed=args.seed, trials=args.trials, eps=Fraction(args.epsilon),
                           patch_depth=args.radius, returning_bound=args.returning_bound,
                           suites=tuple(args.suites.split(",")), workers=args.workers)
    report, timings = run_experiment(cfg, keep_trials=not args.no_trials)
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
        Path(args.out).with_suffix(".csv").write_text(summary_csv(report))
        Path(args.out).with_suffix(".timings.json").write_text(json.dumps(timings, sort_keys=True))
    else:
        sys.stdout.write(summary_csv(report))
    return 1 if report["deterministic_failures"] else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rgwalls", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("diagram", help="search a disc diagram for a boundary word")
    _add_presentation_args(p)
    p.add_argument("word")
    p.add_argument("--max-cells", type=int, default=4)
    p.add_argument("--max-states", type=int, default=200000)
    p.set_defaults(fn=cmd_diagram)

    p = sub.add_parser("ball", help="radius-r ball of the Cayley complex")
    _add_presentation_args(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--max-vertices", type=int, default=20000)
    p.add_argument("--oracle-pairs", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ball)

    p = sub.add_parser("tiles", help="tile assignment of a presentation")
    _add_presentation_args(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_tiles)

    from .harness import ALL_SUITES
    p = sub.add_parser("run", help="Monte Carlo experiment")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--d", default="1/5")
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--l-max", type=int, default=16)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=int, default=2, help="overlap depth of the patch")
    p.add_argument("--epsilon", default="1/100")
    p.add_argument("--returning-bound", type=int, default=8)
    p.add_argument("--suites", default=",".join(ALL_SUITES))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-trials", action="store_true", help="omit per-trial records")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
