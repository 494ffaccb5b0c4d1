from fractions import Fraction

import numpy as np
import pytest

from rgwalls.complex import ComplexBuilder
from rgwalls.patch import build_ball, build_overlap_patch
from rgwalls.tiles import build_tile_assignment
from rgwalls.tilewalls import antipodal_pairing, build_structures, end_surgery
from rgwalls.walls import (TileOracle, antipodal_letter_fraction, antipodal_letter_positions,
                           check_embedded_trees, decompose, find_returning, find_wall_exchanging_relator,
                           from_complex, instantiate_walls, qi_check, tighten, trace)
from rgwalls.words import Presentation, as_fraction, is_cyclically_reduced, make_rng, sample_presentation, sample_relator
from test_tiles import planted_pair


def crossing_triple(l=16, a=7):
    """Cells C, C' glued along a > l/4 edges, and C'' glued across the end of the gluing
    so that the antipodal walls of C and C' both reach it."""
    B = ComplexBuilder(l)
    for _ in range(3):
        B.add_cell()
    B.glue(0, 0, 1, 0, a)
    h = l // 2 - a
    B.glue(2, 0, 0, a + h + 1, h + 1, reverse=True)
    B.glue(2, h + 1, 1, a, h + 1)
    return B.build()


def test_crossing_triple_antipodal_walls_self_intersect():
    cx = crossing_triple()
    anti = antipodal_pairing(cx.l)
    W = from_complex(cx, [anti, anti, anti])
    rep = check_embedded_trees(W)
    assert rep["violations"] == 1
    assert rep["witnesses"][0]["repeated_cells"] == [2]


def test_crossing_triple_surgered_walls_embed():
    cx = crossing_triple()
    anti = antipodal_pairing(cx.l)
    sig, _ = end_surgery(cx, anti, 1, [0])
    W = from_complex(cx, [anti, sig, anti])
    assert check_embedded_trees(W)["violations"] == 0


def test_trace_single_cell():
    B = ComplexBuilder(8)
    B.add_cell()
    W = from_complex(B.build(), [antipodal_pairing(8)])
    comp = trace(W, 0)
    assert comp.midpoints == {0, 4}
    assert len(comp.diagonals) == 1 and not comp.truncated
    seg = comp.segment(0, 4)
    assert seg.diagonals == [(0, 0, 4)] and seg.midpoints == [0, 4]
    assert comp.segment(0, 1) is None


def test_z2_walls_are_lines():
    P = Presentation.from_strings(["abAB"])
    B = build_ball(P, 4)
    anti = antipodal_pairing(4)
    W = from_complex(B.complex, [anti] * len(B.complex.cells))
    assert check_embedded_trees(W)["violations"] == 0
    # a wall through the middle crosses a straight row of squares
    for e in range(len(B.complex.edges)):
        comp = trace(W, e)
        assert len(comp.diagonals) == len(comp.midpoints) - 1


def test_decompose_singletons_are_tight():
    P = Presentation.from_strings(["abAB"])
    B = build_ball(P, 4)
    anti = antipodal_pairing(4)
    W = from_complex(B.complex, [anti] * len(B.complex.cells))
    comp = trace(W, 0)
    ends = sorted(m for m in comp.midpoints if sum(1 for d in comp.diagonals if m in d[3:]) == 1)
    seg = comp.segment(ends[0], ends[-1])
    dec = decompose(seg, TileOracle(W, None))
    assert dec.n == len(seg.diagonals)
    assert all(f.tile == frozenset((f.witness,)) for f in dec.factors)
    out = tighten(dec)
    assert out.tight and out.n == dec.n


def test_qi_check_formula():
    B = ComplexBuilder(8)
    B.add_cell()
    W = from_complex(B.build(), [antipodal_pairing(8)])
    seg = trace(W, 0).segment(0, 4)
    r = qi_check(seg, W, Fraction(1, 5))
    assert r["endpoint_distance"] == 8
    assert r["bound"] == pytest.approx(0.2 * 8 - 16)
    assert r["pass"]


@pytest.fixture(scope="module")
def sample_walls():
    P = sample_presentation(3, Fraction(1, 5), 12, 0)
    A = build_tile_assignment(P)
    S = build_structures(A)
    pt = build_overlap_patch(P, A)
    return P, A, S, pt, instantiate_walls(pt, S, A)


def test_pullback_is_consistent(sample_walls):
    P, A, S, pt, W = sample_walls
    assert W.consistency == []
    for c, cell in enumerate(pt.complex.cells):
        assert np.array_equal(W.pairings[c], S.sigma[cell.relator_id])


def test_returning_search_invariants(sample_walls):
    P, A, S, pt, W = sample_walls
    R = find_returning(W, A, S, N=8, d=Fraction(1, 5))
    R2 = find_returning(W, A, S, N=8, d=Fraction(1, 5))
    assert len(R.returning) == len(R2.returning) and R.segments == R2.segments
    for rd in R.returning:
        dec = rd.decomposition
        assert 1 <= dec.n <= 8
        edges = {e for c in rd.base_tile for e in pt.complex.cells[c].edges()}
        assert dec.segment.x0 in edges and dec.segment.xn in edges
        union = frozenset().union(*dec.tiles())
        assert not any(union <= t for t in dec.tiles())
        assert all(W.interior[c] for c in dec.segment.cells)
    # each qi record is (n, distance, bound, pass)
    assert all(rec[3] == (rec[1] >= rec[2]) for rec in R.qi)


def test_antipodal_letter_positions():
    assert antipodal_letter_positions((1, 2, 3, 1, 2, 3)) == [0, 1, 2]
    assert antipodal_letter_positions((1, 2, -1, -2)) == []


def _with_antipodal_letter(r, p=0):
    h = len(r) // 2
    w = list(r)
    w[p + h] = w[p]
    return tuple(w)


def test_wall_exchanging_relator_planted():
    l = 16
    P2 = planted_pair(l, 5)
    rng = make_rng(3)
    while True:
        r = _with_antipodal_letter(sample_relator(3, l, rng), 2)
        if not is_cyclically_reduced(r) or any(r[i] == -r[i + 1] for i in range(l - 1)):
            continue
        P = Presentation(3, l, as_fraction("1/5"), P2.relators + (r,))
        A = build_tile_assignment(P)
        # the third relator must stay a singleton tile
        if A.tile_of(2).size == 1:
            break
    S = build_structures(A)
    w = find_wall_exchanging_relator(P, A, S)
    assert w[0] == 2 and w[1][1] == w[1][0] + l // 2
    assert 2 in antipodal_letter_positions(P.relators[2])
    assert w[1][0] == antipodal_letter_positions(P.relators[2])[0]
    assert antipodal_letter_fraction(P) >= 1 / 3


def test_wall_exchanging_relator_excludes_tiled_cells():
    l = 12
    rng = make_rng(5)
    while True:
        P2 = planted_pair(l, 5, seed=int(rng.integers(1 << 30)))
        r0, r1 = P2.relators
        # the letter pair at positions 6/0 lies in the shared run of both cells
        if r0[6] == r0[0] and r1[6] == r1[0]:
            break
    A = build_tile_assignment(P2)
    assert find_wall_exchanging_relator(P2, A, build_structures(A)) is None
    assert antipodal_letter_fraction(P2) == 1.0
