import json
from fractions import Fraction

import pytest

from rgwalls import _kernels as K
from rgwalls.complex import ComplexBuilder, glue_two
from rgwalls.tiles import build_tile_assignment, check_tile_intersections, find_cell_overlaps, is_tile
from rgwalls.words import (Presentation, as_fraction, is_cyclically_reduced, make_rng, sample_presentation,
                           sample_relator)


def planted_pair(l, k, seed=0, m=3):
    """Two relators sharing exactly one maximal common run, of length k, and no other run > l/4."""
    rng = make_rng(seed)
    while True:
        r0 = sample_relator(m, l, rng)
        tail = sample_relator(m, l, rng)
        r1 = r0[:k] + tail[k:]
        if not is_cyclically_reduced(r1) or r1[k] == r0[k] or r1[-1] == r0[-1]:
            continue
        if any(r1[i] == -r1[i + 1] for i in range(l - 1)):
            continue
        P = Presentation(m, l, as_fraction("1/5"), (r0, r1))
        ov = find_cell_overlaps(P, l // 4 + 1)
        if k > l // 4 and len(ov) == 1 and ov[0].size == k:
            return P
        if k <= l // 4 and not ov and find_cell_overlaps(P, k) and max(o.size for o in find_cell_overlaps(P, k)) == k:
            return P


@pytest.mark.parametrize("l,k", [(8, 3), (12, 4), (12, 5), (16, 5), (16, 7)])
def test_planted_pair_forms_a_tile(l, k):
    P = planted_pair(l, k)
    A = build_tile_assignment(P)
    assert A.sizes() == {2: 1}
    T = A.tile_of(0)
    cx = T.complex(P.relators)
    assert cx.cancel() == k
    assert cx.balance_hu() == 2 * (3 * l // 4 - k)
    assert is_tile(cx)
    assert A.history[0]["overlap"] == k


@pytest.mark.parametrize("l", [8, 12, 16])
def test_quarter_overlap_is_not_glued(l):
    P = planted_pair(l, l // 4)
    A = build_tile_assignment(P)
    assert A.sizes() == {1: 2}
    assert A.history == []


def test_is_tile_threshold():
    # Cancel must exceed l/4 for a two-cell tile
    assert is_tile(glue_two(12, 4))
    assert not is_tile(glue_two(12, 3))
    assert is_tile(glue_two(12, 3), [0])


@pytest.mark.parametrize("seed", range(4))
def test_assignment_invariants(seed):
    P = sample_presentation(3, Fraction(1, 5), 12, seed)
    A = build_tile_assignment(P)
    assert sorted(A.assign) == list(range(len(P.relators)))
    seen = set()
    for tid in A.assigned_tiles():
        t = A.tiles[tid]
        assert 1 <= t.size <= 5
        mine = [r for r in t.relators if A.assign[r] == tid]
        assert not seen & set(mine)
        seen |= set(mine)
        # the core's relators stay with the core
        core = A.core_of(tid)
        assert set(core.relators) <= set(t.relators)
        cx = t.complex(P.relators)
        if t.size <= 4:
            assert is_tile(cx)
    assert seen == set(range(len(P.relators)))
    # no two distinct Step 1 tiles share a relator
    s1 = {}
    for r, tid in A.after_step1.items():
        s1.setdefault(tid, []).append(r)
    assert sum(len(v) for v in s1.values()) == len(P.relators)


def test_assignment_is_deterministic_and_backend_independent():
    P = sample_presentation(3, Fraction(1, 5), 12, 5)
    prev = K.backend()
    try:
        K.set_backend("numba")
        a = json.dumps(build_tile_assignment(P).to_json(), sort_keys=True)
        b = json.dumps(build_tile_assignment(P).to_json(), sort_keys=True)
        K.set_backend("numpy")
        c = json.dumps(build_tile_assignment(P).to_json(), sort_keys=True)
    finally:
        K.set_backend(prev)
    assert a == b == c


def test_check_tile_intersections():
    Y = glue_two(12, 5)
    assert check_tile_intersections([(0,), (1,)], Y) == []
    Y = glue_two(12, 6)
    assert [v["kind"] for v in check_tile_intersections([(0,), (1,)], Y)] == ["too_large"]
    B = ComplexBuilder(12)
    a, b = B.add_cell(), B.add_cell()
    B.glue(a, 0, b, 2, 2, reverse=True)
    B.glue(a, 6, b, 8, 2, reverse=True)
    kinds = [v["kind"] for v in check_tile_intersections([(0,), (1,)], B.build())]
    assert "disconnected" in kinds
    # tiles sharing a cell are not compared
    assert check_tile_intersections([(0, 1), (1,)], Y) == []
