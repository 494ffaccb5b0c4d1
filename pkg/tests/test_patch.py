from collections import Counter, deque
from fractions import Fraction

import numpy as np
import pytest
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import free_group

from rgwalls.complex import check_fulfilled
from rgwalls.patch import build_ball, build_overlap_patch, cells_through_edge
from rgwalls.tiles import build_tile_assignment
from rgwalls.words import Presentation, sample_presentation


def coset_distances(rels):
    """BFS distances in the Cayley graph from sympy's coset table."""
    F, a, b = free_group("a b")
    G = FpGroup(F, [rels(a, b) for rels in rels])
    C = G.coset_enumeration([])
    C.compress()
    C.standardize()
    dist = {0: 0}
    q = deque([0])
    while q:
        u = q.popleft()
        for v in C.table[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return G.order(), Counter(dist.values())


def test_proper_power_gives_one_cell_per_loop():
    P = Presentation.from_strings(["aaaa"])
    B = build_ball(P, 4)
    assert B.complex.n_vertices == 4
    assert len(B.complex.cells) == 1


def test_z4xz4_matches_coset_enumeration():
    P = Presentation.from_strings(["aaaa", "bbbb", "abAB"])
    B = build_ball(P, 8)
    order, shells = coset_distances([lambda a, b: a**4, lambda a, b: b**4,
                                     lambda a, b: a * b * a**-1 * b**-1])
    assert order == 16
    assert B.complex.n_vertices == 16
    assert Counter(B.dist.tolist()) == shells
    # 16 commutator squares plus one cell per a-loop and per b-loop
    assert len(B.complex.cells) == 24
    assert check_fulfilled(B.complex, P)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_z2_ball_counts(r):
    P = Presentation.from_strings(["abAB"])
    B = build_ball(P, r)
    assert B.complex.n_vertices == 2 * r * r + 2 * r + 1
    assert len(B.complex.cells) == 2 * r * (r - 1)
    assert Counter(B.dist.tolist()) == Counter({0: 1, **{k: 4 * k for k in range(1, r + 1)}})


def test_degree_sum_and_traversals():
    P = Presentation.from_strings(["aaaa", "bbbb", "abAB"])
    B = build_ball(P, 8)
    cx = B.complex
    assert cx.degrees().sum() == len(cx.cells) * cx.l
    for e in range(len(cx.edges)):
        assert len(cells_through_edge(B, e)) == cx.degrees()[e]


def test_ball_vertex_cap():
    P = Presentation.from_strings(["aabbAbABab"])
    B = build_ball(P, 6, max_vertices=50)
    assert B.flags["truncated"]


@pytest.fixture(scope="module")
def overlap_patch():
    P = sample_presentation(3, Fraction(1, 5), 12, 0)
    A = build_tile_assignment(P)
    return P, A, build_overlap_patch(P, A)


def test_overlap_patch_is_a_fulfilled_image(overlap_patch):
    P, A, pt = overlap_patch
    assert check_fulfilled(pt.complex, P)
    assert pt.cell_depth[0] == 0 and pt.complex.cells[0].relator_id == 0
    assert set(pt.cell_depth) <= {0, 1, 2}
    assert pt.n_cells <= 300
    assert set(pt.interior_cells()) == {c for c, k in enumerate(pt.cell_depth) if k < pt.depth}


def test_overlap_patch_cells_meet_along_strong_overlaps(overlap_patch):
    P, A, pt = overlap_patch
    cx = pt.complex
    sets = cx.cell_edge_sets()
    w = pt.flags["min_overlap"]
    for c, k in enumerate(pt.cell_depth):
        if k == 0:
            continue
        # c is reached through a strong overlap, either itself or via a tile containing it
        mates = {m for _, cs in pt.tiles if c in cs for m in cs}
        lower = [o for o, ko in enumerate(pt.cell_depth) if ko < k]
        assert any(m in lower or len(sets[m] & sets[o]) >= w for m in mates for o in lower)


def test_overlap_patch_is_deterministic(overlap_patch):
    P, A, pt = overlap_patch
    again = build_overlap_patch(P, A)
    assert again.complex.dumps() == pt.complex.dumps()
    assert again.to_json() == pt.to_json()


def test_overlap_patch_tiles(overlap_patch):
    P, A, pt = overlap_patch
    for c, t in pt.tile_of_cell.items():
        tid, cells = pt.tiles[t]
        assert c in cells
        assert tid == A.assign[pt.complex.cells[c].relator_id]
        assert {pt.complex.cells[x].relator_id for x in cells} <= set(A.tiles[tid].relators)
