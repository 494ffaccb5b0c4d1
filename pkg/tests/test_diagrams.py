import itertools
from fractions import Fraction

import pytest

from rgwalls.complex import ComplexBuilder, glue_two
from rgwalls.diagrams import (DiscDiagram, DistinctAssumingIso, Equal, NotFoundWithinBudget, SearchBudget,
                              Unknown, find_disc_diagram, iso_cell_bound, marked_cell_check,
                              short_embedded_loop_check, word_problem)
from rgwalls.words import Presentation, canonical_cyclic, cyclic_reduce, is_cyclically_reduced, parse_word

Z2 = Presentation.from_strings(["abAB"])
STEP = {1: (1, 0), -1: (-1, 0), 2: (0, 1), -2: (0, -1)}


def lattice_area(w):
    """Minimal area in Z^2: sum of |winding number| over unit squares (None if not closed)."""
    x = y = 0
    steps = []
    for c in w:
        dx, dy = STEP[c]
        steps.append((x, y, dx))
        x, y = x + dx, y + dy
    if (x, y) != (0, 0):
        return None
    xs = [s[0] for s in steps]
    ys = [s[1] for s in steps]
    total = 0
    for px in range(min(xs) - 1, max(xs) + 1):
        for py in range(min(ys) - 1, max(ys) + 1):
            wn = sum(dx for sx, sy, dx in steps if dx and sy > py and min(sx, sx + dx) == px)
            total += abs(wn)
    return total


def z2_words(max_len):
    seen = set()
    for L in range(2, max_len + 1, 2):
        for w in itertools.product([1, 2, -1, -2], repeat=L):
            if is_cyclically_reduced(w):
                k = canonical_cyclic(w)
                if k not in seen:
                    seen.add(k)
                    yield w


def test_micro_completeness_against_lattice_area():
    budget = SearchBudget(max_cells=4)
    n = 0
    for w in z2_words(10):
        a = lattice_area(w)
        if a is None:
            continue
        n += 1
        res = find_disc_diagram(w, Z2, budget)
        assert isinstance(res, DiscDiagram) == (a <= 4), w
        if isinstance(res, DiscDiagram):
            assert res.n_cells == a
    assert n == 93


def test_witness_is_a_disc_with_expected_boundary():
    w = parse_word("aabbAABB")
    res = find_disc_diagram(w, Z2, SearchBudget(max_cells=4))
    assert isinstance(res, DiscDiagram)
    assert res.n_cells == 4
    assert res.boundary_word() == w
    assert res.euler_characteristic() == 1
    # every internal edge is shared by two cells
    assert res.complex.cancel() == res.internal_edges() == 4


def test_cancel_is_internal_edge_count_on_random_diagrams():
    P = Presentation.from_strings(["abAB"])
    found = 0
    for w in z2_words(8):
        res = find_disc_diagram(w, P, SearchBudget(max_cells=3))
        if isinstance(res, DiscDiagram):
            found += 1
            assert res.complex.cancel() == res.internal_edges()
    assert found > 5


def test_trivial_word():
    res = find_disc_diagram(parse_word("abBA"), Z2)
    assert isinstance(res, DiscDiagram) and res.n_cells == 0


def test_not_found_is_reported():
    res = find_disc_diagram(parse_word("aabbAABB"), Z2, SearchBudget(max_cells=2))
    assert isinstance(res, NotFoundWithinBudget)
    assert res.exhaustive and res.reason == "exhausted"
    res = find_disc_diagram(parse_word("aaabbbAAABBB"), Z2, SearchBudget(max_cells=9, max_states=5))
    assert isinstance(res, NotFoundWithinBudget) and not res.exhaustive


def test_word_problem_outcomes():
    P = Presentation.from_strings(["aabbAbABab"], d="1/10")
    r = P.relators[0]
    assert isinstance(word_problem(r[:5], tuple(-x for x in reversed(r[5:])), P, "1/10"), Equal)
    out = word_problem(parse_word("ab"), parse_word("ba"), P, "1/10")
    assert isinstance(out, DistinctAssumingIso) and out.conditional
    out = word_problem(parse_word("ab" * 20), parse_word("ba" * 20), P, "1/10",
                       budget=SearchBudget(max_cells=1, max_states=3))
    assert isinstance(out, Unknown)
    with pytest.raises(ValueError):
        word_problem((1,), (1,), P, "1/2")


def test_iso_cell_bound():
    assert iso_cell_bound(10, 10, Fraction(1, 10), Fraction(1, 100)) == 2
    assert iso_cell_bound(0, 10, "1/10", "1/100") == 0


def test_short_loop_detector():
    # two squares glued along one edge: no short loops, boundaries embed
    assert short_embedded_loop_check(glue_two(4, 1)) == []
    # a square glued to itself along an edge pair folds into a loop of length 2
    B = ComplexBuilder(6)
    a = B.add_cell()
    b = B.add_cell()
    B.glue(a, 0, b, 0, 2)
    B.glue(a, 3, b, 3, 2)
    kinds = {v["kind"] for v in short_embedded_loop_check(B.build())}
    assert "short_loop" in kinds


def test_marked_cell_check():
    Y = glue_two(12, 5)
    cells = list(Y.cells)
    # distinct relator ids so the marked cell is unique
    from dataclasses import replace

    Y.cells = [replace(cells[0], relator_id=0), replace(cells[1], relator_id=1)]
    assert marked_cell_check(Y, 0)  # 4*5 > 12
    Z = glue_two(12, 2)
    Z.cells = [replace(Z.cells[0], relator_id=0), replace(Z.cells[1], relator_id=1)]
    assert not marked_cell_check(Z, 0)
