import json
import random

import networkx as nx
import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall

from rgwalls.complex import (Complex2, ComplexBuilder, LabelledGraph, balance, cancel, check_fulfilled, glue_two,
                             is_kk_bounded, isoperimetric_violation, midpoint_distance)
from rgwalls.words import Presentation, parse_word


def random_complex(seed, max_cells=6, ls=(4, 6, 8, 10, 12)):
    """Random gluings of distinct cells; returns the complex and the raw gluing records."""
    rng = random.Random(seed)
    l = rng.choice(ls)
    B = ComplexBuilder(l)
    n = rng.randint(1, max_cells)
    for _ in range(n):
        B.add_cell()
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if a == b:
            break
        k = rng.randint(1, l // 2)
        B.glue(a, rng.randrange(l), b, rng.randrange(l), k, reverse=rng.random() < 0.5)
    return B.build(), l, n


def degree_oracle(gluings, n, l):
    """Edge classes by union of glued (cell, index) slots, counted with networkx."""
    G = nx.Graph()
    G.add_nodes_from((c, i) for c in range(n) for i in range(l))
    for ca, pa, cb, pb, k, rev in gluings:
        for t in range(k):
            ib = (pb - t - 1) % l if rev else (pb + t) % l
            G.add_edge((ca, (pa + t) % l), (cb, ib))
    return sum(len(comp) - 1 for comp in nx.connected_components(G))


def test_cancel_matches_degree_counting_500():
    checked = 0
    for seed in range(500):
        Y, l, n = random_complex(seed)
        assert cancel(Y) == degree_oracle(Y.gluings, n, l)
        deg = Y.degrees()
        assert deg.sum() == n * l
        checked += 1
    assert checked == 500


def test_glue_two_values():
    Y = glue_two(12, 5)
    assert Y.cancel() == 5
    assert balance(Y) == 8  # (2+1)*12/2 - 2*5 hu = 3l/4 - 5 edges
    assert Y.n_vertices == 12 + 12 - 6
    assert is_kk_bounded(Y, 2, 1) and not is_kk_bounded(Y, 1, 1)


def test_midpoint_distances_match_floyd_warshall():
    for seed in range(30):
        Y, l, n = random_complex(1000 + seed)
        ip, ix, _ = Y.halfedge_csr()
        N = len(ip) - 1
        rows = np.repeat(np.arange(N), np.diff(ip))
        M = csr_matrix((np.ones(len(ix)), (rows, ix)), shape=(N, N))
        D = floyd_warshall(M, directed=False, unweighted=True)
        V = Y.n_vertices
        E = len(Y.edges)
        got = Y.midpoint_distances(list(range(E)))
        want = D[V:, V:]
        want = np.where(np.isinf(want), -1, want).astype(int)
        assert np.array_equal(got, want)
        if E > 1:
            assert midpoint_distance(Y, 0, 1) == want[0, 1]


@given(st.integers(0, 10**6))
def test_cancel_bounds(seed):
    Y, l, n = random_complex(seed)
    assert 0 <= Y.cancel() < n * l
    # the formula in half-edge units
    assert Y.balance_hu() == (n + 1) * l // 2 - 2 * Y.cancel()


def test_json_round_trip():
    Y, _, _ = random_complex(3)
    Z = Complex2.from_json(json.loads(Y.dumps()))
    assert Z.dumps() == Y.dumps()
    assert "graph" in Y.to_dot()


def test_labelled_graph_fulfilled():
    P = Presentation.from_strings(["abAB"])
    g = LabelledGraph()
    v = g.add_vertex()
    g.attach_cycle(v, P.relators[0])
    Y = g.to_complex([(0, g.find(v), 0, 1)], 4, P.relators)
    assert check_fulfilled(Y, P)
    assert len(Y.edges) == 4 and Y.n_vertices == 4
    # a synthetic complex is never fulfilled
    assert not check_fulfilled(glue_two(4, 1), P)


def test_fold_merges_forced_edges():
    g = LabelledGraph()
    v = g.add_vertex()
    g.attach_cycle(v, parse_word("aaaa"))
    assert g.n_edges() == 4
    u = g.add_vertex()
    g.add_edge(v, 1, u)  # the a-edge at v already exists: folding identifies u
    assert g.n_edges() == 4
    assert g.merges >= 1


def test_isoperimetric_violation():
    Y = glue_two(12, 5)
    assert isoperimetric_violation(Y, "1/10", "1/100")  # 5 > 0.11 * 24
    assert not isoperimetric_violation(Y, "1/5", "1/100")  # 5 <= 0.21 * 24
