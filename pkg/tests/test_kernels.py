import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rgwalls import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def both(fn):
    prev = K.backend()
    try:
        K.set_backend("numba")
        a = fn()
        K.set_backend("numpy")
        b = fn()
    finally:
        K.set_backend(prev)
    return a, b


edges = st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), max_size=40)


@given(edges)
def test_bfs_and_components_agree_with_networkx(es):
    n = 15
    es = [(u, v) for u, v in es if u != v]
    u = [a for a, _ in es]
    v = [b for _, b in es]
    ip, ix, _ = K.csr_from_edges(n, u, v)
    a, b = both(lambda: K.multi_bfs(ip, ix, np.arange(n)))
    assert np.array_equal(a, b)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(es)
    sp = dict(nx.all_pairs_shortest_path_length(G))
    for s in range(n):
        for t in range(n):
            assert a[s, t] == sp[s].get(t, -1)
    la, lb = both(lambda: K.component_labels(n, u, v))
    assert np.array_equal(la, lb)
    assert len(set(la.tolist())) == nx.number_connected_components(G)


@given(edges)
def test_girth_agrees(es):
    n = 15
    es = [(u, v) for u, v in es if u != v]
    ip, ix, ei = K.csr_from_edges(n, [a for a, _ in es], [b for _, b in es])
    a, b = both(lambda: K.girth(ip, ix, ei, 16))
    assert a == b
    G = nx.MultiGraph()
    G.add_edges_from(es)
    if len(set(map(frozenset, es))) < len(es):
        assert a == 2
    elif nx.cycle_basis(nx.Graph(G)):
        assert a == min(len(c) for c in nx.minimum_cycle_basis(nx.Graph(G)))
    else:
        assert a >= 16


@given(st.integers(1, 4), st.integers(4, 12), st.integers(0, 2**31))
def test_cyclic_runs_agree(na, l, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(1, 3, size=(na, l))
    B = rng.integers(1, 3, size=(na + 1, l))
    for k in (1, 2, l // 2):
        a, b = both(lambda: K.cyclic_runs(A, B, k))
        key = lambda r: sorted(map(tuple, r.tolist()))
        assert key(a) == key(b)
        for i, j, p, q, m in a:
            assert m >= k
            assert all(A[i, (p + t) % l] == B[j, (q + t) % l] for t in range(m))
