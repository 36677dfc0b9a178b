import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from cycver.homology import (WeightedGraph, betti, betti_numbers, boundary_maps, clique_complex, coboundary_matrix,
                             complete_graph, composition_is_zero, cycle_graph, euler_characteristic, gch_report,
                             graph_join, join, laplacian, laplacian_closed_form, laplacian_corank, octahedron,
                             points)

from helpers import nx_clique_counts, rand_graph, sympy_rank


def _oracle_betti(G, k):
    """Unweighted simplicial homology from networkx cliques and sympy ranks."""
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(G.n))
    g.add_edges_from(G.edges)
    layers = {}
    for c in nx.enumerate_all_cliques(g):
        layers.setdefault(len(c) - 1, []).append(tuple(sorted(c)))

    def bd(j):
        rows, cols = layers.get(j - 1, []), layers.get(j, [])
        if not rows or not cols:
            return 0
        idx = {s: i for i, s in enumerate(rows)}
        M = [[0] * len(cols) for _ in rows]
        for c, s in enumerate(cols):
            for p in range(len(s)):
                M[idx[s[:p] + s[p + 1:]]][c] = (-1) ** p
        return sympy_rank(M)

    return len(layers.get(k, [])) - bd(k) - bd(k + 1)


def test_known_betti_numbers():
    assert betti(clique_complex(cycle_graph(4)), 1) == 1
    assert betti_numbers(clique_complex(cycle_graph(4))) == [1, 1]
    assert betti(clique_complex(complete_graph(4)), 1) == 0
    K = clique_complex(octahedron())
    assert K.counts() == [6, 12, 8]
    assert betti(K, 2) == 1 and betti_numbers(K) == [1, 0, 1]
    assert euler_characteristic(K) == 2


def test_clique_counts_match_networkx():
    rng = random.Random(12)
    for _ in range(15):
        G = rand_graph(rng, rng.randint(2, 8))
        K = clique_complex(G)
        assert K.check()
        assert K.counts() == nx_clique_counts(G)


def test_boundary_of_edge():
    K = clique_complex(WeightedGraph(2, {(0, 1)}))
    bm = boundary_maps(K, with_empty=True)
    assert [row[0] for row in bm.partial(1)] == [-1, 1]
    assert all(composition_is_zero(K, k) for k in range(K.dim + 1))


def test_random_graphs_laplacian_and_betti():
    rng = random.Random(99)
    for _ in range(20):
        G = rand_graph(rng, rng.randint(3, 8), p=rng.choice((0.4, 0.6, 0.8)))
        K = clique_complex(G)
        for k in range(K.dim + 1):
            assert laplacian(K, k) == laplacian_closed_form(K, k)
            assert laplacian(K, k, True) == laplacian_closed_form(K, k, True)
            b = betti(K, k)
            assert laplacian_corank(K, k) == b
            assert b == _oracle_betti(G, k)
            for _ in range(5):
                w = [Fraction(rng.randint(1, 7), rng.randint(1, 4)) for _ in range(G.n)]
                assert betti(clique_complex(G.reweighted(w)), k) == b


def test_laplacian_is_psd():
    rng = random.Random(5)
    G = rand_graph(rng, 7, 0.7)
    K = clique_complex(G)
    for k in range(K.dim + 1):
        L = np.array(laplacian(K, k), dtype=float)
        assert np.allclose(L, L.T)
        assert np.linalg.eigvalsh(L).min() > -1e-9


def test_coboundary_weights():
    G = WeightedGraph(2, {(0, 1)}, [2, 3])
    K = clique_complex(G)
    D = coboundary_matrix(K, 0)
    assert D == [[-3, 2]]
    assert laplacian(K, 0) == [[9, -6], [-6, 4]]


def test_join_of_spheres():
    S0 = points(2)
    K = join(join(S0, S0), S0)
    assert K.check()
    assert K.counts() == [6, 12, 8]
    assert betti_numbers(K) == [1, 0, 1]
    G = graph_join(graph_join(WeightedGraph(2), WeightedGraph(2)), WeightedGraph(2))
    assert clique_complex(G).simplices == K.simplices


def test_gch_report():
    r = gch_report(cycle_graph(5), 1)
    assert r.betti == 1 and r.verdict == "YES" and abs(r.lambda_min) < 1e-9
    r = gch_report(complete_graph(4), 1)
    assert r.verdict == "NO" and r.lambda_min > 0.5


def test_graph_errors():
    with pytest.raises(ValueError):
        WeightedGraph(2, {(0, 0)})
    with pytest.raises(ValueError):
        WeightedGraph(2, {(0, 2)})
    with pytest.raises(ValueError):
        WeightedGraph(2, set(), [1, 0])
    with pytest.raises(ValueError):
        clique_complex(cycle_graph(3), -1)


def test_max_dim_truncation():
    K = clique_complex(complete_graph(5), max_dim=2)
    assert K.dim == 2 and K.counts() == [5, 10, 10]
    assert len(list(combinations(range(5), 3))) == K.count(2)
