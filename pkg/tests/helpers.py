"""Shared random generators and independent oracles for the test suite."""

import random
from fractions import Fraction

import networkx as nx
import sympy

from cycver.cyclotomic import CycNum, FieldSpec, zeta
from cycver.linalg import CycMatrix


def rand_cyc(rng: random.Random, k: int, lo=-5, hi=5, den=True) -> CycNum:
    d = FieldSpec(k).d
    coeffs = [Fraction(rng.randint(lo, hi), rng.choice((1, 2, 3, 4)) if den else 1) for _ in range(d)]
    return CycNum(k, coeffs)


def rand_int_cyc(rng, k, bound=10) -> CycNum:
    return rand_cyc(rng, k, -bound, bound, den=False)


def rand_nonzero(rng, k, **kw) -> CycNum:
    while True:
        a = rand_cyc(rng, k, **kw)
        if a:
            return a


def rand_matrix(rng, k, rows, cols=None, **kw) -> CycMatrix:
    cols = rows if cols is None else cols
    return CycMatrix(k, [[rand_cyc(rng, k, **kw) for _ in range(cols)] for _ in range(rows)])


def rand_vector(rng, k, n, **kw):
    while True:
        v = [rand_cyc(rng, k, **kw) for _ in range(n)]
        if any(v):
            return v


# ------------------------------------------------------------------ oracles

_x = sympy.Symbol("x")


def sympy_mul(a: CycNum, b: CycNum):
    """Product in Q[x]/(x^d + 1) computed by sympy polynomial division."""
    d = a.d
    pa = sum(sympy.Rational(c.numerator, c.denominator) * _x ** i for i, c in enumerate(a.coeffs))
    pb = sum(sympy.Rational(c.numerator, c.denominator) * _x ** i for i, c in enumerate(b.coeffs))
    r = sympy.rem(sympy.expand(pa * pb), _x ** d + 1, _x)
    poly = sympy.Poly(r, _x)
    out = [Fraction(0)] * d
    for (e,), c in poly.terms():
        out[e] = Fraction(int(c.p), int(c.q))
    return out


def sympy_rank(rows) -> int:
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in r]
                         for r in rows]).rank()


def nx_clique_counts(G) -> list:
    g = nx.Graph()
    g.add_nodes_from(range(G.n))
    g.add_edges_from(G.edges)
    counts = {}
    for c in nx.enumerate_all_cliques(g):
        counts[len(c) - 1] = counts.get(len(c) - 1, 0) + 1
    return [counts[i] for i in range(len(counts))]


def rand_graph(rng, n, p=0.6, weighted=True):
    from cycver.homology import WeightedGraph

    edges = {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p}
    w = [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(n)] if weighted else None
    return WeightedGraph(n, edges, w)


def _real_int(rng, k, L):
    z = zeta(k)
    b = rng.randint(-(2 ** L - 1), 2 ** L - 1)
    a = rng.randint(-(2 ** L - 1), 2 ** L - 1)
    return CycNum.rational(k, a) + (z - z ** 3) * b


def _int(rng, k, L):
    return CycNum(k, [rng.randint(-(2 ** L - 1), 2 ** L - 1) for _ in range(4)])


def random_sparse(rng, k=3):
    """Union of d random partial matchings, so every row has degree <= d."""
    n, d, L = rng.randint(1, 4), rng.randint(1, 3), rng.randint(1, 4)
    N = 1 << n
    ent = {}
    for _ in range(d):
        perm = list(range(N))
        rng.shuffle(perm)
        used = set()
        for i in perm:
            if i in used:
                continue
            j = rng.choice([x for x in range(N) if x not in used])
            used |= {i, j}
            if (i, j) in ent:
                continue
            if i == j:
                ent[(i, i)] = _real_int(rng, k, L)
            else:
                v = _int(rng, k, L)
                ent[(i, j)], ent[(j, i)] = v, v.conj()
    ent = {e: v for e, v in ent.items() if v}
    from cycver.sparse import SparseHam

    return SparseHam(k, n, d, 1, ent).validate(), L
