"""Weighted clique complexes, their coboundary maps, Laplacians and Betti numbers.

Simplices are ascending vertex tuples.  Matrices are exact (Fraction) and
written in the orthonormal basis |s'> = |s> / w(s), so coboundary entries
are vertex weights times orientation signs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .linalg import rational_rank, report_from_eigs

DEFAULT_MAX_DIM = 8


@dataclass
class WeightedGraph:
    n: int
    edges: set = field(default_factory=set)
    weights: list | None = None

    def __post_init__(self):
        if self.weights is None:
            self.weights = [Fraction(1)] * self.n
        self.weights = [Fraction(w) for w in self.weights]
        if len(self.weights) != self.n:
            raise ValueError("one weight per vertex required")
        if any(w <= 0 for w in self.weights):
            raise ValueError("vertex weights must be positive")
        es = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            es.add((min(u, v), max(u, v)))
        self.edges = es

    def neighbours(self):
        nb = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return nb

    def reweighted(self, weights):
        return WeightedGraph(self.n, set(self.edges), list(weights))


def cycle_graph(n: int) -> WeightedGraph:
    return WeightedGraph(n, {(i, (i + 1) % n) for i in range(n)})


def complete_graph(n: int) -> WeightedGraph:
    return WeightedGraph(n, set(combinations(range(n), 2)))


def octahedron() -> WeightedGraph:
    # K_{2,2,2}: vertex i is opposite i ^ 1
    return WeightedGraph(6, {(u, v) for u, v in combinations(range(6), 2) if u ^ v != 1})


@dataclass
class CliqueComplex:
    nvertices: int
    weights: list
    simplices: list  # simplices[k] = sorted list of ascending (k+1)-tuples
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        self._index = [{s: i for i, s in enumerate(layer)} for layer in self.simplices]

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def count(self, k: int) -> int:
        if k == -1:
            return 1
        return len(self.simplices[k]) if 0 <= k < len(self.simplices) else 0

    def layer(self, k: int):
        if k == -1:
            return [()]
        return self.simplices[k] if 0 <= k < len(self.simplices) else []

    def index(self, s: tuple) -> int:
        return self._index[len(s) - 1][s]

    def weight(self, s) -> Fraction:
        w = Fraction(1)
        for v in s:
            w *= self.weights[v]
        return w

    def up(self, s: tuple):
        k = len(s)
        if k >= len(self.simplices):
            return []
        cand = set(range(self.nvertices)) - set(s)
        return [v for v in sorted(cand) if tuple(sorted(s + (v,))) in self._index[k]]

    def check(self) -> bool:
        """Downward closure and sizes."""
        for k, layer in enumerate(self.simplices):
            for s in layer:
                if len(s) != k + 1 or list(s) != sorted(set(s)):
                    return False
                if k and any(f not in self._index[k - 1] for f in combinations(s, k)):
                    return False
        return True

    def counts(self):
        return [len(layer) for layer in self.simplices]


def clique_complex(G: WeightedGraph, max_dim: int = DEFAULT_MAX_DIM) -> CliqueComplex:
    """All cliques with at most max_dim + 1 vertices, grown in ascending vertex order."""
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    nb = G.neighbours()
    layers = [[(v,) for v in range(G.n)]]
    while len(layers) <= max_dim:
        nxt = []
        for s in layers[-1]:
            common = set.intersection(*(nb[v] for v in s))
            nxt.extend(s + (v,) for v in sorted(common) if v > s[-1])
        if not nxt:
            break
        layers.append(nxt)
    if G.n == 0:
        layers = []
    return CliqueComplex(G.n, list(G.weights), layers, max_dim)


def _sign(pos: int) -> int:
    return -1 if pos & 1 else 1


@dataclass
class BoundaryMaps:
    """coboundary[k] is d^k : C^k -> C^{k+1}; boundary[k] is its transpose's partner."""

    complex: CliqueComplex
    with_empty: bool
    coboundary: dict  # k -> rows x cols list of Fraction (rows index C^{k+1})

    def d(self, k: int):
        return self.coboundary.get(k)

    def partial(self, k: int):
        """boundary map C^k -> C^{k-1}, the transpose of d^{k-1}."""
        D = self.coboundary.get(k - 1)
        if D is None:
            return None
        return [list(col) for col in zip(*D)] if D else [[] for _ in range(self.complex.count(k))]


def coboundary_matrix(K: CliqueComplex, k: int):
    """d^k in the orthonormal basis; k = -1 is the augmentation from the empty simplex."""
    rows, cols = K.layer(k + 1), K.layer(k)
    M = [[Fraction(0)] * len(cols) for _ in rows]
    if not rows or not cols:
        return M
    for r, rho in enumerate(rows):
        for pos, v in enumerate(rho):
            face = rho[:pos] + rho[pos + 1:]
            if k == -1:
                c = 0
            else:
                c = K.index(face)
            # [v] + face reordered to ascending: v moves past pos vertices
            M[r][c] = _sign(pos) * K.weights[v]
    return M


def boundary_maps(K: CliqueComplex, with_empty: bool = False) -> BoundaryMaps:
    start = -1 if with_empty else 0
    cob = {k: coboundary_matrix(K, k) for k in range(start, K.dim + 1)}
    return BoundaryMaps(K, with_empty, cob)


def _matmul(A, B):
    if not A or not B:
        return [[Fraction(0)] * (len(B[0]) if B else 0) for _ in A]
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def _transpose(A, ncols: int):
    if not A:
        return [[] for _ in range(ncols)]
    return [list(c) for c in zip(*A)]


def composition_is_zero(K: CliqueComplex, k: int, with_empty: bool = True) -> bool:
    if k - 1 < (-1 if with_empty else 0):
        return True
    P = _matmul(coboundary_matrix(K, k), coboundary_matrix(K, k - 1))
    return all(x == 0 for row in P for x in row)


def laplacian(K: CliqueComplex, k: int, with_empty: bool = False):
    """Delta^k = d^{k-1} partial^k + partial^{k+1} d^k, exact."""
    n = K.count(k)
    L = [[Fraction(0)] * n for _ in range(n)]
    if k - 1 >= (-1 if with_empty else 0):
        Dm = coboundary_matrix(K, k - 1)  # C^{k-1} -> C^k
        L = _add(L, _matmul(Dm, _transpose(Dm, K.count(k - 1))))
    Dk = coboundary_matrix(K, k)  # C^k -> C^{k+1}
    if Dk:
        L = _add(L, _matmul(_transpose(Dk, n), Dk))
    return L


def _add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _boundary_signs(s: tuple):
    """face -> (sign, removed vertex) for the boundary of s."""
    return {s[:j] + s[j + 1:]: (_sign(j), s[j]) for j in range(len(s))}


def laplacian_closed_form(K: CliqueComplex, k: int, with_empty: bool = False):
    """Entrywise Laplacian from the common-lower-simplex rules.

    The rules assume a C^{k-1} to go down into.  Without augmentation the
    k = 0 case falls back to the weighted graph Laplacian.
    """
    layer = K.layer(k)
    n = len(layer)
    L = [[Fraction(0)] * n for _ in range(n)]
    faces = [_boundary_signs(s) for s in layer]
    down = k >= 1 or with_empty
    for i, s in enumerate(layer):
        d = sum((K.weights[u] ** 2 for u in K.up(s)), Fraction(0))
        if down:
            d += sum((K.weights[v] ** 2 for v in s), Fraction(0))
        L[i][i] = d
        if not down:
            # unaugmented k = 0: the weighted graph Laplacian
            for u in K.up(s):
                L[i][u] = -K.weights[s[0]] * K.weights[u]
            continue
        for j in range(i + 1, n):
            t = layer[j]
            common = faces[i].keys() & faces[j].keys()
            if not common:
                continue
            (eta,) = common
            union = tuple(sorted(set(s) | set(t)))
            if len(union) <= K.dim + 1 and union in K._index[len(union) - 1]:
                continue  # upper adjacent
            ss, vs = faces[i][eta]
            st, vt = faces[j][eta]
            val = ss * st * K.weights[vs] * K.weights[vt]
            L[i][j] = L[j][i] = val
    return L


def betti(K: CliqueComplex, k: int, with_empty: bool = False) -> int:
    """dim C^k - rank d^k - rank d^{k-1}, with exact ranks."""
    if k < 0 or k > K.dim:
        return 0
    r_up = rational_rank(coboundary_matrix(K, k)) if K.count(k + 1) else 0
    r_down = 0
    if k - 1 >= (-1 if with_empty else 0):
        r_down = rational_rank(coboundary_matrix(K, k - 1))
    return K.count(k) - r_up - r_down


def betti_numbers(K: CliqueComplex, with_empty: bool = False):
    return [betti(K, k, with_empty) for k in range(K.dim + 1)]


def laplacian_corank(K: CliqueComplex, k: int, with_empty: bool = False) -> int:
    L = laplacian(K, k, with_empty)
    return len(L) - rational_rank(L) if L else 0


def euler_characteristic(K: CliqueComplex) -> int:
    return sum((-1) ** k * c for k, c in enumerate(K.counts()))


def join(K1: CliqueComplex, K2: CliqueComplex) -> CliqueComplex:
    """K1 * K2 with K2's vertices shifted past K1's; simplices are all unions."""
    off = K1.nvertices
    s1 = [()] + [s for layer in K1.simplices for s in layer]
    s2 = [()] + [tuple(v + off for v in s) for layer in K2.simplices for s in layer]
    by_dim = {}
    for a in s1:
        for b in s2:
            u = a + b
            if u:
                by_dim.setdefault(len(u) - 1, []).append(u)
    layers = [sorted(by_dim[k]) for k in range(len(by_dim))]
    return CliqueComplex(off + K2.nvertices, list(K1.weights) + list(K2.weights), layers,
                         max(K1.max_dim, K2.max_dim, len(layers) - 1))


def graph_join(G1: WeightedGraph, G2: WeightedGraph) -> WeightedGraph:
    off = G1.n
    edges = set(G1.edges) | {(u + off, v + off) for u, v in G2.edges}
    edges |= {(u, v + off) for u in range(G1.n) for v in range(G2.n)}
    return WeightedGraph(off + G2.n, edges, G1.weights + G2.weights)


def points(m: int) -> CliqueComplex:
    """m isolated vertices."""
    return clique_complex(WeightedGraph(m), 0)


@dataclass
class GchReport:
    k: int
    betti: int
    lambda_min: float
    gamma: float
    verdict: str  # "YES" if the k-th homology is non-trivial


def gch_report(G, k: int, max_dim: int = DEFAULT_MAX_DIM, tol: float = 1e-9) -> GchReport:
    K = G if isinstance(G, CliqueComplex) else clique_complex(G, max(max_dim, k + 1))
    b = betti(K, k)
    L = laplacian(K, k)
    if L:
        rep = report_from_eigs(np.linalg.eigvalsh(np.array(L, dtype=float)), tol)
        lam, gam = rep.lambda_min, rep.gamma
    else:
        lam, gam = float("inf"), float("inf")
    return GchReport(k, b, lam, gam, "YES" if b > 0 else "NO")
