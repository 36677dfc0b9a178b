"""Dense exact linear algebra over Q(zeta_{2^k}) plus floating spectral estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd

import numpy as np

from .cyclotomic import CycNum, FieldSpec, embed, imag_unit


class CycMatrix:
    """Immutable dense matrix of CycNum entries, all in the same field."""

    __slots__ = ("k", "rows", "cols", "_data")

    def __init__(self, k: int, data):
        self.k = k
        data = [list(r) for r in data]
        if not data or not data[0]:
            raise ValueError("matrix dimensions must be positive")
        self.rows, self.cols = len(data), len(data[0])
        conv = []
        for r in data:
            if len(r) != self.cols:
                raise ValueError("ragged matrix rows")
            row = []
            for a in r:
                if isinstance(a, CycNum):
                    if a.k != k:
                        raise ValueError(f"entry field k={a.k} does not match matrix k={k}")
                    row.append(a)
                else:
                    row.append(CycNum.rational(k, a))
            conv.append(tuple(row))
        self._data = tuple(conv)

    # constructors
    @classmethod
    def from_rationals(cls, rows, k: int = 1):
        return cls(k, [[CycNum.rational(k, x) for x in r] for r in rows])

    @classmethod
    def zeros(cls, k: int, rows: int, cols: int | None = None):
        z = CycNum.zero(k)
        return cls(k, [[z] * (cols or rows) for _ in range(rows)])

    @classmethod
    def identity(cls, k: int, n: int):
        z, o = CycNum.zero(k), CycNum.one(k)
        return cls(k, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, k: int, vals):
        vals = list(vals)
        z = CycNum.zero(k)
        return cls(k, [[vals[i] if i == j else z for j in range(len(vals))] for i in range(len(vals))])

    @classmethod
    def column(cls, vec):
        vec = list(vec)
        return cls(vec[0].k, [[a] for a in vec])

    @classmethod
    def outer(cls, u, v):
        """|u><v| for lists of CycNum."""
        return cls(u[0].k, [[a * b.conj() for b in v] for a in u])

    # access
    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i):
        return list(self._data[i])

    def tolist(self):
        return [list(r) for r in self._data]

    def entries(self):
        for r in self._data:
            yield from r

    @property
    def shape(self):
        return self.rows, self.cols

    # algebra
    def _check_same(self, other):
        if not isinstance(other, CycMatrix):
            raise TypeError("expected CycMatrix")
        if other.k != self.k:
            raise ValueError(f"field mismatch: k={self.k} vs k={other.k}")

    def __add__(self, other):
        self._check_same(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return CycMatrix(self.k, [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return CycMatrix(self.k, [[-a for a in r] for r in self._data])

    def scale(self, c):
        return CycMatrix(self.k, [[a * c for a in r] for r in self._data])

    def __mul__(self, c):
        if isinstance(c, CycMatrix):
            return self @ c
        return self.scale(c)

    __rmul__ = scale

    def __matmul__(self, other):
        if isinstance(other, (list, tuple)):
            return self.apply(other)
        self._check_same(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        z = CycNum.zero(self.k)
        ocols = [[(i, a) for i, a in enumerate(col) if a] for col in zip(*other._data)]
        out = []
        for r in self._data:
            out.append([sum((r[i] * a for i, a in col if r[i]), z) for col in ocols])
        return CycMatrix(self.k, out)

    def apply(self, vec):
        """Matrix-vector product with a list of CycNum."""
        if len(vec) != self.cols:
            raise ValueError(f"dimension mismatch: {self.cols} vs {len(vec)}")
        z = CycNum.zero(self.k)
        nz = [(j, v) for j, v in enumerate(vec) if v]
        return [sum((r[j] * v for j, v in nz if r[j]), z) for r in self._data]

    @property
    def T(self):
        return CycMatrix(self.k, list(zip(*self._data)))

    @property
    def H(self):
        return CycMatrix(self.k, [[a.conj() for a in r] for r in zip(*self._data)])

    def kron(self, other):
        self._check_same(other)
        out = []
        for r in self._data:
            for s in other._data:
                out.append([a * b for a in r for b in s])
        return CycMatrix(self.k, out)

    def lift(self, k: int):
        return CycMatrix(k, [[a.lift(k) for a in r] for r in self._data])

    def trace(self):
        return sum((self._data[i][i] for i in range(min(self.rows, self.cols))), CycNum.zero(self.k))

    def is_zero(self):
        return all(a.is_zero() for a in self.entries())

    def __eq__(self, other):
        if not isinstance(other, CycMatrix):
            return NotImplemented
        return self.k == other.k and self._data == other._data

    def __hash__(self):
        return hash((self.k, self._data))

    def to_numpy(self) -> np.ndarray:
        return np.array([[embed(a) for a in r] for r in self._data], dtype=complex)

    def __repr__(self):
        return f"CycMatrix(k={self.k}, {self.rows}x{self.cols})"


def vec_is_zero(v) -> bool:
    return all(a.is_zero() for a in v)


def inner(u, v):
    """<u|v>, antilinear in the first argument."""
    k = u[0].k
    return sum((a.conj() * b for a, b in zip(u, v) if a and b), CycNum.zero(k))


def norm2(v):
    return inner(v, v)


# ---------------------------------------------------------------- elimination


def rref(A: CycMatrix):
    """Gauss-Jordan reduction over the field.

    Pivots are taken column by column, using the first row (top to bottom)
    with a nonzero entry.  Returns (reduced matrix, rank, pivot columns).
    """
    M = A.tolist()
    rows, cols = A.rows, A.cols
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = M[r][c].inverse()
        M[r] = [a * inv if a else a for a in M[r]]
        pr = M[r]
        nzc = [j for j in range(c, cols) if pr[j]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                row = M[i]
                for j in nzc:
                    row[j] = row[j] - f * pr[j]
        pivots.append(c)
        r += 1
    return CycMatrix(A.k, M), r, pivots


@dataclass
class KernelBasis:
    vectors: list
    corank: int = field(init=False)

    def __post_init__(self):
        self.corank = len(self.vectors)


def kernel(A: CycMatrix, verify: bool = True) -> KernelBasis:
    R, rank, pivots = rref(A)
    free = [c for c in range(A.cols) if c not in set(pivots)]
    z, one = CycNum.zero(A.k), CycNum.one(A.k)
    vecs = []
    for f in free:
        v = [z] * A.cols
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = -R[r, f]
        vecs.append(v)
    if verify:
        for v in vecs:
            if not vec_is_zero(A.apply(v)):
                raise AssertionError("kernel vector not annihilated")
    return KernelBasis(vecs)


def _int_rank(rows) -> int:
    """Rank of an integer matrix by fraction-free elimination with row gcd reduction."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        pr = rows[rank]
        pc = pr[c]
        for i in range(rank + 1, len(rows)):
            f = rows[i][c]
            if f:
                new = [pc * x - f * y for x, y in zip(rows[i], pr)]
                g = gcd(*new)
                if g > 1:
                    new = [x // g for x in new]
                rows[i] = new
        rank += 1
        if rank == len(rows):
            break
    return rank


def rational_rank(rows) -> int:
    """Exact rank of a matrix of rationals given as nested lists."""
    irows = []
    for r in rows:
        fr = [Fraction(x) for x in r]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        irows.append([int(x * den) for x in fr])
    return _int_rank(irows)


def rank(A: CycMatrix) -> int:
    """Exact rank.  Uses the rational image of A, whose rank is d times larger."""
    d = FieldSpec(A.k).d
    irows = []
    for r in A.tolist():
        den = 1
        for a in r:
            den = den * a.den // gcd(den, a.den)
        block = [[0] * (A.cols * d) for _ in range(d)]
        for j, a in enumerate(r):
            if a.is_zero():
                continue
            s = den // a.den
            # column c of reg_rep(a) is the coefficient vector of a * z^c,
            # a signed permutation of a's coefficients with the same denominator
            for c in range(d):
                col = a * CycNum.zeta_power(A.k, c)
                for i in range(d):
                    block[i][j * d + c] = col.num[i] * s
        irows.extend(block)
    return _int_rank(irows) // d


def corank(A: CycMatrix) -> int:
    return A.cols - rank(A)


# ---------------------------------------------------------------- predicates


def _square(A):
    if A.rows != A.cols:
        raise ValueError(f"expected a square matrix, got {A.rows}x{A.cols}")


def is_hermitian(A: CycMatrix) -> bool:
    _square(A)
    return A == A.H


def is_unitary(A: CycMatrix) -> bool:
    _square(A)
    return A.H @ A == CycMatrix.identity(A.k, A.rows)


def is_psd_on_subspace(A: CycMatrix, basis=None, tol: float = 1e-9) -> bool:
    """Floating PSD test of A compressed to span(basis), plus an exact kernel check.

    `basis` is a list of vectors (lists of CycNum) or a list of indices of
    computational basis vectors.  None means the full space.
    """
    _square(A)
    if basis is None:
        C = A
        B = None
    else:
        basis = list(basis)
        if basis and isinstance(basis[0], int):
            idx = basis
            C = CycMatrix(A.k, [[A[i, j] for j in idx] for i in idx])
            B = None
        else:
            for v in basis:
                if len(v) != A.rows:
                    raise ValueError("basis vector dimension mismatch")
            B = CycMatrix(A.k, [list(x) for x in zip(*basis)])
            C = B.H @ A @ B
    if B is None:
        w = np.linalg.eigvalsh(C.to_numpy())
    else:
        import scipy.linalg as sla

        w = sla.eigh(C.to_numpy(), (B.H @ B).to_numpy(), eigvals_only=True)
    for v in kernel(C).vectors:
        if not vec_is_zero(C.apply(v)):
            return False
    return bool(np.all(w >= -tol))


# ---------------------------------------------------------------- Pauli basis

# single-qubit Pauli as (flip, phase exponent of i for input bit 0, for input bit 1)
_PAULI = {
    (0, 0): (0, 0, 0),  # I
    (0, 1): (1, 0, 0),  # X
    (1, 0): (1, 1, 3),  # Y: |0> -> i|1>, |1> -> -i|0>
    (1, 1): (0, 0, 2),  # Z
}


def _pauli_action(x: str, nq: int):
    """P_x as a signed permutation: returns (flip mask, phase function on index)."""
    flip = 0
    phases = []
    for q in range(nq):
        f, p0, p1 = _PAULI[(int(x[2 * q]), int(x[2 * q + 1]))]
        flip |= f << (nq - 1 - q)
        phases.append((p0, p1))

    def phase(b: int) -> int:
        e = 0
        for q in range(nq):
            e += phases[q][(b >> (nq - 1 - q)) & 1]
        return e % 4

    return flip, phase


def _ipow(k: int, e: int) -> CycNum:
    e %= 4
    if e == 0:
        return CycNum.one(k)
    if e == 2:
        return -CycNum.one(k)
    i = imag_unit(k)
    return i if e == 1 else -i


def _nqubits(dim: int) -> int:
    nq = dim.bit_length() - 1
    if dim <= 0 or 1 << nq != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return nq


def pauli_strings(nq: int):
    return ["".join(b) for b in product("01", repeat=2 * nq)]


def has_y(x: str) -> bool:
    return any(x[2 * q: 2 * q + 2] == "10" for q in range(len(x) // 2))


def pauli_matrix(x: str, k: int) -> CycMatrix:
    nq = len(x) // 2
    dim = 1 << nq
    if has_y(x) and k < 2:
        raise ValueError("Pauli Y needs k >= 2")
    flip, phase = _pauli_action(x, nq)
    z = CycNum.zero(k)
    M = [[z] * dim for _ in range(dim)]
    for b in range(dim):
        M[b ^ flip][b] = _ipow(k, phase(b))
    return CycMatrix(k, M)


def apply_pauli(x: str, vec):
    """P_x applied to a list of CycNum."""
    k = vec[0].k
    nq = _nqubits(len(vec))
    flip, phase = _pauli_action(x, nq)
    out = [None] * len(vec)
    ph = [_ipow(k, e) for e in range(4)] if (k >= 2) else None
    for b, a in enumerate(vec):
        e = phase(b)
        if e == 0:
            out[b ^ flip] = a
        elif e == 2:
            out[b ^ flip] = -a
        else:
            if ph is None:
                raise ValueError("Pauli Y needs k >= 2")
            out[b ^ flip] = a * ph[e]
    return out


def pauli_decompose(U: CycMatrix) -> dict:
    """Coefficients a_x = 2^-n Tr(P_x U) keyed by 2n-bit strings.

    Real input is lifted to Q(i) since Y coefficients are imaginary.
    """
    _square(U)
    if U.k < 2:
        U = U.lift(2)
    nq = _nqubits(U.rows)
    k = U.k
    scale = Fraction(1, U.rows)
    out = {}
    for x in pauli_strings(nq):
        flip, phase = _pauli_action(x, nq)
        # Tr(P_x U) = sum_b <b|P_x|b^flip> U[b^flip][b] with P_x|c> = phase(c)|c^flip>
        tot = CycNum.zero(k)
        ys = []
        for b in range(U.rows):
            c = b ^ flip
            u = U[c, b]
            if u:
                e = phase(c)
                if e % 2:
                    ys.append((e, u))
                else:
                    tot = tot + (u if e == 0 else -u)
        if ys:
            for e, u in ys:
                tot = tot + u * _ipow(k, e)
        out[x] = tot * scale
    return out


def pauli_reconstruct(coeffs: dict, k: int) -> CycMatrix:
    keys = [x for x in coeffs]
    nq = len(keys[0]) // 2
    dim = 1 << nq
    z = CycNum.zero(k)
    M = [[z] * dim for _ in range(dim)]
    for x, a in coeffs.items():
        if not a:
            continue
        flip, phase = _pauli_action(x, nq)
        for b in range(dim):
            M[b ^ flip][b] = M[b ^ flip][b] + a * _ipow(k, phase(b))
    return CycMatrix(k, M)


# ---------------------------------------------------------------- spectra


@dataclass
class SpectralReport:
    lambda_min: float
    gamma: float
    sigma_1: float
    tolerance: float
    lambda_max: float = float("nan")


def report_from_eigs(w, tol: float = 1e-9) -> SpectralReport:
    w = np.sort(np.asarray(w, dtype=float))
    pos = w[w > tol]
    return SpectralReport(
        lambda_min=float(w[0]),
        gamma=float(pos[0]) if pos.size else float("inf"),
        sigma_1=float(np.min(np.abs(w))),
        tolerance=tol,
        lambda_max=float(w[-1]),
    )


def spectral_report(A: CycMatrix, tol: float = 1e-9) -> SpectralReport:
    if not is_hermitian(A):
        raise ValueError("spectral_report needs a hermitian matrix")
    return report_from_eigs(np.linalg.eigvalsh(A.to_numpy()), tol)


def sparse_eig_extremes(M, dense_cap: int = 4096):
    """(lambda_min, lambda_max) of a hermitian scipy sparse matrix.

    The matrix is split into connected components of its sparsity graph;
    each block is diagonalised densely, or by Lanczos if it is large.
    """
    import scipy.sparse as sp
    from scipy.sparse.csgraph import connected_components
    from scipy.sparse.linalg import eigsh

    M = sp.csr_matrix(M)
    ncomp, labels = connected_components(abs(M) > 0, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    lo, hi = np.inf, -np.inf
    for c in range(ncomp):
        idx = order[bounds[c]:bounds[c + 1]]
        block = M[idx][:, idx]
        if len(idx) <= dense_cap:
            w = np.linalg.eigvalsh(block.toarray())
            lo, hi = min(lo, w[0]), max(hi, w[-1])
        else:
            lo = min(lo, eigsh(block, k=1, which="SA", return_eigenvectors=False)[0])
            hi = max(hi, eigsh(block, k=1, which="LA", return_eigenvectors=False)[0])
    return float(lo), float(hi)
