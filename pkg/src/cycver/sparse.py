"""Sparse cyclotomic Hamiltonians as sums of 1-sparse pieces and signed unitaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cyclotomic import CycNum, FieldSpec
from .linalg import CycMatrix, norm2


@dataclass
class SparseHam:
    """H = H' / h with H' given by integral triplets (row, col) -> CycNum."""

    k: int
    n: int  # qubits
    d: int  # declared sparsity
    h: int = 1
    entries: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def validate(self):
        if self.h <= 0:
            raise ValueError("common denominator h must be positive")
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise ValueError(f"entry ({i}, {j}) out of range")
            if v.k != self.k:
                raise ValueError("entry field mismatch")
            if v.den != 1:
                raise ValueError(f"entry ({i}, {j}) is not integral; scale it into h")
            if self.entries.get((j, i), CycNum.zero(self.k)) != v.conj():
                raise ValueError(f"not hermitian at ({i}, {j})")
        rows, cols = {}, {}
        for (i, j), v in self.entries.items():
            if v:
                rows[i] = rows.get(i, 0) + 1
                cols[j] = cols.get(j, 0) + 1
        deg = max(list(rows.values()) + list(cols.values()) + [0])
        if deg > self.d:
            raise ValueError(f"degree {deg} exceeds declared sparsity {self.d}")
        return self

    def numerator(self) -> CycMatrix:
        z = CycNum.zero(self.k)
        M = [[z] * self.dim for _ in range(self.dim)]
        for (i, j), v in self.entries.items():
            M[i][j] = v
        return CycMatrix(self.k, M)

    def matrix(self) -> CycMatrix:
        return self.numerator().scale(Fraction(1, self.h))

    def lift(self) -> CycMatrix:
        """X (x) H' with the new qubit most significant."""
        N = self.dim
        z = CycNum.zero(self.k)
        M = [[z] * (2 * N) for _ in range(2 * N)]
        for (i, j), v in self.entries.items():
            M[i][N + j] = v
            M[N + i][j] = v
        return CycMatrix(self.k, M)

    @classmethod
    def from_matrix(cls, M: CycMatrix, d: int | None = None, h: int = 1):
        from math import lcm

        n = M.rows.bit_length() - 1
        den = 1
        for e in M.entries():
            den = lcm(den, e.den)
        h = h * den
        ent = {}
        for i in range(M.rows):
            for j in range(M.cols):
                if M[i, j]:
                    ent[(i, j)] = M[i, j] * den
        if d is None:
            d = max([sum(1 for j in range(M.cols) if M[i, j]) for i in range(M.rows)] + [1])
        return cls(M.k, n, d, h, ent)


@dataclass
class OneSparsePiece:
    dim: int
    k: int
    entries: dict  # row -> (col, value)
    hermitian: bool = True

    def matrix(self) -> CycMatrix:
        z = CycNum.zero(self.k)
        M = [[z] * self.dim for _ in range(self.dim)]
        for i, (j, v) in self.entries.items():
            M[i][j] = v
        return CycMatrix(self.k, M)

    def check(self) -> bool:
        cols = [j for j, _ in self.entries.values()]
        if len(set(cols)) != len(cols):
            return False
        if self.hermitian:
            for i, (j, v) in self.entries.items():
                back = self.entries.get(j)
                if back is None or back[0] != i or back[1] != v.conj():
                    return False
        return True


def split_d_sparse(H: SparseHam, d: int | None = None):
    """1-sparse hermitian pieces summing to the bipartite lift of H'.

    Edges (i, j) of the lift are coloured greedily in sorted order; a colour
    class is a matching, hence a 1-sparse piece.
    """
    d = H.d if d is None else d
    H.validate()
    if d < H.d:
        H = SparseHam(H.k, H.n, d, H.h, H.entries).validate()
    N = H.dim
    left, right = {}, {}
    colours = {}
    for (i, j) in sorted(e for e, v in H.entries.items() if v):
        used = left.get(i, set()) | right.get(j, set())
        c = 0
        while c in used:
            c += 1
        left.setdefault(i, set()).add(c)
        right.setdefault(j, set()).add(c)
        colours.setdefault(c, []).append((i, j))
    pieces = []
    for c in sorted(colours):
        ent = {}
        for i, j in colours[c]:
            v = H.entries[(i, j)]
            ent[i] = (N + j, v)
            ent[N + j] = (i, v.conj())
        pieces.append(OneSparsePiece(2 * N, H.k, ent))
    if len(pieces) > max(1, d * d):
        raise AssertionError("colouring used more than d^2 colours")
    return pieces


@dataclass
class UnitaryPiece:
    kind: str  # "C" or "D"
    m: int
    l: int
    sign: int
    dim: int
    k: int
    entries: dict  # row -> (col, phase)
    weight: Fraction

    @property
    def label(self) -> str:
        return f"{self.kind}({self.m},{self.l},{'+' if self.sign > 0 else '-'})"

    def matrix(self) -> CycMatrix:
        return OneSparsePiece(self.dim, self.k, self.entries, False).matrix()

    def is_unitary(self) -> bool:
        """Exact: a permutation pattern whose entries all have modulus one."""
        if sorted(self.entries) != list(range(self.dim)):
            return False
        cols = sorted(j for j, _ in self.entries.values())
        if cols != list(range(self.dim)):
            return False
        return all(v.abs2() == 1 for _, v in self.entries.values())

    def apply(self, vec):
        z = CycNum.zero(self.k)
        out = [z] * self.dim
        for i, (j, v) in self.entries.items():
            if vec[j]:
                out[i] = v * vec[j]
        return out


def _pairs(P: OneSparsePiece):
    """Partner index j_i of every row (i itself for empty rows)."""
    return {i: P.entries[i][0] if i in P.entries else i for i in range(P.dim)}


def bit_split(P: OneSparsePiece, L: int | None = None):
    """The signed single-power matrices C^{m,l} (off-diagonal) and D^{m,l} (diagonal).

    Returns (L, [(kind, m, l, entries)]) with empty matrices omitted; the sum
    over l of 2^l times the listed matrices reconstructs P.
    """
    if not P.check():
        raise ValueError("piece is not 1-sparse hermitian")
    k = P.k
    d = FieldSpec(k).d
    for i, (j, v) in P.entries.items():
        if v.den != 1:
            raise ValueError("piece entries must be integral")
    need = max([abs(c).bit_length() for _, v in P.entries.values() for c in v.num] + [1])
    if L is None:
        L = need
    elif need > L:
        raise ValueError(f"coefficients need {need} bits, more than L={L}")
    out = []
    for l in range(L):
        for kind in ("C", "D"):
            for m in range(d):
                ent = {}
                for i, (j, v) in P.entries.items():
                    if (kind == "D") != (i == j) or (kind == "C" and i > j):
                        continue
                    c = v.num[m]
                    if (abs(c) >> l) & 1:
                        s = 1 if c > 0 else -1
                        ph = CycNum.zeta_power(k, m) * s
                        ent[i] = (j, ph)
                        if kind == "C":
                            ent[j] = (i, ph.conj())
                if ent:
                    out.append((kind, m, l, ent))
    return L, out


def one_sparse_to_unitaries(P: OneSparsePiece, k: int | None = None, L: int | None = None):
    """Unitaries U with weights 2^(l-1) summing exactly to P.

    Each C^{m,l} / D^{m,l} becomes a +/- pair by filling its empty rows with
    +1 or -1 on the pattern of P (the diagonal for rows P leaves empty).
    """
    if k is not None and k != P.k:
        raise ValueError("field mismatch")
    if not P.check():
        raise ValueError("piece is not 1-sparse hermitian")
    L, parts = bit_split(P, L)
    partner = _pairs(P)
    one = CycNum.one(P.k)
    out = []
    for kind, m, l, ent in parts:
        for sign in (1, -1):
            full = {}
            for i in range(P.dim):
                if i in ent:
                    full[i] = ent[i]
                elif kind == "C":
                    full[i] = (partner[i], one * sign)
                else:
                    full[i] = (i, one * sign)
            out.append(UnitaryPiece(kind, m, l, sign, P.dim, P.k, full, Fraction(1 << l, 2)))
    if len(out) > L * 2 ** (P.k + 1):
        raise AssertionError("more unitaries than the bound allows")
    return out


def reconstruct(pieces) -> CycMatrix:
    M = None
    for u in pieces:
        t = u.matrix().scale(u.weight)
        M = t if M is None else M + t
    return M


@dataclass
class EshResult:
    probability: CycNum  # rejection probability given a successful ancilla preparation
    prep_probability: CycNum
    ancilla_qubits: int
    terms: int
    eta: Fraction  # probability = eta * ||H' psi||^2 / ||psi||^2


def esh_reject_probability(H: SparseHam, psi) -> EshResult:
    """Exact rejection probability of the LCU verifier that tries to apply H.

    The ancilla register holds sum_t a_t |t> with a_t = 2^l for the unitary
    U_t of bit level l; controlled U_t is applied and the ancilla is measured
    in the Hadamard basis, rejecting on outcome 0.  The branch vector is
    2^(-s/2) sum_t a_t U_t psi / ||a||, i.e. the lift of 2 H' applied to psi.
    """
    from .statesim import SimState, prepare_integer_state

    vec = list(psi.amps) if isinstance(psi, SimState) else list(psi)
    N = H.dim
    if len(vec) == N:
        vec = vec + [CycNum.zero(H.k)] * N
    if len(vec) != 2 * N:
        raise ValueError(f"state dimension {len(vec)} does not match {N} or its lift {2 * N}")
    if vec[0].k != H.k:
        raise ValueError("state field does not match Hamiltonian")
    unitaries = [u for p in split_d_sparse(H) for u in one_sparse_to_unitaries(p)]
    if not unitaries:
        z = CycNum.zero(H.k)
        return EshResult(z, CycNum.one(H.k), 0, 0, Fraction(0))
    amps = [CycNum.rational(H.k, u.weight * 2) for u in unitaries]
    anc, rec = prepare_integer_state(amps)
    s = anc.nqubits
    z = CycNum.zero(H.k)
    branch = [z] * (2 * N)
    for a, u in zip(amps, unitaries):
        uv = u.apply(vec)
        branch = [b + a * x for b, x in zip(branch, uv)]
    a2 = sum(a.to_fraction() ** 2 for a in amps)
    nrm = norm2(vec)
    if nrm.is_zero():
        raise ValueError("zero state")
    prob = norm2(branch) / nrm * Fraction(1, (1 << s) * a2)
    # branch = lift(2 H') psi, so the prefactor on ||H' psi||^2 is 4 / (2^s |a|^2)
    eta = Fraction(4, (1 << s) * a2)
    return EshResult(prob, rec.probability, s, len(unitaries), eta)
