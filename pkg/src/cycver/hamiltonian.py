"""Circuit-to-Hamiltonian gadgets with exactly verified nullspaces.

Covers the one-hot clock, the split gadget, single-qubit and CNOT gate
gadgets, the assembled 2-local Hamiltonian, the projection sandwich
and the 4-local G2 quantum SAT construction built from qu-5-it clock sites.

Conventions: qubit 0 is the most significant bit.  Gadget builders take
global qubit labels so they can be placed inside a larger register.
Kernel vectors are stored unnormalized with integral amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cyclotomic import CycNum, embed, sqrt2
from .linalg import (
    CycMatrix,
    is_hermitian,
    is_psd_on_subspace,
    is_unitary,
    kernel,
    rank,
    sparse_eig_extremes,
    vec_is_zero,
)
from .statesim import Circuit, gate_matrix

DENSE_CAP = 1 << 12


# ---------------------------------------------------------------- instances


class _TermOp:
    """Precomputed index arithmetic for one local term."""

    def __init__(self, n, qubits, M):
        m = len(qubits)
        self.qubits = qubits
        self.M = M
        self.shifts = [n - 1 - q for q in qubits]
        self.spread = [sum(((r >> (m - 1 - i)) & 1) << self.shifts[i] for i in range(m)) for r in range(1 << m)]
        self.mask = self.spread[-1]
        self.cols = [[(r, M[r, c]) for r in range(M.rows) if M[r, c]] for c in range(M.cols)]
        self.m = m

    def local(self, idx):
        c = 0
        for i, s in enumerate(self.shifts):
            c |= ((idx >> s) & 1) << (self.m - 1 - i)
        return c

    def apply(self, vec, out):
        for idx, a in vec.items():
            if not a:
                continue
            base = idx & ~self.mask
            for r, v in self.cols[self.local(idx)]:
                j = base | self.spread[r]
                prev = out.get(j)
                out[j] = v * a if prev is None else prev + v * a
        return out


class HamInstance:
    """Sum of local terms H_S on subsets S of n qubits."""

    def __init__(self, n: int, terms, k: int, kind: str = "kLH", names=None):
        self.n = n
        self.k = k
        self.kind = kind
        self.names = list(names) if names is not None else [None] * len(terms)
        self.terms = []
        for S, M in terms:
            S = tuple(S)
            if len(set(S)) != len(S) or any(not 0 <= q < n for q in S):
                raise ValueError(f"bad qubit subset {S} for n={n}")
            if M.rows != 1 << len(S) or M.cols != M.rows:
                raise ValueError(f"term on {S} has wrong size {M.shape}")
            if M.k != k:
                M = M.lift(k)
            self.terms.append((S, M))
        self._ops = None

    @property
    def locality(self) -> int:
        return max((len(S) for S, _ in self.terms), default=0)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def ops(self):
        if self._ops is None:
            self._ops = [_TermOp(self.n, S, M) for S, M in self.terms]
        return self._ops

    def __add__(self, other: "HamInstance") -> "HamInstance":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        k = max(self.k, other.k)
        return HamInstance(self.n, self.terms + other.terms, k, self.kind, self.names + other.names)

    def scale(self, c) -> "HamInstance":
        return HamInstance(self.n, [(S, M.scale(c)) for S, M in self.terms], self.k, self.kind, self.names)

    # exact actions
    def apply_term(self, i: int, vec: dict) -> dict:
        return _prune(self.ops()[i].apply(vec, {}))

    def apply(self, vec: dict) -> dict:
        out = {}
        for op in self.ops():
            op.apply(vec, out)
        return _prune(out)

    def annihilates(self, vec: dict, termwise: bool = False) -> bool:
        if termwise:
            return all(not self.apply_term(i, vec) for i in range(len(self.terms)))
        return not self.apply(vec)

    def expectation(self, vec: dict) -> CycNum:
        hv = self.apply(vec)
        z = CycNum.zero(self.k)
        return sum((vec[i].conj() * a for i, a in hv.items() if i in vec), z)

    def matrix(self) -> CycMatrix:
        if self.dim > DENSE_CAP:
            raise ValueError(f"dimension {self.dim} too large for a dense exact matrix")
        return self.restrict(range(self.dim))

    def restrict(self, indices, check_invariant: bool = True) -> CycMatrix:
        """Exact matrix of H on the span of the given computational basis states."""
        indices = list(indices)
        pos = {b: i for i, b in enumerate(indices)}
        z = CycNum.zero(self.k)
        cols = []
        for b in indices:
            hv = self.apply({b: CycNum.one(self.k)})
            col = [z] * len(indices)
            for j, a in hv.items():
                if j not in pos:
                    if check_invariant:
                        raise ValueError(f"subspace not invariant: basis {b} maps to {j}")
                    continue
                col[pos[j]] = a
            cols.append(col)
        return CycMatrix(self.k, [list(r) for r in zip(*cols)])

    # checks
    def terms_hermitian(self) -> bool:
        return all(is_hermitian(M) for _, M in self.terms)

    def term_norms(self):
        return [float(np.linalg.norm(M.to_numpy(), 2)) for _, M in self.terms]

    def check_norms(self, tol: float = 1e-9) -> bool:
        return all(x <= 1 + tol for x in self.term_norms())

    def terms_psd(self, tol: float = 1e-9) -> bool:
        return all(is_hermitian(M) and np.linalg.eigvalsh(M.to_numpy())[0] >= -tol for _, M in self.terms)

    def norm_bound(self) -> float:
        """Triangle-inequality upper bound on ||H||."""
        return float(sum(self.term_norms()))

    def is_diagonal(self) -> bool:
        return all(all(r == c or not M[r, c] for r in range(M.rows) for c in range(M.cols)) for _, M in self.terms)

    def diagonal(self, indices):
        """Exact diagonal entries at the given indices (diagonal instances only)."""
        z = CycNum.zero(self.k)
        out = []
        for b in indices:
            d = z
            for op in self.ops():
                c = op.local(b)
                d = d + op.M[c, c]
            out.append(d)
        return out

    # floating
    def to_scipy(self, indices=None):
        """Complex sparse matrix on the given sorted basis indices (default: all)."""
        import scipy.sparse as sp

        idx = np.arange(self.dim, dtype=np.int64) if indices is None else np.asarray(indices, dtype=np.int64)
        size = len(idx)
        rows, cols, vals = [], [], []
        for op in self.ops():
            loc = np.zeros(size, dtype=np.int64)
            for i, s in enumerate(op.shifts):
                loc |= ((idx >> s) & 1) << (op.m - 1 - i)
            base = idx & ~op.mask
            Mf = op.M.to_numpy()
            for c in range(op.M.cols):
                sel = np.nonzero(loc == c)[0]
                if not sel.size:
                    continue
                for r, _ in op.cols[c]:
                    tgt = base[sel] | op.spread[r]
                    p = np.searchsorted(idx, tgt)
                    p = np.minimum(p, size - 1)
                    ok = idx[p] == tgt
                    rows.append(p[ok])
                    cols.append(sel[ok])
                    vals.append(np.full(int(ok.sum()), Mf[r, c]))
        if not rows:
            return sp.csr_matrix((size, size), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
        )


def _prune(vec: dict) -> dict:
    return {i: a for i, a in vec.items() if a}


# ---------------------------------------------------------------- small helpers


def _num(k, bits: str) -> CycMatrix:
    """Projector |bits><bits|."""
    dim = 1 << len(bits)
    idx = int(bits, 2)
    return CycMatrix.diag(k, [CycNum.one(k) if i == idx else CycNum.zero(k) for i in range(dim)])


def _ketbra(k, out_bits: str, in_bits: str, coeff=1) -> CycMatrix:
    dim = 1 << len(out_bits)
    z = CycNum.zero(k)
    rows = [[z] * dim for _ in range(dim)]
    rows[int(out_bits, 2)][int(in_bits, 2)] = CycNum.rational(k, 1) * coeff
    return CycMatrix(k, rows)


def _hop(k, sign) -> CycMatrix:
    """sign * (|10><01| + |01><10|)."""
    return _ketbra(k, "10", "01", sign) + _ketbra(k, "01", "10", sign)


def projector(vec) -> CycMatrix:
    """|v><v| / <v|v> for a list of field elements."""
    n2 = sum((a.abs2() for a in vec), CycNum.zero(vec[0].k))
    return CycMatrix.outer(vec, vec).scale(n2.inverse())


def one_hot_index(nc: int, t: int) -> int:
    return 1 << (nc - 1 - t)


def clock_basis(na: int, nc: int):
    """Indices |a>|t^> ordered a-major, for na register qubits and nc clock qubits."""
    return [(a << nc) | one_hot_index(nc, t) for a in range(1 << na) for t in range(nc)]


def _embed_restricted(vec, na: int, nc: int, k: int) -> dict:
    """Restricted (a-major, clock-minor) vector to a sparse full-space vector."""
    out = {}
    for pos, a in enumerate(vec):
        if a:
            out[((pos // nc) << nc) | one_hot_index(nc, pos % nc)] = a
    return out


# ---------------------------------------------------------------- clock


def hclock_terms(T: int, clock, k: int = 1):
    four_t = CycNum.rational(k, 4 * T)
    terms = []
    for i, j in combinations(clock, 2):
        terms.append(((i, j), _num(k, "11").scale(four_t)))
    for q in clock:
        terms.append(((q,), CycMatrix.diag(k, [CycNum.one(k), CycNum.rational(k, -T)])))
    return terms


def build_hclock(T: int, k: int = 1) -> HamInstance:
    if T < 1:
        raise ValueError("T must be >= 1")
    return HamInstance(T + 1, hclock_terms(T, list(range(T + 1)), k), k, "kELH")


def clock_states(T: int):
    return [one_hot_index(T + 1, t) for t in range(T + 1)]


# ---------------------------------------------------------------- split and gate gadgets


def _check_projectors(P0: CycMatrix, P1: CycMatrix):
    k = P0.k
    I = CycMatrix.identity(k, P0.rows)
    for P in (P0, P1):
        if not is_hermitian(P) or P @ P != P:
            raise ValueError("eigen-projector is not an orthogonal projector")
    if P0 @ P1 != CycMatrix.zeros(k, P0.rows) or P0 + P1 != I:
        raise ValueError("projectors are not orthogonal and complete")


def split_projectors(psi0, psi1):
    """Projectors for a pair of orthogonal (not necessarily normalized) vectors."""
    ip = sum((a.conj() * b for a, b in zip(psi0, psi1)), CycNum.zero(psi0[0].k))
    if not ip.is_zero():
        raise ValueError("split vectors are not orthogonal")
    return projector(psi0), projector(psi1)


def hsplit_terms(P0, P1, A, c0, c1, c2):
    k = P0.k
    n1 = _num(k, "1")
    return [
        ((A, c1), P1.kron(n1)),
        ((A, c2), P0.kron(n1)),
        ((c0,), n1),
        ((c1,), n1),
        ((c2,), n1),
        ((c0, c1), _hop(k, -1)),
        ((c0, c2), _hop(k, -1)),
        ((c1, c2), _hop(k, 1)),
    ]


def hij_terms(lam: CycNum, ci: int, cj: int):
    """|10><10| + |01><01| - conj(lam)|10><01| - lam|01><10| on (ci, cj)."""
    k = lam.k
    z, o = CycNum.zero(k), CycNum.one(k)
    M = CycMatrix(k, [[z, z, z, z], [z, o, -lam, z], [z, -lam.conj(), o, z], [z, z, z, z]])
    return [((ci, cj), M)]


def build_hsplit(psi0=None, psi1=None, *, projectors=None, k: int | None = None) -> HamInstance:
    """Split gadget on [A, C0, C1, C2] (4 qubits)."""
    if projectors is None:
        P0, P1 = split_projectors(psi0, psi1)
    else:
        P0, P1 = projectors
    _check_projectors(P0, P1)
    return HamInstance(4, hsplit_terms(P0, P1, 0, 1, 2, 3), P0.k, "kELH")


@dataclass(frozen=True)
class EigenData:
    """Single-qubit gate as orthogonal eigen-projectors with eigenvalues."""

    P0: CycMatrix
    P1: CycMatrix
    lam0: CycNum
    lam1: CycNum

    @property
    def k(self):
        return self.P0.k

    def unitary(self) -> CycMatrix:
        return self.P0.scale(self.lam0) + self.P1.scale(self.lam1)


def gate_eigendata(name: str, k: int) -> EigenData:
    one = CycNum.one(k)
    z0 = CycMatrix.diag(k, [one, CycNum.zero(k)])
    z1 = CycMatrix.diag(k, [CycNum.zero(k), one])
    I = CycMatrix.identity(k, 2)
    if name in ("I", "T", "S", "Z"):
        lam = {"I": one, "Z": -one}.get(name)
        if name == "T":
            lam = CycNum.zeta_power(k, 1)
        elif name == "S":
            if k < 2:
                raise ValueError("S needs k >= 2")
            lam = CycNum.zeta_power(k, 2 ** (k - 2))
        return EigenData(z0, z1, one, lam)
    if name in ("H", "X"):
        if name == "H":
            if k < 3:
                raise ValueError("H eigen-projectors need sqrt(2), i.e. k >= 3")
            G = CycMatrix.from_rationals([[1, 1], [1, -1]], k).scale(sqrt2(k) / 2)
        else:
            G = CycMatrix.from_rationals([[0, 1], [1, 0]], k)
        half = Fraction(1, 2)
        return EigenData((I + G).scale(half), (I - G).scale(half), one, -one)
    raise ValueError(f"no eigen-data for gate {name!r}")


@dataclass
class GadgetLayout:
    """Standalone layout: register qubits first, then the gadget clock."""

    name: str
    ham: HamInstance
    na: int
    nc: int
    branches: list  # (register projector, {clock offset: coefficient})
    u: int  # first clock offset
    v: int  # last clock offset
    unitary: CycMatrix


def _single_gadget_terms(ed: EigenData, A: int, C):
    terms = hsplit_terms(ed.P0, ed.P1, A, C[0], C[1], C[2])
    terms += hsplit_terms(ed.P0, ed.P1, A, C[5], C[3], C[4])
    terms += hij_terms(ed.lam0, C[1], C[3])
    terms += hij_terms(ed.lam1, C[2], C[4])
    return terms


def _single_branches(ed: EigenData):
    one = CycNum.one(ed.k)
    return [
        (ed.P0, {0: one, 1: one, 3: ed.lam0, 5: ed.lam0}),
        (ed.P1, {0: one, 2: one, 4: ed.lam1, 5: ed.lam1}),
    ]


def build_gate_gadget(ed: EigenData, name: str = "U") -> GadgetLayout:
    """H_U on [A, C0..C5]."""
    _check_projectors(ed.P0, ed.P1)
    for lam in (ed.lam0, ed.lam1):
        if lam.abs2() != 1:
            raise ValueError("eigenvalues must have modulus 1")
    ham = HamInstance(7, _single_gadget_terms(ed, 0, list(range(1, 7))), ed.k, "kELH")
    return GadgetLayout(name, ham, 1, 6, _single_branches(ed), 0, 5, ed.unitary())


def _cx_projectors(k):
    one, z = CycNum.one(k), CycNum.zero(k)
    p0 = CycMatrix.diag(k, [one, z])
    p1 = CycMatrix.diag(k, [z, one])
    h = Fraction(1, 2)
    pp = CycMatrix.from_rationals([[h, h], [h, h]], k)
    pm = CycMatrix.from_rationals([[h, -h], [-h, h]], k)
    return p0, p1, pp, pm


def _cx_terms(k, A0, A1, C):
    p0, p1, pp, pm = _cx_projectors(k)
    one = CycNum.one(k)
    terms = hsplit_terms(p0, p1, A0, C[0], C[1], C[2])
    terms += hsplit_terms(pp, pm, A1, C[2], C[4], C[5])
    terms += hsplit_terms(pp, pm, A1, C[10], C[7], C[8])
    terms += hsplit_terms(p0, p1, A0, C[11], C[9], C[10])
    for i, j, lam in ((1, 3, one), (3, 6, one), (6, 9, one), (4, 7, one), (5, 8, -one)):
        terms += hij_terms(lam, C[i], C[j])
    terms.append(((A0, C[3]), _num(k, "11")))
    terms.append(((A0, C[6]), _num(k, "11")))
    return terms


def _cx_branches(k):
    p0, p1, pp, pm = _cx_projectors(k)
    one = CycNum.one(k)
    I = CycMatrix.identity(k, 2)
    path0 = {t: one for t in (0, 1, 3, 6, 9, 11)}
    path_p = {t: one for t in (0, 2, 4, 7, 10, 11)}
    path_m = {0: one, 2: one, 5: one, 8: -one, 10: -one, 11: -one}
    return [(p0.kron(I), path0), (p1.kron(pp), path_p), (p1.kron(pm), path_m)]


def build_cx_gadget(k: int = 1) -> GadgetLayout:
    """H_CX on [A0, A1, C0..C11]."""
    ham = HamInstance(14, _cx_terms(k, 0, 1, list(range(2, 14))), k, "kELH")
    cx, _ = gate_matrix("CX", k)
    return GadgetLayout("CX", ham, 2, 12, _cx_branches(k), 0, 11, cx)


def cx_kernel_states(k: int = 1):
    """The four kernel states |a>|+/->(path) as sparse full-space vectors, keyed 'ab'."""
    one = CycNum.one(k)
    br = _cx_branches(k)
    vecs = {}
    for a in (0, 1):
        for s, sign in (("+", 1), ("-", -1)):
            reg = {(a << 1) | 0: one, (a << 1) | 1: one * sign}
            path = br[0][1] if a == 0 else (br[1][1] if sign == 1 else br[2][1])
            v = {}
            for r, ra in reg.items():
                for t, c in path.items():
                    v[(r << 12) | one_hot_index(12, t)] = ra * c
            vecs[f"{a}{s}"] = v
    return vecs


def layout_L(g: GadgetLayout):
    """L as a list of restricted column vectors, one per register basis input."""
    k = g.ham.k
    z = CycNum.zero(k)
    da = 1 << g.na
    cols = []
    for b in range(da):
        col = [z] * (da * g.nc)
        for P, path in g.branches:
            for a in range(da):
                pa = P[a, b]
                if pa:
                    for t, c in path.items():
                        col[a * g.nc + t] = col[a * g.nc + t] + pa * c
        cols.append(col)
    return cols


@dataclass
class GadgetReport:
    name: str
    hermitian: bool
    psd_on_clock: bool
    corank: int
    kernel: list
    checks: dict = field(default_factory=dict)
    delta: object = None

    @property
    def ok(self) -> bool:
        return self.hermitian and self.psd_on_clock and all(self.checks.values())


def verify_gadget(g: GadgetLayout, expected_corank: int | None = None) -> GadgetReport:
    """Exact corank on the clock space plus the connection checklist."""
    k = g.ham.k
    da = 1 << g.na
    basis = clock_basis(g.na, g.nc)
    R = g.ham.restrict(basis)
    herm = g.ham.terms_hermitian() and is_hermitian(R)
    psd = is_psd_on_subspace(R)
    kb = kernel(R)
    L = layout_L(g)
    checks = {}
    if expected_corank is not None:
        checks["corank"] = kb.corank == expected_corank
    # (a) the kernel is spanned by the columns of L
    checks["a_kernel_span"] = all(vec_is_zero(R.apply(c)) for c in L) and \
        rank(CycMatrix(k, [list(r) for r in zip(*L)])) == da == kb.corank
    # (b) L^dagger L = delta I
    Lm = CycMatrix(k, [list(r) for r in zip(*L)])
    G = Lm.H @ Lm
    delta = G[0, 0]
    checks["b_isometry"] = G == CycMatrix.identity(k, da).scale(delta)
    # (c) support inside the gadget registers
    checks["c_support"] = all(all(q < g.na + g.nc for q in S) for S, _ in g.ham.terms)
    # (d) 1 <= delta
    checks["d_delta"] = delta.is_rational() and delta.to_fraction() >= 1
    # (e), (f) endpoint rows
    start = CycMatrix(k, [[L[b][a * g.nc + g.u] for b in range(da)] for a in range(da)])
    end = CycMatrix(k, [[L[b][a * g.nc + g.v] for b in range(da)] for a in range(da)])
    checks["e_start_identity"] = start == CycMatrix.identity(k, da)
    checks["f_end_unitary"] = end == g.unitary and is_unitary(end)
    # kernel vectors annihilated by the unrestricted gadget
    checks["full_space_annihilation"] = all(
        g.ham.annihilates(_embed_restricted(c, g.na, g.nc, k), termwise=False) for c in L + kb.vectors
    )
    checks["clock_invariant"] = True  # restrict() raises otherwise
    return GadgetReport(g.name, herm, psd, kb.corank, kb.vectors, checks, delta)


def hsplit_report(P0, P1) -> GadgetReport:
    """Split gadget: corank 2 on the clock space with kernel psi0(0^+1^), psi1(0^+2^)."""
    ham = build_hsplit(projectors=(P0, P1))
    k = P0.k
    one = CycNum.one(k)
    g = GadgetLayout("split", ham, 1, 3, [(P0, {0: one, 1: one}), (P1, {0: one, 2: one})], 0, 0,
                     CycMatrix.identity(k, 2))
    rep = verify_gadget(g, expected_corank=2)
    # the split gadget has two endpoints, so the L endpoint checks do not apply
    rep.checks.pop("f_end_unitary")
    return rep


# ---------------------------------------------------------------- 2-local assembly


def _as_gate_list(c):
    if isinstance(c, Circuit):
        return c.k, c.qubits, c.ancillas, list(c.gates)
    raise TypeError("expected a Circuit")


@dataclass
class Assembled2Local:
    n: int  # total qubits
    nreg: int
    ancillas: int
    k: int
    clock: list  # global clock qubit labels in order
    blocks: list  # per gate: (offset into clock, GadgetLayout-like branches, targets, unitary)
    prop: HamInstance
    hin: HamInstance
    hout: HamInstance
    hclock: HamInstance
    jclock: object

    @property
    def T(self):
        return len(self.clock) - 1

    def h1(self) -> HamInstance:
        return self.prop + self.hin + self.hout

    def total(self) -> HamInstance:
        return self.h1() + self.hclock.scale(self.jclock)

    def clock_space(self):
        nc = len(self.clock)
        return [(a << nc) | one_hot_index(nc, t) for a in range(1 << self.nreg) for t in range(nc)]

    def history_state(self, alpha) -> dict:
        """Exact null vector sum_i psi_i(alpha_i) for register input alpha (dense list)."""
        k = self.k
        nc = len(self.clock)
        z = CycNum.zero(k)
        out = {}
        cur = list(alpha)
        for off, branches, targets, _ in self.blocks:
            nxt = [z] * len(cur)
            for P, path in branches:
                pa = _apply_local(cur, self.nreg, P, targets)
                last = max(path)
                for t, c in path.items():
                    for a, amp in enumerate(pa):
                        if amp:
                            key = (a << nc) | one_hot_index(nc, off + t)
                            out[key] = out.get(key, z) + amp * c
                nxt = [x + y * path[last] for x, y in zip(nxt, pa)]
            cur = nxt
        return _prune(out)

    def output_state(self, alpha):
        cur = list(alpha)
        for _, _, targets, U in self.blocks:
            cur = _apply_local(cur, self.nreg, U, targets)
        return cur


def _apply_local(vec, nq, M, targets):
    from .statesim import apply_matrix

    return apply_matrix(vec, nq, M, tuple(targets))


def default_jclock(h1_norm: float, eps: Fraction = Fraction(1, 1024)) -> int:
    """Smallest power of two exceeding 4 ||H1||^2 / eps + 2 ||H1||."""
    need = 4 * h1_norm ** 2 / float(eps) + 2 * h1_norm
    j = 1
    while j <= need:
        j *= 2
    return j


def assemble_2local(c: Circuit, jclock=None, with_in: bool = True, with_out: bool = True) -> Assembled2Local:
    k, nreg, anc, gates = _as_gate_list(c)
    sizes = []
    for name, targets in gates:
        if name == "CX":
            sizes.append(12)
        elif len(targets) == 1:
            sizes.append(6)
        else:
            raise ValueError(f"unsupported gate {name} for 2-local assembly")
    nc = sum(sizes)
    n = nreg + nc
    clock = list(range(nreg, n))
    prop_terms, blocks = [], []
    off = 0
    for (name, targets), size in zip(gates, sizes):
        C = clock[off:off + size]
        if name == "CX":
            prop_terms += _cx_terms(k, targets[0], targets[1], C)
            branches = _cx_branches(k)
            U, _ = gate_matrix("CX", k)
        else:
            ed = gate_eigendata(name, k)
            prop_terms += _single_gadget_terms(ed, targets[0], C)
            branches = _single_branches(ed)
            U = ed.unitary()
        blocks.append((off, branches, tuple(targets), U))
        if off:
            prop_terms += hij_terms(CycNum.one(k), clock[off - 1], C[0])
        off += size
    prop = HamInstance(n, prop_terms, k, "kELH")
    hin = HamInstance(n, [((a, clock[0]), _num(k, "11")) for a in range(anc)] if with_in else [], k)
    hout = HamInstance(n, [((0, clock[-1]), _num(k, "01"))] if with_out else [], k)
    hclock = HamInstance(n, hclock_terms(nc - 1, clock, k), k)
    asm = Assembled2Local(n, nreg, anc, k, clock, blocks, prop, hin, hout, hclock, None)
    if jclock is None:
        jclock = default_jclock(h1_norm(asm.h1(), clock))
    asm.jclock = CycNum.rational(k, jclock)
    return asm


# ---------------------------------------------------------------- projection bound


def _preserves_weight(ham: HamInstance, qubits) -> bool:
    qs = set(qubits)
    for S, M in ham.terms:
        pos = [i for i, q in enumerate(S) if q in qs]
        m = len(S)

        def w(x):
            return sum((x >> (m - 1 - i)) & 1 for i in pos)

        for r in range(M.rows):
            for c in range(M.cols):
                if M[r, c] and w(r) != w(c):
                    return False
    return True


def _sector_indices(sector_qubits, n, weight):
    """Sorted basis indices whose sector qubits have the given Hamming weight."""
    qs = set(sector_qubits)
    others = [q for q in range(n) if q not in qs]
    cmasks = np.array([sum(1 << (n - 1 - q) for q in combo) for combo in combinations(sector_qubits, weight)],
                      dtype=np.int64)
    omasks = np.zeros(1 << len(others), dtype=np.int64)
    for i, q in enumerate(others):
        bit = (np.arange(1 << len(others)) >> (len(others) - 1 - i)) & 1
        omasks |= bit.astype(np.int64) << (n - 1 - q)
    return np.sort((cmasks[:, None] | omasks[None, :]).ravel())


def _float_diagonal(ham: HamInstance, idx):
    out = np.zeros(len(idx))
    for op in ham.ops():
        loc = np.zeros(len(idx), dtype=np.int64)
        for i, s in enumerate(op.shifts):
            loc |= ((idx >> s) & 1) << (op.m - 1 - i)
        out += np.real(np.diag(op.M.to_numpy()))[loc]
    return out


def h1_norm(h1: HamInstance, sector_qubits=None) -> float:
    """||H1||: exact-numeric when the space is small, else the triangle bound."""
    if h1.dim <= 1 << 14:
        lo, hi = sparse_eig_extremes(h1.to_scipy())
        return max(abs(lo), abs(hi))
    return h1.norm_bound()


def _min_gap(h: HamInstance) -> float:
    """Lower bound on any nonzero diagonal value of a rational diagonal instance."""
    from math import lcm

    den = 1
    for _, M in h.terms:
        for e in M.entries():
            den = lcm(den, e.den)
    return 1.0 / den


@dataclass
class ProjectionBound:
    lower: float
    upper: float
    lambda_min: float
    h1_norm: float
    j_eff: float
    holds: bool


def projection_bound(H1: HamInstance, H2: HamInstance, J, sector_qubits=None, tol: float = 1e-9) -> ProjectionBound:
    """Evaluate lmin(H1|S) - ||H1||^2/(J' - 2||H1||) <= lmin(H1 + J H2) <= lmin(H1|S).

    S is the exact kernel of H2 and J' = J * gamma(H2) is the smallest
    eigenvalue of J H2 on the complement of S.
    """
    if H1.n != H2.n:
        raise ValueError("H1 and H2 act on different registers")
    Jf = float(embed(J).real) if isinstance(J, CycNum) else float(J)
    n = H1.n
    if not H2.is_diagonal():
        M2 = H2.matrix()
        kb = kernel(M2)
        w = np.linalg.eigvalsh(M2.to_numpy())
        gamma = float(w[w > tol][0])
        S_vecs = kb.vectors
        B = CycMatrix(H2.k, [list(r) for r in zip(*S_vecs)])
        M1 = H1.matrix()
        import scipy.linalg as sla

        lmin_s = float(sla.eigh((B.H @ M1 @ B).to_numpy(), (B.H @ B).to_numpy(), eigvals_only=True)[0])
        h1n = h1_norm(H1)
        lam = float(np.linalg.eigvalsh((M1 + M2.scale(CycNum.rational(H2.k, Fraction(Jf)))).to_numpy())[0])
    else:
        if sector_qubits is None and H1.dim > 1 << 14:
            raise ValueError("large instance: pass the clock qubits so the weight sectors can be used")
        if sector_qubits is not None:
            for h in (H1, H2):
                if not _preserves_weight(h, sector_qubits):
                    raise ValueError("terms do not preserve the sector weight")
            sectors = [_sector_indices(sector_qubits, n, w) for w in range(len(sector_qubits) + 1)]
        else:
            sectors = [np.arange(H1.dim, dtype=np.int64)]
        diags = [_float_diagonal(H2, sec) for sec in sectors]
        # candidates for the kernel of H2, confirmed exactly
        cand = sorted(int(b) for sec, dv in zip(sectors, diags) for b in sec[np.abs(dv) < 0.5 * _min_gap(H2)])
        S = [b for b, d in zip(cand, H2.diagonal(cand)) if d.is_zero()]
        nonzero = np.concatenate([dv[np.abs(dv) >= 0.5 * _min_gap(H2)] for dv in diags])
        gamma = float(nonzero.min()) if nonzero.size else float("inf")
        if not S:
            raise ValueError("H2 has trivial kernel")
        R = H1.restrict(S, check_invariant=False)
        lmin_s = float(np.linalg.eigvalsh(R.to_numpy())[0])
        h1n = h1_norm(H1)
        # lmin(H): sector by sector, skipping sectors certified above the running minimum by Weyl
        lam = np.inf
        total = H1 + H2.scale(CycNum.rational(H2.k, Fraction(Jf).limit_denominator(1 << 60)))
        for sec, dv in sorted(zip(sectors, diags), key=lambda p: p[1].min()):
            if Jf * dv.min() - h1n >= lam:
                continue
            lo, _ = sparse_eig_extremes(total.to_scipy(sec))
            lam = min(lam, lo)
    j_eff = Jf * gamma
    if not j_eff > 2 * h1n:
        raise ValueError(f"precondition J > 2||H1|| violated: J={j_eff:.6g}, ||H1||={h1n:.6g}")
    lower = lmin_s - h1n ** 2 / (j_eff - 2 * h1n)
    upper = lmin_s
    scale = max(1.0, abs(lower), abs(upper))
    holds = lower - tol * scale <= lam <= upper + tol * scale
    return ProjectionBound(lower, upper, float(lam), h1n, j_eff, holds)


# ---------------------------------------------------------------- 4-local G2 construction

LOGICAL = {"u": "1000", "a1": "0010", "a2": "0011", "a3": "0001", "d": "0100"}
ILLEGAL = ["0000", "0101", "0110", "0111", "1001", "1010", "1011", "1100", "1101", "1110", "1111"]
# within a site the alive steps are told apart by qubits 3 and 4
_ALIVE_Q34 = {"a1": "10", "a2": "11", "a3": "01"}


def _transition_term(k, bits_from: str, bits_to: str):
    """Normalized projector onto |from> - |to>."""
    dim = 1 << len(bits_from)
    z = CycNum.zero(k)
    v = [z] * dim
    v[int(bits_from, 2)] = CycNum.one(k)
    v[int(bits_to, 2)] = -CycNum.one(k)
    return projector(v)


def _step_term(k, s_from: str, s_to: str, X: CycMatrix, Y: CycMatrix, normalize=True):
    """w w^dagger with w = |s_from> x X^dagger - |s_to> x Y^dagger on (q3, q4) + register.

    Its kernel condition on clock components is X v_from = Y v_to.
    """
    m = X.rows
    z = CycNum.zero(k)
    rows = [[z] * m for _ in range(4 * m)]
    Xd, Yd = X.H, Y.H
    fi, ti = int(s_from, 2), int(s_to, 2)
    for r in range(m):
        for c in range(m):
            rows[fi * m + r][c] = Xd[r, c]
            rows[ti * m + r][c] = -Yd[r, c]
    W = CycMatrix(k, rows)
    term = W @ W.H
    if normalize:
        G = X @ X.H + Y @ Y.H
        g = G[0, 0]
        if G == CycMatrix.identity(k, m).scale(g):
            term = term.scale(g.inverse())
        else:
            term = term.scale(G.trace().inverse())
    return term


def _controlled_step(k, s_from, s_to, ctrl_value: int, normalize=True):
    """|c><c|_ctrl x h_{from,to}(I), acting on (q3, q4, ctrl)."""
    I1 = CycMatrix.identity(k, 1)
    base = _step_term(k, s_from, s_to, I1, I1, normalize)
    P = _num(k, str(ctrl_value))
    return base.kron(P)


def qsat4_gadget_terms(name: str, k: int, site, targets, normalize=True):
    """Terms of one gate gadget; site = (q1, q2, q3, q4) global labels."""
    q3, q4 = site[2], site[3]
    a1, a2, a3 = _ALIVE_Q34["a1"], _ALIVE_Q34["a2"], _ALIVE_Q34["a3"]
    I2 = CycMatrix.identity(k, 2)
    if name in ("X", "CX"):
        U, _ = gate_matrix(name, k)
        Im = CycMatrix.identity(k, U.rows)
        return [
            ((q3, q4) + tuple(targets), _step_term(k, a1, a2, U, Im, normalize)),
            ((q3, q4) + tuple(targets), _step_term(k, a2, a3, Im, Im, normalize)),
        ]
    if name == "HH":
        Hint = CycMatrix.from_rationals([[1, 1], [1, -1]], k)
        # v2 = (H / sqrt2) v1 on the first target, v3 = (sqrt2 H) v2 on the second
        return [
            ((q3, q4, targets[0]), _step_term(k, a1, a2, Hint.scale(Fraction(1, 2)), I2, normalize)),
            ((q3, q4, targets[1]), _step_term(k, a2, a3, Hint, I2, normalize)),
        ]
    if name == "CCX":
        CX, _ = gate_matrix("CX", k)
        I4 = CycMatrix.identity(k, 4)
        return [
            ((q3, q4, targets[1], targets[2]), _step_term(k, a1, a2, CX, I4, normalize)),
            ((q3, q4, targets[0]), _controlled_step(k, a1, a3, 0, normalize)),
            ((q3, q4, targets[0]), _controlled_step(k, a2, a3, 1, normalize)),
        ]
    raise ValueError(f"unsupported gate {name} for the 4-local construction")


def qsat4_gadget_steps(name: str, k: int, nreg: int, targets, v1):
    """Register components at a2 and a3 of the gadget's kernel, given a1."""
    if name in ("X", "CX"):
        U, _ = gate_matrix(name, k)
        v2 = _apply_local(v1, nreg, U, targets)
        return v2, v2
    if name == "HH":
        Hint = CycMatrix.from_rationals([[1, 1], [1, -1]], k)
        v2 = _apply_local(v1, nreg, Hint.scale(Fraction(1, 2)), targets[:1])
        v3 = _apply_local(v2, nreg, Hint, targets[1:])
        return v2, v3
    if name == "CCX":
        CX, _ = gate_matrix("CX", k)
        CCX, _ = gate_matrix("CCX", k)
        return _apply_local(v1, nreg, CX, targets[1:]), _apply_local(v1, nreg, CCX, targets)
    raise ValueError(f"unsupported gate {name}")


@dataclass
class Qsat4Instance:
    ham: HamInstance
    nreg: int
    ancillas: int
    gates: list
    k: int

    @property
    def sites(self):
        return len(self.gates)

    def site_qubits(self, j):
        b = self.nreg + 4 * j
        return (b, b + 1, b + 2, b + 3)

    def clock_configs(self):
        """Bit patterns (over all site qubits) of the 4G+1 legal clock states."""
        G = self.sites
        cfgs = ["".join(LOGICAL["u"] for _ in range(G))]
        for j in range(G):
            for p in ("a1", "a2", "a3", "d"):
                cfgs.append("".join(LOGICAL["d" if i < j else (p if i == j else "u")] for i in range(G)))
        return cfgs

    def register_history(self, x):
        """Register components at each clock state for register input x."""
        comps = [list(x)]
        cur = list(x)
        for name, targets in self.gates:
            v2, v3 = qsat4_gadget_steps(name, self.k, self.nreg, targets, cur)
            comps += [cur, v2, v3, v3]
            cur = v3
        return comps

    def history_state(self, x) -> dict:
        nc = 4 * self.sites
        out = {}
        for cfg, comp in zip(self.clock_configs(), self.register_history(x)):
            cb = int(cfg, 2)
            for a, amp in enumerate(comp):
                if amp:
                    out[(a << nc) | cb] = amp
        return out


def build_qsat4_g2(c: Circuit, normalize: bool = True, with_in: bool = True, with_out: bool = True) -> Qsat4Instance:
    """4-local PSD rational instance for a G2 circuit (one clock site per gate)."""
    k = c.k
    nreg, anc = c.qubits, c.ancillas
    gates = list(c.gates)
    for name, _ in gates:
        if name not in ("X", "CX", "CCX", "HH"):
            raise ValueError(f"unsupported gate {name} for the 4-local construction")
    G = len(gates)
    if G == 0:
        raise ValueError("empty circuit")
    n = nreg + 4 * G
    terms, names = [], []
    site = [tuple(nreg + 4 * j + i for i in range(4)) for j in range(G)]
    pen = CycMatrix.diag(k, [CycNum.one(k) if format(i, "04b") in ILLEGAL else CycNum.zero(k) for i in range(16)])
    for j in range(G):
        terms.append((site[j], pen))
        names.append(f"illegal[{j}]")
    for j in range(G - 1):
        terms.append(((site[j][1], site[j + 1][0]), _num(k, "00")))
        names.append(f"order[{j}]")
    terms.append((site[0], _transition_term(k, "1000", "0010")))
    names.append("start")
    for j in range(G - 1):
        terms.append(((site[j][1], site[j][2], site[j][3], site[j + 1][0]), _transition_term(k, "0011", "1001")))
        names.append(f"a3u-du[{j}]")
        qs = (site[j][1], site[j + 1][0], site[j + 1][2], site[j + 1][3])
        terms.append((qs, _transition_term(k, "1100", "1010")))
        names.append(f"du-da1[{j}]")
    terms.append(((site[-1][1], site[-1][2], site[-1][3]), _transition_term(k, "001", "100")))
    names.append("end")
    for j, (name, targets) in enumerate(gates):
        for t in qsat4_gadget_terms(name, k, site[j], targets, normalize):
            terms.append(t)
            names.append(f"{name}[{j}]")
    if with_in:
        for a in range(anc):
            terms.append(((a, site[0][0]), _num(k, "11")))
            names.append(f"in[{a}]")
    if with_out:
        terms.append(((0, site[-1][1]), _num(k, "01")))
        names.append("out")
    ham = HamInstance(n, terms, k, "kQSAT", names)
    return Qsat4Instance(ham, nreg, anc, gates, k)


def qsat4_gadget_report(name: str, k: int = 1):
    """Standalone gadget: register qubits then one site; exact kernel on the alive steps."""
    m = {"X": 1, "CX": 2, "HH": 2, "CCX": 3}[name]
    site = (m, m + 1, m + 2, m + 3)
    ham = HamInstance(m + 4, qsat4_gadget_terms(name, k, site, tuple(range(m))), k, "kQSAT")
    basis = [(a << 4) | int(LOGICAL[s], 2) for a in range(1 << m) for s in ("a1", "a2", "a3")]
    R = ham.restrict(basis)
    kb = kernel(R)
    psd = ham.terms_psd()
    rational = all(e.is_rational() for _, M in ham.terms for e in M.entries())
    return {"corank": kb.corank, "expected": 1 << m, "psd": psd, "rational": rational, "kernel": kb.vectors,
            "locality": ham.locality}
