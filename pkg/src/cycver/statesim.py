"""Exact statevector simulation with postselection.

A SimState keeps an unnormalized amplitude vector together with a
rational weight w: the physical (sub-normalized) state is sqrt(w) * amps,
so its squared norm is w * ||amps||^2.  Square roots never enter the field.
Qubit 0 is the most significant bit of a basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cyclotomic import CycNum, FieldSpec, embed, imag_unit, small_sum_bound, sqrt2
from .linalg import (
    CycMatrix,
    apply_pauli,
    norm2,
    pauli_decompose,
    pauli_matrix,
)

MAX_QUBITS = 12

# ---------------------------------------------------------------- gates

GATE_ARITY = {
    "X": 1, "Y": 1, "Z": 1, "H": 1, "T": 1, "S": 1, "Sdg": 1, "wH": 1,
    "CX": 2, "CZ": 2, "CS": 2, "CSdg": 2, "HH": 2,
    "CCX": 3, "CCZ": 3,
}


def _ints(k, rows):
    return CycMatrix.from_rationals(rows, k)


def _perm_matrix(k, dim, f):
    z, o = CycNum.zero(k), CycNum.one(k)
    return CycMatrix(k, [[o if f(c) == r else z for c in range(dim)] for r in range(dim)])


def gate_matrix(name: str, k: int):
    """(matrix, weight) with the physical gate equal to sqrt(weight) * matrix."""
    one = CycNum.one(k)
    if name == "X":
        return _ints(k, [[0, 1], [1, 0]]), Fraction(1)
    if name == "Z":
        return _ints(k, [[1, 0], [0, -1]]), Fraction(1)
    if name == "Y":
        i = imag_unit(k)
        return CycMatrix(k, [[0, -i], [i, 0]]), Fraction(1)
    if name == "T":
        return CycMatrix.diag(k, [one, CycNum.zeta_power(k, 1)]), Fraction(1)
    if name in ("S", "Sdg"):
        i = imag_unit(k)
        return CycMatrix.diag(k, [one, i if name == "S" else -i]), Fraction(1)
    if name == "H":
        if k >= 3:
            return _ints(k, [[1, 1], [1, -1]]).scale(sqrt2(k) / 2), Fraction(1)
        return _ints(k, [[1, 1], [1, -1]]), Fraction(1, 2)
    if name == "wH":
        if k < 2:
            raise ValueError("wH needs k >= 2")
        w = (one + imag_unit(k)) / 2
        return _ints(k, [[1, 1], [1, -1]]).scale(w), Fraction(1)
    if name == "HH":
        h = [[1, 1], [1, -1]]
        return _ints(k, [[h[a][c] * h[b][e] for c in range(2) for e in range(2)]
                         for a in range(2) for b in range(2)]).scale(Fraction(1, 2)), Fraction(1)
    if name == "CX":
        return _perm_matrix(k, 4, lambda c: c ^ 1 if c & 2 else c), Fraction(1)
    if name == "CCX":
        return _perm_matrix(k, 8, lambda c: c ^ 1 if c & 6 == 6 else c), Fraction(1)
    if name == "CZ":
        return CycMatrix.diag(k, [one, one, one, -one]), Fraction(1)
    if name == "CCZ":
        return CycMatrix.diag(k, [one] * 7 + [-one]), Fraction(1)
    if name in ("CS", "CSdg"):
        i = imag_unit(k)
        return CycMatrix.diag(k, [one, one, one, i if name == "CS" else -i]), Fraction(1)
    raise ValueError(f"unknown gate {name!r}")


@dataclass(frozen=True)
class Gateset:
    tag: str  # G2, G4, G2K, CS or ANY
    k: int

    GENERATORS = {
        "G2": ("X", "CX", "CCX", "HH"),
        "G4": ("X", "CX", "CCX", "S", "wH"),
        "G2K": ("H", "CX", "T"),
        "CS": ("wH", "S", "CS"),
    }

    @property
    def generators(self):
        if self.tag == "ANY":
            return tuple(GATE_ARITY)
        return self.GENERATORS[self.tag]

    def allows(self, name: str) -> bool:
        return name in self.generators

    @classmethod
    def parse(cls, text: str) -> "Gateset":
        t = text.strip()
        if t == "G2":
            return cls("G2", 1)
        if t == "G4":
            return cls("G4", 2)
        if t in ("CS", "ANY"):
            return cls(t, 2 if t == "CS" else 1)
        if t.startswith("G") and t[1:].isdigit():
            m = int(t[1:])
            k = m.bit_length() - 1
            if m < 8 or 1 << k != m:
                raise ValueError(f"bad gateset {text!r}")
            return cls("G2K", k)
        raise ValueError(f"unknown gateset {text!r}")

    def __str__(self):
        if self.tag == "G2K":
            return f"G{2 ** self.k}"
        return self.tag


@dataclass
class Circuit:
    k: int
    ancillas: int
    proof_qubits: int
    gateset: Gateset
    gates: list = field(default_factory=list)

    @property
    def qubits(self) -> int:
        return self.ancillas + self.proof_qubits

    def validate(self):
        if self.gateset.k > self.k:
            raise ValueError(f"gateset {self.gateset} needs k >= {self.gateset.k}")
        for name, targets in self.gates:
            if not self.gateset.allows(name):
                raise ValueError(f"gate {name} not in gateset {self.gateset}")
            if len(targets) != GATE_ARITY[name]:
                raise ValueError(f"gate {name} takes {GATE_ARITY[name]} targets")
            _check_targets(targets, self.qubits)

    def add(self, name, *targets):
        self.gates.append((name, tuple(targets)))
        return self


def _check_targets(targets, nq):
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets not distinct: {targets}")
    for t in targets:
        if not 0 <= t < nq:
            raise ValueError(f"target {t} out of range for {nq} qubits")


# ---------------------------------------------------------------- states


@dataclass(frozen=True)
class SimState:
    k: int
    nqubits: int
    amps: tuple
    weight: Fraction = Fraction(1)

    @classmethod
    def basis(cls, k: int, nq: int, index: int = 0):
        z = CycNum.zero(k)
        amps = [z] * (1 << nq)
        amps[index] = CycNum.one(k)
        return cls(k, nq, tuple(amps))

    @classmethod
    def from_vector(cls, vec, weight=Fraction(1)):
        vec = list(vec)
        nq = len(vec).bit_length() - 1
        if 1 << nq != len(vec):
            raise ValueError("state length must be a power of two")
        return cls(vec[0].k, nq, tuple(vec), Fraction(weight))

    def norm2(self) -> CycNum:
        """Squared norm of the physical state."""
        return norm2(self.amps) * self.weight

    def kron(self, other: "SimState") -> "SimState":
        amps = tuple(a * b for a in self.amps for b in other.amps)
        return SimState(self.k, self.nqubits + other.nqubits, amps, self.weight * other.weight)

    def project(self, qubit: int, value: int) -> "SimState":
        sh = self.nqubits - 1 - qubit
        z = CycNum.zero(self.k)
        amps = tuple(a if (i >> sh) & 1 == value else z for i, a in enumerate(self.amps))
        return SimState(self.k, self.nqubits, amps, self.weight)

    def to_numpy(self):
        import numpy as np

        return np.sqrt(float(self.weight)) * np.array([embed(a) for a in self.amps])


def apply_matrix(amps, nq: int, M: CycMatrix, targets):
    """Apply a local matrix on `targets` to a dense amplitude list."""
    m = len(targets)
    if M.rows != 1 << m:
        raise ValueError("gate size does not match target count")
    _check_targets(targets, nq)
    shifts = [nq - 1 - t for t in targets]
    spread = [sum(((r >> (m - 1 - i)) & 1) << shifts[i] for i in range(m)) for r in range(1 << m)]
    mask = spread[-1]
    cols = [[(r, M[r, c]) for r in range(M.rows) if M[r, c]] for c in range(M.cols)]
    k = M.k
    z = CycNum.zero(k)
    out = [z] * len(amps)
    for idx, a in enumerate(amps):
        if not a:
            continue
        c = 0
        for i, s in enumerate(shifts):
            c |= ((idx >> s) & 1) << (m - 1 - i)
        base = idx & ~mask
        for r, v in cols[c]:
            j = base | spread[r]
            out[j] = out[j] + v * a
    return out


def apply_gate(s: SimState, gate, targets) -> SimState:
    """Apply a named gate (or a (matrix, weight) pair) to the state."""
    targets = tuple(targets)
    if isinstance(gate, str):
        M, w = gate_matrix(gate, s.k)
    elif isinstance(gate, CycMatrix):
        M, w = gate, Fraction(1)
    else:
        M, w = gate
    if M.k != s.k:
        raise ValueError(f"gate field k={M.k} does not match state k={s.k}")
    return SimState(s.k, s.nqubits, tuple(apply_matrix(s.amps, s.nqubits, M, targets)), s.weight * w)


def run_circuit(c: Circuit, state: SimState) -> SimState:
    for name, targets in c.gates:
        state = apply_gate(state, name, targets)
    return state


def circuit_unitary(c: Circuit):
    """Dense (matrix, weight) of the whole circuit."""
    dim = 1 << c.qubits
    cols, weight = [], Fraction(1)
    for b in range(dim):
        st = run_circuit(c, SimState.basis(c.k, c.qubits, b))
        cols.append(st.amps)
        weight = st.weight
    return CycMatrix(c.k, [list(r) for r in zip(*cols)]), weight


def run_verifier(c: Circuit, proof) -> CycNum:
    """Exact acceptance probability: measure qubit 0 in state 1 after running c."""
    c.validate()
    if c.qubits > MAX_QUBITS:
        raise ValueError(f"{c.qubits} qubits exceeds the simulation cap {MAX_QUBITS}")
    if not isinstance(proof, SimState):
        proof = SimState.from_vector(proof) if c.proof_qubits else SimState(c.k, 0, (CycNum.one(c.k),))
    if proof.nqubits != c.proof_qubits:
        raise ValueError(f"proof has {proof.nqubits} qubits, circuit expects {c.proof_qubits}")
    if proof.k != c.k:
        raise ValueError("proof field does not match circuit field")
    init = SimState.basis(c.k, c.ancillas, 0).kron(proof) if c.ancillas else proof
    nrm = init.norm2()
    if nrm.is_zero():
        raise ValueError("zero proof")
    final = run_circuit(c, init)
    return final.project(0, 1).norm2() / nrm


def toffoli_from_cs(a: int, b: int, t: int):
    """Gates over {wH, CS} equal to CCX(a, b -> t) up to a global root of unity.

    CX(a, b) is wH_b CZ_ab wH_b up to phase, CZ = CS^2 and CS^dagger = CS^3.
    """
    def cx(c, u):
        return [("wH", (u,)), ("CS", (c, u)), ("CS", (c, u)), ("wH", (u,))]

    g = [("wH", (t,)), ("CS", (b, t))]
    g += cx(a, b)
    g += [("CS", (b, t))] * 3
    g += cx(a, b)
    g += [("CS", (a, t)), ("wH", (t,))]
    return g


# ---------------------------------------------------------------- integer states


def _ceil_log2(x: int) -> int:
    return 0 if x <= 1 else (x - 1).bit_length()


@dataclass
class PrepRecord:
    steps: list  # (name, exact probability) per postselection
    probability: CycNum
    bound: Fraction
    case: str


def _real_stage(entries, k):
    """Stages 1-4 of the real procedure over labelled magnitudes.

    entries: list of (label, magnitude >= 0, unit phase CycNum).  Returns
    ({label: amplitude}, weight, [step probabilities]) with the ancilla
    register already factored out.
    """
    A = sum(m for _, m, _ in entries)
    astar = max(m for _, m, _ in entries)
    nb = max(1, _ceil_log2(A))
    mb = _ceil_log2(astar)
    steps = []
    # uniform superposition over 2^nb values of register B, amplitude 1 each
    weight = Fraction(1, 1 << nb)
    amps = {j: 1 for j in range(1 << nb)}
    # range cut j < A
    amps = {j: a for j, a in amps.items() if j < A}
    steps.append(("range", Fraction(len(amps), 1 << nb)))
    # tagging: j in [K_t, K_t + m_t) -> (t, j - K_t)
    tagged = {}
    off = 0
    for t, (_, m, _) in enumerate(entries):
        for j in range(off, off + m):
            tagged[(t, j - off)] = amps[j]
        off += m
    # accept |+>^mb on the low mb qubits of B: projector J / 2^mb
    before = sum(tagged.values())
    proj = {}
    for t, (_, m, _) in enumerate(entries):
        s = sum(tagged.get((t, b), 0) for b in range(1 << mb))
        if s:
            for b in range(1 << mb):
                proj[(t, b)] = Fraction(s, 1 << mb)
    after = sum(v * v for v in proj.values()) / before
    steps.append(("plus", after))
    # factor |+>^mb (normalized) out of B; each t carries amplitude m_t / 2^mb
    weight *= 1 << mb
    out = {}
    for t, (label, m, ph) in enumerate(entries):
        if m:
            out[label] = ph * proj[(t, 0)]
    return out, weight, steps


def prepare_integer_state(a, k: int | None = None):
    """Prepare a state proportional to sum_i a_i |i> by postselection.

    Returns (SimState, PrepRecord).  The state's amplitudes are exactly a
    (zero padded to a power of two) and its weight makes the squared norm
    equal to the overall success probability.
    """
    a = [x if isinstance(x, CycNum) else CycNum.rational(k or 1, x) for x in a]
    if not a:
        raise ValueError("empty target")
    k = a[0].k
    if any(x.k != k for x in a):
        raise ValueError("mixed fields in target")
    if all(x.is_zero() for x in a):
        raise ValueError("all-zero target")
    if any(x.den != 1 for x in a):
        raise ValueError("prepare_integer_state needs integer coefficients")
    dim = len(a)
    D = FieldSpec(k).d
    rational = all(x.is_rational() for x in a)
    one = CycNum.one(k)
    if rational:
        entries = [(i, abs(x.num[0]), one if x.num[0] >= 0 else -one) for i, x in enumerate(a)]
        amps, weight, steps = _real_stage(entries, k)
        case = "real"
        bound = Fraction(1, 4 * dim)
    else:
        if any(x.is_zero() for x in a):
            raise ValueError("cyclotomic preparation needs every a_i nonzero")
        entries = []
        for i, x in enumerate(a):
            for j, b in enumerate(x.num):
                zj = CycNum.zeta_power(k, j)
                entries.append(((i, j), abs(b), zj if b >= 0 else -zj))
        amps2, weight, steps = _real_stage(entries, k)
        # Hadamard-basis acceptance on the j register, then factor it out
        z = CycNum.zero(k)
        summed = {}
        for (i, j), v in amps2.items():
            summed[i] = summed.get(i, z) + v
        before = sum((v.abs2() for v in amps2.values()), z)
        after = sum((v.abs2() for v in summed.values()), z) / D
        steps.append(("phase", after / before))
        amps = {i: v / D for i, v in summed.items()}
        weight *= D
        if k == 2:
            case = "complex"
            bound = Fraction(1, 16 * dim)
        else:
            case = "cyclotomic"
            bsq = sum(b * b for x in a for b in x.num)
            lower = sum(small_sum_bound(x) ** 2 for x in a)
            bound = Fraction(1, 4 * dim * D) * lower / (D * bsq)
    nq = max(1, _ceil_log2(dim))
    z = CycNum.zero(k)
    vec = [amps.get(i, z) for i in range(1 << nq)]
    # rescale so that amplitudes equal a exactly
    i0 = next(i for i, x in enumerate(a) if x)
    lam = vec[i0] / a[i0]
    if not lam.is_rational():
        raise AssertionError("prepared state not proportional to target")
    lam = lam.to_fraction()
    target = a + [z] * ((1 << nq) - dim)
    if [v / lam for v in vec] != target:
        raise AssertionError("prepared state not proportional to target")
    state = SimState(k, nq, tuple(target), weight * lam * lam)
    prob = one
    for _, p in steps:
        prob = prob * p
    if state.norm2() != prob:
        raise AssertionError("step probabilities disagree with final norm")
    pv = embed(prob).real
    if pv < float(bound) * (1 - 1e-12):
        raise AssertionError(f"success probability {pv} below bound {float(bound)}")
    return state, PrepRecord(steps, prob, bound, case)


# ---------------------------------------------------------------- LCU


@dataclass
class LcuOutcome:
    y: str
    U_y: CycMatrix
    branch: tuple  # unnormalized branch vector, equal to U_y psi
    squared_norm: CycNum


def _swap_pairs(y: str) -> str:
    return "".join(y[i + 1] + y[i] for i in range(0, len(y), 2))


def lcu_apply(A: CycMatrix, psi) -> dict:
    """Apply A by Pauli LCU with Hadamard-basis measurement of the control register.

    Branch y carries the unnormalized vector sum_x (-1)^{x.y} a_x P_x psi,
    which equals P_y~ A P_y~ psi.  Its squared norm (probability of outcome y
    for normalized psi) is ||branch||^2 / (2^n ||A||_F^2 ||psi||^2).
    """
    if isinstance(psi, SimState):
        vec = list(psi.amps)
    else:
        vec = list(psi)
    if A.is_zero():
        raise ValueError("LCU of the zero operator")
    if A.k < 2:
        A = A.lift(2)
    k = A.k
    vec = [v.lift(k) for v in vec]
    if len(vec) != A.cols:
        raise ValueError("state dimension does not match operator")
    nq = len(vec).bit_length() - 1
    coeffs = pauli_decompose(A)
    terms = [(x, a, apply_pauli(x, vec)) for x, a in coeffs.items() if a]
    terms = [(x, [a * v for v in pv]) for x, a, pv in terms]
    frob = sum((e.abs2() for e in A.entries()), CycNum.zero(k))
    nrm = norm2(vec)
    if nrm.is_zero():
        raise ValueError("zero input state")
    scale = frob * nrm * (1 << nq)
    z = CycNum.zero(k)
    out = {}
    for y in sorted(coeffs):
        br = [z] * len(vec)
        for x, pv in terms:
            sign = sum(int(p) & int(q) for p, q in zip(x, y)) & 1
            br = [b - v if sign else b + v for b, v in zip(br, pv)]
        yt = _swap_pairs(y)
        P = pauli_matrix(yt, k)
        Uy = P @ A @ P
        out[y] = LcuOutcome(y, Uy, tuple(br), norm2(br) / scale)
    return out


# ---------------------------------------------------------------- amplification


def block_of(U: CycMatrix, mu: int) -> CycMatrix:
    """(<0^mu| x I) U (|0^mu> x I)."""
    m = U.rows >> mu
    return CycMatrix(U.k, [[U[i, j] for j in range(m)] for i in range(m)])


def block_component(vec, mu: int):
    """The <0^mu| part of a vector on mu + n qubits."""
    m = len(vec) >> mu
    return list(vec[:m])


def oblivious_amplify(U: CycMatrix, mu: int, psi, ell: int, theta: float | None = None, tol: float = 1e-9):
    """Return S^ell U |0^mu>|psi> with S = -U R U^dagger R and R = 2 Pi - I.

    The block B of U on |0^mu> must satisfy B^dagger B = c I exactly; if
    theta is given, sqrt(c) must match sin(theta) within tol.
    """
    import math

    if ell < 0:
        raise ValueError("ell must be >= 0")
    vec = list(psi.amps) if isinstance(psi, SimState) else list(psi)
    k = U.k
    B = block_of(U, mu)
    G = B.H @ B
    c = G[0, 0]
    if G != CycMatrix.identity(k, B.rows).scale(c):
        defect = max(abs(x) for x in (G - CycMatrix.identity(k, B.rows).scale(c)).to_numpy().ravel())
        raise ValueError(f"block is not a multiple of an isometry (defect {defect:.3g})")
    if theta is not None:
        got = math.sqrt(max(0.0, embed(c).real))
        if abs(got - math.sin(theta)) > tol:
            raise ValueError(f"block amplitude {got} does not match sin(theta)={math.sin(theta)}")
    n_block = len(vec)
    z = CycNum.zero(k)
    state = vec + [z] * (U.cols - n_block)
    state = U.apply(state)
    Ud = U.H

    def refl(v):
        return [a if i < n_block else -a for i, a in enumerate(v)]

    for _ in range(ell):
        state = [-a for a in U.apply(refl(Ud.apply(refl(state))))]
    nq = U.rows.bit_length() - 1
    return SimState(k, nq, tuple(state))


def padding_overlap(r: int, cprime: int, k: int = 1) -> Fraction:
    """<0^{r+1}| U' |0^{r+1}> for U' = (H^r x I) flip_{j >= c'} (H^r x I)."""
    if not 0 <= cprime <= 1 << r:
        raise ValueError("need 0 <= c' <= 2^r")
    nq = r + 1
    st = SimState.basis(k, nq, 0)

    def hadamards(s):
        q = 0
        while q + 1 < r:
            s = apply_gate(s, "HH", (q, q + 1))
            q += 2
        if q < r:
            s = apply_gate(s, "H", (q,))
        return s

    st = hadamards(st)
    flip = _perm_matrix(k, 1 << nq, lambda c: c ^ 1 if (c >> 1) >= cprime else c)
    st = SimState(k, nq, tuple(flip.apply(list(st.amps))), st.weight)
    st = hadamards(st)
    w = st.weight
    num, den = w.numerator, w.denominator
    rn, rd = _isqrt_exact(num), _isqrt_exact(den)
    if rn is None or rd is None:
        raise ValueError("overlap is irrational for this r")
    amp = st.amps[0]
    return amp.to_fraction() * Fraction(rn, rd)


def _isqrt_exact(m: int):
    from math import isqrt

    r = isqrt(m)
    return r if r * r == m else None
