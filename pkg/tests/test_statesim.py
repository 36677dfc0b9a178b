import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cycver.cyclotomic import CycNum, embed, imag_unit, zeta
from cycver.linalg import CycMatrix, is_unitary, norm2
from cycver.statesim import (GATE_ARITY, Circuit, Gateset, SimState, apply_gate, block_of, circuit_unitary,
                             gate_matrix, lcu_apply, oblivious_amplify, padding_overlap, prepare_integer_state,
                             run_verifier, toffoli_from_cs)

from helpers import rand_int_cyc, rand_vector


def _physical(name, k):
    M, w = gate_matrix(name, k)
    return M.to_numpy() * math.sqrt(w)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_gates_are_unitary(k):
    for name in GATE_ARITY:
        if k < 2 and name in ("Y", "S", "Sdg", "wH", "CS", "CSdg"):
            continue
        U = _physical(name, k)
        assert np.allclose(U.conj().T @ U, np.eye(len(U))), name


def test_gate_values():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(_physical("H", 1), h)
    assert np.allclose(_physical("H", 3), h)
    assert np.allclose(_physical("HH", 1), np.kron(h, h))
    assert np.allclose(_physical("wH", 2), np.exp(1j * math.pi / 4) * h)
    H3, w = gate_matrix("H", 3)
    assert w == 1 and is_unitary(H3)


def test_gateset_parse():
    assert str(Gateset.parse("G8")) == "G8" and Gateset.parse("G8").k == 3
    assert Gateset.parse("G2").allows("HH") and not Gateset.parse("G2").allows("H")
    for bad in ("G6", "G", "Q"):
        with pytest.raises(ValueError):
            Gateset.parse(bad)


def test_circuit_validation():
    c = Circuit(1, 1, 1, Gateset.parse("G2"))
    c.add("CX", 1, 0)
    c.validate()
    with pytest.raises(ValueError):
        Circuit(1, 1, 1, Gateset.parse("G2"), [("H", (0,))]).validate()
    with pytest.raises(ValueError):
        Circuit(1, 1, 1, Gateset.parse("G2"), [("CX", (0, 0))]).validate()
    with pytest.raises(ValueError):
        Circuit(1, 1, 1, Gateset.parse("G8"), []).validate()


def test_apply_gate_examples():
    s = apply_gate(SimState.basis(1, 2), "HH", (0, 1))
    assert s.amps == tuple(CycNum.rational(1, Fraction(1, 2)) for _ in range(4))
    assert s.norm2() == 1
    s = apply_gate(SimState.basis(3, 1, 1), "T", (0,))
    assert s.amps[1] == zeta(3) and not s.amps[0]
    with pytest.raises(ValueError):
        apply_gate(SimState.basis(3, 1), gate_matrix("X", 2), (0,))


def test_apply_matches_numpy_on_random_circuits():
    rng = random.Random(3)
    names = ["H", "T", "S", "CX", "CZ", "CS", "HH", "CCX", "wH"]
    for _ in range(10):
        gates = []
        for _ in range(6):
            g = rng.choice(names)
            gates.append((g, tuple(rng.sample(range(3), GATE_ARITY[g]))))
        c = Circuit(3, 0, 3, Gateset("ANY", 1), gates)
        U, w = circuit_unitary(c)
        full = np.eye(8, dtype=complex)
        for g, t in gates:
            M = _physical(g, 3)
            # embed the local gate by permuting qubits
            full = _embed(M, t, 3) @ full
        assert np.allclose(U.to_numpy() * math.sqrt(w), full)


def _embed(M, targets, n):
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    m = len(targets)
    for col in range(dim):
        sub = 0
        for i, t in enumerate(targets):
            sub |= ((col >> (n - 1 - t)) & 1) << (m - 1 - i)
        for r in range(1 << m):
            row = col
            for i, t in enumerate(targets):
                bit = (r >> (m - 1 - i)) & 1
                row = row & ~(1 << (n - 1 - t)) | (bit << (n - 1 - t))
            out[row, col] += M[r, sub]
    return out


def test_toffoli_from_cs():
    c = Circuit(2, 0, 3, Gateset.parse("CS"), toffoli_from_cs(0, 1, 2))
    c.validate()
    U, w = circuit_unitary(c)
    U = U.scale(w)
    T, _ = gate_matrix("CCX", 2)
    phase = U[0, 0]
    assert phase.abs2() == 1
    assert U == T.scale(phase)
    for b in range(8):
        out = [i for i, a in enumerate(U.apply([CycNum.one(2) if i == b else CycNum.zero(2) for i in range(8)]))
               if a]
        assert out == [b ^ 1 if b >> 1 == 3 else b]


def test_run_verifier():
    c = Circuit(1, 1, 0, Gateset.parse("G2"), [("X", (0,))])
    assert run_verifier(c, None) == 1
    # Toffoli used as a verifier: flips the output iff both proof qubits are 1
    c = Circuit(2, 1, 2, Gateset("ANY", 1), [("CCX", (1, 2, 0))])
    one, z = CycNum.one(2), CycNum.zero(2)
    assert run_verifier(c, [z, z, z, one]) == 1
    assert run_verifier(c, [z, z, one, z]) == 0
    assert run_verifier(c, [one, z, z, one]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        run_verifier(c, [one, z])


@pytest.mark.parametrize("a,k,bound", [([2, 1], 1, Fraction(1, 8)), ([1, 1], 1, Fraction(1, 8)),
                                       ([3, 0, -1, 2, 5], 1, Fraction(1, 20))])
def test_prepare_real(a, k, bound):
    s, rec = prepare_integer_state(a, k)
    assert list(s.amps[:len(a)]) == [CycNum.rational(k, x) for x in a]
    assert rec.bound == bound and rec.case == "real"
    assert rec.probability.to_fraction() >= bound
    assert s.norm2() == rec.probability


def test_prepare_complex_and_cyclotomic():
    i = imag_unit(2)
    s, rec = prepare_integer_state([1 + i, CycNum.one(2)])
    assert s.amps[0] == 1 + i and s.amps[1] == 1
    assert rec.case == "complex" and rec.bound == Fraction(1, 32)
    assert embed(rec.probability).real >= 1 / 32
    rng = random.Random(5)
    for _ in range(5):
        a = [rand_int_cyc(rng, 3, 3) for _ in range(3)]
        if any(not x for x in a):
            continue
        s, rec = prepare_integer_state(a)
        assert list(s.amps[:3]) == a and rec.case == "cyclotomic"
        assert embed(rec.probability).real >= float(rec.bound)


def test_prepare_errors():
    with pytest.raises(ValueError):
        prepare_integer_state([0, 0])
    with pytest.raises(ValueError):
        prepare_integer_state([CycNum.rational(1, Fraction(1, 2))])
    with pytest.raises(ValueError):
        prepare_integer_state([imag_unit(2), CycNum.zero(2)])


def test_lcu_examples():
    T, _ = gate_matrix("T", 3)
    rng = random.Random(0)
    psi = rand_vector(rng, 3, 2)
    outs = lcu_apply(T, psi)
    assert len(outs) == 4
    assert all(o.squared_norm == Fraction(1, 4) for o in outs.values())
    assert list(outs["00"].branch) == T.apply(psi)
    for o in outs.values():
        assert list(o.branch) == o.U_y.apply(psi)
    X, _ = gate_matrix("X", 1)
    outs = lcu_apply(X, [CycNum.one(1), CycNum.zero(1)])
    assert outs["00"].branch == (CycNum.zero(2), CycNum.one(2))
    P = CycMatrix.diag(1, [0, 1])
    outs = lcu_apply(P, [CycNum.one(1), CycNum.zero(1)])
    assert outs["00"].squared_norm == 0


def test_lcu_probabilities_sum_to_one():
    rng = random.Random(1)
    A = CycMatrix(3, [[rand_int_cyc(rng, 3, 2) for _ in range(4)] for _ in range(4)])
    psi = rand_vector(rng, 3, 4)
    total = sum((o.squared_norm for o in lcu_apply(A, psi).values()), CycNum.zero(3))
    assert total == 1


def test_oblivious_amplification():
    h, _ = gate_matrix("HH", 1)
    U = h.kron(CycMatrix.identity(1, 2))
    psi = [CycNum.rational(1, 1), CycNum.rational(1, 2)]
    s = oblivious_amplify(U, 2, psi, 0)
    assert list(s.amps) == U.apply(psi + [CycNum.zero(1)] * 6)
    s = oblivious_amplify(U, 2, psi, 1, theta=math.pi / 6)
    assert list(s.amps[:2]) == psi and not any(s.amps[2:])
    R = CycMatrix.from_rationals([[3, -4], [4, 3]]).scale(Fraction(1, 5)).kron(CycMatrix.identity(1, 2))
    theta = math.asin(3 / 5)
    for ell in range(4):
        s = oblivious_amplify(R, 1, psi, ell, theta=theta)
        ratio = embed(s.amps[0]).real / float(psi[0].to_fraction())
        assert ratio == pytest.approx(math.sin((2 * ell + 1) * theta), abs=1e-9)
    with pytest.raises(ValueError):
        oblivious_amplify(R, 1, psi, 1, theta=0.1)
    bad = CycMatrix.from_rationals([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    with pytest.raises(ValueError):
        oblivious_amplify(bad, 1, psi, 1)
    assert block_of(R, 1) == CycMatrix.identity(1, 2).scale(Fraction(3, 5))


def test_padding_overlap():
    assert padding_overlap(4, 13) == Fraction(13, 16)
    for r in range(1, 5):
        for cp in range(0, 2 ** r + 1):
            assert padding_overlap(r, cp) == Fraction(cp, 2 ** r)
    with pytest.raises(ValueError):
        padding_overlap(2, 5)


def test_simstate_helpers():
    s = SimState.from_vector([CycNum.one(1)] * 4, Fraction(1, 4))
    assert s.nqubits == 2 and s.norm2() == 1
    assert s.project(0, 1).norm2() == Fraction(1, 2)
    assert np.allclose(np.linalg.norm(s.to_numpy()), 1)
    assert norm2(s.kron(s).amps) == 16
    with pytest.raises(ValueError):
        SimState.from_vector([CycNum.one(1)] * 3)
