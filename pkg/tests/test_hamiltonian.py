from fractions import Fraction

import numpy as np
import pytest

from cycver.cyclotomic import CycNum, embed, zeta
from cycver.hamiltonian import (HamInstance, assemble_2local, build_cx_gadget, build_gate_gadget, build_hclock,
                                build_hsplit, build_qsat4_g2, clock_states, cx_kernel_states, default_jclock,
                                gate_eigendata, hsplit_report, projection_bound, projector, qsat4_gadget_report,
                                verify_gadget)
from cycver.linalg import CycMatrix, corank, kernel
from cycver.statesim import Circuit, Gateset


def _zero_one(k):
    one, z = CycNum.one(k), CycNum.zero(k)
    return CycMatrix.diag(k, [one, z]), CycMatrix.diag(k, [z, one])


@pytest.mark.parametrize("T", [1, 2, 3, 5])
def test_hclock(T):
    h = build_hclock(T)
    M = h.matrix()
    kb = kernel(M)
    assert kb.corank == T + 1
    for idx in clock_states(T):
        e = [CycNum.zero(1)] * h.dim
        e[idx] = CycNum.one(1)
        assert all(not x for x in M.apply(e))
    assert M[0, 0] == T + 1
    w = np.linalg.eigvalsh(M.to_numpy())
    assert w[T + 1] >= T - 1e-9


def test_hclock_errors():
    with pytest.raises(ValueError):
        build_hclock(0)


def test_hsplit_corank():
    rep = hsplit_report(*_zero_one(1))
    assert rep.corank == 2 and rep.ok
    # a rotated split basis (|+>, |->) also works
    h = Fraction(1, 2)
    pp = CycMatrix.from_rationals([[h, h], [h, h]])
    pm = CycMatrix.from_rationals([[h, -h], [-h, h]])
    assert hsplit_report(pp, pm).corank == 2


def test_hsplit_rejects_bad_projectors():
    P0, _ = _zero_one(1)
    with pytest.raises(ValueError):
        build_hsplit(projectors=(P0, P0))
    with pytest.raises(ValueError):
        build_hsplit([CycNum.one(1), CycNum.one(1)], [CycNum.one(1), CycNum.zero(1)])


@pytest.mark.parametrize("name,k", [("T", 3), ("H", 3), ("X", 1), ("Z", 1), ("S", 2)])
def test_single_gate_gadgets(name, k):
    g = build_gate_gadget(gate_eigendata(name, k), name)
    rep = verify_gadget(g, expected_corank=2)
    assert rep.ok, rep.checks
    assert rep.delta == 4  # four clock sites on each branch path


def test_eigendata_errors():
    with pytest.raises(ValueError):
        gate_eigendata("H", 2)
    with pytest.raises(ValueError):
        gate_eigendata("CX", 3)


def test_cx_gadget():
    g = build_cx_gadget(1)
    rep = verify_gadget(g, expected_corank=4)
    assert rep.ok, rep.checks
    for v in cx_kernel_states(1).values():
        assert g.ham.annihilates(v)


def test_assemble_history_state_and_output():
    c = Circuit(3, 1, 1, Gateset.parse("G8"), [("H", (1,)), ("CX", (1, 0))])
    asm = assemble_2local(c)
    one, z = CycNum.one(3), CycNum.zero(3)
    prop = asm.prop + asm.hclock
    for a in range(4):
        alpha = [one if i == a else z for i in range(4)]
        assert prop.annihilates(asm.history_state(alpha))
    # restricted to the clock space the kernel is one history state per register input
    R = asm.prop.restrict(asm.clock_space())
    assert corank(R) == 4
    # proof |-> with ancilla 0 is accepted: output qubit 0 ends in |1>
    alpha = [one, -one, z, z]
    out = asm.output_state(alpha)
    assert not out[0] and not out[1]
    assert asm.total().annihilates(asm.history_state(alpha))
    # proof |+> is rejected: nonzero energy
    alpha = [one, one, z, z]
    assert not asm.h1().annihilates(asm.history_state(alpha))


def test_assemble_rejects_unsupported_gate():
    c = Circuit(1, 1, 2, Gateset("ANY", 1), [("CCX", (1, 2, 0))])
    with pytest.raises(ValueError):
        assemble_2local(c)


def test_default_jclock():
    j = default_jclock(2.0)
    assert j > 4 * 4 * 1024 + 4 and j & (j - 1) == 0


def test_projection_bound_small():
    H2 = HamInstance(2, [((0,), _zero_one(1)[1])], 1)
    X = CycMatrix.from_rationals([[0, 1], [1, 0]])
    H1 = HamInstance(2, [((0, 1), X.kron(X)), ((1,), _zero_one(1)[1])], 1)
    pb = projection_bound(H1, H2, 64)
    assert pb.holds and pb.lower <= pb.lambda_min <= pb.upper + 1e-9
    with pytest.raises(ValueError):
        projection_bound(H1, H2, 1)


def test_qsat4_gadgets():
    for name, m in (("X", 1), ("CX", 2), ("HH", 2), ("CCX", 3)):
        r = qsat4_gadget_report(name)
        assert r["corank"] == r["expected"] == 2 ** m
        assert r["psd"] and r["rational"] and r["locality"] <= 4


def _g2():
    return Circuit(1, 1, 2, Gateset.parse("G2"), [("X", (0,)), ("CX", (1, 0)), ("HH", (1, 2))])


def test_qsat4_history_state():
    inst = build_qsat4_g2(_g2())
    assert inst.ham.locality == 4 and inst.ham.terms_psd()
    one, z = CycNum.one(1), CycNum.zero(1)
    # input proof |00>: X sets the output, CX on proof 0 leaves it
    x = [one if i == 0 else z for i in range(8)]
    hist = inst.history_state(x)
    assert inst.ham.annihilates(hist, termwise=True)
    # proof |10> flips the output back to 0 and must be penalised
    x = [one if i == 2 else z for i in range(8)]
    e = inst.ham.expectation(inst.history_state(x))
    assert e.is_rational() and e.to_fraction() > 0


def test_qsat4_rejects_bad_gates():
    c = Circuit(3, 1, 1, Gateset.parse("G8"), [("T", (1,))])
    with pytest.raises(ValueError):
        build_qsat4_g2(c)


def test_projector_and_instance_algebra():
    P = projector([CycNum.one(3), zeta(3)])
    assert P @ P == P
    h = build_hclock(2)
    assert (h + h).matrix() == h.matrix().scale(2)
    assert h.norm_bound() >= max(abs(x) for x in np.linalg.eigvalsh(h.matrix().to_numpy())) - 1e-9
    assert embed(h.expectation({0: CycNum.one(1)})).real == 3
