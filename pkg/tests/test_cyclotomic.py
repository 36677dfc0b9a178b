import cmath
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cycver.cyclotomic import (CycNum, FieldSpec, coeff_vector, embed, format_cycnum, imag_unit, in_ring_D,
                               parse_cycnum, psi, reg_rep, small_sum_bound, sqrt2, zeta)
from cycver.linalg import CycMatrix
from cycver.statesim import gate_matrix

from helpers import rand_cyc, rand_int_cyc, rand_nonzero, sympy_mul

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def cycnums(draw, k=None):
    k = draw(st.integers(1, 4)) if k is None else k
    d = FieldSpec(k).d
    return CycNum(k, draw(st.lists(fractions, min_size=d, max_size=d)))


@st.composite
def pairs(draw):
    k = draw(st.integers(1, 4))
    return draw(cycnums(k)), draw(cycnums(k)), draw(cycnums(k))


def test_field_spec():
    assert (FieldSpec(3).n, FieldSpec(3).d) == (8, 4)
    assert FieldSpec(1).d == 1
    with pytest.raises(ValueError):
        FieldSpec(0)


def test_basis_products():
    z = zeta(3)
    assert (z * z).coeffs == (0, 0, 1, 0)
    assert (z ** 3 * z).coeffs == (-1, 0, 0, 0)
    assert z.conj() == -(z ** 3)
    assert z ** 8 == 1
    assert z ** -1 == z.conj()


def test_special_elements():
    for k in (2, 3, 4):
        assert imag_unit(k) ** 2 == -1
    for k in (3, 4):
        assert sqrt2(k) ** 2 == 2
    with pytest.raises(ValueError):
        sqrt2(2)


@given(pairs())
@settings(max_examples=150, deadline=None)
def test_ring_axioms(abc):
    a, b, c = abc
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - a == CycNum.zero(a.k)


@given(pairs())
@settings(max_examples=100, deadline=None)
def test_inverse_conj_galois(abc):
    a, b, _ = abc
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()
    n = FieldSpec(a.k).n
    for j in range(1, n, 2):
        assert (a * b).galois(j) == a.galois(j) * b.galois(j)
    if a:
        assert a * a.inverse() == 1
        assert isinstance(a.norm(), Fraction) and a.norm() != 0
        # totally imaginary for k >= 2, so the norm is positive there
        assert a.k == 1 or a.norm() > 0


@given(cycnums())
@settings(max_examples=100, deadline=None)
def test_embedding_is_a_homomorphism(a):
    b = a * a.conj() + 1
    assert abs(embed(a * b) - embed(a) * embed(b)) < 1e-9 * (1 + abs(embed(a * b)))
    assert abs(embed(a.conj()) - embed(a).conjugate()) < 1e-9 * (1 + abs(embed(a)))
    assert abs(embed(a.abs2()).imag) < 1e-9 * (1 + abs(embed(a)) ** 2)


def test_multiplication_matches_sympy_oracle():
    rng = random.Random(7)
    for k in (1, 2, 3, 4, 5):
        for _ in range(20):
            a, b = rand_cyc(rng, k), rand_cyc(rng, k)
            assert list((a * b).coeffs) == sympy_mul(a, b)


def test_embed_values():
    assert embed(zeta(3)) == pytest.approx(complex(0.7071067811865476, 0.7071067811865476))
    assert embed(CycNum.one(3)) == 1
    assert embed(zeta(3) - zeta(3) ** 3) == pytest.approx(1.4142135623730951)
    for k in (1, 2, 3, 4):
        assert embed(zeta(k)) == pytest.approx(cmath.exp(2j * cmath.pi / 2 ** k))


def test_lift_and_rationals():
    a = CycNum(2, [1, Fraction(1, 2)])
    b = a.lift(4)
    assert embed(b) == pytest.approx(embed(a))
    assert b.k == 4
    assert CycNum.rational(3, Fraction(3, 4)).to_fraction() == Fraction(3, 4)
    with pytest.raises(ValueError):
        zeta(3).to_fraction()


def test_format_parse_round_trip():
    rng = random.Random(1)
    for k in (1, 2, 3):
        for _ in range(30):
            a = rand_cyc(rng, k)
            assert parse_cycnum(format_cycnum(a), k) == a
    assert parse_cycnum("-3/4", 3) == CycNum.rational(3, Fraction(-3, 4))
    for bad in ("[1, 2", "[1, x, 0, 0]", "[1, 2]", "1/0"):
        with pytest.raises(ValueError):
            parse_cycnum(bad, 3)


def test_reg_rep():
    M = reg_rep(zeta(3))
    expected = [[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]
    assert M == CycMatrix.from_rationals(expected)
    assert reg_rep(CycNum.one(3)) == CycMatrix.identity(1, 4)
    rng = random.Random(3)
    for _ in range(30):
        a, b = rand_cyc(rng, 3), rand_cyc(rng, 3)
        v = M.from_rationals([[x] for x in coeff_vector([b])])
        assert (reg_rep(a) @ v).tolist() == [[CycNum.rational(1, x)] for x in (a * b).coeffs]
        assert reg_rep(a) @ reg_rep(b) == reg_rep(a * b)
        assert reg_rep(a.conj()) == reg_rep(a).T


def test_psi_identity_and_orthogonality():
    assert psi(CycMatrix.identity(3, 2)) == CycMatrix.identity(1, 8)
    H, w = gate_matrix("H", 3)
    P = psi(H.scale(w))
    assert P.T @ P == CycMatrix.identity(1, 8)


def test_small_sum_bound():
    z = zeta(3)
    a = 1 + z - z * z
    assert small_sum_bound(a) == Fraction(1, 3 ** 8)
    assert small_sum_bound(CycNum.one(3)) == 1
    rng = random.Random(11)
    for _ in range(1000):
        k = rng.choice((2, 3))
        a = rand_int_cyc(rng, k)
        if not a:
            continue
        assert abs(embed(a)) >= float(small_sum_bound(a)) * (1 - 1e-12)
    with pytest.raises(ValueError):
        small_sum_bound(CycNum.zero(3))


def test_in_ring_D():
    H, w = gate_matrix("H", 3)
    assert w == 1 and in_ring_D(H)
    assert not in_ring_D(CycMatrix.from_rationals([[Fraction(1, 3)]]))
    pyth = CycMatrix.from_rationals([[3, 4], [-4, 3]]).scale(Fraction(1, 5))
    assert not in_ring_D(pyth)


def test_zero_division_and_field_mismatch():
    with pytest.raises(ZeroDivisionError):
        CycNum.zero(3).inverse()
    with pytest.raises((ValueError, TypeError)):
        zeta(3) + zeta(2)


def test_embedding_matches_numpy_matrix():
    rng = random.Random(5)
    A = [[rand_nonzero(rng, 3) for _ in range(3)] for _ in range(3)]
    M = CycMatrix(3, A)
    assert np.allclose(M.to_numpy(), np.array([[embed(x) for x in r] for r in A]))
