"""Exact arithmetic in the cyclotomic field Q(zeta_{2^k}).

Elements are stored over the integral basis 1, z, ..., z^(d-1) with
d = max(1, 2^(k-1)) and the reduction rule z^d = -1.  Internally a number
is an integer numerator vector plus one positive common denominator,
kept in lowest terms so that equality is structural.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from numbers import Rational


@dataclass(frozen=True)
class FieldSpec:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"field exponent k must be >= 1, got {self.k!r}")

    @property
    def n(self) -> int:
        return 2 ** self.k

    @property
    def d(self) -> int:
        return max(1, 2 ** (self.k - 1))


@lru_cache(maxsize=None)
def _galois_table(k: int, j: int):
    """Images of the basis under z -> z^j, as (index, sign) pairs."""
    n, d = 2 ** k, max(1, 2 ** (k - 1))
    out = []
    for i in range(d):
        e = (i * j) % n
        out.append((e, 1) if e < d else (e - d, -1))
    return tuple(out)


@lru_cache(maxsize=None)
def _roots(k: int):
    n, d = 2 ** k, max(1, 2 ** (k - 1))
    return tuple(cmath.exp(2j * cmath.pi * i / n) for i in range(d))


def _normalize(num, den):
    if den < 0:
        num = [-x for x in num]
        den = -den
    g = gcd(den, *num)
    if g > 1:
        num = [x // g for x in num]
        den //= g
    return tuple(num), den


class CycNum:
    """Immutable element of Q(zeta_{2^k})."""

    __slots__ = ("k", "num", "den", "_hash")

    def __init__(self, k: int, coeffs=None, *, _raw=None):
        self.k = k
        if _raw is not None:
            self.num, self.den = _raw
        else:
            d = max(1, 2 ** (k - 1))
            if k < 1:
                raise ValueError("k must be >= 1")
            coeffs = list(coeffs) if coeffs is not None else [0] * d
            if len(coeffs) != d:
                raise ValueError(f"expected {d} coefficients for k={k}, got {len(coeffs)}")
            fr = [Fraction(c) for c in coeffs]
            den = 1
            for c in fr:
                den = den * c.denominator // gcd(den, c.denominator)
            self.num, self.den = _normalize([int(c * den) for c in fr], den)
        self._hash = None

    # constructors
    @classmethod
    def _make(cls, k, num, den):
        return cls(k, _raw=_normalize(num, den))

    @classmethod
    def rational(cls, k: int, q) -> "CycNum":
        q = Fraction(q)
        d = max(1, 2 ** (k - 1))
        return cls(k, _raw=((q.numerator,) + (0,) * (d - 1), q.denominator))

    @classmethod
    def zeta_power(cls, k: int, e: int) -> "CycNum":
        """z^e for any integer e."""
        n, d = 2 ** k, max(1, 2 ** (k - 1))
        e %= n
        num = [0] * d
        if e < d:
            num[e] = 1
        else:
            num[e - d] = -1
        return cls(k, _raw=(tuple(num), 1))

    @classmethod
    def zero(cls, k: int) -> "CycNum":
        return cls.rational(k, 0)

    @classmethod
    def one(cls, k: int) -> "CycNum":
        return cls.rational(k, 1)

    # accessors
    @property
    def spec(self) -> FieldSpec:
        return FieldSpec(self.k)

    @property
    def d(self) -> int:
        return len(self.num)

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(x, self.den) for x in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    def is_integral(self) -> bool:
        return self.den == 1

    # coercion
    def _coerce(self, other):
        if isinstance(other, CycNum):
            if other.k != self.k:
                raise ValueError(f"field mismatch: k={self.k} vs k={other.k}")
            return other
        if isinstance(other, (int, Rational)):
            return CycNum.rational(self.k, other)
        return NotImplemented

    # arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return CycNum._make(self.k, [a + b for a, b in zip(self.num, o.num)], self.den)
        return CycNum._make(self.k, [a * o.den + b * self.den for a, b in zip(self.num, o.num)],
                            self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return CycNum(self.k, _raw=(tuple(-a for a in self.num), self.den))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = len(self.num)
        out = [0] * d
        for i, a in enumerate(self.num):
            if a:
                for j, b in enumerate(o.num):
                    if b:
                        t = i + j
                        if t < d:
                            out[t] += a * b
                        else:
                            out[t - d] -= a * b
        return CycNum._make(self.k, out, self.den * o.den)

    __rmul__ = __mul__

    def galois(self, j: int) -> "CycNum":
        """Image under the automorphism z -> z^j (j odd)."""
        if j % 2 == 0:
            raise ValueError("Galois exponent must be odd")
        out = [0] * len(self.num)
        for a, (e, s) in zip(self.num, _galois_table(self.k, j % (2 ** self.k))):
            out[e] += s * a
        return CycNum(self.k, _raw=(tuple(out), self.den))

    def conj(self) -> "CycNum":
        return self.galois(2 ** self.k - 1)

    def norm(self) -> Fraction:
        """Field norm down to Q."""
        p = self
        for j in range(3, 2 ** self.k, 2):
            p = p * self.galois(j)
        return p.to_fraction()

    def inverse(self) -> "CycNum":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        p = CycNum.one(self.k)
        for j in range(3, 2 ** self.k, 2):
            p = p * self.galois(j)
        nrm = (self * p).to_fraction()
        return p * (1 / nrm)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_rational():
            q = o.to_fraction()
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return CycNum._make(self.k, [a * q.denominator for a in self.num], self.den * q.numerator)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = CycNum.one(self.k), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def abs2(self) -> "CycNum":
        return self * self.conj()

    def lift(self, k: int) -> "CycNum":
        """Embed into Q(zeta_{2^k}) for k >= self.k via z -> z'^(2^(k - self.k))."""
        if k < self.k:
            raise ValueError("can only lift to a larger field")
        if k == self.k:
            return self
        step = 2 ** (k - self.k)
        d = max(1, 2 ** (k - 1))
        out = [0] * d
        if self.k == 1:
            out[0] = self.num[0]
        else:
            for i, a in enumerate(self.num):
                out[i * step] = a
        return CycNum(k, _raw=(tuple(out), self.den))

    # comparison / hashing
    def __eq__(self, other):
        if isinstance(other, CycNum):
            return self.k == other.k and self.den == other.den and self.num == other.num
        if isinstance(other, (int, Rational)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.k, self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def embed(self) -> complex:
        return embed(self)

    def __repr__(self):
        return f"CycNum(k={self.k}, {format_cycnum(self)})"

    def __str__(self):
        return format_cycnum(self)


def format_cycnum(a: CycNum) -> str:
    parts = []
    for c in a.coeffs:
        parts.append(str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}")
    return "[" + ", ".join(parts) + "]"


def parse_cycnum(text: str, k: int) -> CycNum:
    """Parse `[num/den, ...]`, or a bare rational as shorthand."""
    s = text.strip()
    if s.startswith("["):
        if not s.endswith("]"):
            raise ValueError(f"unterminated field element {text!r}")
        body = s[1:-1].strip()
        items = [t.strip() for t in body.split(",")] if body else []
        try:
            return CycNum(k, [Fraction(t) for t in items])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad field element {text!r}: {exc}") from None
    try:
        return CycNum.rational(k, Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"bad field element {text!r}") from None


def zeta(k: int) -> CycNum:
    return CycNum.zeta_power(k, 1)


def imag_unit(k: int) -> CycNum:
    if k < 2:
        raise ValueError("i is not in Q; need k >= 2")
    return CycNum.zeta_power(k, 2 ** (k - 2))


def sqrt2(k: int) -> CycNum:
    """sqrt(2) = z8 - z8^3, available for k >= 3."""
    if k < 3:
        raise ValueError("sqrt(2) needs k >= 3")
    return CycNum.zeta_power(k, 2 ** (k - 3)) - CycNum.zeta_power(k, 3 * 2 ** (k - 3))


def embed(a: CycNum) -> complex:
    """Floating value sum a_i e^(2 pi i i/n). Approximate; diagnostics only."""
    r = _roots(a.k)
    return sum((x * w for x, w in zip(a.num, r) if x), 0j) / a.den


def reg_rep(a: CycNum):
    """Matrix of multiplication by `a` on the coefficient vector (k=1 CycMatrix)."""
    from .linalg import CycMatrix

    d = a.d
    cols = [(a * CycNum.zeta_power(a.k, j)).coeffs for j in range(d)]
    return CycMatrix.from_rationals([[cols[j][i] for j in range(d)] for i in range(d)])


def coeff_vector(vec) -> list:
    """v(psi): stack the coefficient vectors of a list of field elements."""
    out = []
    for a in vec:
        out.extend(a.coeffs)
    return out


def psi(U):
    """Rational dN x dN image of U: block (i, j) is reg_rep(U[i][j])."""
    from .linalg import CycMatrix

    d = FieldSpec(U.k).d
    rows = [[Fraction(0)] * (d * U.cols) for _ in range(d * U.rows)]
    for i in range(U.rows):
        for j in range(U.cols):
            a = U[i, j]
            if a.is_zero():
                continue
            for c in range(d):
                col = (a * CycNum.zeta_power(a.k, c)).coeffs
                for r in range(d):
                    rows[i * d + r][j * d + c] = col[r]
    return CycMatrix.from_rationals(rows)


def small_sum_bound(a: CycNum) -> Fraction:
    """(sum |a_i|)^(-n) for integer coefficients, n = 2^k."""
    if a.den != 1:
        raise ValueError("small_sum_bound needs integer coefficients")
    s = sum(abs(x) for x in a.num)
    if s == 0:
        raise ValueError("small_sum_bound undefined for zero")
    return Fraction(1, s ** (2 ** a.k))


def _is_pow2(m: int) -> bool:
    return m > 0 and m & (m - 1) == 0


def in_ring_D(U) -> bool:
    """True iff every entry lies in Z[1/2, zeta]."""
    entries = U if isinstance(U, CycNum) else U.entries()
    if isinstance(entries, CycNum):
        return _is_pow2(entries.den)
    return all(_is_pow2(a.den) for a in entries)
