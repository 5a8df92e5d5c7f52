"""Exact arithmetic in cyclotomic fields Q(zeta_M).

Elements are stored in the power basis ``1, zeta, ..., zeta**(phi-1)`` after
reduction modulo the M-th cyclotomic polynomial, as an integer numerator
vector over one positive common denominator.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import mpmath

from . import kernels
from .errors import ConductorMismatch, CycDivisionByZero

Rational = int | Fraction


def _poly_divmod_int(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Divide integer polynomials (low degree first) by a monic divisor."""
    num = list(num)
    dn = len(den) - 1
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    if len(num) - 1 < dn:
        return [0], num
    quot = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c:
            quot[i - dn] = c
            for j in range(dn + 1):
                num[i - dn + j] -= c * den[j]
    rem = num[:dn] or [0]
    return quot, rem


def _trim(poly: list) -> list:
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


@lru_cache(maxsize=None)
def _cyclotomic(m: int) -> tuple[int, ...]:
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly, rem = _poly_divmod_int(poly, list(_cyclotomic(d)))
            assert not any(rem), "inexact cyclotomic division"
    return tuple(_trim(poly))


def cyclotomic_polynomial(m: int) -> list[int]:
    """Return Phi_m as integer coefficients, lowest degree first.

    Computed by exact division of ``x**m - 1`` by ``Phi_d`` for every proper
    divisor ``d`` of ``m``.

    >>> cyclotomic_polynomial(12)
    [1, 0, -1, 0, 1]
    """
    if m < 1:
        raise ValueError(f"conductor must be positive, got {m}")
    return list(_cyclotomic(m))


def euler_phi(m: int) -> int:
    return len(_cyclotomic(m)) - 1


class _Field:
    """Per-conductor constants: degree, modulus and the reduction table."""

    __slots__ = ("conductor", "phi", "modulus", "red", "powers")

    def __init__(self, m: int):
        self.conductor = m
        self.modulus = list(_cyclotomic(m))
        self.phi = len(self.modulus) - 1
        # red[k] = x**(phi+k) mod Phi_m for k = 0 .. phi-2
        self.red = []
        for k in range(self.phi, 2 * self.phi - 1):
            mono = [0] * k + [1]
            _, rem = _poly_divmod_int(mono, self.modulus)
            self.red.append(rem + [0] * (self.phi - len(rem)))
        # x**k mod Phi_m for k = 0 .. m-1
        self.powers = []
        for k in range(m):
            mono = [0] * k + [1]
            _, rem = _poly_divmod_int(mono, self.modulus)
            self.powers.append(tuple(rem + [0] * (self.phi - len(rem))))

    def reduce(self, poly: Sequence[int]) -> list[int]:
        _, rem = _poly_divmod_int(list(poly), self.modulus)
        return rem + [0] * (self.phi - len(rem))


@lru_cache(maxsize=None)
def field(m: int) -> _Field:
    if m < 1:
        raise ValueError(f"conductor must be positive, got {m}")
    return _Field(m)


def _normalize(num: Iterable[int], den: int) -> tuple[tuple[int, ...], int]:
    num = tuple(num)
    if den < 0:
        num = tuple(-c for c in num)
        den = -den
    g = den
    for c in num:
        if g == 1:
            break
        g = math.gcd(g, c)
    if g > 1:
        num = tuple(c // g for c in num)
        den //= g
    if not any(num):
        den = 1
    return num, den


class CycNum:
    """An exact element of Q(zeta_M); immutable and hashable.

    ``CycNum(M, coeffs)`` takes ``phi(M)`` rational power-basis coordinates.
    Python ints and Fractions mix freely with any conductor.
    """

    __slots__ = ("conductor", "_num", "_den")

    def __init__(self, conductor: int, coeffs: Iterable[Rational | str]):
        fracs = [Fraction(c) for c in coeffs]
        phi = field(conductor).phi
        if len(fracs) != phi:
            raise ValueError(f"expected {phi} coordinates for conductor {conductor}, got {len(fracs)}")
        den = 1
        for f in fracs:
            den = den * f.denominator // math.gcd(den, f.denominator)
        num = [int(f * den) for f in fracs]
        self.conductor = conductor
        self._num, self._den = _normalize(num, den)

    @classmethod
    def _raw(cls, conductor: int, num: Iterable[int], den: int = 1) -> "CycNum":
        obj = object.__new__(cls)
        obj.conductor = conductor
        obj._num, obj._den = _normalize(num, den)
        return obj

    @classmethod
    def from_rational(cls, conductor: int, value: Rational) -> "CycNum":
        value = Fraction(value)
        phi = field(conductor).phi
        return cls._raw(conductor, [value.numerator] + [0] * (phi - 1), value.denominator)

    @classmethod
    def zero(cls, conductor: int) -> "CycNum":
        return cls._raw(conductor, [0] * field(conductor).phi)

    @classmethod
    def one(cls, conductor: int) -> "CycNum":
        return cls.from_rational(conductor, 1)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self._den) for c in self._num)

    @property
    def numerator(self) -> tuple[int, ...]:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return not any(self._num)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self._num[1:])

    def _coerce(self, other) -> "CycNum":
        if isinstance(other, CycNum):
            if other.conductor != self.conductor:
                raise ConductorMismatch(
                    f"conductor {self.conductor} vs {other.conductor}")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNum.from_rational(self.conductor, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d1, d2 = self._den, o._den
        if d1 == d2:
            return CycNum._raw(self.conductor, (x + y for x, y in zip(self._num, o._num)), d1)
        return CycNum._raw(self.conductor,
                           (x * d2 + y * d1 for x, y in zip(self._num, o._num)), d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return CycNum._raw(self.conductor, (-x for x in self._num), self._den)

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
        f = field(self.conductor)
        num = kernels.mul_scalar(list(self._num), list(o._num), f.phi, f.red)
        return CycNum._raw(self.conductor, num, self._den * o._den)

    __rmul__ = __mul__

    def inverse(self) -> "CycNum":
        """Multiplicative inverse via extended gcd with the cyclotomic polynomial."""
        if self.is_zero():
            raise CycDivisionByZero("inverse of zero in a cyclotomic field")
        f = field(self.conductor)
        s = _inverse_mod([Fraction(c) for c in self._num], [Fraction(c) for c in f.modulus])
        # s is the inverse of the numerator polynomial; scale back by den
        s = [c * self._den for c in s]
        return CycNum(self.conductor, s + [0] * (f.phi - len(s)))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNum.one(self.conductor)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycNum.from_rational(self.conductor, other)
        if not isinstance(other, CycNum):
            return NotImplemented
        if other.conductor != self.conductor:
            raise ConductorMismatch(f"conductor {self.conductor} vs {other.conductor}")
        return self._den == other._den and self._num == other._num

    def __hash__(self):
        return hash((self.conductor, self._num, self._den))

    def __repr__(self):
        return f"CycNum({self.conductor}, {[str(c) for c in self.coeffs]})"

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "z" if i == 1 else f"z^{i}"
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, conductor: int, data: Sequence[str]) -> "CycNum":
        return cls(conductor, [Fraction(s) for s in data])


def _poly_mul_q(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _poly_divmod_q(num: list[Fraction], den: list[Fraction]):
    num = list(num)
    den = _trim(list(den))
    dn = len(den) - 1
    lead = den[-1]
    if len(num) - 1 < dn:
        return [Fraction(0)], _trim(num)
    quot = [Fraction(0)] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i] / lead
        if c:
            quot[i - dn] = c
            for j in range(dn + 1):
                num[i - dn + j] -= c * den[j]
    return _trim(quot), _trim(num[:dn] or [Fraction(0)])


def _inverse_mod(a: list[Fraction], mod: list[Fraction]) -> list[Fraction]:
    """Inverse of ``a`` modulo ``mod`` over Q by the extended Euclidean algorithm."""
    r0, r1 = _trim(list(mod)), _trim(list(a))
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while not (len(r1) == 1 and r1[0] == 0):
        q, r = _poly_divmod_q(r0, r1)
        qs = _poly_mul_q(q, s1)
        width = max(len(s0), len(qs))
        s_next = [(s0[i] if i < len(s0) else 0) - (qs[i] if i < len(qs) else 0)
                  for i in range(width)]
        r0, r1 = r1, r
        s0, s1 = s1, _trim(s_next)
    if len(r0) != 1:
        raise CycDivisionByZero("element is not invertible")
    g = r0[0]
    s = [c / g for c in s0]
    _, s = _poly_divmod_q(s, mod)
    return s


def root_of_unity(m: int, k: int) -> CycNum:
    """``zeta_m**k`` reduced modulo Phi_m."""
    f = field(m)
    return CycNum._raw(m, f.powers[k % m])


def from_integer_poly(m: int, poly: Sequence[int]) -> CycNum:
    """Reduce an integer polynomial in ``zeta_m`` into the power basis."""
    return CycNum._raw(m, field(m).reduce(poly))


class Embedding(NamedTuple):
    real: mpmath.mpf
    imag: mpmath.mpf
    err: mpmath.mpf

    @property
    def value(self) -> mpmath.mpc:
        return mpmath.mpc(self.real, self.imag)


def embed_complex(a: CycNum, precision: int = 256) -> Embedding:
    """Evaluate ``a`` at ``zeta_M = exp(2 pi i / M)``.

    ``err`` bounds the absolute error of both parts: each power of zeta is
    correctly rounded to within 2**-precision, plus one rounding per term.
    """
    with mpmath.workprec(precision + 16):
        m = a.conductor
        total = mpmath.mpc(0)
        weight = mpmath.mpf(0)
        for i, c in enumerate(a.coeffs):
            if c:
                cf = mpmath.mpf(c.numerator) / c.denominator
                total += cf * mpmath.expjpi(mpmath.mpf(2 * i) / m)
                weight += abs(cf)
        err = (weight + 1) * len(a.coeffs) * mpmath.ldexp(mpmath.mpf(4), -precision)
        return Embedding(+total.real, +total.imag, err)
