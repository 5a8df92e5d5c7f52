"""Truncated Laurent series in ``t = q**(1/N)`` with cyclotomic coefficients.

A :class:`QSeries` knows exactly which coefficients it determines: every
exponent below ``horizon`` is known (possibly zero), everything at or above
it is unknown.  Arithmetic propagates the horizon pessimistically, so a
result never claims a coefficient its inputs cannot determine.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

from . import kernels
from .coeffring import CycNum, field
from .errors import HorizonError, LevelMismatch, OrderUndetermined


def default_horizon(level: int) -> int:
    return 40 * level


class QSeries:
    """Immutable truncated series ``sum c_k t**k + O(t**horizon)``.

    ``coeffs[i]`` is the coefficient of ``t**(min_exp + i)``.  Leading zeros
    are stripped on construction; a series with no known nonzero term has
    ``coeffs == ()`` and ``min_exp == horizon``.
    """

    __slots__ = ("level", "min_exp", "coeffs", "horizon")

    def __init__(self, level: int, min_exp: int, coeffs: Iterable[CycNum], horizon: int):
        coeffs = list(coeffs)[:max(horizon - min_exp, 0)]
        start = 0
        while start < len(coeffs) and coeffs[start].is_zero():
            start += 1
        self.level = level
        self.horizon = horizon
        if start == len(coeffs):
            self.min_exp = horizon
            self.coeffs = ()
            return
        self.min_exp = min_exp + start
        padded = coeffs[start:]
        # pad to the horizon so every known exponent is explicit
        missing = horizon - self.min_exp - len(padded)
        if missing > 0:
            padded.extend([CycNum.zero(level)] * missing)
        self.coeffs = tuple(padded)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_ints(cls, level: int, min_exp: int, values: Sequence[int], horizon: int) -> "QSeries":
        return cls(level, min_exp, [CycNum.from_rational(level, v) for v in values], horizon)

    @classmethod
    def monomial(cls, level: int, exp: int, coeff: CycNum | int | Fraction, horizon: int) -> "QSeries":
        if not isinstance(coeff, CycNum):
            coeff = CycNum.from_rational(level, coeff)
        return cls(level, exp, [coeff], horizon)

    @classmethod
    def _from_buffer(cls, level: int, min_exp: int, buf: list[int], den: int, count: int,
                     horizon: int) -> "QSeries":
        phi = field(level).phi
        coeffs = [CycNum._raw(level, buf[k * phi:(k + 1) * phi], den) for k in range(count)]
        return cls(level, min_exp, coeffs, horizon)

    # basic accessors ------------------------------------------------------

    @property
    def precision(self) -> int:
        """Number of known terms from ``min_exp`` up to the horizon."""
        return self.horizon - self.min_exp

    def is_known_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exp: int) -> CycNum:
        if exp >= self.horizon:
            raise HorizonError(f"t^{exp} is beyond the horizon {self.horizon}")
        if exp < self.min_exp:
            return CycNum.zero(self.level)
        return self.coeffs[exp - self.min_exp]

    def leading_coefficient(self) -> CycNum:
        if not self.coeffs:
            raise OrderUndetermined("no nonzero coefficient below the horizon")
        return self.coeffs[0]

    def truncate(self, horizon: int) -> "QSeries":
        if horizon > self.horizon:
            raise HorizonError(f"cannot extend horizon {self.horizon} to {horizon}")
        return QSeries(self.level, self.min_exp, self.coeffs, horizon)

    def _check_level(self, other: "QSeries") -> None:
        if self.level != other.level:
            raise LevelMismatch(f"level {self.level} vs {other.level}")

    def _buffer(self, count: int) -> tuple[list[int], int]:
        """Integer coordinate buffer for the first ``count`` terms and its denominator."""
        phi = field(self.level).phi
        terms = self.coeffs[:count]
        den = 1
        for c in terms:
            d = c.denominator
            if d != 1:
                den = den * d // math.gcd(den, d)
        buf = []
        for c in terms:
            scale = den // c.denominator
            if scale == 1:
                buf.extend(c.numerator)
            else:
                buf.extend(x * scale for x in c.numerator)
        buf.extend([0] * ((count - len(terms)) * phi))
        return buf, den

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycNum)):
            other = QSeries.monomial(self.level, 0, other, self.horizon)
        if not isinstance(other, QSeries):
            return NotImplemented
        self._check_level(other)
        horizon = min(self.horizon, other.horizon)
        lo = min(self.min_exp, other.min_exp, horizon)
        out = []
        for e in range(lo, horizon):
            out.append(self.coefficient(e) + other.coefficient(e))
        return QSeries(self.level, lo, out, horizon)

    __radd__ = __add__

    def __neg__(self):
        return QSeries(self.level, self.min_exp, [-c for c in self.coeffs], self.horizon)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CycNum)):
            other = QSeries.monomial(self.level, 0, other, self.horizon)
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c: CycNum | int | Fraction) -> "QSeries":
        return QSeries(self.level, self.min_exp, [x * c for x in self.coeffs], self.horizon)

    def shift(self, k: int) -> "QSeries":
        """Multiply by ``t**k``."""
        return QSeries(self.level, self.min_exp + k, self.coeffs, self.horizon + k)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycNum)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return series_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return series_pow(self, e)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.level == other.level and self.min_exp == other.min_exp
                and self.horizon == other.horizon and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.level, self.min_exp, self.horizon, self.coeffs))

    def __repr__(self):
        shown = []
        for i, c in enumerate(self.coeffs[:6]):
            if c:
                shown.append(f"({c})*t^{self.min_exp + i}")
        body = " + ".join(shown) if shown else "0"
        return f"QSeries(N={self.level}, {body} + ... + O(t^{self.horizon}))"

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "min_exp": self.min_exp,
            "horizon": self.horizon,
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "QSeries":
        level = int(data["level"])
        coeffs = [CycNum.from_json(level, c) for c in data["coeffs"]]
        return cls(level, int(data["min_exp"]), coeffs, int(data["horizon"]))

    @classmethod
    def from_json(cls, text: str) -> "QSeries":
        return cls.from_dict(json.loads(text))


def series_mul(a: QSeries, b: QSeries) -> QSeries:
    """Product; the horizon is ``min(a.horizon + b.min_exp, b.horizon + a.min_exp)``."""
    a._check_level(b)
    horizon = min(a.horizon + b.min_exp, b.horizon + a.min_exp)
    min_exp = a.min_exp + b.min_exp
    count = horizon - min_exp
    if not a.coeffs or not b.coeffs or count <= 0:
        return QSeries(a.level, horizon, [], horizon)
    f = field(a.level)
    na = min(len(a.coeffs), count)
    nb = min(len(b.coeffs), count)
    abuf, aden = a._buffer(na)
    bbuf, bden = b._buffer(nb)
    out = kernels.mul_trunc(abuf, na, bbuf, nb, count, f.phi, f.red)
    return QSeries._from_buffer(a.level, min_exp, out, aden * bden, count, horizon)


def series_inv(a: QSeries) -> QSeries:
    """Multiplicative inverse, solved coefficient by coefficient.

    The result has ``min_exp == -a.min_exp`` and the same number of known
    terms as ``a``.
    """
    if not a.coeffs:
        raise OrderUndetermined("cannot invert a series with no known nonzero term")
    lead = a.coeffs[0]
    if lead.is_zero():
        raise ZeroDivisionError("leading coefficient is zero")
    count = a.precision
    w = lead.inverse()
    normalized = [c * w for c in a.coeffs[:count]]
    f = field(a.level)
    den = 1
    for c in normalized:
        d = c.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    buf = []
    for c in normalized:
        scale = den // c.denominator
        buf.extend(x * scale for x in c.numerator)
    scaled = kernels.inv_scaled(buf, count, f.phi, f.red, den)
    coeffs = []
    power = 1
    for k in range(count):
        coeffs.append(CycNum._raw(a.level, scaled[k * f.phi:(k + 1) * f.phi], power) * w)
        power *= den
    return QSeries(a.level, -a.min_exp, coeffs, -a.min_exp + count)


def series_pow(a: QSeries, e: int) -> QSeries:
    """``a**e`` by binary exponentiation; negative ``e`` inverts first.

    The result carries ``e*min_exp + precision`` as its horizon for every
    ``e``, including ``e == 0``.
    """
    if e < 0:
        return series_pow(series_inv(a), -e)
    if not a.coeffs:
        if e == 0:
            raise OrderUndetermined("a**0 of a series with unknown order")
        return QSeries(a.level, a.horizon * e, [], a.horizon * e)
    precision = a.precision
    base = a.shift(-a.min_exp)
    result = QSeries.monomial(a.level, 0, 1, precision)
    k = e
    while k:
        if k & 1:
            result = series_mul(result, base)
        k >>= 1
        if k:
            base = series_mul(base, base)
    return result.shift(a.min_exp * e)


def t_order(a: QSeries) -> int:
    """Smallest t-exponent with a nonzero coefficient."""
    if not a.coeffs:
        raise OrderUndetermined(
            f"all coefficients below t^{a.horizon} vanish; order undetermined at this horizon")
    return a.min_exp


def series_eq_up_to(a: QSeries, b: QSeries, k: int) -> bool:
    """True iff ``a`` and ``b`` agree on every exponent below ``k``."""
    return first_difference(a, b, k) is None


def first_difference(a: QSeries, b: QSeries, k: int) -> int | None:
    """Smallest exponent below ``k`` where ``a`` and ``b`` differ, else ``None``."""
    a._check_level(b)
    if k > min(a.horizon, b.horizon):
        raise HorizonError(
            f"comparison up to t^{k} exceeds horizons {a.horizon}, {b.horizon}")
    lo = min(a.min_exp, b.min_exp)
    for e in range(lo, k):
        if a.coefficient(e) != b.coefficient(e):
            return e
    return None
