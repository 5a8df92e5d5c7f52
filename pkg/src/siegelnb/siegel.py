"""Siegel units ``g_v**(12N)`` as exact q-series, their orders and Galois images.

Every unit is expanded in ``t = q**(1/N)``.  For ``v = (a/N, b/N)`` the
12N-th power is

    zeta_N**(6b(a-N)) * t**(6a**2 - 6aN + N**2)
        * [(1 - t**a zeta**b) prod_{n>=1} (1 - t**(nN+a) zeta**b)(1 - t**(nN-a) zeta**-b)]**(12N)

which has integral exponents and coefficients in Z[zeta_N].
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import kernels
from .coeffring import CycNum, field, root_of_unity
from .errors import PreconditionError
from .modgroup import Family, GroupElement, act_on_index, enumerate_group, membership
from .qseries import QSeries, series_mul, series_pow, t_order


@dataclass(frozen=True, order=True)
class IndexVector:
    """``v = (a/N, b/N)`` modulo Z**2 and sign; stored canonically."""

    level: int
    a: int
    b: int

    @classmethod
    def make(cls, level: int, a: int, b: int) -> "IndexVector":
        if level < 2:
            raise ValueError("level must be at least 2")
        pair = (a % level, b % level)
        if pair == (0, 0):
            raise ValueError(f"({a}, {b})/{level} lies in Z^2")
        neg = ((-a) % level, (-b) % level)
        return cls(level, *min(pair, neg))

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)

    def __str__(self) -> str:
        return f"({self.a}/{self.level}, {self.b}/{self.level})"


@dataclass(frozen=True)
class GConfig:
    """Level and exponents of ``g = g_[0,1/N]**(-12N l) * g_[1/N,0]**(-12N m)``."""

    N: int
    l: int
    m: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"level must be at least 2, got {self.N}")
        if not self.l > self.m > 0:
            raise ValueError(f"need l > m > 0, got l={self.l}, m={self.m}")


def bernoulli2(x: Fraction | int) -> Fraction:
    x = Fraction(x)
    return x * x - x + Fraction(1, 6)


def frac_part(x: Fraction | int) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def act(s: GroupElement, v: IndexVector) -> IndexVector:
    """Index-level Galois action ``v -> s^T v``."""
    if s.level != v.level:
        raise ValueError(f"level {s.level} vs {v.level}")
    x, y = act_on_index(s, v.pair)
    assert (x, y) != (0, 0), "s^T v vanished; s is not invertible"
    return IndexVector.make(v.level, x, y)


def siegel_order(v: IndexVector) -> Fraction:
    """q-order of ``g_v**(12N)``: ``6N * B2(<v1>)``."""
    n = v.level
    return 6 * n * bernoulli2(frac_part(Fraction(v.a, n)))


def siegel_t_order(v: IndexVector) -> int:
    order = v.level * siegel_order(v)
    assert order.denominator == 1
    return int(order)


# ---------------------------------------------------------------------------
# exact expansion


def _pow_int_buffer(buf: list[int], n: int, phi: int, red: list, e: int) -> list[int]:
    result = [0] * (n * phi)
    if n:
        result[0] = 1
    base = buf
    while e:
        if e & 1:
            result = kernels.mul_trunc(result, n, base, n, n, phi, red)
        e >>= 1
        if e:
            base = kernels.mul_trunc(base, n, base, n, n, phi, red)
    return result


def expansion_from_representative(level: int, a: int, b: int, horizon: int) -> QSeries:
    """Expand ``g_v**(12N)`` for ``v = (a/N, b/N)`` using this exact representative.

    ``a`` and ``b`` may be any integers with ``(a, b)`` not divisible by N;
    no reduction mod N or sign normalization is applied, so comparing two
    representatives is a genuine test of the invariance of the 12N-th power.
    """
    n = level
    if (a % n, b % n) == (0, 0):
        raise ValueError("index vector lies in Z^2")
    f = field(n)
    power = 12 * n
    # exponent and root of unity of the prefactor, raised to the 12N-th power
    k0 = 6 * a * a - 6 * a * n + n * n
    const = root_of_unity(n, 6 * b * (a - n))
    shift = 0
    unit_const = CycNum.one(n)
    positive: list[tuple[int, int]] = []

    def absorb(e: int, c: int) -> None:
        nonlocal shift, unit_const
        if e > 0:
            positive.append((e, c))
        elif e == 0:
            unit_const = unit_const * (1 - root_of_unity(n, c))
        else:
            # 1 - t^e z^c = -z^c t^e (1 - t^-e z^-c)
            unit_const = unit_const * (-root_of_unity(n, c))
            shift += e
            positive.append((-e, -c))

    absorb(a, b)
    # every factor with a non-positive exponent has k <= |a|/N
    k_last = abs(a) // n + 1
    for k in range(1, k_last + 1):
        absorb(k * n + a, b)
        absorb(k * n - a, -b)
    order = k0 + power * shift
    precision = horizon - order
    if precision <= 0:
        return QSeries(n, horizon, [], horizon)
    # omitted factors are 1 + O(t**precision)
    k = k_last + 1
    while min(k * n + a, k * n - a) < precision:
        absorb(k * n + a, b)
        absorb(k * n - a, -b)
        k += 1
    buf = [0] * (precision * f.phi)
    buf[0] = 1
    for e, c in positive:
        if e < precision:
            buf = kernels.mul_binomial(buf, precision, f.phi, f.red, e,
                                       list(root_of_unity(n, c).numerator))
    buf = _pow_int_buffer(buf, precision, f.phi, f.red, power)
    scale = const * unit_const ** power
    coeffs = [CycNum._raw(n, buf[i * f.phi:(i + 1) * f.phi]) * scale for i in range(precision)]
    return QSeries(n, order, coeffs, horizon)


_CACHE: dict[tuple[int, int, int], QSeries] = {}
_CACHE_LOCK = threading.Lock()


def siegel_power_expansion(v: IndexVector, horizon: int) -> QSeries:
    """Exact expansion of ``g_v**(12N)`` up to ``t**horizon``.

    Results are memoized per index vector; a request below a cached horizon
    is served by truncation.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    return _expansion(v, horizon)


def _expansion(v: IndexVector, horizon: int) -> QSeries:
    key = (v.level, v.a, v.b)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None and hit.horizon >= horizon:
        return hit if hit.horizon == horizon else hit.truncate(horizon)
    series = expansion_from_representative(v.level, v.a, v.b, horizon)
    with _CACHE_LOCK:
        current = _CACHE.get(key)
        if current is None or current.horizon < horizon:
            _CACHE[key] = series
    return series


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


# ---------------------------------------------------------------------------
# products of units


def unit_order(exponents: Mapping[IndexVector, int]) -> int:
    """t-order of ``prod G_v**e_v`` from the closed-form order formula."""
    return sum(e * siegel_t_order(v) for v, e in exponents.items())


def unit_expansion(level: int, exponents: Mapping[IndexVector, int], horizon: int) -> QSeries:
    """Expand ``prod_v (g_v**(12N))**e_v`` up to ``t**horizon``.

    Each factor is expanded with the same relative precision so the product
    lands exactly on ``horizon``.
    """
    exponents = {v: e for v, e in exponents.items() if e}
    order = unit_order(exponents)
    precision = horizon - order
    if precision <= 0:
        return QSeries(level, horizon, [], horizon)
    result = QSeries.monomial(level, 0, 1, precision)
    for v in sorted(exponents):
        e = exponents[v]
        base = _expansion(v, siegel_t_order(v) + precision)
        result = series_mul(result, series_pow(base, e))
    return result


def _merge(*parts: Iterable[tuple[IndexVector, int]]) -> dict[IndexVector, int]:
    out: dict[IndexVector, int] = {}
    for part in parts:
        for v, e in part:
            out[v] = out.get(v, 0) + e
    return {v: e for v, e in out.items() if e}


def g_vectors(cfg: GConfig, s: GroupElement | None = None) -> list[tuple[IndexVector, int]]:
    """Index vectors and unit exponents of ``g`` (or of ``g**s``)."""
    v_l = IndexVector.make(cfg.N, 0, 1)
    v_m = IndexVector.make(cfg.N, 1, 0)
    if s is not None:
        v_l, v_m = act(s, v_l), act(s, v_m)
    return [(v_l, -cfg.l), (v_m, -cfg.m)]


def g_order(cfg: GConfig) -> Fraction:
    """q-order ``-6N(l B2(0) + m B2(1/N))`` of ``g``."""
    n = cfg.N
    return -6 * n * (cfg.l * bernoulli2(0) + cfg.m * bernoulli2(Fraction(1, n)))


def g_t_order(cfg: GConfig) -> int:
    return unit_order(_merge(g_vectors(cfg)))


def g_expansion(cfg: GConfig, horizon: int) -> QSeries:
    return unit_expansion(cfg.N, _merge(g_vectors(cfg)), horizon)


def g_image_order(cfg: GConfig, s: GroupElement) -> int:
    return unit_order(_merge(g_vectors(cfg, s)))


def g_image_expansion(cfg: GConfig, s: GroupElement, horizon: int) -> QSeries:
    """Expansion of ``g**s = g_{s^T(0,1/N)}**(-12Nl) * g_{s^T(1/N,0)}**(-12Nm)``."""
    if s.level != cfg.N:
        raise ValueError(f"element of level {s.level} used with N={cfg.N}")
    return unit_expansion(cfg.N, _merge(g_vectors(cfg, s)), horizon)


def g_image_relative(cfg: GConfig, s: GroupElement, precision: int) -> QSeries:
    """``g**s`` with ``precision`` known terms past its own leading exponent."""
    return g_image_expansion(cfg, s, g_image_order(cfg, s) + precision)


def ratio_order(cfg: GConfig, s: GroupElement) -> Fraction:
    """Closed-form q-order of ``g**s / g``."""
    n = cfg.N
    return 6 * n * (cfg.l * bernoulli2(0) + cfg.m * bernoulli2(Fraction(1, n))
                    - cfg.l * bernoulli2(frac_part(Fraction(s.c, n)))
                    - cfg.m * bernoulli2(frac_part(Fraction(s.a, n))))


def ratio_expansion(cfg: GConfig, s: GroupElement, horizon: int) -> QSeries:
    """Exact expansion of ``g**s / g`` (factors shared by both cancel first)."""
    inverse_g = [(v, -e) for v, e in g_vectors(cfg)]
    return unit_expansion(cfg.N, _merge(g_vectors(cfg, s), inverse_g), horizon)


def ratio_order_from_expansion(cfg: GConfig, s: GroupElement, precision: int = 1) -> Fraction:
    """q-order of ``g**s / g`` read off the exact expansion (the oracle route)."""
    exps = _merge(g_vectors(cfg, s), [(v, -e) for v, e in g_vectors(cfg)])
    order = unit_order(exps)
    series = unit_expansion(cfg.N, exps, order + precision)
    return Fraction(t_order(series), cfg.N)


@dataclass
class Lemma22Verdict:
    N: int
    l: int
    m: int
    orders: dict[GroupElement, Fraction]
    equality_set: list[GroupElement]
    gamma1_image: list[GroupElement]

    @property
    def nonnegative(self) -> bool:
        return all(o >= 0 for o in self.orders.values())

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.equality_set == self.gamma1_image

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "l": self.l,
            "m": self.m,
            "pass": self.passed,
            "nonnegative": self.nonnegative,
            "equality_set": [list(s.entries) for s in self.equality_set],
            "gamma1_image": [list(s.entries) for s in self.gamma1_image],
            "orders": [{"sigma": list(s.entries), "order": str(o)}
                       for s, o in sorted(self.orders.items())],
        }


def verify_lemma22(cfg: GConfig) -> Lemma22Verdict:
    """Exhaustive check: every ratio order is >= 0, zero exactly on +-Gamma_1(N)."""
    group = enumerate_group(cfg.N)
    orders = {s: ratio_order(cfg, s) for s in group}
    equality = sorted(s for s, o in orders.items() if o == 0)
    gamma1 = sorted(s for s in group if membership(s, Family.GAMMA1))
    return Lemma22Verdict(cfg.N, cfg.l, cfg.m, orders, equality, gamma1)


def require_gamma0(elements: Iterable[GroupElement]) -> None:
    bad = [s for s in elements if not membership(s, Family.GAMMA0_UPPER)]
    if bad:
        raise PreconditionError(f"{bad[0]} is outside the Gamma^0(N) image")
