"""Floating evaluation of Siegel units at ``tau = r*i`` in log-polar form.

All magnitudes stay in log space; ``g`` itself is never materialized.  The
``err`` fields are forward-propagated error estimates (no interval
arithmetic): an absolute bound on the error of both ``log|z|`` and
``arg z``, which is also a bound on the relative error of ``z`` to first
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from .coeffring import embed_complex
from .errors import PrecisionError, SearchExhausted
from .modgroup import (Family, GroupElement, Subgroup, enumerate_group, membership,
                       multiply)
from .qseries import QSeries
from .siegel import GConfig, IndexVector, bernoulli2, g_vectors, siegel_order

DEFAULT_PRECISION = 256
MAX_PRECISION = 4096
DOUBLE_LOG_LIMIT = 700.0


def fmt(x, digits: int = 25) -> str:
    """Deterministic decimal rendering of an mpf."""
    return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False)


def _reduce_phase(theta):
    two_pi = 2 * mpmath.pi
    theta = theta - two_pi * mpmath.floor(theta / two_pi)
    if theta > mpmath.pi:
        theta -= two_pi
    return theta


@dataclass(frozen=True)
class LogComplex:
    """``exp(log_mag + i*phase)`` with an absolute error bound ``err`` on both fields."""

    log_mag: mpmath.mpf
    phase: mpmath.mpf
    err: mpmath.mpf

    @classmethod
    def make(cls, log_mag, phase, err=0) -> "LogComplex":
        return cls(mpmath.mpf(log_mag), _reduce_phase(mpmath.mpf(phase)), mpmath.mpf(err))

    @classmethod
    def one(cls) -> "LogComplex":
        return cls.make(0, 0, 0)

    @classmethod
    def from_complex(cls, z, err=0) -> "LogComplex":
        z = mpmath.mpc(z)
        if z == 0:
            raise ValueError("log of zero")
        return cls.make(mpmath.log(abs(z)), mpmath.arg(z), err)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex.make(self.log_mag + other.log_mag, self.phase + other.phase,
                               self.err + other.err)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex.make(self.log_mag - other.log_mag, self.phase - other.phase,
                               self.err + other.err)

    def __pow__(self, k: int) -> "LogComplex":
        return LogComplex.make(self.log_mag * k, self.phase * k, self.err * abs(k))

    def __add__(self, other: "LogComplex") -> "LogComplex":
        big, small = (self, other) if self.log_mag >= other.log_mag else (other, self)
        rel = mpmath.exp(small.log_mag - big.log_mag + mpmath.mpc(0, small.phase - big.phase))
        total = 1 + rel
        if total == 0:
            raise ValueError("exact cancellation in log-space addition")
        # error of the small term is scaled by |rel|/|total| relative to the result
        err = big.err + (small.err + big.err) * abs(rel) / abs(total)
        return LogComplex.make(big.log_mag + mpmath.log(abs(total)),
                               big.phase + mpmath.arg(total), err)

    def to_mpc(self) -> mpmath.mpc:
        return mpmath.exp(mpmath.mpc(self.log_mag, self.phase))

    def to_complex(self) -> complex:
        """Ordinary complex value; refused when the magnitude leaves double range."""
        if abs(self.log_mag) > DOUBLE_LOG_LIMIT:
            raise OverflowError(f"log-magnitude {fmt(self.log_mag, 8)} outside double range")
        mag = math.exp(float(self.log_mag))
        ph = float(self.phase)
        return complex(mag * math.cos(ph), mag * math.sin(ph))

    def magnitude_upper(self):
        return mpmath.exp(self.log_mag + self.err)

    def to_dict(self) -> dict:
        return {"log_mag": fmt(self.log_mag), "phase": fmt(self.phase), "err": fmt(self.err, 6)}


# ---------------------------------------------------------------------------
# single units


def truncation_terms(r, precision: int) -> int:
    """``ceil(digits * ln 10 / (2 pi r)) + 1`` product factors for ``precision`` bits."""
    digits = precision * math.log10(2)
    return int(math.ceil(digits * math.log(10) / (2 * math.pi * float(r)))) + 1


def _eval_pair(level: int, a: int, b: int, r, precision: int) -> LogComplex:
    n = level
    a %= n
    b %= n
    if (a, b) == (0, 0):
        raise ValueError("index vector lies in Z^2")
    r = mpmath.mpf(r)
    if r <= 0:
        raise ValueError("r must be positive")
    n_max = truncation_terms(r, precision)
    with mpmath.workprec(precision + 32):
        big_r = mpmath.exp(-2 * mpmath.pi * r)
        while big_r ** (n_max - 1) > mpmath.mpf(1) / 2:
            n_max += 1
        x = mpmath.exp(-2 * mpmath.pi * r / n)
        zeta = lambda k: mpmath.expjpi(mpmath.mpf(2 * (k % n)) / n)
        total = mpmath.mpc(0)
        total += mpmath.log(1 - x ** a * zeta(b))
        xa, xma = x ** a, x ** (-a)
        rn = mpmath.mpf(1)
        for k in range(1, n_max + 1):
            rn *= big_r
            total += mpmath.log(1 - rn * xa * zeta(b))
            total += mpmath.log(1 - rn * xma * zeta(-b))
        power = 12 * n
        v1 = Fraction(a, n)
        q_order = 6 * n * bernoulli2(v1)
        log_mag = power * total.real - 2 * mpmath.pi * r * (mpmath.mpf(q_order.numerator) / q_order.denominator)
        phase = power * total.imag + 2 * mpmath.pi * mpmath.mpf(6 * b * (a - n)) / n
        tail = power * 4 * big_r ** (n_max - 1) / (1 - big_r)
        rounding = power * (2 * n_max + 4) * mpmath.ldexp(mpmath.mpf(1), -precision)
        return LogComplex.make(log_mag, phase, tail + rounding)


@lru_cache(maxsize=4096)
def _eval_cached(level: int, a: int, b: int, r_key: str, precision: int) -> LogComplex:
    return _eval_pair(level, a, b, mpmath.mpf(r_key), precision)


def _rkey(r) -> str:
    return mpmath.nstr(mpmath.mpf(r), 40)


def eval_siegel_pair(level: int, a: int, b: int, r, precision: int = DEFAULT_PRECISION) -> LogComplex:
    """``g_v(ri)**(12N)`` for the representative ``(a mod N, b mod N)`` (no sign folding)."""
    return _eval_cached(level, a % level, b % level, _rkey(r), precision)


def eval_siegel_unit(v: IndexVector, r, precision: int = DEFAULT_PRECISION,
                     tol=None) -> LogComplex:
    """Value of ``g_v(ri)**(12N)`` in log-polar form.

    With ``tol`` given, the precision is doubled until ``err < tol``.
    """
    if mpmath.mpf(r) <= 0:
        raise ValueError("r must be positive")
    prec = precision
    while True:
        val = eval_siegel_pair(v.level, v.a, v.b, r, prec)
        if tol is None or val.err < tol:
            return val
        prec *= 2
        if prec > MAX_PRECISION:
            raise PrecisionError(f"err {fmt(val.err, 6)} above {tol} at {prec // 2} bits")


def eval_unit_product(vectors: Iterable[tuple[IndexVector, int]], r,
                      precision: int = DEFAULT_PRECISION) -> LogComplex:
    """``prod (g_v(ri)**(12N))**e`` summed in log space."""
    log_mag = mpmath.mpf(0)
    phase = mpmath.mpf(0)
    err = mpmath.mpf(0)
    with mpmath.workprec(precision + 32):
        for v, e in vectors:
            val = eval_siegel_unit(v, r, precision)
            log_mag += e * val.log_mag
            phase += e * val.phase
            err += abs(e) * val.err
        return LogComplex.make(log_mag, phase, err)


def eval_ratio(cfg: GConfig, s: GroupElement, r, precision: int = DEFAULT_PRECISION) -> LogComplex:
    """``g**s(ri) / g(ri)`` from differences of the four unit logarithms.

    Terms are grouped as ``l*(L[0,1] - L[s^T(0,1)]) + m*(L[1,0] - L[s^T(1,0)])``,
    so the identity gives exactly zero.
    """
    base = g_vectors(cfg)
    image = g_vectors(cfg, s)
    with mpmath.workprec(precision + 32):
        log_mag = mpmath.mpf(0)
        phase = mpmath.mpf(0)
        err = mpmath.mpf(0)
        for (v0, e0), (v1, _) in zip(base, image):
            # e0 is -l or -m: g**s/g contributes e0*(L[v1] - L[v0])
            if v0 == v1:
                continue
            u0 = eval_siegel_unit(v0, r, precision)
            u1 = eval_siegel_unit(v1, r, precision)
            log_mag += e0 * (u1.log_mag - u0.log_mag)
            phase += e0 * (u1.phase - u0.phase)
            err += abs(e0) * (u0.err + u1.err)
        return LogComplex.make(log_mag, phase, err)


# ---------------------------------------------------------------------------
# parameter search


@dataclass(frozen=True)
class SearchParams:
    N: int
    l: int
    m: int
    r: mpmath.mpf
    epsilon: Fraction
    d: int
    max_ratio_log: mpmath.mpf
    err: mpmath.mpf
    certified: bool
    precision: int = DEFAULT_PRECISION
    worst: GroupElement | None = None

    @property
    def R(self):
        with mpmath.workprec(self.precision + 32):
            return mpmath.exp(-2 * mpmath.pi * self.r)

    @property
    def config(self) -> GConfig:
        return GConfig(self.N, self.l, self.m)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "epsilon": str(self.epsilon),
            "l": self.l,
            "m": self.m,
            "r": fmt(self.r, 12),
            "R": fmt(self.R),
            "max_ratio_log": fmt(self.max_ratio_log),
            "err": fmt(self.err, 6),
            "certified": self.certified,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SearchParams":
        return cls(N=int(data["N"]), l=int(data["l"]), m=int(data["m"]),
                   r=mpmath.mpf(data["r"]), epsilon=Fraction(data["epsilon"]),
                   d=int(data["d"]), max_ratio_log=mpmath.mpf(data["max_ratio_log"]),
                   err=mpmath.mpf(data["err"]), certified=bool(data["certified"]))


def default_epsilon(level: int) -> Fraction:
    d = len(enumerate_group(level))
    return Fraction(1, math.factorial(d) - 1)


def log_of_fraction(x: Fraction, precision: int = DEFAULT_PRECISION):
    with mpmath.workprec(precision + 32):
        return mpmath.log(x.numerator) - mpmath.log(x.denominator)


def max_ratio(cfg: GConfig, elements: Iterable[GroupElement], r,
              precision: int = DEFAULT_PRECISION):
    """Largest ``log|g**s/g|`` over ``elements``; returns ``(log, err, worst)``."""
    best, best_err, worst = None, mpmath.mpf(0), None
    for s in elements:
        val = eval_ratio(cfg, s, r, precision)
        if best is None or val.log_mag + val.err > best + best_err:
            best, best_err, worst = val.log_mag, val.err, s
    return best, best_err, worst


def check_parameters(level: int, l: int, m: int, r, epsilon: Fraction | None = None,
                     precision: int = DEFAULT_PRECISION) -> SearchParams:
    """Evaluate every non-identity coset at ``(l, m, r)`` and certify against ``epsilon``."""
    group = enumerate_group(level)
    epsilon = default_epsilon(level) if epsilon is None else Fraction(epsilon)
    cfg = GConfig(level, l, m)
    others = [s for s in group if not s.is_identity()]
    best, err, worst = max_ratio(cfg, others, r, precision)
    if best is None:
        best = mpmath.mpf("-inf")
    log_eps = log_of_fraction(epsilon, precision)
    certified = bool(best + err < log_eps)
    return SearchParams(level, l, m, mpmath.mpf(r), epsilon, len(group), best, err,
                        certified, precision, worst)


def find_parameters(level: int, epsilon: Fraction | None = None, budget: int = 64,
                    precision: int = DEFAULT_PRECISION) -> SearchParams:
    """Doubling search over ``m`` and ``r`` with ``l = m + 1``.

    Candidates ``(m, r) = (2**i, 2**j)`` are visited by increasing ``i + j``;
    each one is certified by evaluating every coset outside +-Gamma(N).
    Raises :class:`SearchExhausted` (carrying the best miss) when ``budget``
    candidates fail.
    """
    if level < 2:
        raise ValueError("level must be at least 2")
    tried = 0
    best = None
    total = 0
    while tried < budget:
        for i in range(total + 1):
            if tried >= budget:
                break
            j = total - i
            m, r = 2 ** i, 2 ** j
            params = check_parameters(level, m + 1, m, r, epsilon, precision)
            tried += 1
            if params.certified:
                return params
            if best is None or params.max_ratio_log < best.max_ratio_log:
                best = params
        total += 1
    raise SearchExhausted(f"no certified parameters within {budget} candidates", best)


# ---------------------------------------------------------------------------
# determinant of the ratio matrix


@dataclass(frozen=True)
class DetResult:
    det: LogComplex
    lower_bound: mpmath.mpf
    max_ratio_log: mpmath.mpf | None
    det_abs_err: mpmath.mpf
    order: int

    def to_dict(self) -> dict:
        return {
            "det": self.det.to_dict(),
            "det_abs_err": fmt(self.det_abs_err, 6),
            "lower_bound": fmt(self.lower_bound),
            "max_ratio_log": None if self.max_ratio_log is None else fmt(self.max_ratio_log),
            "n": self.order,
        }


def ratio_matrix(cfg: GConfig, elements: Sequence[GroupElement], r,
                 precision: int = DEFAULT_PRECISION) -> list[list[LogComplex]]:
    """Entries ``g**(s_j s_i)(ri) / g(ri)`` as log-polar values."""
    cache: dict[GroupElement, LogComplex] = {}
    rows = []
    for si in elements:
        row = []
        for sj in elements:
            p = multiply(sj, si)
            if p not in cache:
                cache[p] = eval_ratio(cfg, p, r, precision)
            row.append(cache[p])
        rows.append(row)
    return rows


def ratio_matrix_det(cfg: GConfig, subgroup: Subgroup, r,
                     precision: int = DEFAULT_PRECISION) -> DetResult:
    """Numeric determinant of the ratio matrix plus the analytic lower bound.

    The bound is ``1 - (n! - 1) * max|g**s/g|`` over non-identity ``s`` in the
    subgroup, with the maximum taken at its upper error limit.  The
    determinant is computed by LU at the working precision; its error is the
    multilinear perturbation bound ``sum_i |e_i| prod_{j != i} (|a_j| + |e_j|)``
    over columns plus a rounding allowance.
    """
    elements = list(subgroup.elements)
    n = len(elements)
    logs = ratio_matrix(cfg, elements, r, precision)
    with mpmath.workprec(precision + 32):
        matrix = mpmath.matrix([[z.to_mpc() for z in row] for row in logs])
        det_val = mpmath.det(matrix) if n else mpmath.mpf(1)
        col_norm = [mpmath.sqrt(mpmath.fsum(abs(matrix[i, j]) ** 2 for i in range(n)))
                    for j in range(n)]
        col_err = [mpmath.sqrt(mpmath.fsum(
            (abs(logs[i][j].to_mpc()) * mpmath.expm1(logs[i][j].err)) ** 2 for i in range(n)))
            for j in range(n)]
        perturb = mpmath.mpf(0)
        for i in range(n):
            term = col_err[i]
            for j in range(n):
                if j != i:
                    term *= col_norm[j] + col_err[j]
            perturb += term
        hadamard = mpmath.fprod(col_norm) if n else mpmath.mpf(1)
        rounding = 4 * n ** 3 * mpmath.ldexp(1, -precision) * hadamard
        det_abs_err = perturb + rounding
        if det_val == 0:
            det = LogComplex.make(mpmath.mpf("-inf"), 0, 0)
        else:
            rel = det_abs_err / abs(det_val)
            log_err = -mpmath.log1p(-rel) if rel < 1 else mpmath.inf
            det = LogComplex.make(mpmath.log(abs(det_val)), mpmath.arg(det_val), log_err)
    others = [s for s in elements if not s.is_identity()]
    if others:
        top, top_err, _ = max_ratio(cfg, others, r, precision)
        with mpmath.workprec(precision + 32):
            bound = 1 - (math.factorial(n) - 1) * mpmath.exp(top + top_err)
    else:
        top = None
        bound = mpmath.mpf(1)
    return DetResult(det, bound, top, det_abs_err, n)


# ---------------------------------------------------------------------------
# cross-oracle against the exact series


def majorant_log(level: int, a: int, y, precision: int = DEFAULT_PRECISION):
    """log of ``|prefactor| * prod (1 + |w|)**(12N)`` at ``t = y``: dominates every coefficient sum."""
    n = level
    a %= n
    power = 12 * n
    with mpmath.workprec(precision + 32):
        y = mpmath.mpf(y)
        total = mpmath.mpf(0)
        # exponents a, kN+a, kN-a (k >= 1); exponent 0 contributes |1 - zeta^b| <= 2
        total += mpmath.log(2) if a == 0 else mpmath.log(1 + y ** a)
        k = 1
        while True:
            e1, e2 = k * n + a, k * n - a
            t1, t2 = y ** e1, y ** e2
            total += mpmath.log(1 + t1) + mpmath.log(1 + t2)
            if t2 < mpmath.ldexp(mpmath.mpf(1), -precision - 40):
                # remaining sum of log(1+y^e) <= 2 y^e2 / (1 - y^N) per pair, geometric
                total += 2 * y ** (e2 + n) / (1 - y ** n)
                break
            k += 1
        k0 = 6 * a * a - 6 * a * n + n * n
        return power * total + k0 * mpmath.log(y)


def series_value(series: QSeries, r, precision: int = DEFAULT_PRECISION):
    """Sum the exact series at ``t = exp(-2 pi r / N)``; returns ``(value, eval_err)``."""
    n = series.level
    with mpmath.workprec(precision + 32):
        x = mpmath.exp(-2 * mpmath.pi * mpmath.mpf(r) / n)
        total = mpmath.mpc(0)
        err = mpmath.mpf(0)
        xk = x ** series.min_exp
        for c in series.coeffs:
            if c:
                emb = embed_complex(c, precision + 32)
                total += emb.value * xk
                err += 2 * emb.err * xk
            xk *= x
        return total, err


def series_tail_bound(v: IndexVector, horizon: int, r, precision: int = DEFAULT_PRECISION):
    """Bound on ``sum_{k >= horizon} |c_k| x**k`` for the expansion of ``g_v**(12N)``.

    Each ``|c_k|`` is at most the k-th coefficient of the positive majorant
    series ``M``, so ``|c_k| <= M(y) / y**k`` for any ``x < y < 1``; the tail
    is then geometric.  The best of a few ``y`` is returned.
    """
    n = v.level
    with mpmath.workprec(precision + 32):
        x = mpmath.exp(-2 * mpmath.pi * mpmath.mpf(r) / n)
        best = None
        for frac in (mpmath.mpf(1) / 8, mpmath.mpf(1) / 4, mpmath.mpf(1) / 2, mpmath.mpf(3) / 4):
            y = x ** frac  # x < y < 1
            log_bound = majorant_log(n, v.a, y, precision) + horizon * mpmath.log(x / y) \
                - mpmath.log(1 - x / y)
            if best is None or log_bound < best:
                best = log_bound
        return mpmath.exp(best)


@dataclass
class CrossCheck:
    v: IndexVector
    r: mpmath.mpf
    product: mpmath.mpc
    series: mpmath.mpc
    difference: mpmath.mpf
    allowed: mpmath.mpf

    @property
    def agrees(self) -> bool:
        return self.difference <= self.allowed


def cross_check(v: IndexVector, series: QSeries, r, precision: int = DEFAULT_PRECISION) -> CrossCheck:
    """Compare product evaluation with the truncated-series embedding."""
    with mpmath.workprec(precision + 32):
        prod = eval_siegel_unit(v, r, precision)
        pval = prod.to_mpc()
        sval, serr = series_value(series, r, precision)
        tail = series_tail_bound(v, series.horizon, r, precision)
        diff = abs(sval - pval)
        # relative err of the product: |exp(e) - 1| <= 2e for small e
        allowed = abs(pval) * 2 * prod.err * mpmath.sqrt(2) + serr + tail
        return CrossCheck(v, mpmath.mpf(r), pval, sval, diff, allowed)


def nonvanishing_samples(v: IndexVector, radii: Iterable = (0.25, 0.5, 1, 2, 4),
                         precision: int = DEFAULT_PRECISION) -> list[LogComplex]:
    """Values at several points ``ri``; all must be finite and nonzero."""
    return [eval_siegel_unit(v, r, precision) for r in radii]


def gamma1_minus_gamma(level: int) -> list[GroupElement]:
    return [s for s in enumerate_group(level)
            if membership(s, Family.GAMMA1) and not s.is_identity()]


def q_order_float(v: IndexVector) -> float:
    return float(siegel_order(v))
