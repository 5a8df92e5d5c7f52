"""Primitivity and complete-freeness certificates for ``g``."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import mpmath

from .errors import Inconclusive, OrderUndetermined, PreconditionError, SiegelError
from .modgroup import (Family, GroupElement, Subgroup, enumerate_group, enumerate_subgroups,
                       gamma0_image, membership, multiply)
from .numeric import DEFAULT_PRECISION, SearchParams, fmt, ratio_matrix_det
from .qseries import QSeries, default_horizon, first_difference, series_mul, t_order
from .siegel import (GConfig, g_image_expansion, g_image_order, g_t_order, ratio_order)

S_MATRIX = (0, -1, 1, 0)
DIRECT_DET_LIMIT = 6


# ---------------------------------------------------------------------------
# primitivity


@dataclass
class PrimitivityVerdict:
    N: int
    l: int
    m: int
    horizon: int
    zero_gap: list[GroupElement]
    proof_survivors: list[GroupElement]
    witnesses: dict[GroupElement, int]
    leading: dict[GroupElement, int]
    g_order: int

    @property
    def passed(self) -> bool:
        survivors_ok = all(s.is_identity() for s in self.proof_survivors)
        return survivors_ok and len(self.witnesses) == len(enumerate_group(self.N)) - 1

    def to_dict(self) -> dict:
        return {
            "N": self.N, "l": self.l, "m": self.m, "horizon": self.horizon,
            "pass": self.passed,
            "g_t_order": self.g_order,
            "zero_order_gap": [list(s.entries) for s in self.zero_gap],
            "proof_survivors": [list(s.entries) for s in self.proof_survivors],
            "witnesses": [{"sigma": list(s.entries), "t_exponent": e,
                           "image_t_order": self.leading[s]}
                          for s, e in sorted(self.witnesses.items())],
        }


def _separate(cfg: GConfig, s: GroupElement, horizon: int) -> int | None:
    """First exponent where ``g**s`` and ``g`` differ, searching up to ``horizon``."""
    start = min(g_t_order(cfg), g_image_order(cfg, s))
    step = cfg.N
    while True:
        k = min(start + step, horizon)
        g = g_image_expansion(cfg, GroupElement.identity(cfg.N), k)
        gs = g_image_expansion(cfg, s, k)
        diff = first_difference(gs, g, k)
        if diff is not None or k >= horizon:
            return diff
        step *= 2


def check_primitivity(cfg: GConfig, horizon: int | None = None) -> PrimitivityVerdict:
    """Show the stabilizer of ``g`` in SL2(Z/NZ)/{+-I} is trivial, two ways.

    Proof route: a fixing element has ratio order 0, so lies in +-Gamma_1(N);
    comparing the orders of ``g**S`` and ``g**(s S)`` with ``S = [[0,-1],[1,0]]``
    then forces ``b = 0``.  Direct route: each non-identity ``g**s`` differs
    from ``g`` at an explicit exponent below ``horizon``.
    """
    horizon = default_horizon(cfg.N) if horizon is None else horizon
    group = enumerate_group(cfg.N)
    smat = GroupElement.make(cfg.N, *S_MATRIX)
    zero_gap = [s for s in group if ratio_order(cfg, s) == 0]
    stray = [s for s in zero_gap if not membership(s, Family.GAMMA1)]
    if stray:
        raise SiegelError(f"ratio order 0 outside the Gamma_1 image at {stray[0]}")
    target = g_image_order(cfg, smat)
    survivors = [s for s in zero_gap if g_image_order(cfg, multiply(s, smat)) == target]
    witnesses: dict[GroupElement, int] = {}
    leading: dict[GroupElement, int] = {}
    missing = []
    for s in group:
        if s.is_identity():
            continue
        leading[s] = g_image_order(cfg, s)
        diff = _separate(cfg, s, horizon)
        if diff is None:
            missing.append(s)
        else:
            witnesses[s] = diff
    if missing:
        raise Inconclusive(
            f"{len(missing)} coset(s) not separated below t^{horizon}; raise the horizon",
            {"sigma": [list(s.entries) for s in missing], "horizon": horizon})
    return PrimitivityVerdict(cfg.N, cfg.l, cfg.m, horizon, zero_gap, survivors,
                              witnesses, leading, g_t_order(cfg))


# ---------------------------------------------------------------------------
# symbolic certificates


def _series_det(matrix: list[list[QSeries]]) -> QSeries:
    """Laplace expansion along rows with minors memoized by column set."""
    k = len(matrix)
    memo: dict[tuple[int, int], QSeries] = {}

    def minor(row: int, cols: int) -> QSeries:
        if row == k:
            return None  # empty product
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = None
        sign = 1
        for j in range(k):
            if cols & (1 << j):
                rest = minor(row + 1, cols & ~(1 << j))
                term = matrix[row][j] if rest is None else series_mul(matrix[row][j], rest)
                if sign < 0:
                    term = -term
                total = term if total is None else total + term
                sign = -sign
        memo[key] = total
        return total

    return minor(0, (1 << k) - 1)


def series_determinant(cfg: GConfig, elements: Sequence[GroupElement], precision: int | None = None) -> QSeries:
    """Truncated series determinant of ``[g**(s_j s_i)]``.

    Each entry carries ``precision`` known terms past its own leading exponent,
    which determines the determinant through ``k * t_order(g) + precision``.
    """
    precision = cfg.N if precision is None else precision
    cache: dict[GroupElement, QSeries] = {}

    def entry(p: GroupElement) -> QSeries:
        if p not in cache:
            cache[p] = g_image_expansion(cfg, p, g_image_order(cfg, p) + precision)
        return cache[p]

    matrix = [[entry(multiply(sj, si)) for sj in elements] for si in elements]
    return _series_det(matrix)


def certify_subgroup_symbolic(cfg: GConfig, subgroup: Subgroup, direct: bool | None = None) -> dict:
    """Order-gap certificate: every non-identity ratio order is strictly positive.

    For subgroups of order at most 6 the truncated series determinant is also
    expanded and its t-order compared with ``k * t_order(g)``.
    """
    for s in subgroup.elements:
        if not membership(s, Family.GAMMA0_UPPER):
            raise PreconditionError(f"{s} is outside the Gamma^0({cfg.N}) image")
    return _symbolic_certificate(cfg, subgroup, direct)


def symbolic_applicable(subgroup: Subgroup) -> bool:
    """True when no non-identity element lies in +-Gamma_1(N)."""
    return all(s.is_identity() or not membership(s, Family.GAMMA1) for s in subgroup.elements)


def _symbolic_certificate(cfg: GConfig, subgroup: Subgroup, direct: bool | None) -> dict:
    gaps = {s: ratio_order(cfg, s) for s in subgroup.elements if not s.is_identity()}
    min_gap = min(gaps.values()) if gaps else None
    ok = all(o > 0 for o in gaps.values())
    cert: dict[str, Any] = {
        "method": "symbolic",
        "certificate": "order-gap",
        "value": None if min_gap is None else str(min_gap),
        "order_gaps": [{"sigma": list(s.entries), "order": str(o)} for s, o in sorted(gaps.items())],
        "pass": ok,
    }
    k = subgroup.order
    if direct is None:
        direct = k <= DIRECT_DET_LIMIT
    if direct:
        det = series_determinant(cfg, subgroup.elements)
        expected = k * g_t_order(cfg)
        try:
            found = t_order(det)
        except OrderUndetermined:
            found = None
        cert["det_t_order"] = found
        cert["expected_t_order"] = expected
        cert["det_horizon"] = det.horizon
        cert["pass"] = ok and found == expected
    return cert


# ---------------------------------------------------------------------------
# numeric certificates


def certify_subgroup_numeric(cfg: GConfig, subgroup: Subgroup, params: SearchParams,
                             precision: int | None = None) -> dict:
    """Analytic lower bound ``1 - (n!-1) max ratio`` plus the measured determinant.

    Passing requires a positive bound; a measured ``|det|`` within its error
    triggers one precision doubling before the record is marked inconclusive.
    """
    if (params.N, params.l, params.m) != (cfg.N, cfg.l, cfg.m):
        raise PreconditionError("search parameters were certified for a different g")
    precision = params.precision if precision is None else precision
    res = ratio_matrix_det(cfg, subgroup, params.r, precision)
    inconclusive = mpmath.exp(res.det.log_mag) <= res.det_abs_err
    if inconclusive:
        res = ratio_matrix_det(cfg, subgroup, params.r, 2 * precision)
        inconclusive = mpmath.exp(res.det.log_mag) <= res.det_abs_err
    bound_ok = bool(res.lower_bound > 0)
    cert = {
        "method": "numeric",
        "certificate": "det-lower-bound",
        "value": fmt(res.lower_bound),
        "det": res.det.to_dict(),
        "det_abs_err": fmt(res.det_abs_err, 6),
        "max_ratio_log": None if res.max_ratio_log is None else fmt(res.max_ratio_log),
        "pass": bound_ok and not inconclusive,
    }
    if inconclusive:
        cert["inconclusive"] = True
    return cert


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class FreenessReport:
    N: int
    l: int
    m: int
    r: str | None
    scope: str
    records: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(rec["pass"] for rec in self.records)

    @property
    def inconclusive(self) -> bool:
        return any(rec.get("inconclusive") for rec in self.records)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "l": self.l, "m": self.m, "r": self.r, "scope": self.scope,
            "pass": self.passed,
            "subgroups": len(self.records),
            "records": self.records,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FreenessReport":
        return cls(int(data["N"]), int(data["l"]), int(data["m"]), data.get("r"),
                   data["scope"], list(data["records"]))


def _certify_one(args) -> dict:
    cfg, subgroup, params, precision = args
    record: dict[str, Any] = {
        "order": subgroup.order,
        "generators": [list(g.entries) for g in subgroup.generators],
        "elements": [list(s.entries) for s in subgroup.elements],
    }
    if symbolic_applicable(subgroup):
        cert = _symbolic_certificate(cfg, subgroup, None)
        if params is not None:
            cert["numeric"] = certify_subgroup_numeric(cfg, subgroup, params, precision)
            cert["agree"] = cert["numeric"]["pass"] == cert["pass"]
            cert["pass"] = cert["pass"] and cert["numeric"]["pass"]
            if cert["numeric"].get("inconclusive"):
                cert["inconclusive"] = True
    else:
        if params is None:
            raise PreconditionError(
                f"subgroup of order {subgroup.order} meets +-Gamma_1(N); numeric parameters required")
        cert = certify_subgroup_numeric(cfg, subgroup, params, precision)
    record.update(cert)
    return record


def scope_group(level: int, scope: str) -> tuple[GroupElement, ...]:
    if scope in ("gamma0", "Gamma0upper"):
        return gamma0_image(level)
    if scope == "full":
        return enumerate_group(level)
    raise ValueError(f"unknown scope {scope!r}")


def sweep_complete_freeness(cfg: GConfig, scope: str = "gamma0",
                            params: SearchParams | None = None, jobs: int = 1,
                            precision: int = DEFAULT_PRECISION) -> FreenessReport:
    """Certify every subgroup of the scope group; results ordered by subgroup key."""
    if scope == "full" and params is None:
        raise PreconditionError("scope=full needs certified search parameters")
    subgroups = enumerate_subgroups(scope_group(cfg.N, scope))
    tasks = [(cfg, h, params, precision) for h in subgroups]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1, len(tasks))) as pool:
            records = list(pool.map(_certify_one, tasks))
    else:
        records = [_certify_one(t) for t in tasks]
    scope_name = "full" if scope == "full" else "gamma0"
    return FreenessReport(cfg.N, cfg.l, cfg.m, params.to_dict()["r"] if params else None,
                          scope_name, records)
