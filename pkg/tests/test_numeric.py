import math
from fractions import Fraction

import mpmath
import pytest

from oracles import siegel_qp
from siegelnb.errors import PrecisionError, SearchExhausted
from siegelnb.modgroup import (Family, GroupElement, enumerate_group, enumerate_subgroups,
                               membership)
from siegelnb.numeric import (LogComplex, SearchParams, check_parameters, cross_check,
                              default_epsilon, eval_ratio, eval_siegel_pair, eval_siegel_unit,
                              find_parameters,
                              nonvanishing_samples, ratio_matrix_det, truncation_terms)
from siegelnb.qseries import QSeries, default_horizon
from siegelnb.siegel import GConfig, IndexVector, siegel_order, siegel_power_expansion


def vectors(n):
    return sorted({IndexVector.make(n, a, b) for a in range(n) for b in range(n) if (a, b) != (0, 0)})


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("r", ["0.5", "1", "2"])
def test_product_matches_q_pochhammer(n, r):
    for v in vectors(n):
        val = eval_siegel_unit(v, mpmath.mpf(r))
        with mpmath.workdps(60):
            ref = siegel_qp(n, v.a, v.b, mpmath.mpf(r))
            got = val.to_mpc()
            assert abs(got - ref) <= abs(ref) * mpmath.mpf(10) ** -55


def test_truncation_terms_formula():
    assert truncation_terms(1, 256) == math.ceil(256 * math.log10(2) * math.log(10) / (2 * math.pi)) + 1


def test_tolerance_escalation():
    v = IndexVector.make(3, 1, 1)
    val = eval_siegel_unit(v, 1, precision=64, tol=mpmath.mpf(10) ** -60)
    assert val.err < mpmath.mpf(10) ** -60
    with pytest.raises(PrecisionError):
        eval_siegel_unit(v, 1, precision=64, tol=mpmath.mpf(10) ** -5000)
    with pytest.raises(ValueError):
        eval_siegel_unit(v, 0)


def test_logcomplex_arithmetic():
    a = LogComplex.from_complex(3 + 4j)
    b = LogComplex.from_complex(-1 + 1j)
    assert abs((a * b).to_complex() - (3 + 4j) * (-1 + 1j)) < 1e-12
    assert abs((a / b).to_complex() - (3 + 4j) / (-1 + 1j)) < 1e-12
    assert abs((a + b).to_complex() - (2 + 5j)) < 1e-12
    assert abs((a ** 3).to_complex() - (3 + 4j) ** 3) < 1e-9
    huge = LogComplex.make(5000, 0, 0)
    with pytest.raises(OverflowError):
        huge.to_complex()
    assert (huge / huge).to_complex() == 1


def test_nonvanishing():
    for v in vectors(4):
        for val in nonvanishing_samples(v):
            assert mpmath.isfinite(val.log_mag)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("r", [1, 2])
def test_cross_oracle(n, r):
    for v in vectors(n):
        chk = cross_check(v, siegel_power_expansion(v, default_horizon(n)), r)
        assert chk.agrees, (v, chk.difference, chk.allowed)


def test_cross_oracle_detects_a_wrong_series():
    v = IndexVector.make(3, 1, 0)
    good = siegel_power_expansion(v, default_horizon(3))
    bad = good + QSeries.monomial(3, good.min_exp + 2, 1, good.horizon)
    assert not cross_check(v, bad, 1).agrees


def test_identity_ratio_is_exactly_one():
    cfg = GConfig(3, 3, 2)
    val = eval_ratio(cfg, GroupElement.identity(3), 1)
    assert val.log_mag == 0 and val.err == 0


def test_ratio_matches_direct_quotient():
    cfg = GConfig(2, 3, 1)
    s = GroupElement.make(2, 0, 1, 1, 0)
    with mpmath.workdps(60):
        def g(a_l, b_l, a_m, b_m):
            return siegel_qp(2, a_l, b_l, 1) ** -3 * siegel_qp(2, a_m, b_m, 1) ** -1
        # s^T (0,1) = (c, d) = (1, 0); s^T (1,0) = (a, b) = (0, 1)
        ref = g(1, 0, 0, 1) / g(0, 1, 1, 0)
        got = eval_ratio(cfg, s, 1).to_mpc()
        assert abs(got - ref) <= abs(ref) * mpmath.mpf(10) ** -50


def test_default_epsilon():
    assert default_epsilon(2) == Fraction(1, 719)
    assert default_epsilon(3) == Fraction(1, math.factorial(12) - 1)


def test_search_n2():
    p = find_parameters(2)
    assert p.certified and p.l > p.m > 0 and p.d == 6
    assert p.max_ratio_log + p.err < mpmath.log(mpmath.mpf(1) / 719)
    again = SearchParams.from_dict(p.to_dict())
    assert (again.l, again.m, again.epsilon) == (p.l, p.m, p.epsilon)


def test_search_budget_exhaustion():
    with pytest.raises(SearchExhausted) as info:
        find_parameters(3, budget=2)
    assert info.value.best is not None and not info.value.best.certified


def test_uncertified_parameters():
    p = check_parameters(2, 2, 1, mpmath.mpf("0.1"))
    assert not p.certified


def test_det_lower_bound_holds():
    p = find_parameters(2)
    for h in enumerate_subgroups(enumerate_group(2)):
        res = ratio_matrix_det(p.config, h, p.r)
        assert res.lower_bound > 0
        assert mpmath.exp(res.det.log_mag) + res.det_abs_err >= res.lower_bound


def test_negated_representative_gives_same_value():
    for v in vectors(5):
        a = eval_siegel_pair(5, v.a, v.b, 1)
        b = eval_siegel_pair(5, -v.a, -v.b, 1)
        with mpmath.workprec(300):
            assert abs(a.to_mpc() - b.to_mpc()) <= abs(a.to_mpc()) * 2 * (a.err + b.err)


def test_log_magnitude_slope_is_the_q_order():
    v = IndexVector.make(4, 1, 3)
    order = siegel_order(v)
    lm = {r: eval_siegel_unit(v, r).log_mag for r in (2, 4, 8)}
    target = -2 * mpmath.pi * order.numerator / order.denominator
    gaps = [abs((lm[r2] - lm[r1]) / (r2 - r1) - target) for r1, r2 in ((2, 4), (4, 8))]
    # the O(1) term decays like exp(-2 pi r / N)
    assert gaps[1] < gaps[0] < 0.05 and gaps[1] < 1e-3


def test_ratio_decays_off_gamma1():
    cfg = GConfig(3, 2, 1)
    for s in enumerate_group(3):
        if membership(s, Family.GAMMA1):
            continue
        logs = [eval_ratio(cfg, s, r).log_mag for r in (1, 2, 4, 8)]
        assert logs == sorted(logs, reverse=True) and logs[0] > logs[-1]


def test_gamma1_log_ratio_linear_in_m():
    s = GroupElement.make(5, 1, 2, 0, 1)
    base = eval_ratio(GConfig(5, 2, 1), s, 1).log_mag
    assert base < 0
    with mpmath.workprec(300):
        for m in (2, 4):
            val = eval_ratio(GConfig(5, m + 1, m), s, 1).log_mag
            assert abs(val - m * base) < mpmath.mpf(10) ** -60


def test_monotone_in_m_at_search_radius():
    p = find_parameters(2)
    gamma1 = [s for s in enumerate_group(2) if membership(s, Family.GAMMA1) and not s.is_identity()]
    for s in gamma1:
        before = eval_ratio(GConfig(2, p.l, p.m), s, p.r).log_mag
        after = eval_ratio(GConfig(2, p.m + 2, p.m + 1), s, p.r).log_mag
        assert after < before


def test_vacuous_epsilon_certifies_first_candidate():
    # at epsilon = 1 the target is just "every ratio below 1"
    loose = find_parameters(3, epsilon=Fraction(1))
    strict = find_parameters(3)
    assert loose.certified and loose.max_ratio_log + loose.err < 0
    assert (loose.m, loose.r) <= (strict.m, strict.r)


def test_bounds_against_group_factorial():
    p = find_parameters(3)
    d = len(enumerate_group(3))
    for h in enumerate_subgroups(enumerate_group(3)):
        res = ratio_matrix_det(p.config, h, p.r)
        n = h.order
        floor = 1 - Fraction(math.factorial(n) - 1, math.factorial(d) - 1)
        assert res.lower_bound >= mpmath.mpf(floor.numerator) / floor.denominator
        if n == 1:
            assert res.det.log_mag == 0 and res.lower_bound == 1


def test_error_bounds_are_honored():
    for v in vectors(3):
        lo = eval_siegel_unit(v, "0.75", precision=128)
        hi = eval_siegel_unit(v, "0.75", precision=256)
        assert abs(lo.log_mag - hi.log_mag) <= lo.err
        diff = abs(mpmath.exp(1j * (lo.phase - hi.phase)) - 1)
        assert diff <= 2 * lo.err
