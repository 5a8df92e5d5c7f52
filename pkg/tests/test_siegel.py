from fractions import Fraction

import pytest

from oracles import embed_float, siegel_float_expansion
from siegelnb.errors import PreconditionError
from siegelnb.modgroup import Family, GroupElement, enumerate_group, membership, multiply
from siegelnb.qseries import t_order
from siegelnb.siegel import (GConfig, IndexVector, act, expansion_from_representative, g_expansion,
                             g_image_expansion, g_image_order, g_order, g_t_order, ratio_order,
                             ratio_order_from_expansion, require_gamma0, siegel_power_expansion,
                             siegel_t_order, unit_expansion, verify_lemma22)


def vectors(n):
    return sorted({IndexVector.make(n, a, b) for a in range(n) for b in range(n) if (a, b) != (0, 0)})


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_expansion_matches_float_product(n):
    count = n * n // 2 + 3 * n
    for v in vectors(n):
        series = siegel_power_expansion(v, siegel_t_order(v) + count)
        k0, ref = siegel_float_expansion(n, v.a, v.b, count)
        scale = max(abs(c) for c in ref)
        for i in range(count):
            got = embed_float(series.coefficient(k0 + i).coeffs, n)
            assert abs(got - ref[i]) <= 1e-9 * scale, (v, i)


def test_known_expansions():
    v = IndexVector.make(2, 0, 1)
    s = siegel_power_expansion(v, 8)
    assert (s.min_exp, s.coeffs[0].coeffs) == (4, (Fraction(2 ** 24),))
    w = siegel_power_expansion(IndexVector.make(2, 1, 0), 3)
    assert [c.coeffs[0] for c in w.coeffs] == [1, -48, 1128, -17344, 196884]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_representative_independence(n):
    for v in vectors(n):
        base = expansion_from_representative(n, v.a, v.b, 2 * n)
        for a, b in ((-v.a, -v.b), (v.a + n, v.b), (v.a - 2 * n, v.b + 3 * n), (n - v.a, -v.b)):
            assert expansion_from_representative(n, a, b, 2 * n) == base, (v, a, b)


def test_cache_truncation_is_consistent():
    v = IndexVector.make(5, 2, 1)
    big = siegel_power_expansion(v, 60)
    small = siegel_power_expansion(v, 20)
    assert big.truncate(20) == small


@pytest.mark.parametrize("n", [2, 3, 4])
def test_action_cocycle(n):
    g = enumerate_group(n)
    for v in vectors(n):
        for s in g:
            for r in g:
                assert act(r, act(s, v)) == act(multiply(s, r), v)


def test_g_order_example():
    cfg = GConfig(2, 2, 1)
    assert g_order(cfg) == -3
    assert g_t_order(cfg) == -6
    assert t_order(g_expansion(cfg, 0)) == -6


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ratio_orders_closed_form_vs_expansion(n):
    cfg = GConfig(n, 3, 1)
    for s in enumerate_group(n):
        assert ratio_order(cfg, s) == ratio_order_from_expansion(cfg, s)
        assert g_image_order(cfg, s) == t_order(g_image_expansion(cfg, s, g_image_order(cfg, s) + 1))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("lm", [(2, 1), (3, 1), (5, 2)])
def test_lemma22(n, lm):
    verdict = verify_lemma22(GConfig(n, *lm))
    assert verdict.passed
    assert verdict.equality_set == sorted(s for s in enumerate_group(n) if membership(s, Family.GAMMA1))


def test_lemma22_example_listing():
    d = verify_lemma22(GConfig(3, 2, 1)).to_dict()
    assert d["pass"] and d["equality_set"] == [[1, 0, 0, 1], [1, 1, 0, 1], [1, 2, 0, 1]]


def test_unit_expansion_below_order_is_unknown():
    v = IndexVector.make(3, 1, 0)
    s = unit_expansion(3, {v: 2}, 2 * siegel_t_order(v))
    assert s.is_known_zero()


def test_invalid_inputs():
    with pytest.raises(ValueError):
        IndexVector.make(3, 3, 6)
    with pytest.raises(ValueError):
        GConfig(3, 1, 1)
    with pytest.raises(ValueError):
        siegel_power_expansion(IndexVector.make(3, 1, 0), 0)
    with pytest.raises(PreconditionError):
        require_gamma0([GroupElement.make(3, 1, 1, 0, 1)])
