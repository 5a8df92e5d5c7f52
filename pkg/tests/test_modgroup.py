import pytest

from oracles import sign_class, sl2_elements, two_generated_subgroups
from siegelnb.errors import BoundExceeded
from siegelnb.modgroup import (Family, GroupElement, act_on_index, element_order,
                               enumerate_group, enumerate_subgroups, gamma0_image,
                               generated_subgroup, group_order_formula, inverse,
                               is_subgroup, membership, multiply)


@pytest.mark.parametrize("n", range(2, 9))
def test_group_order_brute_force(n):
    classes = {sign_class(x, n) for x in sl2_elements(n)}
    assert len(enumerate_group(n)) == len(classes) == group_order_formula(n)


def test_group_orders():
    assert [len(enumerate_group(n)) for n in range(2, 7)] == [6, 12, 24, 60, 72]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_subgroups_match_pairwise_closures(n):
    # every subgroup of these groups is generated by two elements
    found = enumerate_subgroups(enumerate_group(n))
    ours = {frozenset(sign_class(s.entries, n) for s in h.elements) for h in found}
    assert ours == two_generated_subgroups(n)
    assert len(found) == len(ours)


def test_known_subgroup_counts():
    # S3, A4, S4, A5
    assert [len(enumerate_subgroups(enumerate_group(n))) for n in (2, 3, 4, 5)] == [6, 10, 30, 59]


def test_subgroups_are_closed_and_generated():
    for h in enumerate_subgroups(enumerate_group(4)):
        assert is_subgroup(h.elements)
        assert generated_subgroup(h.generators, 4) == frozenset(h.elements)


def test_bound():
    with pytest.raises(BoundExceeded):
        enumerate_subgroups(enumerate_group(6), bound=60)


def test_membership_against_matrix_definition():
    for n in (3, 4, 5, 6):
        for x in sl2_elements(n):
            s = GroupElement.make(n, *x)
            a, b, c, d = x
            in_g1 = c == 0 and ((a, d) in ((1, 1), (n - 1, n - 1)))
            if in_g1:
                assert membership(s, Family.GAMMA1)
            assert membership(s, "Gamma0upper") == (b == 0)
            assert membership(s, Family.GAMMA) == (sign_class(x, n) == sign_class((1, 0, 0, 1), n))
        g1 = [s for s in enumerate_group(n) if membership(s, Family.GAMMA1)]
        assert len(g1) == n  # +-[[1, b], [0, 1]]
    assert len(gamma0_image(5)) == 10


def test_group_laws():
    n = 5
    g = enumerate_group(n)
    e = GroupElement.identity(n)
    for s in g[:20]:
        assert multiply(s, inverse(s)) == e
        assert s * e == s
        assert 60 % element_order(s) == 0


def test_action_is_transpose():
    s = GroupElement.make(5, 2, 1, 3, 2)
    assert act_on_index(s, (1, 0)) == (2, 1)
    assert act_on_index(s, (0, 1)) == (3, 2)
    with pytest.raises(ValueError):
        GroupElement.make(5, 1, 1, 1, 1)
