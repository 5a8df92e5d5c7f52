import pytest

from siegelnb.errors import Inconclusive, PreconditionError
from siegelnb.freeness import (FreenessReport, certify_subgroup_numeric, certify_subgroup_symbolic,
                               check_primitivity, symbolic_applicable,
                               sweep_complete_freeness)
from siegelnb.modgroup import (GroupElement, Subgroup, enumerate_group, enumerate_subgroups,
                               gamma0_image, generated_subgroup)
from siegelnb.numeric import find_parameters
from siegelnb.siegel import GConfig, g_image_expansion, g_t_order


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_primitivity(n):
    cfg = GConfig(n, 2, 1)
    verdict = check_primitivity(cfg)
    assert verdict.passed
    assert [s.is_identity() for s in verdict.proof_survivors] == [True]
    # witnesses are genuine: recompute each coefficient pair independently
    for s, e in list(verdict.witnesses.items())[:10]:
        ident = GroupElement.identity(n)
        a = g_image_expansion(cfg, s, e + 1).coefficient(e)
        b = g_image_expansion(cfg, ident, e + 1).coefficient(e)
        assert a != b


def test_primitivity_inconclusive_at_tiny_horizon():
    cfg = GConfig(3, 2, 1)
    with pytest.raises(Inconclusive) as info:
        check_primitivity(cfg, horizon=g_t_order(cfg))
    assert info.value.context["horizon"] == g_t_order(cfg)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gamma0_sweep(n):
    cfg = GConfig(n, 2, 1)
    rep = sweep_complete_freeness(cfg)
    assert rep.passed and not rep.inconclusive
    assert len(rep.records) == len(enumerate_subgroups(gamma0_image(n)))
    for rec in rep.records:
        assert rec["method"] == "symbolic"
        if rec["order"] <= 6:
            assert rec["det_t_order"] == rec["order"] * g_t_order(cfg)


def test_symbolic_precondition():
    s = GroupElement.make(3, 1, 1, 0, 1)
    h = Subgroup(3, tuple(sorted(generated_subgroup([s], 3))), (s,))
    with pytest.raises(PreconditionError):
        certify_subgroup_symbolic(GConfig(3, 2, 1), h)
    assert not symbolic_applicable(h)


def test_gamma1_subgroup_fails_order_gap_but_numeric_passes():
    # +-Gamma_1(3) image: ratio orders vanish, so only the numeric route works
    p = find_parameters(3)
    s = GroupElement.make(3, 1, 1, 0, 1)
    h = Subgroup(3, tuple(sorted(generated_subgroup([s], 3))), (s,))
    cert = certify_subgroup_numeric(p.config, h, p)
    assert cert["pass"] and cert["method"] == "numeric"


def test_numeric_requires_matching_params():
    p = find_parameters(2)
    h = enumerate_subgroups(enumerate_group(2))[-1]
    with pytest.raises(PreconditionError):
        certify_subgroup_numeric(GConfig(2, 3, 1), h, p)


@pytest.mark.parametrize("n", [2, 3])
def test_full_sweep(n):
    p = find_parameters(n)
    rep = sweep_complete_freeness(p.config, "full", p)
    assert rep.passed
    for rec in rep.records:
        if "numeric" in rec:
            assert rec["agree"]
    assert FreenessReport.from_dict(rep.to_dict()).to_dict() == rep.to_dict()


def test_full_scope_needs_params():
    with pytest.raises(PreconditionError):
        sweep_complete_freeness(GConfig(2, 2, 1), "full")


def test_parallel_matches_serial():
    cfg = GConfig(4, 2, 1)
    assert sweep_complete_freeness(cfg, jobs=3).to_dict() == sweep_complete_freeness(cfg).to_dict()
