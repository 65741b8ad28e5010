import math

import pytest
from hypothesis import given, strategies as st

from hlplab.errors import DomainError
from hlplab.spaces import (ConjugateExponent, Kind, SpaceSpec, check_thm21_hypotheses,
                           check_thm31_hypotheses, conjugate, unit_sphere_area)

from conftest import THM21_CONFIGS


@pytest.mark.parametrize("n, expected", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi),
                                         (4, 2 * math.pi**2)])
def test_unit_sphere_area_values(n, expected):
    assert unit_sphere_area(n) == pytest.approx(expected, rel=1e-14)


def test_unit_sphere_area_matches_gamma_formula():
    for n in range(1, 41):
        ref = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
        assert unit_sphere_area(n) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("n", range(1, 21))
def test_unit_sphere_area_recurrence(n):
    assert unit_sphere_area(n + 2) == pytest.approx(2 * math.pi * unit_sphere_area(n) / n, rel=1e-13)


@pytest.mark.parametrize("bad", [0, -1, 1.5, True])
def test_unit_sphere_area_rejects(bad):
    with pytest.raises(DomainError):
        unit_sphere_area(bad)


@given(st.floats(min_value=1.0001, max_value=1e6))
def test_conjugate_identity(p):
    pp = ConjugateExponent(p).p_prime
    assert 1 / p + 1 / pp == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("p", [1.0, 0.5, math.inf])
def test_conjugate_rejects(p):
    with pytest.raises(DomainError):
        conjugate(p)


def test_space_spec_invariants():
    SpaceSpec(1, 2.0, 0.5)
    SpaceSpec(2, 1.0, -1.5, Kind.WEAK)
    with pytest.raises(DomainError):
        SpaceSpec(0, 2.0)
    with pytest.raises(DomainError):
        SpaceSpec(1, 0.0)
    with pytest.raises(DomainError):
        SpaceSpec(1, 0.5, 0.0, Kind.WEAK)
    with pytest.raises(DomainError):
        SpaceSpec(1, 2.0, -1.0, Kind.WEAK)
    assert SpaceSpec(2, 2.0).omega == pytest.approx(2 * math.pi)


def test_thm21_flagship_passes_with_conditions_exactly_two():
    rep = check_thm21_hypotheses(3, 2, 0.5, 0, 1)
    assert rep.overall
    ge = [c for c in rep.checks if c.relation == ">="]
    assert len(ge) == 3  # q >= 1 and the two ">= 2" conditions
    twos = [c for c in ge if c.right == 2]
    assert len(twos) == 2
    assert all(c.left == pytest.approx(2.0, abs=1e-12) for c in twos)


def test_thm21_balance_failure():
    rep = check_thm21_hypotheses(3, 2, 0.6, 0, 1)
    assert not rep.overall
    names = [c.name for c in rep.failures()]
    assert any("(beta+n)/p" in nm for nm in names)


def test_thm21_beta_zero_fails():
    rep = check_thm21_hypotheses(2, 2, 0, 0, 1)
    assert not rep.overall
    assert "beta > 0" in [c.name for c in rep.failures()]


@pytest.mark.parametrize("sp", THM21_CONFIGS)
def test_thm21_suite_configs_are_admissible(sp):
    assert check_thm21_hypotheses(sp.p, sp.q, sp.beta, sp.gamma, sp.n).overall


def test_thm31_examples():
    ok = check_thm31_hypotheses([3], [0.5], 2, 0, 1, 1)
    assert ok.overall
    bal = [c for c in ok.checks if c.relation == "="][0]
    assert bal.left == pytest.approx(0.5) and bal.right == pytest.approx(0.5)
    bad = check_thm31_hypotheses([4, 4], [1, 1], 2, 0, 1, 2)
    assert not bad.overall
    bal = [c for c in bad.checks if c.relation == "="][0]
    assert bal.left == pytest.approx(1.0) and bal.right == pytest.approx(0.5)
    zero = check_thm31_hypotheses([3], [0], 2, 0, 1, 1)
    assert [c.name for c in zero.failures()] == ["beta_1 > 0", "sum (beta_i+n)/p_i = (gamma+n)/q"]


def test_thm31_length_mismatch():
    with pytest.raises(DomainError):
        check_thm31_hypotheses([3, 3], [0.5], 2, 0, 1, 2)


def test_report_serialises():
    d = check_thm21_hypotheses(3, 2, 0.5, 0, 1).to_dict()
    assert d["overall"] is True
    assert {"name", "relation", "left", "right", "pass"} <= set(d["checks"][0])


def _thm21_args(sp):
    return dict(p=sp.p, q=sp.q, beta=sp.beta, gamma=sp.gamma, n=sp.n)


@pytest.mark.parametrize("key, delta", [("p", 0.05), ("q", 0.1), ("beta", 0.05), ("gamma", 0.1)])
def test_single_perturbation_flips_overall(key, delta):
    args = _thm21_args(THM21_CONFIGS[1])
    assert check_thm21_hypotheses(**args).overall
    args[key] += delta
    assert not check_thm21_hypotheses(**args).overall


@pytest.mark.parametrize("key, value", [("p", 1.0), ("beta", 0.0), ("q", 0.5), ("gamma", -1.0)])
def test_forcing_one_check_to_fail_flips_overall_thm31(key, value):
    args = dict(p_vec=[3.0], beta_vec=[0.5], q=2.0, gamma=0.0, n=1, m=1)
    assert check_thm31_hypotheses(**args).overall
    if key == "p":
        args["p_vec"] = [value]
    elif key == "beta":
        args["beta_vec"] = [value]
    else:
        args[key] = value
    assert not check_thm31_hypotheses(**args).overall
