import json
import math
import warnings

import mpmath
import numpy as np
import pytest

from hlplab.constants import (FORMULAS, FormulaId, SharpConstant, holder_factor_C, kernel_constant_M,
                              thm21_constant, thm22_constant, thm31_bound)
from hlplab.errors import DomainError, HypothesisWarning, KernelAdmissibilityError
from hlplab.operators import KernelForm, RadialKernel, hardy_kernel, hilbert_kernel, hlp_kernel
from hlplab.quad import QuadratureConfig
from hlplab.spaces import conjugate

from conftest import THM21_CONFIGS

PROOF_FLAGSHIP = math.sqrt(2) * (16 / 3) ** (2 / 3)
STATEMENT_FLAGSHIP = math.sqrt(2 / 1.5) * (16 / 3) ** (2 / 3)


def test_thm21_flagship():
    pair = thm21_constant(3, 2, 0.5, 0, 1)
    assert pair.proof_variant.value == pytest.approx(PROOF_FLAGSHIP, rel=1e-15)
    assert pair.proof_variant.value == pytest.approx(4.316987751628178, rel=1e-15)
    assert pair.statement.value == pytest.approx(STATEMENT_FLAGSHIP, rel=1e-15)
    assert pair.statement.value == pytest.approx(3.5248057391112777, rel=1e-15)
    assert pair.flagged
    assert pair.rel_discrepancy == pytest.approx(math.sqrt(1.5) - 1, rel=1e-14)
    assert pair.proof_variant.components["C_pnb"] == pytest.approx(16 / 3, rel=1e-15)
    assert pair.statement.formula_id is FormulaId.THM21_STATEMENT
    assert pair.proof_variant.formula_id is FormulaId.THM21_PROOF


def test_thm21_beta_equals_gamma_variants_coincide():
    # the equalities force p = q when beta = gamma
    with warnings.catch_warnings():
        warnings.simplefilter("error", HypothesisWarning)
        pair = thm21_constant(2.5, 2.5, 0.25, 0.25, 1)
    assert pair.statement.value == pair.proof_variant.value
    assert not pair.flagged


@pytest.mark.parametrize("sp", THM21_CONFIGS)
def test_components_reproduce_value(sp):
    for c in thm21_constant(sp.p, sp.q, sp.beta, sp.gamma, sp.n):
        k = c.components
        assert k["prefactor"] * k["C_pnb"] ** (1 / k["p_prime"]) == pytest.approx(c.value, rel=1e-13)
        assert k["holder_factor"] == pytest.approx(k["C_pnb"] ** (1 / k["p_prime"]), rel=1e-13)


def test_thm21_singular_denominator():
    with pytest.raises(DomainError, match="singular"):
        holder_factor_C(2.0, 1.0, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        with pytest.raises(DomainError):
            thm21_constant(2.0, 2.0, 1.5, 0.0, 1)


def test_thm21_warns_on_violated_hypotheses():
    with pytest.warns(HypothesisWarning, match="beta"):
        pair = thm21_constant(3, 2, 0.6, 0, 1)
    assert pair.proof_variant.value > 0


@pytest.mark.parametrize("gamma, n, expected", [(0, 1, 2.0), (1, 1, 1.0), (0, 2, math.pi),
                                                (0, 3, 4 * math.pi / 3)])
def test_thm22_constant(gamma, n, expected):
    c = thm22_constant(gamma, n)
    assert c.value == pytest.approx(expected, rel=1e-14)
    assert c.components["base"] ** c.components["exponent"] == pytest.approx(c.value, rel=1e-13)


def test_thm22_domain():
    with pytest.raises(DomainError):
        thm22_constant(-1.0, 1)


def test_sharp_constant_contract():
    with pytest.raises(DomainError):
        SharpConstant(0.0, FormulaId.THM22)
    c = thm22_constant(0, 1)
    d = json.loads(c.to_json())
    assert set(d) == {"formula_id", "value", "components", "error_estimate", "provenance"}
    assert d["provenance"] == f"thm22: {FORMULAS[FormulaId.THM22]}"


# ---------------------------------------------------------------- M

def test_M_examples():
    m2 = kernel_constant_M(hlp_kernel(1, 1), [0.5], [3.0], 1, 1)
    assert m2.value == pytest.approx((16 / 3) ** (2 / 3), rel=1e-10)
    assert m2.formula_id is FormulaId.M2
    m3 = kernel_constant_M(hilbert_kernel(1, 1), [0.0], [2.0], 1, 1)
    assert m3.value == pytest.approx(math.sqrt(2), rel=1e-10)
    assert m3.formula_id is FormulaId.M3
    m1 = kernel_constant_M(hardy_kernel(1, 1), [0.0], [2.0], 1, 1)
    assert m1.value == pytest.approx(math.sqrt(2), rel=1e-12)
    assert m1.formula_id is FormulaId.M1


@pytest.mark.parametrize("sp", THM21_CONFIGS)
def test_M_collapses_to_hoelder_factor(sp):
    M = kernel_constant_M(hlp_kernel(1, sp.n), [sp.beta], [sp.p], sp.n, 1)
    C = holder_factor_C(sp.p, sp.beta, sp.n)
    assert M.value == pytest.approx(C ** (1 / conjugate(sp.p)), rel=1e-8)


def test_M_closed_form_m2_hilbert():
    # int_0^inf (1+s+t)^(-2p') s^w ds = (1+t)^(w+1-2p') B(w+1, 2p'-w-1), and then
    # int_0^inf t^w (1+t)^(w+1-2p') dt = B(w+1, 2p'-2w-2)
    p, b = 4.0, 1.0
    pp = mpmath.mpf(p) / (p - 1)
    w = -b * pp / p
    G = 4 * mpmath.beta(w + 1, 2 * pp - w - 1) * mpmath.beta(w + 1, 2 * pp - 2 * w - 2)
    M = kernel_constant_M(hilbert_kernel(2, 1), [b, b], [p, p], 1, 2, QuadratureConfig(rel_tol=1e-9))
    assert M.value == pytest.approx(float(G ** (1 / pp)), rel=1e-9)


def test_M_product_kernel_degeneracy():
    prof = lambda s: np.prod((1 + s) ** -2.0, axis=-1)
    K2 = RadialKernel(2, KernelForm.CUSTOM, 1, profile=prof)
    K1 = RadialKernel(1, KernelForm.CUSTOM, 1, profile=prof)
    cfg = QuadratureConfig(rel_tol=1e-9)
    for betas in ([0.4, 0.4], [0.2, 0.7]):
        M2 = kernel_constant_M(K2, betas, [2.5, 2.5], 1, 2, cfg)
        prod = np.prod([kernel_constant_M(K1, [b], [2.5], 1, 1, cfg).value for b in betas])
        assert M2.value == pytest.approx(prod, rel=1e-7)
        assert M2.formula_id is FormulaId.M_GENERIC


@pytest.mark.parametrize("m, ps, betas", [(1, [3.0], [0.5]), (2, [4.0, 4.0], [1.0, 1.0]),
                                          (2, [3.0, 5.0], [0.4, 1.2])])
def test_M_monotone_in_kernel(m, ps, betas):
    cfg = QuadratureConfig(rel_tol=1e-8)
    big = kernel_constant_M(hlp_kernel(m, 1), betas, ps, 1, m, cfg).value
    for K in (hardy_kernel(m, 1), hilbert_kernel(m, 1)):
        assert kernel_constant_M(K, betas, ps, 1, m, cfg).value <= big * (1 + 1e-8)


def test_M_admissibility_errors():
    with pytest.raises(KernelAdmissibilityError, match="at 0"):
        kernel_constant_M(hlp_kernel(1, 1), [2.5], [3.0], 1, 1)
    with pytest.raises(KernelAdmissibilityError, match="infinity"):
        kernel_constant_M(hlp_kernel(1, 1), [-1.5], [2.0], 1, 1)
    with pytest.raises(DomainError):
        kernel_constant_M(hlp_kernel(2, 1), [0.5], [3.0], 1, 2)
    with pytest.raises(DomainError):
        kernel_constant_M(hlp_kernel(1, 1), [0.5], [1.0], 1, 1)


def test_thm31_bound_examples():
    b = thm31_bound(hlp_kernel(1, 1), [0.5], [3.0], 2.0, 0.0, 1, 1)
    assert b.value == pytest.approx(PROOF_FLAGSHIP, rel=1e-8)
    assert b.value == pytest.approx(thm21_constant(3, 2, 0.5, 0, 1).proof_variant.value, rel=1e-8)
    with pytest.warns(HypothesisWarning):
        h = thm31_bound(hardy_kernel(1, 1), [0.0], [2.0], 2.0, 0.0, 1, 1)
    assert h.value == pytest.approx(2.0, rel=1e-12)
    assert h.components["corollary_form"] == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(DomainError):
        thm31_bound(hlp_kernel(1, 1), [0.5], [3.0], 2.0, -1.0, 1, 1)


@pytest.mark.parametrize("sp", THM21_CONFIGS)
def test_thm31_bound_equals_proof_variant(sp):
    b = thm31_bound(hlp_kernel(1, sp.n), [sp.beta], [sp.p], sp.q, sp.gamma, sp.n, 1)
    pv = thm21_constant(sp.p, sp.q, sp.beta, sp.gamma, sp.n).proof_variant
    assert b.value == pytest.approx(pv.value, rel=1e-8)
    assert b.components["prefactor"] * b.components["M"] == pytest.approx(b.value, rel=1e-13)
