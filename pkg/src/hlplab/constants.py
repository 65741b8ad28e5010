"""Closed-form sharp constants and the nested kernel constant M.

Notation: omega = omega_n, p' = p/(p-1), and

    C = (p-1) omega / (beta+n) + omega / (n - beta/(p-1))

is the Hoelder factor of the single-variable HLP estimate.
"""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, HypothesisWarning, KernelAdmissibilityError
from .operators import KernelForm, RadialKernel
from .quad import LevelSpec, QuadratureConfig, integrate_iterated_batch
from .spaces import check_thm21_hypotheses, check_thm31_hypotheses, conjugate, unit_sphere_area

DISCREPANCY_TOL = 1e-12


class FormulaId(enum.Enum):
    THM21_STATEMENT = "thm21_statement"
    THM21_PROOF = "thm21_proof"
    THM22 = "thm22"
    THM31_BOUND = "thm31_bound"
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M_GENERIC = "M_generic"


FORMULAS = {
    FormulaId.THM21_STATEMENT: "(omega/(n+beta))^(1/q) * C^(1/p')",
    FormulaId.THM21_PROOF: "(omega/(n+gamma))^(1/q) * C^(1/p')",
    FormulaId.THM22: "(omega/(n+gamma))^(n/(n+gamma))",
    FormulaId.THM31_BOUND: "(omega/(n+gamma))^(1/q) * M",
    FormulaId.M1: "nested kernel norm, Hardy indicator kernel",
    FormulaId.M2: "nested kernel norm, HLP max kernel",
    FormulaId.M3: "nested kernel norm, Hilbert sum kernel",
    FormulaId.M_GENERIC: "nested kernel norm, custom kernel",
}


@dataclass(frozen=True)
class SharpConstant:
    value: float
    formula_id: FormulaId
    components: dict[str, float] = field(default_factory=dict)
    error_estimate: float = 0.0
    provenance: str = ""

    def __post_init__(self):
        if not self.value > 0:
            raise DomainError(f"{self.formula_id.value}: constant must be positive, got {self.value}")
        if not self.provenance:
            object.__setattr__(self, "provenance",
                               f"{self.formula_id.value}: {FORMULAS[self.formula_id]}")

    def to_dict(self) -> dict:
        return {"formula_id": self.formula_id.value, "value": self.value,
                "components": dict(self.components), "error_estimate": self.error_estimate,
                "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class Thm21Pair(NamedTuple):
    statement: SharpConstant
    proof_variant: SharpConstant

    @property
    def rel_discrepancy(self) -> float:
        return abs(self.proof_variant.value - self.statement.value) / self.statement.value

    @property
    def flagged(self) -> bool:
        return self.rel_discrepancy > DISCREPANCY_TOL


def holder_factor_C(p: float, beta: float, n: int) -> float:
    """C = (p-1) omega/(beta+n) + omega/(n - beta/(p-1))."""
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    s = beta / (p - 1)
    if s >= n:
        raise DomainError(f"singular denominator: beta/(p-1) = {s} >= n = {n}")
    if not beta + n > 0:
        raise DomainError(f"singular denominator: beta + n = {beta + n} <= 0")
    omega = unit_sphere_area(n)
    return (p - 1) * omega / (beta + n) + omega / (n - s)


def _warn_hypotheses(report, label: str):
    if not report.overall:
        names = ", ".join(c.name for c in report.failures())
        warnings.warn(f"{label}: hypotheses violated ({names})", HypothesisWarning, stacklevel=3)


def thm21_constant(p: float, q: float, beta: float, gamma: float, n: int) -> Thm21Pair:
    """Both printed forms of the single-variable sharp weak constant.

    The two differ only in the prefactor: omega/(n+beta) versus omega/(n+gamma).
    """
    _warn_hypotheses(check_thm21_hypotheses(p, q, beta, gamma, n), "thm21")
    if not q > 0:
        raise DomainError(f"need q > 0, got {q}")
    C = holder_factor_C(p, beta, n)
    omega = unit_sphere_area(n)
    pp = conjugate(p)
    hf = C ** (1.0 / pp)
    out = []
    for fid, denom in ((FormulaId.THM21_STATEMENT, n + beta), (FormulaId.THM21_PROOF, n + gamma)):
        if not denom > 0:
            raise DomainError(f"{fid.value}: non-positive denominator {denom}")
        pref = (omega / denom) ** (1.0 / q)
        out.append(SharpConstant(pref * hf, fid, {
            "omega": omega, "C_pnb": C, "p_prime": pp, "holder_factor": hf, "prefactor": pref}))
    return Thm21Pair(*out)


def thm22_constant(gamma: float, n: int) -> SharpConstant:
    """(omega/(n+gamma))^(n/(n+gamma)), the L^1 -> weak L^((n+gamma)/n) constant."""
    e = n + gamma
    if not e > 0:
        raise DomainError(f"need n + gamma > 0, got {e}")
    omega = unit_sphere_area(n)
    return SharpConstant((omega / e) ** (n / e), FormulaId.THM22, {
        "omega": omega, "C_n": omega / (2 * n), "base": omega / e, "exponent": n / e})


_M_IDS = {KernelForm.HARDY_INDICATOR: FormulaId.M1, KernelForm.HLP_MAX: FormulaId.M2,
          KernelForm.HILBERT_SUM: FormulaId.M3, KernelForm.CUSTOM: FormulaId.M_GENERIC}


def kernel_constant_M(K: RadialKernel, betas: Sequence[float], ps: Sequence[float], n: int, m: int,
                      cfg: QuadratureConfig | None = None) -> SharpConstant:
    """Nested mixed norm of the kernel.

    G_1 = omega * int K^(p_1') s_1^(n-1 - beta_1 p_1'/p_1) ds_1, then for k >= 2
    G_k = omega * int G_(k-1)^(p_k'/p_(k-1)') s_k^(n-1 - beta_k p_k'/p_k) ds_k,
    and M = G_m^(1/p_m').  Divergent levels raise KernelAdmissibilityError.
    """
    cfg = cfg or QuadratureConfig()
    if K.arity != m or len(betas) != m or len(ps) != m:
        raise DomainError(f"kernel arity {K.arity}, {len(betas)} betas and {len(ps)} exponents for m={m}")
    if K.n != n:
        raise DomainError(f"kernel dimension {K.n} differs from n={n}")
    if m > 3:
        raise DomainError("deterministic M evaluation supports m <= 3")
    if any(not p > 1 for p in ps):
        raise DomainError(f"all exponents must exceed 1, got {list(ps)}")
    omega = unit_sphere_area(n)
    pp = [conjugate(p) for p in ps]
    w = [n - 1 - b * q / p for b, p, q in zip(betas, ps, pp)]
    for k, wk in enumerate(w):
        if wk <= -1:
            raise KernelAdmissibilityError(
                f"level {k + 1}: weight s^{wk:g} is not integrable at 0 (beta_{k + 1} >= n(p_{k + 1}-1))")
    decay = K.decay_power()
    tails: list[float | None] = []
    g_exp = None
    for k in range(m):
        if decay is None:
            tails.append(None)
            continue
        a = decay * pp[0] + w[0] if k == 0 else g_exp * pp[k] / pp[k - 1] + w[k]
        if a >= -1:
            raise KernelAdmissibilityError(
                f"level {k + 1}: integrand decays like s^{a:g}, not integrable at infinity")
        tails.append(a)
        g_exp = a + 1.0

    def innermost(X):
        return omega * K(X[..., :m]) ** pp[0] * X[..., 0] ** w[0]

    def outer_transform(k):
        def transform(G, s):
            return omega * np.maximum(G, 0.0) ** (pp[k] / pp[k - 1]) * s ** w[k]
        return transform

    levels = []
    for k in range(m):
        n_outer = m - k - 1

        def breaks(outer, n_outer=n_outer):
            return K.kinks(outer[:, :n_outer])

        levels.append(LevelSpec(0.0, math.inf, breaks, w[k], tails[k], outer_transform(k) if k else None))
    res = integrate_iterated_batch(innermost, levels, np.empty((1, 0)), cfg)
    G, err = float(res.values[0]), float(res.errors[0])
    if not math.isfinite(G) or G <= 0:
        raise KernelAdmissibilityError(f"nested kernel integral is not a positive finite number ({G})")
    if not res.converged:
        if err > 1e-3 * G:
            raise KernelAdmissibilityError(
                f"nested kernel integral failed to converge (value {G:.6g}, error {err:.3g})")
        warnings.warn(f"M quadrature did not reach rel_tol (error {err:.3g})", RuntimeWarning, stacklevel=2)
    value = G ** (1.0 / pp[-1])
    value_err = value / pp[-1] * err / G
    return SharpConstant(value, _M_IDS[K.form], {
        "omega": omega, "nested_integral": G, "root": 1.0 / pp[-1], "converged": float(res.converged)},
        error_estimate=value_err)


def thm31_bound(K: RadialKernel, betas: Sequence[float], ps: Sequence[float], q: float, gamma: float,
                n: int, m: int, cfg: QuadratureConfig | None = None) -> SharpConstant:
    """(omega/(n+gamma))^(1/q) * M, the m-linear weak-type bound.

    The ``corollary_form`` component is M alone, the version without the
    prefactor; ``corollary_gap`` is the relative difference between the two.
    """
    if not n + gamma > 0:
        raise DomainError(f"need n + gamma > 0, got {n + gamma}")
    if not q > 0:
        raise DomainError(f"need q > 0, got {q}")
    _warn_hypotheses(check_thm31_hypotheses(ps, betas, q, gamma, n, m), "thm31")
    M = kernel_constant_M(K, betas, ps, n, m, cfg)
    omega = unit_sphere_area(n)
    pref = (omega / (n + gamma)) ** (1.0 / q)
    return SharpConstant(pref * M.value, FormulaId.THM31_BOUND, {
        "omega": omega, "prefactor": pref, "M": M.value, "corollary_form": M.value,
        "corollary_gap": abs(pref - 1.0)}, error_estimate=pref * M.error_estimate)
