"""Extremal functions, their printed operator images, and a sharpness probe."""
from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import DivergenceError, DomainError, HLPLabError
from .norms import strong_norm, weak_norm
from .operators import apply_hlp_symbolic
from .radialfn import PiecewisePowerLog, PowerLogTerm, merge_terms
from .search import scan_golden_max
from .spaces import unit_sphere_area

log = logging.getLogger(__name__)


class FamilyId(enum.Enum):
    THM21 = "thm21"
    THM22 = "thm22"
    POWER_CUTOFF = "power_cutoff"
    HOLDER_DUAL = "holder_dual"


@dataclass(frozen=True)
class SpaceParams:
    """Source space L^p(|x|^beta) and target weak space L^{q,inf}(|x|^gamma) on R^n."""
    n: int = 1
    p: float = 1.0
    beta: float = 0.0
    q: float = 1.0
    gamma: float = 0.0

    @classmethod
    def thm22(cls, n: int, gamma: float = 0.0) -> "SpaceParams":
        return cls(n=n, p=1.0, beta=0.0, q=(n + gamma) / n, gamma=gamma)


@dataclass(frozen=True)
class ExtremalFamily:
    id: FamilyId
    params: dict = field(default_factory=dict)


def _thm21_exponents(sp: SpaceParams) -> tuple[float, float]:
    if not sp.p > 1:
        raise DomainError(f"thm21 family needs p > 1, got {sp.p}")
    return (sp.beta + sp.n) / (sp.p - 1) - sp.n, -sp.beta / (sp.p - 1)


def _build(family: ExtremalFamily, sp: SpaceParams) -> PiecewisePowerLog:
    fid = family.id
    if fid is FamilyId.THM21:
        a1, a2 = _thm21_exponents(sp)
        terms = merge_terms([PowerLogTerm(1.0, a1), PowerLogTerm(1.0, a2)])
        return PiecewisePowerLog((1.0,), (terms,))
    if fid is FamilyId.THM22:
        return PiecewisePowerLog((1.0,), ((PowerLogTerm(1.0, float(sp.n)),),))
    if fid is FamilyId.POWER_CUTOFF:
        if "a" not in family.params:
            raise DomainError("power_cutoff family needs parameter 'a'")
        a = float(family.params["a"])
        b = family.params.get("b")
        if b is None:
            return PiecewisePowerLog((1.0,), ((PowerLogTerm(1.0, a),),))
        return PiecewisePowerLog((1.0, math.inf), ((PowerLogTerm(1.0, a),), (PowerLogTerm(1.0, float(b)),)))
    if fid is FamilyId.HOLDER_DUAL:
        if not sp.p > 1:
            raise DomainError(f"holder_dual family needs p > 1, got {sp.p}")
        s = 1.0 / (sp.p - 1)
        return PiecewisePowerLog((1.0, math.inf), ((PowerLogTerm(1.0, -sp.beta * s),),
                                                   (PowerLogTerm(1.0, -(sp.beta + sp.n) * s),)))
    raise DomainError(f"unknown family {fid}")


def make_extremal(family: ExtremalFamily, sp: SpaceParams) -> PiecewisePowerLog:
    """Member of ``family`` for the given spaces; raises DomainError outside L^p(|x|^beta).

    thm21: (r^a1 + r^a2) on (0,1) with a1 = (beta+n)/(p-1) - n, a2 = -beta/(p-1),
    merged into one term when the exponents coincide.  thm22: r^n on (0,1).
    power_cutoff: r^a on (0,1), optionally r^b on [1,inf).  holder_dual:
    r^(-beta/(p-1)) on (0,1) and r^(-(beta+n)/(p-1)) on [1,inf), the equality
    case of the Hoelder step at radius 1.
    """
    f = _build(family, sp)
    try:
        norm = strong_norm(f, sp.p, sp.beta, sp.n)
    except DivergenceError as exc:
        raise DomainError(f"{family.id.value} member is not in the source space: {exc}") from exc
    if not math.isfinite(norm):
        raise DomainError(f"{family.id.value} member has infinite source norm")
    return f


def closed_form_image(family: ExtremalFamily, sp: SpaceParams) -> PiecewisePowerLog:
    """The operator image exactly as the printed case analysis states it.

    thm21: C {r^a1 + r^a2 - 1 on (0,1); r^-n on [1,inf)} with
    C = (p-1) omega/(beta+n) + omega/(n - beta/(p-1)).
    thm22: C_n {2 - r^n on (0,1); r^-n on [1,inf)} with C_n = omega/(2n).
    """
    n = sp.n
    omega = unit_sphere_area(n)
    if family.id is FamilyId.THM21:
        a1, a2 = _thm21_exponents(sp)
        C = (sp.p - 1) * omega / (sp.beta + n) + omega / (n - sp.beta / (sp.p - 1))
        inner = merge_terms([PowerLogTerm(C, a1), PowerLogTerm(C, a2), PowerLogTerm(-C, 0.0)])
        return PiecewisePowerLog((1.0, math.inf), (inner, (PowerLogTerm(C, -float(n)),)))
    if family.id is FamilyId.THM22:
        Cn = omega / (2 * n)
        inner = (PowerLogTerm(2 * Cn, 0.0), PowerLogTerm(-Cn, float(n)))
        return PiecewisePowerLog((1.0, math.inf), (inner, (PowerLogTerm(Cn, -float(n)),)))
    raise DomainError(f"no printed image for family {family.id.value}")


def hlp_ratio(f: PiecewisePowerLog, sp: SpaceParams) -> float:
    """||H f||_{L^{q,inf}(|x|^gamma)} / ||f||_{L^p(|x|^beta)} with the exact image."""
    num = weak_norm(apply_hlp_symbolic(f, sp.n), sp.q, sp.gamma, sp.n)
    den = strong_norm(f, sp.p, sp.beta, sp.n)
    if not den > 0:
        raise DomainError("zero input function")
    return num / den


@dataclass(frozen=True)
class ProbeConfig:
    """Search ranges for free parameters (open intervals) and stopping rules."""
    ranges: dict = field(default_factory=dict)
    scan: int = 16
    tol: float = 1e-8
    max_sweeps: int = 12


@dataclass
class ProbeResult:
    best_params: dict
    best_ratio: float
    bound: float
    gap: float
    evaluations: int
    skipped: list = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.best_ratio <= self.bound * (1 + 1e-6)

    def to_dict(self) -> dict:
        return {"best_params": self.best_params, "best_ratio": self.best_ratio, "bound": self.bound,
                "gap": self.gap, "evaluations": self.evaluations, "within_bound": self.within_bound,
                "skipped": self.skipped}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sharpness_probe(family: ExtremalFamily, sp: SpaceParams, bound: float,
                    cfg: ProbeConfig | None = None,
                    ratio: Callable[[PiecewisePowerLog, SpaceParams], float] = hlp_ratio) -> ProbeResult:
    """Maximise the weak-to-strong ratio over the free parameters of ``family``.

    No free parameter: one evaluation.  One: scan plus golden section.  Two:
    coordinate descent, each sweep a scan plus golden section per coordinate.
    Members outside the source space are skipped and logged.
    """
    if not bound > 0:
        raise DomainError(f"bound must be positive, got {bound}")
    cfg = cfg or ProbeConfig()
    free = sorted(cfg.ranges)
    if len(free) > 2:
        raise DomainError(f"probe supports at most two free parameters, got {free}")
    state = {"evals": 0}
    skipped: list = []

    def objective(params: dict) -> float:
        state["evals"] += 1
        fam = ExtremalFamily(family.id, {**family.params, **params})
        try:
            return ratio(make_extremal(fam, sp), sp)
        except (HLPLabError, ValueError, ArithmeticError) as exc:
            entry = {"params": dict(params), "reason": str(exc)}
            skipped.append(entry)
            log.info("probe skipped %s: %s", params, exc)
            return -math.inf

    fixed = {k: family.params[k] for k in family.params if k not in free}
    if not free:
        best = objective({})
        best_params = dict(fixed)
    elif len(free) == 1:
        name = free[0]
        lo, hi = cfg.ranges[name]
        x, best, _ = scan_golden_max(lambda v: objective({name: v}), lo, hi, cfg.scan, cfg.tol)
        best_params = {**fixed, name: x}
    else:
        point = {k: 0.5 * (cfg.ranges[k][0] + cfg.ranges[k][1]) for k in free}
        best = objective(point)
        for _ in range(cfg.max_sweeps):
            before = best
            for name in free:
                lo, hi = cfg.ranges[name]
                x, v, _ = scan_golden_max(lambda t: objective({**point, name: t}), lo, hi, cfg.scan, cfg.tol)
                if v > best:
                    best, point = v, {**point, name: x}
            if best - before <= cfg.tol * max(1.0, abs(best)):
                break
        best_params = {**fixed, **point}
    if not math.isfinite(best):
        raise DomainError("no family member inside the source space")
    return ProbeResult(best_params, best, bound, 1.0 - best / bound, state["evals"], skipped)


__all__ = ["FamilyId", "SpaceParams", "ExtremalFamily", "make_extremal", "closed_form_image",
           "hlp_ratio", "ProbeConfig", "ProbeResult", "sharpness_probe"]
