"""Radial reductions of the HLP operator and of m-linear kernel operators."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, DomainError, UnsupportedShapeError
from .quad import (BatchIntegral, IntegralResult, LevelSpec, PowerLawMap, QuadratureConfig,
                   integrate_1d, integrate_iterated_batch, integrate_mc)
from .radialfn import (COLLISION_TOL, PiecewisePowerLog, PowerLogTerm, integrate_weighted,
                       merge_terms)
from .spaces import unit_sphere_area


class KernelForm(enum.Enum):
    HARDY_INDICATOR = "hardy"
    HLP_MAX = "hlpmax"
    HILBERT_SUM = "hilbert"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RadialKernel:
    """A kernel on (R^n)^m that depends only on the block radii s_1..s_m.

    ``joint_norm`` applies to the Hardy indicator only: ``"euclidean"`` uses
    sum(s_i^2) <= 1, ``"max"`` uses max(s_i) <= 1.
    """
    arity: int
    form: KernelForm
    n: int
    profile: Callable[[np.ndarray], np.ndarray] | None = None
    joint_norm: str = "euclidean"

    def __post_init__(self):
        if self.arity < 1:
            raise DomainError(f"kernel arity must be >= 1, got {self.arity}")
        if self.n < 1:
            raise DomainError(f"dimension must be >= 1, got {self.n}")
        if self.form is KernelForm.CUSTOM and self.profile is None:
            raise DomainError("custom kernel needs a radial profile")
        if self.joint_norm not in ("euclidean", "max"):
            raise DomainError(f"unknown joint norm {self.joint_norm!r}")

    @property
    def name(self) -> str:
        return self.form.value

    def __call__(self, s: np.ndarray) -> np.ndarray:
        """K_rad at radii s of shape (..., m)."""
        s = np.asarray(s, dtype=float)
        m, n = self.arity, self.n
        if self.form is KernelForm.HARDY_INDICATOR:
            if self.joint_norm == "max":
                return (s.max(axis=-1) <= 1.0).astype(float)
            return ((s * s).sum(axis=-1) <= 1.0).astype(float)
        if self.form is KernelForm.HLP_MAX:
            return np.maximum(1.0, s.max(axis=-1) ** n) ** (-m)
        if self.form is KernelForm.HILBERT_SUM:
            return (1.0 + (s**n).sum(axis=-1)) ** (-m)
        return np.asarray(self.profile(s), dtype=float)

    def kinks(self, outer: np.ndarray) -> np.ndarray:
        """Split points in the innermost free radius given the outer radii (C, k)."""
        C = outer.shape[0]
        if self.form is KernelForm.HARDY_INDICATOR:
            if self.joint_norm == "max":
                return np.ones((C, 1))
            rest = 1.0 - (outer * outer).sum(axis=1, keepdims=True)
            return np.sqrt(np.where(rest > 0, rest, np.nan))
        if self.form is KernelForm.HLP_MAX:
            return np.concatenate([np.ones((C, 1)), outer], axis=1)
        if self.form is KernelForm.HILBERT_SUM:
            return (1.0 + (outer**self.n).sum(axis=1, keepdims=True)) ** (1.0 / self.n)
        return np.empty((C, 0))

    def decay_power(self) -> float | None:
        """Power law of K_rad in one radius as it tends to infinity, if known."""
        if self.form in (KernelForm.HLP_MAX, KernelForm.HILBERT_SUM):
            return -float(self.n * self.arity)
        return None


def hardy_kernel(m: int, n: int, joint_norm: str = "euclidean") -> RadialKernel:
    return RadialKernel(m, KernelForm.HARDY_INDICATOR, n, joint_norm=joint_norm)


def hlp_kernel(m: int, n: int) -> RadialKernel:
    return RadialKernel(m, KernelForm.HLP_MAX, n)


def hilbert_kernel(m: int, n: int) -> RadialKernel:
    return RadialKernel(m, KernelForm.HILBERT_SUM, n)


def kernel_from_name(name: str, m: int, n: int) -> RadialKernel:
    key = name.lower().replace("_", "").replace("-", "")
    table = {"hardy": KernelForm.HARDY_INDICATOR, "hardyindicator": KernelForm.HARDY_INDICATOR,
             "hlp": KernelForm.HLP_MAX, "hlpmax": KernelForm.HLP_MAX,
             "hilbert": KernelForm.HILBERT_SUM, "hilbertsum": KernelForm.HILBERT_SUM}
    if key not in table:
        raise DomainError(f"unknown kernel {name!r}; choose hardy, hlpmax or hilbert")
    return RadialKernel(m, table[key], n)


# ---------------------------------------------------------------- HLP operator

def _tail_power(f: PiecewisePowerLog) -> float | None:
    """Largest power on an unbounded last piece, or None if f has bounded support."""
    if math.isfinite(f.breakpoints[-1]):
        return None
    last = merge_terms(f.pieces[-1])
    return max(t.power for t in last) if last else None


def _check_tail(f: PiecewisePowerLog):
    a = _tail_power(f)
    if a is not None and a >= -COLLISION_TOL:
        raise DivergenceError(
            f"HLP tail integral of s^{a!r}/s diverges at infinity; f must decay")


def hlp_integrals(f, n: int, r: float, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """Numeric H f(r) with a combined error estimate."""
    cfg = cfg or QuadratureConfig()
    omega = unit_sphere_area(n)
    if isinstance(f, PiecewisePowerLog):
        _check_tail(f)
        a0 = f.leading_power_at_zero()
        pts = [b for b in f.breakpoints if math.isfinite(b)]
        at = _tail_power(f)
        c1 = cfg.with_(singularity_exponent_hint=None if a0 is None else a0 + n - 1)
        c2 = cfg.with_(singularity_exponent_hint=None,
                       tail_exponent_hint=None if at is None else at - 1.0)
        hi = pts[-1] if math.isfinite(f.breakpoints[-1]) else math.inf
    else:
        pts, c1, c2, hi = [], cfg, cfg, math.inf
    first = integrate_1d(lambda s: f(s) * s ** (n - 1), 0.0, r, c1, pts)
    if r < hi:
        second = integrate_1d(lambda s: f(s) / s, r, hi, c2, pts)
    else:
        second = IntegralResult(0.0, 0.0, 0, True)
    value = omega * (first.value / r**n + second.value)
    err = omega * math.hypot(first.error_estimate / r**n, second.error_estimate)
    return IntegralResult(value, err, first.subdivisions_used + second.subdivisions_used,
                          first.converged and second.converged)


def apply_hlp(f, n: int, r: float, method: str = "exact", cfg: QuadratureConfig | None = None) -> float:
    """H f(r) for radial f.

    ``method="exact"`` integrates a :class:`PiecewisePowerLog` term by term;
    ``"quad"`` (forced for plain callables) uses adaptive quadrature.
    """
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    if method not in ("exact", "quad"):
        raise DomainError(f"unknown method {method!r}")
    if method == "exact" and isinstance(f, PiecewisePowerLog):
        omega = unit_sphere_area(n)
        _check_tail(f)
        inner = integrate_weighted(f, 0.0, r, n - 1)
        outer = integrate_weighted(f, r, math.inf, -1.0)
        return omega * (inner / r**n + outer)
    res = hlp_integrals(f, n, r, cfg)
    if not res.converged:
        warnings.warn(f"HLP quadrature at r={r} did not converge (error {res.error_estimate:.3g})",
                      RuntimeWarning, stacklevel=2)
    return res.value


def _anti(t: PowerLogTerm, shift: float, label: str) -> list[PowerLogTerm]:
    """Antiderivative of t(s) * s^shift as power-log terms."""
    e = t.power + shift + 1.0
    c = t.coeff
    if abs(e) < COLLISION_TOL:
        if t.log_order:
            raise UnsupportedShapeError(f"{label}: antiderivative needs log(r)^2")
        return [PowerLogTerm(c, 0.0, 1)]
    if t.log_order == 0:
        return [PowerLogTerm(c / e, e, 0)]
    return [PowerLogTerm(c / e, e, 1), PowerLogTerm(-c / e**2, e, 0)]


def _eval_terms(terms, r: float) -> float:
    return float(sum(t(r) for t in terms))


def apply_hlp_symbolic(f: PiecewisePowerLog, n: int) -> PiecewisePowerLog:
    """Exact image H f as a PiecewisePowerLog on the breakpoints of f."""
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    _check_tail(f)
    omega = unit_sphere_area(n)
    spans = list(f.spans(include_tail=True))
    pieces = []
    for lo, hi, terms in spans:
        terms = merge_terms(terms)
        prefix = integrate_weighted(f, 0.0, lo, n - 1) if lo > 0 else 0.0
        suffix = integrate_weighted(f, hi, math.inf, -1.0) if math.isfinite(hi) else 0.0
        out: list[PowerLogTerm] = []
        const_a = prefix
        const_b = suffix
        for t in terms:
            label = f"term {t.to_text()} on [{lo!r}, {hi!r})"
            F = _anti(t, n - 1.0, label)
            G = _anti(t, -1.0, label)
            if lo == 0:
                if t.power + n <= COLLISION_TOL:
                    raise DivergenceError(f"{label}: integral of f s^(n-1) diverges at 0")
            else:
                const_a -= _eval_terms(F, lo)
            if math.isfinite(hi):
                const_b += _eval_terms(G, hi)
            elif t.power >= -COLLISION_TOL:
                raise DivergenceError(f"{label}: integral of f/s diverges at infinity")
            out += [PowerLogTerm(g.coeff, g.power - n, g.log_order) for g in F]
            out += [PowerLogTerm(-g.coeff, g.power, g.log_order) for g in G]
        out.append(PowerLogTerm(const_a, -float(n), 0))
        out.append(PowerLogTerm(const_b, 0.0, 0))
        pieces.append(merge_terms([PowerLogTerm(omega * t.coeff, t.power, t.log_order) for t in out]))
    bps = tuple(hi for _, hi, _ in spans)
    return PiecewisePowerLog(bps, tuple(pieces))


# ---------------------------------------------------------------- m-linear operator

def _hints(f: PiecewisePowerLog, n: int, K: RadialKernel) -> tuple[float | None, float | None]:
    a0 = f.leading_power_at_zero()
    zero = None if a0 is None else a0 + n - 1
    at = _tail_power(f)
    dk = K.decay_power()
    tail = None if at is None or dk is None else at + n - 1 + dk
    return zero, tail


def kernel_operator_batch(K: RadialKernel, fs: Sequence[PiecewisePowerLog], radii,
                          cfg: QuadratureConfig | None = None) -> BatchIntegral:
    """omega^m * integral of K_rad(s) prod f_i(r s_i) s_i^(n-1) over (0, inf)^m, for each r in radii."""
    cfg = cfg or QuadratureConfig()
    m, n = K.arity, K.n
    if len(fs) != m:
        raise DomainError(f"kernel arity {m} but {len(fs)} functions given")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if not (radii > 0).all():
        raise DomainError("radii must be positive")
    scale = unit_sphere_area(n) ** m

    def integrand(X):
        r = X[..., m]
        v = K(X[..., :m])
        for i, f in enumerate(fs):
            s = X[..., i]
            v = v * f(r * s) * s ** (n - 1)
        return v

    if m > 3:
        vals, errs, ok = [], [], True
        for r in radii:
            maps = []
            for f in fs:
                zero, _ = _hints(f, n, K)
                end = f.breakpoints[-1]
                pivot = end / r if math.isfinite(end) else 1.0
                maps.append(PowerLawMap(max(zero if zero is not None else 0.0, -0.9), -2.0, pivot))
            res = integrate_mc(lambda X, r=r: integrand(
                np.concatenate([X, np.full(X.shape[:-1] + (1,), r)], axis=-1)), m, maps, cfg)
            vals.append(res.value)
            errs.append(res.error_estimate)
            ok &= res.converged
        return BatchIntegral(scale * np.array(vals), scale * np.array(errs), 0, ok)

    levels = []
    for i, f in enumerate(fs):
        zero, tail = _hints(f, n, K)
        fb = np.array([b for b in f.breakpoints if math.isfinite(b)])
        n_outer = m - i - 1

        def breaks(outer, fb=fb, n_outer=n_outer):
            return np.concatenate([fb[None, :] / outer[:, -1:], K.kinks(outer[:, :n_outer])], axis=1)

        levels.append(LevelSpec(0.0, math.inf, breaks, zero, tail))
    res = integrate_iterated_batch(integrand, levels, radii[:, None], cfg)
    return BatchIntegral(scale * res.values, scale * res.errors, res.subdivisions_used, res.converged)


def kernel_operator_integral(K: RadialKernel, fs: Sequence[PiecewisePowerLog], r: float,
                             cfg: QuadratureConfig | None = None) -> IntegralResult:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    res = kernel_operator_batch(K, fs, [r], cfg)
    return IntegralResult(float(res.values[0]), float(res.errors[0]),
                          res.subdivisions_used, res.converged)


def apply_kernel_operator(K: RadialKernel, fs: Sequence[PiecewisePowerLog], r: float,
                          cfg: QuadratureConfig | None = None) -> float:
    """H^m(f_1, ..., f_m)(r) for radial inputs, nested quadrature for m <= 3 and Monte Carlo above."""
    res = kernel_operator_integral(K, fs, r, cfg)
    if not res.converged:
        warnings.warn(f"kernel operator at r={r} did not converge (error {res.error_estimate:.3g})",
                      RuntimeWarning, stacklevel=2)
    return res.value


def kernel_image(K: RadialKernel, fs: Sequence[PiecewisePowerLog], cfg: QuadratureConfig | None = None):
    """Vectorized callable r -> H^m(f_1, ..., f_m)(r)."""
    def image(r):
        r = np.asarray(r, dtype=float)
        out = kernel_operator_batch(K, fs, r.reshape(-1), cfg).values.reshape(r.shape)
        return float(out) if out.ndim == 0 else out
    return image
