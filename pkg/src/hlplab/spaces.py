"""Weighted space parameters, the sphere-area constant and hypothesis checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DomainError

EQ_TOL = 1e-12


class Kind(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n, 2 pi^(n/2) / Gamma(n/2).

    Gamma is taken at half-integers exactly: for even n = 2k the value is
    2 pi^k / (k-1)!, and for odd n = 2k+1 the sqrt(pi) cancels, leaving
    2 (4 pi)^k k! / (2k)!.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    k, odd = divmod(n, 2)
    if not odd:
        return 2.0 * math.pi**k / math.factorial(k - 1)
    return 2.0 * (4.0 * math.pi) ** k * (math.factorial(k) / math.factorial(2 * k))


@dataclass(frozen=True)
class SpaceSpec:
    """A power-weighted Lebesgue space L^exponent(R^n, |x|^weight_exp), strong or weak."""

    n: int
    exponent: float
    weight_exp: float = 0.0
    kind: Kind = Kind.STRONG

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not self.exponent > 0:
            raise DomainError(f"exponent must be positive, got {self.exponent!r}")
        if self.kind is Kind.WEAK:
            if self.exponent < 1:
                raise DomainError("weak spaces need exponent >= 1")
            if not self.weight_exp + self.n > 0:
                raise DomainError("weak target needs weight_exp + n > 0")

    @property
    def omega(self) -> float:
        return unit_sphere_area(self.n)


@dataclass(frozen=True)
class ConjugateExponent:
    p: float
    p_prime: float = field(init=False)

    def __post_init__(self):
        if not self.p > 1 or math.isinf(self.p):
            raise DomainError(f"conjugate exponent needs 1 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p_prime", self.p / (self.p - 1.0))


def conjugate(p: float) -> float:
    return ConjugateExponent(p).p_prime


@dataclass(frozen=True)
class Check:
    name: str
    relation: str
    left: float
    right: float
    passed: bool


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple[Check, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [
                {"name": c.name, "relation": c.relation, "left": c.left,
                 "right": c.right, "pass": c.passed}
                for c in self.checks
            ],
        }


def _div(a: float, b: float) -> float:
    if b == 0:
        return math.copysign(math.inf, a) if a != 0 else math.nan
    return a / b


def _lt(name, left, right):
    return Check(name, "<", left, right, left < right)


def _ge(name, left, right):
    return Check(name, ">=", left, right, left >= right - EQ_TOL)


def _eq(name, left, right):
    return Check(name, "=", left, right, abs(left - right) <= EQ_TOL)


def check_thm21_hypotheses(p: float, q: float, beta: float, gamma: float, n: int) -> HypothesisReport:
    """Evaluate every hypothesis of the sharp L^p -> L^{q,inf} HLP bound."""
    pm1 = p - 1.0
    checks = [
        _lt("p > 1", 1.0, p),
        _lt("p < inf", p, math.inf),
        _ge("q >= 1", q, 1.0),
        _lt("q < inf", q, math.inf),
        _lt("beta > 0", 0.0, beta),
        _lt("beta < n(p-1)", beta, n * pm1),
        _ge("(gamma+n)/((beta/(p-1)) q) >= 2", _div(gamma + n, _div(beta, pm1) * q), 2.0),
        _ge("(gamma+n)/((n-(beta+n)/(p-1)) q) >= 2",
            _div(gamma + n, (n - _div(beta + n, pm1)) * q), 2.0),
        _lt("(beta+n)/(p-1) - n < 0", _div(beta + n, pm1) - n, 0.0),
        _eq("(gamma+n)/q = n/2", _div(gamma + n, q), n / 2.0),
        _eq("(beta+n)/p = n/2", _div(beta + n, p), n / 2.0),
    ]
    return HypothesisReport(tuple(checks))


def check_thm31_hypotheses(p_vec: Sequence[float], beta_vec: Sequence[float], q: float,
                           gamma: float, n: int, m: int) -> HypothesisReport:
    """Evaluate the hypotheses of the m-linear weak bound, including the balance equality."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    if len(p_vec) != m or len(beta_vec) != m:
        raise DomainError(
            f"expected {m} exponents and weights, got {len(p_vec)} and {len(beta_vec)}")
    checks = []
    for i, (p, b) in enumerate(zip(p_vec, beta_vec), start=1):
        checks += [
            _lt(f"p_{i} > 1", 1.0, p),
            _lt(f"p_{i} < inf", p, math.inf),
            _lt(f"beta_{i} > 0", 0.0, b),
            _lt(f"beta_{i} < n(p_{i}-1)", b, n * (p - 1.0)),
        ]
    balance = sum(_div(b + n, p) for p, b in zip(p_vec, beta_vec))
    checks += [
        _ge("q >= 1", q, 1.0),
        _lt("q < inf", q, math.inf),
        _lt("n + gamma > 0", 0.0, n + gamma),
        _eq("sum (beta_i+n)/p_i = (gamma+n)/q", balance, _div(gamma + n, q)),
    ]
    return HypothesisReport(tuple(checks))
