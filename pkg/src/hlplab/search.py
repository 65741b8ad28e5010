"""Derivative-free one-dimensional maximisation."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(phi: Callable[[float], float], a: float, b: float, tol: float = GOLDEN_TOL,
               max_iter: int = 200) -> tuple[float, float, int]:
    """Golden-section maximisation of phi on [a, b].

    Stops once the bracket is narrower than ``tol`` relative to max(1, |a|, |b|).
    Returns (x, phi(x), evaluations).
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = phi(c), phi(d)
    evals = 2
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = phi(d)
        evals += 1
    return (c, fc, evals) if fc >= fd else (d, fd, evals)


def scan_golden_max(phi: Callable[[float], float], a: float, b: float, scan: int = 16,
                    tol: float = GOLDEN_TOL) -> tuple[float, float, int]:
    """Grid scan on [a, b] followed by golden section around the best grid point.

    Ties resolve to the smallest argument.
    """
    xs = np.linspace(a, b, scan + 2)[1:-1]
    vals = [phi(float(x)) for x in xs]
    i = int(np.argmax(vals))
    lo = float(xs[i - 1]) if i > 0 else a
    hi = float(xs[i + 1]) if i + 1 < len(xs) else b
    x, v, evals = golden_max(phi, lo, hi, tol)
    if vals[i] >= v:
        return float(xs[i]), float(vals[i]), evals + scan
    return x, v, evals + scan
