"""Strong weighted L^p norms and weak L^{q,inf} norms of radial functions.

For a radial g on R^n with weight |x|^gamma the distribution function is

    mu(lam) = omega_n * integral over {r : |g(r)| > lam} of r^(n-1+gamma) dr

and the weak norm is sup over lam > 0 of lam * mu(lam)^(1/q).
"""
from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DivergenceError, DomainError, UnboundedNormError, UnsupportedShapeError
from .quad import QuadratureConfig, integrate_1d
from .radialfn import (COLLISION_TOL, PiecewisePowerLog, candidate_levels, merge_terms,
                       superlevel_set, term_integral)
from .search import golden_max
from .spaces import unit_sphere_area



class Exactness(enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class DistributionCurve:
    samples: tuple[tuple[float, float], ...]
    exactness: Exactness

    def __post_init__(self):
        ms = [m for _, m in sorted(self.samples)]
        for a, b in zip(ms, ms[1:]):
            if b > a * (1 + 1e-12) + 1e-300:
                raise DomainError("distribution measure must be non-increasing in lambda")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "measure", "exactness"])
        for lam, mu in self.samples:
            w.writerow([repr(float(lam)), repr(float(mu)), self.exactness.value])
        return buf.getvalue()


@dataclass(frozen=True)
class WeakNormResult:
    value: float
    argmax_lambda: float
    exactness: Exactness
    evaluations: int


# ---------------------------------------------------------------- strong norm

def strong_norm(f: PiecewisePowerLog, p: float, beta: float, n: int,
                cfg: QuadratureConfig | None = None) -> float:
    """(omega_n * integral of |f|^p r^(beta+n-1) dr)^(1/p)."""
    if not p >= 1:
        raise DomainError(f"strong norm needs p >= 1, got {p}")
    omega = unit_sphere_area(n)
    cfg = cfg or QuadratureConfig()
    w = beta + n - 1.0
    total = 0.0
    for lo, hi, terms in f.spans(include_tail=False):
        terms = merge_terms(terms)
        if not terms:
            continue
        label = f"piece [{lo!r}, {hi!r}): " + " + ".join(t.to_text() for t in terms)
        if len(terms) == 1 and terms[0].log_order == 0:
            t = terms[0]
            total += term_integral(abs(t.coeff) ** p, t.power * p + w, 0, lo, hi, label)
            continue
        a0 = min(t.power for t in terms)
        a1 = max(t.power for t in terms)
        if lo == 0 and (a0 * p + w + 1 < -COLLISION_TOL or
                        (abs(a0 * p + w + 1) <= COLLISION_TOL)):
            raise DivergenceError(f"{label}: |f|^p r^(beta+n-1) not integrable at 0")
        if math.isinf(hi) and (a1 * p + w + 1 > COLLISION_TOL or
                               (abs(a1 * p + w + 1) <= COLLISION_TOL)):
            raise DivergenceError(f"{label}: |f|^p r^(beta+n-1) not integrable at infinity")
        c = cfg.with_(singularity_exponent_hint=a0 * p + w if lo == 0 else None,
                      tail_exponent_hint=a1 * p + w if math.isinf(hi) else None)
        res = integrate_1d(lambda r: np.abs(sum(t(r) for t in terms)) ** p * r**w, lo, hi, c)
        if not res.converged:
            warnings.warn(f"{label}: strong-norm quadrature did not converge", RuntimeWarning,
                          stacklevel=2)
        total += res.value
    return (omega * total) ** (1.0 / p)


# ---------------------------------------------------------------- distribution

def _numeric_superlevel(g: PiecewisePowerLog, lam: float) -> list[tuple[float, float]]:
    """Bracket {|g| > lam} by sampling in log r and refining crossings with brentq."""
    out = []
    for lo, hi, terms in g.spans(include_tail=False):
        terms = merge_terms(terms)
        if not terms:
            continue
        h = lambda x: abs(sum(t(math.exp(x)) for t in terms)) - lam
        tl = math.log(lo) if lo > 0 else -60.0
        th = math.log(hi) if math.isfinite(hi) else 60.0
        ts = np.linspace(tl, th, 4001)
        with np.errstate(over="ignore", invalid="ignore"):
            vs = np.abs(sum(t(np.exp(ts)) for t in terms)) - lam
        above = vs > 0
        start = lo if above[0] else None
        for i in range(len(ts) - 1):
            if above[i] == above[i + 1]:
                continue
            x = math.exp(brentq(h, ts[i], ts[i + 1], xtol=1e-15))
            if above[i + 1]:
                start = x
            else:
                out.append((start, x))
                start = None
        if start is not None:
            out.append((start, hi))
    return out


def _merge(ivals):
    res: list[list[float]] = []
    for a, b in sorted(ivals):
        if res and a <= res[-1][1]:
            res[-1][1] = max(res[-1][1], b)
        else:
            res.append([a, b])
    return [(a, b) for a, b in res]


def abs_superlevel_set(g: PiecewisePowerLog, lam: float) -> tuple[list[tuple[float, float]], Exactness]:
    """{r : |g(r)| > lam}, exactly when the pieces allow it."""
    try:
        ivals = superlevel_set(g, lam) + superlevel_set(-g, lam)
        return _merge(ivals), Exactness.CLOSED_FORM
    except UnsupportedShapeError:
        return _merge(_numeric_superlevel(g, lam)), Exactness.NUMERIC


def ball_measure(ivals: Sequence[tuple[float, float]], gamma: float, n: int) -> float:
    """Weighted measure of the union of spherical shells a < |x| < b."""
    e = n + gamma
    if not e > 0:
        raise DomainError(f"need n + gamma > 0, got {e}")
    omega = unit_sphere_area(n)
    total = 0.0
    for a, b in ivals:
        if math.isinf(b):
            return math.inf
        total += b**e - a**e
    return omega * total / e


def distribution_measure(g: PiecewisePowerLog, lam: float, gamma: float, n: int) -> float:
    """mu_gamma({|g| > lam}); math.inf when the superlevel set is unbounded."""
    if not lam > 0:
        raise DomainError(f"level must be positive, got {lam!r}")
    ivals, _ = abs_superlevel_set(g, lam)
    return ball_measure(ivals, gamma, n)


def distribution_curve(g: PiecewisePowerLog, gamma: float, n: int,
                       lambdas: Sequence[float] | None = None) -> DistributionCurve:
    if lambdas is None:
        cands = candidate_levels(g) or [1.0]
        lambdas = sorted(set(np.geomspace(cands[0] / 100, cands[-1] * 2, 41).tolist()) | set(cands))
    exact = Exactness.CLOSED_FORM
    samples = []
    for lam in sorted(lambdas):
        ivals, ex = abs_superlevel_set(g, lam)
        if ex is Exactness.NUMERIC:
            exact = ex
        samples.append((float(lam), ball_measure(ivals, gamma, n)))
    return DistributionCurve(tuple(samples), exact)


# ---------------------------------------------------------------- weak norm

def _dominant(terms, at_zero: bool):
    terms = merge_terms(terms)
    if not terms:
        return None
    if at_zero:
        return min(terms, key=lambda t: (t.power, -t.log_order))
    return max(terms, key=lambda t: (t.power, t.log_order))


def check_weak_finiteness(g: PiecewisePowerLog, q: float, gamma: float, n: int) -> None:
    """Raise UnboundedNormError when lam * mu(lam)^(1/q) blows up at lam -> 0 or lam -> inf."""
    e = n + gamma
    if math.isinf(g.breakpoints[-1]):
        t = _dominant(g.pieces[-1], at_zero=False)
        if t is not None:
            if t.power >= -COLLISION_TOL:
                raise UnboundedNormError(
                    f"g does not decay at infinity (term {t.to_text()}); superlevel sets are unbounded")
            kappa = 1.0 - e / (-t.power * q)
            if kappa < -COLLISION_TOL or (abs(kappa) <= COLLISION_TOL and t.log_order):
                raise UnboundedNormError(
                    f"tail term {t.to_text()} decays too slowly for L^({q},inf) with weight power {gamma}")
    t = _dominant(g.pieces[0], at_zero=True)
    if t is not None and t.power < -COLLISION_TOL:
        kappa = 1.0 - e / (-t.power * q)
        if kappa > COLLISION_TOL or (abs(kappa) <= COLLISION_TOL and t.log_order):
            raise UnboundedNormError(
                f"singular term {t.to_text()} at the origin is too strong for L^({q},inf)")


def weak_norm_detail(g: PiecewisePowerLog, q: float, gamma: float, n: int,
                     scan: int = 32) -> WeakNormResult:
    """sup over lam of lam * mu(lam)^(1/q) with the maximising level.

    Every value |g| takes at a breakpoint, an endpoint limit or an interior
    critical point is a candidate; between consecutive candidates the
    function of log lam is scanned and then refined by golden section.
    """
    if not q >= 1:
        raise DomainError(f"weak norm needs q >= 1, got {q}")
    if not n + gamma > 0:
        raise DomainError(f"weak norm needs n + gamma > 0, got {n + gamma}")
    if g.is_zero():
        return WeakNormResult(0.0, math.nan, Exactness.CLOSED_FORM, 0)
    check_weak_finiteness(g, q, gamma, n)
    state = {"evals": 0, "exact": Exactness.CLOSED_FORM}

    def phi(lam: float) -> float:
        ivals, ex = abs_superlevel_set(g, lam)
        if ex is Exactness.NUMERIC:
            state["exact"] = ex
        state["evals"] += 1
        mu = ball_measure(ivals, gamma, n)
        if math.isinf(mu):
            raise UnboundedNormError(f"superlevel set at lambda={lam!r} has infinite measure")
        return lam * mu ** (1.0 / q)

    cands = candidate_levels(g)
    best_val, best_lam = 0.0, math.nan
    for c in cands:
        for lam in (c, np.nextafter(c, 0.0)):
            v = phi(lam)
            if v > best_val:
                best_val, best_lam = v, lam
    head = _dominant(g.pieces[0], at_zero=True)
    unbounded_top = head is not None and head.power < -COLLISION_TOL or (
        head is not None and abs(head.power) <= COLLISION_TOL and head.log_order == 1)
    base = cands if cands else [1.0]
    edges = [math.log(base[0]) - 40.0] + [math.log(c) for c in cands]
    if unbounded_top or not cands:
        edges.append(math.log(base[-1]) + 40.0)
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        ts = np.linspace(a, b, scan + 2)[1:-1]
        vals = [phi(math.exp(t)) for t in ts]
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_lam = vals[i], math.exp(ts[i])
        lo = ts[i - 1] if i > 0 else a
        hi = ts[i + 1] if i + 1 < len(ts) else b
        t, v, _ = golden_max(lambda t: phi(math.exp(t)), lo, hi)
        if v > best_val:
            best_val, best_lam = v, math.exp(t)
    return WeakNormResult(best_val, best_lam, state["exact"], state["evals"])


def weak_norm(g: PiecewisePowerLog, q: float, gamma: float, n: int) -> float:
    """Weak L^{q,inf} norm of a radial function with power weight |x|^gamma."""
    return weak_norm_detail(g, q, gamma, n).value


# ---------------------------------------------------------------- numeric weak norm

def _batched_roots(g, lam: np.ndarray, xa: np.ndarray, xb: np.ndarray, fa: np.ndarray,
                   fb: np.ndarray, max_iter: int = 80, record: list | None = None,
                   xtol: float = 1e-14) -> tuple[np.ndarray, int]:
    """Illinois iteration on x = log r for |g(e^x)| = lam, all brackets at once.

    Every evaluation (x, |g(e^x)|) is appended to ``record`` when given.
    """
    xa, xb, fa, fb = xa.copy(), xb.copy(), fa.copy(), fb.copy()
    side = np.zeros(len(xa), dtype=int)
    active = np.ones(len(xa), dtype=bool)
    calls = 0
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        denom = fb[idx] - fa[idx]
        x = np.where(denom != 0, xb[idx] - fb[idx] * (xb[idx] - xa[idx]) / denom,
                     0.5 * (xa[idx] + xb[idx]))
        x = np.clip(x, np.minimum(xa[idx], xb[idx]), np.maximum(xa[idx], xb[idx]))
        gx = np.abs(np.asarray(g(np.exp(x)), dtype=float))
        if record is not None:
            record.append((x, gx))
        fx = gx - lam[idx]
        calls += len(x)
        same = np.sign(fx) == np.sign(fb[idx])
        # Illinois update
        j_same, j_diff = idx[same], idx[~same]
        fa[j_same] = np.where(side[j_same] == 1, fa[j_same] / 2, fa[j_same])
        side[j_same] = 1
        xb[j_same], fb[j_same] = x[same], fx[same]
        xa[j_diff], fa[j_diff] = xb[j_diff], fb[j_diff]
        xb[j_diff], fb[j_diff] = x[~same], fx[~same]
        side[j_diff] = 0
        done = (np.abs(xb[idx] - xa[idx]) <= xtol * np.maximum(1.0, np.abs(xb[idx]))) | (fx == 0)
        active[idx[done]] = False
    return np.exp(xb), calls


def weak_norm_numeric(g: Callable[[np.ndarray], np.ndarray], q: float, gamma: float, n: int,
                      breakpoints: Sequence[float] = (), r_min: float = 1e-6, r_max: float = 1e6,
                      per_decade: int = 16, rel_tol: float = 1e-7) -> WeakNormResult:
    """Weak norm of a radial function known only through (vectorized) evaluation.

    g is tabulated on a log grid over [r_min, r_max]; superlevel sets are
    taken to extend to 0 or infinity when g exceeds the level at the grid
    ends, and every crossing is solved on the callable.  When the samples are
    non-increasing the norm is sup over rho of g(rho) (omega rho^(n+gamma)/(n+gamma))^(1/q),
    refined by zooming on rho; the zoom stops once the objective across the
    current window agrees with the best value to 0.1 * ``rel_tol``, or the
    window is narrower than ``rel_tol``.  Otherwise lam * mu(lam)^(1/q) is
    scanned with interpolated crossings and refined by bounded Brent search
    on log lam with exact ones, to ``rel_tol`` in log lam.  Solved crossings
    join the sample table so later levels start from tight brackets.
    """
    if not q >= 1:
        raise DomainError(f"weak norm needs q >= 1, got {q}")
    e = n + gamma
    if not e > 0:
        raise DomainError(f"weak norm needs n + gamma > 0, got {e}")
    omega = unit_sphere_area(n)
    decades = math.log10(r_max / r_min)
    grid = np.geomspace(r_min, r_max, int(per_decade * decades) + 1)
    extra = [b for b in breakpoints if r_min < b < r_max]
    grid = np.unique(np.concatenate([grid, extra]))
    G = np.abs(np.asarray(g(grid), dtype=float))
    evals = len(grid)
    if not np.isfinite(G).all():
        raise DomainError("function is not finite on the sampling grid")
    if G.max() == 0:
        return WeakNormResult(0.0, math.nan, Exactness.NUMERIC, evals)
    scale = (omega / e) ** (1.0 / q)
    if np.all(np.diff(G) <= 1e-9 * G[:-1]):
        psi = G * scale * grid ** (e / q)
        i = int(np.argmax(psi))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        best, best_r = psi[i], grid[i]
        while hi / lo - 1 > rel_tol:
            rs = np.geomspace(lo, hi, 17)
            vals = np.abs(np.asarray(g(rs), dtype=float)) * scale * rs ** (e / q)
            evals += len(rs)
            j = int(np.argmax(vals))
            if vals[j] > best:
                best, best_r = vals[j], rs[j]
            if best - vals[max(j - 1, 0):j + 2].min() <= 0.1 * rel_tol * best:
                break
            lo, hi = rs[max(j - 1, 0)], rs[min(j + 1, 16)]
        return WeakNormResult(float(best), float(g(np.array([best_r]))[0]), Exactness.NUMERIC, evals)

    counter = {"evals": evals}
    # a log-radius error dx moves the norm by about (n+gamma) dx / q
    root_xtol = 0.1 * rel_tol
    # samples from exact crossings join the table, so later brackets start tight
    tab = {"r": grid, "x": np.log(grid), "g": G}

    def measure(lams: np.ndarray, exact: bool = True) -> np.ndarray:
        """mu(lam) for a batch of levels; crossings solved on g, or interpolated on the table."""
        grid, lg, G = tab["r"], tab["x"], tab["g"]
        above = G[None, :] > lams[:, None]
        cells = np.nonzero(above[:, :-1] != above[:, 1:])
        li, ci = cells
        roots = np.empty(0)
        if len(li):
            fa = G[ci] - lams[li]
            fb = G[ci + 1] - lams[li]
            if exact:
                rec: list = []
                roots, calls = _batched_roots(g, lams[li], lg[ci], lg[ci + 1], fa, fb, record=rec,
                                              xtol=root_xtol)
                counter["evals"] += calls
            else:
                # power-law interpolation: linear in (log r, log g)
                with np.errstate(divide="ignore"):
                    la, lb, ll = np.log(G[ci]), np.log(G[ci + 1]), np.log(lams[li])
                t = np.where(np.isfinite(la) & np.isfinite(lb), (ll - la) / (lb - la), fa / (fa - fb))
                roots = np.exp(lg[ci] + np.clip(t, 0.0, 1.0) * (lg[ci + 1] - lg[ci]))
        mus = np.zeros(len(lams))
        for k in range(len(lams)):
            sel = li == k
            pts = dict(zip(ci[sel].tolist(), roots[sel].tolist()))
            total, start = 0.0, (0.0 if above[k, 0] else None)
            for c in sorted(pts):
                if above[k, c + 1]:
                    start = pts[c]
                else:
                    total += pts[c] ** e - start**e
                    start = None
            if start is not None:
                total += grid[-1] ** e - start**e
            mus[k] = omega * total / e
        if exact and len(li):
            xs = np.concatenate([lg] + [x for x, _ in rec])
            gs = np.concatenate([G] + [v for _, v in rec])
            xs, keep = np.unique(xs, return_index=True)
            tab.update(x=xs, r=np.exp(xs), g=gs[keep])
        return mus

    lams = np.unique(G[G > 0])
    if len(lams) > 96:
        lams = lams[np.linspace(0, len(lams) - 1, 96).astype(int)]
    # coarse scan on interpolated crossings, then bounded Brent on log lambda with exact ones
    phis = lams * measure(lams, exact=False) ** (1.0 / q)
    i = int(np.argmax(phis))
    xlo = math.log(lams[max(i - 2, 0)])
    xhi = math.log(lams[min(i + 2, len(lams) - 1)])
    seen = {"best": -math.inf, "lam": math.nan}

    def neg_phi(x: float) -> float:
        lam = math.exp(x)
        v = lam * float(measure(np.array([lam]))[0]) ** (1.0 / q)
        if v > seen["best"]:
            seen.update(best=v, lam=lam)
        return -v

    xatol = rel_tol * max(1.0, abs(xlo), abs(xhi))
    minimize_scalar(neg_phi, bounds=(xlo, xhi), method="bounded", options={"xatol": xatol})
    best, best_lam = seen["best"], seen["lam"]
    return WeakNormResult(best, best_lam, Exactness.NUMERIC, counter["evals"])
