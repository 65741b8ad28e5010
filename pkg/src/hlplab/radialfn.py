"""Exact algebra for radial functions built from c * r^a * (log r)^k pieces.

A :class:`PiecewisePowerLog` is a right-continuous function on (0, inf) given by
consecutive half-open intervals ``[0, b1), [b1, b2), ...``; beyond the last
finite breakpoint it vanishes.  Weighted integrals are done term by term with
closed-form antiderivatives, and superlevel sets are solved exactly for single
terms and by bracketing on monotone stretches otherwise.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DivergenceError, DomainError, UnsupportedShapeError

COLLISION_TOL = 1e-12
_LOG_LIMIT = 700.0


@dataclass(frozen=True)
class PowerLogTerm:
    coeff: float
    power: float
    log_order: int = 0

    def __post_init__(self):
        if not math.isfinite(self.coeff) or not math.isfinite(self.power):
            raise DomainError(f"term needs finite coefficient and power, got {self}")
        if self.log_order not in (0, 1):
            raise DomainError(f"log_order must be 0 or 1, got {self.log_order}")

    def __call__(self, r):
        out = self.coeff * np.power(r, self.power)
        if self.log_order:
            out = out * np.log(r)
        return out

    def to_text(self) -> str:
        s = f"{self.coeff!r}*r^{self.power!r}"
        if self.log_order:
            s += f"*log(r)^{self.log_order}"
        return s


Piece = tuple[PowerLogTerm, ...]


def merge_terms(terms: Sequence[PowerLogTerm]) -> Piece:
    """Combine terms with equal (power, log order) and drop roundoff residues.

    A merged coefficient is dropped only when it is below 8 ulp of the sum of
    the magnitudes that produced it, so genuine small terms survive.
    """
    groups: list[list] = []
    for t in terms:
        if t.coeff == 0:
            continue
        for g in groups:
            if g[2] == t.log_order and abs(g[1] - t.power) < COLLISION_TOL:
                g[0] += t.coeff
                g[3] += abs(t.coeff)
                break
        else:
            groups.append([t.coeff, t.power, t.log_order, abs(t.coeff)])
    out = [PowerLogTerm(c, a, k) for c, a, k, mag in groups
           if abs(c) > 8 * np.finfo(float).eps * mag]
    out.sort(key=lambda t: (t.power, t.log_order))
    return tuple(out)


@dataclass(frozen=True)
class PiecewisePowerLog:
    breakpoints: tuple[float, ...]
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        pieces = tuple(tuple(p) for p in self.pieces)
        if not bps:
            raise DomainError("need at least one breakpoint")
        if len(bps) != len(pieces):
            raise DomainError(f"{len(bps)} breakpoints but {len(pieces)} pieces")
        prev = 0.0
        for b in bps:
            if not b > prev:
                raise DomainError(f"breakpoints must be positive and strictly increasing: {bps}")
            prev = b
        if any(math.isinf(b) for b in bps[:-1]):
            raise DomainError("only the last breakpoint may be infinite")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)

    # construction helpers
    @classmethod
    def single(cls, terms: Sequence[PowerLogTerm], hi: float = math.inf) -> "PiecewisePowerLog":
        return cls((hi,), (tuple(terms),))

    @classmethod
    def zero(cls) -> "PiecewisePowerLog":
        return cls((math.inf,), ((),))

    def spans(self, include_tail: bool = True) -> Iterator[tuple[float, float, Piece]]:
        """Yield (lo, hi, terms); optionally the implicit zero tail after a finite last breakpoint."""
        lo = 0.0
        for b, p in zip(self.breakpoints, self.pieces):
            yield lo, b, p
            lo = b
        if include_tail and math.isfinite(lo):
            yield lo, math.inf, ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.reshape(-1)
        idx = np.searchsorted(np.asarray(self.breakpoints), flat, side="right")
        out = np.zeros_like(flat)
        for j, terms in enumerate(self.pieces):
            if not terms:
                continue
            mask = idx == j
            if not mask.any():
                continue
            rr = flat[mask]
            out[mask] = sum(t(rr) for t in terms)
        out = out.reshape(r.shape)
        return float(out) if out.ndim == 0 else out

    def is_zero(self) -> bool:
        return all(len(merge_terms(p)) == 0 for p in self.pieces)

    def simplified(self) -> "PiecewisePowerLog":
        return PiecewisePowerLog(self.breakpoints, tuple(merge_terms(p) for p in self.pieces))

    def scaled(self, c: float) -> "PiecewisePowerLog":
        return PiecewisePowerLog(
            self.breakpoints,
            tuple(tuple(PowerLogTerm(c * t.coeff, t.power, t.log_order) for t in p)
                  for p in self.pieces))

    def __mul__(self, c: float) -> "PiecewisePowerLog":
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "PiecewisePowerLog":
        return self.scaled(-1.0)

    def dilate(self, c: float) -> "PiecewisePowerLog":
        """Return s -> f(c s)."""
        if not c > 0:
            raise DomainError(f"dilation factor must be positive, got {c}")
        pieces = []
        for p in self.pieces:
            terms = []
            for t in p:
                k = t.coeff * c**t.power
                terms.append(PowerLogTerm(k, t.power, t.log_order))
                if t.log_order:
                    terms.append(PowerLogTerm(k * math.log(c), t.power, 0))
            pieces.append(merge_terms(terms))
        return PiecewisePowerLog(tuple(b / c for b in self.breakpoints), tuple(pieces))

    def leading_power_at_zero(self) -> float | None:
        first = merge_terms(self.pieces[0])
        return min(t.power for t in first) if first else None

    def to_text(self) -> str:
        return format_piecewise(self)

    @classmethod
    def from_text(cls, text: str) -> "PiecewisePowerLog":
        return parse_piecewise(text)


def power_cutoff(a: float, coeff: float = 1.0, cutoff: float = 1.0) -> PiecewisePowerLog:
    """coeff * r^a on (0, cutoff)."""
    return PiecewisePowerLog((cutoff,), ((PowerLogTerm(coeff, a),),))


def evaluate(f: PiecewisePowerLog, r: float) -> float:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    return float(f(float(r)))


# ---------------------------------------------------------------- integration

def term_integral(c: float, e: float, k: int, lo: float, hi: float, label: str) -> float:
    """Integral of c r^e (log r)^k over (lo, hi), lo >= 0, hi <= inf."""
    s = e + 1.0
    collide = abs(s) < COLLISION_TOL
    if lo == 0 and (collide or s < 0):
        raise DivergenceError(f"{label}: integral diverges at r=0")
    if math.isinf(hi) and (collide or s > 0):
        raise DivergenceError(f"{label}: integral diverges at r=inf")
    if k == 0:
        if collide:
            return c * (math.log(hi) - math.log(lo))
        if lo == 0:
            return c * hi**s / s
        if math.isinf(hi):
            return -c * lo**s / s
        L = math.log(lo)
        return c * math.exp(s * L) * math.expm1(s * (math.log(hi) - L)) / s
    # k == 1: substitute t = log r, integrand t e^{s t}
    if collide:
        return c * (math.log(hi) ** 2 - math.log(lo) ** 2) / 2.0

    def anti(r):
        lr = math.log(r)
        return r**s * (lr / s - 1.0 / s**2)

    if lo == 0:
        return c * anti(hi)
    if math.isinf(hi):
        return -c * anti(lo)
    L, U = math.log(lo), math.log(hi)
    M = max(abs(L), abs(U))
    if abs(s) * M < 0.5:
        total, fact = 0.0, 1.0
        for j in range(60):
            if j:
                fact *= s / j
            total += fact * (U ** (j + 2) - L ** (j + 2)) / (j + 2)
            # stop on the size bound: single terms vanish when U = -L
            bound = abs(fact) * M ** (j + 2) / (j + 2)
            if bound <= 1e-18 * abs(total) or bound < 1e-300:
                break
        return c * total
    return c * (anti(hi) - anti(lo))


def integrate_weighted(f: PiecewisePowerLog, lo: float, hi: float, extra_power: float = 0.0) -> float:
    """Exact value of the integral of f(r) r^extra_power over (lo, hi)."""
    if lo < 0 or not hi >= lo:
        raise DomainError(f"need 0 <= lo <= hi, got ({lo}, {hi})")
    total = 0.0
    for a, b, terms in f.spans(include_tail=False):
        l, u = max(a, lo), min(b, hi)
        if not u > l:
            continue
        for t in terms:
            if t.coeff == 0:
                continue
            label = f"term {t.to_text()} with weight r^{extra_power!r} on ({l!r}, {u!r})"
            total += term_integral(t.coeff, t.power + extra_power, t.log_order, l, u, label)
    return total


# ---------------------------------------------------------------- level sets

def _is_zero_power(a: float) -> bool:
    return abs(a) < COLLISION_TOL


def _term_limit(t: PowerLogTerm, at_zero: bool) -> float:
    a, c, k = t.power, t.coeff, t.log_order
    sgn = math.copysign(1.0, c)
    if at_zero:
        if _is_zero_power(a):
            return c if k == 0 else -sgn * math.inf
        if a > 0:
            return 0.0
        return sgn * (-1.0) ** k * math.inf
    if _is_zero_power(a):
        return c if k == 0 else sgn * math.inf
    return 0.0 if a < 0 else sgn * math.inf


def piece_limit(terms: Piece, at_zero: bool) -> float:
    """Limit of a sum of terms as r -> 0+ (at_zero) or r -> inf."""
    if not terms:
        return 0.0
    lims = [_term_limit(t, at_zero) for t in terms]
    if not any(math.isinf(v) for v in lims):
        return float(sum(lims))
    if at_zero:
        dom = min(terms, key=lambda t: (t.power, -t.log_order))
    else:
        dom = max(terms, key=lambda t: (t.power, t.log_order))
    return _term_limit(dom, at_zero)


def _piece_value(terms: Piece, r: float) -> float:
    return float(sum(t(r) for t in terms)) if terms else 0.0


def _value_at(terms: Piece, r: float, from_right: bool) -> float:
    if r == 0:
        return piece_limit(terms, True)
    if math.isinf(r):
        return piece_limit(terms, False)
    return _piece_value(terms, r)


def _scaled_slope(terms: Piece, t: np.ndarray) -> np.ndarray:
    """r * h'(r) at r = e^t, divided by e^{t max(power)} to avoid overflow."""
    amax = max(term.power for term in terms)
    out = np.zeros_like(t)
    for term in terms:
        c, a, k = term.coeff, term.power, term.log_order
        poly = a * t if k else np.full_like(t, a)
        if k:
            poly = poly + 1.0
        out += c * np.exp((a - amax) * t) * poly
    return out


def _log_window(lo: float, hi: float) -> tuple[float, float]:
    tl = math.log(lo) if lo > 0 else -_LOG_LIMIT
    th = math.log(hi) if math.isfinite(hi) else _LOG_LIMIT
    return tl, th


def critical_points(terms: Piece, lo: float, hi: float) -> list[float]:
    """Interior zeros of h' on (lo, hi) for a piece with at most two terms."""
    terms = merge_terms(terms)
    if len(terms) > 2:
        raise UnsupportedShapeError(
            f"piece with {len(terms)} terms exceeds the two-term class: "
            + " + ".join(t.to_text() for t in terms))
    pts: list[float] = []
    if len(terms) == 1:
        t = terms[0]
        if t.log_order and not _is_zero_power(t.power):
            pts.append(math.exp(-1.0 / t.power))
    elif len(terms) == 2 and all(t.log_order == 0 for t in terms):
        (c1, a1), (c2, a2) = [(t.coeff, t.power) for t in terms]
        if c1 * a1 != 0 and c2 * a2 != 0:
            ratio = -c2 * a2 / (c1 * a1)
            if ratio > 0:
                pts.append(ratio ** (1.0 / (a1 - a2)))
    elif len(terms) == 2:
        pts = _slope_zeros(terms, lo, hi)
    return sorted(p for p in pts if lo < p < hi)


def _slope_zeros(terms: Piece, lo: float, hi: float) -> list[float]:
    """Sign changes of h' on a log grid, refined with brentq; any number of terms."""
    tl, th = _log_window(lo, hi)
    grid = np.linspace(tl, th, 4001)
    vals = _scaled_slope(terms, grid)
    f = lambda x: float(_scaled_slope(terms, np.array([x]))[0])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    pts = [math.exp(brentq(f, grid[i], grid[i + 1], xtol=1e-15)) for i in idx]
    return [p for p in pts if lo < p < hi]


def _find_finite_end(phi, t_from: float, direction: float, target_sign: float) -> float:
    """Step outward in log r from t_from until phi has target_sign."""
    step = 1.0
    while True:
        t = min(max(t_from + direction * step, -_LOG_LIMIT), _LOG_LIMIT)
        v = phi(t)
        if math.isnan(v) or np.sign(v) == target_sign or abs(t) >= _LOG_LIMIT:
            return t
        step *= 2.0


def _crossing(terms: Piece, lam: float, u: float, v: float, hu: float, hv: float) -> float:
    """Radius in (u, v) where the monotone piece crosses lam."""
    if len(terms) == 1 and terms[0].log_order == 0 and not _is_zero_power(terms[0].power):
        t = terms[0]
        return (lam / t.coeff) ** (1.0 / t.power)

    def phi(x):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return _piece_value(terms, math.exp(x)) - lam

    su, sv = np.sign(hu - lam), np.sign(hv - lam)
    if u > 0 and math.isfinite(v):
        tu, tv = math.log(u), math.log(v)
    elif u > 0:
        tu = math.log(u)
        tv = _find_finite_end(phi, tu, +1.0, sv)
    elif math.isfinite(v):
        tv = math.log(v)
        tu = _find_finite_end(phi, tv, -1.0, su)
    else:
        tu = _find_finite_end(phi, 0.0, -1.0, su)
        tv = _find_finite_end(phi, 0.0, +1.0, sv)
    fu, fv = phi(tu), phi(tv)
    if math.isnan(fu):
        fu = su
    if math.isnan(fv):
        fv = sv
    if fu == 0:
        return math.exp(tu)
    if fv == 0:
        return math.exp(tv)
    if np.sign(fu) == np.sign(fv):
        # crossing lies beyond the representable window
        return u if np.sign(fu) == sv else v
    # near-collision coefficients make phi noisy at roundoff level; keep the
    # bracketed estimate rather than failing on the iteration cap
    root, _ = brentq(lambda x: phi(x) if not math.isnan(phi(x)) else su,
                     tu, tv, xtol=1e-13, rtol=4 * np.finfo(float).eps, full_output=True, disp=False)
    return math.exp(root)


def _piece_superlevel(terms: Piece, lam: float, lo: float, hi: float) -> list[tuple[float, float]]:
    terms = merge_terms(terms)
    if not terms:
        return []
    cuts = [lo, *critical_points(terms, lo, hi), hi]
    out = []
    for u, v in zip(cuts[:-1], cuts[1:]):
        hu, hv = _value_at(terms, u, True), _value_at(terms, v, False)
        if np.sign(hu - lam) * np.sign(hv - lam) < 0:
            rc = _crossing(terms, lam, u, v, hu, hv)
            rc = min(max(rc, u), v)
            out.append((rc, v) if hv > hu else (u, rc))
        else:
            mid = math.sqrt(u * v) if u > 0 and math.isfinite(v) else (
                v / 2 if u == 0 and math.isfinite(v) else (u * 2 if u > 0 else 1.0))
            if _piece_value(terms, mid) > lam:
                out.append((u, v))
    return [(a, b) for a, b in out if b > a]


def _merge_intervals(ivals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(ivals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def superlevel_set(f: PiecewisePowerLog, lam: float) -> list[tuple[float, float]]:
    """The set {r > 0 : f(r) > lam} as disjoint (lo, hi) radius intervals."""
    if not lam > 0:
        raise DomainError(f"level must be positive, got {lam!r}")
    ivals = []
    for lo, hi, terms in f.spans(include_tail=False):
        ivals += _piece_superlevel(terms, lam, lo, hi)
    return _merge_intervals(ivals)


def candidate_levels(f: PiecewisePowerLog) -> list[float]:
    """Values of |f| at which the shape of its superlevel sets can change.

    These are one-sided limits at breakpoints, at 0 and at infinity, and the
    values at interior critical points.  Infinite limits are omitted.  Pieces
    beyond the two-term class get their critical points from a sampled search.
    """
    vals = []
    for lo, hi, terms in f.spans(include_tail=True):
        terms = merge_terms(terms)
        vals += [_value_at(terms, lo, True), _value_at(terms, hi, False)]
        try:
            crit = critical_points(terms, lo, hi)
        except UnsupportedShapeError:
            crit = _slope_zeros(terms, lo, hi)
        vals += [_piece_value(terms, r) for r in crit]
    return sorted({abs(v) for v in vals if math.isfinite(v) and v != 0})


# ---------------------------------------------------------------- text format

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(
    rf"(?P<c>[+-]?(?:{_NUM})?)\*?"
    rf"(?P<r>r(?:\^(?P<a>[+-]?{_NUM}))?)?\*?"
    rf"(?P<log>log\(r\)(?:\^(?P<k>\d+))?)?")
_BOUND = r"([+-]?(?:{n}|inf|∞))".format(n=_NUM)
_PIECE = re.compile(rf"piece\s*[\[\(]\s*{_BOUND}\s*,\s*{_BOUND}\s*[\]\)]\s*:\s*(.+)")
_ON = re.compile(rf"(.+?)\s+on\s+[\[\(]\s*{_BOUND}\s*,\s*{_BOUND}\s*[\]\)]")


def _parse_bound(s: str) -> float:
    s = s.strip()
    return math.inf if s in ("inf", "+inf", "∞") else float(s)


def _parse_terms(s: str) -> Piece:
    s = s.replace(" ", "")
    if s in ("", "0"):
        return ()
    terms = []
    for chunk in re.split(r"(?<=[^eE\^\(\*+-])(?=[+-])", s):
        chunk = chunk.lstrip("+") if chunk.startswith("+") else chunk
        m = _TERM.fullmatch(chunk)
        if not m or chunk in ("", "-"):
            raise DomainError(f"cannot parse term {chunk!r}")
        c = m.group("c")
        coeff = 1.0 if c in ("", "+") else -1.0 if c == "-" else float(c)
        if m.group("r") is None and m.group("log") is None and c in ("", "+", "-"):
            raise DomainError(f"cannot parse term {chunk!r}")
        power = float(m.group("a")) if m.group("a") else (1.0 if m.group("r") else 0.0)
        k = (int(m.group("k")) if m.group("k") else 1) if m.group("log") else 0
        terms.append(PowerLogTerm(coeff, power, k))
    return merge_terms(terms)


def parse_piecewise(text: str) -> PiecewisePowerLog:
    """Parse ``piece [lo,hi): c*r^a*log(r)^k + ...`` or ``terms on (lo,hi]`` segments.

    Segments are separated by ';' or newlines.  Gaps (including one at the
    origin) become zero pieces.  Brackets are accepted for readability only;
    intervals are always treated as half-open [lo, hi).
    """
    segs = []
    for raw in re.split(r"[;\n]", text):
        raw = raw.strip()
        if not raw:
            continue
        m = _PIECE.fullmatch(raw)
        if m:
            lo, hi, body = _parse_bound(m.group(1)), _parse_bound(m.group(2)), m.group(3)
        else:
            m = _ON.fullmatch(raw)
            if not m:
                raise DomainError(f"cannot parse segment {raw!r}")
            body, lo, hi = m.group(1), _parse_bound(m.group(2)), _parse_bound(m.group(3))
        segs.append((lo, hi, _parse_terms(body)))
    if not segs:
        raise DomainError("empty function description")
    segs.sort(key=lambda s: s[0])
    bps: list[float] = []
    pieces: list[Piece] = []
    cur = 0.0
    for lo, hi, terms in segs:
        if lo < cur:
            raise DomainError(f"overlapping segments near r={lo}")
        if lo > cur:
            bps.append(lo)
            pieces.append(())
        bps.append(hi)
        pieces.append(terms)
        cur = hi
    return PiecewisePowerLog(tuple(bps), tuple(pieces))


def _fmt_bound(x: float) -> str:
    return "inf" if math.isinf(x) else repr(x)


def format_piecewise(f: PiecewisePowerLog) -> str:
    parts = []
    for lo, hi, terms in f.spans(include_tail=False):
        body = " + ".join(t.to_text() for t in terms) if terms else "0"
        parts.append(f"piece [{_fmt_bound(lo)},{_fmt_bound(hi)}): {body}")
    return "; ".join(parts)
