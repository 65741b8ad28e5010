import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hlplab.errors import DivergenceError, DomainError, UnsupportedShapeError
from hlplab.quad import QuadratureConfig, integrate_1d
from hlplab.radialfn import (PiecewisePowerLog, PowerLogTerm, evaluate, format_piecewise,
                             integrate_weighted, merge_terms, parse_piecewise, power_cutoff,
                             superlevel_set, term_integral)

T = PowerLogTerm


def test_evaluate_examples():
    f = power_cutoff(1.0)
    assert evaluate(f, 0.5) == 0.5
    assert evaluate(f, 2.0) == 0.0
    g = power_cutoff(-0.25, coeff=2.0)
    assert evaluate(g, 0.5) == pytest.approx(2 * 0.5**-0.25, rel=1e-15)
    assert evaluate(g, 0.5) == pytest.approx(2.3784142300054421, rel=1e-15)


def test_evaluate_right_continuous_at_breakpoint():
    f = PiecewisePowerLog((1.0, math.inf), ((T(2.0, 0.0),), (T(5.0, 0.0),)))
    assert evaluate(f, 1.0) == 5.0
    assert evaluate(f, 1.0 - 1e-12) == 2.0


@pytest.mark.parametrize("r", [0.0, -1.0, math.nan])
def test_evaluate_domain(r):
    with pytest.raises(DomainError):
        evaluate(power_cutoff(1.0), r)


def test_vectorised_call_matches_scalar():
    f = parse_piecewise("piece [0,1): 1*r^0.5 + 2*r^-0.3*log(r)^1; piece [1,3): 4*r^-2")
    rs = np.geomspace(1e-3, 5, 57)
    np.testing.assert_array_equal(f(rs), [evaluate(f, r) for r in rs])


def test_integrate_examples():
    assert integrate_weighted(PiecewisePowerLog.single([T(1, 2)], 1.0), 0, 1) == pytest.approx(1 / 3, rel=1e-15)
    inv = PiecewisePowerLog.single([T(1, -1)])
    assert integrate_weighted(inv, 1, math.e) == pytest.approx(1.0, rel=1e-14)
    rlog = PiecewisePowerLog.single([T(1, 1, 1)])
    val = integrate_weighted(rlog, 1, 2)
    oracle = integrate.quad(lambda r: r * math.log(r), 1, 2, epsabs=0, epsrel=1e-13)[0]
    assert val == pytest.approx(2 * math.log(2) - 0.75, rel=1e-13)
    assert val == pytest.approx(oracle, rel=1e-12)
    assert val == pytest.approx(0.636294361, abs=1e-9)


def test_integrate_extra_power_and_log_branch():
    f = PiecewisePowerLog.single([T(3.0, -0.5, 1)], 1.0)
    # int_0^1 3 r^(-0.5) log r * r^(-0.5) dr diverges; with extra 0.7 it converges
    val = integrate_weighted(f, 0, 1, extra_power=0.7)
    oracle = float(mpmath.quad(lambda r: 3 * r ** 0.2 * mpmath.log(r), [0, 1]))
    assert val == pytest.approx(oracle, rel=1e-13)
    g = PiecewisePowerLog.single([T(1.0, -1.0, 1)])
    assert integrate_weighted(g, 1, math.e**2) == pytest.approx(2.0, rel=1e-14)


def test_divergence_names_offending_term():
    f = PiecewisePowerLog.single([T(1.0, 2.0), T(1.0, -1.5)], 1.0)
    with pytest.raises(DivergenceError, match=r"r\^-1.5"):
        integrate_weighted(f, 0, 1)
    tail = PiecewisePowerLog.single([T(1.0, -1.0)])
    with pytest.raises(DivergenceError, match="inf"):
        integrate_weighted(tail, 1, math.inf)
    with pytest.raises(DivergenceError):
        integrate_weighted(PiecewisePowerLog.single([T(1.0, -1.0)], 1.0), 0, 1)


def _random_pw(draw_powers, coeffs, breaks):
    pieces = []
    for ps, cs in zip(draw_powers, coeffs):
        pieces.append(tuple(T(c, p) for p, c in zip(ps, cs)))
    return PiecewisePowerLog(tuple(breaks), tuple(pieces))


@st.composite
def piecewise(draw, max_power=3.0, finite=True):
    k = draw(st.integers(1, 3))
    cuts = sorted(draw(st.lists(st.floats(0.05, 8.0), min_size=k, max_size=k, unique=True)))
    if any(b / a < 1.01 for a, b in zip(cuts, cuts[1:])):
        cuts = [0.3 * 2.0**i for i in range(k)]
    pieces = []
    for _ in range(k):
        m = draw(st.integers(1, 2))
        ps = draw(st.lists(st.floats(-0.9, max_power), min_size=m, max_size=m))
        cs = draw(st.lists(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3), min_size=m, max_size=m))
        pieces.append(tuple(T(c, p) for p, c in zip(ps, cs)))
    return PiecewisePowerLog(tuple(cuts), tuple(pieces))


@given(piecewise(), st.floats(0.01, 2.0), st.floats(2.5, 6.0), st.floats(6.5, 12.0))
@settings(max_examples=60, deadline=None)
def test_additivity(f, a, b, c):
    left = integrate_weighted(f, a, b, 0.3) + integrate_weighted(f, b, c, 0.3)
    whole = integrate_weighted(f, a, c, 0.3)
    scale = integrate_weighted(PiecewisePowerLog(f.breakpoints, tuple(
        tuple(T(abs(t.coeff), t.power) for t in p) for p in f.pieces)), a, c, 0.3)
    assert abs(left - whole) <= 1e-12 * max(abs(whole), scale, 1e-300)


def test_agrees_with_quad_on_100_random_functions():
    rng = np.random.default_rng(20240601)
    cfg = QuadratureConfig(rel_tol=1e-12)
    for _ in range(100):
        k = int(rng.integers(1, 4))
        cuts = np.sort(rng.uniform(0.2, 5.0, k))
        cuts = 0.3 * np.cumprod(np.full(k, 1.8)) if np.any(np.diff(cuts) < 0.05) else cuts
        pieces = []
        for _ in range(k):
            m = int(rng.integers(1, 3))
            pieces.append(tuple(T(float(rng.uniform(0.1, 3)), float(rng.uniform(-0.9, 3))) for _ in range(m)))
        f = PiecewisePowerLog(tuple(float(c) for c in cuts), tuple(pieces))
        exact = integrate_weighted(f, 0, math.inf)
        hint = min(t.power for t in pieces[0])
        res = integrate_1d(f, 0.0, float(cuts[-1]), cfg.with_(singularity_exponent_hint=hint),
                           points=[float(c) for c in cuts[:-1]])
        assert res.converged
        assert res.value == pytest.approx(exact, rel=1e-9)


def test_superlevel_examples():
    f = PiecewisePowerLog.single([T(2, 0), T(-1, 1)], 1.0)
    (iv,) = superlevel_set(f, 1.5)
    assert iv[0] == 0 and iv[1] == pytest.approx(0.5, abs=1e-12)
    g = PiecewisePowerLog((1.0, math.inf), ((), (T(1, -1),)))
    (iv,) = superlevel_set(g, 0.5)
    assert iv[0] == 1.0 and iv[1] == pytest.approx(2.0, abs=1e-12)
    img = PiecewisePowerLog((1.0, math.inf), ((T(2, 0), T(-1, 1)), (T(1, -1),)))
    (iv,) = superlevel_set(img, 0.5)
    assert iv[0] == 0 and iv[1] == pytest.approx(2.0, abs=1e-12)


def test_superlevel_two_term_non_monotone():
    # r^0.5 - r on (0, 4): max 1/4 at r = 1/4, crossings of 0.2 solved numerically
    f = PiecewisePowerLog.single([T(1, 0.5), T(-1, 1)], 4.0)
    (iv,) = superlevel_set(f, 0.2)
    # sqrt(r) - r = 0.2  <=>  u^2 - u + 0.2 = 0 with u = sqrt(r)
    u1, u2 = (1 - math.sqrt(0.2)) / 2, (1 + math.sqrt(0.2)) / 2
    assert iv[0] == pytest.approx(u1**2, abs=1e-12)
    assert iv[1] == pytest.approx(u2**2, abs=1e-12)
    assert superlevel_set(f, 0.3) == []


def test_superlevel_rejects_three_powers():
    f = PiecewisePowerLog.single([T(1, 0.5), T(-1, 1), T(0.1, 2)], 4.0)
    with pytest.raises(UnsupportedShapeError):
        superlevel_set(f, 0.1)
    with pytest.raises(DomainError):
        superlevel_set(power_cutoff(1.0), 0.0)


def _contained(inner, outer):
    return all(any(lo >= olo - 1e-12 and hi <= ohi + 1e-12 for olo, ohi in outer) for lo, hi in inner)


@given(st.floats(-0.8, 2.0), st.floats(-2.0, -0.2), st.floats(0.05, 3.0), st.floats(0.05, 3.0))
@settings(max_examples=80, deadline=None)
def test_superlevel_antitone(a, b, l1, l2):
    lo_l, hi_l = sorted((l1, l2))
    f = PiecewisePowerLog((1.0, math.inf), ((T(1.5, a), T(0.5, 0.0)), (T(2.0, b),)))
    assert _contained(superlevel_set(f, hi_l), superlevel_set(f, lo_l))


def test_merge_terms_drops_roundoff():
    terms = merge_terms([T(1 / 3, 0.5), T(-1 / 3, 0.5), T(1e-20, 1.0)])
    assert terms == (T(1e-20, 1.0),)


def test_text_round_trip():
    f = PiecewisePowerLog((0.5, 2.0), ((T(1.5, -0.25), T(-2.0, 1.0, 1)), (T(3.0, -2.0),)))
    g = parse_piecewise(format_piecewise(f))
    assert g == f
    assert PiecewisePowerLog.from_text(f.to_text()) == f


def test_parse_forms():
    a = parse_piecewise("1*r^1 on (0,1]")
    assert a == power_cutoff(1.0)
    b = parse_piecewise("piece [0,1): 2*r^-0.25")
    assert b == power_cutoff(-0.25, 2.0)
    c = parse_piecewise("1*r^0 on (1,2]; 3*r^-1 on (2,inf)")
    assert evaluate(c, 0.5) == 0 and evaluate(c, 1.5) == 1 and evaluate(c, 4) == 0.75
    with pytest.raises(DomainError):
        parse_piecewise("not a function")


def test_dilate():
    f = PiecewisePowerLog((1.0,), ((T(2.0, 0.5, 1), T(1.0, -0.2)),))
    g = f.dilate(3.0)
    for s in (0.01, 0.1, 0.3):
        assert evaluate(g, s) == pytest.approx(evaluate(f, 3 * s), rel=1e-13)


@pytest.mark.parametrize("lo, hi, e", [(2 / 3, 1.5, -2.0), (0.5, 2.0, -1.5), (0.9, 1 / 0.9, -0.5)])
def test_log_term_integral_on_symmetric_log_window(lo, hi, e):
    # log(lo) = -log(hi): every other series term cancels exactly
    ref = float(mpmath.quad(lambda s: s**e * mpmath.log(s), [lo, 1, hi]))
    assert term_integral(1.0, e, 1, lo, hi, "t") == pytest.approx(ref, rel=1e-13)
