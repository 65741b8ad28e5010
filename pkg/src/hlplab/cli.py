"""Command-line verification harness.

Subcommands: constants, verify {thm21,thm22,thm31}, apply, weak-norm, probe.
Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
usage or domain errors.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import kernel_constant_M, thm21_constant, thm22_constant, thm31_bound
from .errors import HLPLabError, HypothesisWarning
from .extremals import (ExtremalFamily, FamilyId, ProbeConfig, SpaceParams, closed_form_image,
                        hlp_ratio, make_extremal, sharpness_probe)
from .norms import distribution_curve, strong_norm, weak_norm_detail, weak_norm_numeric
from .operators import (apply_hlp, apply_hlp_symbolic, hlp_integrals, kernel_from_name,
                        kernel_operator_batch, kernel_operator_integral)
from .quad import QuadratureConfig
from .radialfn import PiecewisePowerLog, parse_piecewise, power_cutoff
from .spaces import check_thm21_hypotheses, check_thm31_hypotheses, unit_sphere_area

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REPORT_KEYS = ("case", "computed", "reference", "reference_provenance", "rel_error", "tolerance",
               "pass", "runtime_ms", "relation", "converged", "hypothesis_violated")


class UsageError(Exception):
    pass


@dataclass
class VerificationReport:
    """One computed-versus-reference comparison.

    relation ``eq``: rel_error = |computed - reference| / |reference|, pass iff <= tolerance.
    relation ``le``: rel_error = max(0, (computed - reference) / |reference|), pass iff <= tolerance.
    relation ``differs``: rel_error as for eq, pass iff > tolerance.
    """
    case: str
    computed: float
    reference: float
    reference_provenance: str
    tolerance: float
    relation: str = "eq"
    runtime_ms: int | None = None
    converged: bool = True
    hypothesis_violated: bool = False
    rel_error: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        denom = abs(self.reference) if self.reference != 0 else 1.0
        diff = (self.computed - self.reference) / denom
        if self.relation == "le":
            self.rel_error = max(0.0, diff)
        elif self.relation in ("eq", "differs"):
            self.rel_error = abs(diff)
        else:
            raise ValueError(f"unknown relation {self.relation!r}")
        ok = self.rel_error > self.tolerance if self.relation == "differs" else self.rel_error <= self.tolerance
        self.passed = bool(ok and self.converged and math.isfinite(self.computed))

    def to_dict(self) -> dict:
        return {"case": self.case, "computed": self.computed, "reference": self.reference,
                "reference_provenance": self.reference_provenance, "rel_error": self.rel_error,
                "tolerance": self.tolerance, "pass": self.passed, "runtime_ms": self.runtime_ms,
                "relation": self.relation, "converged": self.converged,
                "hypothesis_violated": self.hypothesis_violated}


@dataclass
class RunConfig:
    command: str
    params: dict
    output_format: str = "human"
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    timestamps: bool = True


class _Timer:
    def __init__(self, rc: RunConfig):
        self.rc = rc

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = int(round((time.perf_counter() - self.t0) * 1000)) if self.rc.timestamps else None


def _report(rc: RunConfig, timer: _Timer, **kw) -> VerificationReport:
    rep = VerificationReport(**kw)
    rep.runtime_ms = timer.ms
    return rep


# ---------------------------------------------------------------- verify

def _verify_thm21(rc: RunConfig) -> tuple[list[VerificationReport], dict]:
    P = rc.params
    p, q, beta, gamma, n = P["p"], P["q"], P["beta"], P["gamma"], P["n"]
    hyp = check_thm21_hypotheses(p, q, beta, gamma, n)
    viol = not hyp.overall
    sp = SpaceParams(n, p, beta, q, gamma)
    reps = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        pair = thm21_constant(p, q, beta, gamma, n)
    C = pair.proof_variant.components["C_pnb"]
    omega = unit_sphere_area(n)
    f0 = make_extremal(ExtremalFamily(FamilyId.THM21), sp)
    common = dict(hypothesis_violated=viol)

    with _Timer(rc) as t:
        norm = strong_norm(f0, p, beta, n)
    reps.append(_report(rc, t, case="thm21.f0_strong_norm", computed=norm, reference=C ** (1 / p),
                        reference_provenance="printed f0 norm: C^(1/p)", tolerance=1e-6, **common))

    image = apply_hlp_symbolic(f0, n)
    printed = closed_form_image(ExtremalFamily(FamilyId.THM21), sp)
    for r in (0.5, 2.0):
        with _Timer(rc) as t:
            res = hlp_integrals(f0, n, r, rc.quad)
        reps.append(_report(rc, t, case=f"thm21.image_numeric_vs_symbolic.r={r}", computed=res.value,
                            reference=image(r), reference_provenance="exact term integration of H f0",
                            tolerance=1e-8, converged=res.converged, **common))
        reps.append(_report(rc, t, case=f"thm21.image_vs_printed.r={r}", computed=image(r),
                            reference=printed(r), reference_provenance="printed image C{r^a1+r^a2-1; r^-n}",
                            tolerance=1e-8, **common))

    with _Timer(rc) as t:
        wn = weak_norm_detail(image, q, gamma, n).value
    reps.append(_report(rc, t, case="thm21.weak_norm_vs_printed", computed=wn,
                        reference=(omega / (n + gamma)) ** (1 / q) * C,
                        reference_provenance="printed weak norm (omega/(n+gamma))^(1/q) C",
                        tolerance=1e-6, **common))
    ratio = wn / norm
    prov_p, prov_s = pair.proof_variant.provenance, pair.statement.provenance
    with _Timer(rc) as t:
        pass
    reps.append(_report(rc, t, case="thm21.f0_ratio_vs_proof_variant", computed=ratio,
                        reference=pair.proof_variant.value, reference_provenance=prov_p,
                        tolerance=1e-6, **common))
    reps.append(_report(rc, t, case="thm21.f0_ratio_le_proof_variant", computed=ratio,
                        reference=pair.proof_variant.value, reference_provenance=prov_p,
                        tolerance=1e-6, relation="le", **common))
    reps.append(_report(rc, t, case="thm21.f0_ratio_le_statement", computed=ratio,
                        reference=pair.statement.value, reference_provenance=prov_s,
                        tolerance=1e-6, relation="le", **common))
    reps.append(_report(rc, t, case="thm21.f0_ratio_differs_from_statement", computed=ratio,
                        reference=pair.statement.value, reference_provenance=prov_s,
                        tolerance=0.2, relation="differs", **common))
    with _Timer(rc) as t:
        hd = make_extremal(ExtremalFamily(FamilyId.HOLDER_DUAL), sp)
        hd_ratio = hlp_ratio(hd, sp)
    reps.append(_report(rc, t, case="thm21.holder_dual_ratio_vs_proof_variant", computed=hd_ratio,
                        reference=pair.proof_variant.value, reference_provenance=prov_p,
                        tolerance=1e-6, **common))
    reps.append(_report(rc, t, case="thm21.proof_variant_differs_from_statement",
                        computed=pair.proof_variant.value, reference=pair.statement.value,
                        reference_provenance=prov_s, tolerance=0.2, relation="differs", **common))
    extra = {"hypotheses": hyp.to_dict(), "discrepancy_flag": pair.flagged,
             "rel_discrepancy": pair.rel_discrepancy,
             "constants": {"statement": pair.statement.to_dict(), "proof_variant": pair.proof_variant.to_dict()},
             "f0": f0.to_text(), "image": image.to_text()}
    return reps, extra


def _verify_thm22(rc: RunConfig) -> tuple[list[VerificationReport], dict]:
    P = rc.params
    n, gamma = P["n"], P["gamma"]
    viol = not n + gamma > 0
    sp = SpaceParams.thm22(n, gamma)
    fam = ExtremalFamily(FamilyId.THM22)
    f0 = make_extremal(fam, sp)
    const = thm22_constant(gamma, n)
    omega = unit_sphere_area(n)
    common = dict(hypothesis_violated=viol)
    reps = []
    with _Timer(rc) as t:
        norm = strong_norm(f0, 1.0, 0.0, n)
    reps.append(_report(rc, t, case="thm22.f0_l1_norm", computed=norm, reference=omega / (2 * n),
                        reference_provenance="C_n = omega/(2n)", tolerance=1e-12, **common))
    image = apply_hlp_symbolic(f0, n)
    printed = closed_form_image(fam, sp)
    for r in (0.5, 2.0):
        with _Timer(rc) as t:
            res = hlp_integrals(f0, n, r, rc.quad)
        reps.append(_report(rc, t, case=f"thm22.image_numeric_vs_printed.r={r}", computed=res.value,
                            reference=printed(r), reference_provenance="printed image C_n{2-r^n; r^-n}",
                            tolerance=1e-8, converged=res.converged, **common))
    with _Timer(rc) as t:
        wn = weak_norm_detail(image, sp.q, gamma, n).value
    reps.append(_report(rc, t, case="thm22.ratio_vs_constant", computed=wn / norm, reference=const.value,
                        reference_provenance=const.provenance, tolerance=1e-8, **common))
    return reps, {"constant": const.to_dict(), "image": image.to_text()}


def _tracked_image(K, fs, cfg):
    """Vectorized kernel image that remembers whether every quadrature converged."""
    state = {"converged": True}

    def image(r):
        res = kernel_operator_batch(K, fs, np.atleast_1d(r), cfg)
        state["converged"] &= bool(res.converged)
        return res.values

    return image, state


def _powercutoff_inputs(ps, betas, n, m):
    """A deterministic grid of admissible cutoff exponents per input."""
    out = []
    for offs in (0.15, 0.6):
        out.append([-(b + n) / p + offs for p, b in zip(ps, betas)])
    return out


def _verify_thm31(rc: RunConfig) -> tuple[list[VerificationReport], dict]:
    P = rc.params
    m, n, q, gamma = P["m"], P["n"], P["q"], P["gamma"]
    ps, betas = P["ps"], P["betas"]
    if len(ps) != m or len(betas) != m:
        raise UsageError(f"need {m} values for --ps and --betas")
    K = kernel_from_name(P["kernel"], m, n)
    hyp = check_thm31_hypotheses(ps, betas, q, gamma, n, m)
    common = dict(hypothesis_violated=not hyp.overall)
    cfg = rc.quad if m == 1 else rc.quad.with_(rel_tol=max(rc.quad.rel_tol, 1e-6))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        bound = thm31_bound(K, betas, ps, q, gamma, n, m, cfg)
    reps = []
    if m == 1 and K.name == "hlpmax":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            pv = thm21_constant(ps[0], q, betas[0], gamma, n).proof_variant
        reps.append(VerificationReport("thm31.bound_vs_thm21_proof_variant", bound.value, pv.value,
                                       pv.provenance, 1e-8, **common))
    for exps in _powercutoff_inputs(ps, betas, n, m):
        fs = [power_cutoff(a) for a in exps]
        with _Timer(rc) as t:
            img, state = _tracked_image(K, fs, cfg)
            per_decade = 16 if m == 1 else 6
            wn = weak_norm_numeric(img, q, gamma, n, breakpoints=(1.0,), r_min=1e-4, r_max=1e4,
                                   per_decade=per_decade, rel_tol=max(cfg.rel_tol, 1e-7)).value
            prod = float(np.prod([strong_norm(f, p, b, n) for f, p, b in zip(fs, ps, betas)]))
        label = ",".join(f"{a:.4g}" for a in exps)
        reps.append(_report(rc, t, case=f"thm31.{K.name}.m={m}.cutoff[{label}]", computed=wn / prod,
                            reference=bound.value, reference_provenance=bound.provenance,
                            tolerance=1e-5, relation="le", converged=state["converged"], **common))
    return reps, {"hypotheses": hyp.to_dict(), "bound": bound.to_dict()}


# ---------------------------------------------------------------- other commands

def _constants(rc: RunConfig) -> dict:
    P = rc.params
    p, q, beta, gamma, n = P["p"], P["q"], P["beta"], P["gamma"], P["n"]
    rows = []
    hyp21 = check_thm21_hypotheses(p, q, beta, gamma, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        try:
            pair = thm21_constant(p, q, beta, gamma, n)
            for c in pair:
                rows.append({**c.to_dict(), "hypothesis_violated": not hyp21.overall})
            rows.append({"formula_id": "thm21_discrepancy", "value": pair.rel_discrepancy,
                         "flagged": pair.flagged, "hypothesis_violated": not hyp21.overall})
        except HLPLabError as exc:
            rows.append({"formula_id": "thm21", "error": str(exc)})
        try:
            rows.append({**thm22_constant(gamma, n).to_dict(), "hypothesis_violated": False})
        except HLPLabError as exc:
            rows.append({"formula_id": "thm22", "error": str(exc)})
        hyp31 = check_thm31_hypotheses([p], [beta], q, gamma, n, 1)
        for name in ("hardy", "hlpmax", "hilbert"):
            K = kernel_from_name(name, 1, n)
            try:
                rows.append({**kernel_constant_M(K, [beta], [p], n, 1, rc.quad).to_dict(),
                             "hypothesis_violated": False})
                rows.append({**thm31_bound(K, [beta], [p], q, gamma, n, 1, rc.quad).to_dict(),
                             "kernel": name, "hypothesis_violated": not hyp31.overall})
            except HLPLabError as exc:
                rows.append({"formula_id": f"M[{name}]", "error": str(exc)})
    return {"rows": rows, "hypotheses": hyp21.to_dict()}


def _parse_f(text: str) -> PiecewisePowerLog:
    try:
        return parse_piecewise(text)
    except HLPLabError as exc:
        raise UsageError(str(exc)) from exc


def _apply(rc: RunConfig) -> dict:
    P = rc.params
    fs = [_parse_f(t) for t in P["f"]]
    n = P["n"]
    if P["operator"] == "hlp":
        if len(fs) != 1:
            raise UsageError("hlp takes exactly one --f")
        out = {"operator": "hlp", "f": fs[0].to_text(), "n": n, "image": apply_hlp_symbolic(fs[0], n).to_text()}
        if P["r"] is not None:
            out["r"] = P["r"]
            out["value"] = apply_hlp(fs[0], n, P["r"], method=P["method"], cfg=rc.quad)
        return out
    K = kernel_from_name(P["operator"], len(fs), n)
    if P["r"] is None:
        raise UsageError("kernel operators need --r")
    res = kernel_operator_integral(K, fs, P["r"], rc.quad)
    return {"operator": K.name, "m": len(fs), "n": n, "r": P["r"], "value": res.value,
            "error_estimate": res.error_estimate, "converged": res.converged}


def _weak_norm(rc: RunConfig) -> tuple[dict, str]:
    P = rc.params
    g = _parse_f(P["g"])
    if P["hlp_image"]:
        g = apply_hlp_symbolic(g, P["n"])
    res = weak_norm_detail(g, P["q"], P["gamma"], P["n"])
    curve = distribution_curve(g, P["gamma"], P["n"])
    return ({"g": g.to_text(), "q": P["q"], "gamma": P["gamma"], "n": P["n"], "value": res.value,
             "argmax_lambda": res.argmax_lambda, "exactness": res.exactness.value,
             "curve": [list(s) for s in curve.samples]}, curve.to_csv())


def _parse_range(spec: str) -> tuple[str, tuple[float, float]]:
    try:
        name, rng = spec.split("=", 1)
        lo, hi = rng.split(":")
        return name.strip(), (float(lo), float(hi))
    except ValueError as exc:
        raise UsageError(f"bad range {spec!r}; expected name=lo:hi") from exc


def _probe(rc: RunConfig) -> dict:
    P = rc.params
    fid = FamilyId(P["family"])
    sp = SpaceParams(P["n"], P["p"], P["beta"], P["q"], P["gamma"])
    if fid is FamilyId.THM22 or (fid is FamilyId.POWER_CUTOFF and P["p"] == 1):
        sp = SpaceParams.thm22(P["n"], P["gamma"]) if P["p"] == 1 else sp
    ranges = dict(_parse_range(s) for s in P["range"])
    fixed = {}
    for s in P["param"]:
        k, v = s.split("=", 1)
        fixed[k.strip()] = float(v)
    bound = P["bound"]
    if bound is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            if sp.p == 1:
                bound = thm22_constant(sp.gamma, sp.n).value
            else:
                bound = thm21_constant(sp.p, sp.q, sp.beta, sp.gamma, sp.n).proof_variant.value
    res = sharpness_probe(ExtremalFamily(fid, fixed), sp, bound, ProbeConfig(ranges))
    return res.to_dict()


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _emit_reports(rc: RunConfig, reps: list[VerificationReport], extra: dict, out) -> None:
    rows = [r.to_dict() for r in sorted(reps, key=lambda r: r.case)]
    if rc.output_format == "json":
        doc = {"command": rc.command, "params": rc.params, "reports": rows, **extra,
               "all_pass": all(r["pass"] for r in rows)}
        if rc.timestamps:
            doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        out.write(json.dumps(doc, indent=2, sort_keys=False, default=_jsonable) + "\n")
    elif rc.output_format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_KEYS)
        for r in rows:
            w.writerow([r[k] for k in REPORT_KEYS])
    else:
        for r in rows:
            tag = "PASS" if r["pass"] else "FAIL"
            hv = "  [hypothesis-violated]" if r["hypothesis_violated"] else ""
            out.write(f"{tag}  {r['case']}: computed {_fmt(r['computed'])}  reference "
                      f"{_fmt(r['reference'])}  ({r['relation']}, rel_error {r['rel_error']:.3g}, "
                      f"tol {r['tolerance']:g}){hv}\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serialisable: {type(o)}")


def _emit_doc(rc: RunConfig, doc: dict, out, csv_text: str | None = None) -> None:
    if rc.output_format == "csv" and csv_text is not None:
        out.write(csv_text)
        return
    if rc.output_format in ("json", "csv"):
        if rc.timestamps:
            doc = {**doc, "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        out.write(json.dumps(doc, indent=2, default=_jsonable) + "\n")
        return
    for k, v in doc.items():
        if k == "rows":
            for row in v:
                label = row.get("formula_id", "")
                if "kernel" in row:
                    label += f"[{row['kernel']}]"
                val = row.get("value", row.get("error"))
                flag = "  [flagged]" if row.get("flagged") else ""
                hv = "  [hypothesis-violated]" if row.get("hypothesis_violated") else ""
                out.write(f"{label:<24} {_fmt(val)}{flag}{hv}\n")
        elif k == "curve":
            continue
        else:
            out.write(f"{k}: {_fmt(v) if not isinstance(v, (dict, list)) else json.dumps(v, default=_jsonable)}\n")


# ---------------------------------------------------------------- parser

def _floats(s: str) -> list[float]:
    try:
        return [float(x) for x in s.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {s!r}") from exc


def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    fmt.add_argument("--human", dest="format", action="store_const", const="human")
    c.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
    c.add_argument("--mc-seed", type=int, help="Monte Carlo seed")
    c.add_argument("--no-timestamp", action="store_true", default=None,
                   help="omit timestamps and runtimes for byte-stable output")
    c.add_argument("--config", help="file of 'key = value' lines; command-line flags win")
    return c


def _space_args(sp: argparse.ArgumentParser, **defaults):
    d = {"p": 3.0, "q": 2.0, "beta": 0.5, "gamma": 0.0, "n": 1, **defaults}
    sp.add_argument("--p", type=float, default=d["p"])
    sp.add_argument("--q", type=float, default=d["q"])
    sp.add_argument("--beta", type=float, default=d["beta"])
    sp.add_argument("--gamma", type=float, default=d["gamma"])
    sp.add_argument("--n", type=int, default=d["n"])


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hlplab", description=__doc__.splitlines()[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", parents=[common], help="closed-form constants with components")
    _space_args(c)

    v = sub.add_parser("verify", parents=[common], help="run a verification pipeline")
    v.add_argument("theorem", choices=["thm21", "thm22", "thm31"])
    _space_args(v)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--kernel", default="hlpmax")
    v.add_argument("--ps", type=_floats, default=None, help="exponents p_i (thm31)")
    v.add_argument("--betas", type=_floats, default=None, help="weights beta_i (thm31)")

    a = sub.add_parser("apply", parents=[common], help="apply an operator to radial functions")
    a.add_argument("operator", choices=["hlp", "hardy", "hlpmax", "hilbert"])
    a.add_argument("--f", action="append", required=True, help="radial function, repeat for m > 1")
    a.add_argument("--n", type=int, default=1)
    a.add_argument("--r", type=float, default=None)
    a.add_argument("--method", choices=["exact", "quad"], default="exact")

    w = sub.add_parser("weak-norm", parents=[common], help="weak norm and distribution curve")
    w.add_argument("--g", required=True, help="radial function")
    w.add_argument("--hlp-image", action="store_true", help="take the weak norm of H g instead of g")
    w.add_argument("--q", type=float, default=1.0)
    w.add_argument("--gamma", type=float, default=0.0)
    w.add_argument("--n", type=int, default=1)

    pr = sub.add_parser("probe", parents=[common], help="sharpness probe over an extremal family")
    pr.add_argument("--family", choices=[f.value for f in FamilyId], default="power_cutoff")
    pr.add_argument("--range", action="append", default=[], help="free parameter, name=lo:hi")
    pr.add_argument("--param", action="append", default=[], help="fixed parameter, name=value")
    pr.add_argument("--bound", type=float, default=None)
    _space_args(pr, p=1.0, q=1.0, beta=0.0)
    return parser


def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                k, v = line.split("=", 1)
                out[k.strip().replace("-", "_")] = v.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return out


_FLAG_KEYS = {"format", "rel_tol", "mc_seed", "no_timestamp", "config"}


def _merge_config(ns: argparse.Namespace, parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Fill values from the config file wherever the command line did not set them."""
    if not ns.config:
        return ns
    cfg = _read_config(ns.config)
    explicit = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    sub_actions = {}
    for action in parser._subparsers._group_actions[0].choices[ns.command]._actions:
        sub_actions[action.dest] = action
    for k, raw in cfg.items():
        if k in explicit or (k == "format" and explicit & {"json", "csv", "human"}):
            continue
        if k == "format":
            if raw not in ("json", "csv", "human"):
                raise UsageError(f"config: bad format {raw!r}")
            ns.format = raw
        elif k == "no_timestamp":
            ns.no_timestamp = raw.lower() in ("1", "true", "yes")
        elif k in ("rel_tol",):
            ns.rel_tol = float(raw)
        elif k == "mc_seed":
            ns.mc_seed = int(raw)
        elif k in sub_actions and k not in ("help", "command"):
            act = sub_actions[k]
            try:
                val = act.type(raw) if act.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config: bad value for {k}: {raw!r}") from exc
            if isinstance(act, argparse._AppendAction):
                val = [val]
            setattr(ns, k, val)
        else:
            raise UsageError(f"config: unknown key {k!r}")
    return ns


def _run_config(ns: argparse.Namespace) -> RunConfig:
    quad = QuadratureConfig()
    if ns.rel_tol is not None:
        quad = quad.with_(rel_tol=ns.rel_tol)
    if ns.mc_seed is not None:
        quad = quad.with_(mc_seed=ns.mc_seed)
    params = {k: v for k, v in vars(ns).items() if k not in _FLAG_KEYS and k != "command"}
    if ns.command == "verify" and ns.theorem == "thm31":
        m = params["m"]
        params["ps"] = params["ps"] or [params["p"]] * m
        params["betas"] = params["betas"] or [params["beta"]] * m
    elif ns.command == "verify":
        for k in ("m", "kernel", "ps", "betas"):
            params.pop(k, None)
    return RunConfig(ns.command, params, ns.format or "human", quad, not ns.no_timestamp)


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        ns = _merge_config(ns, parser, argv)
        rc = _run_config(ns)
        if ns.command == "verify":
            runner = {"thm21": _verify_thm21, "thm22": _verify_thm22, "thm31": _verify_thm31}[ns.theorem]
            rc.command = f"verify {ns.theorem}"
            reps, extra = runner(rc)
            _emit_reports(rc, reps, extra, out)
            return EXIT_OK if all(r.passed for r in reps) else EXIT_FAIL
        if ns.command == "constants":
            _emit_doc(rc, _constants(rc), out)
        elif ns.command == "apply":
            _emit_doc(rc, _apply(rc), out)
        elif ns.command == "weak-norm":
            doc, csv_text = _weak_norm(rc)
            _emit_doc(rc, doc, out, csv_text)
        elif ns.command == "probe":
            _emit_doc(rc, _probe(rc), out)
        return EXIT_OK
    except (UsageError, HLPLabError, ValueError) as exc:
        print(f"hlplab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
