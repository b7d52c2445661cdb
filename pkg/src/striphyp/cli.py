"""Command-line interface.

Every command writes a JSON-lines report: a header record echoing the command
and parsed inputs, one record per computed value, and a closing summary.  With
``--format csv`` the per-point records are written as CSV plot data instead.
"""
from __future__ import annotations

import os

# Thread caps must be in place before numpy loads its BLAS.
_THREADS = os.environ.get("STRIPHYP_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import __version__
from .almostanalytic import ExtensionError, build_extension, check_extension_bounds
from .config import grid_config, load_settings, quad_config
from .quad import QuadratureError
from .reps import RepError, boundary_pair, cauchy_represent
from .sequences import (SequenceError, associated_function, associated_via_counting,
                        check_seq_condition, nontriviality_classify)
from .spaces import SpaceError, SpaceParams, strip_norm
from .specs import (SpecError, parse_complex, parse_float, parse_functional, parse_sequence,
                    parse_test_function, parse_weight, read_series)
from .stripharmonic import StripError, build_minorant, cr_residual
from .transforms import (LaplaceBoundSpec, TransformError, fourier_strip, laplace_atoms,
                         laplace_transform, paley_wiener_check)
from .weights import WeightError, check_condition

SCHEMA = "striphyp.report/1"

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3

PRECONDITION_ERRORS = (WeightError, SequenceError, StripError, SpaceError, RepError,
                       TransformError, ExtensionError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n\n{self.format_usage()}")


def _plain(v: Any) -> Any:
    """Make a value JSON-safe: complex -> [re, im], non-finite floats -> strings."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (complex, np.complexfloating)):
        return [_plain(float(v.real)), _plain(float(v.imag))]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else ("nan" if math.isnan(f) else ("inf" if f > 0 else "-inf"))
    if hasattr(v, "to_dict"):
        return _plain(v.to_dict())
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return v


@dataclass
class Report:
    command: str
    argv: list[str]
    inputs: dict[str, Any]
    provenance: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def add(self, **rec):
        self.records.append(rec)

    def header(self) -> dict[str, Any]:
        return {"schema": SCHEMA, "record": "header", "version": __version__,
                "command": self.command, "argv": self.argv, "inputs": self.inputs,
                "provenance": self.provenance}

    def jsonl(self) -> str:
        lines = [self.header()]
        lines += [{"schema": SCHEMA, "record": "result", **r} for r in self.records]
        lines.append({"schema": SCHEMA, "record": "summary", **self.summary})
        return "".join(json.dumps(_plain(x), sort_keys=False) + "\n" for x in lines)

    def csv(self) -> str:
        buf = io.StringIO()
        has_bounds = any("bound_lo" in r for r in self.records)
        has_imag = any(isinstance(r.get("value"), complex) and r["value"].imag != 0
                       for r in self.records)
        cols = ["x", "value"] + (["value_imag"] if has_imag else []) + \
            (["bound_lo", "bound_hi"] if has_bounds else [])
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for r in self.records:
            if "x" not in r or "value" not in r:
                continue
            v = r["value"]
            row = [r["x"], v.real if isinstance(v, complex) else v]
            if has_imag:
                row.append(v.imag if isinstance(v, complex) else 0.0)
            if has_bounds:
                row += [r.get("bound_lo", ""), r.get("bound_hi", "")]
            wr.writerow([_plain(c) for c in row])
        return buf.getvalue()


# ----------------------------------------------------------------- helpers

def _floats(text: str) -> list[float]:
    return [parse_float(t) for t in text.split(",") if t.strip()]


def _complexes(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def _verdict(v) -> dict[str, Any]:
    return v.to_dict()


@dataclass
class Context:
    settings: dict[str, str]
    rng: np.random.Generator
    seed: int

    @property
    def qcfg(self):
        return quad_config(self.settings)

    @property
    def gcfg(self):
        return grid_config(self.settings)

    def provenance(self, **extra) -> dict[str, Any]:
        q = self.qcfg
        g = self.gcfg
        out = {"quad": {"abs_tol": q.abs_tol, "rel_tol": q.rel_tol, "order": q.order,
                        "initial_radius": q.initial_radius},
               "grid": {"t_min": g.t_min, "t_max": g.t_max, "n": g.n},
               "check_tol": float(self.settings.get("check.tol", 1e-6)),
               "seed": self.seed, "threads": _THREADS}
        out.update(extra)
        return out


# ----------------------------------------------------------------- commands

def cmd_check_weight(a, ctx: Context) -> Report:
    w = parse_weight(a.spec)
    v = check_condition(w, a.cond, ctx.gcfg)
    rep = Report("check-weight", [], {"weight": w.label, "cond": a.cond}, ctx.provenance())
    rep.add(weight=w.label, cond=a.cond, verdict=_verdict(v))
    rep.summary = {"status": v.status.value}
    return rep


def cmd_check_seq(a, ctx: Context) -> Report:
    M = parse_sequence(a.spec)
    v = check_seq_condition(M, a.cond)
    rep = Report("check-seq", [], {"sequence": M.spec, "cond": a.cond},
                 ctx.provenance(prefix_terms=M.N))
    rep.add(sequence=M.spec, cond=a.cond, verdict=_verdict(v))
    rep.summary = {"status": v.status.value}
    return rep


def cmd_classify(a, ctx: Context) -> Report:
    M = parse_sequence(a.spec)
    c = nontriviality_classify(M, p_max=a.p_max)
    rep = Report("classify", [], {"sequence": M.spec, "p_max": a.p_max}, ctx.provenance())
    rep.add(sequence=M.spec, classification=c.to_dict())
    rep.summary = {"status": c.label, "grade": c.grade}
    return rep


def cmd_assoc(a, ctx: Context) -> Report:
    M = parse_sequence(a.spec)
    ts = np.asarray(_floats(a.t))
    vals = associated_function(M, ts)
    alt = associated_via_counting(M, ts)
    rep = Report("assoc", [], {"sequence": M.spec, "t": ts}, ctx.provenance())
    for t, v, c in zip(ts, np.atleast_1d(vals), np.atleast_1d(alt)):
        rep.add(x=float(t), value=float(v), via_counting=float(c), difference=abs(float(v - c)))
    diffs = np.abs(np.atleast_1d(vals) - np.atleast_1d(alt))
    rep.summary = {"points": int(ts.size), "max_difference": float(diffs.max()) if ts.size else 0.0}
    return rep


def _verify_minorant(F, ctx: Context) -> dict[str, Any]:
    xs = np.linspace(-50.0, 50.0, 50)
    ys = F.h * (np.linspace(-1.0, 1.0, 22)[1:-1])
    jitter = ctx.rng.uniform(-0.05, 0.05, size=(xs.size, ys.size))
    tol = float(ctx.settings.get("check.tol", 1e-6))
    bad, worst = [], -math.inf
    for i, x in enumerate(xs):
        lo, hi = float(F.log_lower(x)), float(F.log_upper(x))
        for j, y in enumerate(ys):
            y = float(np.clip(y + jitter[i, j] * F.h / 20, -F.h * 0.999, F.h * 0.999))
            u = F.U(float(x), y)
            slack = max(lo - u, u - hi)
            worst = max(worst, slack)
            if slack > tol * (1 + abs(u)):
                bad.append([float(x), y])
    pts = [complex(ctx.rng.uniform(-10, 10), ctx.rng.uniform(-0.9, 0.9) * F.h) for _ in range(100)]
    cr = max(cr_residual(F, z) for z in pts)
    return {"sandwich_grid": [int(xs.size), int(ys.size)], "sandwich_violations": len(bad),
            "first_violations": bad[:5], "max_log_slack": worst,
            "cr_points": len(pts), "cr_residual_max": cr, "cr_tolerance": 1e-4,
            "ok": not bad and cr < 1e-4}


def cmd_minorant(a, ctx: Context) -> Report:
    w = parse_weight(a.spec)
    F = build_minorant(w, a.lam, a.h, a.mode, ctx.qcfg)
    rep = Report("minorant", [], {"weight": w.label, "lambda": a.lam, "h": a.h, "mode": a.mode},
                 ctx.provenance())
    for x in _floats(a.x):
        U = F.U(x, a.y)
        rep.add(x=x, y=a.y, value=U, bound_lo=float(F.log_lower(x)), bound_hi=float(F.log_upper(x)),
                V=F.V(x, a.y), quantity="log|F|")
    rep.summary = {"log_bound_constant": F.log_bound_constant, "bound_constant": F.bound_constant}
    if a.verify:
        rep.summary["verify"] = _verify_minorant(F, ctx)
    return rep


def cmd_norm(a, ctx: Context) -> Report:
    phi = parse_test_function(a.testfn, a.recip_h or a.h, ctx.qcfg)
    w = parse_weight(a.weight)
    p = SpaceParams(w, a.h, a.lam, a.flavor, a.mode)
    g = ctx.gcfg
    if "recip" in phi.spec:
        # each value of 1/F costs a Poisson integral, so the sweep is coarser
        g = replace(g, t_max=min(g.t_max, 64.0), n=min(g.n, 64), max_doublings=min(g.max_doublings, 3))
    r = strip_norm(phi, p, g)
    rep = Report("norm", [], {"testfn": phi.spec, "weight": w.label, "h": a.h, "lambda": a.lam,
                              "flavor": a.flavor, "mode": a.mode},
                 ctx.provenance(y_cap=a.h * (1 - 1e-6), x_range=r.x_range, grid_n=g.n))
    rep.add(norm=r.to_dict())
    rep.summary = {"value": r.value, "divergent": r.divergent, "boundary_limited": r.boundary_limited}
    return rep


def cmd_represent(a, ctx: Context) -> Report:
    f = parse_functional(a.functional)
    P = None
    if a.mult:
        P = build_minorant(parse_weight(a.mult), a.lam, a.mult_h or a.R, a.mode, ctx.qcfg)
    F = cauchy_represent(f, P, a.b, a.R)
    zs = _complexes(a.z) if a.z else [complex(0.0, 0.5 * (a.b + a.R)), complex(1.0, 0.5 * (a.b + a.R)),
                                      complex(0.0, -0.5 * (a.b + a.R))]
    rep = Report("represent", [], {"functional": f.spec, "b": a.b, "R": a.R,
                                   "multiplier": None if P is None else P.weight.label},
                 ctx.provenance())
    for z in zs:
        rep.add(z=z, x=z.real, value=complex(F(z)), log_bound=float(F.log_bound(z.real, z.imag)))
    rep.summary = {"points": len(zs)}
    return rep


def cmd_pair(a, ctx: Context) -> Report:
    f = parse_functional(a.functional)
    phi = parse_test_function(a.testfn, a.recip_h or 1.0, ctx.qcfg)
    F = cauchy_represent(f, None, a.b, a.R)
    res = boundary_pair(F, phi, a.k, ctx.qcfg)
    direct = f.pair(phi, ctx.qcfg)
    rep = Report("pair", [], {"functional": f.spec, "testfn": phi.spec, "k": a.k, "b": a.b, "R": a.R},
                 ctx.provenance(truncation_radius=res.radius))
    rep.add(value=res.value, error=res.error, radius=res.radius, direct=direct,
            difference=abs(res.value - direct))
    rep.summary = {"value": res.value, "error": res.error}
    return rep


def cmd_fourier(a, ctx: Context) -> Report:
    phi = parse_test_function(a.testfn, a.recip_h or 1.0, ctx.qcfg)
    k = a.k if a.k is not None else min(0.5, 0.5 * phi.h_max)
    rep = Report("fourier", [], {"testfn": phi.spec, "k": k}, ctx.provenance())
    for xi in _floats(a.xi):
        rep.add(x=xi, value=fourier_strip(phi, k, xi, ctx.qcfg))
    rep.summary = {"points": len(rep.records)}
    return rep


def cmd_laplace(a, ctx: Context) -> Report:
    f = parse_functional(a.functional)
    F = cauchy_represent(f, None, a.b, a.R)
    rep = Report("laplace", [], {"functional": f.spec, "b": a.b}, ctx.provenance())
    worst = 0.0
    for z in _complexes(a.zeta):
        v = laplace_transform(F, z, cfg=ctx.qcfg)
        ref = laplace_atoms(f, z)
        worst = max(worst, abs(v - ref))
        rep.add(zeta=z, x=z.real, value=v, closed_form=ref, difference=abs(v - ref))
    rep.summary = {"points": len(rep.records), "max_difference": worst}
    return rep


def cmd_pwcheck(a, ctx: Context) -> Report:
    G = read_series(a.series_file)
    w = parse_weight(a.weight) if a.weight else None
    spec = LaplaceBoundSpec(a.a, a.h, a.lam, w, a.region, a.flavor)
    eps = float(ctx.settings.get("pw.epsilon", 0.1))
    eta_max = float(ctx.settings.get("pw.eta_max", 1e3))
    xi_max = float(ctx.settings.get("pw.xi_max", 50.0))
    v = paley_wiener_check(G, spec, eps, eta_max, xi_max)
    rep = Report("pwcheck", [], {"series": [list(t) for t in G.terms], "a": a.a, "h": a.h,
                                 "lambda": a.lam, "weight": None if w is None else w.label,
                                 "region": a.region, "flavor": a.flavor},
                 ctx.provenance(epsilon=eps, eta_max=eta_max, xi_max=xi_max))
    rep.add(verdict=_verdict(v))
    rep.summary = {"status": v.status.value}
    return rep


def cmd_extend(a, ctx: Context) -> Report:
    phi = parse_test_function(a.testfn, a.recip_h or 1.0, ctx.qcfg)
    w = parse_weight(a.weight)
    E = build_extension(phi, w, a.k, cfg=ctx.qcfg)
    rep = Report("extend", [], {"testfn": phi.spec, "weight": w.label, "k": a.k}, ctx.provenance())
    worst = 0.0
    for xi in _floats(a.xi):
        v = E(complex(xi, 0.0))
        ref = fourier_strip(phi, a.k, xi, ctx.qcfg)
        worst = max(worst, abs(v - ref))
        rep.add(x=xi, value=v, fourier=ref, difference=abs(v - ref))
    rep.summary = {"real_axis_max_difference": worst}
    if a.verify:
        xis = np.linspace(-20, 20, 40) + ctx.rng.uniform(-0.1, 0.1, 40)
        etas = np.linspace(0.25, 5, 20)
        rep.summary["verify"] = check_extension_bounds(E, xis, etas).to_dict()
    return rep


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="striphyp", description="Weighted analytic functions on strips.")
    p.add_argument("--config", help="flat key = value file overriding the numerical defaults")
    p.add_argument("--seed", type=int, default=0, help="seed for grid jitter in --verify runs")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--version", action="version", version=f"striphyp {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=fn)
        return s

    s = add("check-weight", cmd_check_weight, "growth condition of a weight")
    s.add_argument("spec")
    s.add_argument("--cond", required=True)

    s = add("check-seq", cmd_check_seq, "condition on a weight sequence")
    s.add_argument("spec")
    s.add_argument("--cond", required=True)

    s = add("classify", cmd_classify, "non-triviality label of a sequence")
    s.add_argument("spec")
    s.add_argument("--p-max", type=int, default=10_000)

    s = add("assoc", cmd_assoc, "associated function of a sequence")
    s.add_argument("spec")
    s.add_argument("--t", required=True, help="comma-separated list of t >= 0")

    s = add("minorant", cmd_minorant, "analytic minorant on a strip")
    s.add_argument("spec")
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--h", type=float, default=1.0)
    s.add_argument("--mode", choices=("dilate", "subadditive"), default="dilate")
    s.add_argument("--x", default="-10,-5,0,5,10")
    s.add_argument("--y", type=float, default=0.0)
    s.add_argument("--verify", action="store_true")

    s = add("norm", cmd_norm, "weighted strip norm of a test function")
    s.add_argument("testfn")
    s.add_argument("weight")
    s.add_argument("--h", type=float, default=1.0)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--flavor", choices=("Beurling", "Roumieu"), default="Beurling")
    s.add_argument("--mode", choices=("dilate", "subadditive"), default="dilate")
    s.add_argument("--recip-h", type=float, default=None)

    s = add("represent", cmd_represent, "analytic representation of a functional")
    s.add_argument("functional")
    s.add_argument("--mult", help="weight whose minorant multiplies the Cauchy kernel")
    s.add_argument("--mult-h", type=float, default=None)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--mode", choices=("dilate", "subadditive"), default="dilate")
    s.add_argument("--b", type=float, default=0.25)
    s.add_argument("--R", type=float, default=2.0)
    s.add_argument("--z", default=None, help="comma-separated evaluation points")

    s = add("pair", cmd_pair, "boundary-value pairing")
    s.add_argument("functional")
    s.add_argument("testfn")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--b", type=float, default=0.25)
    s.add_argument("--R", type=float, default=2.0)
    s.add_argument("--recip-h", type=float, default=None)

    s = add("fourier", cmd_fourier, "Fourier transform by contour shift")
    s.add_argument("testfn")
    s.add_argument("--xi", required=True)
    s.add_argument("--k", type=float, default=None)
    s.add_argument("--recip-h", type=float, default=None)

    s = add("laplace", cmd_laplace, "Laplace transform of a functional")
    s.add_argument("functional")
    s.add_argument("--zeta", required=True)
    s.add_argument("--b", type=float, default=0.25)
    s.add_argument("--R", type=float, default=2.0)

    s = add("pwcheck", cmd_pwcheck, "Paley-Wiener type bound for an exponential series")
    s.add_argument("series_file")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=0.0)
    s.add_argument("--weight", default=None)
    s.add_argument("--region", default="upper")
    s.add_argument("--flavor", choices=("Beurling", "Roumieu"), default="Roumieu")

    s = add("extend", cmd_extend, "almost-analytic extension of a spectrum")
    s.add_argument("testfn")
    s.add_argument("weight")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--xi", default="-5,-2,0,2,5")
    s.add_argument("--verify", action="store_true")
    s.add_argument("--recip-h", type=float, default=None)
    return p


_VALUE_OPTIONS = ("--xi", "--t", "--x", "--y", "--z", "--zeta", "--k", "--a", "--h", "--lambda")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Let list options take values such as ``-1,0,1`` without needing ``--xi=``."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _VALUE_OPTIONS and nxt is not None and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
        settings = load_settings(args.config)
    except UsageError as exc:
        err.write(str(exc))
        return EXIT_PARSE
    except (OSError, ValueError) as exc:
        err.write(f"striphyp: bad config: {exc}\n")
        return EXIT_PARSE
    ctx = Context(settings, np.random.default_rng(args.seed), args.seed)
    try:
        rep = args.func(args, ctx)
    except SpecError as exc:
        err.write(f"striphyp: {exc}\n\n{parser.format_usage()}")
        return EXIT_PARSE
    except PRECONDITION_ERRORS as exc:
        err.write(f"striphyp: precondition failed: {exc}\n")
        out.write(json.dumps({"schema": SCHEMA, "record": "error", "kind": "precondition",
                              "command": args.command, "argv": argv, "message": str(exc)}) + "\n")
        return EXIT_PRECONDITION
    except (QuadratureError, FloatingPointError) as exc:
        err.write(f"striphyp: numerical non-convergence: {exc}\n")
        out.write(json.dumps({"schema": SCHEMA, "record": "error", "kind": "nonconvergence",
                              "command": args.command, "argv": argv, "message": str(exc)}) + "\n")
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        err.write(f"striphyp: {exc}\n")
        return EXIT_PARSE
    rep.argv = argv
    out.write(rep.csv() if args.format == "csv" else rep.jsonl())
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
