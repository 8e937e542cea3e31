"""``vessel-lab`` command line.

Exit codes: 0 success (all checks passed), 1 verification failure,
2 usage or precondition error.  Errors and warnings go to stderr as one
JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import io
from .curves import curve_from_dict, discretize_curve, parse_curve_flag
from .errors import ArgumentError, VesselError
from .families import canonical_vessel, nls4_vessel, nls_vessel
from .params import family_parameters
from .sturm_liouville import gl_kernels, gl_residual, jost_sweep, q_from_K
from .tau import potential
from .transfer import eval_S
from .verify import parse_suites, run_suites
from .vessel import diag_vessel, rank1_vessel, zero_vessel

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_PAD = 0.5

FAMILY_FLAGS = {"sl": "SL", "nls": "NLS", "nls4": "NLS4", "canonical": "Canonical"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _complex(text: str) -> complex:
    """``1+2j``, ``1+2i`` or ``re,im``."""
    try:
        if "," in text:
            re, im = text.split(",")
            return complex(float(re), float(im))
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {n}")
    return n


def _emit(stream, obj):
    stream.write(json.dumps(io.jsonable(obj), sort_keys=True) + "\n")


def _write(text: str, path: str | None, stdout):
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _span(args, x0):
    lo = x0 if args.x_min is None else args.x_min
    hi = x0 + 10.0 if args.x_max is None else args.x_max
    if hi < lo:
        raise ArgumentError(f"x-max ({hi}) < x-min ({lo})")
    return min(lo, x0), max(hi, x0)


# -- commands -------------------------------------------------------------------

def cmd_construct(args, stdout, stderr) -> int:
    x0 = args.x0
    span = _span(args, x0)
    kw = {"span": span, "density": args.density}
    if args.fixture:
        if args.fixture != "rank1" and x0 != 0:
            raise ArgumentError(f"fixture {args.fixture} is anchored at x0 = 0")
        if args.fixture == "rank1":
            v = rank1_vessel(args.kappa, x0=x0, **kw)
        else:
            v = {"zero": zero_vessel, "diag": diag_vessel, "nls": nls_vessel, "nls4": nls4_vessel,
                 "canonical": canonical_vessel}[args.fixture](**kw)
    else:
        if args.curve_json:
            with open(args.curve_json) as fh:
                spec = curve_from_dict(json.load(fh))
        else:
            spec = parse_curve_flag(args.curve, args.nodes, args.profile)
        params = family_parameters(FAMILY_FLAGS[args.family], (-math.inf, math.inf))
        v = discretize_curve(spec, params, x0, **kw)
    _write(io.dumps(io.vessel_to_dict(v)), args.out, stdout)
    return EXIT_OK


def cmd_sweep(args, stdout, stderr) -> int:
    with open(args.input) as fh:
        d = json.load(fh)
    x0 = float(d.get("x0", 0.0))
    lo = x0 if args.x_min is None else args.x_min
    hi = (float(d["sweep"][1]) if d.get("sweep") else x0 + 10.0) if args.x_max is None else args.x_max
    if hi < lo:
        raise ArgumentError(f"x-max ({hi}) < x-min ({lo})")
    params = io.params_from_dict(d)
    a, b = params.interval
    # pad so end points off the cache grid and single-point grids keep a full stencil
    span = (max(min(lo, x0) - SWEEP_PAD, a), min(max(hi, x0) + SWEEP_PAD, b))
    v = io.vessel_from_dict(d, span=span, density=args.density)
    grid = np.array([lo]) if hi == lo else np.linspace(lo, hi, args.steps + 1)
    vlo, vhi = v.valid_range
    vlo, vhi = max(vlo, a, span[0]), min(vhi, b, span[1])
    keep = (grid >= vlo - 1e-12) & (grid <= vhi + 1e-12)
    if not keep.all():
        _emit(stderr, {"warning": "truncated", "requested": [lo, hi], "valid": [vlo, vhi],
                       "rows": int(keep.sum()), "requested_rows": int(grid.size)})
    grid = grid[keep]
    if grid.size == 0:
        raise ArgumentError(f"no grid point lies in the valid range [{vlo}, {vhi}]")
    _write(io.tau_csv(potential(v, grid)), args.out, stdout)
    return EXIT_OK


def cmd_verify(args, stdout, stderr) -> int:
    suites = parse_suites(args.suite)
    v = io.load_vessel(args.input)
    report = run_suites(v, suites, seed=args.seed, tol=args.tol, timings=args.timings)
    _write(io.dumps(io.jsonable(report.to_dict())), args.report, stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_eval(args, stdout, stderr) -> int:
    v = io.load_vessel(args.input)
    x = v.x0 if args.x is None else args.x
    smp = eval_S(v, args.lam, x)
    out = {"lambda": smp.lam, "x": smp.x, "S": io.matrix_to_json(smp.S),
           "det": complex(np.linalg.det(smp.S)),
           "residuals": {"symmetry": smp.residual_symmetry, "intertwine": smp.residual_intertwine,
                         "ds": smp.residual_ds}}
    _write(io.dumps(io.jsonable(out)), args.out, stdout)
    return EXIT_OK


def cmd_jost(args, stdout, stderr) -> int:
    v = io.load_vessel(args.input)
    diags = jost_sweep(v, args.s)[::args.every]
    _write(io.jost_csv(diags), args.out, stdout)
    return EXIT_OK


def cmd_gl(args, stdout, stderr) -> int:
    v = io.load_vessel(args.input)
    kern = gl_kernels(v)
    x = args.x
    y = x if args.y is None else args.y
    out = {"x": x, "y": y, "K": kern.K(x, y), "Omega": kern.Omega(x, y),
           "residual": gl_residual(kern, v, x, y, args.quad_n), "q_from_K": q_from_K(kern, x)}
    _write(io.dumps(io.jsonable(out)), args.out, stdout)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vessel-lab", description="Construct and verify operator vessels.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    c = sub.add_parser("construct", help="write a vessel JSON file")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=["rank1", "zero", "diag", "nls", "nls4", "canonical"])
    src.add_argument("--curve", help="kind:t_min:t_max, e.g. segment-imag:1:2")
    src.add_argument("--curve-json", help="curve description file")
    c.add_argument("--kappa", type=float, default=1.0)
    c.add_argument("--nodes", type=_positive_int, default=8)
    c.add_argument("--profile", default="gaussian")
    c.add_argument("--family", choices=sorted(FAMILY_FLAGS), default="sl")
    c.add_argument("--x0", type=float, default=0.0)
    c.add_argument("--x-min", type=float)
    c.add_argument("--x-max", type=float)
    c.add_argument("--density", type=_positive_int, default=io.DEFAULT_DENSITY)
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("sweep", help="tau / potential CSV over an x grid")
    s.add_argument("--input", required=True)
    s.add_argument("--x-min", type=float)
    s.add_argument("--x-max", type=float)
    s.add_argument("--steps", type=_positive_int, default=100)
    s.add_argument("--density", type=_positive_int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("verify", help="run verification suites")
    r.add_argument("--input", required=True)
    r.add_argument("--suite", default="all", help="comma-separated suite names or 'all'")
    r.add_argument("--tol", type=float)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--report")
    r.add_argument("--timings", action="store_true", help="include wall-clock per suite")
    r.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="transfer function and residuals at one (lambda, x)")
    e.add_argument("--input", required=True)
    e.add_argument("--lam", type=_complex, required=True)
    e.add_argument("--x", type=float)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    j = sub.add_parser("jost", help="Jost diagnostics CSV for one s")
    j.add_argument("--input", required=True)
    j.add_argument("--s", type=_complex, required=True)
    j.add_argument("--every", type=_positive_int, default=1)
    j.add_argument("--out")
    j.set_defaults(func=cmd_jost)

    g = sub.add_parser("gl", help="Gelfand-Levitan kernel and residual at (x, y)")
    g.add_argument("--input", required=True)
    g.add_argument("--x", type=float, required=True)
    g.add_argument("--y", type=float)
    g.add_argument("--quad-n", type=_positive_int, default=32)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gl)
    return p


def _error_record(exc: BaseException) -> dict:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("residual", "min_pivot", "sigma_min", "last_delta"):
        val = getattr(exc, attr, None)
        if val is not None:
            rec[attr] = val
    return rec


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        _emit(stderr, {"error": "UsageError", "message": str(exc)})
        return EXIT_USAGE
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = args.func(args, stdout, stderr)
        except (VesselError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
            _emit(stderr, _error_record(exc))
            code = EXIT_USAGE
    seen = set()
    for w in caught:
        msg = str(w.message)
        if msg not in seen:
            seen.add(msg)
            _emit(stderr, {"warning": w.category.__name__, "message": msg})
    return code


if __name__ == "__main__":
    sys.exit(main())
