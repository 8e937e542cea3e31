"""Vessel JSON files and CSV/JSON artifact writers.

Complex matrices are stored row-major as nested lists of ``[re, im]``
pairs; a flat list of pairs is accepted on input when the shape is
implied by ``dim_H``/``dim_E``.  Infinite interval ends are ``null``.
"""
from __future__ import annotations

import json
import math
from typing import Iterable

import numpy as np

from .errors import ArgumentError
from .numerics import DEFAULT_DENSITY, cmatrix
from .params import VesselParameters, family_parameters
from .vessel import Vessel, standard_construction

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    """Shortest round-trip decimal; integral values without a trailing ``.0``."""
    x = float(x) + 0.0  # folds -0.0 into 0.0
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = repr(x)
    return r[:-2] if r.endswith(".0") else r


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in M]


def matrix_from_json(data, rows: int, cols: int) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ArgumentError("complex entries must be [re, im] pairs")
    z = arr[..., 0] + 1j * arr[..., 1]
    return cmatrix(z.reshape(-1), rows, cols)


def _end_to_json(v: float):
    return None if math.isinf(v) else float(v)


def _end_from_json(v, default: float) -> float:
    return default if v is None else float(v)


def vessel_to_dict(v: Vessel) -> dict:
    p = v.params
    d = {
        "format": FORMAT_VERSION,
        "dim_H": v.dim_H,
        "dim_E": v.dim_E,
        "x0": v.x0,
        "A": matrix_to_json(v.A),
        "B0": matrix_to_json(v.B0),
        "X0": matrix_to_json(v.X0),
        "family": p.family,
        "family_args": dict(p.family_args),
        "interval": [_end_to_json(p.interval[0]), _end_to_json(p.interval[1])],
        "sweep": [v.span[0], v.span[1]],
        "density": v.density,
    }
    if p.family == "Custom":
        if not p.is_constant:
            raise ArgumentError("only constant Custom parameters can be serialized")
        d["sigma1"] = matrix_to_json(p.s1(0.0))
        d["sigma2"] = matrix_to_json(p.s2(0.0))
        d["gamma"] = matrix_to_json(p.g(0.0))
    return d


def params_from_dict(d: dict) -> VesselParameters:
    interval = d.get("interval", [None, None])
    interval = (_end_from_json(interval[0], -math.inf), _end_from_json(interval[1], math.inf))
    fam = d.get("family", "SL")
    m = int(d["dim_E"])
    if fam == "Custom":
        try:
            s1, s2, g = (matrix_from_json(d[k], m, m) for k in ("sigma1", "sigma2", "gamma"))
        except KeyError as exc:
            raise ArgumentError(f"Custom family needs field {exc.args[0]!r}") from exc
        return VesselParameters(m, s1, s2, g, None, interval, "Custom", dict(d.get("family_args", {})))
    p = family_parameters(fam, interval)
    if p.dim_E != m:
        raise ArgumentError(f"family {fam} has dim_E={p.dim_E}, file says {m}")
    return VesselParameters(p.dim_E, p.sigma1, p.sigma2, p.gamma, p.gamma_star, p.interval, p.family,
                            dict(d.get("family_args", {})), p.dsigma1)


def vessel_from_dict(d: dict, span=None, density: int | None = None) -> Vessel:
    for key in ("dim_H", "dim_E", "x0", "A", "B0", "X0"):
        if key not in d:
            raise ArgumentError(f"vessel JSON lacks field {key!r}")
    n, m = int(d["dim_H"]), int(d["dim_E"])
    params = params_from_dict(d)
    A = matrix_from_json(d["A"], n, n)
    B0 = matrix_from_json(d["B0"], n, m)
    X0 = matrix_from_json(d["X0"], n, n)
    if span is None and d.get("sweep") is not None:
        span = tuple(float(t) for t in d["sweep"])
    density = int(d.get("density", DEFAULT_DENSITY)) if density is None else density
    return standard_construction(params, A, B0, X0, float(d["x0"]), span=span, density=density)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_vessel(v: Vessel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(vessel_to_dict(v)))


def load_vessel(path: str, span=None, density: int | None = None) -> Vessel:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"{path}: not valid JSON ({exc})") from exc
    return vessel_from_dict(d, span=span, density=density)


def csv_lines(header: Iterable[str], rows: Iterable[Iterable[float]]) -> str:
    out = [",".join(header)]
    out.extend(",".join(fmt(x) for x in row) for row in rows)
    return "\n".join(out) + "\n"


TAU_HEADER = ("x", "tau", "logderiv", "beta", "q")
JOST_HEADER = ("x", "re_h", "im_h", "abs_h", "theta_h", "K_S")


def tau_csv(profile) -> str:
    return csv_lines(TAU_HEADER, profile.rows())


def jost_csv(diags) -> str:
    return csv_lines(JOST_HEADER, ((d.x, d.h.real, d.h.imag, abs(d.h), d.theta_h, d.K_S)
                                   for d in diags))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x + 0.0 if math.isfinite(x) else fmt(x)
    return obj
