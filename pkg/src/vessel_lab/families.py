"""Example vessels for the NLS-type and canonical-system families, with the
closed-form output systems their potentials define."""
from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError, FamilyError
from .numerics import DEFAULT_DENSITY, derivative
from .params import (canonical_parameters, canonical_potentials, nls4_parameters, nls4_potentials,
                     nls_parameters, nls_potential, sl_gamma_star)
from .transfer import S_matrix, input_fundamental
from .vessel import Vessel, standard_construction

J = np.array([[0, -1], [1, 0]], dtype=np.complex128)


def nls_vessel(span=(0.0, 10.0), density: int = DEFAULT_DENSITY) -> Vessel:
    """NLS vessel with A = [-1 + i], B0 = [1, 1], X0 = [1]."""
    return standard_construction(nls_parameters((-math.inf, math.inf)), [[-1 + 1j]], [[1.0, 1.0]],
                                 [[1.0]], 0.0, span=span, density=density)


def nls4_vessel(span=(0.0, 10.0), density: int = DEFAULT_DENSITY) -> Vessel:
    """4x4 NLS vessel with A = [-1 + i], B0 = [1, 0, 1, 0], X0 = [1]."""
    return standard_construction(nls4_parameters((-math.inf, math.inf)), [[-1 + 1j]],
                                 [[1.0, 0.0, 1.0, 0.0]], [[1.0]], 0.0, span=span, density=density)


def canonical_vessel(span=(0.0, 10.0), density: int = DEFAULT_DENSITY) -> Vessel:
    """Canonical-system vessel with A = [2i], B0 = [1, 1], X0 = [1]."""
    return standard_construction(canonical_parameters((-math.inf, math.inf)), [[2j]], [[1.0, 1.0]],
                                 [[1.0]], 0.0, span=span, density=density)


def zs_matrix(beta) -> np.ndarray:
    """Zakharov-Shabat coupling ``[[0, beta], [-beta^H, 0]]`` (scalar or square block beta)."""
    b = np.atleast_2d(np.asarray(beta, dtype=np.complex128))
    z = np.zeros_like(b)
    return np.block([[z, b], [-b.conj().T, z]])


def canonical_Q(p: float, q: float) -> np.ndarray:
    return np.array([[p, q], [q, -p]], dtype=np.complex128)


def _read_gamma_star(v: Vessel, x: float) -> np.ndarray:
    """gamma_star rebuilt from the family's scalar potentials at ``x``."""
    fam = v.params.family
    gs = v.gamma_star(x)
    if fam == "NLS":
        return zs_matrix(nls_potential(gs))
    if fam == "NLS4":
        return zs_matrix(nls4_potentials(gs))
    if fam == "Canonical":
        p, q = canonical_potentials(gs)
        return -1j * canonical_Q(p, q)
    if fam == "SL":
        lo, hi = v.valid_range
        b = float(gs[1, 0].real)
        db = derivative(lambda t: float(v.gamma_star(t)[1, 0].real), x, v.h,
                        lo=max(lo, v.span[0]), hi=min(hi, v.span[1]))
        return sl_gamma_star(b, db)
    raise FamilyError(f"no closed-form output system for family {fam}")


def family_output_residual(v: Vessel, lam: complex, x: float, u0) -> float:
    """Residual of ``y = S Phi u0`` in the family's own output system.

    NLS / NLS4: ``y' = (lam sigma2 + [[0, beta], [-beta^H, 0]]) y``.
    Canonical: ``J y' = (i lam + Q) y`` with ``Q = [[p, q], [q, -p]]``.
    SL: the generic form with gamma_star rebuilt from beta and beta'.
    """
    u0 = np.asarray(u0, dtype=np.complex128).reshape(-1)
    if u0.shape[0] != v.dim_E:
        raise ArgumentError(f"u0 must have {v.dim_E} entries")
    p = v.params
    cache = {}

    def y(t):
        if t not in cache:
            cache[t] = S_matrix(v, lam, t) @ input_fundamental(v, lam, t) @ u0
        return cache[t]

    lo, hi = v.valid_range
    dy = derivative(y, x, v.h, lo=max(lo, v.span[0]), hi=min(hi, v.span[1]))
    yx = y(x)
    fam = p.family
    if fam in ("NLS", "NLS4"):
        res = dy - (lam * p.s2(x) + _read_gamma_star(v, x)) @ yx
    elif fam == "Canonical":
        pp, qq = canonical_potentials(v.gamma_star(x))
        res = J @ dy - (1j * lam * np.eye(2) + canonical_Q(pp, qq)) @ yx
    else:
        res = -p.s1(x) @ dy + (p.s2(x) * lam + _read_gamma_star(v, x)) @ yx
    return float(np.linalg.norm(res))


def gamma_star_skew_residual(v: Vessel, xs) -> float:
    """``max ||gamma_star + gamma_star^H + sigma1'||`` over ``xs`` (exactly 0 for constant sigma1)."""
    p = v.params
    out = 0.0
    for t in xs:
        g = v.gamma_star(t)
        out = max(out, float(np.max(np.abs(g + g.conj().T + p.ds1(t)))))
    return out
