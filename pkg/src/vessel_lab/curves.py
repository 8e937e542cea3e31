"""Finite-dimensional vessels from quadrature of a diagonal model on a spectral
curve symmetric under ``mu -> -conj(mu)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError, ConditioningError, DiscretizationError, ResolventError
from .numerics import DEFAULT_DENSITY, gauss_legendre
from .params import VesselParameters
from .transfer import S_matrix
from .vessel import Vessel, standard_construction

CURVE_TOL = 1e-8
PAIR_TOL = 1e-12
CURVE_KINDS = ("segment-imag", "ray-imag")


def _gaussian(scale: float = 1.0, component: int = 0, amplitude: float = 1.0):
    def profile(mu, dim_E):
        row = np.zeros(dim_E, dtype=np.complex128)
        row[component] = amplitude * math.exp(-abs(mu) ** 2 / scale**2)
        return row
    return profile


def _constant(value=1.0, component: int = 0):
    def profile(mu, dim_E):
        row = np.zeros(dim_E, dtype=np.complex128)
        if isinstance(value, (list, tuple)):
            row[:] = [complex(*c) if isinstance(c, (list, tuple)) else c for c in value]
        else:
            row[component] = value
        return row
    return profile


def _zero():
    def profile(mu, dim_E):
        return np.zeros(dim_E, dtype=np.complex128)
    return profile


PROFILES = {"gaussian": _gaussian, "constant": _constant, "zero": _zero}


@dataclass(frozen=True)
class CurveSpec:
    """A symmetric spectral curve with its quadrature rule and initial density ``b(mu)``.

    ``kind`` is ``segment-imag`` (``mu = i t``, ``t`` in ``[t_min, t_max]``)
    or ``ray-imag`` (``mu = i t``, ``t >= t_min``, Gauss nodes in
    ``u = (t - t_min) / (1 + t - t_min)``).  ``profile`` maps ``(mu, dim_E)``
    to a row vector.
    """

    kind: str = "segment-imag"
    t_min: float = 1.0
    t_max: float = 2.0
    nodes: int = 8
    profile: Callable = field(default_factory=lambda: _gaussian())
    profile_name: str = "gaussian"
    profile_args: dict = field(default_factory=dict)
    diagonal_density: Callable | None = None
    """Value of degenerate diagonal entries of X0 at ``mu``; default 1."""

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ArgumentError(f"unknown curve kind {self.kind!r}; choose from {CURVE_KINDS}")
        if self.nodes < 1:
            raise ArgumentError("nodes must be >= 1")
        if self.kind != "ray-imag" and not self.t_min < self.t_max:
            raise ArgumentError("need t_min < t_max")

    def mu(self, t):
        return 1j * np.asarray(t, dtype=float)

    def quadrature(self):
        """Curve parameters and weights (measure dt)."""
        if self.kind == "ray-imag":
            u, w = gauss_legendre(self.nodes, 0.0, 1.0)
            t = self.t_min + u / (1 - u)
            return t, w / (1 - u) ** 2
        return gauss_legendre(self.nodes, self.t_min, self.t_max)

    def distance_to_curve(self, z: complex) -> float:
        hi = math.inf if self.kind == "ray-imag" else self.t_max
        t = min(max(z.imag, self.t_min), hi)
        return abs(z - 1j * t)

    @property
    def unbounded(self) -> bool:
        return self.kind == "ray-imag"

    def with_nodes(self, n: int) -> "CurveSpec":
        return CurveSpec(self.kind, self.t_min, self.t_max, n, self.profile, self.profile_name,
                         dict(self.profile_args), self.diagonal_density)


def make_curve(kind="segment-imag", t_min=1.0, t_max=2.0, nodes=8, profile="gaussian",
               profile_args=None) -> CurveSpec:
    """CurveSpec from plain values (the JSON form)."""
    profile_args = dict(profile_args or {})
    if callable(profile):
        return CurveSpec(kind, t_min, t_max, nodes, profile, "custom", profile_args)
    if profile not in PROFILES:
        raise ArgumentError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    return CurveSpec(kind, float(t_min), float(t_max), int(nodes), PROFILES[profile](**profile_args),
                     profile, profile_args)


def curve_from_dict(d: dict) -> CurveSpec:
    known = {"kind", "t_min", "t_max", "nodes", "profile", "profile_args"}
    extra = set(d) - known
    if extra:
        raise ArgumentError(f"unknown curve fields {sorted(extra)}")
    return make_curve(**d)


def curve_to_dict(c: CurveSpec) -> dict:
    return {"kind": c.kind, "t_min": c.t_min, "t_max": c.t_max, "nodes": c.nodes,
            "profile": c.profile_name, "profile_args": dict(c.profile_args)}


def parse_curve_flag(text: str, nodes: int = 8, profile: str = "gaussian") -> CurveSpec:
    """``kind:t_min:t_max`` shorthand, e.g. ``segment-imag:1:2``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ArgumentError(f"curve flag must look like kind:t_min:t_max, got {text!r}")
    try:
        lo, hi = float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ArgumentError(f"bad curve bounds in {text!r}") from exc
    return make_curve(parts[0], lo, hi, nodes, profile)


def check_symmetric_nodes(spec: CurveSpec, mus) -> float:
    """Max distance from ``-conj(mu_k)`` to the curve; raises beyond ``CURVE_TOL``."""
    worst = max((spec.distance_to_curve(-np.conj(m)) for m in mus), default=0.0)
    if worst > CURVE_TOL:
        raise DiscretizationError(f"curve not symmetric under mu -> -conj(mu) (distance {worst:.2e})")
    return worst


def schwartz_check(spec: CurveSpec, mus, rows, order: int = 8) -> float:
    """``max_n |mu|^n ||b(mu)||`` at the largest node (must stay <= 1 for unbounded curves)."""
    k = int(np.argmax(np.abs(mus)))
    r = float(np.linalg.norm(rows[k]))
    val = max(abs(mus[k]) ** n * r for n in range(order + 1))
    if spec.unbounded and val > 1.0:
        raise DiscretizationError(f"profile does not decay fast enough on the unbounded curve "
                                  f"(|mu|^n |b| = {val:.3e} at mu={mus[k]})")
    return val


def discretize_curve(spec: CurveSpec, params: VesselParameters, x0: float = 0.0, *,
                     span=None, density: int = DEFAULT_DENSITY) -> Vessel:
    """Vessel with ``A = diag(mu_k)``, ``B0`` rows ``sqrt(w_k) b(mu_k)`` and the Cauchy-type X0.

    ``X0[j, k] = -sqrt(w_j w_k) b_j sigma1 b_k^H / (mu_j + conj mu_k)``.  Pairs
    with ``mu_j + conj mu_k = 0`` need a vanishing numerator; their entry is
    the diagonal density (``j == k``) or 0.

    Raises
    ------
    DiscretizationError
        Degenerate pair with nonzero numerator, or a profile vanishing at some
        but not all nodes.
    ConditioningError
        X0 numerically singular.
    """
    t, w = spec.quadrature()
    mus = spec.mu(t)
    check_symmetric_nodes(spec, mus)
    dim_E = params.dim_E
    rows = np.array([np.asarray(spec.profile(m, dim_E), dtype=np.complex128) for m in mus])
    if rows.shape != (len(mus), dim_E):
        raise ArgumentError(f"profile must return rows of length {dim_E}")
    schwartz_check(spec, mus, rows)
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0) and not np.all(norms == 0):
        bad = [complex(m) for m, r in zip(mus, norms) if r == 0]
        raise DiscretizationError(f"profile vanishes at nodes {bad}; the vessel would not be minimal")
    B0 = np.sqrt(w)[:, None] * rows
    s1 = params.s1(x0)
    num = B0 @ s1 @ B0.conj().T
    den = mus[:, None] + np.conj(mus)[None, :]
    scale = max(1.0, float(np.max(np.abs(mus))))
    dens = spec.diagonal_density
    n = len(mus)
    X0 = np.zeros((n, n), dtype=np.complex128)
    nscale = max(float(np.max(np.abs(num))), 1e-300)
    for j in range(n):
        for k in range(n):
            if abs(den[j, k]) <= PAIR_TOL * scale:
                if abs(num[j, k]) > 1e-14 * max(nscale, 1.0):
                    raise DiscretizationError(
                        f"degenerate pairing mu_{j}={mus[j]:.6g}, mu_{k}={mus[k]:.6g} with "
                        f"nonzero numerator {num[j, k]:.3e}")
                X0[j, k] = (1.0 if dens is None else dens(mus[j])) if j == k else 0.0
            else:
                X0[j, k] = -num[j, k] / den[j, k]
    X0 = 0.5 * (X0 + X0.conj().T)
    sv = np.linalg.svd(X0, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise ConditioningError(f"X0 numerically singular (sigma_min {sv[-1]:.3e})",
                                sigma_min=float(sv[-1]))
    return standard_construction(params, np.diag(mus), B0, X0, x0, span=span, density=density)


@dataclass(frozen=True)
class SpectrumReport:
    lambdas: np.ndarray
    jumps: np.ndarray
    """``||S(lam + delta) - S(lam - delta)||`` across the curve direction."""
    deviation: np.ndarray
    """``||S(lam) - I||``."""
    peak: complex
    peak_distance: float
    """distance from the peak jump location to spec(A)."""
    flagged: tuple

    def as_dict(self) -> dict:
        return {"peak": [self.peak.real, self.peak.imag], "peak_distance": self.peak_distance,
                "max_jump": float(np.max(self.jumps)) if len(self.jumps) else 0.0,
                "flagged": [[z.real, z.imag] for z in self.flagged]}


def check_spectrum_location(v: Vessel, lambda_grid, x: float | None = None,
                            delta: complex = 0.05, flag_ratio: float = 0.1) -> SpectrumReport:
    """Jump detector for S across the points of ``lambda_grid``.

    Each point ``lam`` is straddled by ``lam +- delta``; points whose jump
    exceeds ``flag_ratio`` times the largest jump are flagged.
    """
    x = v.x0 if x is None else x
    lams = np.asarray(list(lambda_grid), dtype=np.complex128)
    eye = np.eye(v.dim_E)

    def guarded(fn):
        try:
            return float(fn())
        except ResolventError:
            return math.inf

    jumps = np.array([guarded(lambda: np.linalg.norm(S_matrix(v, z + delta, x) - S_matrix(v, z - delta, x)))
                      for z in lams])
    dev = np.array([guarded(lambda: np.linalg.norm(S_matrix(v, z, x) - eye)) for z in lams])
    k = int(np.argmax(jumps)) if len(jumps) else 0
    peak = complex(lams[k]) if len(lams) else complex("nan")
    dist = float(np.min(np.abs(v.eigenvalues - peak))) if v.dim_H and len(lams) else math.inf
    top = float(np.max(jumps)) if len(jumps) else 0.0
    flagged = tuple(complex(z) for z, j in zip(lams, jumps) if top > 1e-12 and j >= flag_ratio * top)
    return SpectrumReport(lams, jumps, dev, peak, dist, flagged)


def refinement_ladder(spec: CurveSpec, params: VesselParameters, lams, x: float = 0.0,
                      levels=(4, 8, 16), x0: float = 0.0, density: int = DEFAULT_DENSITY):
    """Successive ``max_lam ||S_{n_{i+1}} - S_{n_i}||`` over node-doubling levels."""
    span = (min(x0, x), max(x0, x))
    if span[0] == span[1]:
        span = (x0, x0 + 1.0)
    Ss = []
    for n in levels:
        v = discretize_curve(spec.with_nodes(n), params, x0, span=span, density=density)
        Ss.append([S_matrix(v, lam, x) for lam in lams])
    diffs = []
    for a, b in zip(Ss, Ss[1:]):
        diffs.append(max(float(np.linalg.norm(p - q)) for p, q in zip(a, b)))
    return diffs
