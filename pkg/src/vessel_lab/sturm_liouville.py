"""Sturm-Liouville vessels: explicit input fundamental matrix, Gelfand-Levitan
kernels, Jost diagnostics and a Volterra-iteration oracle for Jost solutions.

Spectral convention: ``lambda = i s^2`` with ``Im s >= 0``; the output
equation is ``-y'' + q y + i lambda y = 0``, i.e. ``-y'' + q y = s^2 y``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import lfilter

from . import kernels
from .errors import (ArgumentError, ConvergenceError, DomainError, FamilyError,
                     PhaseUndefinedError)
from .numerics import derivative, gauss_legendre
from .params import SL_SIGMA1, SL_SIGMA2, SL_GAMMA
from .transfer import S_grid, S_matrix, _output_grid_generators, output_fundamental
from .vessel import Vessel

E1 = np.array([1.0, 0.0], dtype=np.complex128)


def _require_sl(v: Vessel):
    if v.params.family != "SL":
        raise FamilyError(f"operation defined for SL vessels only (family {v.params.family})")


def s_from_lambda(lam: complex) -> complex:
    """``s`` with ``s^2 = -i lam`` and ``Im s >= 0``."""
    s = cmath.sqrt(-1j * complex(lam))
    if s.imag < 0 or (s.imag == 0 and s.real < 0):
        s = -s
    return s


def lambda_from_s(s: complex) -> complex:
    return 1j * complex(s) ** 2


@dataclass(frozen=True)
class SLParams:
    """The fixed SL coefficients and the tau profile that supplies beta."""

    beta_source: object = None
    sigma1: np.ndarray = SL_SIGMA1
    sigma2: np.ndarray = SL_SIGMA2
    gamma: np.ndarray = SL_GAMMA


def _sinc_t(s: complex, t: float) -> complex:
    """``sin(s t) / s`` with the ``s -> 0`` limit."""
    z = s * t
    if abs(z) < 1e-4:
        return t * (1 - z * z / 6 + z**4 / 120)
    return cmath.sin(z) / s


def phi_input(lam: complex, x: float, x0: float = 0.0) -> np.ndarray:
    """Closed-form input fundamental matrix of the SL vessel."""
    s = s_from_lambda(lam)
    t = x - x0
    c = cmath.cos(s * t)
    sn = cmath.sin(s * t)
    return np.array([[c, 1j * _sinc_t(s, t)], [1j * s * sn, c]], dtype=np.complex128)


# -- Gelfand-Levitan --------------------------------------------------------

@dataclass(frozen=True)
class GLKernels:
    """``Omega(x, y) = e1^T B(x)^H X(x0)^{-1} B(y) e1`` and
    ``K(x, y) = -e1^T B(x)^H X(x)^{-1} B(y) e1``."""

    vessel: Vessel

    def _col(self, x):
        return self.vessel.B(x)[:, 0]

    def Omega(self, x: float, y: float) -> complex:
        v = self.vessel
        return complex(self._col(x).conj() @ np.linalg.solve(v.X0, self._col(y)))

    def K(self, x: float, y: float) -> complex:
        v = self.vessel
        return complex(-self._col(x).conj() @ np.linalg.solve(v.X(x), self._col(y)))


def gl_kernels(v: Vessel) -> GLKernels:
    _require_sl(v)
    return GLKernels(v)


def gl_residual(kern: GLKernels, v: Vessel, x: float, y: float, quad_n: int = 32) -> float:
    """``|K(x,y) + Omega(x,y) + int_{x0}^x K(x,t) Omega(t,y) dt|`` with ``quad_n`` Gauss nodes."""
    if not isinstance(quad_n, (int, np.integer)) or quad_n < 1:
        raise ArgumentError("quad_n must be a positive integer")
    if not v.x0 <= y <= x:
        raise ArgumentError(f"need x0 <= y <= x, got x={x}, y={y}")
    Bx, Xx = v.state(x)
    bx = Bx[:, 0]
    by = v.B(y)[:, 0]
    val = -bx.conj() @ np.linalg.solve(Xx, by) + bx.conj() @ np.linalg.solve(v.X0, by)
    if x > v.x0:
        nodes, weights = gauss_legendre(quad_n, v.x0, x)
        Bt = np.array([v.B(t)[:, 0] for t in nodes])  # (n, dim_H)
        Kxt = -(np.linalg.solve(Xx, Bt.T).T @ bx.conj())  # K(x, t) = -bx^H X^{-1} b(t)
        Oty = Bt.conj() @ np.linalg.solve(v.X0, by)
        val = val + np.sum(weights * Kxt * Oty)
    return float(abs(val))


def q_from_K(kern: GLKernels, x: float) -> float:
    """``2 d/dx K(x, x)`` by central differences on the cache spacing."""
    v = kern.vessel
    lo, hi = v.valid_range
    d = derivative(lambda t: kern.K(t, t), x, v.h, lo=max(lo, v.span[0]), hi=min(hi, v.span[1]))
    return float((2 * d).real)


# -- Jost diagnostics -------------------------------------------------------

@dataclass(frozen=True)
class JostDiagnostics:
    s: complex
    x: float
    h: complex
    theta_h: float
    K_S: float
    """``nan`` when ``Re s = 0`` (the defining quotient is 0/0)."""

    @property
    def lam(self) -> complex:
        return lambda_from_s(self.s)


@dataclass(frozen=True)
class HIdentityResiduals:
    symmetry: float
    energy: float
    phase: float

    def max(self) -> float:
        return max(r for r in (self.symmetry, self.energy, self.phase) if not math.isnan(r))


def _ks_numerator(S: np.ndarray, s: complex) -> float:
    w = S @ np.array([1.0, s])
    return float((w.conj() @ SL_SIGMA1 @ w).real)


def _ks_denominator(s: complex) -> float:
    lam = lambda_from_s(s)
    return float((lam + np.conj(lam)).real)


def _jost_values(v: Vessel, s: complex, x: float, right=None):
    lam = lambda_from_s(s)
    S = S_matrix(v, lam, x)
    if right is not None:
        S = S @ right
    return complex(S[0] @ np.array([1.0, s])), _ks_numerator(S, s)


def _theta_grid(v: Vessel, s: complex, right=None):
    """Unwrapped phase of h along the valid grid, seeded at x0 by the principal value."""
    Sg = S_grid(v, lambda_from_s(s))
    if right is not None:
        Sg = Sg @ right
    hg = Sg[:, 0, :] @ np.array([1.0, s])
    k0 = v._k0 - v._valid_k[0]
    ang = np.angle(hg)
    out = np.empty_like(ang)
    out[k0:] = np.unwrap(ang[k0:])
    out[:k0 + 1] = np.unwrap(ang[k0::-1])[::-1]
    return hg, out


def _check_s(v: Vessel, s: complex):
    m_A = float(np.max(v.eigenvalues.imag)) if v.dim_H else -math.inf
    if s.imag <= m_A:
        warnings.warn(f"Im s = {s.imag} <= m(A) = {m_A}; asymptotic claims do not apply",
                      RuntimeWarning, stacklevel=3)


def jost_h(v: Vessel, s: complex, x: float, right=None) -> JostDiagnostics:
    """``h = e1^T S(i s^2, x) [1; s]`` with its unwrapped phase and ``K_S``.

    ``right`` optionally right-multiplies S by a commutant factor.
    """
    _require_sl(v)
    s = complex(s)
    _check_s(v, s)
    h, num = _jost_values(v, s, x, right)
    den = _ks_denominator(s)
    ks = num / den if abs(s.real) > 1e-12 else math.nan
    hg, theta = _theta_grid(v, s, right)
    vg = v.valid_grid
    k = int(np.argmin(np.abs(vg - x)))
    # continue from the nearest grid phase
    th = theta[k] + float(np.angle(h / hg[k])) if hg[k] != 0 else float(np.angle(h))
    return JostDiagnostics(s, float(x), h, th, ks)


def jost_sweep(v: Vessel, s: complex, right=None) -> list[JostDiagnostics]:
    """Jost diagnostics at every valid grid point."""
    _require_sl(v)
    s = complex(s)
    _check_s(v, s)
    lam = lambda_from_s(s)
    Sg = S_grid(v, lam)
    if right is not None:
        Sg = Sg @ right
    hg, theta = _theta_grid(v, s, right)
    w = Sg @ np.array([1.0, s])
    num = np.einsum("ki,ij,kj->k", w.conj(), SL_SIGMA1, w).real
    den = _ks_denominator(s)
    ks = num / den if abs(s.real) > 1e-12 else np.full(len(num), math.nan)
    return [JostDiagnostics(s, float(t), complex(a), float(b), float(c))
            for t, a, b, c in zip(v.valid_grid, hg, theta, ks)]


def check_h_identities(v: Vessel, s: complex, x: float, right=None) -> HIdentityResiduals:
    """Residuals of the three h-identities at ``(s, x)``.

    1. ``conj h(x, -conj s) - h(x, s) / det S(lam, x0)``
    2. ``|h|^2 - [d/dx K_S + i (s - conj s) K_S]`` (``nan`` for ``Re s = 0``)
    3. ``2 d/dx theta_h + (s + conj s) d/dx K_S / |h|^2``, in the regular form
       ``2 theta' - N' / (2 Im s |h|^2)`` with ``N`` the numerator of ``K_S``.
    """
    _require_sl(v)
    s = complex(s)
    _check_s(v, s)
    lam = lambda_from_s(s)
    h, _ = _jost_values(v, s, x, right)
    hm, _ = _jost_values(v, -np.conj(s), x, right)
    S0 = S_matrix(v, lam, v.x0)
    if right is not None:
        S0 = S0 @ right
    r1 = abs(np.conj(hm) - h / np.linalg.det(S0))

    lo, hi = v.valid_range
    lo, hi = max(lo, v.span[0]), min(hi, v.span[1])
    vals = {}

    def hv(t):
        if t not in vals:
            vals[t] = _jost_values(v, s, t, right)
        return vals[t]

    dN = derivative(lambda t: hv(t)[1], x, v.h, lo=lo, hi=hi)
    den = _ks_denominator(s)
    h2 = abs(h) ** 2
    if abs(s.real) > 1e-12:
        N = hv(x)[1]
        r2 = abs(h2 - (dN / den + (1j * (s - np.conj(s))).real * N / den))
    else:
        r2 = math.nan
    if abs(h) < 1e-10:
        raise PhaseUndefinedError(f"|h| = {abs(h):.2e} too small for a phase at x={x}")
    # theta' = Im(h'/h) avoids choosing a branch for the stencil
    dh = derivative(lambda t: hv(t)[0], x, v.h, lo=lo, hi=hi)
    dtheta = float((dh / h).imag)
    r3 = abs(2 * dtheta - dN / (2 * s.imag * h2))
    return HIdentityResiduals(float(r1), float(r2), float(r3))


def jost_solution(v: Vessel, s: complex):
    """``y1 = h(x, s) e^{isx}`` and ``y1'`` on the valid grid.

    ``y = S(lam, x) [1; s] e^{isx}`` solves the output LDE, so
    ``y1' = beta y1 + i y2``.
    """
    _require_sl(v)
    s = complex(s)
    lam = lambda_from_s(s)
    Sg = S_grid(v, lam)
    xs = v.valid_grid
    y = (Sg @ np.array([1.0, s])) * np.exp(1j * s * xs)[:, None]
    beta = -np.einsum("ij,kji->k", v.params.s2(0.0), v.W_grid).real
    return xs, y[:, 0], beta * y[:, 0] + 1j * y[:, 1]


def jost_phi(v: Vessel, lam: complex, x: float) -> complex:
    """``e1^T Phi_star(lam, x, x0) [0; -i]``: ``phi(x0) = 0``, ``phi'(x0) = 1``."""
    _require_sl(v)
    if float(x) == v.x0:
        return 0j
    return complex(output_fundamental(v, lam, x)[0] @ np.array([0.0, -1j]))


def jost_phi_grid(v: Vessel, lam: complex):
    """``(x, phi, phi')`` on the even sub-grid right of x0 (RK4 step ``2h``)."""
    _require_sl(v)
    a, b = v._valid_k
    k0 = v._k0 - a
    npairs = (b - a - k0) // 2
    C = _output_grid_generators(v, lam, k0, k0 + 2 * npairs)
    y = np.array([[0.0], [-1j]], dtype=np.complex128)
    out = np.empty((npairs + 1, 2), dtype=np.complex128)
    out[0] = y[:, 0]
    for j in range(npairs):
        y = kernels.rk4_linear(np.ascontiguousarray(C[2 * j:2 * j + 3]), y, 2 * v.h, 1)
        out[j + 1] = y[:, 0]
    xs = v.x0 + 2 * v.h * np.arange(npairs + 1)
    beta = v.gamma_star_grid[k0:k0 + 2 * npairs + 1:2, 1, 0].real
    return xs, out[:, 0], beta * out[:, 0] + 1j * out[:, 1]


def schrodinger_residual(q: float, lam: complex, y: complex, d2y: complex) -> float:
    """``|-y'' + q y + i lam y|``."""
    return abs(-d2y + q * y + 1j * lam * y)


# -- Volterra oracle ----------------------------------------------------------

@dataclass(frozen=True)
class VolterraSolution:
    """Jost solution on a uniform grid from Picard iteration."""

    x: np.ndarray
    f: np.ndarray
    df: np.ndarray
    s: complex
    iterations: int
    delta: float
    tail_bound: float

    def __call__(self, x):
        return CubicSpline(self.x, self.f)(x)


def _vectorized(q: Callable) -> Callable:
    def qv(x):
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(q(x), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(q(t)) for t in x.ravel()]).reshape(x.shape)
    return qv


def volterra_jost_oracle(q: Callable, s: complex, x_max: float, iters: int = 200,
                         x_min: float = 0.0, n_per_unit: int = 64,
                         tol: float = 1e-10) -> VolterraSolution:
    """Jost solution ``f ~ e^{isx}`` of ``-f'' + q f = s^2 f`` by Picard iteration.

    Iterates on ``m = f e^{-isx}``::

        m(x) = 1 + (1 / 2is) [ int_x^X e^{2is(y-x)} q m dy - int_x^X q m dy ]

    with the upper limit truncated at ``X = x_max``.  Panels use 3-point
    Gauss rules on cubic interpolants of ``q m``; the oscillatory integral
    is accumulated by a backward recurrence.

    Raises
    ------
    ConvergenceError
        If the sup-norm update stays above ``tol`` after ``iters`` sweeps.
    """
    s = complex(s)
    if s.imag <= 0:
        raise DomainError("Im s > 0 required")
    if iters < 1:
        raise ArgumentError("iters must be >= 1")
    if not x_max > x_min:
        raise ArgumentError("need x_max > x_min")
    qv = _vectorized(q)
    n = max(4, int(math.ceil((x_max - x_min) * n_per_unit)))
    x = np.linspace(x_min, x_max, n + 1)
    hx = x[1] - x[0]
    tg, wg = np.polynomial.legendre.leggauss(3)
    tg = 0.5 * (tg + 1)  # nodes in [0, 1]
    wg = 0.5 * wg * hx
    # cubic Lagrange stencil per panel: nodes k-1..k+2, shifted at the ends
    start = np.clip(np.arange(n) - 1, 0, n - 3)
    loc = (np.arange(n)[:, None] + tg[None, :]) - start[:, None]  # (n, 3) in stencil coords
    L = np.empty((n, 3, 4))
    for j in range(4):
        others = [i for i in range(4) if i != j]
        L[:, :, j] = np.prod([(loc - o) / (j - o) for o in others], axis=0)
    ygauss = x[:-1, None] + hx * tg[None, :]
    qg = qv(ygauss)
    qn = qv(x)
    phase = np.exp(2j * s * hx * tg)  # e^{2is(y - x_k)} at panel nodes
    decay = np.exp(2j * s * hx)
    idx = start[:, None] + np.arange(4)[None, :]

    m = np.ones(n + 1, dtype=np.complex128)
    delta = math.inf
    J = np.zeros(n + 1, dtype=np.complex128)
    it = 0
    for it in range(1, iters + 1):
        # interpolate m, multiply by the exact q at the nodes
        mg = np.einsum("kpj,kj->kp", L, m[idx])
        gg = qg * mg
        plain = gg @ wg
        osc = (gg * phase) @ wg
        # J_k = osc_k + e^{2ish} J_{k+1}, run backwards from J_n = 0
        J = np.append(lfilter([1.0], [1.0, -decay], osc[::-1])[::-1], 0)
        I = np.append(np.cumsum(plain[::-1])[::-1], 0)
        m_new = 1 + (J - I) / (2j * s)
        delta = float(np.max(np.abs(m_new - m)))
        m = m_new
        if delta <= tol:
            break
    else:
        raise ConvergenceError(f"Picard iteration did not converge in {iters} sweeps "
                               f"(last delta {delta:.3e})", last_delta=delta)
    e = np.exp(1j * s * x)
    f = e * m
    df = e * (-J + 1j * s * m)
    tail = float(abs(qn[-1]) * x_max / abs(s))
    return VolterraSolution(x, f, df, s, it, delta, tail)


def wronskian(f, df, g, dg):
    """``f g' - f' g``."""
    return f * dg - df * g
