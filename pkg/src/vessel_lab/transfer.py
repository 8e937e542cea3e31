"""Transfer function S(lambda, x), the input/output fundamental solutions and
checks of the transfer-function identities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ArgumentError, ResolventError
from .numerics import derivative, fundamental_solution, propagate
from .vessel import Vessel

SPECTRUM_GUARD = 1e-8


def _fro(M) -> float:
    return float(np.linalg.norm(M))


@dataclass(frozen=True)
class TransferSample:
    """S(lambda, x) with its identity residuals (``nan`` where a check was skipped)."""

    lam: complex
    x: float
    S: np.ndarray
    residual_symmetry: float = math.nan
    residual_intertwine: float = math.nan
    residual_ds: float = math.nan


@dataclass(frozen=True)
class DetProfile:
    xs: np.ndarray
    values: np.ndarray
    spread: float
    """max pairwise deviation of the determinants."""
    unimodular_error: float
    """max ||det| - 1| for purely imaginary lambda, else ``nan``."""


def spectral_distance(v: Vessel, lam: complex) -> float:
    if v.dim_H == 0:
        return math.inf
    return float(np.min(np.abs(v.eigenvalues - lam)))


def _resolvent(v: Vessel, lam: complex) -> np.ndarray:
    d = spectral_distance(v, lam)
    if d < SPECTRUM_GUARD:
        raise ResolventError(f"lambda={lam} is within {d:.2e} of spec(A)", min_pivot=d)
    return np.linalg.inv(lam * np.eye(v.dim_H) - v.A)


def S_matrix(v: Vessel, lam: complex, x: float) -> np.ndarray:
    """``I - B^H X^{-1} (lam - A)^{-1} B sigma1`` at ``x``."""
    R = _resolvent(v, lam)
    B, X = v.state(x)
    return np.eye(v.dim_E) - B.conj().T @ np.linalg.solve(X, R @ B) @ v.params.s1(x)


def S_grid(v: Vessel, lam: complex) -> np.ndarray:
    """S(lam, x) at every valid grid point (vectorized)."""
    R = _resolvent(v, lam)
    s = v.valid_slice
    B, X = v.B_grid[s], v.X_grid[s]
    core = np.swapaxes(B.conj(), 1, 2) @ np.linalg.solve(X, R @ B)
    p = v.params
    if p.is_constant:
        core = core @ p.s1(0.0)
    else:
        core = core @ np.array([p.s1(t) for t in v.valid_grid])
    return np.eye(v.dim_E) - core


def eval_S(v: Vessel, lam: complex, x: float, residuals: bool = True,
           u0=None) -> TransferSample:
    """S(lam, x), optionally with the residuals of its identities.

    The symmetry residual is ``nan`` when ``-conj(lam)`` falls on spec(A);
    ``u0`` defaults to ``(1, ..., 1)``.
    """
    S = S_matrix(v, lam, x)
    if not residuals:
        return TransferSample(complex(lam), float(x), S)
    mirror = -np.conj(lam)
    sym = check_symmetry(v, lam, x) if spectral_distance(v, mirror) >= SPECTRUM_GUARD else math.nan
    u0 = np.ones(v.dim_E) if u0 is None else u0
    return TransferSample(complex(lam), float(x), S, sym, check_intertwine(v, lam, x, u0),
                          check_ds(v, lam, x))


# -- fundamental solutions ---------------------------------------------------

def input_generator(v: Vessel, lam: complex):
    """``x -> sigma1^{-1}(sigma2 lam + gamma)``; a constant matrix for constant parameters."""
    p = v.params
    if p.is_constant:
        return np.linalg.solve(p.s1(0.0), p.s2(0.0) * lam + p.g(0.0))
    return lambda t: np.linalg.solve(p.s1(t), p.s2(t) * lam + p.g(t))


def output_generator_at(v: Vessel, lam: complex, x: float) -> np.ndarray:
    p = v.params
    return np.linalg.solve(p.s1(x), p.s2(x) * lam + v.gamma_star(x))


def input_fundamental(v: Vessel, lam: complex, x: float, x0: float | None = None,
                      steps: int | None = None) -> np.ndarray:
    """Phi(lam, x, x0) for ``u' = sigma1^{-1}(sigma2 lam + gamma) u``."""
    x0 = v.x0 if x0 is None else x0
    return fundamental_solution(input_generator(v, lam), x0, x, steps)


def _output_grid_generators(v: Vessel, lam: complex, ka: int, kb: int) -> np.ndarray:
    """Output generators at valid-grid indices ka..kb (inclusive, either order)."""
    p = v.params
    idx = np.arange(ka, kb + (1 if kb >= ka else -1), 1 if kb >= ka else -1)
    gs = v.gamma_star_grid[idx]
    if p.is_constant:
        s1inv = np.linalg.inv(p.s1(0.0))
        return np.ascontiguousarray(s1inv @ (p.s2(0.0) * lam + gs))
    xs = v.valid_grid[idx]
    return np.ascontiguousarray(
        np.array([np.linalg.solve(p.s1(t), p.s2(t) * lam + g) for t, g in zip(xs, gs)]))


def output_fundamental(v: Vessel, lam: complex, x: float) -> np.ndarray:
    """Phi_star(lam, x, x0) for ``y' = sigma1^{-1}(sigma2 lam + gamma_star) y``.

    RK4 with step ``2h`` over the cached grid, so every stage point is a
    cached gamma_star value; the remainder off the even sub-grid is
    integrated with gamma_star evaluated through short off-grid sweeps.
    """
    x = float(x)
    v.state(x)  # domain and validity checks
    a, _ = v._valid_k
    k0 = v._k0 - a
    kx = (x - v.x0) * v.density
    sgn = 1 if kx >= 0 else -1
    npairs = int(math.floor(abs(kx) / 2 + 1e-9))
    Y = np.eye(v.dim_E, dtype=np.complex128)
    if npairs > 0:
        C = _output_grid_generators(v, lam, k0, k0 + sgn * 2 * npairs)
        Y = kernels.rk4_linear(C, Y, sgn * 2 * v.h, npairs)
    xm = v.x0 + sgn * 2 * npairs * v.h
    if abs(x - xm) > 1e-12:
        Y = propagate(lambda t: output_generator_at(v, lam, t), xm, x, Y, steps=2)
    return Y


@dataclass(frozen=True)
class FundamentalPair:
    """Input and output fundamental solutions at a fixed lambda, both equal to I at x0."""

    vessel: Vessel
    lam: complex

    def Phi(self, x: float) -> np.ndarray:
        return input_fundamental(self.vessel, self.lam, x)

    def PhiStar(self, x: float) -> np.ndarray:
        return output_fundamental(self.vessel, self.lam, x)


# -- checks --------------------------------------------------------------------

def check_symmetry(v: Vessel, lam: complex, x: float) -> float:
    """``||S(-conj lam)^H sigma1 S(lam) - sigma1||``."""
    s1 = v.params.s1(x)
    S1 = S_matrix(v, lam, x)
    S2 = S_matrix(v, -np.conj(lam), x)
    return _fro(S2.conj().T @ s1 @ S1 - s1)


def _stencil_bounds(v: Vessel):
    lo, hi = v.valid_range
    return max(lo, v.span[0]), min(hi, v.span[1])


def commutant_factor(lam: complex, a: complex | None = None, c: complex | None = None) -> np.ndarray:
    """``I + [[a, i c / lam], [c, a]]`` (defaults ``a = 1/lam``, ``c = 1/lam^2``).

    Commutes with the SL input generator ``[[0, i], [lam, 0]]``.
    """
    a = 1 / lam if a is None else a
    c = 1 / lam**2 if c is None else c
    return np.eye(2, dtype=np.complex128) + np.array([[a, 1j * c / lam], [c, a]])


def output_residual(v: Vessel, lam: complex, x: float, y) -> float:
    """``||-sigma1 y' + (sigma2 lam + gamma_star) y||`` for a callable ``y``."""
    p = v.params
    lo, hi = _stencil_bounds(v)
    dy = derivative(y, x, v.h, lo=lo, hi=hi)
    return _fro(-p.s1(x) @ dy + (p.s2(x) * lam + v.gamma_star(x)) @ y(x))


def check_intertwine(v: Vessel, lam: complex, x: float, u0, right=None) -> float:
    """Output-LDE residual of ``y = S(lam, x) [right] Phi(lam, x, x0) u0``."""
    u0 = np.asarray(u0, dtype=np.complex128).reshape(-1)
    if u0.shape[0] != v.dim_E:
        raise ArgumentError(f"u0 must have {v.dim_E} entries")
    Yr = np.eye(v.dim_E) if right is None else np.asarray(right, dtype=np.complex128)
    cache = {}

    def y(t):
        if t not in cache:
            cache[t] = S_matrix(v, lam, t) @ Yr @ input_fundamental(v, lam, t) @ u0
        return cache[t]

    return output_residual(v, lam, x, y)


def check_intertwine_identity(v: Vessel, lam: complex, x: float) -> float:
    """``||S(lam, x) Phi(lam, x, x0) - Phi_star(lam, x, x0) S(lam, x0)||``."""
    lhs = S_matrix(v, lam, x) @ input_fundamental(v, lam, x)
    rhs = output_fundamental(v, lam, x) @ S_matrix(v, lam, v.x0)
    return _fro(lhs - rhs)


def check_ds(v: Vessel, lam: complex, x: float) -> float:
    """``||dS/dx - sigma1^{-1}(sigma2 lam + gamma_star) S + S sigma1^{-1}(sigma2 lam + gamma)||``."""
    p = v.params
    lo, hi = _stencil_bounds(v)
    dS = derivative(lambda t: S_matrix(v, lam, t), x, v.h, lo=lo, hi=hi)
    S = S_matrix(v, lam, x)
    s1, s2 = p.s1(x), p.s2(x)
    out = np.linalg.solve(s1, s2 * lam + v.gamma_star(x))
    inp = np.linalg.solve(s1, s2 * lam + p.g(x))
    return _fro(dS - out @ S + S @ inp)


def det_S(v: Vessel, lam: complex, xs) -> DetProfile:
    xs = np.asarray(xs, dtype=float)
    vals = np.array([np.linalg.det(S_matrix(v, lam, t)) for t in xs])
    spread = float(np.max(np.abs(vals[:, None] - vals[None, :]))) if len(vals) else 0.0
    unimod = float(np.max(np.abs(np.abs(vals) - 1))) if complex(lam).real == 0 else math.nan
    return DetProfile(xs, vals, spread, unimod)


def det_formula(v: Vessel, lam: complex) -> complex:
    """``prod (lam + conj mu) / (lam - mu)`` over spec(A)."""
    mu = v.eigenvalues
    _resolvent(v, lam)
    return complex(np.prod((lam + np.conj(mu)) / (lam - mu)))


# -- kernels -------------------------------------------------------------------

def _F(v: Vessel, lam, x):
    B, _ = v.state(x)
    return _resolvent(v, lam) @ B @ v.params.s1(x)


def kernel_K1(v: Vessel, lam: complex, mu: complex, x: float) -> np.ndarray:
    """``sigma1 B^H (conj mu - A^H)^{-1} X^{-1} (lam - A)^{-1} B sigma1``."""
    _, X = v.state(x)
    return _F(v, mu, x).conj().T @ np.linalg.solve(X, _F(v, lam, x))


def _G(v: Vessel, lam, x):
    B, X = v.state(x)
    return B.conj().T @ np.linalg.solve(X, _resolvent(v, lam))


def kernel_K2(v: Vessel, lam: complex, mu: complex, x: float) -> np.ndarray:
    """``B^H X^{-1} (lam - A)^{-1} X (conj mu - A^H)^{-1} X^{-1} B``."""
    _, X = v.state(x)
    return _G(v, lam, x) @ X @ _G(v, mu, x).conj().T


def gram_K1(v: Vessel, lams, x: float) -> np.ndarray:
    """Block matrix ``[K1(lam_j, lam_i)]_{ij}``; PSD when X(x) > 0."""
    lams = list(lams)
    return np.block([[kernel_K1(v, lj, li, x) for lj in lams] for li in lams])


def gram_K2(v: Vessel, lams, x: float) -> np.ndarray:
    """Block matrix ``[K2(lam_i, lam_j)]_{ij}``; PSD when X(x) > 0."""
    lams = list(lams)
    return np.block([[kernel_K2(v, li, lj, x) for lj in lams] for li in lams])


def min_gram_eigenvalue(G: np.ndarray) -> float:
    return float(np.min(np.linalg.eigvalsh(0.5 * (G + G.conj().T))))


def decay_products(v: Vessel, direction: complex, radii, x: float) -> np.ndarray:
    """``||S(lam, x) - I|| * |lam|`` along the ray ``lam = r * direction / |direction|``."""
    d = direction / abs(direction)
    return np.array([_fro(S_matrix(v, r * d, x) - np.eye(v.dim_E)) * r for r in radii])
