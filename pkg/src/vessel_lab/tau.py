"""The tau function with its logarithmic derivative, plus the SL potential built from it."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DomainError, FamilyError
from .numerics import derivative, grid_derivative, log_det
from .vessel import Vessel, classify

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class TauProfile:
    grid: np.ndarray
    tau: np.ndarray
    logderiv: np.ndarray
    beta: np.ndarray
    q: np.ndarray
    cross_check: float = math.nan
    """max |q - (-2 (ln tau)'')| over the grid."""

    def rows(self):
        return zip(self.grid, self.tau, self.logderiv, self.beta, self.q)


def _require_sl(v: Vessel):
    if v.params.family != "SL":
        raise FamilyError(f"operation defined for SL vessels only (family {v.params.family})")


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        warnings.warn(f"{what} has imaginary part {z.imag:.3e}; discarded", RuntimeWarning,
                      stacklevel=3)
    return float(z.real)


def tau(v: Vessel, x: float) -> float:
    """``det(X(x0)^{-1} X(x))`` via LU log-determinants."""
    X = v.X(x)
    if v.dim_H == 0:
        return 1.0
    ld = log_det(X) - log_det(v.X0)
    return _real(np.exp(ld), "tau")


def tau_logderiv(v: Vessel, x: float) -> float:
    """``tau'/tau = tr(sigma2 B^H X^{-1} B)`` (trace formula, no differencing)."""
    return _real(complex(np.trace(v.params.s2(x) @ v.W(x))), "tau'/tau")


def _W_prime(v: Vessel, x: float, W=None) -> np.ndarray:
    """Analytic ``d/dx (B^H X^{-1} B)`` using the DB, DX and Lyapunov conditions."""
    p = v.params
    B, X = v.state(x)
    if W is None:
        W = v.W(x)
    s1inv = np.linalg.inv(p.s1(x))
    M = p.s2(x) @ s1inv
    N = (p.g(x) + p.ds1(x)) @ s1inv
    P = B.conj().T @ np.linalg.solve(X, v.A @ B)
    Mh, Nh = M.conj().T, N.conj().T
    return Mh @ P - P @ M + Mh @ W @ p.s1(x) @ W - W @ N - Nh @ W - W @ p.s2(x) @ W


def _W_prime_grid(v: Vessel, idx) -> np.ndarray:
    """Batched ``_W_prime`` at valid-grid indices (constant parameters only)."""
    p = v.params
    s = v.valid_slice
    B = v.B_grid[s][idx]
    X = v.X_grid[s][idx]
    W = v.W_grid[idx]
    s1, s2 = p.s1(0.0), p.s2(0.0)
    s1inv = np.linalg.inv(s1)
    M = s2 @ s1inv
    N = (p.g(0.0) + p.ds1(0.0)) @ s1inv
    Bh = np.conj(np.swapaxes(B, -1, -2))
    P = Bh @ np.linalg.solve(X, v.A @ B)
    Mh, Nh = M.conj().T, N.conj().T
    return Mh @ P - P @ M + Mh @ W @ s1 @ W - W @ N - Nh @ W - W @ s2 @ W


def tau_logderiv_prime(v: Vessel, x: float) -> float:
    """``(tau'/tau)'`` from the analytic derivative of ``B^H X^{-1} B``."""
    p = v.params
    W = v.W(x)
    val = np.trace(p.s2(x) @ _W_prime(v, x, W))
    if callable(p.sigma2):
        val += np.trace(derivative(p.s2, x, 1e-3) @ W)
    return _real(complex(val), "(tau'/tau)'")


def tau_derivatives(v: Vessel, x: float) -> tuple[float, float]:
    """``(tau'/tau, tau''/tau)``."""
    L = tau_logderiv(v, x)
    return L, tau_logderiv_prime(v, x) + L * L


def beta(v: Vessel, x: float) -> float:
    return -tau_logderiv(v, x)


def check_gamma_star_formula(v: Vessel, x: float) -> float:
    """``||gamma_star - (gamma + [[i tau''/tau, tau'/tau], [-tau'/tau, 0]])||``."""
    _require_sl(v)
    d1, d2 = tau_derivatives(v, x)
    formula = v.params.g(x) + np.array([[1j * d2, d1], [-d1, 0]])
    return float(np.linalg.norm(v.gamma_star(x) - formula))


def _on_grid_indices(v: Vessel, grid):
    a, b = v._valid_k
    idx = []
    for t in grid:
        k = v.index_of(float(t))
        if k is None or not a <= k <= b:
            return None
        idx.append(k - a)
    return np.array(idx, dtype=int)


def potential(v: Vessel, profile_grid) -> TauProfile:
    """tau, tau'/tau, beta = -tau'/tau and q = 2 beta' on ``profile_grid``.

    ``q = -2 (tau'/tau)'`` uses the analytic derivative of
    ``B^H X^{-1} B`` and is cross-checked against a 5-point ``-2 (ln tau)''``.
    """
    _require_sl(v)
    grid = np.asarray(profile_grid, dtype=float)
    lo, hi = v.valid_range
    if grid.size == 0:
        raise ArgumentError("empty profile grid")
    for t in grid:
        if not v.params.contains(t) or t < lo - 1e-9 or t > hi + 1e-9:
            raise DomainError(f"x={t} outside valid interval [{lo}, {hi}]")
    idx = _on_grid_indices(v, grid)
    if idx is not None and len(v.valid_grid) >= 6 and v.params.is_constant:
        s = v.valid_slice
        sign, ld = np.linalg.slogdet(v.X_grid[s])
        sign0, ld0 = np.linalg.slogdet(v.X0)
        tau_all = (sign / sign0).real * np.exp(ld - ld0)
        L_all = np.einsum("ij,kji->k", v.params.s2(0.0), v.W_grid).real
        check_all = -2.0 * grid_derivative(np.log(np.abs(tau_all)), v.h, order=2)
        taus, L = tau_all[idx], L_all[idx]
        q = -2.0 * np.einsum("ij,kji->k", v.params.s2(0.0), _W_prime_grid(v, idx)).real
        check = float(np.max(np.abs(q - check_all[idx])))
    else:
        lo_s, hi_s = max(lo, v.span[0]), min(hi, v.span[1])
        taus = np.array([tau(v, t) for t in grid])
        L = np.array([tau_logderiv(v, t) for t in grid])
        q = np.array([-2.0 * tau_logderiv_prime(v, t) for t in grid])
        d2 = np.array([derivative(lambda u: math.log(abs(tau(v, u))), t, v.h, order=2,
                                  lo=lo_s, hi=hi_s) for t in grid])
        check = float(np.max(np.abs(q + 2.0 * d2)))
    return TauProfile(grid, taus, L, -L, q, check)


@dataclass(frozen=True)
class BoundsFit:
    """Fitted dissipative growth/decay constants over a window."""

    T1: float
    T2: float
    """trace(X(x) - X0) >= T1 (x - x0) + T2 on the window."""
    c1: float
    c2: float
    """||X(x)^{-1}|| <= 1 / (c1 (x - x0) + c2) on the window."""
    q_bound: float
    """max |q(x)| (x - x0) on the q window (``nan`` when not requested)."""

    @property
    def holds(self) -> bool:
        return self.T1 > 0 and self.c1 > 0 and (math.isnan(self.q_bound) or math.isfinite(self.q_bound))


def _lower_line(t, y):
    slope = float(np.polyfit(t, y, 1)[0])
    return slope, float(np.min(y - slope * t))


def fit_bounds(v: Vessel, window=(5.0, 50.0), q_window=(10.0, 100.0)) -> BoundsFit:
    """Fit the dissipative bounds on cached grid points inside the windows.

    Raises
    ------
    FamilyError
        If the vessel is not dissipative or A has spectrum off the upper imaginary axis.
    """
    eig = v.eigenvalues
    if np.any(np.abs(eig.real) > 1e-8) or np.any(eig.imag <= 0):
        raise FamilyError("bounds need spec(A) on the positive imaginary axis")
    if not classify(v).dissipative:
        raise FamilyError("bounds need a dissipative vessel")
    xs = v.valid_grid
    sel = (xs - v.x0 >= window[0]) & (xs - v.x0 <= window[1])
    if sel.sum() < 2:
        raise DomainError(f"window {window} not covered by the valid sweep {v.valid_range}")
    t = xs[sel] - v.x0
    Xw = v.X_grid[v.valid_slice][sel]
    tr = np.trace(Xw - v.X0, axis1=1, axis2=2).real
    T1, T2 = _lower_line(t, tr)
    lmin = np.linalg.eigvalsh(Xw)[:, 0]
    c1, c2 = _lower_line(t, lmin)
    qb = math.nan
    if q_window is not None and v.params.family == "SL":
        qsel = (xs - v.x0 >= q_window[0]) & (xs - v.x0 <= q_window[1])
        if qsel.sum() >= 1:
            prof = potential(v, xs[qsel])
            qb = float(np.max(np.abs(prof.q) * (prof.grid - v.x0)))
    return BoundsFit(T1, T2, c1, c2, qb)
