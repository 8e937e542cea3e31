"""Dense complex matrix helpers, RK4 fundamental solutions, quadrature and
finite-difference stencils.

Matrices are plain ``numpy`` ``complex128`` arrays throughout the package.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la

from . import kernels
from .errors import ArgumentError, IntegrationError, SingularityError

DEFAULT_DENSITY = 256
"""Default RK4 steps per unit length."""

IDENTITY_TOL = 1e-8
PIVOT_TOL = 1e-12


def cmatrix(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``data`` into a 2-d complex array, optionally reshaping a flat
    row-major sequence to ``(rows, cols)``."""
    arr = np.asarray(data, dtype=np.complex128)
    if rows is not None and cols is not None:
        if arr.size != rows * cols:
            raise ArgumentError(f"expected {rows * cols} entries, got {arr.size}")
        arr = arr.reshape(rows, cols)
    if arr.ndim != 2:
        raise ArgumentError(f"expected a matrix, got array of shape {arr.shape}")
    return arr


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def is_hermitian(M: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff ``max |M - M^H| <= tol`` elementwise."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def opnorm(M: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


@dataclass(frozen=True)
class GridFunction:
    """Matrix values sampled on a strictly increasing grid."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.x) != len(self.values):
            raise ArgumentError("one value per grid point required")
        if len(self.x) > 1 and not np.all(np.diff(self.x) > 0):
            raise ArgumentError("grid must be strictly increasing")

    def __len__(self):
        return len(self.x)


def _sample(coeff, xs: np.ndarray) -> np.ndarray:
    if callable(coeff):
        out = np.array([np.asarray(coeff(float(t)), dtype=np.complex128) for t in xs])
    else:
        out = np.asarray(coeff, dtype=np.complex128)[None, :, :]
    if not np.all(np.isfinite(out)):
        bad = xs[np.nonzero(~np.isfinite(out).all(axis=(1, 2)))[0][0]] if callable(coeff) else xs[0]
        raise IntegrationError(f"non-finite coefficient value at x={bad!r}")
    return np.ascontiguousarray(out)


def default_steps(x0: float, x: float, density: int = DEFAULT_DENSITY) -> int:
    return max(1, int(math.ceil(abs(x - x0) * density - 1e-9)))


def propagate(coeff, x0: float, x: float, Y0: np.ndarray, steps: int | None = None) -> np.ndarray:
    """Solve ``Y' = coeff(x) Y`` from ``Y(x0) = Y0`` to ``x`` with classical RK4.

    ``coeff`` is either a callable ``x -> matrix`` or a constant matrix.
    """
    if steps is None:
        steps = default_steps(x0, x)
    if steps < 1:
        raise ArgumentError("steps must be >= 1")
    Y0 = np.ascontiguousarray(np.asarray(Y0, dtype=np.complex128))
    if x == x0:
        # still validate the generator at the base point
        _sample(coeff, np.array([x0]))
        return Y0.copy()
    h = (x - x0) / steps
    xs = x0 + 0.5 * h * np.arange(2 * steps + 1)
    C = _sample(coeff, xs)
    return kernels.rk4_linear(C, Y0, h, steps)


def fundamental_solution(coeff, x0: float, x: float, steps: int | None = None) -> np.ndarray:
    """Fundamental matrix ``Phi(x, x0)`` of ``u' = coeff(x) u`` with ``Phi(x0, x0) = I``.

    Parameters
    ----------
    coeff : callable or array
        Generator ``x -> (d, d)`` complex matrix, or a constant matrix.
    x0, x : float
        Base point and evaluation point; ``x < x0`` integrates backwards.
    steps : int, optional
        Number of RK4 steps, default 256 per unit length.
    """
    if steps is not None and steps < 1:
        raise ArgumentError("steps must be >= 1")
    d = (np.asarray(coeff(float(x0))) if callable(coeff) else np.asarray(coeff)).shape[0]
    return propagate(coeff, x0, x, np.eye(d, dtype=np.complex128), steps)


def log_det(M: np.ndarray, tol: float = PIVOT_TOL) -> complex:
    """``log det M`` from an LU factorization.

    The imaginary part is the plain sum of pivot arguments (plus ``pi`` per
    row interchange), i.e. it is not reduced modulo ``2 pi``.

    Raises
    ------
    SingularityError
        If some pivot magnitude is ``<= tol * ||M||_F``.
    """
    M = cmatrix(M)
    if M.shape[0] != M.shape[1]:
        raise ArgumentError("log_det needs a square matrix")
    if M.shape[0] == 0:
        return 0j
    scale = float(np.linalg.norm(M))
    if scale == 0.0:
        raise SingularityError("zero matrix", min_pivot=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(M, check_finite=True)
    pivots = np.diag(lu)
    pmin = float(np.min(np.abs(pivots)))
    if pmin <= tol * scale:
        raise SingularityError(f"matrix singular within tolerance (min pivot {pmin:.3e})", min_pivot=pmin)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    return complex(np.sum(np.log(np.abs(pivots))), np.sum(np.angle(pivots)) + math.pi * swaps)


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if not a < b:
        raise ArgumentError("need a < b")
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * t + 0.5 * (a + b), half * w


def fd_weights(offsets: Sequence[int], order: int) -> np.ndarray:
    """Finite-difference weights on integer ``offsets`` for the ``order``-th derivative (unit spacing)."""
    offs = np.asarray(offsets, dtype=float)
    k = len(offs)
    V = np.vander(offs, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def stencil_offsets(x: float, h: float, lo: float, hi: float, order: int = 1) -> list[int]:
    """Integer offsets of a 4th-order stencil around ``x`` that fit in ``[lo, hi]``.

    Central 5-point where possible, shifted one-sided stencils near the ends.
    """
    npts = 5 if order == 1 else 6 if order == 2 else None
    if npts is None:
        raise ArgumentError("only first and second derivatives are supported")
    eps = 1e-9 * abs(h)
    left = int(math.floor((x - lo + eps) / h)) if math.isfinite(lo) else npts
    right = int(math.floor((hi - x + eps) / h)) if math.isfinite(hi) else npts
    if left + right + 1 < npts:
        raise ArgumentError("interval too short for a 4th-order stencil")
    if order == 1 and left >= 2 and right >= 2:
        return [-2, -1, 0, 1, 2]
    if order == 2 and left >= 2 and right >= 2:
        return [-2, -1, 0, 1, 2]
    start = -min(left, npts // 2)
    if start + npts - 1 > right:
        start = right - npts + 1
    return list(range(start, start + npts))


def derivative(f: Callable[[float], np.ndarray], x: float, h: float, order: int = 1,
               lo: float = -math.inf, hi: float = math.inf):
    """4th-order finite-difference derivative of ``f`` at ``x`` with spacing ``h``."""
    offs = stencil_offsets(x, h, lo, hi, order)
    if offs == [-2, -1, 0, 1, 2]:
        # paired differences: exactly zero on constants
        fm2, fm1, f2, f1 = (np.asarray(f(x + k * h)) for k in (-2, -1, 2, 1))
        if order == 1:
            return (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * h)
        f0 = np.asarray(f(x))
        return (16.0 * ((f1 - f0) + (fm1 - f0)) - ((f2 - f0) + (fm2 - f0))) / (12.0 * h * h)
    # weights sum to zero, so differencing against f(x) keeps constants exact
    w = fd_weights(offs, order)
    f0 = np.asarray(f(x))
    acc = np.zeros_like(f0 * 1.0)
    for k, wk in zip(offs, w):
        if k != 0:
            acc = acc + wk * (np.asarray(f(x + k * h)) - f0)
    return acc / h**order


def grid_derivative(values: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """4th-order finite differences along axis 0 of uniformly sampled data."""
    values = np.asarray(values)
    n = values.shape[0]
    out = np.empty_like(values, dtype=np.result_type(values, float))
    if n >= 5:
        w = fd_weights([-2, -1, 0, 1, 2], order)
        out[2:n - 2] = sum(wk * values[2 + k:n - 2 + k] for wk, k in zip(w, range(-2, 3)))
        edge = [0, 1, n - 2, n - 1]
    else:
        edge = range(n)
    for i in edge:
        offs = stencil_offsets(float(i), 1.0, 0.0, float(n - 1), order)
        w = fd_weights(offs, order)
        out[i] = np.tensordot(w, values[[i + k for k in offs]], axes=(0, 0))
    return out / h**order
