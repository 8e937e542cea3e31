"""Vessel state ``(A, B(x), X(x))`` from the standard construction, with
residuals of the four vessel conditions and structural classification."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as la
from scipy.integrate import cumulative_simpson

from . import kernels
from .errors import ArgumentError, DomainError, IntervalError, PreconditionError
from .numerics import (DEFAULT_DENSITY, GridFunction, cmatrix, derivative, hermitian_part,
                       is_hermitian)
from .params import VesselParameters, sl_parameters

LYAPUNOV_TOL = 1e-10
X_SINGULAR_TOL = 1e-10
DEFAULT_SPAN = 10.0


@dataclass(frozen=True)
class VesselClassification:
    dissipative: bool
    minimal: bool
    m_A: float
    krylov_rank: int
    negative_squares: tuple[int, ...] = field(default=(), repr=False)
    """Negative-eigenvalue count of X(x) at each sampled point."""


@dataclass(frozen=True)
class VesselResiduals:
    db: float
    lyapunov: float
    dx: float
    linkage: float

    def max(self) -> float:
        return max(self.db, self.lyapunov, self.dx, self.linkage)

    def as_dict(self) -> dict:
        return {"db": self.db, "lyapunov": self.lyapunov, "dx": self.dx, "linkage": self.linkage}


def _fro(M) -> float:
    return float(np.linalg.norm(M))


def lyapunov_residual(A, X, B, sigma1) -> float:
    return _fro(A @ X + X @ A.conj().T + B @ sigma1 @ B.conj().T)


class Vessel:
    """A vessel with finite-dimensional inner space.

    ``B(x)`` and ``X(x)`` are computed eagerly on a uniform grid
    ``x0 + k/density`` covering ``span`` by one RK4 sweep in each direction.
    Off-grid queries integrate from the nearest grid point; nothing is
    interpolated.  Use :func:`standard_construction` to build one.
    """

    def __init__(self, params: VesselParameters, A, B0, X0, x0: float, *,
                 span: tuple[float, float] | None = None, density: int = DEFAULT_DENSITY):
        self.params = params
        self.A = cmatrix(A)
        self.B0 = cmatrix(B0)
        self.X0 = cmatrix(X0)
        self.x0 = float(x0)
        self.dim_H, self.dim_E = self.B0.shape
        if self.A.shape != (self.dim_H, self.dim_H) or self.X0.shape != (self.dim_H, self.dim_H):
            raise ArgumentError("A, X0 must be dim_H x dim_H and B0 dim_H x dim_E")
        if self.dim_E != params.dim_E:
            raise ArgumentError("B0 column count must equal params.dim_E")
        if not params.contains(self.x0):
            raise DomainError(f"x0={x0} outside interval {params.interval}")
        if density < 1:
            raise ArgumentError("density must be >= 1")
        self.density = int(density)
        self.h = 1.0 / self.density
        self.span = self._resolve_span(span)
        self.warnings: list[str] = []
        self._sweep()
        self._track_validity()

    # -- construction -----------------------------------------------------
    def _resolve_span(self, span):
        a, b = self.params.interval
        if span is None:
            lo = a if math.isfinite(a) else self.x0
            hi = b if math.isfinite(b) else self.x0 + DEFAULT_SPAN
        else:
            lo, hi = float(span[0]), float(span[1])
        lo, hi = max(lo, a), min(hi, b)
        if not lo <= self.x0 <= hi:
            raise DomainError(f"sweep span [{lo}, {hi}] must contain x0={self.x0}")
        return lo, hi

    def _coefficients(self, xs):
        p = self.params
        if p.is_constant:
            xs = xs[:1]
        M, N, S = [], [], []
        for t in xs:
            s1inv = np.linalg.inv(p.s1(t))
            M.append(p.s2(t) @ s1inv)
            N.append((p.g(t) + p.ds1(t)) @ s1inv)
            S.append(p.s2(t))
        return (np.ascontiguousarray(np.array(M, dtype=np.complex128)),
                np.ascontiguousarray(np.array(N, dtype=np.complex128)),
                np.ascontiguousarray(np.array(S, dtype=np.complex128)))

    def _integrate(self, x_from, B, X, x_to, nsteps):
        h = (x_to - x_from) / nsteps
        xs = x_from + 0.5 * h * np.arange(2 * nsteps + 1)
        M, N, S = self._coefficients(xs)
        return kernels.rk4_sweep(self.A, M, N, S, np.array(B, dtype=np.complex128, order="C"),
                                 np.array(X, dtype=np.complex128, order="C"), h, nsteps)

    def _sweep(self):
        lo, hi = self.span
        eps = 1e-9
        nr = int(math.floor((hi - self.x0) * self.density + eps))
        nl = int(math.floor((self.x0 - lo) * self.density + eps))
        self._k0 = nl
        Bs, Xs = [self.B0[None]], [self.X0[None]]
        if nr > 0:
            Br, Xr = self._integrate(self.x0, self.B0, self.X0, self.x0 + nr * self.h, nr)
            Bs.append(Br[1:])
            Xs.append(Xr[1:])
        if nl > 0:
            Bl, Xl = self._integrate(self.x0, self.B0, self.X0, self.x0 - nl * self.h, nl)
            Bs.insert(0, Bl[:0:-1])
            Xs.insert(0, Xl[:0:-1])
        self.grid = self.x0 + self.h * np.arange(-nl, nr + 1)
        self.B_grid = np.concatenate(Bs)
        self.X_grid = np.concatenate(Xs)
        self.B_grid.setflags(write=False)
        self.X_grid.setflags(write=False)

    def _track_validity(self):
        eig = np.linalg.eigvalsh(self.X_grid)
        smin = np.min(np.abs(eig), axis=1)
        k0 = self._k0
        # an eigenvalue crossing zero between grid points shows up as an inertia change
        negs = np.sum(eig < 0, axis=1)
        ok = (smin > X_SINGULAR_TOL) & (negs == negs[k0])
        if not ok[k0]:
            raise IntervalError("X0 is singular")
        lo_k, hi_k = k0, k0
        while lo_k > 0 and ok[lo_k - 1]:
            lo_k -= 1
        while hi_k < len(ok) - 1 and ok[hi_k + 1]:
            hi_k += 1
        self._valid_k = (lo_k, hi_k)
        self.sigma_min_grid = smin
        if lo_k > 0 or hi_k < len(ok) - 1:
            msg = (f"X(x) loses invertibility; valid interval truncated to "
                   f"[{self.grid[lo_k]}, {self.grid[hi_k]}]")
            self.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)

    # -- accessors --------------------------------------------------------
    @property
    def valid_range(self) -> tuple[float, float]:
        """Largest sub-interval of the sweep around x0 where X(x) stays invertible."""
        a, b = self._valid_k
        return float(self.grid[a]), float(self.grid[b])

    @property
    def valid_slice(self) -> slice:
        return slice(self._valid_k[0], self._valid_k[1] + 1)

    @property
    def b_cache(self) -> GridFunction:
        return GridFunction(self.grid, self.B_grid)

    @property
    def x_cache(self) -> GridFunction:
        return GridFunction(self.grid, self.X_grid)

    def index_of(self, x: float):
        """Grid index of ``x`` or ``None`` when ``x`` is off-grid."""
        k = (x - self.x0) * self.density
        kr = round(k)
        if abs(k - kr) > 1e-7:
            return None
        idx = int(kr) + self._k0
        if 0 <= idx < len(self.grid):
            return idx
        return None

    def _check_domain(self, x):
        if not self.params.contains(x):
            raise DomainError(f"x={x} outside interval {self.params.interval}")

    def state(self, x: float, check_valid: bool = True):
        """``(B(x), X(x))`` from the cache or by short integration from the nearest grid point."""
        x = float(x)
        self._check_domain(x)
        lo, hi = self.valid_range
        slack = 1e-9
        if check_valid and self.span[0] - slack <= x <= self.span[1] + slack and not (lo - slack <= x <= hi + slack):
            raise IntervalError(f"X(x) not invertible at x={x} (valid range [{lo}, {hi}])")
        idx = self.index_of(x)
        if idx is not None:
            return self.B_grid[idx], self.X_grid[idx]
        a, b = self._valid_k
        k = int(round((x - self.x0) * self.density)) + self._k0
        k = min(max(k, a), b)
        xk = float(self.grid[k])
        nsteps = max(2, int(math.ceil(abs(x - xk) * self.density * 2)))
        Btr, Xtr = self._integrate(xk, self.B_grid[k], self.X_grid[k], x, nsteps)
        B, X = Btr[-1], Xtr[-1]
        if check_valid and not (self.span[0] - slack <= x <= self.span[1] + slack):
            if np.min(np.abs(np.linalg.eigvalsh(X))) <= X_SINGULAR_TOL:
                raise IntervalError(f"X(x) not invertible at x={x}")
        return B, X

    def B(self, x):
        return self.state(x)[0]

    def X(self, x):
        return self.state(x)[1]

    def W(self, x):
        """The Hermitian ``m x m`` matrix ``B(x)^H X(x)^{-1} B(x)``."""
        B, X = self.state(x)
        return hermitian_part(B.conj().T @ np.linalg.solve(X, B))

    @cached_property
    def W_grid(self) -> np.ndarray:
        s = self.valid_slice
        B, X = self.B_grid[s], self.X_grid[s]
        W = np.swapaxes(B.conj(), 1, 2) @ np.linalg.solve(X, B)
        return 0.5 * (W + np.swapaxes(W.conj(), 1, 2))

    @cached_property
    def gamma_star_grid(self) -> np.ndarray:
        """gamma_star at every valid grid point."""
        p, W = self.params, self.W_grid
        if p.is_constant:
            T = p.s2(0.0) @ W @ p.s1(0.0)
            g = p.g(0.0)[None]
        else:
            xs = self.valid_grid
            T = np.array([p.s2(t) @ w @ p.s1(t) for t, w in zip(xs, W)])
            g = np.array([p.g(t) for t in xs])
        return g + (T - np.swapaxes(T.conj(), 1, 2))

    @property
    def valid_grid(self) -> np.ndarray:
        return self.grid[self.valid_slice]

    def linkage(self, x, W=None) -> np.ndarray:
        """gamma_star(x) from the linkage condition."""
        p = self.params
        if W is None:
            W = self.W(x)
        T = p.s2(x) @ W @ p.s1(x)
        # T - T^H keeps gamma_star + gamma_star^H = gamma + gamma^H bit-exact
        return p.g(x) + (T - T.conj().T)

    def gamma_star(self, x) -> np.ndarray:
        return self.linkage(x)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def __repr__(self):
        return (f"Vessel(family={self.params.family}, dim_H={self.dim_H}, dim_E={self.dim_E}, "
                f"x0={self.x0}, span={self.span}, valid={self.valid_range})")


def standard_construction(params: VesselParameters, A, B0, X0, x0: float = 0.0, *,
                          span=None, density: int = DEFAULT_DENSITY,
                          lyapunov_tol: float = LYAPUNOV_TOL) -> Vessel:
    """Build a vessel from ``(A, B0, X0)`` at ``x0``.

    B is evolved from B0, X from X0, and gamma_star is produced by the
    linkage condition.  The result is valid on the largest sub-interval of
    the sweep where X(x) stays invertible (recorded in ``valid_range``).
    """
    A, B0, X0 = cmatrix(A), cmatrix(B0), cmatrix(X0)
    if not is_hermitian(X0, 1e-12):
        raise PreconditionError("X0 must be Hermitian", residual=_fro(X0 - X0.conj().T))
    s1 = params.s1(x0)
    res = lyapunov_residual(A, X0, B0, s1)
    if res > lyapunov_tol:
        raise PreconditionError(f"Lyapunov residual {res:.3e} at x0 exceeds {lyapunov_tol:.1e}",
                                residual=res)
    if X0.size and np.min(np.abs(np.linalg.eigvalsh(hermitian_part(X0)))) <= X_SINGULAR_TOL:
        raise PreconditionError("X0 is not invertible")
    params.validate([x0])
    return Vessel(params, A, B0, X0, x0, span=span, density=density)


# -- the four vessel conditions ------------------------------------------

def evolve_B(v: Vessel, x: float, steps: int | None = None) -> np.ndarray:
    """B(x).  With ``steps`` given, integrates directly from x0 with that many RK4 steps."""
    if steps is None:
        return v.B(x)
    if steps < 1:
        raise ArgumentError("steps must be >= 1")
    v._check_domain(x)
    if x == v.x0:
        return v.B0.copy()
    Btr, _ = v._integrate(v.x0, v.B0, v.X0, float(x), int(steps))
    return Btr[-1]


def evolve_X(v: Vessel, x: float) -> np.ndarray:
    """X(x) = X0 + integral of B sigma2 B^H, accumulated alongside B in the sweep."""
    return v.X(x)


def _stencil_bounds(v: Vessel):
    lo, hi = v.valid_range
    return max(lo, v.span[0]), min(hi, v.span[1])


def vessel_residuals(v: Vessel, x: float) -> VesselResiduals:
    """Norms of the residuals of the four vessel conditions at ``x``."""
    p = v.params
    B, X = v.state(x)
    lo, hi = _stencil_bounds(v)
    s1, s2, g = p.s1(x), p.s2(x), p.g(x)
    dBs1 = derivative(lambda t: v.B(t) @ p.s1(t), x, v.h, lo=lo, hi=hi)
    db = _fro(dBs1 + v.A @ B @ s2 + B @ g)
    lyap = lyapunov_residual(v.A, X, B, s1)
    dX = derivative(v.X, x, v.h, lo=lo, hi=hi)
    dx = _fro(dX - B @ s2 @ B.conj().T)
    W = v.W(x)
    produced = v.linkage(x, W)
    declared = p.gs(x) if p.gamma_star is not None else produced
    link = max(_fro(declared - produced),
               _fro(produced + produced.conj().T + p.ds1(x)))
    return VesselResiduals(db, lyap, dx, link)


def krylov_rank(A, B, tol: float = 1e-10) -> int:
    n = A.shape[0]
    blocks, cur = [], B
    for _ in range(n):
        blocks.append(cur)
        cur = A @ cur
    K = np.hstack(blocks)
    if K.size == 0:
        return 0
    s = np.linalg.svd(K, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def pbh_minimal(A, B, tol: float = 1e-10) -> bool:
    """Popov-Belevitch-Hautus test: rank [A - mu I, B] = n for every eigenvalue mu."""
    n = A.shape[0]
    scale = max(np.linalg.norm(A), np.linalg.norm(B), 1.0)
    if np.linalg.norm(B) == 0:
        return False
    for mu in np.linalg.eigvals(A):
        s = np.linalg.svd(np.hstack([A - mu * np.eye(n), B]), compute_uv=False)
        if s[n - 1] <= tol * scale:
            return False
    return True


def classify(v: Vessel, grid=None) -> VesselClassification:
    """Dissipativity on ``grid`` (default: the valid cached grid), minimality at x0 and m(A)."""
    if grid is None:
        Xs = v.X_grid[v.valid_slice]
    else:
        Xs = np.array([v.X(t) for t in grid])
    eig = np.linalg.eigvalsh(Xs)
    dissipative = bool(np.all(eig[:, 0] > 0))
    negsq = tuple(int(c) for c in np.sum(eig < 0, axis=1))
    minimal = pbh_minimal(v.A, v.B0)
    m_A = float(np.max(v.eigenvalues.imag))
    return VesselClassification(dissipative, minimal, m_A, krylov_rank(v.A, v.B0), negsq)


def hermitian_sqrt(X: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(hermitian_part(X))
    if np.any(w <= 0):
        raise PreconditionError(f"X0 is not positive definite (min eigenvalue {w.min():.3e})")
    return (U * np.sqrt(w)) @ U.conj().T


def normalize_X0(v: Vessel) -> Vessel:
    """Similar vessel with X(x0) = I via V = sqrt(X0); the transfer function is unchanged."""
    V = hermitian_sqrt(v.X0)
    Vinv = np.linalg.inv(V)
    A = Vinv @ v.A @ V
    B0 = Vinv @ v.B0
    return standard_construction(v.params, A, B0, np.eye(v.dim_H), v.x0, span=v.span,
                                 density=v.density)


# -- fixtures ---------------------------------------------------------------

def rank1_vessel(kappa: float = 1.0, span=(0.0, DEFAULT_SPAN), density: int = DEFAULT_DENSITY,
                 x0: float = 0.0, interval=None) -> Vessel:
    """SL vessel with A = [i kappa^2], B0 = [1, 0], X0 = [1].

    For kappa = 1: B(x) = [cos x, -i sin x] and tau(x) = 1 + x/2 + sin(2x)/4.
    """
    interval = (x0, math.inf) if interval is None else interval
    return standard_construction(sl_parameters(interval), [[1j * kappa**2]], [[1.0, 0.0]],
                                 [[1.0]], x0, span=span, density=density)


def zero_vessel(span=(0.0, DEFAULT_SPAN), density: int = DEFAULT_DENSITY) -> Vessel:
    """SL vessel with B0 = 0 (dim_H = 1, A = [i], X0 = [1]); S = I identically."""
    return standard_construction(sl_parameters((0.0, math.inf)), [[1j]], [[0.0, 0.0]], [[1.0]], 0.0,
                                 span=span, density=density)


def diag_vessel(X0=None, span=(0.0, DEFAULT_SPAN), density: int = DEFAULT_DENSITY) -> Vessel:
    """SL vessel with A = diag(i, 4i), B0 rows [1, 0], [1, 0] and X0 = I (or a given diagonal)."""
    X0 = np.eye(2) if X0 is None else X0
    return standard_construction(sl_parameters((0.0, math.inf)), np.diag([1j, 4j]),
                                 [[1.0, 0.0], [1.0, 0.0]], X0, 0.0, span=span, density=density)


# -- series oracle ----------------------------------------------------------

def peano_baker_B(A, B0, params: VesselParameters, x0: float, xs, terms: int = 30,
                  n_grid: int = 4001) -> np.ndarray:
    """B(x) from the operator power series ``sum A^n B0 Psi_n(x) E(x)^{-1}``.

    Test oracle for constant parameters and small ``dim_H``; ``xs`` must be
    on one side of ``x0``.  ``Psi_n`` are built by repeated cumulative
    Simpson quadrature on ``n_grid`` points.
    """
    if not params.is_constant:
        raise ArgumentError("series oracle supports constant parameters only")
    A, B0 = cmatrix(A), cmatrix(B0)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    x_end = xs[np.argmax(np.abs(xs - x0))]
    if np.any((xs - x0) * (x_end - x0) < 0):
        raise ArgumentError("all evaluation points must lie on one side of x0")
    s1inv = np.linalg.inv(params.s1(x0))
    M = params.s2(x0) @ s1inv
    N = (params.g(x0) + params.ds1(x0)) @ s1inv
    t = np.linspace(x0, x_end, n_grid) if x_end != x0 else np.array([x0, x0 + 1e-12])
    sign, dist = (1.0 if x_end >= x0 else -1.0), np.abs(t - x0)
    E = np.array([la.expm(N * (tt - x0)) for tt in t])
    Einv = np.linalg.inv(E)
    Et = Einv @ M @ E
    m = B0.shape[1]
    psi = np.broadcast_to(np.eye(m, dtype=np.complex128), (len(t), m, m)).copy()
    AnB = B0.copy()
    total = np.einsum("ij,tjk->tik", AnB, psi)
    for _ in range(1, terms):
        integrand = -(psi @ Et)
        psi = sign * (cumulative_simpson(integrand.real, x=dist, axis=0, initial=0)
                      + 1j * cumulative_simpson(integrand.imag, x=dist, axis=0, initial=0))
        AnB = A @ AnB
        total = total + np.einsum("ij,tjk->tik", AnB, psi)
    Bt = total @ Einv
    order = np.argsort(t)
    t, Bt = t[order], Bt[order]
    flat = Bt.reshape(len(t), -1)
    out = np.empty((len(xs), flat.shape[1]), dtype=np.complex128)
    for j in range(flat.shape[1]):
        out[:, j] = np.interp(xs, t, flat[:, j].real) + 1j * np.interp(xs, t, flat[:, j].imag)
    return out.reshape((len(xs),) + B0.shape)
